//! Empirical stability ratios: compare the H1 distance of two absorption
//! maps with the summed H1 distance of their measured traces.

use crate::error::Result;
use crate::inverse::{h1_norm_field, h1_norm_trace, poincare_constant, ForwardModel};
use crate::optics::AbsorptionMap;
use crate::scalar::{real, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct PairOutcome<T> {
    /// H1 norm of the difference of the two maps.
    pub delta_h1: T,
    /// Summed H1 norms of the per-rotation trace differences.
    pub data_diff_h1: T,
    /// `delta_h1 / data_diff_h1`, absent when the data difference vanishes
    /// together with the map difference.
    pub ratio: Option<T>,
    /// Smallness margin of the second map: Poincare constant times its
    /// W(1,inf) norm.
    pub background_margin: T,
}

#[derive(Debug, Clone)]
pub struct StabilityReport<T> {
    pub pairs_tested: usize,
    pub outcomes: Vec<PairOutcome<T>>,
    /// Largest finite ratio observed (the empirical stability constant).
    pub max_ratio: Option<T>,
    pub poincare_constant: T,
    /// Pairs with vanishing data difference but distinct maps. Must stay
    /// zero whenever the point-coverage condition holds.
    pub injectivity_violations: usize,
}

/// Simulates both maps of every pair through the full pipeline and reports
/// the per-pair stability ratios.
pub fn stability_experiment<T: Scalar>(
    model: &ForwardModel<T>,
    pairs: &[(AbsorptionMap<T>, AbsorptionMap<T>)],
) -> Result<StabilityReport<T>> {
    let c_omega = poincare_constant(model.mask())?;
    let mut outcomes = Vec::with_capacity(pairs.len());
    let mut max_ratio: Option<T> = None;
    let mut violations = 0usize;
    for (sigma, sigma_ref) in pairs {
        let traces_a = model.measurements(sigma)?;
        let traces_b = model.measurements(sigma_ref)?;
        let mut data_diff = T::zero();
        for (a, b) in traces_a.iter().zip(&traces_b) {
            data_diff += h1_norm_trace(&a.sub(b)?);
        }
        let delta = sigma.field().sub(sigma_ref.field())?;
        let delta_h1 = h1_norm_field(&delta);
        let scale = h1_norm_field(sigma.field()).max(h1_norm_field(sigma_ref.field()));
        let data_vanishes = data_diff <= real::<T>(1e-12) * scale.max(T::one());
        let maps_differ = delta_h1 > real::<T>(1e-9) * scale.max(T::one());
        let ratio = if data_vanishes {
            if maps_differ {
                violations += 1;
            }
            None
        } else {
            let r = delta_h1 / data_diff;
            max_ratio = Some(match max_ratio {
                None => r,
                Some(m) => m.max(r),
            });
            Some(r)
        };
        outcomes.push(PairOutcome {
            delta_h1,
            data_diff_h1: data_diff,
            ratio,
            background_margin: c_omega * sigma_ref.w1inf_norm(),
        });
    }
    Ok(StabilityReport {
        pairs_tested: pairs.len(),
        outcomes,
        max_ratio,
        poincare_constant: c_omega,
        injectivity_violations: violations,
    })
}
