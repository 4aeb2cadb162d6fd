//! Preconditioned fixed-point reconstruction of the absorption map from
//! measured traces: back-propagate the weighted data residual, divide by
//! the symbol weight, take a damped step, project onto the admissible set.
//! The step is halved while it would increase the data residual.

use crate::acoustics::{back_propagate, BoundaryTrace};
use crate::error::{Error, Result};
use crate::geometry::ScalarField;
use crate::inverse::operator::{symbol_weight, LinearizedOperator, SymbolWeight};
use crate::inverse::{h1_norm_field, ForwardModel};
use crate::optics::AbsorptionMap;
use crate::scalar::{as_f64, real, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct ReconstructionParams<T> {
    pub max_iterations: usize,
    /// Base step length of the fixed-point update.
    pub step: T,
    /// Stop when the relative data residual falls below this.
    pub residual_tol: T,
    /// The preconditioner divides by `max(weight, fraction * scale)` where
    /// the scale is the larger of the weight maximum and the light-field
    /// maximum over the support.
    pub weight_floor_fraction: T,
    /// Fan resolution of the symbol weight.
    pub n_dirs: usize,
}

impl<T: Scalar> Default for ReconstructionParams<T> {
    fn default() -> Self {
        ReconstructionParams {
            max_iterations: 50,
            step: real(0.9),
            residual_tol: real(1e-3),
            weight_floor_fraction: real(0.05),
            n_dirs: 32,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IterationRecord<T> {
    pub residual: T,
    /// Absolute L2 distance to the supplied ground truth.
    pub l2_error: Option<T>,
    /// Absolute H1 distance to the supplied ground truth.
    pub h1_error: Option<T>,
}

#[derive(Debug, Clone)]
pub struct ReconstructionState<T> {
    pub sigma: AbsorptionMap<T>,
    pub history: Vec<IterationRecord<T>>,
    pub iterations: usize,
    pub converged: bool,
    /// Residual traces of the final iterate, one per rotation.
    pub residual_traces: Vec<BoundaryTrace<T>>,
    /// Back-projected summed residual driving the last update.
    pub back_projected: ScalarField<T>,
    pub preconditioner: SymbolWeight<T>,
}

fn trace_stack_norm<T: Scalar>(traces: &[BoundaryTrace<T>]) -> T {
    traces
        .iter()
        .fold(T::zero(), |acc, t| {
            let n = t.l2_norm();
            acc + n * n
        })
        .sqrt()
}

/// Runs the fixed-point iteration from `sigma0` against the measured data.
/// Aborts with diagnostics when the residual grows five times in a row
/// despite the step safeguard.
pub fn reconstruct<T: Scalar>(
    model: &ForwardModel<T>,
    data: &[BoundaryTrace<T>],
    sigma0: &AbsorptionMap<T>,
    params: &ReconstructionParams<T>,
    ground_truth: Option<&AbsorptionMap<T>>,
) -> Result<ReconstructionState<T>> {
    model.check_data_shape(data)?;
    let mask = model.mask().clone();
    let grid = *mask.grid();

    // the preconditioner is frozen at the initial background
    let symbol = {
        let lin = LinearizedOperator::new(model, sigma0)?;
        symbol_weight(&lin, params.n_dirs)?
    };
    let floor = symbol.max_weight.max(symbol.field_max) * params.weight_floor_fraction;
    let inv_weight: Vec<T> = mask
        .omega_nodes()
        .iter()
        .map(|&idx| {
            let w = symbol.weight.values()[idx].max(floor);
            if w > T::zero() {
                T::one() / w
            } else {
                T::zero()
            }
        })
        .collect();

    let data_norm = trace_stack_norm(data);
    let relative = |residuals: &[BoundaryTrace<T>]| -> T {
        let abs = trace_stack_norm(residuals);
        if data_norm > T::zero() {
            abs / data_norm
        } else if abs > T::zero() {
            T::infinity()
        } else {
            T::zero()
        }
    };
    let residuals_for = |sigma: &AbsorptionMap<T>| -> Result<Vec<BoundaryTrace<T>>> {
        let predicted = model.measurements(sigma)?;
        data.iter().zip(&predicted).map(|(d, p)| d.sub(p)).collect()
    };
    let distances = |sigma: &AbsorptionMap<T>| -> Result<(Option<T>, Option<T>)> {
        match ground_truth {
            Some(truth) => {
                let diff = sigma.field().sub(truth.field())?;
                Ok((Some(diff.l2_norm()), Some(h1_norm_field(&diff))))
            }
            None => Ok((None, None)),
        }
    };

    let mut sigma = sigma0.clone();
    let mut residual_traces = residuals_for(&sigma)?;
    let mut residual = relative(&residual_traces);
    let mut history: Vec<IterationRecord<T>> = Vec::new();
    let mut back_projected = ScalarField::zeros(&grid);
    let mut growth_streak = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    for k in 0..=params.max_iterations {
        let (l2_error, h1_error) = distances(&sigma)?;
        history.push(IterationRecord {
            residual,
            l2_error,
            h1_error,
        });

        if residual <= params.residual_tol {
            converged = true;
            iterations = k;
            break;
        }
        // stagnation at a noise floor is not divergence; only count
        // meaningful growth
        let grew = history.len() >= 2
            && residual > history[history.len() - 2].residual * (T::one() + real::<T>(1e-3));
        if grew {
            growth_streak += 1;
            if growth_streak >= 5 {
                let recent = history
                    .iter()
                    .rev()
                    .take(6)
                    .map(|r| as_f64(r.residual))
                    .collect::<Vec<_>>();
                return Err(Error::Diverged {
                    iteration: k,
                    recent,
                });
            }
        } else {
            growth_streak = 0;
        }
        if k == params.max_iterations {
            iterations = k;
            break;
        }

        // one backward solve for the summed weighted residual
        let mut summed = residual_traces[0].clone();
        for tr in &residual_traces[1..] {
            summed = summed.add(tr)?;
        }
        back_projected = back_propagate(&summed, model.sound_speed(), model.diffusion_tol())?;

        // damped, projected update; halve the step while it makes things
        // worse, accepting the most damped attempt regardless
        let mut step = params.step;
        for attempt in 0..6 {
            let mut values = sigma.field().values().to_vec();
            for (slot, &idx) in mask.omega_nodes().iter().enumerate() {
                let update = step * inv_weight[slot] * back_projected.values()[idx];
                values[idx] = (values[idx] + update).max(T::zero());
            }
            let candidate =
                AbsorptionMap::new(ScalarField::from_values(&grid, values)?, mask.clone())?;
            let cand_residuals = residuals_for(&candidate)?;
            let cand_residual = relative(&cand_residuals);
            if cand_residual <= residual || attempt == 5 {
                sigma = candidate;
                residual_traces = cand_residuals;
                residual = cand_residual;
                break;
            }
            step = step * real::<T>(0.5);
        }
        iterations = k + 1;
    }

    Ok(ReconstructionState {
        sigma,
        history,
        iterations,
        converged,
        residual_traces,
        back_projected,
        preconditioner: symbol,
    })
}
