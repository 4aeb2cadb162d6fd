//! Phantom generation: sums of flat-topped cosine-taper bumps inside the
//! support disk, optionally a plateau filling the whole support.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::DomainMask;
use crate::optics::AbsorptionMap;
use crate::scalar::{as_f64, real, Scalar};

/// One radially symmetric bump: value `amplitude` inside
/// `radius - taper`, cosine ramp to zero at `radius`.
#[derive(Debug, Clone, Copy)]
pub struct Bump<T> {
    pub center: [T; 2],
    pub radius: T,
    pub amplitude: T,
    pub taper: T,
}

impl<T: Scalar> Bump<T> {
    pub fn eval(&self, x: T, y: T) -> T {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let d = (dx * dx + dy * dy).sqrt();
        if d >= self.radius {
            T::zero()
        } else if d <= self.radius - self.taper {
            self.amplitude
        } else {
            let u = (d - (self.radius - self.taper)) / self.taper;
            self.amplitude * real::<T>(0.5) * (T::one() + (T::PI() * u).cos())
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhantomSpec<T> {
    pub bumps: Vec<Bump<T>>,
    /// Optional plateau over the whole support disk, tapering to zero at
    /// its edge: `(amplitude, taper)`.
    pub plateau: Option<(T, T)>,
}

impl<T: Scalar> PhantomSpec<T> {
    pub fn empty() -> Self {
        PhantomSpec {
            bumps: Vec::new(),
            plateau: None,
        }
    }
}

/// Evaluates the phantom on the support nodes. Every bump must fit inside
/// the support disk with its taper.
pub fn generate_phantom<T: Scalar>(
    spec: &PhantomSpec<T>,
    mask: &Arc<DomainMask<T>>,
) -> Result<AbsorptionMap<T>> {
    let [ocx, ocy] = mask.omega_center();
    let omega_r = mask.omega_radius();
    for (k, b) in spec.bumps.iter().enumerate() {
        if !(b.radius > T::zero()) || b.amplitude < T::zero() {
            return Err(Error::Config(format!(
                "phantom bump {k}: radius must be positive and amplitude nonnegative"
            )));
        }
        if !(b.taper > T::zero()) || b.taper > b.radius {
            return Err(Error::Config(format!(
                "phantom bump {k}: taper must lie in (0, radius]"
            )));
        }
        let dx = b.center[0] - ocx;
        let dy = b.center[1] - ocy;
        let reach = (dx * dx + dy * dy).sqrt() + b.radius;
        if reach > omega_r {
            return Err(Error::Config(format!(
                "phantom bump {k} escapes the support disk (reach {} > {})",
                as_f64(reach),
                as_f64(omega_r),
            )));
        }
    }
    if let Some((amp, taper)) = spec.plateau {
        if amp < T::zero() || !(taper > T::zero()) || taper > omega_r {
            return Err(Error::Config(
                "plateau taper must lie in (0, support radius]".into(),
            ));
        }
    }
    let plateau_bump = spec.plateau.map(|(amp, taper)| Bump {
        center: [ocx, ocy],
        radius: omega_r,
        amplitude: amp,
        taper,
    });
    AbsorptionMap::from_fn(mask.clone(), |x, y| {
        let mut v = T::zero();
        for b in &spec.bumps {
            v += b.eval(x, y);
        }
        if let Some(p) = &plateau_bump {
            v += p.eval(x, y);
        }
        v
    })
}
