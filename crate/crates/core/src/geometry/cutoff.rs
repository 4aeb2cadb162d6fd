//! Space-time cutoff weights restricting traces to the measured set.
//!
//! The weight is a product of a C1 cosine ramp in angle (down from the
//! rotated arc's plateau to its edges) and one in time (down from the
//! recording duration minus the taper to the duration itself).

use crate::error::{Error, Result};
use crate::geometry::{circle_distance, AcquisitionSetup, ArcInterval, BoundaryParametrization};
use crate::scalar::{real, Scalar};

/// Cutoff for one rotation, evaluated in closed form.
#[derive(Debug, Clone)]
pub struct Cutoff<T> {
    arc: ArcInterval<T>,
    taper_angle: T,
    duration: T,
    taper_time: T,
}

/// Builds the cutoff weight for the i-th rotation of the setup.
pub fn build_cutoff<T: Scalar>(setup: &AcquisitionSetup<T>, i: usize) -> Result<Cutoff<T>> {
    if i >= setup.rotation_count() {
        return Err(Error::Setup(format!(
            "rotation index {i} out of range ({} rotations)",
            setup.rotation_count()
        )));
    }
    let arc = setup.arc_for(i);
    if !arc.is_full_circle() && setup.taper_angle() >= arc.half_width {
        return Err(Error::Setup("angular taper is wider than the arc".into()));
    }
    if setup.taper_time() >= setup.duration_at(arc.center) {
        return Err(Error::Setup(
            "time taper is wider than the recording window".into(),
        ));
    }
    Ok(Cutoff {
        arc,
        taper_angle: setup.taper_angle(),
        duration: setup.recording_duration(),
        taper_time: setup.taper_time(),
    })
}

/// 1 on [0, 1-taper/width], cosine ramp to 0 at 1; evaluated on the raw
/// coordinate `d` against plateau end `lo` and support end `hi`.
#[inline]
fn ramp<T: Scalar>(d: T, lo: T, hi: T) -> T {
    if d <= lo {
        T::one()
    } else if d >= hi {
        T::zero()
    } else {
        let u = (d - lo) / (hi - lo);
        real::<T>(0.5) * (T::one() + (T::PI() * u).cos())
    }
}

impl<T: Scalar> Cutoff<T> {
    /// Pointwise value at time `t` and boundary angle `angle`.
    pub fn eval(&self, t: T, angle: T) -> T {
        if t < T::zero() || t >= self.duration {
            return T::zero();
        }
        let time_w = ramp(t, self.duration - self.taper_time, self.duration);
        let angle_w = if self.arc.is_full_circle() {
            T::one()
        } else {
            let d = circle_distance(angle, self.arc.center);
            ramp(
                d,
                self.arc.half_width - self.taper_angle,
                self.arc.half_width,
            )
        };
        time_w * angle_w
    }

    pub fn arc(&self) -> &ArcInterval<T> {
        &self.arc
    }

    pub fn plateau_arc(&self) -> Option<ArcInterval<T>> {
        self.arc.shrunk(self.taper_angle)
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    /// Samples the weight on a trace lattice (time-major layout).
    pub fn sample(
        &self,
        param: &BoundaryParametrization<T>,
        n_steps: usize,
        dt: T,
    ) -> SampledCutoff<T> {
        let nb = param.n_points();
        let mut weights = vec![T::zero(); n_steps * nb];
        for step in 0..n_steps {
            let t = dt * real::<T>(step as f64);
            for k in 0..nb {
                weights[step * nb + k] = self.eval(t, param.angle(k));
            }
        }
        SampledCutoff {
            n_steps,
            dt,
            n_points: nb,
            weights,
        }
    }
}

/// Cutoff sampled on a concrete trace lattice.
#[derive(Debug, Clone)]
pub struct SampledCutoff<T> {
    pub n_steps: usize,
    pub dt: T,
    pub n_points: usize,
    pub weights: Vec<T>,
}
