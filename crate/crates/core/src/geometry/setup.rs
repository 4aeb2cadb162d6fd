//! Acquisition description: base illumination, transducer arc, rotation set,
//! recording schedule and cutoff taper widths.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryFn, BoundaryParametrization};
use crate::scalar::{real, Scalar};

/// Angular interval on the circle, periodic. A half-width of `pi` or more
/// means the whole circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcInterval<T> {
    pub center: T,
    pub half_width: T,
}

/// Periodic angular distance in `[0, pi]`.
pub fn circle_distance<T: Scalar>(a: T, b: T) -> T {
    let two_pi = real::<T>(2.0) * T::PI();
    let mut d = (a - b) % two_pi;
    if d < T::zero() {
        d += two_pi;
    }
    d.min(two_pi - d)
}

impl<T: Scalar> ArcInterval<T> {
    pub fn new(center: T, half_width: T) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::Setup("arc half-width must be positive".into()));
        }
        Ok(ArcInterval { center, half_width })
    }

    pub fn full_circle() -> Self {
        ArcInterval {
            center: T::zero(),
            half_width: T::PI(),
        }
    }

    pub fn is_full_circle(&self) -> bool {
        self.half_width >= T::PI()
    }

    #[inline]
    pub fn contains(&self, angle: T) -> bool {
        self.is_full_circle() || circle_distance(angle, self.center) <= self.half_width
    }

    pub fn rotated(&self, theta: T) -> Self {
        ArcInterval {
            center: self.center + theta,
            half_width: self.half_width,
        }
    }

    /// Arc shrunk by `by` on both ends; `None` when nothing remains.
    /// A full circle stays a full circle.
    pub fn shrunk(&self, by: T) -> Option<Self> {
        if self.is_full_circle() {
            return Some(*self);
        }
        let hw = self.half_width - by;
        (hw > T::zero()).then_some(ArcInterval {
            center: self.center,
            half_width: hw,
        })
    }

    pub fn disjoint_from(&self, other: &Self) -> bool {
        if self.is_full_circle() || other.is_full_circle() {
            return false;
        }
        circle_distance(self.center, other.center) > self.half_width + other.half_width
    }
}

/// Base illumination pattern on the circle. Nonnegative by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Illumination<T> {
    /// Constant value on the whole circle.
    Uniform { amplitude: T },
    /// C1 cosine bump supported on an arc, peak value `amplitude` at the
    /// arc center, zero outside.
    CosineBump { arc: ArcInterval<T>, amplitude: T },
}

impl<T: Scalar> Illumination<T> {
    pub fn eval(&self, angle: T) -> T {
        match self {
            Illumination::Uniform { amplitude } => *amplitude,
            Illumination::CosineBump { arc, amplitude } => {
                let d = circle_distance(angle, arc.center);
                if d >= arc.half_width {
                    T::zero()
                } else {
                    let half = real::<T>(0.5);
                    *amplitude * half * (T::one() + (T::PI() * d / arc.half_width).cos())
                }
            }
        }
    }

    pub fn amplitude(&self) -> T {
        match self {
            Illumination::Uniform { amplitude } | Illumination::CosineBump { amplitude, .. } => {
                *amplitude
            }
        }
    }

    /// Supporting arc, when the pattern is compactly supported.
    pub fn support(&self) -> Option<ArcInterval<T>> {
        match self {
            Illumination::Uniform { .. } => None,
            Illumination::CosineBump { arc, .. } => Some(*arc),
        }
    }

    pub fn sample(&self, param: &BoundaryParametrization<T>) -> BoundaryFn<T> {
        BoundaryFn::from_fn(param, |a| self.eval(a))
    }
}

/// Full acquisition description: what is shone in, where the transducers sit,
/// how the assembly rotates, and for how long each point records.
///
/// The recording duration is a constant profile over the arcs.
#[derive(Debug, Clone)]
pub struct AcquisitionSetup<T> {
    illumination: Illumination<T>,
    transducer_arc: ArcInterval<T>,
    rotations: Vec<T>,
    recording_duration: T,
    total_time: T,
    taper_angle: T,
    taper_time: T,
}

impl<T: Scalar> AcquisitionSetup<T> {
    pub fn new(
        illumination: Illumination<T>,
        transducer_arc: ArcInterval<T>,
        rotations: Vec<T>,
        recording_duration: T,
        total_time: T,
        taper_angle: T,
        taper_time: T,
    ) -> Result<Self> {
        if !(illumination.amplitude() > T::zero()) {
            return Err(Error::Setup(
                "illumination must not be identically zero".into(),
            ));
        }
        if rotations.is_empty() {
            return Err(Error::Setup("need at least one rotation".into()));
        }
        if let Some(sup) = illumination.support() {
            // keep the light source away from the transducers
            if !sup.disjoint_from(&transducer_arc) {
                return Err(Error::Setup(
                    "illumination arc overlaps the transducer arc".into(),
                ));
            }
        }
        if !(recording_duration > T::zero()) {
            return Err(Error::Setup("recording duration must be positive".into()));
        }
        if total_time < recording_duration {
            return Err(Error::Setup(
                "total time must cover the longest recording duration".into(),
            ));
        }
        if !(taper_angle > T::zero()) || !(taper_time > T::zero()) {
            return Err(Error::Setup("taper widths must be positive".into()));
        }
        if !transducer_arc.is_full_circle() && taper_angle >= transducer_arc.half_width {
            return Err(Error::Setup(
                "angular taper is wider than the transducer arc".into(),
            ));
        }
        if taper_time >= recording_duration {
            return Err(Error::Setup(
                "time taper is wider than the recording window".into(),
            ));
        }
        Ok(AcquisitionSetup {
            illumination,
            transducer_arc,
            rotations,
            recording_duration,
            total_time,
            taper_angle,
            taper_time,
        })
    }

    pub fn illumination(&self) -> &Illumination<T> {
        &self.illumination
    }

    pub fn transducer_arc(&self) -> &ArcInterval<T> {
        &self.transducer_arc
    }

    pub fn rotations(&self) -> &[T] {
        &self.rotations
    }

    pub fn rotation_count(&self) -> usize {
        self.rotations.len()
    }

    /// Recording duration at a boundary angle (constant profile).
    pub fn duration_at(&self, _angle: T) -> T {
        self.recording_duration
    }

    pub fn recording_duration(&self) -> T {
        self.recording_duration
    }

    pub fn total_time(&self) -> T {
        self.total_time
    }

    pub fn taper_angle(&self) -> T {
        self.taper_angle
    }

    pub fn taper_time(&self) -> T {
        self.taper_time
    }

    /// Transducer arc after the i-th rotation (the arc is pushed forward).
    pub fn arc_for(&self, i: usize) -> ArcInterval<T> {
        self.transducer_arc.rotated(self.rotations[i])
    }

    /// Rotated arc shrunk by the angular taper: the cutoff plateau.
    pub fn plateau_arc_for(&self, i: usize) -> Option<ArcInterval<T>> {
        self.arc_for(i).shrunk(self.taper_angle)
    }

    /// Illumination for the i-th rotation, sampled on the boundary grid.
    /// The base pattern is precomposed with the rotation.
    pub fn illumination_for(&self, i: usize, param: &BoundaryParametrization<T>) -> BoundaryFn<T> {
        self.illumination.sample(param).rotate(self.rotations[i])
    }

    /// Rotation angles equally spaced over the circle.
    pub fn equispaced_rotations(m: usize) -> Vec<T> {
        (0..m)
            .map(|i| real::<T>(2.0) * T::PI() * real::<T>(i as f64) / real::<T>(m as f64))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bump(center: f64, hw: f64) -> Illumination<f64> {
        Illumination::CosineBump {
            arc: ArcInterval::new(center, hw).unwrap(),
            amplitude: 1.0,
        }
    }

    #[test]
    fn overlapping_source_and_transducers_rejected() {
        let r = AcquisitionSetup::new(
            bump(0.0, PI / 8.0),
            ArcInterval::new(0.1, PI / 6.0).unwrap(),
            vec![0.0],
            2.2,
            2.4,
            PI / 24.0,
            0.1,
        );
        assert!(r.is_err());
    }

    #[test]
    fn uniform_illumination_allows_full_circle_arc() {
        let r = AcquisitionSetup::new(
            Illumination::Uniform { amplitude: 1.0 },
            ArcInterval::full_circle(),
            vec![0.0],
            2.2,
            2.4,
            PI / 24.0,
            0.1,
        );
        assert!(r.is_ok());
    }

    #[test]
    fn cosine_bump_shape() {
        let g = bump(PI, PI / 8.0);
        assert!((g.eval(PI) - 1.0).abs() < 1e-15);
        assert_eq!(g.eval(0.0), 0.0);
        // half height halfway down the taper
        assert!((g.eval(PI + PI / 16.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn arc_membership_wraps() {
        let arc = ArcInterval::new(0.0, 0.3).unwrap();
        assert!(arc.contains(2.0 * PI - 0.1));
        assert!(arc.contains(0.25));
        assert!(!arc.contains(PI));
    }

    #[test]
    fn taper_wider_than_arc_rejected() {
        let r = AcquisitionSetup::new(
            bump(PI, PI / 8.0),
            ArcInterval::new(0.0, 0.1).unwrap(),
            vec![0.0],
            2.2,
            2.4,
            0.2,
            0.1,
        );
        assert!(r.is_err());
    }
}
