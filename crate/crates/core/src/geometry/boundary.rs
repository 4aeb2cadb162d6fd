//! Discretization of the measurement circle and periodic boundary functions.

use crate::error::{Error, Result};
use crate::geometry::Grid;
use crate::scalar::{real, Scalar};

/// Equispaced angular sampling of the circle of radius `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryParametrization<T> {
    n_points: usize,
    rho: T,
}

impl<T: Scalar> BoundaryParametrization<T> {
    pub fn new(n_points: usize, rho: T) -> Result<Self> {
        if n_points < 8 {
            return Err(Error::Geometry(format!(
                "need at least 8 boundary points, got {n_points}"
            )));
        }
        if !(rho > T::zero()) {
            return Err(Error::Geometry("boundary radius must be positive".into()));
        }
        Ok(BoundaryParametrization { n_points, rho })
    }

    /// Samples the circle at roughly the grid resolution (rounded up to a
    /// multiple of 8, at least 32 points).
    pub fn for_grid(grid: &Grid<T>) -> Self {
        let per = real::<T>(2.0) * T::PI() * grid.rho() / grid.spacing();
        let n = per.ceil().to_usize().unwrap_or(32).max(32);
        BoundaryParametrization {
            n_points: n.div_ceil(8) * 8,
            rho: grid.rho(),
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    #[inline]
    pub fn angle(&self, k: usize) -> T {
        real::<T>(2.0) * T::PI() * real::<T>(k as f64) / real::<T>(self.n_points as f64)
    }

    #[inline]
    pub fn point(&self, k: usize) -> [T; 2] {
        let a = self.angle(k);
        [self.rho * a.cos(), self.rho * a.sin()]
    }

    pub fn arc_length_step(&self) -> T {
        real::<T>(2.0) * T::PI() * self.rho / real::<T>(self.n_points as f64)
    }

    /// Neighbouring sample indices and the interpolation weight for an angle.
    #[inline]
    pub fn bracket(&self, angle: T) -> (usize, usize, T) {
        let two_pi = real::<T>(2.0) * T::PI();
        let n = real::<T>(self.n_points as f64);
        let mut u = angle / two_pi * n;
        let nf = self.n_points as f64;
        // wrap into [0, n)
        u = u - (u / n).floor() * n;
        if !(u >= T::zero()) || u.to_f64().map(|v| v >= nf).unwrap_or(true) {
            u = T::zero();
        }
        let mut k0 = u.floor().to_usize().unwrap_or(0).min(self.n_points - 1);
        let mut w = u - real::<T>(k0 as f64);
        // snap to the lattice so grid-aligned angles evaluate exactly
        let snap = real::<T>(1e-9);
        if w < snap {
            w = T::zero();
        } else if w > T::one() - snap {
            k0 = (k0 + 1) % self.n_points;
            w = T::zero();
        }
        (k0, (k0 + 1) % self.n_points, w)
    }
}

/// Function on the circle, stored by its samples; evaluation between samples
/// uses periodic linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFn<T> {
    param: BoundaryParametrization<T>,
    values: Vec<T>,
}

impl<T: Scalar> BoundaryFn<T> {
    pub fn from_fn(param: &BoundaryParametrization<T>, f: impl Fn(T) -> T) -> Self {
        let values = (0..param.n_points()).map(|k| f(param.angle(k))).collect();
        BoundaryFn {
            param: *param,
            values,
        }
    }

    pub fn constant(param: &BoundaryParametrization<T>, v: T) -> Self {
        BoundaryFn {
            param: *param,
            values: vec![v; param.n_points()],
        }
    }

    pub fn from_values(param: &BoundaryParametrization<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != param.n_points() {
            return Err(Error::Shape(format!(
                "boundary function needs {} samples, got {}",
                param.n_points(),
                values.len()
            )));
        }
        Ok(BoundaryFn {
            param: *param,
            values,
        })
    }

    pub fn param(&self) -> &BoundaryParametrization<T> {
        &self.param
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn eval(&self, angle: T) -> T {
        let (k0, k1, w) = self.param.bracket(angle);
        self.values[k0] * (T::one() - w) + self.values[k1] * w
    }

    /// Precomposition with the rotation by `theta`: the result evaluates to
    /// `self(angle + theta)`, so the support of the function moves by `-theta`.
    pub fn rotate(&self, theta: T) -> Self {
        let param = self.param;
        let values = (0..param.n_points())
            .map(|k| self.eval(param.angle(k) + theta))
            .collect();
        BoundaryFn { param, values }
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |a, &v| a.max(v))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |a, &v| a.min(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn param() -> BoundaryParametrization<f64> {
        BoundaryParametrization::new(256, 1.0).unwrap()
    }

    #[test]
    fn rotation_by_zero_is_identity() {
        let p = param();
        let f = BoundaryFn::from_fn(&p, |a| (3.0 * a).sin());
        let g = f.rotate(0.0);
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_by_two_pi_is_identity_on_grid_angles() {
        let p = param();
        let f = BoundaryFn::from_fn(&p, |a| a.cos() + 0.3 * (2.0 * a).sin());
        let g = f.rotate(2.0 * PI);
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_interpolates_linearly_between_samples() {
        let p = BoundaryParametrization::new(8, 1.0).unwrap();
        let mut vals = vec![0.0f64; 8];
        vals[2] = 1.0;
        let f = BoundaryFn::from_values(&p, vals).unwrap();
        let mid = 0.5 * (p.angle(1) + p.angle(2));
        assert!((f.eval(mid) - 0.5).abs() < 1e-14);
        // periodic wrap
        assert!((f.eval(p.angle(2) + 2.0 * PI) - 1.0).abs() < 1e-12);
    }
}
