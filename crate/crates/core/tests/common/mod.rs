//! Independent oracles shared by the integration tests. Everything here is
//! computed from closed forms or brute force, never through the solvers
//! under test.

#![allow(dead_code)]

use std::f64::consts::PI;

/// First zero of the Bessel function J0.
pub const J0_FIRST_ZERO: f64 = 2.404825557695773;

/// Modified Bessel function I0 by its power series.
pub fn bessel_i0(x: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 1.0f64;
    loop {
        term *= (x / (2.0 * k)) * (x / (2.0 * k));
        sum += term;
        if term < 1e-16 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    recurse(&f, a, b, fa, fm, fb, tol, 40)
}

/// Free-space pressure of a unit Gaussian source (standard deviation
/// `width`) observed at distance `d` from its center at time `t`, for unit
/// sound speed: time derivative of the Abel-weighted disk integral of the
/// circular means.
pub fn gaussian_free_space_pressure(width: f64, d: f64, t: f64) -> f64 {
    let s2 = width * width;
    let circular_mean = |r: f64| -> f64 {
        let a = d * r / s2;
        if a > 500.0 {
            // asymptotic I0 to dodge overflow; relative error ~ 1/(8a)
            let ln = -(d * d + r * r) / (2.0 * s2) + a - 0.5 * (2.0 * PI * a).ln();
            ln.exp() * (1.0 + 1.0 / (8.0 * a))
        } else {
            (-(d * d + r * r) / (2.0 * s2)).exp() * bessel_i0(a)
        }
    };
    let disk_integral = |tt: f64| -> f64 {
        if tt <= 0.0 {
            return 0.0;
        }
        integrate(
            |psi| circular_mean(tt * psi.sin()) * tt * psi.sin(),
            0.0,
            PI / 2.0,
            1e-13,
        )
    };
    let delta = 1e-4;
    if t < 2.5 * delta {
        return (-(d * d) / (2.0 * s2)).exp();
    }
    (disk_integral(t - 2.0 * delta) - 8.0 * disk_integral(t - delta)
        + 8.0 * disk_integral(t + delta)
        - disk_integral(t + 2.0 * delta))
        / (12.0 * delta)
}

/// Exits of the straight line through `x` with unit direction `e` and the
/// circle of radius `rho`: travel times `(t_plus, t_minus)` and the exit
/// points, valid for `|x| <= rho`.
pub fn line_circle_exits(x: [f64; 2], e: [f64; 2], rho: f64) -> (f64, [f64; 2], f64, [f64; 2]) {
    let b = x[0] * e[0] + x[1] * e[1];
    let disc = (b * b - (x[0] * x[0] + x[1] * x[1]) + rho * rho)
        .max(0.0)
        .sqrt();
    let t_plus = -b + disc;
    let t_minus = b + disc;
    (
        t_plus,
        [x[0] + t_plus * e[0], x[1] + t_plus * e[1]],
        t_minus,
        [x[0] - t_minus * e[0], x[1] - t_minus * e[1]],
    )
}

/// Classical fourth-order Runge-Utta integration of a 4-state system with a
/// fixed step; returns the state trajectory until `stop` fires or the time
/// cap is hit. Independent of the tracer under test.
pub fn reference_rk4<F: Fn(&[f64; 4]) -> [f64; 4]>(
    rhs: F,
    mut state: [f64; 4],
    dt: f64,
    t_cap: f64,
    stop: impl Fn(&[f64; 4]) -> bool,
) -> (f64, [f64; 4]) {
    let mut t = 0.0;
    while t < t_cap && !stop(&state) {
        let k1 = rhs(&state);
        let mut s2 = state;
        for i in 0..4 {
            s2[i] += 0.5 * dt * k1[i];
        }
        let k2 = rhs(&s2);
        let mut s3 = state;
        for i in 0..4 {
            s3[i] += 0.5 * dt * k2[i];
        }
        let k3 = rhs(&s3);
        let mut s4 = state;
        for i in 0..4 {
            s4[i] += dt * k3[i];
        }
        let k4 = rhs(&s4);
        for i in 0..4 {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += dt;
    }
    (t, state)
}

/// Relative L2 distance of two fields restricted to the disk of radius
/// `rho` about the grid center.
pub fn disk_rel_l2(
    grid: &rotopat_core::Grid64,
    a: &rotopat_core::Field64,
    b: &rotopat_core::Field64,
) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for idx in 0..grid.node_count() {
        if grid.radius_of(idx) < grid.rho() {
            let d = a.values()[idx] - b.values()[idx];
            num += d * d;
            den += b.values()[idx] * b.values()[idx];
        }
    }
    (num / den).sqrt()
}

pub mod configs {
    //! Standard experiment configurations shared across tests.

    use rotopat_core::acoustics::SoundSpeedMap;
    use rotopat_core::geometry::*;
    use rotopat_core::inverse::ForwardModel;
    use std::f64::consts::PI;
    use std::sync::Arc;

    /// Full measurement pipeline on the standard visible geometry: eight
    /// overlapping arcs sweeping the whole circle, so every line through
    /// the support exits through the measured set within the recording
    /// window.
    pub fn visible_model(n: usize) -> ForwardModel<f64> {
        let grid = Grid::<f64>::new(n, 1.0, 0.25).unwrap();
        let mask = Arc::new(build_mask(&grid, 0.35, [0.0, 0.0]).unwrap());
        let setup = AcquisitionSetup::new(
            Illumination::CosineBump {
                arc: ArcInterval::new(PI, PI / 8.0).unwrap(),
                amplitude: 1.0,
            },
            ArcInterval::new(0.0, PI / 6.0).unwrap(),
            AcquisitionSetup::equispaced_rotations(8),
            2.2,
            2.4,
            PI / 24.0,
            0.1,
        )
        .unwrap();
        let c = SoundSpeedMap::uniform(&grid);
        let param = BoundaryParametrization::for_grid(&grid);
        ForwardModel::new(mask, setup, c, param, 1e-10, 0.5).unwrap()
    }
}
