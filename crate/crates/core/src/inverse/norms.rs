//! Discrete norms and the Poincare constant of the support disk.

use crate::acoustics::BoundaryTrace;
use crate::disk::DiskOperator;
use crate::error::{Error, Result};
use crate::geometry::{DomainMask, ScalarField};
use crate::linalg;
use crate::scalar::{as_f64, real, Scalar};

/// H1 norm of a compactly supported nodal field: `sqrt(sum f^2 h^2 +
/// sum |grad f|^2 h^2)` with forward differences over every grid edge.
/// Extension by zero is built in, so jumps at the support edge count.
pub fn h1_norm_field<T: Scalar>(f: &ScalarField<T>) -> T {
    let grid = f.grid();
    let n = grid.n_per_side();
    let v = f.values();
    let mut value2 = T::zero();
    let mut grad2 = T::zero();
    for j in 0..n {
        for i in 0..n {
            let idx = j * n + i;
            value2 += v[idx] * v[idx];
            if i + 1 < n {
                let d = v[idx + 1] - v[idx];
                grad2 += d * d;
            }
            if j + 1 < n {
                let d = v[idx + n] - v[idx];
                grad2 += d * d;
            }
        }
    }
    let h2 = grid.spacing() * grid.spacing();
    (value2 * h2 + grad2).sqrt()
}

/// H1 norm of a space-time trace: values plus time and arc-length tangential
/// derivatives, trapezoid weights in time, periodic in angle.
pub fn h1_norm_trace<T: Scalar>(tr: &BoundaryTrace<T>) -> T {
    let nb = tr.n_points();
    let dt = tr.dt();
    let ds = tr.param().arc_length_step();
    let half = real::<T>(0.5);
    let mut value2 = T::zero();
    let mut angular2 = T::zero();
    for step in 0..tr.n_steps() {
        let w = if step == 0 || step + 1 == tr.n_steps() {
            half
        } else {
            T::one()
        };
        let row = tr.row(step);
        let mut v2 = T::zero();
        let mut a2 = T::zero();
        for k in 0..nb {
            let v = row[k];
            v2 += v * v;
            let d = (row[(k + 1) % nb] - v) / ds;
            a2 += d * d;
        }
        value2 += w * v2;
        angular2 += w * a2;
    }
    let mut time2 = T::zero();
    for step in 0..tr.n_steps() - 1 {
        let row = tr.row(step);
        let next = tr.row(step + 1);
        for k in 0..nb {
            let d = (next[k] - row[k]) / dt;
            time2 += d * d;
        }
    }
    ((value2 + angular2 + time2) * dt * ds).sqrt()
}

/// Best constant of the Poincare inequality on the support disk:
/// `1 / sqrt(smallest Dirichlet eigenvalue)`, by inverse power iteration
/// with conjugate-gradient inner solves.
pub fn poincare_constant<T: Scalar>(mask: &DomainMask<T>) -> Result<T> {
    if mask.omega_node_count() == 0 {
        return Err(Error::Geometry(
            "support disk contains no grid nodes".into(),
        ));
    }
    let grid = mask.grid();
    let op = DiskOperator::build(grid, mask.omega_center(), mask.omega_radius(), T::zero());
    let n = op.unknown_count();
    if n == 0 {
        return Err(Error::Geometry(
            "support disk contains no interior unknowns".into(),
        ));
    }
    let diag = op.laplacian_diagonal();
    let precond: Vec<T> = diag.iter().map(|&d| T::one() / d).collect();
    let apply = |x: &[T], out: &mut [T]| op.apply_homogeneous(x, out);
    let cap = 40 * grid.n_per_side();

    let scale = T::one() / real::<T>(n as f64).sqrt();
    let mut b = vec![scale; n];
    let mut z = vec![T::zero(); n];
    let mut lambda = T::zero();
    let tol = real::<T>(1e-6);
    for _ in 0..200 {
        z.iter_mut().for_each(|v| *v = T::zero());
        let rep = linalg::conjugate_gradient(apply, &precond, &b, &mut z, real::<T>(1e-10), cap);
        if !rep.converged {
            return Err(Error::NoConvergence {
                residual: as_f64(rep.relative_residual),
                iterations: rep.iterations,
            });
        }
        // Rayleigh quotient of z, using A z = b
        let zb = linalg::dot(&z, &b);
        let zz = linalg::dot(&z, &z);
        let new_lambda = zb / zz;
        let done = (new_lambda - lambda).abs() <= tol * new_lambda;
        lambda = new_lambda;
        let norm = zz.sqrt();
        for (bi, &zi) in b.iter_mut().zip(&z) {
            *bi = zi / norm;
        }
        if done {
            break;
        }
    }
    Ok(T::one() / lambda.sqrt())
}
