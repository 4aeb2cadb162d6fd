//! Small dense/matrix-free linear algebra kernels used across the solvers.
//!
//! Reductions stay serial on purpose: runs must be reproducible bit for bit,
//! and parallel float sums are not.

use crate::scalar::Scalar;

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(crate) struct CgReport<T> {
    pub iterations: usize,
    pub relative_residual: T,
    pub converged: bool,
}

/// Preconditioned conjugate gradients for an SPD operator given as a closure.
/// `precond` holds the inverse diagonal. Convergence is relative to the
/// right-hand side norm; a zero right-hand side converges immediately.
pub(crate) fn conjugate_gradient<T, A>(
    apply: A,
    precond: &[T],
    rhs: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> CgReport<T>
where
    T: Scalar,
    A: Fn(&[T], &mut [T]),
{
    let n = rhs.len();
    let rhs_norm = norm2(rhs);
    if rhs_norm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return CgReport {
            iterations: 0,
            relative_residual: T::zero(),
            converged: true,
        };
    }
    let mut r = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut ap = vec![T::zero(); n];

    apply(x, &mut ap);
    for i in 0..n {
        r[i] = rhs[i] - ap[i];
    }
    for i in 0..n {
        z[i] = precond[i] * r[i];
    }
    p.copy_from_slice(&z);
    let mut rz = dot(&r, &z);
    let mut res = norm2(&r) / rhs_norm;
    let mut it = 0;
    while res > tol && it < max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            // loss of positive definiteness in finite precision; stop here
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = precond[i] * r[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = norm2(&r) / rhs_norm;
        it += 1;
    }
    CgReport {
        iterations: it,
        relative_residual: res,
        converged: res <= tol,
    }
}

/// Singular values of a dense column-major matrix by one-sided Jacobi
/// orthogonalization of the columns. Robust for the small systems assembled
/// here; returns values sorted in decreasing order.
pub(crate) fn singular_values<T: Scalar>(rows: usize, cols: usize, data: &[T]) -> Vec<T> {
    assert_eq!(data.len(), rows * cols);
    let mut a = data.to_vec();
    let col = |j: usize| -> std::ops::Range<usize> { j * rows..(j + 1) * rows };
    let eps = T::epsilon() * crate::scalar::real::<T>(64.0);
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (app, aqq, apq) = {
                    let cp = &a[col(p)];
                    let cq = &a[col(q)];
                    (dot(cp, cp), dot(cq, cq), dot(cp, cq))
                };
                if apq.abs() <= eps * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                // Jacobi rotation zeroing the (p,q) entry of A^T A
                let tau = (aqq - app) / (apq + apq);
                let t = {
                    let s = if tau >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    s / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let vp = a[p * rows + i];
                    let vq = a[q * rows + i];
                    a[p * rows + i] = c * vp - s * vq;
                    a[q * rows + i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = (0..cols).map(|j| norm2(&a[col(j)])).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// In-place lower Cholesky factor of a symmetric positive definite matrix
/// in column-major storage; the strict upper triangle is zeroed.
pub(crate) fn cholesky_lower<T: Scalar>(n: usize, a: &mut [T]) -> Result<(), String> {
    assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            let l = a[k * n + j];
            d -= l * l;
        }
        if !(d > T::zero()) {
            return Err(format!("matrix not positive definite at pivot {j}"));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut v = a[j * n + i];
            for k in 0..j {
                v -= a[k * n + i] * a[k * n + j];
            }
            a[j * n + i] = v / d;
        }
        for i in 0..j {
            a[j * n + i] = T::zero();
        }
    }
    Ok(())
}

/// Solves `L x = b` in place for lower-triangular column-major `L`.
pub(crate) fn forward_substitute<T: Scalar>(n: usize, l: &[T], b: &mut [T]) {
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[k * n + i] * b[k];
        }
        b[i] = v / l[i * n + i];
    }
}

/// Solves `L^T x = b` in place, given lower-triangular column-major `L`.
pub(crate) fn backward_substitute<T: Scalar>(n: usize, l: &[T], b: &mut [T]) {
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in i + 1..n {
            v -= l[i * n + k] * b[k];
        }
        b[i] = v / l[i * n + i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_and_forward_solve() {
        // A = [[4,2],[2,3]] col-major, L = [[2,0],[1,sqrt(2)]]
        let mut a: Vec<f64> = vec![4.0, 2.0, 2.0, 3.0];
        cholesky_lower(2, &mut a).unwrap();
        assert!((a[0] - 2.0).abs() < 1e-14);
        assert!((a[1] - 1.0).abs() < 1e-14);
        assert_eq!(a[2], 0.0);
        assert!((a[3] - 2.0f64.sqrt()).abs() < 1e-14);
        let mut b = vec![2.0, 1.0 + 2.0f64.sqrt()];
        forward_substitute(2, &a, &mut b);
        assert!((b[0] - 1.0).abs() < 1e-14);
        assert!((b[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a: Vec<f64> = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_lower(2, &mut a).is_err());
    }

    #[test]
    fn cg_solves_a_small_spd_system() {
        // tridiagonal [2 -1; -1 2 ...] in 5 unknowns
        let n = 5;
        let apply = |x: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let mut v = 2.0 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                out[i] = v;
            }
        };
        let precond = vec![0.5; n];
        let rhs = vec![1.0; n];
        let mut x = vec![0.0; n];
        let rep = conjugate_gradient(apply, &precond, &rhs, &mut x, 1e-12, 100);
        assert!(rep.converged);
        // exact solution of -u'' = 1 on the path graph
        let expect = [2.5, 4.0, 4.5, 4.0, 2.5];
        for (a, b) in x.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn cg_zero_rhs_short_circuits() {
        let apply = |x: &[f64], out: &mut [f64]| out.copy_from_slice(x);
        let mut x = vec![3.0; 4];
        let rep = conjugate_gradient(apply, &[1.0; 4], &[0.0; 4], &mut x, 1e-10, 10);
        assert!(rep.converged);
        assert_eq!(x, vec![0.0; 4]);
    }

    #[test]
    fn jacobi_svd_matches_known_values() {
        // column-major [[3,0],[4,0],[0,5]] has singular values 5, 5
        let data: Vec<f64> = vec![3.0, 4.0, 0.0, 0.0, 0.0, 5.0];
        let sv = singular_values(3, 2, &data);
        assert!((sv[0] - 5.0).abs() < 1e-12);
        assert!((sv[1] - 5.0).abs() < 1e-12);

        // diag(1, 2, 3) padded into a 4x3
        let mut d: Vec<f64> = vec![0.0; 12];
        d[0] = 1.0;
        d[4 + 1] = 2.0;
        d[8 + 2] = 3.0;
        let sv = singular_values(4, 3, &d);
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((sv[1] - 2.0).abs() < 1e-12);
        assert!((sv[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_svd_of_rotationally_mixed_matrix() {
        // A = R D with R a rotation: singular values are D's diagonal
        let (c, s) = (0.6_f64, 0.8_f64);
        let d = [3.0, 0.5];
        // col-major 2x2 of R*D
        let data = vec![c * d[0], s * d[0], -s * d[1], c * d[1]];
        let sv = singular_values(2, 2, &data);
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((sv[1] - 0.5).abs() < 1e-12);
    }
}
