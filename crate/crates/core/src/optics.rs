//! Light transport inside the disk: screened Poisson solves with Dirichlet
//! data on the circle, and harmonic extensions of boundary traces.

use std::sync::Arc;

use rayon::prelude::*;

use crate::disk::DiskOperator;
use crate::error::{Error, Result};
use crate::geometry::{
    AcquisitionSetup, BoundaryFn, BoundaryParametrization, DomainMask, Grid, ScalarField,
};
use crate::linalg;
use crate::scalar::{as_f64, Scalar};

/// Absorption coefficient: nonnegative, compactly supported in the phantom
/// support disk. Carries its discrete W(1,inf) norm.
#[derive(Debug, Clone)]
pub struct AbsorptionMap<T> {
    field: ScalarField<T>,
    mask: Arc<DomainMask<T>>,
    w1inf: T,
}

impl<T: Scalar> AbsorptionMap<T> {
    pub fn new(field: ScalarField<T>, mask: Arc<DomainMask<T>>) -> Result<Self> {
        if field.grid() != mask.grid() {
            return Err(Error::Shape(
                "absorption field and mask grids differ".into(),
            ));
        }
        for (idx, &v) in field.values().iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Field("absorption map has non-finite entries".into()));
            }
            if v < T::zero() {
                return Err(Error::Field("absorption map has negative entries".into()));
            }
            if v > T::zero() && !mask.in_omega(idx) {
                return Err(Error::Field(
                    "absorption map has support outside the phantom support disk".into(),
                ));
            }
        }
        let w1inf = discrete_w1inf(&field);
        Ok(AbsorptionMap { field, mask, w1inf })
    }

    /// Zero absorption on the given mask.
    pub fn zero(mask: Arc<DomainMask<T>>) -> Self {
        let field = ScalarField::zeros(mask.grid());
        AbsorptionMap {
            field,
            mask,
            w1inf: T::zero(),
        }
    }

    /// Evaluates `f` on the support nodes, zero elsewhere, clamping tiny
    /// negative round-off to zero.
    pub fn from_fn(mask: Arc<DomainMask<T>>, f: impl Fn(T, T) -> T) -> Result<Self> {
        let grid = *mask.grid();
        let field = ScalarField::from_fn(&grid, |x, y| f(x, y));
        let mut values = field.values().to_vec();
        for (idx, v) in values.iter_mut().enumerate() {
            if !mask.in_omega(idx) {
                *v = T::zero();
            } else {
                *v = v.max(T::zero());
            }
        }
        AbsorptionMap::new(ScalarField::from_values(&grid, values)?, mask)
    }

    pub fn field(&self) -> &ScalarField<T> {
        &self.field
    }

    pub fn mask(&self) -> &Arc<DomainMask<T>> {
        &self.mask
    }

    /// max |sigma| plus the largest forward difference quotient.
    pub fn w1inf_norm(&self) -> T {
        self.w1inf
    }
}

/// Discrete W(1,inf) norm: sup norm plus the largest edge difference / h.
pub fn discrete_w1inf<T: Scalar>(field: &ScalarField<T>) -> T {
    let grid = field.grid();
    let n = grid.n_per_side();
    let h = grid.spacing();
    let v = field.values();
    let mut sup = T::zero();
    let mut grad = T::zero();
    for j in 0..n {
        for i in 0..n {
            let a = v[grid.index(i, j)];
            sup = sup.max(a.abs());
            if i + 1 < n {
                grad = grad.max((v[grid.index(i + 1, j)] - a).abs());
            }
            if j + 1 < n {
                grad = grad.max((v[grid.index(i, j + 1)] - a).abs());
            }
        }
    }
    sup + grad / h
}

/// Solution of one screened Poisson solve.
#[derive(Debug, Clone)]
pub struct DiffusionSolution<T> {
    pub field: ScalarField<T>,
    pub rotation_index: Option<usize>,
    pub residual: T,
    pub iterations: usize,
}

fn cg_cap<T: Scalar>(grid: &Grid<T>) -> usize {
    20 * grid.n_per_side()
}

fn check_sigma<T: Scalar>(sigma: &ScalarField<T>) -> Result<()> {
    if sigma.values().iter().any(|&v| v < T::zero()) {
        return Err(Error::Field("negative absorption entries rejected".into()));
    }
    if sigma.values().iter().any(|&v| !v.is_finite()) {
        return Err(Error::Field("absorption entries must be finite".into()));
    }
    Ok(())
}

fn solve_rows<T: Scalar>(
    op: &DiskOperator<T>,
    sigma_rows: Option<&[T]>,
    rhs: &[T],
    tol: T,
) -> Result<(Vec<T>, usize, T)> {
    let diag = op.laplacian_diagonal();
    let precond: Vec<T> = match sigma_rows {
        Some(s) => diag
            .iter()
            .zip(s)
            .map(|(&d, &sv)| T::one() / (d + sv))
            .collect(),
        None => diag.iter().map(|&d| T::one() / d).collect(),
    };
    let apply = |x: &[T], out: &mut [T]| {
        op.apply_homogeneous(x, out);
        if let Some(s) = sigma_rows {
            for i in 0..out.len() {
                out[i] += s[i] * x[i];
            }
        }
    };
    let mut x = vec![T::zero(); rhs.len()];
    let report = linalg::conjugate_gradient(apply, &precond, rhs, &mut x, tol, cg_cap(op.grid()));
    if !report.converged {
        return Err(Error::NoConvergence {
            residual: as_f64(report.relative_residual),
            iterations: report.iterations,
        });
    }
    Ok((x, report.iterations, report.relative_residual))
}

fn check_boundary_param<T: Scalar>(grid: &Grid<T>, boundary: &BoundaryFn<T>) -> Result<()> {
    if (boundary.param().rho() - grid.rho()).abs() > grid.rho() * T::epsilon() {
        return Err(Error::Shape(
            "boundary data lives on a different circle radius".into(),
        ));
    }
    Ok(())
}

/// Solves `-Lap u + sigma u = 0` in the disk with Dirichlet data on the
/// circle, by boundary-corrected five-point stencils and preconditioned
/// conjugate gradients.
pub fn solve_diffusion<T: Scalar>(
    sigma: &ScalarField<T>,
    boundary: &BoundaryFn<T>,
    tol: T,
) -> Result<DiffusionSolution<T>> {
    check_sigma(sigma)?;
    let grid = sigma.grid();
    check_boundary_param(grid, boundary)?;
    if !(tol > T::zero()) {
        return Err(Error::Field("solver tolerance must be positive".into()));
    }
    let op = DiskOperator::build(grid, [T::zero(), T::zero()], grid.rho(), T::zero());
    let sigma_rows = op.restrict(sigma);
    let mut rhs = vec![T::zero(); op.unknown_count()];
    op.add_boundary_term(&|a| boundary.eval(a), &mut rhs);
    let (x, iterations, residual) = solve_rows(&op, Some(&sigma_rows), &rhs, tol)?;
    Ok(DiffusionSolution {
        field: op.embed(&x),
        rotation_index: None,
        residual,
        iterations,
    })
}

/// Solves `-Lap u + sigma u = f` with Dirichlet data (defaults: sigma = 0,
/// f = 0, boundary = 0). The general entry point behind `solve_diffusion`
/// and `harmonic_extension`, also used for linearized solves.
pub fn solve_diffusion_with_source<T: Scalar>(
    sigma: Option<&ScalarField<T>>,
    source: Option<&ScalarField<T>>,
    boundary: Option<&BoundaryFn<T>>,
    grid: &Grid<T>,
    tol: T,
) -> Result<DiffusionSolution<T>> {
    if let Some(s) = sigma {
        check_sigma(s)?;
        s.check_same_grid(&ScalarField::zeros(grid))?;
    }
    if let Some(b) = boundary {
        check_boundary_param(grid, b)?;
    }
    let op = DiskOperator::build(grid, [T::zero(), T::zero()], grid.rho(), T::zero());
    let sigma_rows = sigma.map(|s| op.restrict(s));
    let mut rhs = vec![T::zero(); op.unknown_count()];
    if let Some(b) = boundary {
        op.add_boundary_term(&|a| b.eval(a), &mut rhs);
    }
    if let Some(f) = source {
        f.check_same_grid(&ScalarField::zeros(grid))?;
        for (row, &idx) in op.unknown_indices().iter().enumerate() {
            rhs[row] += f.values()[idx];
        }
    }
    let (x, iterations, residual) = solve_rows(&op, sigma_rows.as_deref(), &rhs, tol)?;
    Ok(DiffusionSolution {
        field: op.embed(&x),
        rotation_index: None,
        residual,
        iterations,
    })
}

/// Harmonic extension of circle data into the disk (zero absorption solve).
pub fn harmonic_extension<T: Scalar>(
    boundary: &BoundaryFn<T>,
    grid: &Grid<T>,
    tol: T,
) -> Result<ScalarField<T>> {
    Ok(solve_diffusion_with_source(None, None, Some(boundary), grid, tol)?.field)
}

/// One diffusion solve per rotation, with the base illumination precomposed
/// with each rotation. Rotations run concurrently.
pub fn forward_family<T: Scalar>(
    sigma: &AbsorptionMap<T>,
    setup: &AcquisitionSetup<T>,
    param: &BoundaryParametrization<T>,
    tol: T,
) -> Result<Vec<DiffusionSolution<T>>> {
    let grid = sigma.field().grid();
    let op = DiskOperator::build(grid, [T::zero(), T::zero()], grid.rho(), T::zero());
    let sigma_rows = op.restrict(sigma.field());
    let results: Vec<Result<DiffusionSolution<T>>> = (0..setup.rotation_count())
        .into_par_iter()
        .map(|i| {
            let g_i = setup.illumination_for(i, param);
            let mut rhs = vec![T::zero(); op.unknown_count()];
            op.add_boundary_term(&|a| g_i.eval(a), &mut rhs);
            let (x, iterations, residual) = solve_rows(&op, Some(&sigma_rows), &rhs, tol)?;
            Ok(DiffusionSolution {
                field: op.embed(&x),
                rotation_index: Some(i),
                residual,
                iterations,
            })
        })
        .collect();
    results.into_iter().collect()
}
