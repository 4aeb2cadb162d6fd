//! The linearized measurement-plus-backprojection operator, its dense
//! assembly on coarse grids, and the symbol-based diagonal preconditioner.

use rayon::prelude::*;

use crate::acoustics::{back_propagate, measure, propagate, BoundaryTrace};
use crate::error::{Error, Result};
use crate::geometry::{build_cutoff, Cutoff, ScalarField};
use crate::inverse::{DenseMatrix, ForwardModel};
use crate::optics::{AbsorptionMap, DiffusionSolution};
use crate::rays::RayTracer;
use crate::scalar::{real, Scalar};

/// Dense assembly refuses supports larger than this.
pub const KAPPA_NODE_BUDGET: usize = 1200;

/// Frozen-background linearization: perturbations of the absorption map to
/// back-projected fields, `delta -> A(sum_i chi_i L(u_i delta))`.
pub struct LinearizedOperator<'a, T> {
    model: &'a ForwardModel<T>,
    background: &'a AbsorptionMap<T>,
    fields: Vec<DiffusionSolution<T>>,
}

impl<'a, T: Scalar> LinearizedOperator<'a, T> {
    pub fn new(model: &'a ForwardModel<T>, background: &'a AbsorptionMap<T>) -> Result<Self> {
        let fields = model.illumination_fields(background)?;
        Ok(LinearizedOperator {
            model,
            background,
            fields,
        })
    }

    pub fn background(&self) -> &AbsorptionMap<T> {
        self.background
    }

    /// Background light fields, one per rotation.
    pub fn fields(&self) -> &[DiffusionSolution<T>] {
        &self.fields
    }

    /// The summed, cutoff-weighted traces of `u_i * delta`, before
    /// back-propagation. Input support outside the phantom disk is ignored.
    pub fn forward_traces(&self, delta: &ScalarField<T>) -> Result<BoundaryTrace<T>> {
        let model = self.model;
        let mask = model.mask();
        let masked = {
            let mut v = delta.values().to_vec();
            for (idx, value) in v.iter_mut().enumerate() {
                if !mask.in_omega(idx) {
                    *value = T::zero();
                }
            }
            ScalarField::from_values(delta.grid(), v)?
        };
        let traces: Vec<Result<BoundaryTrace<T>>> = self
            .fields
            .par_iter()
            .enumerate()
            .map(|(i, u_i)| {
                let source = masked.zip_map(&u_i.field, |d, u| d * u)?;
                let run = propagate(
                    &source,
                    model.sound_speed(),
                    model.setup().total_time(),
                    model.boundary(),
                    model.cfl(),
                )?;
                measure(&run.trace, &model.cutoffs()[i])
            })
            .collect();
        let mut summed: Option<BoundaryTrace<T>> = None;
        for tr in traces {
            let tr = tr?;
            summed = Some(match summed {
                None => tr,
                Some(acc) => acc.add(&tr)?,
            });
        }
        summed.ok_or_else(|| Error::Setup("no rotations in the model".into()))
    }

    /// Applies the operator: back-propagates the summed weighted traces.
    pub fn apply(&self, delta: &ScalarField<T>) -> Result<ScalarField<T>> {
        let traces = self.forward_traces(delta)?;
        back_propagate(
            &traces,
            self.model.sound_speed(),
            self.model.diffusion_tol(),
        )
    }
}

/// Coarse nodal basis for dense assembly: cosine-taper bumps centered on
/// the support nodes of a coarse lattice, evaluated on the (finer)
/// simulation grid. Keeping the centers and radius physical makes assembled
/// spectra comparable across simulation grids.
#[derive(Debug, Clone)]
pub struct NodalBasis<T> {
    centers: Vec<[T; 2]>,
    radius: T,
    spacing: T,
}

impl<T: Scalar> NodalBasis<T> {
    /// Lattice with `n_per_side` nodes over the same square as the mask's
    /// grid; keeps the nodes inside the support disk. The bump radius
    /// defaults to 1.5 lattice spacings.
    pub fn coarse(mask: &crate::geometry::DomainMask<T>, n_per_side: usize) -> Result<Self> {
        let fine = mask.grid();
        let coarse = crate::geometry::Grid::new(n_per_side, fine.rho(), fine.margin())?;
        let [ocx, ocy] = mask.omega_center();
        let r = mask.omega_radius();
        let centers: Vec<[T; 2]> = (0..coarse.node_count())
            .map(|idx| coarse.node_pos(idx))
            .filter(|[x, y]| {
                let dx = *x - ocx;
                let dy = *y - ocy;
                (dx * dx + dy * dy).sqrt() < r
            })
            .collect();
        if centers.is_empty() {
            return Err(Error::Geometry(
                "coarse basis has no nodes in the support disk".into(),
            ));
        }
        if centers.len() > KAPPA_NODE_BUDGET {
            return Err(Error::OperatorBudget {
                nodes: centers.len(),
                budget: KAPPA_NODE_BUDGET,
            });
        }
        Ok(NodalBasis {
            centers,
            radius: real::<T>(1.5) * coarse.spacing(),
            spacing: coarse.spacing(),
        })
    }

    pub fn with_radius(mut self, radius: T) -> Self {
        self.radius = radius;
        self
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[[T; 2]] {
        &self.centers
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// The j-th basis bump sampled on a grid.
    pub fn bump(&self, grid: &crate::geometry::Grid<T>, j: usize) -> ScalarField<T> {
        let [cx, cy] = self.centers[j];
        let radius = self.radius;
        ScalarField::from_fn(grid, |x, y| {
            let d = ((x - cx) * (x - cx) + (y - cy) * (y - cy)).sqrt();
            if d >= radius {
                T::zero()
            } else {
                real::<T>(0.5) * (T::one() + (T::PI() * d / radius).cos())
            }
        })
    }

    /// The field `sum_j v_j bump_j` on a grid.
    pub fn synthesize(&self, grid: &crate::geometry::Grid<T>, v: &[T]) -> Result<ScalarField<T>> {
        if v.len() != self.centers.len() {
            return Err(Error::Shape(format!(
                "coefficient vector has {} entries, basis has {}",
                v.len(),
                self.centers.len()
            )));
        }
        let mut out = ScalarField::zeros(grid);
        for (j, &vj) in v.iter().enumerate() {
            let b = self.bump(grid, j);
            for (o, bv) in out.values_mut().iter_mut().zip(b.values()) {
                *o += vj * *bv;
            }
        }
        Ok(out)
    }
}

/// Dense matrix of the linearized operator on a coarse nodal basis over the
/// support: column `j` is the operator applied to the j-th basis bump
/// (solved on the simulation grid), expanded back in basis coefficients by
/// a Gram-weighted least-squares fit. Columns are assembled concurrently.
pub fn assemble_kappa<T: Scalar>(
    op: &LinearizedOperator<'_, T>,
    basis: &NodalBasis<T>,
) -> Result<DenseMatrix<T>> {
    let (kappa, _) = assemble_kappa_with_gram(op, basis)?;
    Ok(kappa)
}

fn assemble_kappa_with_gram<T: Scalar>(
    op: &LinearizedOperator<'_, T>,
    basis: &NodalBasis<T>,
) -> Result<(DenseMatrix<T>, Vec<T>)> {
    let grid = *op.model.mask().grid();
    let n = basis.len();
    let h2 = grid.spacing() * grid.spacing();

    let fields: Vec<ScalarField<T>> = (0..n).map(|j| basis.bump(&grid, j)).collect();
    let mut gram = vec![T::zero(); n * n];
    for j in 0..n {
        for i in j..n {
            let mut s = T::zero();
            for (a, b) in fields[i].values().iter().zip(fields[j].values()) {
                s += *a * *b;
            }
            let v = s * h2;
            gram[j * n + i] = v;
            gram[i * n + j] = v;
        }
    }
    let mut chol = gram.clone();
    crate::linalg::cholesky_lower(n, &mut chol)
        .map_err(|m| Error::Geometry(format!("basis bumps are numerically dependent: {m}")))?;

    // raw column j: inner products <kappa(bump_j), bump_i> on the grid
    let raw: Vec<Result<Vec<T>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let image = op.apply(&fields[j])?;
            Ok((0..n)
                .map(|i| {
                    let mut s = T::zero();
                    for (a, b) in image.values().iter().zip(fields[i].values()) {
                        s += *a * *b;
                    }
                    s * h2
                })
                .collect())
        })
        .collect();
    let raw = raw.into_iter().collect::<Result<Vec<Vec<T>>>>()?;

    // coefficients: solve G k_j = raw_j (Cholesky forward then backward)
    let mut columns = Vec::with_capacity(n);
    for mut col in raw {
        crate::linalg::forward_substitute(n, &chol, &mut col);
        crate::linalg::backward_substitute(n, &chol, &mut col);
        columns.push(col);
    }
    Ok((DenseMatrix::from_columns(n, columns)?, chol))
}

/// Singular values of the assembled operator measured against the basis
/// span: the extremes bound `|kappa(f)| / |f|` over fields `f` synthesized
/// from the basis, so spectra are comparable across simulation grids.
pub fn kappa_singular_values<T: Scalar>(
    op: &LinearizedOperator<'_, T>,
    basis: &NodalBasis<T>,
) -> Result<Vec<T>> {
    Ok(analyze_kappa(op, basis)?.1)
}

/// Assembles the dense operator once and returns it together with its
/// basis-normalized singular values.
pub fn analyze_kappa<T: Scalar>(
    op: &LinearizedOperator<'_, T>,
    basis: &NodalBasis<T>,
) -> Result<(DenseMatrix<T>, Vec<T>)> {
    let (kappa, chol) = assemble_kappa_with_gram(op, basis)?;
    let n = basis.len();
    // generalized values of K w.r.t. the Gram G = L L^T:
    // sigma(L^T K L^{-T}) since |S k|_G relates coefficients to fields
    let mut m = vec![T::zero(); n * n];
    for j in 0..n {
        // w = L^T K e_j: multiply column j by L transposed
        let col = kappa.column(j);
        for i in 0..n {
            let mut s = T::zero();
            for r in i..n {
                s += chol[i * n + r] * col[r];
            }
            m[j * n + i] = s;
        }
    }
    // right-multiply by L^{-T}: transpose to L (M^T) = W^T, forward-solve
    // each row of W
    let mut m_t = vec![T::zero(); n * n];
    for i in 0..n {
        let mut row: Vec<T> = (0..n).map(|j| m[j * n + i]).collect();
        crate::linalg::forward_substitute(n, &chol, &mut row);
        m_t[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    Ok((kappa, crate::linalg::singular_values(n, n, &m_t)))
}

/// Direction-averaged principal-symbol weight, used as a diagonal
/// preconditioner for the reconstruction.
#[derive(Debug, Clone)]
pub struct SymbolWeight<T> {
    /// Weight per node, zero off the support.
    pub weight: ScalarField<T>,
    /// Empirical floor of the light fields over the support.
    pub field_floor: T,
    /// Largest light-field value over the support; sets the natural scale
    /// of the weight when the aperture sees almost nothing.
    pub field_max: T,
    pub min_weight: T,
    pub max_weight: T,
}

/// Averages, over a fan of directions, the cutoff values seen by the two
/// exits of each support node, weighted by the background light fields:
/// `mean_dir (1/2) sum_i [chi_i(exit+) + chi_i(exit-)] u_i(x)`.
pub fn symbol_weight<T: Scalar>(
    op: &LinearizedOperator<'_, T>,
    n_dirs: usize,
) -> Result<SymbolWeight<T>> {
    if n_dirs < 8 {
        return Err(Error::Setup(format!(
            "need at least 8 fan directions, got {n_dirs}"
        )));
    }
    let model = op.model;
    let mask = model.mask();
    let grid = mask.grid();
    let setup = model.setup();
    let cutoffs: Vec<Cutoff<T>> = (0..setup.rotation_count())
        .map(|i| build_cutoff(setup, i))
        .collect::<Result<_>>()?;
    let tracer = RayTracer::new(model.sound_speed());
    let nodes = mask.omega_nodes();

    let values: Vec<T> = nodes
        .par_iter()
        .map(|&idx| {
            let p = grid.node_pos(idx);
            let mut acc = T::zero();
            for d in 0..n_dirs {
                let a = real::<T>(2.0) * T::PI() * real::<T>(d as f64) / real::<T>(n_dirs as f64);
                let dir = [a.cos(), a.sin()];
                let plus = tracer.shoot(p, dir, None);
                let minus = tracer.shoot(p, [-dir[0], -dir[1]], None);
                let mut sample = T::zero();
                for (i, chi) in cutoffs.iter().enumerate() {
                    let u_here = op.fields[i].field.values()[idx];
                    let chi_plus = plus
                        .as_ref()
                        .map(|e| chi.eval(e.time, e.angle))
                        .unwrap_or(T::zero());
                    let chi_minus = minus
                        .as_ref()
                        .map(|e| chi.eval(e.time, e.angle))
                        .unwrap_or(T::zero());
                    sample += real::<T>(0.5) * (chi_plus + chi_minus) * u_here;
                }
                acc += sample;
            }
            acc / real::<T>(n_dirs as f64)
        })
        .collect();

    let mut weight = ScalarField::zeros(grid);
    let mut min_w = T::infinity();
    let mut max_w = T::zero();
    for (&idx, &v) in nodes.iter().zip(&values) {
        weight.values_mut()[idx] = v;
        min_w = min_w.min(v);
        max_w = max_w.max(v);
    }
    if nodes.is_empty() {
        min_w = T::zero();
    }
    let mut field_floor = T::infinity();
    let mut field_max = T::zero();
    for sol in &op.fields {
        for &idx in nodes {
            field_floor = field_floor.min(sol.field.values()[idx]);
            field_max = field_max.max(sol.field.values()[idx]);
        }
    }
    if !field_floor.is_finite() {
        field_floor = T::zero();
    }
    Ok(SymbolWeight {
        weight,
        field_floor,
        field_max,
        min_weight: min_w,
        max_weight: max_w,
    })
}
