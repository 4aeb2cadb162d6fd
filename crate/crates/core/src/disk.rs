//! Five-point Laplacian restricted to a disk, with boundary-corrected
//! stencils at the circle.
//!
//! Arms that cross the circle are shortened to the crossing point; the ghost
//! value behind the circle is eliminated by linear extrapolation through the
//! Dirichlet datum. Interior couplings stay at `1/h^2`, so the matrix is
//! symmetric positive (semi)definite and an M-matrix, while the solution
//! keeps second-order accuracy.
//!
//! For explicit time stepping the shortened arms would shrink the stable
//! step, so nodes whose crossing parameter falls below `demote_below` are
//! demoted to Dirichlet carriers: they are removed from the unknowns and
//! fed the boundary datum at their radial projection.

use crate::geometry::{BoundaryParametrization, Grid, ScalarField};
use crate::scalar::{real, Scalar};
use rayon::prelude::*;

const NO_ROW: u32 = u32::MAX;
const THETA_MIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub(crate) enum Arm<T> {
    Interior { row: u32 },
    Boundary { coef: T, angle: T },
}

pub(crate) struct DiskOperator<T> {
    grid: Grid<T>,
    unknowns: Vec<usize>,
    diag: Vec<T>,
    arms: Vec<[Arm<T>; 4]>,
    carriers: Vec<(usize, T)>,
}

impl<T: Scalar> DiskOperator<T> {
    /// Builds the operator for the disk of radius `radius` about `center`.
    /// `demote_below` of zero keeps every interior node an unknown.
    pub(crate) fn build(grid: &Grid<T>, center: [T; 2], radius: T, demote_below: T) -> Self {
        let n = grid.n_per_side();
        let h = grid.spacing();
        let inside = |i: usize, j: usize| -> bool {
            let [x, y] = grid.pos(i, j);
            let dx = x - center[0];
            let dy = y - center[1];
            (dx * dx + dy * dy).sqrt() < radius
        };
        // crossing parameter in (0,1] from (i,j) toward an outside neighbour
        let crossing = |i: usize, j: usize, dir: usize| -> T {
            let [x, y] = grid.pos(i, j);
            let d = [x - center[0], y - center[1]];
            let e: [T; 2] = match dir {
                0 => [T::one(), T::zero()],
                1 => [-T::one(), T::zero()],
                2 => [T::zero(), T::one()],
                _ => [T::zero(), -T::one()],
            };
            let de = d[0] * e[0] + d[1] * e[1];
            let c = d[0] * d[0] + d[1] * d[1] - radius * radius;
            let disc = (de * de - c).max(T::zero()).sqrt();
            ((-de + disc) / h).min(T::one())
        };
        let neighbor = |i: usize, j: usize, dir: usize| -> (usize, usize) {
            match dir {
                0 => (i + 1, j),
                1 => (i - 1, j),
                2 => (i, j + 1),
                _ => (i, j - 1),
            }
        };

        // first pass: classify nodes as unknown / carrier
        let mut row_of = vec![NO_ROW; grid.node_count()];
        let mut unknowns = Vec::new();
        let mut carriers = Vec::new();
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                if !inside(i, j) {
                    continue;
                }
                let mut demoted = false;
                if demote_below > T::zero() {
                    for dir in 0..4 {
                        let (ni, nj) = neighbor(i, j, dir);
                        if !inside(ni, nj) && crossing(i, j, dir) < demote_below {
                            demoted = true;
                            break;
                        }
                    }
                }
                let idx = grid.index(i, j);
                if demoted {
                    let [x, y] = grid.pos(i, j);
                    let angle = (y - center[1]).atan2(x - center[0]);
                    carriers.push((idx, angle));
                } else {
                    row_of[idx] = unknowns.len() as u32;
                    unknowns.push(idx);
                }
            }
        }

        // second pass: stencil arms per unknown
        let inv_h2 = T::one() / (h * h);
        let theta_min = real::<T>(THETA_MIN);
        let mut diag = vec![T::zero(); unknowns.len()];
        let mut arms = Vec::with_capacity(unknowns.len());
        for (row, &idx) in unknowns.iter().enumerate() {
            let (i, j) = grid.coords_of(idx);
            let mut node_arms = [Arm::Interior { row: 0 }; 4];
            let mut d = T::zero();
            for (dir, arm) in node_arms.iter_mut().enumerate() {
                let (ni, nj) = neighbor(i, j, dir);
                let nidx = grid.index(ni, nj);
                let nrow = row_of[nidx];
                if nrow != NO_ROW {
                    d += inv_h2;
                    *arm = Arm::Interior { row: nrow };
                } else if inside(ni, nj) {
                    // demoted carrier: full-length arm, datum at its projection
                    let [x, y] = grid.pos(ni, nj);
                    let angle = (y - center[1]).atan2(x - center[0]);
                    d += inv_h2;
                    *arm = Arm::Boundary {
                        coef: inv_h2,
                        angle,
                    };
                } else {
                    let theta = crossing(i, j, dir).max(theta_min);
                    let coef = inv_h2 / theta;
                    let [x, y] = grid.pos(i, j);
                    let e: [f64; 2] = match dir {
                        0 => [1.0, 0.0],
                        1 => [-1.0, 0.0],
                        2 => [0.0, 1.0],
                        _ => [0.0, -1.0],
                    };
                    let px = x + theta * h * real::<T>(e[0]);
                    let py = y + theta * h * real::<T>(e[1]);
                    let angle = (py - center[1]).atan2(px - center[0]);
                    d += coef;
                    *arm = Arm::Boundary { coef, angle };
                }
            }
            diag[row] = d;
            arms.push(node_arms);
        }
        DiskOperator {
            grid: *grid,
            unknowns,
            diag,
            arms,
            carriers,
        }
    }

    pub(crate) fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    pub(crate) fn unknown_indices(&self) -> &[usize] {
        &self.unknowns
    }

    pub(crate) fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub(crate) fn laplacian_diagonal(&self) -> &[T] {
        &self.diag
    }

    /// `out = (-Laplacian) x` without boundary contributions.
    pub(crate) fn apply_homogeneous(&self, x: &[T], out: &mut [T]) {
        let h = self.grid.spacing();
        let inv_h2 = T::one() / (h * h);
        out.par_iter_mut().enumerate().for_each(|(row, o)| {
            let mut v = self.diag[row] * x[row];
            for arm in &self.arms[row] {
                if let Arm::Interior { row: nb } = arm {
                    v -= x[*nb as usize] * inv_h2;
                }
            }
            *o = v;
        });
    }

    /// Adds the boundary contribution `sum coef * g(angle)` into `out`.
    pub(crate) fn add_boundary_term(&self, g: &impl Fn(T) -> T, out: &mut [T]) {
        for (row, node_arms) in self.arms.iter().enumerate() {
            for arm in node_arms {
                if let Arm::Boundary { coef, angle } = arm {
                    out[row] += *coef * g(*angle);
                }
            }
        }
    }

    /// Precomputes periodic-interpolation gather entries so the boundary term
    /// can be applied once per time step from a sampled trace row.
    pub(crate) fn boundary_gather(&self, param: &BoundaryParametrization<T>) -> BoundaryGather<T> {
        let mut entries = Vec::new();
        for (row, node_arms) in self.arms.iter().enumerate() {
            for arm in node_arms {
                if let Arm::Boundary { coef, angle } = arm {
                    let (k0, k1, w) = param.bracket(*angle);
                    entries.push(GatherEntry {
                        row,
                        coef: *coef,
                        k0,
                        k1,
                        w,
                    });
                }
            }
        }
        let mut carrier_entries = Vec::new();
        for &(idx, angle) in &self.carriers {
            let (k0, k1, w) = param.bracket(angle);
            carrier_entries.push(GatherEntry {
                row: idx,
                coef: T::one(),
                k0,
                k1,
                w,
            });
        }
        BoundaryGather {
            entries,
            carrier_entries,
        }
    }

    /// Values of a nodal field at the unknown rows.
    pub(crate) fn restrict(&self, field: &ScalarField<T>) -> Vec<T> {
        self.unknowns
            .iter()
            .map(|&idx| field.values()[idx])
            .collect()
    }

    /// Embeds row values back into a nodal field; everything else is zero.
    pub(crate) fn embed(&self, x: &[T]) -> ScalarField<T> {
        let mut f = ScalarField::zeros(&self.grid);
        for (row, &idx) in self.unknowns.iter().enumerate() {
            f.values_mut()[idx] = x[row];
        }
        f
    }

    #[cfg(test)]
    pub(crate) fn carrier_count(&self) -> usize {
        self.carriers.len()
    }
}

pub(crate) struct GatherEntry<T> {
    pub row: usize,
    pub coef: T,
    pub k0: usize,
    pub k1: usize,
    pub w: T,
}

pub(crate) struct BoundaryGather<T> {
    entries: Vec<GatherEntry<T>>,
    carrier_entries: Vec<GatherEntry<T>>,
}

impl<T: Scalar> BoundaryGather<T> {
    /// Adds `coef * data(angle)` into `out`, interpolating the sampled row.
    pub(crate) fn add_boundary_from_row(&self, row_values: &[T], out: &mut [T]) {
        for e in &self.entries {
            let g = row_values[e.k0] * (T::one() - e.w) + row_values[e.k1] * e.w;
            out[e.row] += e.coef * g;
        }
    }

    /// Writes interpolated data onto the carrier nodes of a full field.
    pub(crate) fn fill_carriers(&self, row_values: &[T], field: &mut ScalarField<T>) {
        for e in &self.carrier_entries {
            let g = row_values[e.k0] * (T::one() - e.w) + row_values[e.k1] * e.w;
            field.values_mut()[e.row] = g;
        }
    }
}
