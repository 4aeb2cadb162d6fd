//! Node classification: interior of the measurement disk and the phantom
//! support disk, which must stay compactly inside it.

use crate::error::{Error, Result};
use crate::geometry::Grid;
use crate::scalar::{as_f64, real, Scalar};

#[derive(Debug, Clone)]
pub struct DomainMask<T> {
    grid: Grid<T>,
    inside_ball: Vec<bool>,
    inside_omega: Vec<bool>,
    omega_center: [T; 2],
    omega_radius: T,
    omega_nodes: Vec<usize>,
}

/// Flags the nodes inside the measurement disk and inside the support disk.
/// The support disk must keep a clearance of two cells from the circle.
pub fn build_mask<T: Scalar>(
    grid: &Grid<T>,
    omega_radius: T,
    omega_center: [T; 2],
) -> Result<DomainMask<T>> {
    if omega_radius < T::zero() || !omega_radius.is_finite() {
        return Err(Error::Geometry(
            "support radius must be nonnegative and finite".into(),
        ));
    }
    let [cx, cy] = omega_center;
    let reach = (cx * cx + cy * cy).sqrt() + omega_radius;
    let limit = grid.rho() - real::<T>(2.0) * grid.spacing();
    if reach > limit {
        return Err(Error::Geometry(format!(
            "support disk reaches {} but must stay within {} (two cells off the circle)",
            as_f64(reach),
            as_f64(limit),
        )));
    }
    let mut inside_ball = vec![false; grid.node_count()];
    let mut inside_omega = vec![false; grid.node_count()];
    let mut omega_nodes = Vec::new();
    for idx in 0..grid.node_count() {
        let [x, y] = grid.node_pos(idx);
        if (x * x + y * y).sqrt() < grid.rho() {
            inside_ball[idx] = true;
            let dx = x - cx;
            let dy = y - cy;
            if (dx * dx + dy * dy).sqrt() < omega_radius {
                inside_omega[idx] = true;
                omega_nodes.push(idx);
            }
        }
    }
    Ok(DomainMask {
        grid: *grid,
        inside_ball,
        inside_omega,
        omega_center,
        omega_radius,
        omega_nodes,
    })
}

impl<T: Scalar> DomainMask<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn in_ball(&self, idx: usize) -> bool {
        self.inside_ball[idx]
    }

    #[inline]
    pub fn in_omega(&self, idx: usize) -> bool {
        self.inside_omega[idx]
    }

    pub fn omega_center(&self) -> [T; 2] {
        self.omega_center
    }

    pub fn omega_radius(&self) -> T {
        self.omega_radius
    }

    /// Indices of the support nodes, in grid order.
    pub fn omega_nodes(&self) -> &[usize] {
        &self.omega_nodes
    }

    pub fn omega_node_count(&self) -> usize {
        self.omega_nodes.len()
    }
}
