//! Nodal scalar fields on the uniform grid.

use crate::error::{Error, Result};
use crate::geometry::Grid;
use crate::scalar::{real, Scalar};

/// One real value per grid node, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Scalar> ScalarField<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        ScalarField {
            grid: *grid,
            values: vec![T::zero(); grid.node_count()],
        }
    }

    pub fn constant(grid: &Grid<T>, v: T) -> Self {
        ScalarField {
            grid: *grid,
            values: vec![v; grid.node_count()],
        }
    }

    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T, T) -> T) -> Self {
        let values = (0..grid.node_count())
            .map(|idx| {
                let [x, y] = grid.node_pos(idx);
                f(x, y)
            })
            .collect();
        ScalarField {
            grid: *grid,
            values,
        }
    }

    pub fn from_values(grid: &Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Shape(format!(
                "field needs {} values, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Field("field contains non-finite entries".into()));
        }
        Ok(ScalarField {
            grid: *grid,
            values,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let idx = self.grid.index(i, j);
        self.values[idx] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(ScalarField {
            grid: self.grid,
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Grid-weighted L2 norm, `sqrt(sum v^2 h^2)`.
    pub fn l2_norm(&self) -> T {
        let s = self.values.iter().fold(T::zero(), |acc, &v| acc + v * v);
        (s * self.grid.spacing() * self.grid.spacing()).sqrt()
    }

    pub fn linf_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// Bilinear interpolation at an arbitrary point; the query is clamped to
    /// the grid square.
    pub fn sample(&self, x: T, y: T) -> T {
        let g = &self.grid;
        let h = g.spacing();
        let fx = ((x - g.origin()[0]) / h).max(T::zero());
        let fy = ((y - g.origin()[1]) / h).max(T::zero());
        let top = real::<T>((g.n_per_side() - 2) as f64);
        let fx = fx.min(top + T::one());
        let fy = fy.min(top + T::one());
        let i0 = fx.floor().min(top);
        let j0 = fy.floor().min(top);
        let wx = fx - i0;
        let wy = fy - j0;
        let i = i0.to_usize().unwrap_or(0);
        let j = j0.to_usize().unwrap_or(0);
        let one = T::one();
        self.at(i, j) * (one - wx) * (one - wy)
            + self.at(i + 1, j) * wx * (one - wy)
            + self.at(i, j + 1) * (one - wx) * wy
            + self.at(i + 1, j + 1) * wx * wy
    }
}
