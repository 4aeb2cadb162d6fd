//! Uniform Cartesian grid over a square containing the measurement disk.

use crate::error::{Error, Result};
use crate::scalar::{as_f64, real, Scalar};

/// Square node lattice covering the disk of radius `rho` plus an absorbing
/// margin, with at least two clear cells between the padded disk and the
/// outer edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    n: usize,
    h: T,
    origin: [T; 2],
    rho: T,
    margin: T,
}

impl<T: Scalar> Grid<T> {
    /// Grid with `n` nodes per side; the spacing follows from the extents.
    pub fn new(n: usize, rho: T, margin: T) -> Result<Self> {
        if n < 16 {
            return Err(Error::Geometry(format!(
                "need at least 16 nodes per side, got {n}"
            )));
        }
        let extent = rho + margin;
        if !(extent > T::zero()) || !extent.is_finite() {
            return Err(Error::Geometry(
                "rho + margin must be positive and finite".into(),
            ));
        }
        let h = real::<T>(2.0) * extent / real::<T>((n - 5) as f64);
        Self::with_spacing_and_n(n, h, rho, margin)
    }

    /// Grid with exactly the requested spacing; the node count follows.
    /// The lattice is symmetric about the origin and contains the node (0,0).
    pub fn from_spacing(h: T, rho: T, margin: T) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::Geometry(
                "spacing must be positive and finite".into(),
            ));
        }
        let extent = rho + margin;
        let cells = ((extent / h).ceil()).to_usize().ok_or_else(|| {
            Error::Geometry("grid extent does not yield a representable node count".into())
        })? + 2;
        Self::with_spacing_and_n(2 * cells + 1, h, rho, margin)
    }

    fn with_spacing_and_n(n: usize, h: T, rho: T, margin: T) -> Result<Self> {
        if !(rho > T::zero()) {
            return Err(Error::Geometry("rho must be positive".into()));
        }
        if margin < T::zero() {
            return Err(Error::Geometry("margin must be nonnegative".into()));
        }
        let half = h * real::<T>((n - 1) as f64 / 2.0);
        if !(half > rho + margin) {
            return Err(Error::Geometry(format!(
                "grid square (half-width {}) must strictly contain the disk of radius {}",
                as_f64(half),
                as_f64(rho + margin),
            )));
        }
        Ok(Grid {
            n,
            h,
            origin: [-half, -half],
            rho,
            margin,
        })
    }

    pub fn n_per_side(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn margin(&self) -> T {
        self.margin
    }

    pub fn origin(&self) -> [T; 2] {
        self.origin
    }

    pub fn half_width(&self) -> T {
        -self.origin[0]
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    /// Row-major node index; `i` runs along x, `j` along y.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn coords_of(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    #[inline]
    pub fn pos(&self, i: usize, j: usize) -> [T; 2] {
        [
            self.origin[0] + self.h * real::<T>(i as f64),
            self.origin[1] + self.h * real::<T>(j as f64),
        ]
    }

    #[inline]
    pub fn node_pos(&self, idx: usize) -> [T; 2] {
        let (i, j) = self.coords_of(idx);
        self.pos(i, j)
    }

    /// Euclidean distance of a node from the grid center.
    #[inline]
    pub fn radius_of(&self, idx: usize) -> T {
        let [x, y] = self.node_pos(idx);
        (x * x + y * y).sqrt()
    }
}
