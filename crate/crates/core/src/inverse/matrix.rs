//! Minimal dense matrix (column-major) for coarse-grid operator assembly.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_columns(rows: usize, columns: Vec<Vec<T>>) -> Result<Self> {
        let cols = columns.len();
        let mut data = Vec::with_capacity(rows * cols);
        for col in &columns {
            if col.len() != rows {
                return Err(Error::Shape(format!(
                    "column has {} entries, expected {rows}",
                    col.len()
                )));
            }
            data.extend_from_slice(col);
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.rows + i] = v;
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::Shape(format!(
                "matvec input has {} entries, expected {}",
                x.len(),
                self.cols
            )));
        }
        let mut out = vec![T::zero(); self.rows];
        for j in 0..self.cols {
            let col = self.column(j);
            let xj = x[j];
            for i in 0..self.rows {
                out[i] += col[i] * xj;
            }
        }
        Ok(out)
    }

    /// Singular values in decreasing order (one-sided Jacobi).
    pub fn singular_values(&self) -> Vec<T> {
        linalg::singular_values(self.rows, self.cols, &self.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_matches_columns() {
        let m = DenseMatrix::from_columns(2, vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let y = m.matvec(&[1.0, 1.0]).unwrap();
        assert_eq!(y, vec![4.0, 6.0]);
        assert!(m.matvec(&[1.0]).is_err());
    }

    #[test]
    fn singular_values_of_identity() {
        let mut m = DenseMatrix::<f64>::zeros(3, 3);
        for i in 0..3 {
            m.set(i, i, 1.0);
        }
        let sv = m.singular_values();
        for v in sv {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }
}
