//! Matrix abstraction and a row-major dense implementation.

use std::any::Any;
use std::fmt;

use thiserror::Error;

use crate::vector::{NVector, VectorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error(
        "matrix shape mismatch: expected {expected_rows}x{expected_cols}, found {rows}x{cols}"
    )]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("matrix must be square, found {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("incompatible matrix kinds: {expected:?} and {found:?}")]
    IncompatibleKind {
        expected: MatrixKind,
        found: MatrixKind,
    },
    #[error("matrix dimensions must be positive")]
    Empty,
    #[error(transparent)]
    Vector(#[from] VectorError),
}

pub type Result<T> = std::result::Result<T, MatrixError>;

/// Implementation tag used by solvers to check compatibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    Dense,
    Custom,
}

/// Abstract matrix acting on vectors of type `V`.
pub trait Matrix<V: NVector>: fmt::Debug + Send {
    fn kind(&self) -> MatrixKind;

    fn rows(&self) -> usize;

    fn cols(&self) -> usize;

    /// New matrix of the same kind and shape; contents unspecified.
    fn clone_matrix(&self) -> Box<dyn Matrix<V>>;

    /// `self = src`
    fn copy_from(&mut self, src: &dyn Matrix<V>) -> Result<()>;

    /// `self = c*self + I`
    fn scale_add_identity(&mut self, c: f64) -> Result<()>;

    fn zero(&mut self);

    /// `z = self * x`
    fn matvec(&self, x: &V, z: &mut V) -> Result<()>;

    fn as_any(&self) -> &dyn Any;

    fn as_any_mut(&mut self) -> &mut dyn Any;
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        Ok(DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        let mut out = Self::zeros(m, n)?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::ShapeMismatch {
                    expected_rows: m,
                    expected_cols: n,
                    rows: m,
                    cols: r.len(),
                });
            }
            out.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        Ok(out)
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut m = Self::zeros(n, n)?;
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `z = self * x` on plain slices.
    pub fn matvec_slice(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        if x.len() != self.cols || z.len() != self.rows {
            return Err(MatrixError::ShapeMismatch {
                expected_rows: self.rows,
                expected_cols: self.cols,
                rows: z.len(),
                cols: x.len(),
            });
        }
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }

    fn check_same_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rows == rows && self.cols == cols {
            Ok(())
        } else {
            Err(MatrixError::ShapeMismatch {
                expected_rows: self.rows,
                expected_cols: self.cols,
                rows,
                cols,
            })
        }
    }
}

impl<V: NVector> Matrix<V> for DenseMatrix {
    fn kind(&self) -> MatrixKind {
        MatrixKind::Dense
    }

    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn clone_matrix(&self) -> Box<dyn Matrix<V>> {
        Box::new(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: vec![0.0; self.data.len()],
        })
    }

    fn copy_from(&mut self, src: &dyn Matrix<V>) -> Result<()> {
        let src =
            src.as_any()
                .downcast_ref::<DenseMatrix>()
                .ok_or(MatrixError::IncompatibleKind {
                    expected: MatrixKind::Dense,
                    found: src.kind(),
                })?;
        self.check_same_shape(src.rows, src.cols)?;
        self.data.copy_from_slice(&src.data);
        Ok(())
    }

    fn scale_add_identity(&mut self, c: f64) -> Result<()> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.cols;
        for (k, a) in self.data.iter_mut().enumerate() {
            *a = if k / n == k % n { c * *a + 1.0 } else { c * *a };
        }
        Ok(())
    }

    fn zero(&mut self) {
        self.data.fill(0.0);
    }

    fn matvec(&self, x: &V, z: &mut V) -> Result<()> {
        let mut xs = vec![0.0; x.len()];
        x.copy_to_slice(&mut xs)?;
        let mut zs = vec![0.0; z.len()];
        self.matvec_slice(&xs, &mut zs)?;
        z.copy_from_slice(&zs)?;
        Ok(())
    }

    fn as_any(&self) -> &dyn Any {
        self
    }

    fn as_any_mut(&mut self) -> &mut dyn Any {
        self
    }
}
