use super::{LinSolError, LinSolveReport, LinearSolver, LinearSolverType, Result};
use crate::matrix::{DenseMatrix, Matrix};
use crate::vector::NVector;

/// Direct solver: LU factorization with partial pivoting of a [`DenseMatrix`].
///
/// A pivot smaller than `eps * ||A||_inf` marks the matrix singular.
#[derive(Debug, Clone, Default)]
pub struct DenseLu {
    lu: Option<DenseMatrix>,
    perm: Vec<usize>,
    work: Vec<f64>,
}

impl DenseLu {
    pub fn new() -> Self {
        Self::default()
    }

    /// Factors `a` in place of any previous factorization.
    pub fn factor(&mut self, a: &DenseMatrix) -> Result<()> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(LinSolError::Matrix(crate::matrix::MatrixError::NotSquare {
                rows: n,
                cols: a.ncols(),
            }));
        }
        self.lu = None;
        let threshold = f64::EPSILON * a.norm_inf();
        let mut lu = a.clone();
        let m = lu.as_mut_slice();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = m[k * n + k].abs();
            for i in k + 1..n {
                let v = m[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < threshold || best == 0.0 {
                return Err(LinSolError::Singular { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    m.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = m[k * n + k];
            for i in k + 1..n {
                let l = m[i * n + k] / pivot;
                m[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        m[i * n + j] -= l * m[k * n + j];
                    }
                }
            }
        }
        self.lu = Some(lu);
        self.perm = perm;
        self.work = vec![0.0; n];
        Ok(())
    }

    /// Solves using the cached factorization; `b` is overwritten with `x`.
    pub fn solve_slice(&mut self, b: &mut [f64]) -> Result<()> {
        let lu = self.lu.as_ref().ok_or(LinSolError::NotSetUp)?;
        let n = lu.nrows();
        if b.len() != n {
            return Err(LinSolError::Vector(
                crate::vector::VectorError::ShapeMismatch {
                    expected: n,
                    found: b.len(),
                },
            ));
        }
        let m = lu.as_slice();
        for (w, &p) in self.work.iter_mut().zip(&self.perm) {
            *w = b[p];
        }
        let y = &mut self.work;
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= m[i * n + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= m[i * n + j] * y[j];
            }
            y[i] = s / m[i * n + i];
        }
        b.copy_from_slice(y);
        Ok(())
    }
}

impl<V: NVector> LinearSolver<V> for DenseLu {
    fn solver_type(&self) -> LinearSolverType {
        LinearSolverType::MatrixDirect
    }

    fn setup(&mut self, a: Option<&dyn Matrix<V>>) -> Result<()> {
        let a = a.ok_or(LinSolError::MissingMatrix)?;
        let dense = a
            .as_any()
            .downcast_ref::<DenseMatrix>()
            .ok_or(LinSolError::IncompatibleMatrix)?;
        self.factor(dense)
    }

    fn solve(
        &mut self,
        _a: Option<&dyn Matrix<V>>,
        x: &mut V,
        b: &V,
        _tol: f64,
    ) -> Result<LinSolveReport> {
        let mut buf = vec![0.0; b.len()];
        b.copy_to_slice(&mut buf)?;
        self.solve_slice(&mut buf)?;
        x.copy_from_slice(&buf)?;
        Ok(LinSolveReport {
            converged: true,
            iterations: 0,
            res_norm: 0.0,
        })
    }
}
