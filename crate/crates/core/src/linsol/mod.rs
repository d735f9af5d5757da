//! Linear solvers for `A x = b`.
//!
//! Solvers fall into three types (see [`LinearSolverType`]): direct solvers
//! that factor an assembled matrix, iterative solvers that take products from
//! an assembled matrix, and matrix-free iterative solvers that only see an
//! [`ATimes`] operator. Iterative solvers accept optional diagonal scaling
//! vectors `s1`, `s2` and preconditioners `P1`, `P2`, and solve the
//! transformed system
//!
//! ```text
//! (S1 P1^-1 A P2^-1 S2^-1) (S2 P2 x) = S1 P1^-1 b
//! ```
//!
//! stopping when the 2-norm of the scaled preconditioned residual
//! `S1 P1^-1 (b - A x)` falls below the requested tolerance.

mod cg;
mod dense;
mod gmres;

pub use cg::Pcg;
pub use dense::DenseLu;
pub use gmres::{Gmres, DEFAULT_MAXL, DEFAULT_MAX_RESTARTS};

use thiserror::Error;

use crate::error::CallbackError;
use crate::matrix::{Matrix, MatrixError};
use crate::vector::{NVector, VectorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinSolError {
    #[error("operation not supported by this solver: {0}")]
    Unsupported(&'static str),
    #[error("matrix is singular (pivot {pivot} below threshold)")]
    Singular { pivot: usize },
    #[error("solver requires a matrix")]
    MissingMatrix,
    #[error("solver requires an operator (ATimes)")]
    MissingOperator,
    #[error("solver used before setup")]
    NotSetUp,
    #[error("incompatible matrix")]
    IncompatibleMatrix,
    #[error("operator failed: {0}")]
    ATimes(CallbackError),
    #[error("preconditioner failed: {0}")]
    Preconditioner(CallbackError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Vector(#[from] VectorError),
}

impl LinSolError {
    /// Whether retrying with updated data (a new setup or a smaller step)
    /// may succeed.
    pub fn is_recoverable(&self) -> bool {
        match self {
            LinSolError::Singular { .. } => true,
            LinSolError::ATimes(e) | LinSolError::Preconditioner(e) => e.is_recoverable(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, LinSolError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinearSolverType {
    MatrixDirect,
    MatrixIterative,
    MatrixFreeIterative,
}

/// Outcome of a single solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinSolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// Norm of the scaled preconditioned residual (0 for direct solvers).
    pub res_norm: f64,
}

/// Which side a preconditioner solve is applied on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecSide {
    Left,
    Right,
}

/// Preconditioning configuration of an iterative solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecType {
    None,
    Left,
    Right,
    Both,
}

impl PrecType {
    fn left(self) -> bool {
        matches!(self, PrecType::Left | PrecType::Both)
    }

    fn right(self) -> bool {
        matches!(self, PrecType::Right | PrecType::Both)
    }
}

/// Matrix-free operator `z = A v`.
pub trait ATimes<V>: Send {
    fn apply(&mut self, v: &V, z: &mut V) -> std::result::Result<(), CallbackError>;
}

impl<V, F> ATimes<V> for F
where
    F: FnMut(&V, &mut V) -> std::result::Result<(), CallbackError> + Send,
{
    fn apply(&mut self, v: &V, z: &mut V) -> std::result::Result<(), CallbackError> {
        self(v, z)
    }
}

/// Preconditioner hooks.
pub trait Preconditioner<V>: Send {
    /// Called from the solver's `setup`.
    fn setup(&mut self) -> std::result::Result<(), CallbackError> {
        Ok(())
    }

    /// Approximately solves `P z = r` for the given side.
    fn solve(
        &mut self,
        r: &V,
        z: &mut V,
        tol: f64,
        side: PrecSide,
    ) -> std::result::Result<(), CallbackError>;
}

/// Common interface of linear solvers.
pub trait LinearSolver<V: NVector>: Send {
    fn solver_type(&self) -> LinearSolverType;

    /// Infrequent setup: factorization for direct solvers, preconditioner
    /// setup for iterative ones.
    fn setup(&mut self, a: Option<&dyn Matrix<V>>) -> Result<()>;

    /// Solves `A x = b`; on entry `x` is the initial guess of an iterative
    /// solver. A non-converged iterative solve is reported through
    /// [`LinSolveReport::converged`], not as an error.
    fn solve(
        &mut self,
        a: Option<&dyn Matrix<V>>,
        x: &mut V,
        b: &V,
        tol: f64,
    ) -> Result<LinSolveReport>;

    fn set_atimes(&mut self, _atimes: Box<dyn ATimes<V>>) -> Result<()> {
        Err(LinSolError::Unsupported("set_atimes"))
    }

    fn set_preconditioner(&mut self, _prec: Box<dyn Preconditioner<V>>) -> Result<()> {
        Err(LinSolError::Unsupported("set_preconditioner"))
    }

    fn set_scaling_vectors(&mut self, _s1: Option<&V>, _s2: Option<&V>) -> Result<()> {
        Err(LinSolError::Unsupported("set_scaling_vectors"))
    }

    /// Iterations of the most recent solve.
    fn num_iters(&self) -> usize {
        0
    }

    /// Residual norm of the most recent solve.
    fn res_norm(&self) -> f64 {
        0.0
    }
}

/// Tolerance to request from a solver that cannot apply the left scaling
/// `s1` itself: `tol / rms(s1)`. Returns `tol` when no scaling is given.
pub fn effective_tolerance<V: NVector>(tol: f64, s1: Option<&V>) -> Result<f64> {
    match s1 {
        None => Ok(tol),
        Some(s) => {
            let rms = (s.dot(s)? / s.len() as f64).sqrt();
            Ok(tol / rms)
        }
    }
}

/// Source of products with `A` for iterative solvers.
pub(crate) enum Operator<V> {
    /// Products come from the matrix passed to `solve`.
    Matrix,
    /// Products come from a user operator.
    Free(Option<Box<dyn ATimes<V>>>),
}

impl<V: NVector> Operator<V> {
    pub(crate) fn solver_type(&self) -> LinearSolverType {
        match self {
            Operator::Matrix => LinearSolverType::MatrixIterative,
            Operator::Free(_) => LinearSolverType::MatrixFreeIterative,
        }
    }

    pub(crate) fn check(&self, a: Option<&dyn Matrix<V>>) -> Result<()> {
        match self {
            Operator::Matrix if a.is_none() => Err(LinSolError::MissingMatrix),
            Operator::Free(None) => Err(LinSolError::MissingOperator),
            _ => Ok(()),
        }
    }

    pub(crate) fn apply(&mut self, a: Option<&dyn Matrix<V>>, v: &V, z: &mut V) -> Result<()> {
        match self {
            Operator::Matrix => {
                let a = a.ok_or(LinSolError::MissingMatrix)?;
                a.matvec(v, z)?;
                Ok(())
            }
            Operator::Free(Some(op)) => op.apply(v, z).map_err(LinSolError::ATimes),
            Operator::Free(None) => Err(LinSolError::MissingOperator),
        }
    }
}
