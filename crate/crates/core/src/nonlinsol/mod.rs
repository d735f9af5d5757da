//! Nonlinear solvers for root-finding `F(y) = 0` and fixed-point `G(y) = y`
//! problems.
//!
//! A solver works on a correction `ycor` relative to a prediction `y0` and
//! knows nothing about the problem beyond the injected callbacks: the system
//! function, the linear-solver setup and solve functions (root-finding only),
//! and an optional convergence test. Every callback receives the caller's
//! context `mem`, which lets an integrator route the calls back into its own
//! state without the solver holding references to it.

pub mod fixedpoint;
pub mod newton;
mod standalone;

pub use fixedpoint::FixedPoint;
pub use newton::Newton;
pub use standalone::standalone_root_solve;

use std::any::Any;

use thiserror::Error;

use crate::error::CallbackError;
use crate::vector::{NVector, VectorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlsError {
    #[error("nonlinear iteration did not converge in {0} iterations")]
    MaxIterations(usize),
    #[error("nonlinear iteration diverged")]
    Diverged,
    #[error("system function failed: {0}")]
    SysFn(CallbackError),
    #[error("linear solver setup failed: {0}")]
    LSetup(CallbackError),
    #[error("linear solve failed: {0}")]
    LSolve(CallbackError),
    #[error("convergence test failed: {0}")]
    ConvTest(CallbackError),
    #[error("solver configuration error: {0}")]
    Config(&'static str),
    #[error("operation not supported by this solver: {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Vector(#[from] VectorError),
}

impl NlsError {
    /// Whether the caller may retry, for example with a fresh linear solver
    /// setup or a smaller step.
    pub fn is_recoverable(&self) -> bool {
        match self {
            NlsError::MaxIterations(_) | NlsError::Diverged => true,
            NlsError::SysFn(e)
            | NlsError::LSetup(e)
            | NlsError::LSolve(e)
            | NlsError::ConvTest(e) => e.is_recoverable(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, NlsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NonlinearSolverType {
    RootFind,
    FixedPoint,
}

/// Verdict of a convergence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvStatus {
    Converged,
    Continue,
    Diverged,
}

/// System function. Root-finding solvers expect `F(ycor)`, fixed-point
/// solvers `G(ycor)`.
pub type SysFn<V> =
    Box<dyn FnMut(&V, &mut V, &mut dyn Any) -> std::result::Result<(), CallbackError> + Send>;

/// Linear solver setup. Receives `jbad`, set when the previous Jacobian data
/// led to a failure; returns `jcur`, whether the Jacobian data is now current.
pub type LSetupFn =
    Box<dyn FnMut(bool, &mut dyn Any) -> std::result::Result<bool, CallbackError> + Send>;

/// Linear solve: on entry `b` holds the right-hand side, on exit the solution.
pub type LSolveFn<V> =
    Box<dyn FnMut(&mut V, &mut dyn Any) -> std::result::Result<(), CallbackError> + Send>;

/// Convergence test, called after each update with
/// `(iteration, ycor, delta, tol, w, mem)`; the iteration index starts at 0.
pub type ConvTestFn<V> = Box<
    dyn FnMut(
            usize,
            &V,
            &V,
            f64,
            &V,
            &mut dyn Any,
        ) -> std::result::Result<ConvStatus, CallbackError>
        + Send,
>;

/// Common interface of nonlinear solvers.
pub trait NonlinearSolver<V: NVector>: Send {
    fn solver_type(&self) -> NonlinearSolverType;

    fn set_sys_fn(&mut self, f: SysFn<V>);

    fn set_lsetup_fn(&mut self, _f: LSetupFn) -> Result<()> {
        Err(NlsError::Unsupported("set_lsetup_fn"))
    }

    fn set_lsolve_fn(&mut self, _f: LSolveFn<V>) -> Result<()> {
        Err(NlsError::Unsupported("set_lsolve_fn"))
    }

    /// Replaces the built-in convergence test.
    fn set_conv_test_fn(&mut self, f: ConvTestFn<V>);

    fn set_max_iters(&mut self, n: usize);

    /// Whether the caller must provide linear-solver callbacks. Root-finding
    /// solvers that handle their own linear algebra override this.
    fn requires_linear_solver(&self) -> bool {
        self.solver_type() == NonlinearSolverType::RootFind
    }

    /// Solves for `ycor` given the prediction `y0`, the weight vector `w` and
    /// the tolerance `tol`. `ycor` holds the initial correction on entry and
    /// the final correction on exit. Returns the iterations of this solve.
    fn solve(
        &mut self,
        y0: &V,
        ycor: &mut V,
        w: &V,
        tol: f64,
        call_lsetup: bool,
        mem: &mut dyn Any,
    ) -> Result<usize>;

    /// Iterations since construction.
    fn num_iters(&self) -> usize;

    /// Failed solves since construction.
    fn num_conv_fails(&self) -> usize;
}
