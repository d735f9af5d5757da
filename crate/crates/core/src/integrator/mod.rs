//! Adaptive time integrators for `y' = f(t, y)`.
//!
//! [`Lmm`] is a variable-order, variable-step linear multistep method (BDF or
//! Adams). [`Ark`] is an additive Runge-Kutta method for `y' = fe + fi` with
//! explicit, diagonally implicit, or IMEX Butcher tables. Both solve their
//! implicit equations
//!
//! ```text
//! y - gamma * f(t, y) - a = 0
//! ```
//!
//! through a pluggable [`NonlinearSolver`](crate::nonlinsol::NonlinearSolver),
//! which sees the integrator only through a [`NonlinearSystem`] context, and an
//! optional [`LinearSystem`] that forms `I - gamma J` for Newton iterations.

mod ark;
mod linsys;
mod lmm;
pub mod poly;
pub mod tables;

pub use ark::{Ark, ArkOptions, ArkRhs, ArkTables};
pub use linsys::{IntegratorPreconditioner, JacFn, JvFn, LinearSystem};
pub use lmm::{Lmm, LmmCoefficients, LmmMethod, LmmOptions};
pub use tables::ButcherTable;

use std::any::Any;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::Serialize;
use thiserror::Error;

use crate::error::CallbackError;
use crate::linsol::LinSolError;
use crate::matrix::MatrixError;
use crate::nonlinsol::{ConvStatus, ConvTestFn, NlsError};
use crate::vector::{NVector, VectorError};

use linsys::{LinSysState, Shared};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("output time {tout} is behind the current time {t}")]
    BadTout { t: f64, tout: f64 },
    #[error("step size {h} underflowed at t = {t}")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("too many error test failures at t = {t}")]
    ErrorTestFailures { t: f64 },
    #[error("repeated nonlinear solver failures at t = {t}")]
    ConvergenceFailures { t: f64 },
    #[error("maximum number of steps reached before t = {tout}")]
    TooMuchWork { tout: f64 },
    #[error("error weights undefined: a weight denominator is zero")]
    BadWeights,
    #[error("right-hand side failed: {0}")]
    Rhs(CallbackError),
    #[error(transparent)]
    Nls(#[from] NlsError),
    #[error(transparent)]
    LinSol(#[from] LinSolError),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type Result<T> = std::result::Result<T, IntegratorError>;

/// Right-hand side `f(t, y) -> ydot`.
pub type RhsFn<V> =
    Box<dyn FnMut(f64, &V, &mut V) -> std::result::Result<(), CallbackError> + Send>;

/// Absolute tolerance, shared by all components or given per component.
#[derive(Debug, Clone)]
pub enum Atol<V> {
    Scalar(f64),
    Vector(V),
}

/// Relative and absolute tolerances; the error weights are
/// `w_i = 1 / (rtol |y_i| + atol_i)`.
#[derive(Debug, Clone)]
pub struct Tolerances<V> {
    pub rtol: f64,
    pub atol: Atol<V>,
}

impl<V: NVector> Tolerances<V> {
    pub fn scalar(rtol: f64, atol: f64) -> Self {
        Tolerances {
            rtol,
            atol: Atol::Scalar(atol),
        }
    }

    pub fn vector(rtol: f64, atol: V) -> Self {
        Tolerances {
            rtol,
            atol: Atol::Vector(atol),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: &str| Err(IntegratorError::Config(m.to_string()));
        if !(self.rtol >= 0.0) {
            return bad("rtol must be non-negative");
        }
        match &self.atol {
            Atol::Scalar(a) => {
                if !(*a >= 0.0) {
                    return bad("atol must be non-negative");
                }
                if self.rtol == 0.0 && *a == 0.0 {
                    return bad("rtol and atol cannot both be zero");
                }
            }
            Atol::Vector(a) => {
                if a.len() != n {
                    return bad("atol vector length differs from the state");
                }
                if a.min() < 0.0 {
                    return bad("atol must be non-negative");
                }
                if self.rtol == 0.0 && a.min() == 0.0 {
                    return bad("rtol and atol cannot both be zero");
                }
            }
        }
        Ok(())
    }

    /// Writes the error weights for `y` into `w`.
    pub fn weights(&self, y: &V, w: &mut V) -> Result<()> {
        w.abs(y)?;
        w.scale_in_place(self.rtol);
        match &self.atol {
            Atol::Scalar(a) => {
                let tmp = w.clone();
                w.add_const(&tmp, *a)?;
            }
            Atol::Vector(a) => w.axpby(1.0, 1.0, a)?,
        }
        let tmp = w.clone();
        w.inv(&tmp).map_err(|_| IntegratorError::BadWeights)
    }
}

/// Cumulative integrator statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IntegratorCounters {
    /// Accepted steps.
    pub steps: usize,
    /// Rejected step attempts (error test or nonlinear solver failures).
    pub step_fails: usize,
    /// Right-hand side evaluations, including those made for difference
    /// quotients.
    pub rhs_evals: usize,
    pub nls_iters: usize,
    pub ls_iters: usize,
    pub nls_conv_fails: usize,
    pub error_test_fails: usize,
    pub lsetups: usize,
    pub jac_evals: usize,
}

impl std::ops::Add for IntegratorCounters {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        IntegratorCounters {
            steps: self.steps + o.steps,
            step_fails: self.step_fails + o.step_fails,
            rhs_evals: self.rhs_evals + o.rhs_evals,
            nls_iters: self.nls_iters + o.nls_iters,
            ls_iters: self.ls_iters + o.ls_iters,
            nls_conv_fails: self.nls_conv_fails + o.nls_conv_fails,
            error_test_fails: self.error_test_fails + o.error_test_fails,
            lsetups: self.lsetups + o.lsetups,
            jac_evals: self.jac_evals + o.jac_evals,
        }
    }
}

/// Constants of the integrators' nonlinear convergence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvTestConfig {
    /// Factor applied to the previous rate estimate.
    pub crdown: f64,
    /// Ratio of successive update norms that signals divergence.
    pub rdiv: f64,
}

impl Default for ConvTestConfig {
    fn default() -> Self {
        ConvTestConfig {
            crdown: 0.3,
            rdiv: 2.0,
        }
    }
}

/// The implicit equation of the current step or stage,
/// `F(ycor) = zpred + ycor - gamma f(t, zpred + ycor) - a`,
/// passed as context to the nonlinear solver's callbacks.
///
/// Custom nonlinear solvers downcast their `mem` argument to this type to read
/// the equation data or evaluate the residual.
pub struct NonlinearSystem<V: NVector> {
    pub(crate) shared: Arc<Mutex<Shared<V>>>,
    pub(crate) linsys: Option<LinSysState<V>>,
    pub(crate) t: f64,
    pub(crate) gamma: f64,
    pub(crate) zpred: V,
    pub(crate) a: V,
    pub(crate) ycur: V,
    pub(crate) fcur: V,
    pub(crate) ewt: V,
    pub(crate) nls_tol: f64,
    pub(crate) conv: ConvTestConfig,
    pub(crate) crate_: f64,
    pub(crate) delp: f64,
    pub(crate) mnewt: usize,
    pub(crate) steps: usize,
    pub(crate) conv_failed: bool,
    pub(crate) counters: IntegratorCounters,
}

impl<V: NVector> NonlinearSystem<V> {
    pub(crate) fn new(
        rhs: RhsFn<V>,
        template: &V,
        linsys: Option<LinearSystem<V>>,
        conv: ConvTestConfig,
    ) -> Result<Self> {
        let shared = Arc::new(Mutex::new(Shared::new(rhs, template)));
        let linsys = match linsys {
            Some(l) => Some(LinSysState::new(l, shared.clone(), template)?),
            None => None,
        };
        Ok(NonlinearSystem {
            shared,
            linsys,
            t: 0.0,
            gamma: 0.0,
            zpred: template.clone(),
            a: template.clone(),
            ycur: template.clone(),
            fcur: template.clone(),
            ewt: template.clone(),
            nls_tol: 0.0,
            conv,
            crate_: 1.0,
            delp: 0.0,
            mnewt: 0,
            steps: 0,
            conv_failed: false,
            counters: IntegratorCounters::default(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Prediction the correction is measured from.
    pub fn zpred(&self) -> &V {
        &self.zpred
    }

    /// Known data `a` of the equation.
    pub fn known_data(&self) -> &V {
        &self.a
    }

    /// Error weights of the current step.
    pub fn weights(&self) -> &V {
        &self.ewt
    }

    /// Evaluates the (implicit) right-hand side; counted.
    pub fn rhs(&mut self, t: f64, y: &V, f: &mut V) -> std::result::Result<(), CallbackError> {
        self.counters.rhs_evals += 1;
        lock(&self.shared).rhs(t, y, f)
    }

    /// `fcur = f(t, ycur)`
    fn eval_current(&mut self) -> std::result::Result<(), CallbackError> {
        self.counters.rhs_evals += 1;
        lock(&self.shared).rhs(self.t, &self.ycur, &mut self.fcur)
    }

    /// Residual `F(ycor)` of the root-finding form.
    pub fn residual(&mut self, ycor: &V, res: &mut V) -> std::result::Result<(), CallbackError> {
        self.ycur.linear_sum(1.0, &self.zpred, 1.0, ycor)?;
        self.eval_current()?;
        res.linear_combination(
            &[1.0, -self.gamma, -1.0],
            &[&self.ycur, &self.fcur, &self.a],
        )?;
        Ok(())
    }

    /// Fixed-point map `G(ycor) = gamma f(t, zpred + ycor) + a - zpred`.
    pub fn fixed_point(&mut self, ycor: &V, g: &mut V) -> std::result::Result<(), CallbackError> {
        self.ycur.linear_sum(1.0, &self.zpred, 1.0, ycor)?;
        self.eval_current()?;
        g.linear_combination(
            &[self.gamma, 1.0, -1.0],
            &[&self.fcur, &self.a, &self.zpred],
        )?;
        Ok(())
    }

    fn lsetup(&mut self, jbad: bool) -> std::result::Result<bool, CallbackError> {
        let mut ls = self
            .linsys
            .take()
            .ok_or_else(|| CallbackError::Unrecoverable("no linear solver attached".into()))?;
        let r = ls.setup(self, jbad);
        self.linsys = Some(ls);
        self.counters.lsetups += 1;
        self.crate_ = 1.0;
        r
    }

    fn lsolve(&mut self, b: &mut V) -> std::result::Result<(), CallbackError> {
        let mut ls = self
            .linsys
            .take()
            .ok_or_else(|| CallbackError::Unrecoverable("no linear solver attached".into()))?;
        let r = ls.solve(self, b);
        self.linsys = Some(ls);
        r
    }

    /// Convergence test on the update norms, with a persistent rate estimate.
    fn conv_test(
        &mut self,
        m: usize,
        delta: &V,
        tol: f64,
        w: &V,
    ) -> std::result::Result<ConvStatus, CallbackError> {
        let del = delta.wrms_norm(w)?;
        if m > 0 {
            self.crate_ = (self.conv.crdown * self.crate_).max(del / self.delp);
        }
        self.mnewt = m + 1;
        let dcon = del * self.crate_.min(1.0) / tol;
        if dcon <= 1.0 {
            return Ok(ConvStatus::Converged);
        }
        if m > 0 && del > self.conv.rdiv * self.delp {
            return Ok(ConvStatus::Diverged);
        }
        self.delp = del;
        Ok(ConvStatus::Continue)
    }
}

pub(crate) fn lock<V: NVector>(shared: &Mutex<Shared<V>>) -> MutexGuard<'_, Shared<V>> {
    shared.lock().unwrap_or_else(|e| e.into_inner())
}

fn system<V: NVector>(
    mem: &mut dyn Any,
) -> std::result::Result<&mut NonlinearSystem<V>, CallbackError> {
    mem.downcast_mut::<NonlinearSystem<V>>()
        .ok_or_else(|| CallbackError::Unrecoverable("unexpected nonlinear solver context".into()))
}

/// Wires the integrator callbacks into a nonlinear solver.
pub(crate) fn attach_callbacks<V: NVector>(
    nls: &mut dyn crate::nonlinsol::NonlinearSolver<V>,
    with_linsys: bool,
) -> Result<()> {
    use crate::nonlinsol::NonlinearSolverType;
    match nls.solver_type() {
        NonlinearSolverType::RootFind => {
            nls.set_sys_fn(Box::new(|ycor: &V, res: &mut V, mem: &mut dyn Any| {
                system::<V>(mem)?.residual(ycor, res)
            }));
            if with_linsys {
                nls.set_lsetup_fn(Box::new(|jbad, mem: &mut dyn Any| {
                    system::<V>(mem)?.lsetup(jbad)
                }))?;
                nls.set_lsolve_fn(Box::new(|b: &mut V, mem: &mut dyn Any| {
                    system::<V>(mem)?.lsolve(b)
                }))?;
            }
        }
        NonlinearSolverType::FixedPoint => {
            nls.set_sys_fn(Box::new(|ycor: &V, g: &mut V, mem: &mut dyn Any| {
                system::<V>(mem)?.fixed_point(ycor, g)
            }));
        }
    }
    let test: ConvTestFn<V> = Box::new(|m, _ycor: &V, delta: &V, tol, w: &V, mem: &mut dyn Any| {
        system::<V>(mem)?.conv_test(m, delta, tol, w)
    });
    nls.set_conv_test_fn(test);
    Ok(())
}

/// Initial step size: `min(sqrt(2 / ||f0||_wrms), interval / 100)`, where the
/// first term targets a local error of one weighted unit for a first-order
/// step. `||f0|| = 0` falls back to `interval / 100`.
pub fn initial_step(f0_norm: f64, interval: f64) -> f64 {
    let cap = interval.abs() / 100.0;
    if f0_norm > 0.0 {
        (2.0 / f0_norm).sqrt().min(cap)
    } else {
        cap
    }
}

/// Step-size ratio after an accepted step with error norm `err` and exponent
/// `1 / k`.
pub fn accept_ratio(err: f64, k: usize) -> f64 {
    if err == 0.0 {
        return MAX_GROWTH;
    }
    (SAFETY * err.powf(-1.0 / k as f64)).min(MAX_GROWTH)
}

/// Step-size ratio after a rejected step.
pub fn reject_ratio(err: f64, k: usize) -> f64 {
    (SAFETY * err.powf(-1.0 / k as f64)).clamp(MIN_SHRINK, SAFETY)
}

pub const SAFETY: f64 = 0.9;
pub const MAX_GROWTH: f64 = 5.0;
pub const MIN_SHRINK: f64 = 0.1;
/// Step ratio cap from the second consecutive error test failure on.
pub const REPEAT_FAIL_SHRINK: f64 = 0.3;
pub const MAX_ERROR_FAILS: usize = 7;
pub const MAX_CONV_FAILS: usize = 10;
pub const LSETUP_MAX_STEPS: usize = 20;
pub const DEFAULT_MAX_STEPS: usize = 100_000;

/// Smallest step allowed at time `t`.
pub(crate) fn min_step(t: f64) -> f64 {
    10.0 * f64::EPSILON * t.abs()
}
