use std::sync::{Arc, Mutex};

use super::{lock, IntegratorError, NonlinearSystem, Result, RhsFn};
use crate::error::CallbackError;
use crate::linsol::{
    effective_tolerance, LinSolError, LinearSolver, LinearSolverType, PrecSide, Preconditioner,
};
use crate::matrix::{DenseMatrix, Matrix};
use crate::vector::NVector;

/// Dense Jacobian `J = df/dy` at `(t, y)` with `fy = f(t, y)`.
pub type JacFn<V> =
    Box<dyn FnMut(f64, &V, &V, &mut DenseMatrix) -> std::result::Result<(), CallbackError> + Send>;

/// Jacobian-vector product `jv = J v` at `(t, y)` with `fy = f(t, y)`,
/// called as `(v, jv, t, y, fy)`.
pub type JvFn<V> =
    Box<dyn FnMut(&V, &mut V, f64, &V, &V) -> std::result::Result<(), CallbackError> + Send>;

/// Preconditioner for the Newton matrix `I - gamma J`.
pub trait IntegratorPreconditioner<V>: Send {
    /// Prepares the preconditioner at `(t, y)`. `jok` says that saved
    /// Jacobian data may be reused. Returns whether Jacobian data was
    /// recomputed.
    fn setup(
        &mut self,
        t: f64,
        y: &V,
        fy: &V,
        jok: bool,
        gamma: f64,
    ) -> std::result::Result<bool, CallbackError>;

    /// Approximately solves `P z = r`.
    #[allow(clippy::too_many_arguments)]
    fn solve(
        &mut self,
        t: f64,
        y: &V,
        fy: &V,
        r: &V,
        z: &mut V,
        gamma: f64,
        delta: f64,
        side: PrecSide,
    ) -> std::result::Result<(), CallbackError>;
}

/// Linear solver configuration for Newton iterations inside an integrator.
///
/// Matrix-based solvers get `I - gamma J` assembled as a [`DenseMatrix`], with
/// `J` from [`with_jacobian`](Self::with_jacobian) or forward differences.
/// Matrix-free solvers get the operator `v - gamma J v`, with `J v` from
/// [`with_jac_times`](Self::with_jac_times) or a directional difference.
pub struct LinearSystem<V: NVector> {
    ls: Box<dyn LinearSolver<V>>,
    jac: Option<JacFn<V>>,
    jv: Option<JvFn<V>>,
    prec: Option<Box<dyn IntegratorPreconditioner<V>>>,
}

impl<V: NVector> LinearSystem<V> {
    pub fn new(ls: Box<dyn LinearSolver<V>>) -> Self {
        LinearSystem {
            ls,
            jac: None,
            jv: None,
            prec: None,
        }
    }

    pub fn with_jacobian(mut self, jac: JacFn<V>) -> Self {
        self.jac = Some(jac);
        self
    }

    pub fn with_jac_times(mut self, jv: JvFn<V>) -> Self {
        self.jv = Some(jv);
        self
    }

    pub fn with_preconditioner(mut self, prec: Box<dyn IntegratorPreconditioner<V>>) -> Self {
        self.prec = Some(prec);
        self
    }

    pub fn solver_type(&self) -> LinearSolverType {
        self.ls.solver_type()
    }
}

/// State reachable from the linear solver's operator and preconditioner
/// callbacks: the right-hand side and the current linearization point.
pub(crate) struct Shared<V: NVector> {
    rhs: RhsFn<V>,
    jv: Option<JvFn<V>>,
    prec: Option<Box<dyn IntegratorPreconditioner<V>>>,
    t: f64,
    y: V,
    fy: V,
    gamma: f64,
    ewt: V,
    jok: bool,
    jcur: bool,
    work: V,
    dq_evals: usize,
}

impl<V: NVector> Shared<V> {
    pub(crate) fn new(rhs: RhsFn<V>, template: &V) -> Self {
        Shared {
            rhs,
            jv: None,
            prec: None,
            t: 0.0,
            y: template.clone(),
            fy: template.clone(),
            gamma: 0.0,
            ewt: template.clone(),
            jok: false,
            jcur: true,
            work: template.clone(),
            dq_evals: 0,
        }
    }

    pub(crate) fn rhs(
        &mut self,
        t: f64,
        y: &V,
        f: &mut V,
    ) -> std::result::Result<(), CallbackError> {
        (self.rhs)(t, y, f)
    }

    fn set_point(&mut self, sys: &NonlinearSystem<V>) -> std::result::Result<(), CallbackError> {
        self.t = sys.t;
        self.gamma = sys.gamma;
        self.y.scale(1.0, &sys.ycur)?;
        self.fy.scale(1.0, &sys.fcur)?;
        self.ewt.scale(1.0, &sys.ewt)?;
        Ok(())
    }

    /// `z = J v`
    fn jac_times(&mut self, v: &V, z: &mut V) -> std::result::Result<(), CallbackError> {
        if let Some(jv) = self.jv.as_mut() {
            return jv(v, z, self.t, &self.y, &self.fy);
        }
        let vnorm = v.wrms_norm(&self.ewt)?;
        if vnorm == 0.0 {
            z.const_fill(0.0);
            return Ok(());
        }
        let sig = 1.0 / vnorm;
        self.work.linear_sum(1.0, &self.y, sig, v)?;
        self.dq_evals += 1;
        (self.rhs)(self.t, &self.work, z)?;
        z.axpby(1.0 / sig, -1.0 / sig, &self.fy)?;
        Ok(())
    }
}

struct PrecAdapter<V: NVector>(Arc<Mutex<Shared<V>>>);

impl<V: NVector> Preconditioner<V> for PrecAdapter<V> {
    fn setup(&mut self) -> std::result::Result<(), CallbackError> {
        let mut s = lock(&self.0);
        let Shared {
            prec,
            t,
            y,
            fy,
            jok,
            gamma,
            jcur,
            ..
        } = &mut *s;
        if let Some(p) = prec.as_mut() {
            *jcur = p.setup(*t, y, fy, *jok, *gamma)?;
        }
        Ok(())
    }

    fn solve(
        &mut self,
        r: &V,
        z: &mut V,
        tol: f64,
        side: PrecSide,
    ) -> std::result::Result<(), CallbackError> {
        let mut s = lock(&self.0);
        let Shared {
            prec,
            t,
            y,
            fy,
            gamma,
            ..
        } = &mut *s;
        match prec.as_mut() {
            Some(p) => p.solve(*t, y, fy, r, z, *gamma, tol, side),
            None => Ok(z.scale(1.0, r)?),
        }
    }
}

/// Steps after which saved Jacobian data is refreshed at the next setup.
const JAC_MAX_AGE: usize = 20;

/// Scale of the minimum difference-quotient increment.
const DQ_MIN_INC_MULT: f64 = 1000.0;

/// Fraction of the nonlinear tolerance requested from iterative solves.
const LIN_TOL_FACTOR: f64 = 0.05;

pub(crate) struct LinSysState<V: NVector> {
    ls: Box<dyn LinearSolver<V>>,
    jac: Option<JacFn<V>>,
    /// `(I - gamma J, J)` for matrix-based solvers.
    matrices: Option<(DenseMatrix, DenseMatrix)>,
    shared: Arc<Mutex<Shared<V>>>,
    gamma_setup: f64,
    jac_step: Option<usize>,
    scaling: bool,
    x: V,
}

fn to_callback(e: LinSolError) -> CallbackError {
    if e.is_recoverable() {
        CallbackError::Recoverable(e.to_string())
    } else {
        CallbackError::Unrecoverable(e.to_string())
    }
}

impl<V: NVector> LinSysState<V> {
    pub(crate) fn new(
        cfg: LinearSystem<V>,
        shared: Arc<Mutex<Shared<V>>>,
        template: &V,
    ) -> Result<Self> {
        let LinearSystem {
            mut ls,
            jac,
            jv,
            prec,
        } = cfg;
        let n = template.len();
        let matrix_based = ls.solver_type() != LinearSolverType::MatrixFreeIterative;
        let matrices = if matrix_based {
            if jv.is_some() {
                return Err(IntegratorError::Config(
                    "a Jacobian-vector product needs a matrix-free linear solver".into(),
                ));
            }
            Some((DenseMatrix::zeros(n, n)?, DenseMatrix::zeros(n, n)?))
        } else {
            if jac.is_some() {
                return Err(IntegratorError::Config(
                    "a dense Jacobian needs a matrix-based linear solver".into(),
                ));
            }
            let sh = shared.clone();
            ls.set_atimes(Box::new(move |v: &V, z: &mut V| {
                let mut s = lock(&sh);
                s.jac_times(v, z)?;
                let gamma = s.gamma;
                z.axpby(-gamma, 1.0, v)?;
                Ok(())
            }))?;
            None
        };
        {
            let mut s = lock(&shared);
            s.jv = jv;
            if prec.is_some() {
                s.prec = prec;
                drop(s);
                ls.set_preconditioner(Box::new(PrecAdapter(shared.clone())))?;
            }
        }
        let scaling = match ls.set_scaling_vectors(Some(template), Some(template)) {
            Ok(()) => true,
            Err(LinSolError::Unsupported(_)) => false,
            Err(e) => return Err(e.into()),
        };
        Ok(LinSysState {
            ls,
            jac,
            matrices,
            shared,
            gamma_setup: 0.0,
            jac_step: None,
            scaling,
            x: template.clone(),
        })
    }

    fn dq_jacobian(
        &mut self,
        sys: &mut NonlinearSystem<V>,
    ) -> std::result::Result<(), CallbackError> {
        let (_, j) = self.matrices.as_mut().expect("matrix-based solver");
        let n = sys.ycur.len();
        let mut y = vec![0.0; n];
        let mut f0 = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut col = vec![0.0; n];
        sys.ycur.copy_to_slice(&mut y)?;
        sys.fcur.copy_to_slice(&mut f0)?;
        sys.ewt.copy_to_slice(&mut w)?;
        let mut ypert = sys.ycur.clone();
        let mut fpert = sys.fcur.clone();
        let srur = f64::EPSILON.sqrt();
        // floor keeping the perturbation of f above rounding when the
        // tolerances are tight
        let fnorm = sys.fcur.wrms_norm(&sys.ewt)?;
        let min_inc = if fnorm > 0.0 {
            DQ_MIN_INC_MULT * sys.gamma.abs() * f64::EPSILON * n as f64 * fnorm
        } else {
            0.0
        };
        let mut s = lock(&self.shared);
        for k in 0..n {
            let inc = (srur * y[k].abs().max(1.0 / w[k])).max(min_inc / w[k]);
            let saved = y[k];
            y[k] = saved + inc;
            let inc = y[k] - saved;
            ypert.copy_from_slice(&y)?;
            y[k] = saved;
            s.rhs(sys.t, &ypert, &mut fpert)?;
            fpert.copy_to_slice(&mut col)?;
            for i in 0..n {
                j.set(i, k, (col[i] - f0[i]) / inc);
            }
        }
        sys.counters.rhs_evals += n;
        Ok(())
    }

    pub(crate) fn setup(
        &mut self,
        sys: &mut NonlinearSystem<V>,
        jbad: bool,
    ) -> std::result::Result<bool, CallbackError> {
        lock(&self.shared).set_point(sys)?;
        self.gamma_setup = sys.gamma;
        if self.matrices.is_some() {
            let fresh = self.jac_step.is_some_and(|s| sys.steps < s + JAC_MAX_AGE);
            let jok = !jbad && !sys.conv_failed && fresh;
            if !jok {
                match self.jac.as_mut() {
                    Some(jac) => {
                        let (_, j) = self.matrices.as_mut().expect("matrix-based solver");
                        j.as_mut_slice().fill(0.0);
                        jac(sys.t, &sys.ycur, &sys.fcur, j)?;
                    }
                    None => self.dq_jacobian(sys)?,
                }
                sys.counters.jac_evals += 1;
                self.jac_step = Some(sys.steps);
            }
            let (a, j) = self.matrices.as_mut().expect("matrix-based solver");
            a.as_mut_slice().copy_from_slice(j.as_slice());
            Matrix::<V>::scale_add_identity(a, -sys.gamma)?;
            self.ls.setup(Some(&*a)).map_err(to_callback)?;
            Ok(!jok)
        } else {
            {
                let mut s = lock(&self.shared);
                s.jok = !jbad && !sys.conv_failed;
                s.jcur = true;
            }
            self.ls.setup(None).map_err(to_callback)?;
            Ok(lock(&self.shared).jcur)
        }
    }

    pub(crate) fn solve(
        &mut self,
        sys: &mut NonlinearSystem<V>,
        b: &mut V,
    ) -> std::result::Result<(), CallbackError> {
        let matrix_based = self.matrices.is_some();
        if !matrix_based {
            lock(&self.shared).set_point(sys)?;
        }
        let n = b.len() as f64;
        let mut tol = LIN_TOL_FACTOR * sys.nls_tol * n.sqrt();
        if self.scaling {
            self.ls
                .set_scaling_vectors(Some(&sys.ewt), Some(&sys.ewt))
                .map_err(to_callback)?;
        } else {
            tol = effective_tolerance(tol, Some(&sys.ewt)).map_err(to_callback)?;
        }
        self.x.const_fill(0.0);
        let a = self.matrices.as_ref().map(|(a, _)| a as &dyn Matrix<V>);
        let rep = self.ls.solve(a, &mut self.x, b, tol);
        let dq = std::mem::take(&mut lock(&self.shared).dq_evals);
        sys.counters.rhs_evals += dq;
        let rep = rep.map_err(to_callback)?;
        sys.counters.ls_iters += rep.iterations;
        b.scale(1.0, &self.x)?;
        if matrix_based && sys.gamma != self.gamma_setup {
            b.scale_in_place(2.0 / (1.0 + sys.gamma / self.gamma_setup));
        }
        if !rep.converged && sys.mnewt > 0 {
            return Err(CallbackError::Recoverable(
                "linear solver did not converge".into(),
            ));
        }
        Ok(())
    }
}
