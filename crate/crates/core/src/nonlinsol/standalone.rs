use std::any::Any;

use super::{NlsError, NonlinearSolver, NonlinearSolverType, Result};
use crate::error::CallbackError;
use crate::linsol::DenseLu;
use crate::matrix::DenseMatrix;
use crate::vector::NVector;

type UserFn<V> = Box<dyn FnMut(&V, &mut V) -> std::result::Result<(), CallbackError> + Send>;

struct Context<V: NVector> {
    f: UserFn<V>,
    u0: V,
    w: V,
    /// Most recent evaluation point and residual.
    u: V,
    fu: V,
    lu: DenseLu,
}

impl<V: NVector> Context<V> {
    fn eval(&mut self, ycor: &V) -> std::result::Result<(), CallbackError> {
        self.u.linear_sum(1.0, &self.u0, 1.0, ycor)?;
        (self.f)(&self.u, &mut self.fu)
    }

    /// Forward-difference Jacobian of `F` at the latest evaluation point.
    fn factor_jacobian(&mut self) -> std::result::Result<(), CallbackError> {
        let n = self.u.len();
        let mut u = vec![0.0; n];
        let mut f0 = vec![0.0; n];
        let mut wv = vec![0.0; n];
        self.u.copy_to_slice(&mut u)?;
        self.fu.copy_to_slice(&mut f0)?;
        self.w.copy_to_slice(&mut wv)?;
        let mut jac = DenseMatrix::zeros(n, n)?;
        let mut up = self.u.clone();
        let mut fp = self.fu.clone();
        let mut col = vec![0.0; n];
        let srur = f64::EPSILON.sqrt();
        for j in 0..n {
            let sigma = srur * u[j].abs().max(1.0 / wv[j]);
            let saved = u[j];
            u[j] = saved + sigma;
            up.copy_from_slice(&u)?;
            (self.f)(&up, &mut fp)?;
            u[j] = saved;
            fp.copy_to_slice(&mut col)?;
            for i in 0..n {
                jac.set(i, j, (col[i] - f0[i]) / sigma);
            }
        }
        self.lu
            .factor(&jac)
            .map_err(|e| CallbackError::Recoverable(e.to_string()))
    }
}

/// Solves `F(u) = 0` from the initial guess `u0`.
///
/// A root-finding solver is driven with the system `F(u0 + ycor)` and a dense
/// forward-difference Jacobian re-evaluated at every iterate (full Newton). A
/// fixed-point solver is driven with `G(u) = u - F(u)`. Any system, setup and
/// solve callbacks previously attached to `nls` are replaced.
pub fn standalone_root_solve<V, F>(
    nls: &mut dyn NonlinearSolver<V>,
    f: F,
    u0: &V,
    w: &V,
    tol: f64,
) -> Result<V>
where
    V: NVector,
    F: FnMut(&V, &mut V) -> std::result::Result<(), CallbackError> + Send + 'static,
{
    let mut ctx = Context {
        f: Box::new(f),
        u0: u0.clone(),
        w: w.clone(),
        u: u0.clone(),
        fu: u0.clone(),
        lu: DenseLu::new(),
    };
    match nls.solver_type() {
        NonlinearSolverType::RootFind => {
            nls.set_sys_fn(Box::new(|ycor: &V, res: &mut V, mem: &mut dyn Any| {
                let ctx = context::<V>(mem)?;
                ctx.eval(ycor)?;
                res.scale(1.0, &ctx.fu)?;
                Ok(())
            }));
            nls.set_lsetup_fn(Box::new(|_, _| Ok(true)))?;
            nls.set_lsolve_fn(Box::new(|b: &mut V, mem: &mut dyn Any| {
                let ctx = context::<V>(mem)?;
                ctx.factor_jacobian()?;
                let mut buf = vec![0.0; b.len()];
                b.copy_to_slice(&mut buf)?;
                ctx.lu
                    .solve_slice(&mut buf)
                    .map_err(|e| CallbackError::Unrecoverable(e.to_string()))?;
                b.copy_from_slice(&buf)?;
                Ok(())
            }))?;
        }
        NonlinearSolverType::FixedPoint => {
            nls.set_sys_fn(Box::new(|ycor: &V, g: &mut V, mem: &mut dyn Any| {
                let ctx = context::<V>(mem)?;
                ctx.eval(ycor)?;
                g.linear_sum(1.0, ycor, -1.0, &ctx.fu)?;
                Ok(())
            }));
        }
    }
    let mut ycor = u0.clone();
    ycor.const_fill(0.0);
    nls.solve(u0, &mut ycor, w, tol, true, &mut ctx)?;
    let mut u = u0.clone();
    u.axpby(1.0, 1.0, &ycor)?;
    Ok(u)
}

fn context<V: NVector>(mem: &mut dyn Any) -> std::result::Result<&mut Context<V>, CallbackError> {
    mem.downcast_mut::<Context<V>>()
        .ok_or_else(|| CallbackError::Unrecoverable("unexpected solver context".into()))
}

impl From<crate::linsol::LinSolError> for NlsError {
    fn from(e: crate::linsol::LinSolError) -> Self {
        NlsError::LSolve(CallbackError::Unrecoverable(e.to_string()))
    }
}
