use std::any::Any;

use super::{
    ConvStatus, ConvTestFn, LSetupFn, LSolveFn, NlsError, NonlinearSolver, NonlinearSolverType,
    Result, SysFn,
};
use crate::vector::NVector;

/// Newton iteration `delta = -J^-1 F(ycor)`, `ycor += delta`, with the
/// linear algebra delegated to the lsetup/lsolve callbacks.
///
/// Jacobian data is reused across iterations. After a recoverable failure
/// with stale Jacobian data the solve restarts once from the initial
/// correction with a forced setup.
///
/// The built-in convergence test evaluates `F` at the new iterate and keeps a
/// rate estimate `R` from successive residual-norm ratios (damped by
/// `crdown`); it converges when `R * ||delta|| < tol` and declares divergence
/// when a ratio exceeds `rdiv`. With the built-in test a converged solve
/// performs one more system evaluation than iterations; with an injected test
/// the two counts are equal.
pub struct Newton<V: NVector> {
    sys: Option<SysFn<V>>,
    lsetup: Option<LSetupFn>,
    lsolve: Option<LSolveFn<V>>,
    ctest: Option<ConvTestFn<V>>,
    max_iters: usize,
    crdown: f64,
    rdiv: f64,
    iters: usize,
    conv_fails: usize,
    sys_evals: usize,
    work: Option<(V, V, V)>,
}

pub const DEFAULT_MAX_ITERS: usize = 4;
pub const DEFAULT_CRDOWN: f64 = 0.3;
pub const DEFAULT_RDIV: f64 = 2.0;

impl<V: NVector> Default for Newton<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V: NVector> Newton<V> {
    pub fn new() -> Self {
        Newton {
            sys: None,
            lsetup: None,
            lsolve: None,
            ctest: None,
            max_iters: DEFAULT_MAX_ITERS,
            crdown: DEFAULT_CRDOWN,
            rdiv: DEFAULT_RDIV,
            iters: 0,
            conv_fails: 0,
            sys_evals: 0,
            work: None,
        }
    }

    /// Sets the rate damping and divergence constants of the built-in test.
    pub fn set_rate_constants(&mut self, crdown: f64, rdiv: f64) {
        self.crdown = crdown;
        self.rdiv = rdiv.max(1.0);
    }

    /// System function evaluations since construction.
    pub fn num_sys_evals(&self) -> usize {
        self.sys_evals
    }

    fn eval(&mut self, ycor: &V, res: &mut V, mem: &mut dyn Any) -> Result<()> {
        let sys = self
            .sys
            .as_mut()
            .ok_or(NlsError::Config("system function not set"))?;
        self.sys_evals += 1;
        sys(ycor, res, mem).map_err(NlsError::SysFn)
    }

    /// One attempt from the current `ycor`. Returns `Ok(Ok(()))` on
    /// convergence and `Ok(Err(e))` on a recoverable failure.
    #[allow(clippy::too_many_arguments)]
    fn attempt(
        &mut self,
        ycor: &mut V,
        w: &V,
        tol: f64,
        call_lsetup: bool,
        jbad: bool,
        jcur: &mut bool,
        iters: &mut usize,
        mem: &mut dyn Any,
    ) -> Result<std::result::Result<(), NlsError>> {
        let (mut res, mut delta, mut res_new) = self.work.take().expect("work vectors allocated");
        let out = (|| {
            if let Err(e) = self.eval(ycor, &mut res, mem) {
                return if e.is_recoverable() {
                    Ok(Err(e))
                } else {
                    Err(e)
                };
            }
            if call_lsetup {
                let lsetup = self.lsetup.as_mut().expect("checked by caller");
                match lsetup(jbad, mem) {
                    Ok(j) => *jcur = j,
                    Err(e) if e.is_recoverable() => return Ok(Err(NlsError::LSetup(e))),
                    Err(e) => return Err(NlsError::LSetup(e)),
                }
            }
            let mut rate = 0.0;
            let mut fnorm = res.wrms_norm(w)?;
            for m in 0..self.max_iters {
                delta.scale(-1.0, &res)?;
                let lsolve = self.lsolve.as_mut().expect("checked by caller");
                if let Err(e) = lsolve(&mut delta, mem) {
                    let e = NlsError::LSolve(e);
                    return if e.is_recoverable() {
                        Ok(Err(e))
                    } else {
                        Err(e)
                    };
                }
                ycor.axpby(1.0, 1.0, &delta)?;
                *iters += 1;
                self.iters += 1;

                let status = match self.ctest.as_mut() {
                    Some(test) => test(m, ycor, &delta, tol, w, mem).map_err(NlsError::ConvTest)?,
                    None => {
                        if let Err(e) = self.eval(ycor, &mut res_new, mem) {
                            return if e.is_recoverable() {
                                Ok(Err(e))
                            } else {
                                Err(e)
                            };
                        }
                        let fnew = res_new.wrms_norm(w)?;
                        let ratio = if fnorm > 0.0 { fnew / fnorm } else { 0.0 };
                        rate = if m == 0 {
                            ratio
                        } else {
                            ratio.max(self.crdown * rate)
                        };
                        fnorm = fnew;
                        std::mem::swap(&mut res, &mut res_new);
                        let dnorm = delta.wrms_norm(w)?;
                        if fnew == 0.0 || rate * dnorm < tol {
                            ConvStatus::Converged
                        } else if ratio > self.rdiv {
                            ConvStatus::Diverged
                        } else {
                            ConvStatus::Continue
                        }
                    }
                };
                match status {
                    ConvStatus::Converged => return Ok(Ok(())),
                    ConvStatus::Diverged => return Ok(Err(NlsError::Diverged)),
                    ConvStatus::Continue => {}
                }
                if m + 1 == self.max_iters {
                    break;
                }
                if self.ctest.is_some() {
                    if let Err(e) = self.eval(ycor, &mut res, mem) {
                        return if e.is_recoverable() {
                            Ok(Err(e))
                        } else {
                            Err(e)
                        };
                    }
                }
            }
            Ok(Err(NlsError::MaxIterations(self.max_iters)))
        })();
        self.work = Some((res, delta, res_new));
        out
    }
}

impl<V: NVector> NonlinearSolver<V> for Newton<V> {
    fn solver_type(&self) -> NonlinearSolverType {
        NonlinearSolverType::RootFind
    }

    fn set_sys_fn(&mut self, f: SysFn<V>) {
        self.sys = Some(f);
    }

    fn set_lsetup_fn(&mut self, f: LSetupFn) -> Result<()> {
        self.lsetup = Some(f);
        Ok(())
    }

    fn set_lsolve_fn(&mut self, f: LSolveFn<V>) -> Result<()> {
        self.lsolve = Some(f);
        Ok(())
    }

    fn set_conv_test_fn(&mut self, f: ConvTestFn<V>) {
        self.ctest = Some(f);
    }

    fn set_max_iters(&mut self, n: usize) {
        self.max_iters = n.max(1);
    }

    fn solve(
        &mut self,
        _y0: &V,
        ycor: &mut V,
        w: &V,
        tol: f64,
        call_lsetup: bool,
        mem: &mut dyn Any,
    ) -> Result<usize> {
        if self.sys.is_none() {
            return Err(NlsError::Config("system function not set"));
        }
        if self.lsolve.is_none() {
            return Err(NlsError::Config("linear solve function not set"));
        }
        if self.work.as_ref().is_none_or(|w| w.0.len() != ycor.len()) {
            self.work = Some((ycor.clone(), ycor.clone(), ycor.clone()));
        }
        let has_lsetup = self.lsetup.is_some();
        let initial = ycor.clone();
        let mut call_lsetup = call_lsetup && has_lsetup;
        let mut jbad = false;
        let mut jcur = false;
        let mut iters = 0;
        loop {
            match self.attempt(ycor, w, tol, call_lsetup, jbad, &mut jcur, &mut iters, mem) {
                Ok(Ok(())) => return Ok(iters),
                Ok(Err(e)) => {
                    if has_lsetup && !jcur {
                        ycor.scale(1.0, &initial)?;
                        call_lsetup = true;
                        jbad = true;
                        continue;
                    }
                    self.conv_fails += 1;
                    return Err(e);
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn num_iters(&self) -> usize {
        self.iters
    }

    fn num_conv_fails(&self) -> usize {
        self.conv_fails
    }
}
