use super::tables::ButcherTable;
use super::{
    accept_ratio, attach_callbacks, initial_step, min_step, reject_ratio, ConvTestConfig,
    IntegratorCounters, IntegratorError, LinearSystem, NonlinearSystem, Result, RhsFn, Tolerances,
    DEFAULT_MAX_STEPS, LSETUP_MAX_STEPS, MAX_CONV_FAILS, MAX_ERROR_FAILS, REPEAT_FAIL_SHRINK,
};
use crate::error::CallbackError;
use crate::nonlinsol::NonlinearSolver;
use crate::vector::NVector;

/// Additively split right-hand side `f = fe + fi`.
pub struct ArkRhs<V> {
    /// Part treated explicitly.
    pub explicit: Option<RhsFn<V>>,
    /// Part treated implicitly.
    pub implicit: Option<RhsFn<V>>,
}

/// Butcher tables for the explicit part, the implicit part, or both.
#[derive(Debug, Clone)]
pub enum ArkTables {
    Explicit(ButcherTable),
    Implicit(ButcherTable),
    Imex {
        explicit: ButcherTable,
        implicit: ButcherTable,
    },
}

impl ArkTables {
    /// The four-stage third-order IMEX pair.
    pub fn ark324() -> Self {
        ArkTables::Imex {
            explicit: ButcherTable::ark324_explicit(),
            implicit: ButcherTable::ark324_implicit(),
        }
    }

    fn parts(&self) -> (Option<&ButcherTable>, Option<&ButcherTable>) {
        match self {
            ArkTables::Explicit(e) => (Some(e), None),
            ArkTables::Implicit(i) => (None, Some(i)),
            ArkTables::Imex { explicit, implicit } => (Some(explicit), Some(implicit)),
        }
    }

    fn stages(&self) -> usize {
        match self {
            ArkTables::Explicit(t) | ArkTables::Implicit(t) => t.stages(),
            ArkTables::Imex { explicit, .. } => explicit.stages(),
        }
    }

    fn c(&self) -> &[f64] {
        match self {
            ArkTables::Explicit(t) | ArkTables::Implicit(t) => &t.c,
            ArkTables::Imex { explicit, .. } => &explicit.c,
        }
    }

    /// `(order, embedding order)` of the combined method.
    pub fn orders(&self) -> (usize, usize) {
        match self.parts() {
            (Some(e), Some(i)) => (e.order.min(i.order), e.embed_order.min(i.embed_order)),
            (Some(t), None) | (None, Some(t)) => (t.order, t.embed_order),
            (None, None) => unreachable!(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ArkOptions {
    /// Takes steps of exactly this size and skips the error test.
    pub fixed_step: Option<f64>,
    pub initial_step: Option<f64>,
    /// Expected integration interval, used by the initial step heuristic.
    pub interval: Option<f64>,
    pub max_steps: usize,
    /// Iteration limit passed to the nonlinear solver.
    pub max_nls_iters: Option<usize>,
    pub conv: ConvTestConfig,
}

impl Default for ArkOptions {
    fn default() -> Self {
        ArkOptions {
            fixed_step: None,
            initial_step: None,
            interval: None,
            max_steps: DEFAULT_MAX_STEPS,
            max_nls_iters: Some(3),
            conv: ConvTestConfig::default(),
        }
    }
}

/// Tolerance of the stage solves relative to the error-test threshold.
const NLS_TOL: f64 = 0.1;

/// Relative change in `gamma` that triggers a linear solver setup.
const GAMMA_DRIFT: f64 = 0.2;

/// Additive Runge-Kutta integrator for `y' = fe(t, y) + fi(t, y)`.
///
/// Stage `i` has the known data
/// `a_i = y_{n-1} + h sum_{j<i} (AE_ij fe_j + AI_ij fi_j)`. Explicit stages
/// set `z_i = a_i`; implicit stages solve `z_i - h AI_ii fi(t_i, z_i) - a_i = 0`
/// from the prediction `y_{n-1}`. The step error is the weighted norm of the
/// difference between the solution and its embedding.
pub struct Ark<V: NVector> {
    fe: Option<RhsFn<V>>,
    has_fi: bool,
    tables: ArkTables,
    tol: Tolerances<V>,
    opts: ArkOptions,
    nls: Option<Box<dyn NonlinearSolver<V>>>,
    sys: NonlinearSystem<V>,
    counters: IntegratorCounters,
    t: f64,
    y: V,
    t_prev: f64,
    y_prev: V,
    h: f64,
    h_used: f64,
    started: bool,
    fe_stages: Vec<V>,
    fi_stages: Vec<V>,
    f_prev: Option<V>,
    f_cur: Option<V>,
    setup_step: Option<usize>,
    gamma_setup: f64,
    last_err: f64,
    ewt: V,
    ycor: V,
    ynew: V,
    work: V,
}

fn check_tables<V>(rhs: &ArkRhs<V>, tables: &ArkTables) -> Result<()> {
    let bad = |m: &str| Err(IntegratorError::Config(m.to_string()));
    match tables {
        ArkTables::Explicit(t) => {
            t.validate()?;
            if !t.is_explicit() {
                return bad("explicit integration needs a strictly lower triangular table");
            }
            if rhs.explicit.is_none() || rhs.implicit.is_some() {
                return bad("an explicit table needs exactly the explicit right-hand side");
            }
        }
        ArkTables::Implicit(t) => {
            t.validate()?;
            if rhs.implicit.is_none() || rhs.explicit.is_some() {
                return bad("an implicit table needs exactly the implicit right-hand side");
            }
        }
        ArkTables::Imex { explicit, implicit } => {
            explicit.validate()?;
            implicit.validate()?;
            if !explicit.is_explicit() {
                return bad("the explicit table of an IMEX pair must be strictly lower triangular");
            }
            if explicit.stages() != implicit.stages() {
                return bad("IMEX tables must have the same number of stages");
            }
            if explicit.c != implicit.c {
                return bad("IMEX tables must share their stage times");
            }
            if rhs.explicit.is_none() || rhs.implicit.is_none() {
                return bad("IMEX integration needs both right-hand sides");
            }
        }
    }
    Ok(())
}

impl<V: NVector> Ark<V> {
    /// Creates an integrator at `(t0, y0)`. Tables with implicit stages need a
    /// nonlinear solver, and a Newton-type solver needs `ls` as well.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rhs: ArkRhs<V>,
        t0: f64,
        y0: &V,
        tol: Tolerances<V>,
        tables: ArkTables,
        nls: Option<Box<dyn NonlinearSolver<V>>>,
        ls: Option<LinearSystem<V>>,
        opts: ArkOptions,
    ) -> Result<Self> {
        tol.validate(y0.len())?;
        if !t0.is_finite() || !y0.max_norm().is_finite() {
            return Err(IntegratorError::Config(
                "initial data must be finite".into(),
            ));
        }
        check_tables(&rhs, &tables)?;
        let implicit_stages = tables
            .parts()
            .1
            .is_some_and(|t| (0..t.stages()).any(|i| t.a[i][i] != 0.0));
        let mut nls = nls;
        match nls.as_mut() {
            Some(n) => {
                if n.requires_linear_solver() && ls.is_none() {
                    return Err(IntegratorError::Config(
                        "a Newton-type nonlinear solver needs a linear solver".into(),
                    ));
                }
                if let Some(m) = opts.max_nls_iters {
                    n.set_max_iters(m);
                }
                attach_callbacks(n.as_mut(), ls.is_some())?;
            }
            None if implicit_stages => {
                return Err(IntegratorError::Config(
                    "implicit stages need a nonlinear solver".into(),
                ))
            }
            None => {}
        }
        for h in [opts.fixed_step, opts.initial_step].into_iter().flatten() {
            if !(h > 0.0 && h.is_finite()) {
                return Err(IntegratorError::Config(
                    "step sizes must be positive".into(),
                ));
            }
        }
        let has_fi = rhs.implicit.is_some();
        let fi = rhs.implicit.unwrap_or_else(|| {
            Box::new(|_, _, _| {
                Err(CallbackError::Unrecoverable(
                    "no implicit right-hand side".into(),
                ))
            })
        });
        let sys = NonlinearSystem::new(fi, y0, ls, opts.conv)?;
        let s = tables.stages();
        let mut ark = Ark {
            fe: rhs.explicit,
            has_fi,
            tables,
            tol,
            opts,
            nls,
            sys,
            counters: IntegratorCounters::default(),
            t: t0,
            y: y0.clone(),
            t_prev: t0,
            y_prev: y0.clone(),
            h: 0.0,
            h_used: 0.0,
            started: false,
            fe_stages: vec![y0.clone(); s],
            fi_stages: vec![y0.clone(); s],
            f_prev: None,
            f_cur: None,
            setup_step: None,
            gamma_setup: 0.0,
            last_err: 0.0,
            ewt: y0.clone(),
            ycor: y0.clone(),
            ynew: y0.clone(),
            work: y0.clone(),
        };
        if let Some(interval) = ark.opts.interval {
            ark.start(Some(interval))?;
        }
        Ok(ark)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &V {
        &self.y
    }

    pub fn tables(&self) -> &ArkTables {
        &self.tables
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn last_step_size(&self) -> f64 {
        self.h_used
    }

    pub fn last_error_estimate(&self) -> f64 {
        self.last_err
    }

    pub fn stats(&self) -> IntegratorCounters {
        self.counters + self.sys.counters
    }

    pub fn nonlinear_solver(&self) -> Option<&dyn NonlinearSolver<V>> {
        self.nls.as_deref()
    }

    fn eval_fe(&mut self, t: f64, y: &V, f: &mut V) -> Result<()> {
        let fe = self.fe.as_mut().expect("explicit right-hand side");
        self.counters.rhs_evals += 1;
        fe(t, y, f).map_err(IntegratorError::Rhs)
    }

    /// Full right-hand side `fe + fi` at `(t, y)`; counted.
    fn eval_full(&mut self, t: f64, y: &V, f: &mut V) -> Result<()> {
        match (self.fe.is_some(), self.has_fi) {
            (true, true) => {
                let mut fi = y.clone();
                self.eval_fe(t, y, f)?;
                self.sys.rhs(t, y, &mut fi).map_err(IntegratorError::Rhs)?;
                f.axpby(1.0, 1.0, &fi)?;
            }
            (true, false) => self.eval_fe(t, y, f)?,
            _ => self.sys.rhs(t, y, f).map_err(IntegratorError::Rhs)?,
        }
        Ok(())
    }

    fn start(&mut self, interval: Option<f64>) -> Result<()> {
        if self.started {
            return Ok(());
        }
        self.h = match (self.opts.fixed_step, self.opts.initial_step) {
            (Some(h), _) | (None, Some(h)) => h,
            (None, None) => {
                let mut f0 = self.y.clone();
                let (t, y) = (self.t, self.y.clone());
                self.eval_full(t, &y, &mut f0)?;
                self.tol.weights(&self.y, &mut self.ewt)?;
                let norm = f0.wrms_norm(&self.ewt)?;
                self.f_cur = Some(f0);
                let interval = interval.ok_or_else(|| {
                    IntegratorError::Config(
                        "no initial step: set an interval, an initial step or call evolve".into(),
                    )
                })?;
                initial_step(norm, interval)
            }
        };
        if !(self.h > 0.0) {
            return Err(IntegratorError::Config(
                "cannot choose an initial step over an empty interval".into(),
            ));
        }
        self.started = true;
        Ok(())
    }

    fn needs_setup(&self, gamma: f64, failed: bool) -> bool {
        if self.sys.linsys.is_none() {
            return false;
        }
        match self.setup_step {
            None => true,
            Some(s) => {
                failed
                    || (gamma / self.gamma_setup - 1.0).abs() > GAMMA_DRIFT
                    || self.counters.steps >= s + LSETUP_MAX_STEPS
            }
        }
    }

    /// Computes all stages for step `h`. Returns `Ok(false)` on a recoverable
    /// nonlinear solver failure.
    fn stages(&mut self, h: f64, force_setup: bool) -> Result<bool> {
        let s = self.tables.stages();
        let c = self.tables.c().to_vec();
        let (ex, im) = self.tables.parts();
        let ae: Option<Vec<Vec<f64>>> = ex.map(|t| t.a.clone());
        let ai: Option<Vec<Vec<f64>>> = im.map(|t| t.a.clone());
        let mut force_setup = force_setup;
        for i in 0..s {
            let ti = self.t + c[i] * h;
            // known data a_i
            let mut coef = vec![1.0];
            let mut vecs: Vec<&V> = vec![&self.y];
            for j in 0..i {
                if let Some(a) = &ae {
                    if a[i][j] != 0.0 {
                        coef.push(h * a[i][j]);
                        vecs.push(&self.fe_stages[j]);
                    }
                }
                if let Some(a) = &ai {
                    if a[i][j] != 0.0 {
                        coef.push(h * a[i][j]);
                        vecs.push(&self.fi_stages[j]);
                    }
                }
            }
            self.sys.a.linear_combination(&coef, &vecs)?;
            let diag = ai.as_ref().map_or(0.0, |a| a[i][i]);
            let mut z = std::mem::replace(&mut self.ynew, self.y.clone());
            if diag != 0.0 {
                let gamma = h * diag;
                let call_setup = self.needs_setup(gamma, force_setup);
                let sys = &mut self.sys;
                sys.t = ti;
                sys.gamma = gamma;
                sys.zpred.scale(1.0, &self.y)?;
                sys.ewt.scale(1.0, &self.ewt)?;
                sys.nls_tol = NLS_TOL;
                sys.steps = self.counters.steps;
                sys.conv_failed = force_setup;
                sys.mnewt = 0;
                self.ycor.const_fill(0.0);
                let nls = self.nls.as_mut().expect("nonlinear solver");
                let iters0 = nls.num_iters();
                let setups0 = sys.counters.lsetups;
                let r = nls.solve(&self.y, &mut self.ycor, &self.ewt, NLS_TOL, call_setup, sys);
                sys.counters.nls_iters += nls.num_iters() - iters0;
                if sys.counters.lsetups > setups0 {
                    self.setup_step = Some(self.counters.steps);
                    self.gamma_setup = gamma;
                    force_setup = false;
                }
                match r {
                    Ok(_) => {}
                    Err(e) if e.is_recoverable() => {
                        self.ynew = z;
                        return Ok(false);
                    }
                    Err(e) => {
                        self.ynew = z;
                        return Err(e.into());
                    }
                }
                z.linear_sum(1.0, &self.y, 1.0, &self.ycor)?;
                // fi_i follows from the converged stage equation
                self.fi_stages[i].linear_sum(1.0 / gamma, &z, -1.0 / gamma, &self.sys.a)?;
            } else {
                z.scale(1.0, &self.sys.a)?;
                if self.has_fi {
                    let mut fi = std::mem::replace(&mut self.fi_stages[i], self.work.clone());
                    let r = self.sys.rhs(ti, &z, &mut fi);
                    self.fi_stages[i] = fi;
                    if let Err(e) = r {
                        self.ynew = z;
                        return Err(IntegratorError::Rhs(e));
                    }
                }
            }
            if self.fe.is_some() {
                let mut fe = std::mem::replace(&mut self.fe_stages[i], self.work.clone());
                let r = self.eval_fe(ti, &z, &mut fe);
                self.fe_stages[i] = fe;
                if let Err(e) = r {
                    self.ynew = z;
                    return Err(e);
                }
            }
            self.ynew = z;
        }
        Ok(true)
    }

    /// `out = y + h sum_i (be_i fe_i + bi_i fi_i)` with the solution weights or
    /// their differences from the embedding.
    fn combine(&mut self, h: f64, diff: bool) -> Result<()> {
        let (ex, im) = self.tables.parts();
        let mut coef = Vec::new();
        let mut vecs: Vec<&V> = Vec::new();
        if !diff {
            coef.push(1.0);
            vecs.push(&self.y);
        }
        for (table, stages) in [(ex, &self.fe_stages), (im, &self.fi_stages)] {
            if let Some(t) = table {
                for i in 0..t.stages() {
                    let w = if diff { t.b[i] - t.b_embed[i] } else { t.b[i] };
                    if w != 0.0 {
                        coef.push(h * w);
                        vecs.push(&stages[i]);
                    }
                }
            }
        }
        let out = if diff { &mut self.work } else { &mut self.ynew };
        if coef.is_empty() {
            out.const_fill(0.0);
        } else {
            out.linear_combination(&coef, &vecs)?;
        }
        Ok(())
    }

    /// Takes one accepted step and returns the new time and solution.
    pub fn step(&mut self) -> Result<(f64, &V)> {
        if !self.started {
            self.start(self.opts.interval)?;
        }
        self.tol.weights(&self.y, &mut self.ewt)?;
        let (p, pe) = self.tables.orders();
        let k = p.min(pe) + 1;
        let mut nef = 0;
        let mut ncf = 0;
        loop {
            let h = self.h;
            if !(h.is_finite() && h > min_step(self.t)) {
                return Err(IntegratorError::StepSizeUnderflow { t: self.t, h });
            }
            if !self.stages(h, nef + ncf > 0)? {
                ncf += 1;
                self.counters.nls_conv_fails += 1;
                self.counters.step_fails += 1;
                if ncf >= MAX_CONV_FAILS || self.opts.fixed_step.is_some() {
                    return Err(IntegratorError::ConvergenceFailures { t: self.t });
                }
                self.h *= 0.5;
                continue;
            }
            self.combine(h, true)?;
            let err = self.work.wrms_norm(&self.ewt)?;
            if self.opts.fixed_step.is_none() && err > 1.0 {
                nef += 1;
                self.counters.error_test_fails += 1;
                self.counters.step_fails += 1;
                if nef >= MAX_ERROR_FAILS {
                    return Err(IntegratorError::ErrorTestFailures { t: self.t });
                }
                let mut eta = reject_ratio(err, k);
                if nef >= 2 {
                    eta = eta.min(REPEAT_FAIL_SHRINK);
                }
                self.h *= eta;
                continue;
            }
            self.combine(h, false)?;
            std::mem::swap(&mut self.y_prev, &mut self.y);
            std::mem::swap(&mut self.y, &mut self.ynew);
            self.t_prev = self.t;
            self.t += h;
            self.f_prev = self.f_cur.take();
            self.counters.steps += 1;
            self.h_used = h;
            self.last_err = err;
            self.h = match self.opts.fixed_step {
                Some(hf) => hf,
                None => {
                    let eta = accept_ratio(err, k);
                    h * if nef > 0 { eta.min(1.0) } else { eta }
                }
            };
            return Ok((self.t, &self.y));
        }
    }

    /// Cubic Hermite interpolation on the last step.
    pub fn dense_output(&mut self, t: f64, out: &mut V) -> Result<()> {
        if t == self.t || self.counters.steps == 0 {
            if t != self.t {
                return Err(IntegratorError::BadTout { t: self.t, tout: t });
            }
            out.scale(1.0, &self.y)?;
            return Ok(());
        }
        let h = self.h_used;
        let tol = 100.0 * f64::EPSILON * self.t.abs().max(1.0);
        if t < self.t_prev - tol || t > self.t + tol {
            return Err(IntegratorError::BadTout { t: self.t, tout: t });
        }
        if self.f_prev.is_none() {
            let mut f = self.y.clone();
            let (tp, yp) = (self.t_prev, self.y_prev.clone());
            self.eval_full(tp, &yp, &mut f)?;
            self.f_prev = Some(f);
        }
        if self.f_cur.is_none() {
            let mut f = self.y.clone();
            let (tc, yc) = (self.t, self.y.clone());
            self.eval_full(tc, &yc, &mut f)?;
            self.f_cur = Some(f);
        }
        let th = (t - self.t_prev) / h;
        let th2 = th * th;
        let th3 = th2 * th;
        let c = [
            2.0 * th3 - 3.0 * th2 + 1.0,
            h * (th3 - 2.0 * th2 + th),
            -2.0 * th3 + 3.0 * th2,
            h * (th3 - th2),
        ];
        let x = [
            &self.y_prev,
            self.f_prev.as_ref().expect("evaluated"),
            &self.y,
            self.f_cur.as_ref().expect("evaluated"),
        ];
        out.linear_combination(&c, &x)?;
        Ok(())
    }

    pub fn evolve_into(&mut self, tout: f64, out: &mut V) -> Result<()> {
        if !self.started {
            let interval = self.opts.interval.unwrap_or(tout - self.t);
            if tout == self.t {
                out.scale(1.0, &self.y)?;
                return Ok(());
            }
            self.start(Some(interval))?;
        }
        let lo = if self.counters.steps > 0 {
            self.t_prev
        } else {
            self.t
        };
        if tout < lo {
            return Err(IntegratorError::BadTout { t: self.t, tout });
        }
        let mut taken = 0;
        while self.t < tout {
            if taken >= self.opts.max_steps {
                return Err(IntegratorError::TooMuchWork { tout });
            }
            self.step()?;
            taken += 1;
        }
        if tout == self.t {
            out.scale(1.0, &self.y)?;
            return Ok(());
        }
        self.dense_output(tout, out)
    }

    pub fn evolve(&mut self, tout: f64) -> Result<V> {
        let mut out = self.y.clone();
        self.evolve_into(tout, &mut out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsol::DenseLu;
    use crate::nonlinsol::Newton;
    use crate::vector::SerialVector;

    fn sv(x: &[f64]) -> SerialVector {
        SerialVector::from_slice(x).unwrap()
    }

    fn linear(lambda: f64) -> RhsFn<SerialVector> {
        Box::new(move |_, y: &SerialVector, f: &mut SerialVector| {
            f.scale(lambda, y)?;
            Ok(())
        })
    }

    fn fixed(h: f64) -> ArkOptions {
        ArkOptions {
            fixed_step: Some(h),
            ..Default::default()
        }
    }

    fn newton() -> Option<Box<dyn NonlinearSolver<SerialVector>>> {
        Some(Box::new(Newton::new()))
    }

    fn lu() -> Option<LinearSystem<SerialVector>> {
        Some(LinearSystem::new(Box::new(DenseLu::new())))
    }

    #[test]
    fn forward_euler_step() {
        let mut ark = Ark::new(
            ArkRhs {
                explicit: Some(linear(-2.0)),
                implicit: None,
            },
            0.0,
            &sv(&[1.0]),
            Tolerances::scalar(1e-6, 1e-8),
            ArkTables::Explicit(ButcherTable::forward_euler()),
            None,
            None,
            fixed(0.1),
        )
        .unwrap();
        let (_, y) = ark.step().unwrap();
        assert!((y.as_slice()[0] - 0.8).abs() < 1e-15);
        let s = ark.stats();
        assert_eq!((s.steps, s.rhs_evals, s.nls_iters), (1, 1, 0));
    }

    #[test]
    fn backward_euler_step() {
        let mut ark = Ark::new(
            ArkRhs {
                explicit: None,
                implicit: Some(linear(-2.0)),
            },
            0.0,
            &sv(&[1.0]),
            Tolerances::scalar(1e-10, 1e-12),
            ArkTables::Implicit(ButcherTable::backward_euler()),
            newton(),
            lu(),
            fixed(0.1),
        )
        .unwrap();
        let (_, y) = ark.step().unwrap();
        assert!((y.as_slice()[0] - 1.0 / 1.2).abs() < 1e-12);
    }

    #[test]
    fn configuration_errors() {
        let e = Ark::new(
            ArkRhs {
                explicit: Some(linear(-1.0)),
                implicit: None,
            },
            0.0,
            &sv(&[1.0]),
            Tolerances::scalar(1e-6, 1e-8),
            ArkTables::Explicit(ButcherTable::sdirk2()),
            None,
            None,
            ArkOptions::default(),
        );
        assert!(matches!(e, Err(IntegratorError::Config(_))));
        let e = Ark::new(
            ArkRhs {
                explicit: Some(linear(-1.0)),
                implicit: Some(linear(-1.0)),
            },
            0.0,
            &sv(&[1.0]),
            Tolerances::scalar(1e-6, 1e-8),
            ArkTables::Imex {
                explicit: ButcherTable::heun_euler(),
                implicit: ButcherTable::ark324_implicit(),
            },
            newton(),
            lu(),
            ArkOptions::default(),
        );
        assert!(matches!(e, Err(IntegratorError::Config(_))));
        let e = Ark::new(
            ArkRhs {
                explicit: None,
                implicit: Some(linear(-1.0)),
            },
            0.0,
            &sv(&[1.0]),
            Tolerances::scalar(1e-6, 1e-8),
            ArkTables::Implicit(ButcherTable::sdirk2()),
            None,
            None,
            ArkOptions::default(),
        );
        assert!(matches!(e, Err(IntegratorError::Config(_))));
    }

    #[test]
    fn adaptive_imex_run() {
        let mut ark = Ark::new(
            ArkRhs {
                explicit: Some(linear(-0.5)),
                implicit: Some(linear(-0.5)),
            },
            0.0,
            &sv(&[1.0]),
            Tolerances::scalar(1e-6, 1e-10),
            ArkTables::ark324(),
            newton(),
            lu(),
            ArkOptions::default(),
        )
        .unwrap();
        let y = ark.evolve(1.0).unwrap();
        assert!((y.as_slice()[0] - (-1.0f64).exp()).abs() < 1e-5);
        let t = ark.t();
        assert_eq!(ark.evolve(t).unwrap().as_slice(), ark.y().as_slice());
        let s = ark.stats();
        assert!(s.steps > 0 && s.nls_iters > 0);
    }
}
