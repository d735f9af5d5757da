//! Driver for the two reference problems: configuration, validation, runs,
//! statistics output and side-by-side comparison.

pub mod bruss1d;
pub mod heat2d;

use std::fmt;
use std::io::Write;
use std::time::Instant;

use clap::ValueEnum;
use serde::Serialize;
use thiserror::Error;

use crate::integrator::{
    Ark, ArkOptions, ArkRhs, ArkTables, ButcherTable, IntegratorCounters, IntegratorError,
    IntegratorPreconditioner, JacFn, JvFn, LinearSystem, Lmm, LmmMethod, LmmOptions, RhsFn,
    Tolerances,
};
use crate::linsol::{DenseLu, Gmres, LinearSolver, Pcg, PrecType, DEFAULT_MAXL};
use crate::nonlinsol::{FixedPoint, Newton, NonlinearSolver};
use crate::vector::{Capabilities, NVector};

pub use bruss1d::{
    BlockCounts, BlockLocalNewton, BlockLocalStats, Bruss1D, PointBlockPreconditioner,
};
pub use heat2d::{Heat2D, SineTransformPreconditioner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Heat2d,
    Bruss1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorKind {
    Lmm,
    Ark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bdf,
    Adams,
    Erk,
    Dirk,
    Imex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NlsKind {
    Newton,
    Fixedpoint,
    Blocklocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinsolKind {
    Dense,
    Gmres,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JvKind {
    Analytic,
    Dq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatsFormat {
    Table,
    Csv,
    Json,
}

/// Largest heat grid side for the dense solver.
pub const DENSE_MAX_HEAT: usize = 16;
/// Largest Brusselator grid for the dense solver.
pub const DENSE_MAX_BRUSS: usize = 100;
/// Anderson depth used with `--nls fixedpoint`.
const ANDERSON_DEPTH: usize = 2;
/// Tolerance reduction of the Brusselator reference run.
const REFERENCE_TOL_FACTOR: f64 = 1e-2;

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub problem: Problem,
    pub integrator: IntegratorKind,
    pub method: Method,
    pub nls: NlsKind,
    pub linsol: LinsolKind,
    pub jv: JvKind,
    pub nx: usize,
    pub ny: usize,
    pub blocks: usize,
    pub rtol: f64,
    pub atol: f64,
    pub tf: f64,
    pub maxl: usize,
    pub fused: bool,
    /// Seed for randomized drivers; runs themselves are deterministic.
    pub seed: u64,
}

impl Config {
    /// Defaults for `problem`: BDF with Newton and GMRES on the heat
    /// equation, IMEX ARK with Newton and GMRES on the Brusselator.
    pub fn defaults(problem: Problem) -> Self {
        match problem {
            Problem::Heat2d => Config {
                problem,
                integrator: IntegratorKind::Lmm,
                method: Method::Bdf,
                nls: NlsKind::Newton,
                linsol: LinsolKind::Gmres,
                jv: JvKind::Analytic,
                nx: 64,
                ny: 64,
                blocks: 1,
                rtol: 1e-5,
                atol: 1e-10,
                tf: 1.0,
                maxl: DEFAULT_MAXL,
                fused: true,
                seed: 0,
            },
            Problem::Bruss1d => Config {
                problem,
                integrator: IntegratorKind::Ark,
                method: Method::Imex,
                nls: NlsKind::Newton,
                linsol: LinsolKind::Gmres,
                jv: JvKind::Analytic,
                nx: 1000,
                ny: 1,
                blocks: 4,
                rtol: 1e-6,
                atol: 1e-11,
                tf: 10.0,
                maxl: DEFAULT_MAXL,
                fused: true,
                seed: 0,
            },
        }
    }

    /// Rejects inconsistent combinations before any work is done.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        let lmm_method = matches!(self.method, Method::Bdf | Method::Adams);
        match (self.integrator, lmm_method) {
            (IntegratorKind::Lmm, false) => {
                return bad("--integrator lmm takes --method bdf or adams")
            }
            (IntegratorKind::Ark, true) => {
                return bad("--integrator ark takes --method erk, dirk or imex")
            }
            _ => {}
        }
        if self.nx == 0 || (self.problem == Problem::Heat2d && self.ny == 0) {
            return bad("grid sizes must be positive");
        }
        if !(self.rtol >= 0.0 && self.atol >= 0.0) || self.rtol + self.atol == 0.0 {
            return bad("tolerances must be non-negative and not both zero");
        }
        if !(self.tf > 0.0 && self.tf.is_finite()) {
            return bad("--tf must be positive");
        }
        if self.maxl == 0 {
            return bad("--maxl must be positive");
        }
        match self.problem {
            Problem::Heat2d => {
                if self.linsol == LinsolKind::Dense && self.nx.max(self.ny) > DENSE_MAX_HEAT {
                    return bad("--linsol dense is limited to heat2d grids up to 16x16");
                }
                if self.nls == NlsKind::Blocklocal {
                    return bad("--nls blocklocal applies to bruss1d only");
                }
            }
            Problem::Bruss1d => {
                if self.blocks == 0 || self.blocks > self.nx {
                    return bad("--blocks must be between 1 and --nx");
                }
                if self.linsol == LinsolKind::Cg {
                    return bad("--linsol cg needs a symmetric system; bruss1d is not");
                }
                if self.linsol == LinsolKind::Dense && self.nx > DENSE_MAX_BRUSS {
                    return bad("--linsol dense is limited to bruss1d grids up to 100 points");
                }
                if self.nls == NlsKind::Blocklocal && self.method != Method::Imex {
                    return bad("--nls blocklocal needs --integrator ark --method imex");
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |v: &dyn ValueName| v.value_name();
        writeln!(f, "problem     {}", name(&self.problem))?;
        writeln!(f, "integrator  {}", name(&self.integrator))?;
        writeln!(f, "method      {}", name(&self.method))?;
        writeln!(f, "nls         {}", name(&self.nls))?;
        writeln!(f, "linsol      {}", name(&self.linsol))?;
        writeln!(f, "jv          {}", name(&self.jv))?;
        match self.problem {
            Problem::Heat2d => writeln!(f, "grid        {} x {}", self.nx, self.ny)?,
            Problem::Bruss1d => writeln!(
                f,
                "grid        {} points in {} blocks",
                self.nx, self.blocks
            )?,
        }
        writeln!(f, "rtol        {:e}", self.rtol)?;
        writeln!(f, "atol        {:e}", self.atol)?;
        writeln!(f, "tf          {}", self.tf)?;
        writeln!(f, "maxl        {}", self.maxl)?;
        writeln!(f, "fused       {}", if self.fused { "on" } else { "off" })?;
        write!(f, "seed        {}", self.seed)
    }
}

trait ValueName {
    fn value_name(&self) -> String;
}

impl<T: ValueEnum> ValueName for T {
    fn value_name(&self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] IntegratorError),
    #[error("output error: {0}")]
    Output(String),
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

/// Statistics of one run; the field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunReport {
    pub steps: usize,
    pub step_fails: usize,
    pub rhs_evals: usize,
    pub nls_iters: usize,
    pub ls_iters: usize,
    /// Max-norm error against the analytic solution (heat2d) or a
    /// tighter-tolerance reference run (bruss1d).
    pub max_error: f64,
    pub wall_seconds: f64,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: Config,
    pub report: RunReport,
    pub counters: IntegratorCounters,
    /// Final state, flattened.
    pub state: Vec<f64>,
    /// Cross-block reductions counted on the state vector (bruss1d only).
    pub reductions: Option<usize>,
    /// Counts of the block-local solver, when used.
    pub block_local: Option<BlockCounts>,
}

/// Runs `cfg` to its final time. For the Brusselator a second,
/// tighter-tolerance run supplies the reference for `max_error`; it is not
/// included in `wall_seconds` or the counters.
pub fn run(cfg: &Config) -> Result<RunOutcome, HarnessError> {
    let mut out = run_without_reference(cfg)?;
    if cfg.problem == Problem::Bruss1d {
        let reference = bruss_solve(&reference_config(cfg))?;
        out.report.max_error = out
            .state
            .iter()
            .zip(&reference.state)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    }
    Ok(out)
}

/// Like [`run`], but skips the Brusselator reference run and reports a zero
/// error for it.
pub fn run_without_reference(cfg: &Config) -> Result<RunOutcome, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut out = match cfg.problem {
        Problem::Heat2d => run_heat(cfg)?,
        Problem::Bruss1d => bruss_solve(cfg)?,
    };
    out.report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Pieces of a problem handed to the generic driver.
struct Parts<V: NVector> {
    full: RhsFn<V>,
    explicit: RhsFn<V>,
    implicit: RhsFn<V>,
    jv: JvFn<V>,
    jac: JacFn<V>,
    prec: Box<dyn IntegratorPreconditioner<V>>,
    nls: Option<Box<dyn NonlinearSolver<V>>>,
}

fn run_heat(cfg: &Config) -> Result<RunOutcome, HarnessError> {
    let p = Heat2D::new(cfg.nx, cfg.ny);
    let mut y0 = p.exact(0.0);
    if !cfg.fused {
        y0.set_capabilities(Capabilities::NONE);
    }
    // the forcing does not depend on u, so the full and diffusion Jacobians agree
    let parts = Parts {
        full: p.rhs(),
        explicit: p.forcing_rhs(),
        implicit: p.diffusion_rhs(),
        jv: p.jac_times(),
        jac: p.jacobian(),
        prec: Box::new(SineTransformPreconditioner::new(&p)),
        nls: None,
    };
    let (y, counters) = integrate(cfg, parts, &y0)?;
    let state = y.as_slice().to_vec();
    Ok(RunOutcome {
        config: cfg.clone(),
        report: report(&counters, p.max_error(cfg.tf, &state)),
        counters,
        state,
        reductions: None,
        block_local: None,
    })
}

/// The Brusselator reference: IMEX ARK with global Newton and GMRES at
/// tolerances tightened by [`REFERENCE_TOL_FACTOR`].
pub fn reference_config(cfg: &Config) -> Config {
    Config {
        integrator: IntegratorKind::Ark,
        method: Method::Imex,
        nls: NlsKind::Newton,
        linsol: LinsolKind::Gmres,
        jv: JvKind::Analytic,
        rtol: cfg.rtol * REFERENCE_TOL_FACTOR,
        atol: cfg.atol * REFERENCE_TOL_FACTOR,
        fused: true,
        ..cfg.clone()
    }
}

fn bruss_solve(cfg: &Config) -> Result<RunOutcome, HarnessError> {
    let p = Bruss1D::new(cfg.nx, cfg.blocks);
    let mut y0 = p.initial_state();
    if !cfg.fused {
        y0.set_capabilities(Capabilities::NONE);
    }
    let counter = y0.reduction_counter().clone();
    let split = cfg.method == Method::Imex;
    let (nls, stats): (Option<Box<dyn NonlinearSolver<_>>>, _) = if cfg.nls == NlsKind::Blocklocal {
        let s = BlockLocalNewton::new(&p);
        let stats = s.stats();
        (Some(Box::new(s)), Some(stats))
    } else {
        (None, None)
    };
    let parts = Parts {
        full: p.full_rhs(),
        explicit: p.advection_rhs(),
        implicit: p.reaction_rhs(),
        jv: p.jac_times(!split),
        jac: p.jacobian(!split),
        prec: Box::new(PointBlockPreconditioner::new(&p)),
        nls,
    };
    let (y, counters) = integrate(cfg, parts, &y0)?;
    let mut state = vec![0.0; y.len()];
    y.copy_to_slice(&mut state).map_err(IntegratorError::from)?;
    Ok(RunOutcome {
        config: cfg.clone(),
        report: report(&counters, 0.0),
        counters,
        state,
        reductions: Some(counter.get()),
        block_local: stats.map(|s| s.get()),
    })
}

fn report(c: &IntegratorCounters, max_error: f64) -> RunReport {
    RunReport {
        steps: c.steps,
        step_fails: c.step_fails,
        rhs_evals: c.rhs_evals,
        nls_iters: c.nls_iters,
        ls_iters: c.ls_iters,
        max_error,
        wall_seconds: 0.0,
    }
}

/// Builds the solvers named in `cfg` and integrates from `(0, y0)` to `tf`.
fn integrate<V: NVector + 'static>(
    cfg: &Config,
    parts: Parts<V>,
    y0: &V,
) -> Result<(V, IntegratorCounters), HarnessError> {
    let Parts {
        full,
        explicit,
        implicit,
        jv,
        jac,
        prec,
        nls,
    } = parts;
    let nls: Box<dyn NonlinearSolver<V>> = match (nls, cfg.nls) {
        (Some(n), _) => n,
        (None, NlsKind::Fixedpoint) => Box::new(FixedPoint::new(ANDERSON_DEPTH)),
        (None, _) => Box::new(Newton::new()),
    };
    let ls = nls.requires_linear_solver().then(|| {
        let analytic = cfg.jv == JvKind::Analytic;
        match cfg.linsol {
            LinsolKind::Dense => {
                let sys = LinearSystem::new(Box::new(DenseLu::new()));
                if analytic {
                    sys.with_jacobian(jac)
                } else {
                    sys
                }
            }
            LinsolKind::Gmres | LinsolKind::Cg => {
                let ls: Box<dyn LinearSolver<V>> = if cfg.linsol == LinsolKind::Gmres {
                    let mut g = Gmres::new(cfg.maxl);
                    g.set_prec_type(PrecType::Left);
                    Box::new(g)
                } else {
                    let mut c = Pcg::new();
                    c.set_max_iters(cfg.maxl);
                    Box::new(c)
                };
                let sys = LinearSystem::new(ls).with_preconditioner(prec);
                if analytic {
                    sys.with_jac_times(jv)
                } else {
                    sys
                }
            }
        }
    });
    let tol = Tolerances::scalar(cfg.rtol, cfg.atol);
    match cfg.integrator {
        IntegratorKind::Lmm => {
            let method = if cfg.method == Method::Adams {
                LmmMethod::Adams
            } else {
                LmmMethod::Bdf
            };
            let opts = LmmOptions {
                interval: Some(cfg.tf),
                ..LmmOptions::default()
            };
            let mut lmm = Lmm::new(full, 0.0, y0, tol, method, nls, ls, opts)?;
            let y = lmm.evolve(cfg.tf)?;
            Ok((y, lmm.stats()))
        }
        IntegratorKind::Ark => {
            let (rhs, tables, nls, ls) = match cfg.method {
                Method::Erk => (
                    ArkRhs {
                        explicit: Some(full),
                        implicit: None,
                    },
                    ArkTables::Explicit(ButcherTable::ark324_explicit()),
                    None,
                    None,
                ),
                Method::Dirk => (
                    ArkRhs {
                        explicit: None,
                        implicit: Some(full),
                    },
                    ArkTables::Implicit(ButcherTable::ark324_implicit()),
                    Some(nls),
                    ls,
                ),
                _ => (
                    ArkRhs {
                        explicit: Some(explicit),
                        implicit: Some(implicit),
                    },
                    ArkTables::ark324(),
                    Some(nls),
                    ls,
                ),
            };
            let opts = ArkOptions {
                interval: Some(cfg.tf),
                ..ArkOptions::default()
            };
            let mut ark = Ark::new(rhs, 0.0, y0, tol, tables, nls, ls, opts)?;
            let y = ark.evolve(cfg.tf)?;
            Ok((y, ark.stats()))
        }
    }
}

/// Writes `report` in the chosen format.
pub fn write_report(
    out: &mut dyn Write,
    cfg: &Config,
    report: &RunReport,
    format: StatsFormat,
) -> Result<(), HarnessError> {
    match format {
        StatsFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.serialize(report)?;
            w.flush()?;
        }
        StatsFormat::Json => {
            #[derive(Serialize)]
            struct Stats<'a> {
                config: &'a Config,
                report: &'a RunReport,
            }
            serde_json::to_writer_pretty(
                &mut *out,
                &Stats {
                    config: cfg,
                    report,
                },
            )?;
            writeln!(out)?;
        }
        StatsFormat::Table => {
            writeln!(out, "{cfg}")?;
            writeln!(out)?;
            for (name, value) in report_rows(report) {
                writeln!(out, "{name:<14}{value:>14}")?;
            }
        }
    }
    Ok(())
}

fn report_rows(r: &RunReport) -> [(&'static str, String); 7] {
    [
        ("Steps", r.steps.to_string()),
        ("Step fails", r.step_fails.to_string()),
        ("RHS evals", r.rhs_evals.to_string()),
        ("NLS iters", r.nls_iters.to_string()),
        ("LS iters", r.ls_iters.to_string()),
        ("Max error", format!("{:.3e}", r.max_error)),
        ("Wall time (s)", format!("{:.3}", r.wall_seconds)),
    ]
}

/// Two runs of the same problem and their final-state difference.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub a: RunOutcome,
    pub b: RunOutcome,
    /// Relative WRMS difference, `||a - b||_wrms` with weights
    /// `1 / (|b_i| + atol)` and `atol` from `b`'s configuration.
    pub wrms_diff: f64,
}

/// Runs both configurations and compares their final states.
pub fn compare(a: &Config, b: &Config) -> Result<Comparison, HarnessError> {
    if a.problem != b.problem || a.nx != b.nx || (a.problem == Problem::Heat2d && a.ny != b.ny) {
        return Err(HarnessError::Config(
            "compared runs must solve the same problem".into(),
        ));
    }
    let (ra, rb) = (run(a)?, run(b)?);
    let wrms_diff = relative_wrms(&ra.state, &rb.state, 1.0, b.atol);
    Ok(Comparison {
        a: ra,
        b: rb,
        wrms_diff,
    })
}

/// `sqrt(mean(((a_i - b_i) / (rtol |b_i| + atol))^2))`
pub fn relative_wrms(a: &[f64], b: &[f64], rtol: f64, atol: f64) -> f64 {
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| ((x - y) / (rtol * y.abs() + atol)).powi(2))
        .sum();
    (sum / a.len() as f64).sqrt()
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = |c: &Config| {
            format!(
                "{}/{}/{}",
                c.integrator.value_name(),
                c.method.value_name(),
                c.nls.value_name()
            )
        };
        writeln!(
            f,
            "{:<14}{:>22}{:>22}",
            "",
            label(&self.a.config),
            label(&self.b.config)
        )?;
        let (ra, rb) = (report_rows(&self.a.report), report_rows(&self.b.report));
        for ((name, x), (_, y)) in ra.iter().zip(&rb) {
            writeln!(f, "{name:<14}{x:>22}{y:>22}")?;
        }
        write!(
            f,
            "relative WRMS difference of final states: {:.3e}",
            self.wrms_diff
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heat(nx: usize) -> Config {
        Config {
            nx,
            ny: nx,
            ..Config::defaults(Problem::Heat2d)
        }
    }

    #[test]
    fn rejects_bad_combinations() {
        let cases = [
            Config {
                method: Method::Erk,
                ..heat(8)
            },
            Config {
                linsol: LinsolKind::Dense,
                ..heat(32)
            },
            Config {
                nls: NlsKind::Blocklocal,
                ..heat(8)
            },
            Config {
                linsol: LinsolKind::Cg,
                ..Config::defaults(Problem::Bruss1d)
            },
            Config {
                method: Method::Dirk,
                nls: NlsKind::Blocklocal,
                ..Config::defaults(Problem::Bruss1d)
            },
            Config {
                blocks: 0,
                ..Config::defaults(Problem::Bruss1d)
            },
            Config {
                rtol: 0.0,
                atol: 0.0,
                ..heat(8)
            },
        ];
        for c in cases {
            let e = run(&c).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{c:?}");
        }
    }

    #[test]
    fn csv_has_exact_columns() {
        let r = RunReport {
            steps: 1,
            step_fails: 2,
            rhs_evals: 3,
            nls_iters: 4,
            ls_iters: 5,
            max_error: 0.5,
            wall_seconds: 0.25,
        };
        let mut buf = Vec::new();
        write_report(&mut buf, &heat(8), &r, StatsFormat::Csv).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "steps,step_fails,rhs_evals,nls_iters,ls_iters,max_error,wall_seconds\n1,2,3,4,5,0.5,0.25\n"
        );
    }

    #[test]
    fn relative_wrms_uses_second_argument_for_weights() {
        let d = relative_wrms(&[1.1, 2.0], &[1.0, 2.0], 1.0, 0.0);
        assert!((d - (0.01f64 / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn small_heat_run_is_accurate() {
        let out = run(&heat(8)).unwrap();
        assert!(out.report.steps > 0);
        assert!(out.report.max_error < 5e-2, "{}", out.report.max_error);
    }
}
