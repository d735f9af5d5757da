//! Oracles and acceptance checks shared by the integration tests.
//!
//! Each `check_*` function returns `Ok(detail)` when its criterion holds and
//! `Err(detail)` otherwise, so the same code backs the acceptance summary
//! and the ordinary test assertions.
#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::{Arc, Mutex};

use ivpkit::error::CallbackError;
use ivpkit::harness::{self, Config, IntegratorKind, Method, NlsKind, Problem, RunReport};
use ivpkit::integrator::{
    Ark, ArkOptions, ArkRhs, ArkTables, ButcherTable, LinearSystem, Lmm, LmmMethod, LmmOptions,
    RhsFn, Tolerances,
};
use ivpkit::linsol::{
    ATimes, DenseLu, Gmres, LinSolError, LinSolveReport, LinearSolver, LinearSolverType, Pcg,
    PrecSide, PrecType, Preconditioner,
};
use ivpkit::matrix::{DenseMatrix, Matrix};
use ivpkit::nonlinsol::{standalone_root_solve, FixedPoint, Newton, NonlinearSolver};
use ivpkit::vector::{Capabilities, ManyVector, NVector, SerialVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub fn sv(x: &[f64]) -> SerialVector {
    SerialVector::from_slice(x).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

/// `max |a - b| / max |b|`, with the denominator floored at 1e-300.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(1e-300, f64::max);
    num / den
}

/// Least-squares slope of log(error) against log(h).
pub fn fitted_order(hs: &[f64], errs: &[f64]) -> f64 {
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------------------
// 1. fused operations against their fallbacks

/// Relative disagreement between the fused kernels and the fallback
/// sequences over `trials` random cases of each of the four operations.
pub fn fused_vs_fallback(seed: u64, trials: usize) -> [f64; 4] {
    let mut r = rng(seed);
    let mut worst = [0.0f64; 4];
    for _ in 0..trials {
        let len = r.gen_range(1..=64);
        let n = r.gen_range(1..=5);
        let fused = |v: Vec<f64>| SerialVector::new(v).unwrap();
        let plain = |v: Vec<f64>| {
            SerialVector::new(v)
                .unwrap()
                .with_capabilities(Capabilities::NONE)
        };
        let c = random_vec(&mut r, n);
        let x = random_vec(&mut r, len);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut r, len)).collect();
        let ys: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut r, len)).collect();
        let (a, b) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));

        let run = |make: &dyn Fn(Vec<f64>) -> SerialVector| {
            let xv = make(x.clone());
            let xsv: Vec<SerialVector> = xs.iter().map(|v| make(v.clone())).collect();
            let ysv: Vec<SerialVector> = ys.iter().map(|v| make(v.clone())).collect();
            let xr: Vec<&SerialVector> = xsv.iter().collect();
            let yr: Vec<&SerialVector> = ysv.iter().collect();

            let mut z = make(vec![0.0; len]);
            z.linear_combination(&c, &xr).unwrap();
            let lc = z.as_slice().to_vec();

            let mut zs: Vec<SerialVector> = (0..n).map(|_| make(vec![0.0; len])).collect();
            let mut zr: Vec<&mut SerialVector> = zs.iter_mut().collect();
            SerialVector::scale_add_multi(&c, &xv, &yr, &mut zr).unwrap();
            let sam: Vec<f64> = zs.iter().flat_map(|z| z.as_slice().to_vec()).collect();

            let mut d = vec![0.0; n];
            xv.dot_prod_multi(&yr, &mut d).unwrap();

            let mut zs: Vec<SerialVector> = (0..n).map(|_| make(vec![0.0; len])).collect();
            let mut zr: Vec<&mut SerialVector> = zs.iter_mut().collect();
            SerialVector::linear_sum_vector_array(a, &xr, b, &yr, &mut zr).unwrap();
            let lsva: Vec<f64> = zs.iter().flat_map(|z| z.as_slice().to_vec()).collect();
            [lc, sam, d, lsva]
        };
        let f = run(&fused);
        let p = run(&plain);
        for k in 0..4 {
            worst[k] = worst[k].max(rel_diff(&f[k], &p[k]));
        }
    }
    worst
}

pub fn check_fallback_equivalence(seed: u64) -> Check {
    let worst = fused_vs_fallback(seed, 100);
    let names = [
        "linear_combination",
        "scale_add_multi",
        "dot_prod_multi",
        "linear_sum_vector_array",
    ];
    let detail = names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(worst.iter().all(|&w| w <= 1e-14), detail)
}

// ---------------------------------------------------------------------------
// 2. many-vector WRMS norm against the flat norm

/// Splits `len` into random nonempty parts.
pub fn random_partition(r: &mut ChaCha8Rng, len: usize) -> Vec<usize> {
    let parts = r.gen_range(1..=len.min(6));
    let mut cuts: Vec<usize> = (1..len).collect();
    for i in (1..cuts.len()).rev() {
        cuts.swap(i, r.gen_range(0..=i));
    }
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::new();
    let mut prev = 0;
    for c in cuts.into_iter().chain([len]) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

/// Builds a many-vector over `data` with the given partition; `mask` says
/// which subvectors offer the local-reduction kernel.
pub fn split(data: &[f64], sizes: &[usize], mask: &[bool]) -> ManyVector<SerialVector> {
    let mut off = 0;
    let subs = sizes
        .iter()
        .zip(mask)
        .map(|(&s, &local)| {
            let caps = Capabilities {
                local_reductions: local,
                ..Capabilities::ALL
            };
            let v = sv(&data[off..off + s]).with_capabilities(caps);
            off += s;
            v
        })
        .collect();
    ManyVector::new(subs).unwrap()
}

/// Largest relative gap between many-vector and flat WRMS norms.
pub fn many_vector_wrms_gap(seed: u64, trials: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let len = r.gen_range(1..=64);
        let x = random_vec(&mut r, len);
        let w: Vec<f64> = (0..len).map(|_| r.gen_range(0.1..10.0)).collect();
        let sizes = random_partition(&mut r, len);
        let mask: Vec<bool> = sizes.iter().map(|_| r.gen_bool(0.5)).collect();
        let xm = split(&x, &sizes, &mask);
        let wm = split(&w, &sizes, &mask);
        let flat = sv(&x).wrms_norm(&sv(&w)).unwrap();
        let many = xm.wrms_norm(&wm).unwrap();
        worst = worst.max((many - flat).abs() / flat);
    }
    worst
}

pub fn check_many_vector_norm(seed: u64) -> Check {
    let gap = many_vector_wrms_gap(seed, 100);
    verdict(
        gap <= 1e-14,
        format!("max relative gap {gap:.1e} over 100 partitions"),
    )
}

// ---------------------------------------------------------------------------
// 3. observed orders of the integrators

/// y' = -y + sin t with y(0) = 1
pub fn forced_rhs() -> RhsFn<SerialVector> {
    Box::new(|t, y: &SerialVector, f: &mut SerialVector| {
        f.as_mut_slice()[0] = -y.as_slice()[0] + t.sin();
        Ok(())
    })
}

pub fn forced_exact(t: f64) -> f64 {
    0.5 * (t.sin() - t.cos()) + 1.5 * (-t).exp()
}

/// Dense solver with the constant Jacobian `lambda` of a scalar problem.
pub fn scalar_jacobian(lambda: f64) -> LinearSystem<SerialVector> {
    LinearSystem::new(Box::new(DenseLu::new())).with_jacobian(Box::new(
        move |_, _, _, j: &mut DenseMatrix| {
            j.set(0, 0, lambda);
            Ok(())
        },
    ))
}

/// Error at `tf` of a fixed-order, fixed-step run seeded with exact history.
pub fn lmm_fixed_step_error(method: LmmMethod, q: usize, h: f64, tf: f64) -> f64 {
    let mut lmm = Lmm::new(
        forced_rhs(),
        0.0,
        &sv(&[1.0]),
        Tolerances::scalar(1e-14, 1e-14),
        method,
        Box::new(Newton::new()),
        Some(scalar_jacobian(-1.0)),
        LmmOptions {
            fixed_order: Some(q),
            fixed_step: Some(h),
            ..Default::default()
        },
    )
    .unwrap();
    let ts: Vec<f64> = (0..q).rev().map(|i| -(i as f64) * h).collect();
    let ys: Vec<SerialVector> = ts.iter().map(|&t| sv(&[forced_exact(t)])).collect();
    lmm.seed_history(&ts, &ys).unwrap();
    let n = (tf / h).round() as usize;
    for _ in 0..n {
        lmm.step().unwrap();
    }
    assert!((lmm.t() - tf).abs() < 1e-12);
    (lmm.y().as_slice()[0] - forced_exact(lmm.t())).abs()
}

/// Fitted order over h = 0.1 and four halvings.
pub fn lmm_observed_order(method: LmmMethod, q: usize) -> f64 {
    let hs: Vec<f64> = (0..5).map(|k| 0.1 / 2f64.powi(k)).collect();
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| lmm_fixed_step_error(method, q, h, 1.0))
        .collect();
    fitted_order(&hs, &errs)
}

/// Stiffness of the scalar ARK test problem.
pub const LAMBDA: f64 = -10.0;

/// How an ARK test run splits `y' = lambda (y - sin t) + cos t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Explicit,
    Implicit,
    Imex,
}

/// Stiff part, forcing part, or both, of the ARK test problem.
pub fn pr_rhs(stiff: bool, forcing: bool) -> RhsFn<SerialVector> {
    Box::new(move |t, y: &SerialVector, f: &mut SerialVector| {
        let mut v = 0.0;
        if stiff {
            v += LAMBDA * (y.as_slice()[0] - t.sin());
        }
        if forcing {
            v += t.cos();
        }
        f.as_mut_slice()[0] = v;
        Ok(())
    })
}

/// Fixed-step ARK integrator on the scalar test problem, solution `sin t`.
pub fn pr_integrator(split: Split, tables: ArkTables, h: f64) -> Ark<SerialVector> {
    let newton = || Some(Box::new(Newton::new()) as Box<dyn NonlinearSolver<SerialVector>>);
    let (rhs, nls, ls) = match split {
        Split::Explicit => (
            ArkRhs {
                explicit: Some(pr_rhs(true, true)),
                implicit: None,
            },
            None,
            None,
        ),
        Split::Implicit => (
            ArkRhs {
                explicit: None,
                implicit: Some(pr_rhs(true, true)),
            },
            newton(),
            Some(scalar_jacobian(LAMBDA)),
        ),
        Split::Imex => (
            ArkRhs {
                explicit: Some(pr_rhs(false, true)),
                implicit: Some(pr_rhs(true, false)),
            },
            newton(),
            Some(scalar_jacobian(LAMBDA)),
        ),
    };
    Ark::new(
        rhs,
        0.0,
        &sv(&[0.0]),
        Tolerances::scalar(1e-13, 1e-13),
        tables,
        nls,
        ls,
        ArkOptions {
            fixed_step: Some(h),
            ..Default::default()
        },
    )
    .unwrap()
}

pub fn pr_error(split: Split, tables: ArkTables, h: f64, tf: f64) -> f64 {
    let mut ark = pr_integrator(split, tables, h);
    let n = (tf / h).round() as usize;
    for _ in 0..n {
        ark.step().unwrap();
    }
    (ark.y().as_slice()[0] - ark.t().sin()).abs()
}

/// Every shipped table with the split it is run under and its order.
pub fn shipped_tables() -> Vec<(&'static str, Split, ArkTables, f64)> {
    vec![
        (
            "heun-euler erk",
            Split::Explicit,
            ArkTables::Explicit(ButcherTable::heun_euler()),
            2.0,
        ),
        (
            "sdirk2",
            Split::Implicit,
            ArkTables::Implicit(ButcherTable::sdirk2()),
            2.0,
        ),
        (
            "ark324 erk",
            Split::Explicit,
            ArkTables::Explicit(ButcherTable::ark324_explicit()),
            3.0,
        ),
        (
            "ark324 esdirk",
            Split::Implicit,
            ArkTables::Implicit(ButcherTable::ark324_implicit()),
            3.0,
        ),
        ("ark324 imex", Split::Imex, ArkTables::ark324(), 3.0),
        (
            "zonneveld4 erk",
            Split::Explicit,
            ArkTables::Explicit(ButcherTable::zonneveld4()),
            4.0,
        ),
    ]
}

/// Fitted order on [0, 2] over h = 0.025 and three halvings.
pub fn ark_observed_order(split: Split, tables: &ArkTables) -> f64 {
    let hs: Vec<f64> = (0..4).map(|k| 0.025 / 2f64.powi(k)).collect();
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| pr_error(split, tables.clone(), h, 2.0))
        .collect();
    fitted_order(&hs, &errs)
}

pub fn check_orders() -> Check {
    let mut worst = (0.0f64, String::new());
    let mut note = |name: String, observed: f64, nominal: f64, slack: f64| {
        let excess = (observed - nominal).abs() - slack;
        if excess > worst.0 || worst.1.is_empty() {
            worst = (
                excess,
                format!("{name} observed {observed:.2} vs {nominal}"),
            );
        }
    };
    for q in 1..=5 {
        note(
            format!("bdf{q}"),
            lmm_observed_order(LmmMethod::Bdf, q),
            q as f64,
            0.25,
        );
    }
    for q in 1..=4 {
        note(
            format!("adams{q}"),
            lmm_observed_order(LmmMethod::Adams, q),
            q as f64,
            0.25,
        );
    }
    for (name, split, tables, p) in shipped_tables() {
        note(name.to_string(), ark_observed_order(split, &tables), p, 0.3);
    }
    verdict(worst.0 <= 0.0, format!("closest to the bound: {}", worst.1))
}

// ---------------------------------------------------------------------------
// 4. linear solver oracles

/// Random diagonally dominant nonsymmetric matrix.
pub fn random_matrix(r: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n, n).unwrap();
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, r.gen_range(-1.0..1.0));
        }
        a.set(i, i, a.get(i, i) + n as f64);
    }
    a
}

pub fn matvec(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; x.len()];
    a.matvec_slice(x, &mut z).unwrap();
    z
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest `||A x - b||_inf / (n eps ||A||_inf ||x||_inf)` over random
/// dense solves.
pub fn dense_lu_backward_error(seed: u64, trials: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = r.gen_range(1..=10);
        let a = random_matrix(&mut r, n);
        let b = sv(&random_vec(&mut r, n));
        let mut lu = DenseLu::new();
        LinearSolver::<SerialVector>::setup(&mut lu, Some(&a as &dyn Matrix<SerialVector>))
            .unwrap();
        let mut x = sv(&vec![0.0; n]);
        lu.solve(Some(&a as &dyn Matrix<SerialVector>), &mut x, &b, 0.0)
            .unwrap();
        let ax = matvec(&a, x.as_slice());
        let res: Vec<f64> = ax.iter().zip(b.as_slice()).map(|(p, q)| p - q).collect();
        let scale = n as f64 * f64::EPSILON * a.norm_inf() * inf_norm(x.as_slice());
        worst = worst.max(inf_norm(&res) / scale);
    }
    worst
}

/// Jacobi preconditioner from the diagonal of a matrix.
pub struct Jacobi(pub Vec<f64>);

impl Preconditioner<SerialVector> for Jacobi {
    fn solve(
        &mut self,
        r: &SerialVector,
        z: &mut SerialVector,
        _tol: f64,
        _side: PrecSide,
    ) -> Result<(), CallbackError> {
        for ((z, r), d) in z.as_mut_slice().iter_mut().zip(r.as_slice()).zip(&self.0) {
            *z = r / d;
        }
        Ok(())
    }
}

fn preconditioned_gmres(a: &DenseMatrix, s1: &[f64], maxl: usize) -> Gmres<SerialVector> {
    let diag: Vec<f64> = (0..a.nrows()).map(|i| a.get(i, i)).collect();
    let mut g = Gmres::with_matrix(maxl);
    g.set_max_restarts(0);
    g.set_prec_type(PrecType::Left);
    g.set_preconditioner(Box::new(Jacobi(diag))).unwrap();
    g.set_scaling_vectors(Some(&sv(s1)), None).unwrap();
    g
}

/// `||S1 P1^-1 (b - A x)||_2` with the Jacobi preconditioner of `a`.
fn scaled_residual(a: &DenseMatrix, s1: &[f64], x: &[f64], b: &[f64]) -> f64 {
    let ax = matvec(a, x);
    (0..b.len())
        .map(|i| (s1[i] * (b[i] - ax[i]) / a.get(i, i)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Random left-preconditioned, scaled GMRES solves without restarts.
///
/// Returns the largest iteration count minus `n` for tight solves with
/// `maxl = n`, and the largest relative gap between the reported residual
/// and the recomputed one for solves cut off at `maxl = 2 < n`, where the
/// residual is far above roundoff.
pub fn gmres_oracles(seed: u64, trials: usize) -> (i64, f64) {
    let mut r = rng(seed);
    let (mut excess, mut gap) = (i64::MIN, 0.0f64);
    for _ in 0..trials {
        let n = r.gen_range(1..=10);
        let a = random_matrix(&mut r, n);
        let b = random_vec(&mut r, n);
        let s1: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..2.0)).collect();
        let am = &a as &dyn Matrix<SerialVector>;

        let mut g = preconditioned_gmres(&a, &s1, n);
        g.setup(Some(am)).unwrap();
        let mut x = sv(&vec![0.0; n]);
        let rep = g.solve(Some(am), &mut x, &sv(&b), 1e-10).unwrap();
        if !rep.converged {
            return (i64::MAX, f64::INFINITY);
        }
        excess = excess.max(rep.iterations as i64 - n as i64);
    }
    for _ in 0..trials {
        let n = r.gen_range(6..=10);
        let a = random_matrix(&mut r, n);
        let b = random_vec(&mut r, n);
        let s1: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..2.0)).collect();
        let am = &a as &dyn Matrix<SerialVector>;
        let mut g = preconditioned_gmres(&a, &s1, 2);
        g.setup(Some(am)).unwrap();
        let mut x = sv(&vec![0.0; n]);
        let rep = g.solve(Some(am), &mut x, &sv(&b), 1e-14).unwrap();
        let res = scaled_residual(&a, &s1, x.as_slice(), &b);
        gap = gap.max((rep.res_norm - res).abs() / res);
    }
    (excess, gap)
}

/// Diagonal CG solves with `k` distinct eigenvalues: the largest iteration
/// count minus `k`.
pub fn cg_distinct_eigenvalue_excess(seed: u64, trials: usize) -> i64 {
    let mut r = rng(seed);
    let mut excess = i64::MIN;
    for _ in 0..trials {
        let n = r.gen_range(2..=10);
        let k = r.gen_range(1..=n.min(4));
        let eig: Vec<f64> = (0..k).map(|_| r.gen_range(1.0..10.0)).collect();
        let d: Vec<f64> = (0..n).map(|i| eig[i % k]).collect();
        let a = DenseMatrix::from_diagonal(&d).unwrap();
        let b = sv(&random_vec(&mut r, n));
        let bnorm = b.dot(&b).unwrap().sqrt();
        let mut cg = Pcg::with_matrix();
        let am = &a as &dyn Matrix<SerialVector>;
        cg.setup(Some(am)).unwrap();
        let mut x = sv(&vec![0.0; n]);
        let rep = cg.solve(Some(am), &mut x, &b, 1e-10 * bnorm).unwrap();
        if !rep.converged {
            return i64::MAX;
        }
        excess = excess.max(rep.iterations as i64 - k as i64);
    }
    excess
}

pub fn check_linsol_oracles(seed: u64) -> Check {
    let lu = dense_lu_backward_error(seed, 50);
    let (gm_excess, gap) = gmres_oracles(seed + 1, 50);
    let cg_excess = cg_distinct_eigenvalue_excess(seed + 2, 50);
    verdict(
        lu <= 10.0 && gm_excess <= 0 && cg_excess <= 0 && gap <= 1e-8,
        format!(
            "dense backward error {lu:.2} n eps |A| |x|, gmres iters - n <= {gm_excess}, \
             cg iters - distinct <= {cg_excess}, residual gap {gap:.1e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 5. tolerance handed to a solver without scaling support

/// Matrix-free mock for diagonal systems that records every requested
/// tolerance. `scaling` says whether it accepts scaling vectors.
pub struct RecordingSolver {
    pub scaling: bool,
    pub tols: Arc<Mutex<Vec<f64>>>,
    op: Option<Box<dyn ATimes<SerialVector>>>,
}

impl RecordingSolver {
    pub fn new(scaling: bool) -> Self {
        RecordingSolver {
            scaling,
            tols: Arc::default(),
            op: None,
        }
    }
}

impl LinearSolver<SerialVector> for RecordingSolver {
    fn solver_type(&self) -> LinearSolverType {
        LinearSolverType::MatrixFreeIterative
    }

    fn setup(&mut self, _a: Option<&dyn Matrix<SerialVector>>) -> Result<(), LinSolError> {
        Ok(())
    }

    fn solve(
        &mut self,
        _a: Option<&dyn Matrix<SerialVector>>,
        x: &mut SerialVector,
        b: &SerialVector,
        tol: f64,
    ) -> Result<LinSolveReport, LinSolError> {
        self.tols.lock().unwrap().push(tol);
        // the operator is diagonal, so one product with ones reveals it
        let ones = sv(&vec![1.0; b.len()]);
        let mut d = ones.clone();
        self.op
            .as_mut()
            .ok_or(LinSolError::MissingOperator)?
            .apply(&ones, &mut d)
            .map_err(LinSolError::ATimes)?;
        x.div(b, &d)?;
        Ok(LinSolveReport {
            converged: true,
            iterations: 1,
            res_norm: 0.0,
        })
    }

    fn set_atimes(&mut self, atimes: Box<dyn ATimes<SerialVector>>) -> Result<(), LinSolError> {
        self.op = Some(atimes);
        Ok(())
    }

    fn set_scaling_vectors(
        &mut self,
        _s1: Option<&SerialVector>,
        _s2: Option<&SerialVector>,
    ) -> Result<(), LinSolError> {
        if self.scaling {
            Ok(())
        } else {
            Err(LinSolError::Unsupported("set_scaling_vectors"))
        }
    }
}

/// First linear-solve tolerance requested by a BDF run on `y' = -y` whose
/// error weights are exactly `(3, 4)`.
pub fn first_requested_tolerance(scaling: bool) -> f64 {
    let ls = RecordingSolver::new(scaling);
    let tols = ls.tols.clone();
    let rhs: RhsFn<SerialVector> = Box::new(|_, y: &SerialVector, f: &mut SerialVector| {
        f.scale(-1.0, y)?;
        Ok(())
    });
    // rtol = 0 and atol = (1/3, 1/4) make the weights 1/atol = (3, 4)
    let tol = Tolerances::vector(0.0, sv(&[1.0 / 3.0, 0.25]));
    let mut lmm = Lmm::new(
        rhs,
        0.0,
        &sv(&[1.0, 1.0]),
        tol,
        LmmMethod::Bdf,
        Box::new(Newton::new()),
        Some(LinearSystem::new(Box::new(ls))),
        LmmOptions {
            initial_step: Some(1e-3),
            ..Default::default()
        },
    )
    .unwrap();
    lmm.step().unwrap();
    let first = tols.lock().unwrap()[0];
    first
}

pub fn check_tolerance_adjustment() -> Check {
    let scaled = first_requested_tolerance(true);
    let unscaled = first_requested_tolerance(false);
    let expect = scaled / 12.5f64.sqrt();
    let rel = (unscaled - expect).abs() / expect;
    verdict(
        rel <= 1e-15,
        format!("requested {unscaled:.6e}, tol/sqrt(12.5) = {expect:.6e}, relative gap {rel:.1e}"),
    )
}

// ---------------------------------------------------------------------------
// 6. heat equation at desk scale

pub fn heat_config(integrator: IntegratorKind, method: Method) -> Config {
    Config {
        integrator,
        method,
        ..Config::defaults(Problem::Heat2d)
    }
}

pub fn check_heat2d() -> Check {
    let lmm =
        harness::run(&heat_config(IntegratorKind::Lmm, Method::Bdf)).map_err(|e| e.to_string())?;
    let ark =
        harness::run(&heat_config(IntegratorKind::Ark, Method::Dirk)).map_err(|e| e.to_string())?;
    let (el, ea) = (lmm.report.max_error, ark.report.max_error);
    let (nl, na) = (lmm.report.nls_iters, ark.report.nls_iters);
    verdict(
        el <= 1e-3 && ea <= 1e-3 && nl < na,
        format!("errors lmm {el:.2e} ark {ea:.2e}, NLS iters lmm {nl} < ark {na}"),
    )
}

// ---------------------------------------------------------------------------
// 7. Brusselator with global and block-local nonlinear solvers

pub fn check_brusselator() -> Check {
    let global = Config::defaults(Problem::Bruss1d);
    let local = Config {
        nls: NlsKind::Blocklocal,
        ..global.clone()
    };
    let g = harness::run_without_reference(&global).map_err(|e| e.to_string())?;
    let l = harness::run_without_reference(&local).map_err(|e| e.to_string())?;
    let diff = harness::relative_wrms(&l.state, &g.state, 1.0, global.atol);
    let counts = l.block_local.ok_or("block-local counts missing")?;
    let single = counts.solves > 0 && counts.min_per_solve == 1 && counts.max_per_solve == 1;
    verdict(
        diff <= 1e-2 && single,
        format!(
            "relative WRMS difference {diff:.1e}; {} solves with {}..{} reductions each \
             (global path: {} reductions)",
            counts.solves,
            counts.min_per_solve,
            counts.max_per_solve,
            g.reductions.unwrap_or(0)
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. Anderson acceleration

/// `G(u) = M u + c` with symmetric `M` of spectral radius 0.9.
pub fn contraction() -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = 8;
    // eigenvalues spread evenly over [0.1, 0.9]
    let eig: Vec<f64> = (0..n)
        .map(|i| 0.9 - 0.8 * i as f64 / (n - 1) as f64)
        .collect();
    // M = Q diag(eig) Q^T with Q the orthonormal sine basis
    let q = |i: usize, k: usize| {
        (2.0 / (n as f64 + 1.0)).sqrt()
            * (std::f64::consts::PI * ((i + 1) * (k + 1)) as f64 / (n as f64 + 1.0)).sin()
    };
    let m = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| q(i, k) * eig[k] * q(j, k)).sum())
                .collect()
        })
        .collect();
    let c = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    (m, c)
}

/// Iterations a fixed-point solver with Anderson depth `depth` needs on the
/// contraction, to `tol` in the unweighted RMS norm, and the final error.
pub fn fixed_point_iterations(depth: usize, tol: f64) -> (usize, f64) {
    let (m, c) = contraction();
    let n = c.len();
    let (m2, c2) = (m.clone(), c.clone());
    // F(u) = u - G(u), so the fixed-point form iterates G
    let f = move |u: &SerialVector, out: &mut SerialVector| -> Result<(), CallbackError> {
        let u = u.as_slice();
        for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
            let gu: f64 = (0..n).map(|j| m2[i][j] * u[j]).sum::<f64>() + c2[i];
            *o = u[i] - gu;
        }
        Ok(())
    };
    let mut fp = FixedPoint::new(depth);
    fp.set_max_iters(1000);
    let u = standalone_root_solve(&mut fp, f, &sv(&vec![0.0; n]), &sv(&vec![1.0; n]), tol).unwrap();
    // exact fixed point from (I - M) u = c
    let mut a = DenseMatrix::zeros(n, n).unwrap();
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, if i == j { 1.0 } else { 0.0 } - m[i][j]);
        }
    }
    let mut lu = DenseLu::new();
    let am = &a as &dyn Matrix<SerialVector>;
    lu.setup(Some(am)).unwrap();
    let mut exact = sv(&vec![0.0; n]);
    lu.solve(Some(am), &mut exact, &sv(&c), 0.0).unwrap();
    let err = rel_diff(u.as_slice(), exact.as_slice());
    (fp.num_iters(), err)
}

pub fn check_anderson() -> Check {
    let (plain, e0) = fixed_point_iterations(0, 1e-8);
    let (anderson, e2) = fixed_point_iterations(2, 1e-8);
    verdict(
        anderson < plain && e2 < 1e-6,
        format!(
            "iterations anderson(2) {anderson} < plain {plain}; final errors {e2:.1e}, {e0:.1e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. determinism

/// CSV row of a report with the wall time blanked.
pub fn csv_row(cfg: &Config, r: &RunReport) -> String {
    let r = RunReport {
        wall_seconds: 0.0,
        ..*r
    };
    let mut buf = Vec::new();
    harness::write_report(&mut buf, cfg, &r, harness::StatsFormat::Csv).unwrap();
    String::from_utf8(buf).unwrap()
}

pub fn check_determinism() -> Check {
    let configs = [
        heat_config(IntegratorKind::Lmm, Method::Bdf),
        heat_config(IntegratorKind::Ark, Method::Dirk),
        Config {
            nx: 200,
            nls: NlsKind::Blocklocal,
            ..Config::defaults(Problem::Bruss1d)
        },
    ];
    let mut rows = Vec::new();
    for cfg in &configs {
        let a = harness::run(cfg).map_err(|e| e.to_string())?;
        let b = harness::run(cfg).map_err(|e| e.to_string())?;
        let (ra, rb) = (csv_row(cfg, &a.report), csv_row(cfg, &b.report));
        let same_state = a
            .state
            .iter()
            .zip(&b.state)
            .all(|(x, y)| x.to_bits() == y.to_bits());
        if ra != rb || !same_state {
            return Err(format!("runs differ:\n{ra}{rb}"));
        }
        rows.push(ra.lines().nth(1).unwrap_or_default().to_string());
    }
    Ok(format!(
        "{} configurations repeated bit-identically",
        rows.len()
    ))
}
