use super::{
    ATimes, LinSolError, LinSolveReport, LinearSolver, LinearSolverType, Operator, PrecSide,
    PrecType, Preconditioner, Result,
};
use crate::matrix::Matrix;
use crate::vector::NVector;

pub const DEFAULT_MAXL: usize = 5;
pub const DEFAULT_MAX_RESTARTS: usize = 19;

/// Restarted GMRES with modified Gram-Schmidt orthogonalization.
///
/// At most `maxl * (max_restarts + 1)` iterations are taken per solve.
pub struct Gmres<V: NVector> {
    op: Operator<V>,
    prec: Option<Box<dyn Preconditioner<V>>>,
    prec_type: PrecType,
    s1: Option<V>,
    s2: Option<V>,
    maxl: usize,
    max_restarts: usize,
    last_iters: usize,
    last_res: f64,
    ws: Option<Workspace<V>>,
}

struct Workspace<V> {
    basis: Vec<V>,
    tmp: V,
    tmp2: V,
    hess: Vec<Vec<f64>>,
    givens: Vec<(f64, f64)>,
    g: Vec<f64>,
}

impl<V: NVector> Gmres<V> {
    /// Matrix-free GMRES; products come from the operator given to
    /// [`LinearSolver::set_atimes`].
    pub fn new(maxl: usize) -> Self {
        Self::build(Operator::Free(None), maxl)
    }

    /// GMRES taking products from the matrix passed to `solve`.
    pub fn with_matrix(maxl: usize) -> Self {
        Self::build(Operator::Matrix, maxl)
    }

    fn build(op: Operator<V>, maxl: usize) -> Self {
        Gmres {
            op,
            prec: None,
            prec_type: PrecType::None,
            s1: None,
            s2: None,
            maxl: maxl.max(1),
            max_restarts: DEFAULT_MAX_RESTARTS,
            last_iters: 0,
            last_res: 0.0,
            ws: None,
        }
    }

    pub fn set_max_restarts(&mut self, n: usize) {
        self.max_restarts = n;
    }

    pub fn set_maxl(&mut self, maxl: usize) {
        self.maxl = maxl.max(1);
        self.ws = None;
    }

    pub fn maxl(&self) -> usize {
        self.maxl
    }

    /// Selects the preconditioning side(s). Attaching a preconditioner while
    /// the type is [`PrecType::None`] selects left preconditioning.
    pub fn set_prec_type(&mut self, t: PrecType) {
        self.prec_type = t;
    }

    fn workspace(&mut self, template: &V) -> &mut Workspace<V> {
        let stale = self
            .ws
            .as_ref()
            .is_none_or(|w| w.tmp.len() != template.len());
        if stale {
            let m = self.maxl;
            self.ws = Some(Workspace {
                basis: vec![template.clone(); m + 1],
                tmp: template.clone(),
                tmp2: template.clone(),
                hess: vec![vec![0.0; m]; m + 1],
                givens: vec![(0.0, 0.0); m],
                g: vec![0.0; m + 1],
            });
        }
        self.ws.as_mut().expect("workspace allocated above")
    }
}

/// Applies `S1 P1^-1` to `r` in place, using `tmp` as scratch.
fn left_transform<V: NVector>(
    r: &mut V,
    tmp: &mut V,
    prec: &mut Option<Box<dyn Preconditioner<V>>>,
    left: bool,
    s1: Option<&V>,
    tol: f64,
) -> Result<()> {
    if left {
        if let Some(p) = prec.as_mut() {
            p.solve(r, tmp, tol, PrecSide::Left)
                .map_err(LinSolError::Preconditioner)?;
            std::mem::swap(r, tmp);
        }
    }
    if let Some(s1) = s1 {
        tmp.prod(s1, r)?;
        std::mem::swap(r, tmp);
    }
    Ok(())
}

/// Applies `P2^-1 S2^-1` to `v` in place, using `tmp` as scratch.
fn right_transform<V: NVector>(
    v: &mut V,
    tmp: &mut V,
    prec: &mut Option<Box<dyn Preconditioner<V>>>,
    right: bool,
    s2: Option<&V>,
    tol: f64,
) -> Result<()> {
    if let Some(s2) = s2 {
        tmp.div(v, s2)?;
        std::mem::swap(v, tmp);
    }
    if right {
        if let Some(p) = prec.as_mut() {
            p.solve(v, tmp, tol, PrecSide::Right)
                .map_err(LinSolError::Preconditioner)?;
            std::mem::swap(v, tmp);
        }
    }
    Ok(())
}

impl<V: NVector> LinearSolver<V> for Gmres<V> {
    fn solver_type(&self) -> LinearSolverType {
        self.op.solver_type()
    }

    fn setup(&mut self, _a: Option<&dyn Matrix<V>>) -> Result<()> {
        if let Some(p) = self.prec.as_mut() {
            p.setup().map_err(LinSolError::Preconditioner)?;
        }
        Ok(())
    }

    fn solve(
        &mut self,
        a: Option<&dyn Matrix<V>>,
        x: &mut V,
        b: &V,
        tol: f64,
    ) -> Result<LinSolveReport> {
        self.op.check(a)?;
        let a = match self.op {
            Operator::Matrix => a,
            Operator::Free(_) => None,
        };
        let prec_type = match (self.prec.is_some(), self.prec_type) {
            (false, _) => PrecType::None,
            (true, PrecType::None) => PrecType::Left,
            (true, t) => t,
        };
        let (left, right) = (prec_type.left(), prec_type.right());
        let maxl = self.maxl;
        let max_restarts = self.max_restarts;

        self.workspace(b);
        let Gmres {
            op,
            prec,
            s1,
            s2,
            ws,
            ..
        } = self;
        let ws = ws.as_mut().expect("workspace allocated");
        let s1 = s1.as_ref();
        let s2 = s2.as_ref();

        // r0 = S1 P1^-1 (b - A x)
        let v0 = &mut ws.basis[0];
        if x.max_norm() == 0.0 {
            v0.scale(1.0, b)?;
        } else {
            op.apply(a, x, &mut ws.tmp)?;
            v0.linear_sum(1.0, b, -1.0, &ws.tmp)?;
        }
        left_transform(v0, &mut ws.tmp, prec, left, s1, tol)?;
        let mut beta = v0.dot(v0)?.sqrt();

        let mut total = 0;
        let mut converged = beta <= tol;
        let mut res = beta;
        let mut restarts = 0;
        while !converged {
            if beta == 0.0 {
                converged = true;
                break;
            }
            ws.basis[0].scale_in_place(1.0 / beta);
            ws.g.fill(0.0);
            ws.g[0] = beta;
            let mut cols = 0;
            for l in 0..maxl {
                // w = S1 P1^-1 A P2^-1 S2^-1 v_l
                ws.tmp2.scale(1.0, &ws.basis[l])?;
                right_transform(&mut ws.tmp2, &mut ws.tmp, prec, right, s2, tol)?;
                let (head, tail) = ws.basis.split_at_mut(l + 1);
                let w = &mut tail[0];
                op.apply(a, &ws.tmp2, w)?;
                left_transform(w, &mut ws.tmp, prec, left, s1, tol)?;

                for (i, vi) in head.iter().enumerate() {
                    let hij = vi.dot(w)?;
                    ws.hess[i][l] = hij;
                    w.axpby(1.0, -hij, vi)?;
                }
                let hnorm = w.dot(w)?.sqrt();
                ws.hess[l + 1][l] = hnorm;

                for i in 0..l {
                    let (c, s) = ws.givens[i];
                    let h0 = ws.hess[i][l];
                    let h1 = ws.hess[i + 1][l];
                    ws.hess[i][l] = c * h0 - s * h1;
                    ws.hess[i + 1][l] = s * h0 + c * h1;
                }
                let h0 = ws.hess[l][l];
                let h1 = ws.hess[l + 1][l];
                let r = h0.hypot(h1);
                let (c, s) = if r == 0.0 {
                    (1.0, 0.0)
                } else {
                    (h0 / r, -h1 / r)
                };
                ws.givens[l] = (c, s);
                ws.hess[l][l] = r;
                ws.hess[l + 1][l] = 0.0;
                let gl = ws.g[l];
                ws.g[l] = c * gl;
                ws.g[l + 1] = s * gl;

                total += 1;
                cols = l + 1;
                res = ws.g[l + 1].abs();
                if res <= tol {
                    converged = true;
                    break;
                }
                if hnorm == 0.0 {
                    // invariant subspace found; the least-squares residual is final
                    break;
                }
                ws.basis[l + 1].scale_in_place(1.0 / hnorm);
            }

            // y = R^-1 g, correction = P2^-1 S2^-1 V y
            let mut y = vec![0.0; cols];
            for i in (0..cols).rev() {
                let mut s = ws.g[i];
                for j in i + 1..cols {
                    s -= ws.hess[i][j] * y[j];
                }
                y[i] = if ws.hess[i][i] == 0.0 {
                    0.0
                } else {
                    s / ws.hess[i][i]
                };
            }
            let refs: Vec<&V> = ws.basis[..cols].iter().collect();
            ws.tmp2.linear_combination(&y, &refs)?;
            right_transform(&mut ws.tmp2, &mut ws.tmp, prec, right, s2, tol)?;
            x.axpby(1.0, 1.0, &ws.tmp2)?;

            if converged || restarts >= max_restarts {
                break;
            }
            restarts += 1;
            let v0 = &mut ws.basis[0];
            op.apply(a, x, &mut ws.tmp)?;
            v0.linear_sum(1.0, b, -1.0, &ws.tmp)?;
            left_transform(v0, &mut ws.tmp, prec, left, s1, tol)?;
            beta = v0.dot(v0)?.sqrt();
            res = beta;
            converged = beta <= tol;
        }

        self.last_iters = total;
        self.last_res = res;
        Ok(LinSolveReport {
            converged,
            iterations: total,
            res_norm: res,
        })
    }

    fn set_atimes(&mut self, atimes: Box<dyn ATimes<V>>) -> Result<()> {
        match &mut self.op {
            Operator::Free(slot) => {
                *slot = Some(atimes);
                Ok(())
            }
            Operator::Matrix => Err(LinSolError::Unsupported(
                "set_atimes on a matrix-based solver",
            )),
        }
    }

    fn set_preconditioner(&mut self, prec: Box<dyn Preconditioner<V>>) -> Result<()> {
        self.prec = Some(prec);
        Ok(())
    }

    fn set_scaling_vectors(&mut self, s1: Option<&V>, s2: Option<&V>) -> Result<()> {
        self.s1 = s1.cloned();
        self.s2 = s2.cloned();
        Ok(())
    }

    fn num_iters(&self) -> usize {
        self.last_iters
    }

    fn res_norm(&self) -> f64 {
        self.last_res
    }
}
