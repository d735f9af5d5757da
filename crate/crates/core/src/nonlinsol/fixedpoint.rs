use std::any::Any;
use std::collections::VecDeque;

use super::{
    ConvStatus, ConvTestFn, NlsError, NonlinearSolver, NonlinearSolverType, Result, SysFn,
};
use crate::vector::NVector;

pub const DEFAULT_DEPTH: usize = 2;
pub const DEFAULT_MAX_ITERS: usize = 10;

/// Fixed-point iteration `ycor <- G(ycor)` with optional Anderson
/// acceleration of depth `m`.
///
/// The first iterate is a plain step. Afterwards, with residuals
/// `f_k = G(x_k) - x_k`, the accelerated iterate is
/// `x_{k+1} = G(x_k) - dG * gamma` where `gamma` minimizes
/// `||f_k - dF * gamma||_2` over the last `m` residual differences `dF` (and
/// the matching differences `dG` of `G` values). The least-squares problem is
/// solved by modified Gram-Schmidt QR; a numerically dependent column clears
/// the history. `m = 0` gives plain iteration.
///
/// The built-in test converges when `||x_{k+1} - x_k||_wrms < tol`. Iterations
/// equal system evaluations.
pub struct FixedPoint<V: NVector> {
    sys: Option<SysFn<V>>,
    ctest: Option<ConvTestFn<V>>,
    depth: usize,
    max_iters: usize,
    iters: usize,
    conv_fails: usize,
    restarts: usize,
}

impl<V: NVector> FixedPoint<V> {
    pub fn new(depth: usize) -> Self {
        FixedPoint {
            sys: None,
            ctest: None,
            depth,
            max_iters: DEFAULT_MAX_ITERS,
            iters: 0,
            conv_fails: 0,
            restarts: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// History resets caused by rank deficiency, since construction.
    pub fn num_restarts(&self) -> usize {
        self.restarts
    }
}

/// Relative size below which a new QR column is treated as dependent.
const RANK_TOL: f64 = 1e-12;

/// Solves `min ||f - dF gamma||_2` by MGS on the columns of `dF`. Returns
/// `None` if the columns are numerically dependent.
fn least_squares<V: NVector>(df: &VecDeque<V>, f: &V, q: &mut Vec<V>) -> Result<Option<Vec<f64>>> {
    let k = df.len();
    let mut r = vec![vec![0.0; k]; k];
    q.clear();
    for (j, col) in df.iter().enumerate() {
        let mut v = col.clone();
        let orig = v.dot(&v)?.sqrt();
        for (i, qi) in q.iter().enumerate() {
            let rij = qi.dot(&v)?;
            r[i][j] = rij;
            v.axpby(1.0, -rij, qi)?;
        }
        let nrm = v.dot(&v)?.sqrt();
        if orig == 0.0 || nrm <= RANK_TOL * orig {
            return Ok(None);
        }
        r[j][j] = nrm;
        v.scale_in_place(1.0 / nrm);
        q.push(v);
    }
    let mut rhs = vec![0.0; k];
    let refs: Vec<&V> = q.iter().collect();
    f.dot_prod_multi(&refs, &mut rhs)?;
    let mut gamma = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = rhs[i];
        for j in i + 1..k {
            s -= r[i][j] * gamma[j];
        }
        gamma[i] = s / r[i][i];
    }
    Ok(Some(gamma))
}

impl<V: NVector> NonlinearSolver<V> for FixedPoint<V> {
    fn solver_type(&self) -> NonlinearSolverType {
        NonlinearSolverType::FixedPoint
    }

    fn set_sys_fn(&mut self, f: SysFn<V>) {
        self.sys = Some(f);
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
        _call_lsetup: bool,
        mem: &mut dyn Any,
    ) -> Result<usize> {
        let sys = self
            .sys
            .as_mut()
            .ok_or(NlsError::Config("system function not set"))?;
        let mut g = ycor.clone();
        let mut f = ycor.clone();
        let mut delta = ycor.clone();
        let mut f_prev = ycor.clone();
        let mut g_prev = ycor.clone();
        let mut df: VecDeque<V> = VecDeque::with_capacity(self.depth);
        let mut dg: VecDeque<V> = VecDeque::with_capacity(self.depth);
        let mut q = Vec::with_capacity(self.depth);
        let mut iters = 0;

        for k in 0..self.max_iters {
            if let Err(e) = sys(ycor, &mut g, mem) {
                let e = NlsError::SysFn(e);
                if e.is_recoverable() {
                    self.conv_fails += 1;
                }
                return Err(e);
            }
            f.linear_sum(1.0, &g, -1.0, ycor)?;

            // next iterate goes into delta for now
            delta.scale(1.0, &g)?;
            if self.depth > 0 && k > 0 {
                if df.len() == self.depth {
                    df.pop_front();
                    dg.pop_front();
                }
                let mut d = f.clone();
                d.axpby(1.0, -1.0, &f_prev)?;
                df.push_back(d);
                let mut d = g.clone();
                d.axpby(1.0, -1.0, &g_prev)?;
                dg.push_back(d);
                match least_squares(&df, &f, &mut q)? {
                    Some(gamma) => {
                        for (gi, dgi) in gamma.iter().zip(&dg) {
                            delta.axpby(1.0, -gi, dgi)?;
                        }
                    }
                    None => {
                        df.clear();
                        dg.clear();
                        self.restarts += 1;
                    }
                }
            }
            if self.depth > 0 {
                f_prev.scale(1.0, &f)?;
                g_prev.scale(1.0, &g)?;
            }
            // delta = x_{k+1} - x_k, then ycor = x_{k+1}
            delta.axpby(1.0, -1.0, ycor)?;
            ycor.axpby(1.0, 1.0, &delta)?;
            iters += 1;
            self.iters += 1;

            let status = match self.ctest.as_mut() {
                Some(test) => test(k, ycor, &delta, tol, w, mem).map_err(NlsError::ConvTest)?,
                None => {
                    if delta.wrms_norm(w)? < tol {
                        ConvStatus::Converged
                    } else {
                        ConvStatus::Continue
                    }
                }
            };
            match status {
                ConvStatus::Converged => return Ok(iters),
                ConvStatus::Diverged => {
                    self.conv_fails += 1;
                    return Err(NlsError::Diverged);
                }
                ConvStatus::Continue => {}
            }
        }
        self.conv_fails += 1;
        Err(NlsError::MaxIterations(self.max_iters))
    }

    fn num_iters(&self) -> usize {
        self.iters
    }

    fn num_conv_fails(&self) -> usize {
        self.conv_fails
    }
}
