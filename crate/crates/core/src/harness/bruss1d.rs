//! Stiff one-dimensional advection-reaction Brusselator with periodic
//! boundaries, stored as a many-vector with one subvector per block.
//!
//! ```text
//! u_t = -c u_x + A - (w + 1) u + v u^2
//! v_t = -c v_x + w u - v u^2
//! w_t = -c w_x + (B - w) / eps - w u
//! ```
//!
//! Advection uses first-order upwind differences. The three species of a
//! grid point are stored next to each other, so the reactions couple only
//! entries within one point and one block.

use std::any::Any;
use std::sync::{Arc, Mutex};

use crate::error::CallbackError;
use crate::integrator::{IntegratorPreconditioner, JacFn, JvFn, NonlinearSystem, RhsFn};
use crate::linsol::PrecSide;
use crate::matrix::DenseMatrix;
use crate::nonlinsol::{
    ConvTestFn, NlsError, NonlinearSolver, NonlinearSolverType, Result as NlsResult, SysFn,
};
use crate::vector::{ManyVector, NVector, SerialVector};

pub type BlockVector = ManyVector<SerialVector>;

#[derive(Debug, Clone, PartialEq)]
pub struct Bruss1D {
    /// Grid points.
    pub nx: usize,
    /// Domain length.
    pub length: f64,
    /// Advection speed.
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    /// First grid point of each block, followed by `nx`.
    offsets: Vec<usize>,
}

impl Bruss1D {
    /// `nx` points split into `blocks` nearly equal blocks, with mesh width
    /// `1e-3` as in the weak-scaling setup.
    pub fn new(nx: usize, blocks: usize) -> Self {
        assert!(
            blocks >= 1 && nx >= blocks,
            "need at least one point per block"
        );
        let offsets = (0..=blocks).map(|b| b * nx / blocks).collect();
        Bruss1D {
            nx,
            length: nx as f64 * 1e-3,
            c: 0.01,
            a: 1.0,
            b: 3.5,
            eps: 5e-6,
            offsets,
        }
    }

    pub fn blocks(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    /// Grid points owned by block `k`.
    pub fn block_range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn initial_state(&self) -> BlockVector {
        let subs = (0..self.blocks())
            .map(|k| {
                let mut d = Vec::with_capacity(3 * self.block_range(k).len());
                for g in self.block_range(k) {
                    let x = g as f64 * self.dx();
                    let p = 0.1 * (-2.0 * (2.0 * x / self.length - 1.0).powi(2)).exp();
                    d.extend([self.a + p, self.b / self.a + p, 3.0 + p]);
                }
                SerialVector::new(d).expect("nonempty block")
            })
            .collect();
        ManyVector::new(subs).expect("at least one block")
    }

    /// Reaction terms at one point.
    pub fn reaction(&self, z: [f64; 3]) -> [f64; 3] {
        let [u, v, w] = z;
        [
            self.a - (w + 1.0) * u + v * u * u,
            w * u - v * u * u,
            (self.b - w) / self.eps - w * u,
        ]
    }

    /// Jacobian of the reaction terms at one point, row-major.
    pub fn reaction_jacobian(&self, z: [f64; 3]) -> [[f64; 3]; 3] {
        let [u, v, w] = z;
        [
            [-(w + 1.0) + 2.0 * u * v, u * u, -u],
            [w - 2.0 * u * v, -u * u, u],
            [-w, 0.0, -1.0 / self.eps - u],
        ]
    }

    /// Upwind advection, `f = -c (y_g - y_{g-1}) / dx` with periodic wrap.
    pub fn eval_advection(&self, y: &BlockVector, f: &mut BlockVector) {
        let coef = -self.c / self.dx();
        let nb = self.blocks();
        for k in 0..nb {
            let prev = y.subvectors()[(k + nb - 1) % nb].as_slice();
            let left: [f64; 3] = prev[prev.len() - 3..].try_into().expect("three species");
            let yk = y.subvectors()[k].as_slice();
            let fk = f.subvectors_mut()[k].as_mut_slice();
            for p in 0..yk.len() / 3 {
                for s in 0..3 {
                    let up = if p == 0 { left[s] } else { yk[3 * (p - 1) + s] };
                    fk[3 * p + s] = coef * (yk[3 * p + s] - up);
                }
            }
        }
    }

    pub fn eval_reaction(&self, y: &BlockVector, f: &mut BlockVector) {
        for (yk, fk) in y.subvectors().iter().zip(f.subvectors_mut()) {
            let (yk, fk) = (yk.as_slice(), fk.as_mut_slice());
            for p in 0..yk.len() / 3 {
                let r = self.reaction([yk[3 * p], yk[3 * p + 1], yk[3 * p + 2]]);
                fk[3 * p..3 * p + 3].copy_from_slice(&r);
            }
        }
    }

    pub fn advection_rhs(&self) -> RhsFn<BlockVector> {
        let p = self.clone();
        Box::new(move |_, y: &BlockVector, f: &mut BlockVector| {
            p.eval_advection(y, f);
            Ok(())
        })
    }

    pub fn reaction_rhs(&self) -> RhsFn<BlockVector> {
        let p = self.clone();
        Box::new(move |_, y: &BlockVector, f: &mut BlockVector| {
            p.eval_reaction(y, f);
            Ok(())
        })
    }

    pub fn full_rhs(&self) -> RhsFn<BlockVector> {
        let p = self.clone();
        let mut work: Option<BlockVector> = None;
        Box::new(move |_, y: &BlockVector, f: &mut BlockVector| {
            let r = work.get_or_insert_with(|| y.clone());
            p.eval_advection(y, f);
            p.eval_reaction(y, r);
            f.axpby(1.0, 1.0, r)?;
            Ok(())
        })
    }

    /// Exact Jacobian-vector product of the reactions, plus advection when
    /// `advection` is set.
    pub fn jac_times(&self, advection: bool) -> JvFn<BlockVector> {
        let p = self.clone();
        let mut work: Option<BlockVector> = None;
        Box::new(
            move |v: &BlockVector, jv: &mut BlockVector, _, y: &BlockVector, _| {
                for ((vk, yk), jk) in v
                    .subvectors()
                    .iter()
                    .zip(y.subvectors())
                    .zip(jv.subvectors_mut())
                {
                    let (vk, yk, jk) = (vk.as_slice(), yk.as_slice(), jk.as_mut_slice());
                    for q in 0..yk.len() / 3 {
                        let j = p.reaction_jacobian([yk[3 * q], yk[3 * q + 1], yk[3 * q + 2]]);
                        for r in 0..3 {
                            jk[3 * q + r] = (0..3).map(|c| j[r][c] * vk[3 * q + c]).sum();
                        }
                    }
                }
                if advection {
                    // advection is linear, so its Jacobian-vector product is the
                    // advection of v
                    let w = work.get_or_insert_with(|| v.clone());
                    p.eval_advection(v, w);
                    jv.axpby(1.0, 1.0, w)?;
                }
                Ok(())
            },
        )
    }

    /// Dense Jacobian, for small grids only.
    pub fn jacobian(&self, advection: bool) -> JacFn<BlockVector> {
        let p = self.clone();
        Box::new(move |_, y: &BlockVector, _, jm: &mut DenseMatrix| {
            let n = 3 * p.nx;
            let mut yf = vec![0.0; n];
            y.copy_to_slice(&mut yf)?;
            for g in 0..p.nx {
                let j = p.reaction_jacobian([yf[3 * g], yf[3 * g + 1], yf[3 * g + 2]]);
                for r in 0..3 {
                    for c in 0..3 {
                        jm.set(3 * g + r, 3 * g + c, j[r][c]);
                    }
                }
            }
            if advection {
                let coef = -p.c / p.dx();
                for g in 0..p.nx {
                    let up = (g + p.nx - 1) % p.nx;
                    for s in 0..3 {
                        let d = jm.get(3 * g + s, 3 * g + s);
                        jm.set(3 * g + s, 3 * g + s, d + coef);
                        let o = jm.get(3 * g + s, 3 * up + s);
                        jm.set(3 * g + s, 3 * up + s, o - coef);
                    }
                }
            }
            Ok(())
        })
    }
}

/// Solves the 3x3 system `m x = b` in place by Gaussian elimination with
/// partial pivoting. Returns `false` for a singular matrix.
fn solve3(mut m: [[f64; 3]; 3], b: &mut [f64; 3]) -> bool {
    for k in 0..3 {
        let p = (k..3)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .expect("nonempty range");
        if m[p][k] == 0.0 {
            return false;
        }
        m.swap(k, p);
        b.swap(k, p);
        for i in k + 1..3 {
            let l = m[i][k] / m[k][k];
            for j in k..3 {
                m[i][j] -= l * m[k][j];
            }
            b[i] -= l * b[k];
        }
    }
    for k in (0..3).rev() {
        let s: f64 = (k + 1..3).map(|j| m[k][j] * b[j]).sum();
        b[k] = (b[k] - s) / m[k][k];
    }
    true
}

/// `I - gamma J` for a 3x3 Jacobian.
fn newton_matrix(j: [[f64; 3]; 3], gamma: f64) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            m[r][c] = if r == c { 1.0 } else { 0.0 } - gamma * j[r][c];
        }
    }
    m
}

/// Point-block Jacobi preconditioner: solves `(I - gamma dR/dy) z = r`
/// independently at every grid point, ignoring advection.
pub struct PointBlockPreconditioner {
    problem: Bruss1D,
    jac: Vec<[[f64; 3]; 3]>,
}

impl PointBlockPreconditioner {
    pub fn new(problem: &Bruss1D) -> Self {
        PointBlockPreconditioner {
            problem: problem.clone(),
            jac: Vec::new(),
        }
    }
}

impl IntegratorPreconditioner<BlockVector> for PointBlockPreconditioner {
    fn setup(
        &mut self,
        _t: f64,
        y: &BlockVector,
        _fy: &BlockVector,
        jok: bool,
        _gamma: f64,
    ) -> Result<bool, CallbackError> {
        if jok && !self.jac.is_empty() {
            return Ok(false);
        }
        self.jac.clear();
        for yk in y.subvectors() {
            let yk = yk.as_slice();
            for q in 0..yk.len() / 3 {
                self.jac.push(self.problem.reaction_jacobian([
                    yk[3 * q],
                    yk[3 * q + 1],
                    yk[3 * q + 2],
                ]));
            }
        }
        Ok(true)
    }

    fn solve(
        &mut self,
        _t: f64,
        _y: &BlockVector,
        _fy: &BlockVector,
        r: &BlockVector,
        z: &mut BlockVector,
        gamma: f64,
        _delta: f64,
        _side: PrecSide,
    ) -> Result<(), CallbackError> {
        let mut g = 0;
        for (rk, zk) in r.subvectors().iter().zip(z.subvectors_mut()) {
            let (rk, zk) = (rk.as_slice(), zk.as_mut_slice());
            for q in 0..rk.len() / 3 {
                let mut b = [rk[3 * q], rk[3 * q + 1], rk[3 * q + 2]];
                if !solve3(newton_matrix(self.jac[g], gamma), &mut b) {
                    return Err(CallbackError::Recoverable("singular point block".into()));
                }
                zk[3 * q..3 * q + 3].copy_from_slice(&b);
                g += 1;
            }
        }
        Ok(())
    }
}

/// Newton solver for the reaction stage equations that works on each block
/// independently.
///
/// Every grid point is solved with its own exact 3x3 Newton matrix, and each
/// block runs its own convergence test on block-local sums. The blocks
/// exchange nothing until the end of the solve, where a single cross-block
/// reduction combines their success flags. That reduction is recorded in the
/// state vector's [`ReductionCounter`](crate::vector::ReductionCounter).
///
/// The solver reads `gamma`, `t` and the known data from the
/// [`NonlinearSystem`] passed as `mem`; the system function and convergence
/// test offered by the integrator are accepted but not used, since both would
/// need global reductions.
pub struct BlockLocalNewton {
    problem: Bruss1D,
    max_iters: usize,
    crdown: f64,
    rdiv: f64,
    iters: usize,
    conv_fails: usize,
    stats: BlockLocalStats,
}

/// Solve and reduction counts of a [`BlockLocalNewton`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BlockCounts {
    pub solves: usize,
    /// Cross-block reductions over all solves.
    pub reductions: usize,
    /// Fewest reductions in a single solve.
    pub min_per_solve: usize,
    /// Most reductions in a single solve.
    pub max_per_solve: usize,
}

/// Shared view of a [`BlockLocalNewton`]'s counts.
#[derive(Debug, Clone, Default)]
pub struct BlockLocalStats(Arc<Mutex<BlockCounts>>);

impl BlockLocalStats {
    pub fn get(&self) -> BlockCounts {
        *self.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn record(&self, reductions: usize) {
        let mut c = self.0.lock().unwrap_or_else(|e| e.into_inner());
        c.min_per_solve = if c.solves == 0 {
            reductions
        } else {
            c.min_per_solve.min(reductions)
        };
        c.max_per_solve = c.max_per_solve.max(reductions);
        c.solves += 1;
        c.reductions += reductions;
    }
}

/// Default iteration limit per block.
const BLOCK_MAX_ITERS: usize = 4;

impl BlockLocalNewton {
    pub fn new(problem: &Bruss1D) -> Self {
        BlockLocalNewton {
            problem: problem.clone(),
            max_iters: BLOCK_MAX_ITERS,
            crdown: 0.3,
            rdiv: 2.0,
            iters: 0,
            conv_fails: 0,
            stats: BlockLocalStats::default(),
        }
    }

    /// Handle to the solve and reduction counts; stays valid after the
    /// solver is moved into an integrator.
    pub fn stats(&self) -> BlockLocalStats {
        self.stats.clone()
    }

    /// Newton iterations on one block. Returns the iterations taken and
    /// whether the block converged.
    fn solve_block(
        &mut self,
        zpred: &[f64],
        a: &[f64],
        w: &[f64],
        ycor: &mut [f64],
        gamma: f64,
        tol: f64,
    ) -> (usize, bool) {
        let n = zpred.len();
        let mut delp = 0.0;
        let mut rate = 1.0;
        for m in 0..self.max_iters {
            let mut sum = 0.0;
            for q in 0..n / 3 {
                let z = [
                    zpred[3 * q] + ycor[3 * q],
                    zpred[3 * q + 1] + ycor[3 * q + 1],
                    zpred[3 * q + 2] + ycor[3 * q + 2],
                ];
                let r = self.problem.reaction(z);
                let mut d = [0.0; 3];
                for s in 0..3 {
                    d[s] = -(z[s] - gamma * r[s] - a[3 * q + s]);
                }
                let jm = newton_matrix(self.problem.reaction_jacobian(z), gamma);
                if !solve3(jm, &mut d) {
                    return (m + 1, false);
                }
                for s in 0..3 {
                    ycor[3 * q + s] += d[s];
                    sum += (d[s] * w[3 * q + s]).powi(2);
                }
            }
            let del = (sum / n as f64).sqrt();
            if m > 0 {
                rate = (self.crdown * rate).max(del / delp);
            }
            if del * rate.min(1.0) / tol <= 1.0 {
                return (m + 1, true);
            }
            if m > 0 && del > self.rdiv * delp {
                return (m + 1, false);
            }
            delp = del;
        }
        (self.max_iters, false)
    }
}

impl NonlinearSolver<BlockVector> for BlockLocalNewton {
    fn solver_type(&self) -> NonlinearSolverType {
        NonlinearSolverType::RootFind
    }

    fn set_sys_fn(&mut self, _f: SysFn<BlockVector>) {}

    fn set_conv_test_fn(&mut self, _f: ConvTestFn<BlockVector>) {}

    fn set_max_iters(&mut self, n: usize) {
        self.max_iters = n.max(1);
    }

    fn requires_linear_solver(&self) -> bool {
        false
    }

    fn solve(
        &mut self,
        y0: &BlockVector,
        ycor: &mut BlockVector,
        w: &BlockVector,
        tol: f64,
        _call_lsetup: bool,
        mem: &mut dyn Any,
    ) -> NlsResult<usize> {
        let sys = mem
            .downcast_mut::<NonlinearSystem<BlockVector>>()
            .ok_or(NlsError::Config(
                "block-local Newton needs the integrator's stage system",
            ))?;
        let gamma = sys.gamma();
        let counter = ycor.reduction_counter().clone();
        let before = counter.get();
        let mut iters = 0;
        let mut ok = true;
        for k in 0..self.problem.blocks() {
            let (z, ak, wk) = (
                y0.subvectors()[k].as_slice(),
                sys.known_data().subvectors()[k].as_slice(),
                w.subvectors()[k].as_slice(),
            );
            let c = ycor.subvectors_mut()[k].as_mut_slice();
            let (m, conv) = self.solve_block(z, ak, wk, c, gamma, tol);
            iters = iters.max(m);
            ok &= conv;
        }
        // the one global communication: combine the block success flags
        counter.add(1);
        self.stats.record(counter.get() - before);
        self.iters += iters;
        // each iteration evaluates the reactions once over the whole grid
        sys.counters.rhs_evals += iters;
        if ok {
            Ok(iters)
        } else {
            self.conv_fails += 1;
            Err(NlsError::MaxIterations(iters))
        }
    }

    fn num_iters(&self) -> usize {
        self.iters
    }

    fn num_conv_fails(&self) -> usize {
        self.conv_fails
    }
}
