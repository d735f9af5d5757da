use super::{
    ATimes, LinSolError, LinSolveReport, LinearSolver, LinearSolverType, Operator, PrecSide,
    Preconditioner, Result,
};
use crate::matrix::Matrix;
use crate::vector::NVector;

pub const DEFAULT_MAX_ITERS: usize = 100;

/// Preconditioned conjugate gradients, without restarts.
///
/// The operator (and preconditioner, if any) must be symmetric positive
/// definite; this is not checked. Only the left scaling vector is used, as a
/// weight in the stopping test `||S1 P^-1 r||_2 < tol`.
pub struct Pcg<V: NVector> {
    op: Operator<V>,
    prec: Option<Box<dyn Preconditioner<V>>>,
    s1: Option<V>,
    max_iters: usize,
    last_iters: usize,
    last_res: f64,
    ws: Option<[V; 4]>,
}

impl<V: NVector> Pcg<V> {
    pub fn new() -> Self {
        Self::build(Operator::Free(None))
    }

    pub fn with_matrix() -> Self {
        Self::build(Operator::Matrix)
    }

    fn build(op: Operator<V>) -> Self {
        Pcg {
            op,
            prec: None,
            s1: None,
            max_iters: DEFAULT_MAX_ITERS,
            last_iters: 0,
            last_res: 0.0,
            ws: None,
        }
    }

    pub fn set_max_iters(&mut self, n: usize) {
        self.max_iters = n.max(1);
    }
}

impl<V: NVector> Default for Pcg<V> {
    fn default() -> Self {
        Self::new()
    }
}

fn precondition<V: NVector>(
    prec: &mut Option<Box<dyn Preconditioner<V>>>,
    r: &V,
    z: &mut V,
    tol: f64,
) -> Result<()> {
    match prec.as_mut() {
        Some(p) => p
            .solve(r, z, tol, PrecSide::Left)
            .map_err(LinSolError::Preconditioner),
        None => Ok(z.scale(1.0, r)?),
    }
}

fn scaled_norm<V: NVector>(z: &V, s1: Option<&V>, tmp: &mut V) -> Result<f64> {
    match s1 {
        Some(s) => {
            tmp.prod(s, z)?;
            Ok(tmp.dot(tmp)?.sqrt())
        }
        None => Ok(z.dot(z)?.sqrt()),
    }
}

impl<V: NVector> LinearSolver<V> for Pcg<V> {
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
        if self.ws.as_ref().is_none_or(|w| w[0].len() != b.len()) {
            self.ws = Some([b.clone(), b.clone(), b.clone(), b.clone()]);
        }
        let Pcg {
            op,
            prec,
            s1,
            max_iters,
            ws,
            ..
        } = self;
        let [r, z, p, ap] = ws.as_mut().expect("workspace allocated");
        let s1 = s1.as_ref();

        if x.max_norm() == 0.0 {
            r.scale(1.0, b)?;
        } else {
            op.apply(a, x, ap)?;
            r.linear_sum(1.0, b, -1.0, ap)?;
        }
        precondition(prec, r, z, tol)?;
        let mut res = scaled_norm(z, s1, ap)?;
        let mut converged = res <= tol;
        let mut iters = 0;
        if !converged {
            p.scale(1.0, z)?;
            let mut rz = r.dot(z)?;
            while iters < *max_iters {
                op.apply(a, p, ap)?;
                let pap = p.dot(ap)?;
                if pap <= 0.0 {
                    break;
                }
                let alpha = rz / pap;
                x.axpby(1.0, alpha, p)?;
                r.axpby(1.0, -alpha, ap)?;
                precondition(prec, r, z, tol)?;
                iters += 1;
                res = scaled_norm(z, s1, ap)?;
                if res <= tol {
                    converged = true;
                    break;
                }
                let rz_new = r.dot(z)?;
                let beta = rz_new / rz;
                rz = rz_new;
                p.axpby(beta, 1.0, z)?;
            }
        }
        self.last_iters = iters;
        self.last_res = res;
        Ok(LinSolveReport {
            converged,
            iterations: iters,
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

    fn set_scaling_vectors(&mut self, s1: Option<&V>, _s2: Option<&V>) -> Result<()> {
        self.s1 = s1.cloned();
        Ok(())
    }

    fn num_iters(&self) -> usize {
        self.last_iters
    }

    fn res_norm(&self) -> f64 {
        self.last_res
    }
}
