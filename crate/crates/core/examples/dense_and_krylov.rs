//! One system, three solvers: dense LU, GMRES with a Jacobi preconditioner,
//! and matrix-free CG.

use ivpkit::error::CallbackError;
use ivpkit::linsol::{DenseLu, Gmres, LinearSolver, Pcg, PrecSide, PrecType, Preconditioner};
use ivpkit::matrix::{DenseMatrix, Matrix};
use ivpkit::vector::{NVector, SerialVector};

const N: usize = 20;

/// Tridiagonal `[-1, 2 + i/N, -1]`.
fn entry(i: usize, j: usize) -> f64 {
    match i.abs_diff(j) {
        0 => 2.0 + i as f64 / N as f64,
        1 => -1.0,
        _ => 0.0,
    }
}

struct Jacobi;

impl Preconditioner<SerialVector> for Jacobi {
    fn solve(
        &mut self,
        r: &SerialVector,
        z: &mut SerialVector,
        _: f64,
        _: PrecSide,
    ) -> Result<(), CallbackError> {
        for (i, (z, r)) in z.as_mut_slice().iter_mut().zip(r.as_slice()).enumerate() {
            *z = r / entry(i, i);
        }
        Ok(())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut a = DenseMatrix::zeros(N, N)?;
    for i in 0..N {
        for j in 0..N {
            a.set(i, j, entry(i, j));
        }
    }
    let am = &a as &dyn Matrix<SerialVector>;
    let b = SerialVector::new(vec![1.0; N])?;

    let mut lu = DenseLu::new();
    lu.setup(Some(am))?;
    let mut x_lu = SerialVector::zeros(N)?;
    lu.solve(Some(am), &mut x_lu, &b, 0.0)?;

    let mut gmres = Gmres::with_matrix(N);
    gmres.set_preconditioner(Box::new(Jacobi))?;
    gmres.set_prec_type(PrecType::Left);
    gmres.setup(Some(am))?;
    let mut x_gm = SerialVector::zeros(N)?;
    let rep = gmres.solve(Some(am), &mut x_gm, &b, 1e-10)?;
    println!(
        "gmres: {} iterations, residual {:.2e}",
        rep.iterations, rep.res_norm
    );

    let mut cg = Pcg::new();
    cg.set_atimes(Box::new(|v: &SerialVector, z: &mut SerialVector| {
        let v = v.as_slice();
        for (i, zi) in z.as_mut_slice().iter_mut().enumerate() {
            *zi = (0..N).map(|j| entry(i, j) * v[j]).sum();
        }
        Ok(())
    }))?;
    cg.setup(None)?;
    let mut x_cg = SerialVector::zeros(N)?;
    let rep = cg.solve(None, &mut x_cg, &b, 1e-10)?;
    println!(
        "cg:    {} iterations, residual {:.2e}",
        rep.iterations, rep.res_norm
    );

    let mut d = x_gm.clone();
    d.linear_sum(1.0, &x_gm, -1.0, &x_lu)?;
    println!("|x_gmres - x_lu| = {:.2e}", d.max_norm());
    d.linear_sum(1.0, &x_cg, -1.0, &x_lu)?;
    println!("|x_cg - x_lu|    = {:.2e}", d.max_norm());
    Ok(())
}
