//! Root finding and fixed-point iteration through the same solver interface.

use ivpkit::error::CallbackError;
use ivpkit::nonlinsol::{standalone_root_solve, FixedPoint, Newton, NonlinearSolver};
use ivpkit::vector::SerialVector;

/// `F(u) = u - G(u)` with `G(u) = 0.5 cos(u) + 0.1 u_{i+1}`, a contraction.
fn residual(u: &SerialVector, f: &mut SerialVector) -> Result<(), CallbackError> {
    let u = u.as_slice();
    let n = u.len();
    for (i, fi) in f.as_mut_slice().iter_mut().enumerate() {
        *fi = u[i] - (0.5 * u[i].cos() + 0.1 * u[(i + 1) % n]);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u0 = SerialVector::zeros(6)?;
    let w = SerialVector::new(vec![1.0; 6])?;
    let solvers: Vec<(&str, Box<dyn NonlinearSolver<SerialVector>>)> = vec![
        ("newton", Box::new(Newton::new())),
        ("fixed point", Box::new(FixedPoint::new(0))),
        ("anderson(3)", Box::new(FixedPoint::new(3))),
    ];
    for (name, mut nls) in solvers {
        nls.set_max_iters(100);
        let u = standalone_root_solve(nls.as_mut(), residual, &u0, &w, 1e-12)?;
        println!(
            "{name:>12}: {:>3} iterations, u0 = {:.12}",
            nls.num_iters(),
            u.as_slice()[0]
        );
    }
    Ok(())
}
