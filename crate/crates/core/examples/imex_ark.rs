//! Additive Runge-Kutta on `y' = lambda (y - sin t) + cos t`: the IMEX pair
//! treats the forcing explicitly, the DIRK table treats everything implicitly.

use ivpkit::integrator::{Ark, ArkOptions, ArkRhs, ArkTables, LinearSystem, Tolerances};
use ivpkit::linsol::DenseLu;
use ivpkit::matrix::DenseMatrix;
use ivpkit::nonlinsol::Newton;
use ivpkit::vector::SerialVector;

const LAMBDA: f64 = -1e3;

fn stiff(t: f64, y: &SerialVector, f: &mut SerialVector) {
    f.as_mut_slice()[0] = LAMBDA * (y.as_slice()[0] - t.sin());
}

fn run(imex: bool) -> Result<(), Box<dyn std::error::Error>> {
    let (rhs, tables) = if imex {
        let rhs = ArkRhs {
            explicit: Some(Box::new(|t, _: &SerialVector, f: &mut SerialVector| {
                f.as_mut_slice()[0] = t.cos();
                Ok(())
            })),
            implicit: Some(Box::new(|t, y: &SerialVector, f: &mut SerialVector| {
                stiff(t, y, f);
                Ok(())
            })),
        };
        (rhs, ArkTables::ark324())
    } else {
        let rhs = ArkRhs {
            explicit: None,
            implicit: Some(Box::new(|t, y: &SerialVector, f: &mut SerialVector| {
                stiff(t, y, f);
                f.as_mut_slice()[0] += t.cos();
                Ok(())
            })),
        };
        let ArkTables::Imex { implicit, .. } = ArkTables::ark324() else {
            unreachable!()
        };
        (rhs, ArkTables::Implicit(implicit))
    };
    let jac = |_, _: &SerialVector, _: &SerialVector, j: &mut DenseMatrix| {
        j.set(0, 0, LAMBDA);
        Ok(())
    };
    let mut ark = Ark::new(
        rhs,
        0.0,
        &SerialVector::from_slice(&[0.0])?,
        Tolerances::scalar(1e-6, 1e-8),
        tables,
        Some(Box::new(Newton::new())),
        Some(LinearSystem::new(Box::new(DenseLu::new())).with_jacobian(Box::new(jac))),
        ArkOptions::default(),
    )?;
    let y = ark.evolve(5.0)?.as_slice()[0];
    let s = ark.stats();
    println!(
        "{:>4}: error at t = 5 {:.2e}, {} steps, {} failures, {} RHS evals, {} Newton iterations",
        if imex { "imex" } else { "dirk" },
        (y - 5f64.sin()).abs(),
        s.steps,
        s.step_fails,
        s.rhs_evals,
        s.nls_iters
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run(true)?;
    run(false)
}
