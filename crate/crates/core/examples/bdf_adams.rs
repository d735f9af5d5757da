//! Adaptive BDF and Adams runs on a mildly stiff oscillator.

use ivpkit::integrator::{LinearSystem, Lmm, LmmMethod, LmmOptions, RhsFn, Tolerances};
use ivpkit::linsol::DenseLu;
use ivpkit::nonlinsol::Newton;
use ivpkit::vector::SerialVector;

/// van der Pol with mu = 5.
fn van_der_pol() -> RhsFn<SerialVector> {
    Box::new(|_, y: &SerialVector, f: &mut SerialVector| {
        let (a, b) = (y.as_slice()[0], y.as_slice()[1]);
        f.as_mut_slice()
            .copy_from_slice(&[b, 5.0 * (1.0 - a * a) * b - a]);
        Ok(())
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let y0 = SerialVector::from_slice(&[2.0, 0.0])?;
    for method in [LmmMethod::Bdf, LmmMethod::Adams] {
        let mut lmm = Lmm::new(
            van_der_pol(),
            0.0,
            &y0,
            Tolerances::scalar(1e-6, 1e-9),
            method,
            Box::new(Newton::new()),
            Some(LinearSystem::new(Box::new(DenseLu::new()))),
            LmmOptions::default(),
        )?;
        let y = lmm.evolve(20.0)?;
        let s = lmm.stats();
        println!(
            "{method:?}: y(20) = ({:.6}, {:.6}), {} steps, {} failures, {} Newton iterations, last order {}",
            y.as_slice()[0],
            y.as_slice()[1],
            s.steps,
            s.step_fails,
            s.nls_iters,
            lmm.last_order()
        );
    }
    Ok(())
}
