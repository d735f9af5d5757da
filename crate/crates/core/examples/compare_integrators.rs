//! Multistep and Runge-Kutta integrators side by side on the heat equation.

use ivpkit::harness::{compare, Config, IntegratorKind, Method, Problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lmm = Config::defaults(Problem::Heat2d);
    let ark = Config {
        integrator: IntegratorKind::Ark,
        method: Method::Dirk,
        ..lmm.clone()
    };
    println!("{}", compare(&lmm, &ark)?);
    Ok(())
}
