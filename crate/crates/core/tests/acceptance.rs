//! Acceptance summary: one pass/fail line per criterion.

mod common;

use common::Check;

const SEED: u64 = 20_240_601;

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 9] = [
        ("fused operations match fallbacks", || {
            common::check_fallback_equivalence(SEED)
        }),
        ("many-vector WRMS norm matches flat norm", || {
            common::check_many_vector_norm(SEED)
        }),
        ("observed orders of convergence", common::check_orders),
        ("linear solver oracles", || {
            common::check_linsol_oracles(SEED)
        }),
        (
            "tolerance for solvers without scaling",
            common::check_tolerance_adjustment,
        ),
        ("heat2d desk-scale run", common::check_heat2d),
        (
            "brusselator global vs block-local solver",
            common::check_brusselator,
        ),
        (
            "anderson acceleration beats plain iteration",
            common::check_anderson,
        ),
        ("repeated runs are bit-identical", common::check_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} {} {name} ({:.1} s): {detail}",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
