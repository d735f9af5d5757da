//! The heat equation on the unit square with a manufactured solution,
//! integrated by BDF with matrix-free GMRES.

use ivpkit::harness::{run, write_report, Config, Problem, StatsFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nx: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(64);
    let cfg = Config {
        nx,
        ny: nx,
        ..Config::defaults(Problem::Heat2d)
    };
    let out = run(&cfg)?;
    write_report(
        &mut std::io::stdout(),
        &cfg,
        &out.report,
        StatsFormat::Table,
    )?;
    Ok(())
}
