//! The stiff Brusselator on a block-partitioned state, solved once with a
//! global Newton-GMRES iteration and once with the block-local Newton solver
//! that communicates once per solve.

use ivpkit::harness::{compare, Config, NlsKind, Problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let global = Config::defaults(Problem::Bruss1d);
    let local = Config {
        nls: NlsKind::Blocklocal,
        ..global.clone()
    };
    let c = compare(&global, &local)?;
    println!("{c}");
    println!();
    if let (Some(g), Some(counts)) = (c.a.reductions, c.b.block_local) {
        println!("global path: {g} cross-block reductions");
        println!(
            "block-local: {} reductions over {} solves ({} per solve)",
            counts.reductions, counts.solves, counts.max_per_solve
        );
    }
    Ok(())
}
