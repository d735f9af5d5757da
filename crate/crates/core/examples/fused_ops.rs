//! Fused vector kernels against the fallback sequences of basic operations.

use ivpkit::vector::{Capabilities, NVector, SerialVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 1_000_000;
    let make = |k: usize, caps| {
        let v: Vec<f64> = (0..n)
            .map(|i| ((i * (k + 3)) as f64 * 1e-3).sin())
            .collect();
        SerialVector::new(v).map(|v| v.with_capabilities(caps))
    };
    let c = [0.5, -1.0, 2.0, 0.25];
    for (label, caps) in [
        ("fused", Capabilities::ALL),
        ("fallback", Capabilities::NONE),
    ] {
        let xs = (0..4)
            .map(|k| make(k, caps))
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&SerialVector> = xs.iter().collect();
        let mut z = make(9, caps)?;

        let start = std::time::Instant::now();
        z.linear_combination(&c, &refs)?;
        let mut dots = [0.0; 4];
        z.dot_prod_multi(&refs, &mut dots)?;
        let elapsed = start.elapsed();

        println!(
            "{label:>8}: dots {dots:.6?} in {:.2} ms",
            elapsed.as_secs_f64() * 1e3
        );
    }
    Ok(())
}
