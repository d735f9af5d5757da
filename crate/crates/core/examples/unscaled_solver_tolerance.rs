//! A solver that cannot apply the left scaling `s1` is asked for
//! `tol / rms(s1)` instead, which bounds the scaled residual it would have
//! been tested against.

use ivpkit::linsol::effective_tolerance;
use ivpkit::vector::{NVector, SerialVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s1 = SerialVector::from_slice(&[3.0, 4.0])?;
    let tol = 1e-6;
    let adjusted = effective_tolerance(tol, Some(&s1))?;
    println!("rms(s1)            = {:.6}", (s1.dot(&s1)? / 2.0).sqrt());
    println!("requested tolerance = {tol:e}");
    println!("adjusted tolerance  = {adjusted:.6e}");
    println!("tol / sqrt(12.5)    = {:.6e}", tol / 12.5f64.sqrt());
    Ok(())
}
