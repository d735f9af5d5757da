//! A state split into blocks: the WRMS norm of a many-vector equals the flat
//! norm, and each norm costs one cross-block reduction.

use ivpkit::vector::{Capabilities, ManyVector, NVector, SerialVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x: Vec<f64> = (0..12).map(|i| (i as f64).cos()).collect();
    let w: Vec<f64> = (0..12).map(|i| 1.0 + i as f64).collect();

    let blocks = |data: &[f64],
                  local: bool|
     -> Result<ManyVector<SerialVector>, Box<dyn std::error::Error>> {
        let caps = Capabilities {
            local_reductions: local,
            ..Capabilities::ALL
        };
        let subs = [&data[..3], &data[3..8], &data[8..]]
            .into_iter()
            .map(|d| SerialVector::from_slice(d).map(|v| v.with_capabilities(caps)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ManyVector::new(subs)?)
    };

    let flat = SerialVector::from_slice(&x)?.wrms_norm(&SerialVector::from_slice(&w)?)?;
    println!("flat WRMS norm          {flat:.16}");
    for local in [true, false] {
        let (xm, wm) = (blocks(&x, local)?, blocks(&w, local)?);
        let counter = xm.reduction_counter().clone();
        counter.reset();
        let many = xm.wrms_norm(&wm)?;
        println!(
            "many-vector (local {local:>5}) {many:.16}  reductions {}",
            counter.get()
        );
    }
    Ok(())
}
