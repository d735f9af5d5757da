//! Optional kernels expressed as sequences of required kernels.
//!
//! These are the default bodies of the optional [`NVector`] methods. They are
//! public so that tests and custom implementations can call the fallback path
//! directly regardless of what an implementation provides natively.

use super::{check_array, NVector, Result};

pub fn linear_combination<V: NVector>(z: &mut V, c: &[f64], xs: &[&V]) -> Result<()> {
    check_array("coefficients", xs.len(), c.len())?;
    z.scale(c[0], xs[0])?;
    for (ci, xi) in c.iter().zip(xs).skip(1) {
        z.axpby(1.0, *ci, xi)?;
    }
    Ok(())
}

pub fn scale_add_multi<V: NVector>(a: &[f64], x: &V, ys: &[&V], zs: &mut [&mut V]) -> Result<()> {
    check_array("coefficients", ys.len(), a.len())?;
    check_array("outputs", ys.len(), zs.len())?;
    for ((ai, yi), zi) in a.iter().zip(ys).zip(zs.iter_mut()) {
        zi.linear_sum(*ai, x, 1.0, yi)?;
    }
    Ok(())
}

pub fn dot_prod_multi<V: NVector>(x: &V, ys: &[&V], out: &mut [f64]) -> Result<()> {
    check_array("outputs", ys.len(), out.len())?;
    for (yi, di) in ys.iter().zip(out.iter_mut()) {
        *di = x.dot(yi)?;
    }
    Ok(())
}

pub fn linear_sum_vector_array<V: NVector>(
    a: f64,
    xs: &[&V],
    b: f64,
    ys: &[&V],
    zs: &mut [&mut V],
) -> Result<()> {
    check_array("second operands", xs.len(), ys.len())?;
    check_array("outputs", xs.len(), zs.len())?;
    for ((xi, yi), zi) in xs.iter().zip(ys).zip(zs.iter_mut()) {
        zi.linear_sum(a, xi, b, yi)?;
    }
    Ok(())
}

/// Squared weighted sum reconstructed from the WRMS norm and the length,
/// used when a vector does not provide `local_squared_sum`.
pub fn squared_sum_from_wrms<V: NVector>(x: &V, w: &V) -> Result<f64> {
    let norm = x.wrms_norm(w)?;
    Ok(norm * norm * x.len() as f64)
}
