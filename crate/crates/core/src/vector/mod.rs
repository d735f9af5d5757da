//! Vector abstraction.
//!
//! [`NVector`] carries a small set of required kernels plus optional fused,
//! vector-array and local-reduction kernels. Every optional kernel has a
//! default implementation in terms of the required ones (see [`fallback`]),
//! so an implementation only overrides what it can do better. Implementations
//! may additionally switch their native optional kernels on or off at runtime
//! through [`Capabilities`]; when a kernel is switched off the fallback path is
//! taken and callers see identical results.

pub mod fallback;
mod many;
mod serial;

pub use many::{ManyVector, ReductionCounter};
pub use serial::SerialVector;

use std::fmt;

use thiserror::Error;

/// Errors raised by vector kernels.
///
/// Shape errors indicate a programming mistake in the caller; division by
/// zero is a numerical condition reported instead of producing `inf`/`NaN`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VectorError {
    #[error("shape mismatch: expected length {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("partition mismatch: expected {expected} subvectors, found {found}")]
    PartitionMismatch { expected: usize, found: usize },
    #[error("division by zero at element {index}")]
    DivisionByZero { index: usize },
    #[error("vector array operation requires at least one vector")]
    EmptyArray,
    #[error("array length mismatch: {what} has {found} entries, expected {expected}")]
    ArrayLength {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("vector length must be at least 1")]
    Empty,
}

pub type Result<T> = std::result::Result<T, VectorError>;

/// Implementation tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VectorKind {
    Serial,
    Many,
    Custom,
}

/// Which optional kernels an implementation natively provides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Capabilities {
    /// `linear_combination`, `scale_add_multi`, `dot_prod_multi`.
    pub fused: bool,
    /// `linear_sum_vector_array`.
    pub vector_array: bool,
    /// `local_squared_sum`.
    pub local_reductions: bool,
}

impl Capabilities {
    pub const ALL: Capabilities = Capabilities {
        fused: true,
        vector_array: true,
        local_reductions: true,
    };
    pub const NONE: Capabilities = Capabilities {
        fused: false,
        vector_array: false,
        local_reductions: false,
    };
}

impl Default for Capabilities {
    fn default() -> Self {
        Capabilities::ALL
    }
}

/// Abstract vector.
///
/// Output-producing kernels write into `self`. Kernels that would alias an
/// input with the output in C (`z = a*z + b*y`, `z = c*z`) have explicit
/// in-place forms.
pub trait NVector: Clone + fmt::Debug + Send + 'static {
    fn kind(&self) -> VectorKind;

    /// Global length (the sum of all subvector lengths for composite vectors).
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn capabilities(&self) -> Capabilities;

    fn set_capabilities(&mut self, caps: Capabilities);

    /// Gathers the elements, in global order, into `out`.
    fn copy_to_slice(&self, out: &mut [f64]) -> Result<()>;

    /// Scatters `src`, in global order, into the vector.
    fn copy_from_slice(&mut self, src: &[f64]) -> Result<()>;

    /// `self = a*x + b*y`
    fn linear_sum(&mut self, a: f64, x: &Self, b: f64, y: &Self) -> Result<()>;

    /// `self = a*self + b*y`
    fn axpby(&mut self, a: f64, b: f64, y: &Self) -> Result<()>;

    fn const_fill(&mut self, c: f64);

    /// `self = c*x`
    fn scale(&mut self, c: f64, x: &Self) -> Result<()>;

    /// `self = c*self`
    fn scale_in_place(&mut self, c: f64);

    /// `self = x .* y`
    fn prod(&mut self, x: &Self, y: &Self) -> Result<()>;

    /// `self = x ./ y`
    fn div(&mut self, x: &Self, y: &Self) -> Result<()>;

    /// `self = |x|`
    fn abs(&mut self, x: &Self) -> Result<()>;

    /// `self = 1 ./ x`
    fn inv(&mut self, x: &Self) -> Result<()>;

    /// `self = x + c`
    fn add_const(&mut self, x: &Self, c: f64) -> Result<()>;

    fn dot(&self, y: &Self) -> Result<f64>;

    fn max_norm(&self) -> f64;

    fn min(&self) -> f64;

    /// `sqrt( (1/N) * sum (w_i x_i)^2 )`
    fn wrms_norm(&self, w: &Self) -> Result<f64>;

    /// Local contribution `sum (w_i x_i)^2` to a weighted reduction, or
    /// `None` when the kernel is not provided.
    fn local_squared_sum(&self, _w: &Self) -> Option<Result<f64>> {
        None
    }

    /// `self = sum_i c[i] * xs[i]`
    fn linear_combination(&mut self, c: &[f64], xs: &[&Self]) -> Result<()> {
        fallback::linear_combination(self, c, xs)
    }

    /// `zs[i] = a[i] * x + ys[i]`
    fn scale_add_multi(a: &[f64], x: &Self, ys: &[&Self], zs: &mut [&mut Self]) -> Result<()> {
        fallback::scale_add_multi(a, x, ys, zs)
    }

    /// `out[i] = self . ys[i]`
    fn dot_prod_multi(&self, ys: &[&Self], out: &mut [f64]) -> Result<()> {
        fallback::dot_prod_multi(self, ys, out)
    }

    /// `zs[i] = a * xs[i] + b * ys[i]`
    fn linear_sum_vector_array(
        a: f64,
        xs: &[&Self],
        b: f64,
        ys: &[&Self],
        zs: &mut [&mut Self],
    ) -> Result<()> {
        fallback::linear_sum_vector_array(a, xs, b, ys, zs)
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(VectorError::ShapeMismatch { expected, found })
    }
}

pub(crate) fn check_array(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == 0 {
        return Err(VectorError::EmptyArray);
    }
    if expected == found {
        Ok(())
    } else {
        Err(VectorError::ArrayLength {
            what,
            expected,
            found,
        })
    }
}
