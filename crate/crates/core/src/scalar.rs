//! Scalar abstraction for the analytic parts of the crate.
//!
//! Grid geometry is exact integer arithmetic and does not go through this
//! trait; only function values, coefficients and norms do.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used for coefficients and norms (`f32` or `f64`).
pub trait Scalar: Float + FromPrimitive + NumAssign + Sum + Debug + 'static {
    /// `2^k` for `k` in the supported scale range, exact in the type.
    fn exp2_int(k: i32) -> Self {
        Self::from_f64(2f64.powi(k)).unwrap()
    }

    /// `2^{s/2} = sqrt(2^s)`, the Haar normalisation factor `|I|^{-1/2}`.
    fn sqrt_pow2(s: u32) -> Self {
        Self::from_u64(1u64 << s).unwrap().sqrt()
    }

    /// `2^{-s/2} = sqrt(2^{-s})` with a single rounding; not the same last
    /// bit as `1 / sqrt_pow2(s)` in general.
    fn inv_sqrt_pow2(s: u32) -> Self {
        Self::exp2_int(-(s as i32)).sqrt()
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + NumAssign + Sum + Debug + 'static {}
