//! Real scalar abstraction shared by the matrix kernels and tracial algebras.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the kernels are generic over: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or parameter into this scalar.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon scaled tolerance used as the floor for convergence tests.
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `t log t` with the convention `0 log 0 = 0`.
pub fn xlogx<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else {
        t * t.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xlogx_zero_convention() {
        assert_eq!(xlogx(0.0_f64), 0.0);
        assert_eq!(xlogx(-0.0_f32), 0.0);
        assert!((xlogx(0.5_f64) - 0.5 * 0.5_f64.ln()).abs() < 1e-16);
    }
}
