//! Scalar abstractions shared by every module.
//!
//! [`Scalar`] is the minimal field-like bound used by the dense linear
//! algebra (determinants, generalized cross products). It is implemented for
//! the IEEE floats and for exact rationals, so determinant identities can be
//! checked without rounding. [`Real`] adds the transcendental functions the
//! guidance and simulation code needs.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed};

/// Exact or floating scalar usable in determinants and cross products.
pub trait Scalar: Copy + Num + Signed + PartialOrd + Debug + Send + Sync + 'static {
    /// `false` for NaN and infinities. Always `true` for exact types.
    fn is_finite_value(&self) -> bool;
}

impl Scalar for f32 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Ratio<i64> {
    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Scalar for Ratio<i128> {
    fn is_finite_value(&self) -> bool {
        true
    }
}

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + FloatConst + FromPrimitive + Display {
    /// Converts an `f64` literal into this type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
