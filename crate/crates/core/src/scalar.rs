use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive};

/// Real scalar type backing all tensor arithmetic (f32 or f64).
///
/// Operator entries are `Complex<T>`; everything downstream (residuals,
/// tolerances, sampled parameters) lives in `T`.
pub trait RealScalar:
    Float + FromPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

/// Convert an f64 constant into `T`.
pub fn real<T: RealScalar>(x: f64) -> T {
    T::from_f64(x).expect("constant must be representable in the scalar type")
}

/// Complex constant from f64 parts.
pub fn cplx<T: RealScalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(real(re), real(im))
}

/// Real f64 constant promoted to a complex scalar.
pub fn creal<T: RealScalar>(re: f64) -> Complex<T> {
    cplx(re, 0.0)
}
