//! Scalar abstractions shared by every numerical module.
//!
//! [`Real`] is the floating-point type the whole crate is generic over
//! (`f32` or `f64`). [`Scalar`] extends that to the field types the linear
//! solvers operate on: a real type or its complex counterpart.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, One, ToPrimitive, Zero};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot represent
    /// finite literals, which does not happen for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field element for linear algebra: a [`Real`] or a `Complex<Real>`.
///
/// Symmetric factorizations use plain transposes, never conjugates, so the
/// complex case covers complex-symmetric (not Hermitian) matrices.
pub trait Scalar:
    Copy
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Debug
    + Send
    + Sync
    + 'static
{
    type Real: Real;

    fn from_real(r: Self::Real) -> Self;
    fn modulus(self) -> Self::Real;
    fn conj(self) -> Self;
    fn real_part(self) -> Self::Real;
    fn scale(self, r: Self::Real) -> Self;
}

impl<T: Real> Scalar for T {
    type Real = T;

    #[inline]
    fn from_real(r: T) -> Self {
        r
    }
    #[inline]
    fn modulus(self) -> T {
        self.abs()
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn real_part(self) -> T {
        self
    }
    #[inline]
    fn scale(self, r: T) -> Self {
        self * r
    }
}

impl<T: Real> Scalar for Complex<T> {
    type Real = T;

    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn real_part(self) -> T {
        self.re
    }
    #[inline]
    fn scale(self, r: T) -> Self {
        Complex::new(self.re * r, self.im * r)
    }
}

/// `e^{z}` assembled from modulus and phase, matching the evaluation order
/// used by the time reconstruction.
#[inline]
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.re.exp();
    Complex::new(r * z.im.cos(), r * z.im.sin())
}
