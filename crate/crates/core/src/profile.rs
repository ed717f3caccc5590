//! Spatial data profiles: initial values and the spatial factors of source terms.
//!
//! A profile is a function on the unit interval or unit square. Profiles
//! with jumps report the coordinate lines they jump across so that load
//! integrals can split elements there and stay exact.

use std::fmt;
use std::sync::Arc;

use crate::scalar::Real;

/// A real function on `(0,1)` or `(0,1)²`.
pub trait SpatialFunction<T: Real>: Send + Sync {
    fn value(&self, x: &[T]) -> T;

    /// Vertical lines `x = c` across which the function may jump.
    fn breaks_x(&self) -> Vec<T> {
        Vec::new()
    }

    /// Horizontal lines `y = c` across which the function may jump (2-D only).
    fn breaks_y(&self) -> Vec<T> {
        Vec::new()
    }

    /// Short label for logs and cache keys.
    fn label(&self) -> String;
}

pub type Profile<T> = Arc<dyn SpatialFunction<T>>;

impl<T: Real> fmt::Debug for dyn SpatialFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Constant<T>(pub T);

impl<T: Real> SpatialFunction<T> for Constant<T> {
    fn value(&self, _x: &[T]) -> T {
        self.0
    }
    fn label(&self) -> String {
        format!("const({})", self.0)
    }
}

/// `scale · χ_B` for an axis-aligned box `B`.
///
/// The box is half-open on the lower side in each coordinate; which side is
/// open does not affect any integral.
#[derive(Clone, Debug)]
pub struct BoxIndicator<T> {
    pub scale: T,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> BoxIndicator<T> {
    pub fn interval(scale: T, lo: T, hi: T) -> Self {
        Self {
            scale,
            lower: vec![lo],
            upper: vec![hi],
        }
    }

    pub fn rectangle(scale: T, x: (T, T), y: (T, T)) -> Self {
        Self {
            scale,
            lower: vec![x.0, y.0],
            upper: vec![x.1, y.1],
        }
    }

    fn interior_breaks(&self, axis: usize) -> Vec<T> {
        let mut out = Vec::new();
        if let (Some(&lo), Some(&hi)) = (self.lower.get(axis), self.upper.get(axis)) {
            for c in [lo, hi] {
                if c > T::zero() && c < T::one() {
                    out.push(c);
                }
            }
        }
        out
    }
}

impl<T: Real> SpatialFunction<T> for BoxIndicator<T> {
    fn value(&self, x: &[T]) -> T {
        let inside = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&xi, (&lo, &hi))| xi > lo && xi <= hi);
        if inside {
            self.scale
        } else {
            T::zero()
        }
    }
    fn breaks_x(&self) -> Vec<T> {
        self.interior_breaks(0)
    }
    fn breaks_y(&self) -> Vec<T> {
        self.interior_breaks(1)
    }
    fn label(&self) -> String {
        format!("box({};{:?};{:?})", self.scale, self.lower, self.upper)
    }
}

/// `Π x_i (1 − x_i)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Bubble;

impl<T: Real> SpatialFunction<T> for Bubble {
    fn value(&self, x: &[T]) -> T {
        x.iter()
            .map(|&xi| xi * (T::one() - xi))
            .fold(T::one(), |a, b| a * b)
    }
    fn label(&self) -> String {
        "bubble".into()
    }
}

/// `Π sin(k π x_i)`.
#[derive(Clone, Copy, Debug)]
pub struct SineProduct {
    pub frequency: u32,
}

impl<T: Real> SpatialFunction<T> for SineProduct {
    fn value(&self, x: &[T]) -> T {
        let k = T::from_u32(self.frequency).unwrap_or_else(T::one);
        x.iter()
            .map(|&xi| (k * T::PI() * xi).sin())
            .fold(T::one(), |a, b| a * b)
    }
    fn label(&self) -> String {
        format!("sine({})", self.frequency)
    }
}

type SpatialFn<T> = dyn Fn(&[T]) -> T + Send + Sync;

/// A smooth profile given by a closure.
pub struct FnProfile<T> {
    label: String,
    f: Box<SpatialFn<T>>,
}

impl<T> FnProfile<T> {
    pub fn new(label: impl Into<String>, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Box::new(f),
        }
    }
}

impl<T: Real> SpatialFunction<T> for FnProfile<T> {
    fn value(&self, x: &[T]) -> T {
        (self.f)(x)
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}
