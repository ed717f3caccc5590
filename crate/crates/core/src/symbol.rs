//! Laplace-domain building blocks.
//!
//! Transforming the equation in time turns the Caputo derivative into
//! `z^β û − z^{β−1} u0` and the memory term into `z^{−α} A û`, so every
//! node of the contour needs the transfer symbol `m(z) = z^{α+β}/(z^α + 1)`
//! and the shift `1 + z^{−α}`. Complex powers use the principal branch.

use std::sync::Arc;

use num_complex::Complex;

use crate::contour::FractionalOrders;
use crate::error::{CimError, Result};
use crate::profile::Profile;
use crate::scalar::Real;
use crate::special::gamma;

/// `m(z)` together with the stiffness shift `1 + z^{−α}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue<T> {
    pub z: Complex<T>,
    pub m: Complex<T>,
    pub shift: Complex<T>,
}

/// Evaluates `m(z) = z^{α+β}/(z^α+1)` and `1 + z^{−α}`.
pub fn kernel<T: Real>(z: Complex<T>, orders: &FractionalOrders<T>) -> Result<KernelValue<T>> {
    if z.re == T::zero() && z.im == T::zero() {
        return Err(CimError::SingularPoint);
    }
    let z_alpha = z.powf(orders.alpha);
    let m = z.powf(orders.sum()) / (z_alpha + T::one());
    let shift = Complex::new(T::one(), T::zero()) + z.powf(-orders.alpha);
    Ok(KernelValue { z, m, shift })
}

/// Whether `|arg z| < θ̃` for the analyticity sector of `orders`.
///
/// Debug builds also check that `m(z)` lands in the sector `Σ_ζ`.
pub fn sector_check<T: Real>(z: Complex<T>, orders: &FractionalOrders<T>) -> bool {
    let inside = z.arg().abs() < orders.sector_angle();
    #[cfg(debug_assertions)]
    if inside {
        if let Ok(k) = kernel(z, orders) {
            debug_assert!(
                k.m.arg().abs() < orders.kernel_sector_angle() + T::lit(1e-12),
                "arg m(z) outside the kernel sector"
            );
        }
    }
    inside
}

/// One term `coefficient · profile(x) · t^exponent` of a source.
#[derive(Clone)]
pub struct SourceTerm<T: Real> {
    pub profile: Profile<T>,
    pub coefficient: T,
    pub exponent: T,
}

impl<T: Real> std::fmt::Debug for SourceTerm<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} * {:?} * t^{}",
            self.coefficient, self.profile, self.exponent
        )
    }
}

/// `f(x,t) = Σ coefficient · profile(x) · t^γ` with every `γ > −1`.
#[derive(Clone, Debug, Default)]
pub struct PowerLawSource<T: Real> {
    terms: Vec<SourceTerm<T>>,
}

impl<T: Real> PowerLawSource<T> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn new(terms: Vec<SourceTerm<T>>) -> Result<Self> {
        let mut src = Self::zero();
        for t in terms {
            src = src.with_term(t.profile, t.coefficient, t.exponent)?;
        }
        Ok(src)
    }

    pub fn with_term(mut self, profile: Profile<T>, coefficient: T, exponent: T) -> Result<Self> {
        if !(exponent > -T::one()) {
            return Err(CimError::InvalidParameter(format!(
                "source exponent {exponent} must exceed -1"
            )));
        }
        self.terms.push(SourceTerm {
            profile,
            coefficient,
            exponent,
        });
        Ok(self)
    }

    pub fn terms(&self) -> &[SourceTerm<T>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `f(x, t)` evaluated pointwise.
    pub fn value(&self, x: &[T], t: T) -> T {
        self.terms
            .iter()
            .map(|term| term.coefficient * term.profile.value(x) * t.powf(term.exponent))
            .sum()
    }
}

/// A user-supplied Laplace transform returning FE coefficients of `f̂_h(z)`.
pub type TransformCallback<T> = Arc<dyn Fn(Complex<T>) -> Vec<Complex<T>> + Send + Sync>;

/// Laplace transform of a source in time.
#[derive(Clone)]
pub enum TransformedSource<T: Real> {
    /// Termwise `L{t^γ} = Γ(γ+1) z^{−γ−1}`; one scaling per distinct profile.
    PowerLaw {
        profiles: Vec<Profile<T>>,
        /// `(profile index, coefficient·Γ(γ+1), γ)` per term.
        terms: Vec<(usize, T, T)>,
    },
    /// Directly returns the FE coefficient vector of `f̂_h(z)`.
    Callback(TransformCallback<T>),
}

impl<T: Real> std::fmt::Debug for TransformedSource<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::PowerLaw { profiles, terms } => f
                .debug_struct("PowerLaw")
                .field("profiles", profiles)
                .field("terms", terms)
                .finish(),
            Self::Callback(_) => f.write_str("Callback"),
        }
    }
}

impl<T: Real> TransformedSource<T> {
    pub fn zero() -> Self {
        Self::PowerLaw {
            profiles: Vec::new(),
            terms: Vec::new(),
        }
    }

    /// Scaling of each distinct spatial profile at `z`.
    ///
    /// Empty for callback sources, whose output is already a spatial vector.
    pub fn evaluate(&self, z: Complex<T>) -> Vec<Complex<T>> {
        match self {
            Self::PowerLaw { profiles, terms } => {
                let mut out = vec![Complex::new(T::zero(), T::zero()); profiles.len()];
                for &(idx, weight, gamma_exp) in terms {
                    out[idx] += z.powf(-gamma_exp - T::one()) * weight;
                }
                out
            }
            Self::Callback(_) => Vec::new(),
        }
    }

    /// `f̂(z)` when every profile is the constant one (scalar problems).
    pub fn evaluate_scalar(&self, z: Complex<T>) -> Complex<T> {
        match self {
            Self::PowerLaw { profiles, .. } => self
                .evaluate(z)
                .into_iter()
                .zip(profiles)
                .map(|(w, p)| w * p.value(&[T::zero()]))
                .sum(),
            Self::Callback(cb) => cb(z).first().copied().unwrap_or_default(),
        }
    }

    pub fn profiles(&self) -> &[Profile<T>] {
        match self {
            Self::PowerLaw { profiles, .. } => profiles,
            Self::Callback(_) => &[],
        }
    }
}

/// Applies `L{t^γ}(z) = Γ(γ+1)/z^{γ+1}` termwise, merging terms that share a profile.
pub fn transform_source<T: Real>(src: &PowerLawSource<T>) -> TransformedSource<T> {
    let mut profiles: Vec<Profile<T>> = Vec::new();
    let mut terms = Vec::with_capacity(src.terms().len());
    for term in src.terms() {
        let idx = match profiles.iter().position(|p| Arc::ptr_eq(p, &term.profile)) {
            Some(i) => i,
            None => {
                profiles.push(Arc::clone(&term.profile));
                profiles.len() - 1
            }
        };
        let weight = term.coefficient * gamma(term.exponent + T::one());
        terms.push((idx, weight, term.exponent));
    }
    TransformedSource::PowerLaw { profiles, terms }
}

/// Resolvent of the scalar problem `A = 1`:
/// `(m(z)+1)^{−1} (m(z)/z · u0 + m(z)/z^β · f̂)`.
pub fn scalar_resolvent<T: Real>(
    z: Complex<T>,
    orders: &FractionalOrders<T>,
    u0: T,
    f_hat: Complex<T>,
) -> Result<Complex<T>> {
    let k = kernel(z, orders)?;
    let denom = k.m + T::one();
    if denom.norm() <= T::lit(1e3) * T::epsilon() * (T::one() + k.m.norm()) {
        return Err(CimError::ResolventSingular {
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
            modulus: denom.norm().to_f64_lossy(),
        });
    }
    let rhs = k.m / z * u0 + k.m / z.powf(orders.beta) * f_hat;
    Ok(rhs / denom)
}
