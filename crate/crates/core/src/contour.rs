//! Hyperbolic integration contour and its optimized parameters.
//!
//! The contour is the left branch of the hyperbola
//! `z(φ) = μ (1 + sin(iφ − θ))`, sampled at the midpoints
//! `φ_k = (k + 1/2) τ`. For a time window `[t0, Λ t0]` the scale `μ` and the
//! step `τ` are chosen so that the discretization and truncation errors
//! balance at `t0`, leaving one free parameter `η ∈ (0, 1)` that is picked by
//! maximizing the predicted decay rate `Q(η) = 2π c η / P(η)`.

use num_complex::Complex;

use crate::error::{CimError, Result};
use crate::scalar::Real;

/// Contour angle used throughout the numerical experiments.
pub const DEFAULT_THETA: f64 = 0.6767;
/// Left end of the default time window.
pub const DEFAULT_T0: f64 = 0.1;
/// Default window ratio `Λ = t1 / t0`.
pub const DEFAULT_LAMBDA: f64 = 10.0;

const ETA_GRID_POINTS: usize = 4096;
const ETA_GRID_LO: f64 = 0.001;
const ETA_GRID_HI: f64 = 0.999;
const ETA_TOLERANCE: f64 = 1e-8;
const C_WORK_CAP: f64 = 0.9;
/// The default-ε clamp keeps the strip at least this fraction of θ wide.
const STRIP_FLOOR_FRACTION: f64 = 0.25;
const EPSILON_CAP: f64 = 0.99;

/// Fractional orders of the problem plus the sector slack `ε`.
///
/// `alpha` is the order of the memory kernel, `beta` the Caputo order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalOrders<T> {
    pub alpha: T,
    pub beta: T,
    pub epsilon: T,
}

impl<T: Real> FractionalOrders<T> {
    /// Validates `0 < α, β, ε < 1` and `ε < α + β`.
    ///
    /// The upper half of the sector hypothesis (`α + β < 2 − ε`) is not
    /// enforced here; see [`Self::satisfies_sector_hypothesis`].
    pub fn new(alpha: T, beta: T, epsilon: T) -> Result<Self> {
        let open_unit = |v: T| v > T::zero() && v < T::one();
        if !open_unit(alpha) {
            return Err(CimError::InvalidParameter(format!(
                "alpha = {alpha} not in (0,1)"
            )));
        }
        if !open_unit(beta) {
            return Err(CimError::InvalidParameter(format!(
                "beta = {beta} not in (0,1)"
            )));
        }
        if !open_unit(epsilon) {
            return Err(CimError::InvalidParameter(format!(
                "epsilon = {epsilon} not in (0,1)"
            )));
        }
        if epsilon >= alpha + beta {
            return Err(CimError::InvalidParameter(format!(
                "epsilon = {epsilon} must be below alpha + beta = {}",
                alpha + beta
            )));
        }
        Ok(Self {
            alpha,
            beta,
            epsilon,
        })
    }

    /// Builds orders with ε from [`default_epsilon`] for the given contour angle.
    pub fn with_default_epsilon(alpha: T, beta: T, theta: T) -> Result<Self> {
        Self::new(alpha, beta, default_epsilon(alpha, beta, theta))
    }

    #[inline]
    pub fn sum(&self) -> T {
        self.alpha + self.beta
    }

    /// Whether `ε < α + β < 2 − ε` holds.
    pub fn satisfies_sector_hypothesis(&self) -> bool {
        let s = self.sum();
        self.epsilon < s && s < T::lit(2.0) - self.epsilon
    }

    /// Half-angle `θ̃ = (α+β+ε)π / (2(α+β))` of the analyticity sector.
    pub fn sector_angle(&self) -> T {
        let s = self.sum();
        (s + self.epsilon) * T::PI() / (T::lit(2.0) * s)
    }

    /// Half-angle `ζ` of the sector containing `m(z)` for `z` in the analyticity sector.
    pub fn kernel_sector_angle(&self) -> T {
        let s = self.sum();
        let outer = (s + self.epsilon) * T::FRAC_PI_2();
        (self.beta / s * outer).max(outer)
    }
}

/// Default sector slack: `ε = 0.75·min(1, α+β, 2−(α+β))`, raised when that
/// leaves the strip for `theta` narrower than `theta / 4`.
///
/// The raise targets a strip of exactly `theta / 4`, capped at `ε = 0.99`.
pub fn default_epsilon<T: Real>(alpha: T, beta: T, theta: T) -> T {
    let s = alpha + beta;
    let two = T::lit(2.0);
    let base = T::lit(0.75) * T::one().min(s).min(two - s);
    let strip = |eps: T| eps * T::PI() / (two * s) - theta;
    let floor = T::lit(STRIP_FLOOR_FRACTION) * theta;
    if strip(base) >= floor {
        return base;
    }
    let needed = two * s * (theta + floor) / T::PI();
    needed.min(T::lit(EPSILON_CAP)).max(base)
}

/// Half-width `c̃ = min{θ, επ/(2(α+β)) − θ}` of the analyticity strip in the φ-plane.
pub fn strip_half_width<T: Real>(orders: &FractionalOrders<T>, theta: T) -> Result<T> {
    check_theta(theta)?;
    let limit = orders.epsilon * T::PI() / (T::lit(2.0) * orders.sum());
    if limit <= theta {
        return Err(CimError::NonPositiveStrip {
            limit: limit.to_f64_lossy(),
            theta: theta.to_f64_lossy(),
        });
    }
    Ok(theta.min(limit - theta))
}

/// Working strip value used by the parameter formulas: `min(c̃, 0.9 θ)`.
pub fn working_strip<T: Real>(c_tilde: T, theta: T) -> T {
    c_tilde.min(T::lit(C_WORK_CAP) * theta)
}

/// `P(η) = arcosh(Λ / ((1−η) sin(θ − c)))`.
pub fn p_of_eta<T: Real>(eta: T, lambda: T, theta: T, c_work: T) -> Result<T> {
    let argument = lambda / ((T::one() - eta) * (theta - c_work).sin());
    if !(argument >= T::one()) {
        return Err(CimError::DomainError {
            argument: argument.to_f64_lossy(),
        });
    }
    Ok(argument.acosh())
}

/// Predicted decay rate `Q(η) = 2π c η / P(η)`.
pub fn q_of_eta<T: Real>(eta: T, lambda: T, theta: T, c_work: T) -> Result<T> {
    let p = p_of_eta(eta, lambda, theta, c_work)?;
    Ok(T::TAU() * c_work * eta / p)
}

/// Maximizes `Q(η)` over `(0, 1)`: a 4096-point grid scan followed by
/// golden-section refinement around the best grid point.
///
/// Returns `(η*, Q(η*))`.
pub fn optimize_eta<T: Real>(lambda: T, theta: T, c_work: T) -> Result<(T, T)> {
    check_theta(theta)?;
    if !(lambda >= T::one()) {
        return Err(CimError::InvalidParameter(format!(
            "lambda = {lambda} must be >= 1"
        )));
    }
    if !(c_work > T::zero() && c_work < theta) {
        return Err(CimError::InvalidParameter(format!(
            "c_work = {c_work} must lie in (0, theta = {theta})"
        )));
    }
    let q = |eta: T| q_of_eta(eta, lambda, theta, c_work);

    let lo = T::lit(ETA_GRID_LO);
    let hi = T::lit(ETA_GRID_HI);
    let step = (hi - lo) / T::from_usize_lossy(ETA_GRID_POINTS - 1);
    let grid_eta = |i: usize| lo + step * T::from_usize_lossy(i);

    let mut best = (0, q(lo)?);
    for i in 1..ETA_GRID_POINTS {
        let value = q(grid_eta(i))?;
        if value > best.1 {
            best = (i, value);
        }
    }

    // Golden-section search inside the bracket of neighbouring grid points.
    let mut a = grid_eta(best.0.saturating_sub(1));
    let mut b = grid_eta((best.0 + 1).min(ETA_GRID_POINTS - 1));
    let inv_phi = T::lit((5.0_f64.sqrt() - 1.0) / 2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut qc = q(c)?;
    let mut qd = q(d)?;
    let tol = T::lit(ETA_TOLERANCE);
    while (b - a).abs() > tol {
        if qc > qd {
            b = d;
            d = c;
            qd = qc;
            c = b - inv_phi * (b - a);
            qc = q(c)?;
        } else {
            a = c;
            c = d;
            qc = qd;
            d = a + inv_phi * (b - a);
            qd = q(d)?;
        }
    }
    let mid = (a + b) / T::lit(2.0);
    let q_mid = q(mid)?;
    if q_mid >= best.1 {
        Ok((mid, q_mid))
    } else {
        Ok((grid_eta(best.0), best.1))
    }
}

/// Optimized parameters of the hyperbolic contour for one time window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourPlan<T> {
    pub theta: T,
    pub c_tilde: T,
    pub c_work: T,
    pub mu: T,
    pub tau: T,
    pub n_nodes: usize,
    pub eta_star: T,
    pub q_star: T,
    pub t0: T,
    pub lambda: T,
}

impl<T: Real> ContourPlan<T> {
    /// `(t0, Λ t0)`.
    pub fn window(&self) -> (T, T) {
        (self.t0, self.lambda * self.t0)
    }

    pub fn contains(&self, t: T) -> bool {
        let (t0, t1) = self.window();
        // Closed window with a relative slack of a few ulps at either end.
        let slack = T::lit(8.0) * T::epsilon() * t1;
        t >= t0 - slack && t <= t1 + slack
    }

    /// `P(η*)`, equal to `τ N`.
    pub fn p_star(&self) -> T {
        self.tau * T::from_usize_lossy(self.n_nodes)
    }
}

/// Builds the contour for the window `[t0, Λ t0]` with `n_nodes` quadrature
/// points: `c̃`, `c_work`, `η*`, then `τ = P(η*)/N` and
/// `μ = 2π c_work N (1−η*) / (Λ t0 P(η*))`.
pub fn make_plan<T: Real>(
    orders: &FractionalOrders<T>,
    theta: T,
    t0: T,
    lambda: T,
    n_nodes: usize,
) -> Result<ContourPlan<T>> {
    if n_nodes == 0 {
        return Err(CimError::InvalidParameter(
            "n_nodes must be positive".into(),
        ));
    }
    if !(t0 > T::zero()) {
        return Err(CimError::InvalidParameter(format!(
            "t0 = {t0} must be positive"
        )));
    }
    let c_tilde = strip_half_width(orders, theta)?;
    let c_work = working_strip(c_tilde, theta);
    let (eta_star, q_star) = optimize_eta(lambda, theta, c_work)?;
    let p = p_of_eta(eta_star, lambda, theta, c_work)?;
    let n = T::from_usize_lossy(n_nodes);
    let tau = p / n;
    let mu = T::TAU() * c_work * n * (T::one() - eta_star) / (lambda * t0 * p);
    let plan = ContourPlan {
        theta,
        c_tilde,
        c_work,
        mu,
        tau,
        n_nodes,
        eta_star,
        q_star,
        t0,
        lambda,
    };
    debug_assert!(plan.mu * (T::one() - plan.theta.sin()) > T::zero());
    Ok(plan)
}

/// Midpoint samples of the upper half of the contour.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureNodes<T> {
    pub phi: Vec<T>,
    pub z: Vec<Complex<T>>,
    pub dz: Vec<Complex<T>>,
}

impl<T: Real> QuadratureNodes<T> {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// `z(φ) = μ(1 − sin θ cosh φ) + i μ cos θ sinh φ`.
#[inline]
pub fn contour_point<T: Real>(mu: T, theta: T, phi: T) -> Complex<T> {
    Complex::new(
        mu * (T::one() - theta.sin() * phi.cosh()),
        mu * theta.cos() * phi.sinh(),
    )
}

/// `z'(φ) = i μ cos(iφ − θ) = −μ sin θ sinh φ + i μ cos θ cosh φ`.
#[inline]
pub fn contour_derivative<T: Real>(mu: T, theta: T, phi: T) -> Complex<T> {
    Complex::new(
        -mu * theta.sin() * phi.sinh(),
        mu * theta.cos() * phi.cosh(),
    )
}

/// Samples `φ_k = (k + 1/2) τ`, `z_k` and `z'_k` for `k = 0..N`.
pub fn nodes<T: Real>(plan: &ContourPlan<T>) -> QuadratureNodes<T> {
    let half = T::lit(0.5);
    let phi: Vec<T> = (0..plan.n_nodes)
        .map(|k| (T::from_usize_lossy(k) + half) * plan.tau)
        .collect();
    let z = phi
        .iter()
        .map(|&p| contour_point(plan.mu, plan.theta, p))
        .collect();
    let dz = phi
        .iter()
        .map(|&p| contour_derivative(plan.mu, plan.theta, p))
        .collect();
    QuadratureNodes { phi, z, dz }
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if !(theta > T::zero() && theta < T::FRAC_PI_2()) {
        return Err(CimError::InvalidParameter(format!(
            "theta = {theta} not in (0, pi/2)"
        )));
    }
    Ok(())
}
