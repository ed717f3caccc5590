//! Contour-integral solver for time-fractional integro-differential
//! equations of the form
//!
//! `∂_t^β u + A u + ∫_0^t κ_α(t−s) A u(s) ds = f`, with `κ_α(t) = t^{α−1}/Γ(α)`,
//!
//! on the unit interval or square with homogeneous Dirichlet conditions.
//! The solution is recovered from its Laplace transform by a midpoint rule
//! on a hyperbolic contour, with piecewise-linear finite elements in space.
//!
//! Everything numerical is generic over [`scalar::Real`] (`f32` or `f64`);
//! the `*64` aliases below fix the double-precision instantiation used by
//! the experiment driver.

pub mod checks;
pub mod cim;
pub mod contour;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod profile;
pub mod scalar;
pub mod special;
pub mod symbol;

pub use error::{CimError, Result};

pub type C64 = num_complex::Complex<f64>;
pub type FractionalOrders64 = contour::FractionalOrders<f64>;
pub type ContourPlan64 = contour::ContourPlan<f64>;
pub type FemSystem64 = fem::FemSystem<f64>;
pub type Mesh64 = fem::Mesh<f64>;
pub type ProblemData64 = cim::ProblemData<f64>;
pub type NodeSolutions64 = cim::NodeSolutions<f64>;
