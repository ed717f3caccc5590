//! Node solves and time reconstruction along the hyperbolic contour.
//!
//! The inverse Laplace integral is approximated by the midpoint rule in `φ`.
//! Conjugate symmetry of the resolvent means only the nodes with `φ > 0`
//! are solved, and
//!
//! `u(t) ≈ (τ/π) Im Σ_k e^{z_k t} û(z_k) z'(φ_k)`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::contour::{contour_derivative, contour_point, nodes, ContourPlan, FractionalOrders};
use crate::error::{CimError, Result};
use crate::fem::{FemSystem, ShiftedFactor};
use crate::scalar::{cexp, Real};
use crate::symbol::{scalar_resolvent, TransformedSource};

/// A linear problem whose Laplace-domain solution can be computed at any `z`.
pub trait Resolvent<T: Real>: Sync {
    type Factor: Send;

    /// Number of unknowns.
    fn dim(&self) -> usize;

    /// Prepares the operator at `z`; the factor is reused for every
    /// right-hand side sharing that node.
    fn factor(&self, z: Complex<T>, orders: &FractionalOrders<T>) -> Result<Self::Factor>;

    /// `û(z)` given initial data `u0` and transformed source `f̂(z)`.
    fn apply(
        &self,
        factor: &Self::Factor,
        z: Complex<T>,
        orders: &FractionalOrders<T>,
        u0: &[T],
        f_hat: &[Complex<T>],
    ) -> Result<Vec<Complex<T>>>;
}

impl<T: Real> Resolvent<T> for FemSystem<T> {
    type Factor = ShiftedFactor<Complex<T>>;

    fn dim(&self) -> usize {
        self.n()
    }

    fn factor(&self, z: Complex<T>, orders: &FractionalOrders<T>) -> Result<Self::Factor> {
        self.factor_shifted(z, orders)
    }

    fn apply(
        &self,
        factor: &Self::Factor,
        z: Complex<T>,
        orders: &FractionalOrders<T>,
        u0: &[T],
        f_hat: &[Complex<T>],
    ) -> Result<Vec<Complex<T>>> {
        Ok(factor.solve(&self.shifted_rhs(z, orders, u0, f_hat)))
    }
}

/// The scalar problem with `A = 1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScalarProblem;

impl<T: Real> Resolvent<T> for ScalarProblem {
    type Factor = ();

    fn dim(&self) -> usize {
        1
    }

    fn factor(&self, _z: Complex<T>, _orders: &FractionalOrders<T>) -> Result<()> {
        Ok(())
    }

    fn apply(
        &self,
        _factor: &(),
        z: Complex<T>,
        orders: &FractionalOrders<T>,
        u0: &[T],
        f_hat: &[Complex<T>],
    ) -> Result<Vec<Complex<T>>> {
        Ok(vec![scalar_resolvent(z, orders, u0[0], f_hat[0])?])
    }
}

/// Discrete data: projected initial value and a source whose transform is
/// a combination of projected spatial profiles.
#[derive(Clone, Debug)]
pub struct ProblemData<T: Real> {
    pub u0: Vec<T>,
    pub source: TransformedSource<T>,
    /// Discrete coefficients of each profile of `source`, same order.
    pub profiles: Vec<Vec<T>>,
}

impl<T: Real> ProblemData<T> {
    /// Data for the scalar problem; every source profile is a constant.
    pub fn scalar(u0: T, source: TransformedSource<T>) -> Self {
        let profiles = source
            .profiles()
            .iter()
            .map(|p| vec![p.value(&[T::zero()])])
            .collect();
        Self {
            u0: vec![u0],
            source,
            profiles,
        }
    }

    /// Projects the source profiles with the system's L² projection.
    pub fn projected(
        system: &FemSystem<T>,
        u0: Vec<T>,
        source: TransformedSource<T>,
    ) -> Result<Self> {
        let profiles = source
            .profiles()
            .iter()
            .map(|p| system.l2_project(p.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            u0,
            source,
            profiles,
        })
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    /// `f̂_h(z)`.
    pub fn f_hat(&self, z: Complex<T>) -> Vec<Complex<T>> {
        let n = self.dim();
        match &self.source {
            TransformedSource::Callback(cb) => cb(z),
            TransformedSource::PowerLaw { .. } => {
                let weights = self.source.evaluate(z);
                let mut out = vec![Complex::new(T::zero(), T::zero()); n];
                for (w, prof) in weights.iter().zip(&self.profiles) {
                    for (o, &p) in out.iter_mut().zip(prof) {
                        *o += *w * p;
                    }
                }
                out
            }
        }
    }
}

/// Options for node solves.
#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Incremented once per resolvent evaluation.
    pub counter: Option<Arc<AtomicUsize>>,
}

/// `û` at the nodes of a contour plan.
#[derive(Clone, Debug)]
pub struct NodeSolutions<T: Real> {
    pub plan: ContourPlan<T>,
    pub phi: Vec<T>,
    pub z: Vec<Complex<T>>,
    pub dz: Vec<Complex<T>>,
    /// `values[k]` is `û(z_k)` for every data set; `values[k][d]` the
    /// vector of data set `d`.
    pub values: Vec<Vec<Vec<Complex<T>>>>,
}

impl<T: Real> NodeSolutions<T> {
    pub fn n_data(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Restricts to one data set.
    pub fn select(&self, data_index: usize) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|v| vec![v[data_index].clone()])
                .collect(),
            ..self.clone()
        }
    }
}

fn run_pool<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CimError::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn tag_node<T: Real>(err: CimError, node: usize, z: Complex<T>) -> CimError {
    match err {
        CimError::SolveFailure { reason, .. } => CimError::SolveFailure {
            node,
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
            reason,
        },
        CimError::ResolventSingular { .. } | CimError::SingularPoint => CimError::SolveFailure {
            node,
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
            reason: err.to_string(),
        },
        other => other,
    }
}

/// Solves at arbitrary contour abscissae `phi`, one factorization per node
/// shared by all data sets.
pub fn solve_at<T: Real, R: Resolvent<T>>(
    plan: &ContourPlan<T>,
    phi: &[T],
    orders: &FractionalOrders<T>,
    op: &R,
    data: &[&ProblemData<T>],
    options: &SolveOptions,
) -> Result<Vec<Vec<Vec<Complex<T>>>>> {
    for d in data {
        if d.dim() != op.dim() {
            return Err(CimError::InvalidParameter(format!(
                "data of size {} for an operator of size {}",
                d.dim(),
                op.dim()
            )));
        }
    }
    let work = |k: usize| -> Result<Vec<Vec<Complex<T>>>> {
        let z = contour_point(plan.mu, plan.theta, phi[k]);
        let factor = op.factor(z, orders).map_err(|e| tag_node(e, k, z))?;
        let out = data
            .iter()
            .map(|d| {
                op.apply(&factor, z, orders, &d.u0, &d.f_hat(z))
                    .map_err(|e| tag_node(e, k, z))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(c) = &options.counter {
            c.fetch_add(1, Ordering::Relaxed);
        }
        Ok(out)
    };
    run_pool(options.threads, || {
        (0..phi.len())
            .into_par_iter()
            .map(work)
            .collect::<Result<Vec<_>>>()
    })?
}

/// `û(z_k)` at all `N` nodes of `plan`, for each data set.
pub fn solve_nodes<T: Real, R: Resolvent<T>>(
    plan: &ContourPlan<T>,
    orders: &FractionalOrders<T>,
    op: &R,
    data: &[&ProblemData<T>],
    options: &SolveOptions,
) -> Result<NodeSolutions<T>> {
    let q = nodes(plan);
    let values = solve_at(plan, &q.phi, orders, op, data, options)?;
    Ok(NodeSolutions {
        plan: *plan,
        phi: q.phi,
        z: q.z,
        dz: q.dz,
        values,
    })
}

/// `u_h(t)` for every data set, summing from the outermost node inward.
pub fn evaluate<T: Real>(sol: &NodeSolutions<T>, t: T) -> Result<Vec<Vec<T>>> {
    let plan = &sol.plan;
    if !plan.contains(t) {
        let (t0, t1) = plan.window();
        return Err(CimError::OutOfWindow {
            t: t.to_f64_lossy(),
            t0: t0.to_f64_lossy(),
            t1: t1.to_f64_lossy(),
        });
    }
    let scale = plan.tau / T::PI();
    let mut out = Vec::with_capacity(sol.n_data());
    for d in 0..sol.n_data() {
        let dim = sol.values.first().map_or(0, |v| v[d].len());
        let mut acc = vec![Complex::new(T::zero(), T::zero()); dim];
        for k in (0..sol.z.len()).rev() {
            let w = cexp(sol.z[k] * t) * sol.dz[k];
            for (a, &u) in acc.iter_mut().zip(&sol.values[k][d]) {
                *a += w * u;
            }
        }
        out.push(acc.into_iter().map(|a| a.im * scale).collect());
    }
    Ok(out)
}

/// The full midpoint sum over the `2N` nodes `φ_k = (k+½)τ`,
/// `k = −N..N−1`, computed by direct resolvent evaluation at every node.
///
/// Returns the complex value of `(τ/2πi) Σ e^{z_k t} û(z_k) z'_k` for one
/// data set; the imaginary part measures the deviation from a real result.
pub fn mirrored_sum<T: Real, R: Resolvent<T>>(
    plan: &ContourPlan<T>,
    orders: &FractionalOrders<T>,
    op: &R,
    data: &ProblemData<T>,
    t: T,
) -> Result<Vec<Complex<T>>> {
    let n = plan.n_nodes as i64;
    let half = T::lit(0.5);
    let mut acc = vec![Complex::new(T::zero(), T::zero()); op.dim()];
    for k in (-n..n).rev() {
        let phi = (T::from_i64(k).expect("node index") + half) * plan.tau;
        let z = contour_point(plan.mu, plan.theta, phi);
        let dz = contour_derivative(plan.mu, plan.theta, phi);
        let factor = op.factor(z, orders)?;
        let u = op.apply(&factor, z, orders, &data.u0, &data.f_hat(z))?;
        let w = cexp(z * t) * dz;
        for (a, &v) in acc.iter_mut().zip(&u) {
            *a += w * v;
        }
    }
    let denom = Complex::new(T::zero(), T::TAU());
    Ok(acc.into_iter().map(|a| a * plan.tau / denom).collect())
}

/// Barycentric Lagrange interpolation through arbitrary distinct points.
#[derive(Clone, Debug)]
pub struct Barycentric<T> {
    points: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Barycentric<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(CimError::InvalidParameter("no interpolation points".into()));
        }
        let lo = points.iter().copied().fold(T::infinity(), T::min);
        let hi = points.iter().copied().fold(T::neg_infinity(), T::max);
        // Rescaling the differences by the capacity 4/(b−a) keeps the
        // products in range for many points.
        let cap = if hi > lo {
            T::lit(4.0) / (hi - lo)
        } else {
            T::one()
        };
        let mut weights = Vec::with_capacity(points.len());
        for (j, &pj) in points.iter().enumerate() {
            let mut prod = T::one();
            for (m, &pm) in points.iter().enumerate() {
                if m != j {
                    let d = (pj - pm) * cap;
                    if d == T::zero() {
                        return Err(CimError::InvalidParameter(
                            "repeated interpolation point".into(),
                        ));
                    }
                    prod *= d;
                }
            }
            weights.push(T::one() / prod);
        }
        Ok(Self { points, weights })
    }

    /// Chebyshev points of the second kind mapped to `[a, b]`.
    pub fn chebyshev_lobatto(a: T, b: T, n: usize) -> Vec<T> {
        if n == 0 {
            return vec![(a + b) / T::lit(2.0)];
        }
        let nf = T::from_usize_lossy(n);
        (0..=n)
            .map(|j| {
                let x = -(T::PI() * T::from_usize_lossy(j) / nf).cos();
                (a + b) / T::lit(2.0) + (b - a) / T::lit(2.0) * x
            })
            .collect()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Interpolated value at `x`; returns the sample itself when `x`
    /// coincides with a point.
    pub fn eval(&self, x: T, values: &[Complex<T>]) -> Complex<T> {
        let mut num = Complex::new(T::zero(), T::zero());
        let mut den = T::zero();
        for ((&p, &w), &v) in self.points.iter().zip(&self.weights).zip(values) {
            let d = x - p;
            if d == T::zero() {
                return v;
            }
            let c = w / d;
            num += v * c;
            den += c;
        }
        num / den
    }
}

/// Replaces the `N` direct solves of `plan` by `n_cheb + 1` solves at
/// Chebyshev–Lobatto points of `[φ_0, φ_{N−1}]` and interpolates `û`
/// componentwise to the midpoint nodes.
pub fn accelerate<T: Real, R: Resolvent<T>>(
    plan: &ContourPlan<T>,
    orders: &FractionalOrders<T>,
    op: &R,
    data: &[&ProblemData<T>],
    n_cheb: usize,
    options: &SolveOptions,
) -> Result<NodeSolutions<T>> {
    let q = nodes(plan);
    let (a, b) = (q.phi[0], q.phi[q.len() - 1]);
    let points = Barycentric::chebyshev_lobatto(a, b, n_cheb);
    accelerate_at(plan, orders, op, data, points, options)
}

/// As [`accelerate`], with caller-chosen interpolation points in `φ`.
pub fn accelerate_at<T: Real, R: Resolvent<T>>(
    plan: &ContourPlan<T>,
    orders: &FractionalOrders<T>,
    op: &R,
    data: &[&ProblemData<T>],
    points: Vec<T>,
    options: &SolveOptions,
) -> Result<NodeSolutions<T>> {
    let samples = solve_at(plan, &points, orders, op, data, options)?;
    let interp = Barycentric::new(points)?;
    let q = nodes(plan);
    let n_data = data.len();
    let dim = op.dim();
    let values = q
        .phi
        .iter()
        .map(|&phi| {
            (0..n_data)
                .map(|d| {
                    (0..dim)
                        .map(|i| {
                            let column: Vec<Complex<T>> = samples.iter().map(|s| s[d][i]).collect();
                            interp.eval(phi, &column)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(NodeSolutions {
        plan: *plan,
        phi: q.phi,
        z: q.z,
        dz: q.dz,
        values,
    })
}
