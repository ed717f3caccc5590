//! Deterministic self-checks of the numerical building blocks.
//!
//! Each check samples a fixed set of points, so the outcome is reproducible
//! and needs neither reference caches nor randomness. The command-line
//! `check` subcommand and the acceptance suite both run [`run_all`].

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::cim::{
    evaluate, mirrored_sum, solve_nodes, ProblemData, Resolvent, ScalarProblem, SolveOptions,
};
use crate::contour::{make_plan, nodes, FractionalOrders, DEFAULT_THETA};
use crate::error::Result;
use crate::experiments::{CaseId, ExperimentCase};
use crate::fem::{assemble, build_mesh, FemSystem};
use crate::profile::{Bubble, Profile, SineProduct};
use crate::symbol::{kernel, scalar_resolvent, transform_source, PowerLawSource};

type C = Complex<f64>;

/// Result of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {}: {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, worst: Result<f64>, tol: f64) -> CheckOutcome {
    match worst {
        Ok(w) => CheckOutcome {
            name,
            passed: w <= tol,
            detail: format!("worst {w:.3e} (tolerance {tol:.0e})"),
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Order pairs exercised by the sampled checks.
fn sample_orders() -> Vec<FractionalOrders<f64>> {
    [
        (0.2, 0.77),
        (0.4, 0.25),
        (0.5, 0.5),
        (0.6, 0.75),
        (0.9, 0.95),
    ]
    .into_iter()
    .map(|(a, b)| {
        FractionalOrders::with_default_epsilon(a, b, DEFAULT_THETA).expect("valid orders")
    })
    .collect()
}

/// Polar grid of points strictly inside the analyticity sector of `orders`.
pub fn sector_samples(orders: &FractionalOrders<f64>) -> Vec<C> {
    let limit = orders.sector_angle().min(std::f64::consts::PI);
    let mut out = Vec::new();
    for i in 0..=12 {
        let r = 10f64.powf(-3.0 + 0.5 * i as f64);
        for j in 0..=10 {
            let angle = -0.99 * limit + 1.98 * limit * j as f64 / 10.0;
            out.push(C::from_polar(r, angle));
        }
    }
    out
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn rel_vec(a: &[C], b: &[C]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// `m(z)(z^α + 1) = z^{α+β}` over the sector.
pub fn kernel_identity() -> CheckOutcome {
    let worst = (|| {
        let mut worst = 0f64;
        for o in sample_orders() {
            for z in sector_samples(&o) {
                let k = kernel(z, &o)?;
                worst = worst.max(rel(k.m * (z.powf(o.alpha) + 1.0), z.powf(o.sum())));
            }
        }
        Ok(worst)
    })();
    outcome("kernel identity", worst, 1e-13)
}

fn example_source() -> Result<PowerLawSource<f64>> {
    ExperimentCase::new(CaseId::ScalarEx1, 0.2, 0.77)?.source()
}

/// Kernel, transformed source and scalar resolvent commute with conjugation.
pub fn conjugate_symmetry_symbol() -> CheckOutcome {
    let worst = (|| {
        let src = transform_source(&example_source()?);
        let mut worst = 0f64;
        for o in sample_orders() {
            for z in sector_samples(&o) {
                let (a, b) = (kernel(z, &o)?, kernel(z.conj(), &o)?);
                worst = worst
                    .max(rel(b.m, a.m.conj()))
                    .max(rel(b.shift, a.shift.conj()));
                worst = worst.max(rel(
                    src.evaluate_scalar(z.conj()),
                    src.evaluate_scalar(z).conj(),
                ));
                let f = src.evaluate_scalar(z);
                let u = scalar_resolvent(z, &o, 1.0, f)?;
                let v = scalar_resolvent(z.conj(), &o, 1.0, f.conj())?;
                worst = worst.max(rel(v, u.conj()));
            }
        }
        Ok(worst)
    })();
    outcome("conjugate symmetry (symbol)", worst, 1e-13)
}

/// Finite-element shifted solves commute with conjugation for real data.
pub fn conjugate_symmetry_fem() -> CheckOutcome {
    let worst = (|| {
        let o = FractionalOrders::with_default_epsilon(0.5, 0.5, DEFAULT_THETA)?;
        let mut worst = 0f64;
        for (dim, h) in [(1, 1.0 / 16.0), (2, 1.0 / 8.0)] {
            let sys = assemble(Arc::new(build_mesh(dim, h)?));
            let u0 = sys.l2_project(&Bubble)?;
            let f: Vec<f64> = sys.l2_project(&SineProduct { frequency: 2 })?;
            for z in [
                C::new(1.0, 2.0),
                C::new(-3.0, 40.0),
                C::new(0.1, 0.01),
                C::new(25.0, -7.0),
            ] {
                let fz: Vec<C> = f.iter().map(|&v| z.inv() * v).collect();
                let fc: Vec<C> = fz.iter().map(|v| v.conj()).collect();
                let a = sys.shifted_solve(z, &o, &u0, &fz)?;
                let b = sys.shifted_solve(z.conj(), &o, &u0, &fc)?;
                let ac: Vec<C> = a.iter().map(|v| v.conj()).collect();
                worst = worst.max(rel_vec(&b, &ac));
            }
        }
        Ok(worst)
    })();
    outcome("conjugate symmetry (fem)", worst, 1e-12)
}

/// The stored half sum equals the direct sum over the mirrored contour,
/// whose imaginary part vanishes.
pub fn half_sum_equivalence() -> CheckOutcome {
    let worst = (|| {
        let case = ExperimentCase::new(CaseId::ScalarEx1, 0.2, 0.77)?;
        let data = ProblemData::scalar(1.0, transform_source(&case.source()?));
        let plan = make_plan(&case.orders, case.theta, case.t0, case.lambda, 5)?;
        let sol = solve_nodes(
            &plan,
            &case.orders,
            &ScalarProblem,
            &[&data],
            &SolveOptions::default(),
        )?;
        let mut worst = 0f64;
        for t in case.measurement_times() {
            let half = evaluate(&sol, t)?[0][0];
            let full = mirrored_sum(&plan, &case.orders, &ScalarProblem, &data, t)?[0];
            worst = worst
                .max((half - full.re).abs() / full.re.abs())
                .max(full.im.abs() / full.re.abs());
        }
        Ok(worst)
    })();
    outcome("half-sum equivalence", worst, 1e-13)
}

/// The contour resolvent at mirrored nodes returns conjugate values.
pub fn conjugate_symmetry_cim() -> CheckOutcome {
    let worst = (|| {
        let case = ExperimentCase::new(CaseId::Nonhomog1dEx3, 0.5, 0.5)?;
        let sys = assemble(Arc::new(build_mesh(1, 1.0 / 16.0)?));
        let data = ProblemData::projected(
            &sys,
            sys.l2_project(&Bubble)?,
            transform_source(&case.source()?),
        )?;
        let plan = make_plan(&case.orders, case.theta, case.t0, case.lambda, 12)?;
        let q = nodes(&plan);
        let mut worst = 0f64;
        for &z in &q.z {
            let a = sys.apply(
                &sys.factor(z, &case.orders)?,
                z,
                &case.orders,
                &data.u0,
                &data.f_hat(z),
            )?;
            let zc = z.conj();
            let b = sys.apply(
                &sys.factor(zc, &case.orders)?,
                zc,
                &case.orders,
                &data.u0,
                &data.f_hat(zc),
            )?;
            let ac: Vec<C> = a.iter().map(|v| v.conj()).collect();
            worst = worst.max(rel_vec(&b, &ac));
        }
        Ok(worst)
    })();
    outcome("conjugate symmetry (cim)", worst, 1e-12)
}

fn sample_plans() -> Result<Vec<(FractionalOrders<f64>, crate::contour::ContourPlan<f64>)>> {
    let mut plans = Vec::new();
    for o in sample_orders() {
        for (lambda, n) in [(5.0, 10), (10.0, 40), (20.0, 200)] {
            plans.push((o, make_plan(&o, DEFAULT_THETA, 0.1, lambda, n)?));
        }
    }
    Ok(plans)
}

/// Every node lies on `((Re z − μ)/sin θ)² − (Im z/cos θ)² = μ²`.
pub fn hyperbola_identity() -> CheckOutcome {
    let worst = (|| {
        let mut worst = 0f64;
        for (_, plan) in sample_plans()? {
            let (s, c, mu) = (plan.theta.sin(), plan.theta.cos(), plan.mu);
            for z in nodes(&plan).z {
                let lhs = ((z.re - mu) / s).powi(2) - (z.im / c).powi(2);
                let scale = ((z.re - mu) / s).powi(2) + (z.im / c).powi(2);
                worst = worst.max((lhs - mu * mu).abs() / scale.max(mu * mu));
            }
        }
        Ok(worst)
    })();
    outcome("hyperbola identity", worst, 1e-12)
}

/// Every node has `|arg z| < θ̃` and positive imaginary part.
pub fn sector_containment() -> CheckOutcome {
    let name = "sector containment";
    match sample_plans() {
        Ok(plans) => {
            let mut bad = 0;
            let mut margin = f64::INFINITY;
            for (o, plan) in &plans {
                for z in nodes(plan).z {
                    let gap = o.sector_angle() - z.arg().abs();
                    margin = margin.min(gap);
                    if gap <= 0.0 || z.im <= 0.0 {
                        bad += 1;
                    }
                }
            }
            CheckOutcome {
                name,
                passed: bad == 0,
                detail: format!("{bad} nodes outside, smallest angular margin {margin:.3e}"),
            }
        }
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Single-interior-node systems at `h = 1/2`, against hand assembly.
pub fn fe_hand_assembly() -> CheckOutcome {
    let worst = (|| {
        let one = assemble(Arc::new(build_mesh(1, 0.5)?));
        let two = assemble(Arc::new(build_mesh(2, 0.5)?));
        let mut worst = 0f64;
        for (got, want) in [
            (one.stiffness().get(0, 0), 4.0),
            (one.mass().get(0, 0), 1.0 / 3.0),
            (two.stiffness().get(0, 0), 4.0),
            (two.mass().get(0, 0), 1.0 / 8.0),
            (one.l2_norm(&[1.0]), (1.0f64 / 3.0).sqrt()),
        ] {
            worst = worst.max((got - want).abs() / want);
        }
        // û = (z^{β−1} u0/3 + f̂/3) / (z^β/3 + 4(1 + z^{−α})) at z = 2
        let o = FractionalOrders::new(0.5, 0.5, 0.5)?;
        let z = C::new(2.0, 0.0);
        let got = one.shifted_solve(z, &o, &[1.0], &[C::new(0.0, 0.0)])?[0];
        let s2 = 2f64.sqrt();
        let want = (1.0 / s2 / 3.0) / (s2 / 3.0 + 4.0 * (1.0 + 1.0 / s2));
        worst = worst.max(rel(got, C::new(want, 0.0)));
        Ok(worst)
    })();
    outcome("FE hand assembly", worst, 1e-14)
}

/// A `1×1` system with `M = K = 1` reproduces the scalar resolvent.
pub fn one_by_one_oracle() -> CheckOutcome {
    let worst = (|| {
        let sys = FemSystem::from_matrices(&[vec![1.0]], &[vec![1.0]])?;
        let src = transform_source(&example_source()?);
        let mut worst = 0f64;
        for o in sample_orders() {
            let plan = make_plan(&o, DEFAULT_THETA, 0.1, 10.0, 30)?;
            for z in nodes(&plan).z {
                let f = src.evaluate_scalar(z);
                let a = scalar_resolvent(z, &o, 1.0, f)?;
                let b = sys.shifted_solve(z, &o, &[1.0], &[f])?[0];
                worst = worst.max(rel(b, a));
            }
        }
        Ok(worst)
    })();
    outcome("1x1 oracle", worst, 1e-14)
}

/// `‖f − P_h f‖` for a sine product halves at second order, in 1-D and 2-D.
pub fn projection_order() -> CheckOutcome {
    let name = "projection order 2";
    let run = || -> Result<Vec<f64>> {
        let profile: Profile<f64> = Arc::new(SineProduct { frequency: 1 });
        let mut orders = Vec::new();
        for dim in [1usize, 2] {
            let mut errs = Vec::new();
            for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
                let sys = assemble(Arc::new(build_mesh(dim, h)?));
                let p = sys.l2_project(profile.as_ref())?;
                // orthogonality: ‖f − p‖² = ‖f‖² − ‖p‖²
                errs.push((0.5f64.powi(dim as i32) - sys.l2_norm(&p).powi(2)).sqrt());
            }
            orders.extend(errs.windows(2).map(|w| (w[0] / w[1]).log2()));
        }
        Ok(orders)
    };
    match run() {
        Ok(orders) => CheckOutcome {
            name,
            passed: orders.iter().all(|q| (1.9..=2.1).contains(q)),
            detail: format!(
                "orders [{}] (band [1.9, 2.1])",
                orders
                    .iter()
                    .map(|q| format!("{q:.3}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Every check, in a fixed order.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        kernel_identity(),
        conjugate_symmetry_symbol(),
        conjugate_symmetry_fem(),
        conjugate_symmetry_cim(),
        half_sum_equivalence(),
        hyperbola_identity(),
        sector_containment(),
        fe_hand_assembly(),
        one_by_one_oracle(),
        projection_order(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for c in run_all() {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn display_marks_outcome() {
        let c = CheckOutcome {
            name: "x",
            passed: false,
            detail: "d".into(),
        };
        assert_eq!(c.to_string(), "FAIL x: d");
    }
}
