use std::sync::Arc;

use num_complex::Complex;
use proptest::prelude::*;

use cim::cim::{Barycentric, Resolvent, ScalarProblem};
use cim::contour::{make_plan, nodes, FractionalOrders, DEFAULT_THETA};
use cim::experiments::{read_cache, write_cache, TimeSample};
use cim::fem::{assemble, build_mesh};
use cim::profile::{Bubble, SineProduct};
use cim::symbol::{kernel, scalar_resolvent};

type C = Complex<f64>;

fn orders() -> impl Strategy<Value = FractionalOrders<f64>> {
    (0.15f64..0.95, 0.15f64..0.95).prop_filter_map("valid orders", |(a, b)| {
        FractionalOrders::with_default_epsilon(a, b, DEFAULT_THETA).ok()
    })
}

/// A point strictly inside the analyticity sector, given as fractions.
fn in_sector(o: &FractionalOrders<f64>, log_r: f64, frac: f64) -> C {
    let limit = o.sector_angle().min(std::f64::consts::PI);
    C::from_polar(10f64.powf(log_r), 0.999 * limit * frac)
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernel_identity(o in orders(), log_r in -4.0f64..4.0, frac in -1.0f64..1.0) {
        let z = in_sector(&o, log_r, frac);
        let k = kernel(z, &o).unwrap();
        prop_assert!(rel(k.m * (z.powf(o.alpha) + 1.0), z.powf(o.sum())) < 1e-13);
    }

    #[test]
    fn scalar_resolvent_commutes_with_conjugation(
        o in orders(), log_r in -3.0f64..3.0, frac in -1.0f64..1.0, u0 in -5.0f64..5.0, f in -5.0f64..5.0
    ) {
        let z = in_sector(&o, log_r, frac);
        let fz = C::new(f, 0.0) / z;
        let a = scalar_resolvent(z, &o, u0, fz).unwrap();
        let b = scalar_resolvent(z.conj(), &o, u0, fz.conj()).unwrap();
        prop_assert!((b - a.conj()).norm() <= 1e-13 * a.norm().max(1e-300));
    }

    #[test]
    fn nodes_lie_on_hyperbola_inside_sector(
        o in orders(), lambda in 2.0f64..50.0, t0 in 0.01f64..1.0, n in 2usize..240
    ) {
        let plan = make_plan(&o, DEFAULT_THETA, t0, lambda, n);
        prop_assume!(plan.is_ok());
        let plan = plan.unwrap();
        let (s, c, mu) = (plan.theta.sin(), plan.theta.cos(), plan.mu);
        for z in nodes(&plan).z {
            let x = (z.re - mu) / s;
            let y = z.im / c;
            prop_assert!((x * x - y * y - mu * mu).abs() <= 1e-12 * (x * x + y * y).max(mu * mu));
            prop_assert!(z.im > 0.0);
            prop_assert!(z.arg().abs() < o.sector_angle());
        }
    }

    #[test]
    fn fem_solve_commutes_with_conjugation(
        log_r in -2.0f64..3.0, frac in -1.0f64..1.0, dim in 1usize..=2
    ) {
        let o = FractionalOrders::with_default_epsilon(0.5, 0.5, DEFAULT_THETA).unwrap();
        let z = in_sector(&o, log_r, frac);
        let sys = assemble(Arc::new(build_mesh(dim, 0.125).unwrap()));
        let u0 = sys.l2_project(&Bubble).unwrap();
        let f: Vec<C> = sys
            .l2_project(&SineProduct { frequency: 3 })
            .unwrap()
            .into_iter()
            .map(|v| z.powf(-1.5) * v)
            .collect();
        let fc: Vec<C> = f.iter().map(|v| v.conj()).collect();
        let a = sys.shifted_solve(z, &o, &u0, &f).unwrap();
        let b = sys.shifted_solve(z.conj(), &o, &u0, &fc).unwrap();
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.conj() - y).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn scalar_problem_matches_resolvent(o in orders(), log_r in -2.0f64..3.0, frac in -1.0f64..1.0) {
        let z = in_sector(&o, log_r, frac);
        let op = ScalarProblem;
        Resolvent::<f64>::factor(&op, z, &o).unwrap();
        let f = C::new(2.0, 0.0) / z;
        let got = op.apply(&(), z, &o, &[1.0], &[f]).unwrap()[0];
        prop_assert_eq!(got, scalar_resolvent(z, &o, 1.0, f).unwrap());
    }

    #[test]
    fn barycentric_reproduces_polynomials(
        coeffs in prop::collection::vec(-3.0f64..3.0, 1..10), a in -2.0f64..0.0, len in 0.5f64..6.0, x in 0.0f64..1.0
    ) {
        let n = coeffs.len() + 2;
        let b = a + len;
        let interp = Barycentric::new(Barycentric::chebyshev_lobatto(a, b, n)).unwrap();
        let poly = |s: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c);
        let values: Vec<C> = interp.points().iter().map(|&p| C::new(poly(p), -poly(p))).collect();
        let at = a + len * x;
        let got = interp.eval(at, &values);
        let scale: f64 = coeffs.iter().enumerate().map(|(i, c)| c.abs() * at.abs().max(1.0).powi(i as i32)).sum();
        prop_assert!((got.re - poly(at)).abs() <= 1e-12 * scale);
        prop_assert!((got.im + poly(at)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn cache_round_trip_is_bit_exact(
        rows in prop::collection::vec((0.0f64..10.0, prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3)), 1..6)
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let samples: Vec<TimeSample> = rows.into_iter().map(|(t, values)| TimeSample { t, values }).collect();
        write_cache(&path, "key", &samples).unwrap();
        prop_assert_eq!(read_cache(&path, "key").unwrap(), samples);
    }
}
