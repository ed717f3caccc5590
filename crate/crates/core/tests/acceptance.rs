//! Acceptance suite. Runs every criterion at its fixed tolerance, prints one
//! `PASS`/`FAIL` line per criterion and exits non-zero if any failed.
//!
//! Built with `harness = false`; run it alone with
//! `cargo test -p cim-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use cim::checks;
use cim::cim::{accelerate, evaluate, solve_nodes, ProblemData, ScalarProblem, SolveOptions};
use cim::contour::make_plan;
use cim::experiments::{
    decay_rate, run_case_at, spatial_error_table, temporal_error_table, CaseId, ErrorTable,
    ExperimentCase, GroundTruth, Param, ReferenceStore, RunOptions, SpatialMode,
};
use cim::symbol::transform_source;
use cim::Result;

type Criterion = (&'static str, fn() -> Result<Verdict>);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict {
        passed,
        detail: detail.into(),
    })
}

fn error_at(table: &ErrorTable, n: usize) -> f64 {
    table
        .rows
        .iter()
        .find(|r| r.param == Param::Nodes(n))
        .map(|r| r.error)
        .expect("row present")
}

fn sci(v: &[f64]) -> String {
    v.iter()
        .map(|e| format!("{e:.2e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fixed(v: &[f64]) -> String {
    v.iter()
        .map(|e| format!("{e:.3}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Absolute scalar errors at the table time for `n_values`.
fn scalar_errors(lambda: f64, n_values: &[usize]) -> Result<Vec<(usize, f64)>> {
    let mut case = ExperimentCase::new(CaseId::ScalarEx1, 0.2, 0.77)?;
    case.lambda = lambda;
    let t = case.table_time();
    let exact = case.exact(&[], t).expect("closed form");
    let opts = RunOptions::default();
    n_values
        .iter()
        .map(|&n| {
            let u = run_case_at(&case, n, 0.0, &[t], &opts)?[0].values[0];
            Ok((n, (u - exact).abs()))
        })
        .collect()
}

/// Errors above this level are counted as pre-plateau when fitting decay rates.
const PLATEAU_FLOOR: f64 = 1e-12;

fn pre_plateau(points: &[(usize, f64)]) -> Vec<(usize, f64)> {
    points
        .iter()
        .copied()
        .filter(|&(_, e)| e > PLATEAU_FLOOR)
        .collect()
}

fn node_sweep() -> Vec<usize> {
    (1..=16).map(|k| 5 * k).collect()
}

fn scalar_decay() -> Result<Verdict> {
    let errs = scalar_errors(10.0, &node_sweep())?;
    let at = |n| {
        errs.iter()
            .find(|(m, _)| *m == n)
            .map(|p| p.1)
            .expect("node count sampled")
    };
    let slope = decay_rate(&pre_plateau(&errs)).unwrap_or(f64::NAN);
    let (e25, e60) = (at(25), at(60));
    verdict(
        e25 <= 1e-5 && e60 <= 1e-9 && slope <= -0.15,
        format!("err(25)={e25:.2e} err(60)={e60:.2e} slope={slope:.3}/node"),
    )
}

fn homogeneous_temporal() -> Result<Verdict> {
    let store = ReferenceStore::in_memory();
    let opts = RunOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b) in CaseId::Homog1dEx2.table_pairs() {
        let case = ExperimentCase::new(CaseId::Homog1dEx2, a, b)?;
        let tables = temporal_error_table(&case, &[20, 40, 60, 80], 1.0 / 128.0, &store, &opts)?;
        let (e40, e60) = (error_at(&tables.at_t, 40), error_at(&tables.at_t, 60));
        ok &= (1e-9..=1e-6).contains(&e40) && e60 <= 1e-10;
        parts.push(format!(
            "({a},{b}) err(40)={e40:.2e} err(60)={e60:.2e} [{}]",
            sci(&tables.at_t.errors())
        ));
    }
    verdict(ok, parts.join("; "))
}

fn spatial_orders(id: CaseId, h_values: &[f64], lo: f64, hi: f64) -> Result<(bool, Vec<String>)> {
    let store = ReferenceStore::in_memory();
    let opts = RunOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b) in id.table_pairs() {
        let case = ExperimentCase::new(id, a, b)?;
        let table =
            spatial_error_table(&case, h_values, 200, SpatialMode::Successive, &store, &opts)?;
        let orders = table.orders();
        ok &= orders.len() == h_values.len() - 1 && orders.iter().all(|q| (lo..=hi).contains(q));
        parts.push(format!("{id} ({a},{b}) orders [{}]", fixed(&orders)));
    }
    Ok((ok, parts))
}

fn spatial_1d() -> Result<Verdict> {
    let h = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let (ok2, mut p2) = spatial_orders(CaseId::Homog1dEx2, &h, 1.85, 2.15)?;
    let (ok3, p3) = spatial_orders(CaseId::Nonhomog1dEx3, &h, 1.85, 2.15)?;
    p2.extend(p3);
    verdict(ok2 && ok3, p2.join("; "))
}

fn spatial_2d() -> Result<Verdict> {
    // Desk scale: test meshes 1/16..1/128, finest companion mesh 1/256.
    let h = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    let (ok, parts) = spatial_orders(CaseId::Nonhomog2dEx3, &h, 1.9, 2.1)?;
    verdict(ok, parts.join("; "))
}

fn nonsmooth_temporal() -> Result<Verdict> {
    let store = ReferenceStore::in_memory();
    let opts = RunOptions::default();
    let h = 1.0 / 1024.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b) in CaseId::Nonsmooth1dEx4.table_pairs() {
        let case = ExperimentCase::new(CaseId::Nonsmooth1dEx4, a, b)?;
        let exact = temporal_error_table(&case, &[20, 40, 60, 80], h, &store, &opts)?;
        let (e40, e60) = (error_at(&exact.at_t, 40), error_at(&exact.at_t, 60));
        ok &= e40 <= 1e-7 && e60 <= 1e-10;
        // Against a 200-node solution on the same mesh: the quadrature error alone.
        let self_ref = case
            .clone()
            .with_truth(GroundTruth::Reference { n_nodes: 200, h })?;
        let temporal = temporal_error_table(&self_ref, &[40, 60], h, &store, &opts)?;
        parts.push(format!(
            "({a},{b}) err(40)={e40:.2e} err(60)={e60:.2e} [{}]; same-mesh err(40)={:.2e} err(60)={:.2e}",
            sci(&exact.at_t.errors()),
            error_at(&temporal.at_t, 40),
            error_at(&temporal.at_t, 60),
        ));
    }
    verdict(ok, parts.join("; "))
}

fn half_sum() -> Result<Verdict> {
    let c = checks::half_sum_equivalence();
    verdict(c.passed, c.detail)
}

fn acceleration() -> Result<Verdict> {
    let case = ExperimentCase::new(CaseId::ScalarEx1, 0.2, 0.77)?;
    let data = ProblemData::scalar(1.0, transform_source(&case.source()?));
    let plan = make_plan(&case.orders, case.theta, case.t0, case.lambda, 100)?;
    let opts = SolveOptions::default();
    let direct = solve_nodes(&plan, &case.orders, &ScalarProblem, &[&data], &opts)?;
    let fast = accelerate(&plan, &case.orders, &ScalarProblem, &[&data], 16, &opts)?;
    let mut node_rel = 0f64;
    let (mut diff2, mut norm2) = (0f64, 0f64);
    for (d, f) in direct.values.iter().zip(&fast.values) {
        let (d, f) = (d[0][0], f[0][0]);
        node_rel = node_rel.max((f - d).norm() / d.norm());
        diff2 += (f - d).norm_sqr();
        norm2 += d.norm_sqr();
    }
    let t = case.table_time();
    let exact = case.exact(&[], t).expect("closed form");
    let err_direct = (evaluate(&direct, t)?[0][0] - exact).abs();
    let err_fast = (evaluate(&fast, t)?[0][0] - exact).abs();
    let change = (err_fast - err_direct).abs() / err_direct;
    verdict(
        node_rel <= 1e-8 && change <= 0.1,
        format!(
            "max node rel dev={node_rel:.2e} (normwise {:.2e}) err direct={err_direct:.2e} \
             accelerated={err_fast:.2e} change={:.1}%",
            (diff2 / norm2).sqrt(),
            100.0 * change
        ),
    )
}

fn property_suites() -> Result<Verdict> {
    let outcomes = checks::run_all();
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    verdict(
        failed.is_empty(),
        format!(
            "{} of {} checks pass{}",
            outcomes.len() - failed.len(),
            outcomes.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!(", failing: {}", failed.join(", "))
            }
        ),
    )
}

fn lambda_sensitivity() -> Result<Verdict> {
    let sweep = node_sweep();
    let narrow = decay_rate(&pre_plateau(&scalar_errors(5.0, &sweep)?)).unwrap_or(f64::NAN);
    let wide = decay_rate(&pre_plateau(&scalar_errors(20.0, &sweep)?)).unwrap_or(f64::NAN);
    verdict(
        wide.abs() < narrow.abs(),
        format!(
            "decay rate Lambda=5: {:.3}/node, Lambda=20: {:.3}/node",
            -narrow, -wide
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("scalar spectral decay", scalar_decay),
        ("homogeneous 1-D temporal errors", homogeneous_temporal),
        ("1-D spatial orders", spatial_1d),
        ("2-D spatial orders (desk scale)", spatial_2d),
        ("nonsmooth temporal errors", nonsmooth_temporal),
        ("half-sum equivalence", half_sum),
        ("acceleration fidelity", acceleration),
        ("property suites", property_suites),
        ("Lambda sensitivity", lambda_sensitivity),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run().unwrap_or_else(|e| Verdict {
            passed: false,
            detail: format!("error: {e}"),
        });
        if !v.passed {
            failures += 1;
        }
        println!(
            "criterion {}: {} {name} ({:.1}s): {}",
            i + 1,
            if v.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
