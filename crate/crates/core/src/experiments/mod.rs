//! The numerical examples: data, ground truth, and the drivers that turn
//! them into error tables.
//!
//! Every case is solved in double precision. A run returns the discrete
//! solution at the case's measurement times: the table time followed by 16
//! equispaced times covering the whole window `[t0, Λ t0]`.

mod cache;
mod tables;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::cim::{self, ProblemData, Resolvent, ScalarProblem, SolveOptions};
use crate::contour::{make_plan, FractionalOrders, DEFAULT_T0, DEFAULT_THETA};
use crate::error::{CimError, Result};
use crate::fem::{assemble, build_mesh, FemSystem, Mesh};
use crate::profile::{BoxIndicator, Bubble, Constant, Profile};
use crate::special::gamma;
use crate::symbol::{transform_source, PowerLawSource};

pub use cache::{read_cache, write_cache, ReferenceStore};
pub use tables::{
    decay_rate, observed_order, spatial_error_table, temporal_error_table, ErrorRow, ErrorTable,
    Param, SpatialMode, TemporalTables,
};

/// Number of equispaced window samples added to the table time.
pub const WINDOW_SAMPLES: usize = 16;

/// The six benchmark configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseId {
    /// Scalar problem with `u = 1 + (3√π/2) t`.
    ScalarEx1,
    /// 1-D, `f = 0`, `u0 = π³ χ_(0,2/3]`.
    Homog1dEx2,
    /// 2-D, `f = 0`, `u0 = χ_(1/2,1)×(0,1)`.
    Homog2dEx2,
    /// 1-D, `u0 = 0`, source chosen so that `u = t x(1−x)`.
    Nonhomog1dEx3,
    /// 2-D, `u0 = 0`, `f = 1`.
    Nonhomog2dEx3,
    /// 1-D with `u = 1 + t^{1/6} x(1−x)`.
    Nonsmooth1dEx4,
}

impl CaseId {
    pub const ALL: [CaseId; 6] = [
        CaseId::ScalarEx1,
        CaseId::Homog1dEx2,
        CaseId::Homog2dEx2,
        CaseId::Nonhomog1dEx3,
        CaseId::Nonhomog2dEx3,
        CaseId::Nonsmooth1dEx4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::ScalarEx1 => "scalar_ex1",
            CaseId::Homog1dEx2 => "homog_1d_ex2",
            CaseId::Homog2dEx2 => "homog_2d_ex2",
            CaseId::Nonhomog1dEx3 => "nonhomog_1d_ex3",
            CaseId::Nonhomog2dEx3 => "nonhomog_2d_ex3",
            CaseId::Nonsmooth1dEx4 => "nonsmooth_1d_ex4",
        }
    }

    /// Spatial dimension, 0 for the scalar problem.
    pub fn dim(self) -> usize {
        match self {
            CaseId::ScalarEx1 => 0,
            CaseId::Homog1dEx2 | CaseId::Nonhomog1dEx3 | CaseId::Nonsmooth1dEx4 => 1,
            CaseId::Homog2dEx2 | CaseId::Nonhomog2dEx3 => 2,
        }
    }

    /// Time at which the tables are reported.
    pub fn table_time(self) -> f64 {
        match self {
            CaseId::ScalarEx1 | CaseId::Nonsmooth1dEx4 => 0.5,
            CaseId::Homog1dEx2 | CaseId::Homog2dEx2 => 0.4,
            CaseId::Nonhomog1dEx3 | CaseId::Nonhomog2dEx3 => 0.6,
        }
    }

    pub fn default_lambda(self) -> f64 {
        match self {
            CaseId::Nonsmooth1dEx4 => 5.0,
            _ => 10.0,
        }
    }

    /// The three `(α, β)` pairs tabulated for this case.
    pub fn table_pairs(self) -> [(f64, f64); 3] {
        match self {
            CaseId::ScalarEx1 => [(0.2, 0.77), (0.2, 0.5), (0.6, 0.77)],
            CaseId::Nonsmooth1dEx4 => [(0.25, 0.4), (0.5, 0.6), (0.75, 0.8)],
            _ => [(0.4, 0.25), (0.5, 0.5), (0.6, 0.75)],
        }
    }

    pub fn has_exact_solution(self) -> bool {
        matches!(
            self,
            CaseId::ScalarEx1 | CaseId::Nonhomog1dEx3 | CaseId::Nonsmooth1dEx4
        )
    }

    /// `(N_ref, h_ref)` of the default reference computation.
    pub fn default_reference(self) -> Option<(usize, f64)> {
        match self {
            CaseId::Homog1dEx2 | CaseId::Homog2dEx2 => Some((200, 1.0 / 128.0)),
            CaseId::Nonhomog1dEx3 | CaseId::Nonhomog2dEx3 => Some((200, 1.0 / 512.0)),
            _ => None,
        }
    }

    /// Ground truth used by default in error tables.
    pub fn default_truth(self) -> GroundTruth {
        match self.default_reference() {
            Some((n_nodes, h)) => GroundTruth::Reference { n_nodes, h },
            None => GroundTruth::Exact,
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = CimError;
    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CimError::InvalidParameter(format!("unknown case '{s}'")))
    }
}

/// What computed solutions are compared against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GroundTruth {
    /// Nodal interpolant (or value) of the closed-form solution.
    Exact,
    /// A computed solution with many nodes on a fine mesh.
    Reference { n_nodes: usize, h: f64 },
}

/// A fully specified experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentCase {
    pub id: CaseId,
    pub orders: FractionalOrders<f64>,
    pub theta: f64,
    pub t0: f64,
    pub lambda: f64,
    pub truth: GroundTruth,
}

impl ExperimentCase {
    /// Case with the standard window, `θ`, default `ε` and ground truth.
    pub fn new(id: CaseId, alpha: f64, beta: f64) -> Result<Self> {
        let orders = FractionalOrders::with_default_epsilon(alpha, beta, DEFAULT_THETA)?;
        Ok(Self {
            id,
            orders,
            theta: DEFAULT_THETA,
            t0: DEFAULT_T0,
            lambda: id.default_lambda(),
            truth: id.default_truth(),
        })
    }

    pub fn with_truth(mut self, truth: GroundTruth) -> Result<Self> {
        if truth == GroundTruth::Exact && !self.id.has_exact_solution() {
            return Err(CimError::MissingReference(format!(
                "{} has no closed-form solution",
                self.id
            )));
        }
        self.truth = truth;
        Ok(self)
    }

    pub fn table_time(&self) -> f64 {
        self.id.table_time()
    }

    /// The table time followed by [`WINDOW_SAMPLES`] equispaced window times.
    pub fn measurement_times(&self) -> Vec<f64> {
        let t1 = self.lambda * self.t0;
        let step = (t1 - self.t0) / (WINDOW_SAMPLES - 1) as f64;
        std::iter::once(self.table_time())
            .chain((0..WINDOW_SAMPLES).map(|i| {
                if i + 1 == WINDOW_SAMPLES {
                    t1
                } else {
                    self.t0 + step * i as f64
                }
            }))
            .collect()
    }

    /// Constant added back to the homogeneous-boundary part of the solution.
    pub fn lift(&self) -> f64 {
        match self.id {
            CaseId::Nonsmooth1dEx4 => 1.0,
            _ => 0.0,
        }
    }

    /// Closed-form solution, if there is one.
    pub fn exact(&self, x: &[f64], t: f64) -> Option<f64> {
        let bubble = |x: &[f64]| x.iter().map(|&s| s * (1.0 - s)).product::<f64>();
        match self.id {
            CaseId::ScalarEx1 => Some(1.0 + 1.5 * std::f64::consts::PI.sqrt() * t),
            CaseId::Nonhomog1dEx3 => Some(t * bubble(x)),
            CaseId::Nonsmooth1dEx4 => Some(1.0 + t.powf(1.0 / 6.0) * bubble(x)),
            _ => None,
        }
    }

    /// Source with the lift removed.
    pub fn source(&self) -> Result<PowerLawSource<f64>> {
        let FractionalOrders { alpha, beta, .. } = self.orders;
        let one: Profile<f64> = Arc::new(Constant(1.0));
        let bubble: Profile<f64> = Arc::new(Bubble);
        match self.id {
            CaseId::ScalarEx1 => {
                let c = 1.5 * std::f64::consts::PI.sqrt();
                PowerLawSource::zero()
                    .with_term(one.clone(), 1.0, 0.0)?
                    .with_term(one.clone(), c, 1.0)?
                    .with_term(one.clone(), c / gamma(2.0 - beta), 1.0 - beta)?
                    .with_term(one.clone(), 1.0 / gamma(alpha + 1.0), alpha)?
                    .with_term(one, c / gamma(alpha + 2.0), alpha + 1.0)
            }
            CaseId::Homog1dEx2 | CaseId::Homog2dEx2 => Ok(PowerLawSource::zero()),
            CaseId::Nonhomog1dEx3 => PowerLawSource::zero()
                .with_term(bubble, 1.0 / gamma(2.0 - beta), 1.0 - beta)?
                .with_term(one.clone(), 2.0, 1.0)?
                .with_term(one, 2.0 / gamma(alpha + 2.0), alpha + 1.0),
            CaseId::Nonhomog2dEx3 => PowerLawSource::zero().with_term(one, 1.0, 0.0),
            CaseId::Nonsmooth1dEx4 => {
                let g = gamma(7.0 / 6.0);
                let sixth = 1.0 / 6.0;
                PowerLawSource::zero()
                    .with_term(bubble, g / gamma(7.0 / 6.0 - beta), sixth - beta)?
                    .with_term(one.clone(), 2.0, sixth)?
                    .with_term(one, 2.0 * g / gamma(alpha + 7.0 / 6.0), alpha + sixth)
            }
        }
    }

    /// Initial value with the lift removed.
    pub fn initial_value(&self) -> Option<Profile<f64>> {
        match self.id {
            CaseId::Homog1dEx2 => Some(Arc::new(BoxIndicator::interval(
                std::f64::consts::PI.powi(3),
                0.0,
                2.0 / 3.0,
            ))),
            CaseId::Homog2dEx2 => Some(Arc::new(BoxIndicator::rectangle(
                1.0,
                (0.5, 1.0),
                (0.0, 1.0),
            ))),
            _ => None,
        }
    }

    fn scalar_initial_value(&self) -> f64 {
        match self.id {
            CaseId::ScalarEx1 => 1.0,
            _ => 0.0,
        }
    }
}

/// Discrete solution at one time: interior nodal values (one value for
/// the scalar case), lift included.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSample {
    pub t: f64,
    pub values: Vec<f64>,
}

/// Counters shared across a driver session.
#[derive(Debug, Default)]
pub struct Stats {
    /// Every resolvent evaluation.
    pub node_solves: Arc<AtomicUsize>,
    /// Resolvent evaluations spent on reference solutions.
    pub reference_solves: AtomicUsize,
}

impl Stats {
    pub fn node_solves(&self) -> usize {
        self.node_solves.load(Ordering::Relaxed)
    }

    pub fn reference_solves(&self) -> usize {
        self.reference_solves.load(Ordering::Relaxed)
    }
}

/// Knobs for a run.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub threads: Option<usize>,
    /// `0` disables the Chebyshev acceleration.
    pub n_cheb: usize,
    pub stats: Arc<Stats>,
}

impl RunOptions {
    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            threads: self.threads,
            counter: Some(self.stats.node_solves.clone()),
        }
    }
}

/// Mesh and system of the spatial discretization, `None` for the scalar case.
pub fn discretize(case: &ExperimentCase, h: f64) -> Result<Option<FemSystem<f64>>> {
    match case.id.dim() {
        0 => Ok(None),
        d => Ok(Some(assemble(Arc::new(build_mesh(d, h)?)))),
    }
}

/// Runs the contour method with `n_nodes` nodes and mesh size `h`
/// (ignored for the scalar case) at the case's measurement times.
pub fn run_case(
    case: &ExperimentCase,
    n_nodes: usize,
    h: f64,
    options: &RunOptions,
) -> Result<Vec<TimeSample>> {
    let times = case.measurement_times();
    run_case_at(case, n_nodes, h, &times, options)
}

/// As [`run_case`] at caller-chosen times inside the window.
pub fn run_case_at(
    case: &ExperimentCase,
    n_nodes: usize,
    h: f64,
    times: &[f64],
    options: &RunOptions,
) -> Result<Vec<TimeSample>> {
    let source = transform_source(&case.source()?);
    match discretize(case, h)? {
        None => {
            let data = ProblemData::scalar(case.scalar_initial_value(), source);
            solve_and_sample(case, n_nodes, &ScalarProblem, &data, times, options)
        }
        Some(system) => {
            let u0 = match case.initial_value() {
                Some(p) => system.l2_project(p.as_ref())?,
                None => vec![0.0; system.n()],
            };
            let data = ProblemData::projected(&system, u0, source)?;
            solve_and_sample(case, n_nodes, &system, &data, times, options)
        }
    }
}

fn solve_and_sample<R: Resolvent<f64>>(
    case: &ExperimentCase,
    n_nodes: usize,
    op: &R,
    data: &ProblemData<f64>,
    times: &[f64],
    options: &RunOptions,
) -> Result<Vec<TimeSample>> {
    let plan = make_plan(&case.orders, case.theta, case.t0, case.lambda, n_nodes)?;
    let solve_opts = options.solve_options();
    let nodes = if options.n_cheb > 0 {
        cim::accelerate(
            &plan,
            &case.orders,
            op,
            &[data],
            options.n_cheb,
            &solve_opts,
        )?
    } else {
        cim::solve_nodes(&plan, &case.orders, op, &[data], &solve_opts)?
    };
    let lift = case.lift();
    times
        .iter()
        .map(|&t| {
            let mut values = cim::evaluate(&nodes, t)?.swap_remove(0);
            if lift != 0.0 {
                for v in &mut values {
                    *v += lift;
                }
            }
            Ok(TimeSample { t, values })
        })
        .collect()
}

/// The closed-form solution sampled like [`run_case`] on mesh `h`.
pub fn exact_samples(case: &ExperimentCase, h: f64) -> Result<Vec<TimeSample>> {
    if case.exact(&[0.5, 0.5], 1.0).is_none() {
        return Err(CimError::MissingReference(format!(
            "{} has no closed-form solution",
            case.id
        )));
    }
    let mesh: Option<Mesh<f64>> = match case.id.dim() {
        0 => None,
        d => Some(build_mesh(d, h)?),
    };
    Ok(case
        .measurement_times()
        .into_iter()
        .map(|t| {
            let values = match &mesh {
                None => vec![case.exact(&[], t).expect("checked above")],
                Some(m) => m.nodal_interpolant(|x| case.exact(x, t).expect("checked above")),
            };
            TimeSample { t, values }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_ids_round_trip() {
        for id in CaseId::ALL {
            assert_eq!(id.as_str().parse::<CaseId>().unwrap(), id);
        }
        assert!("nope".parse::<CaseId>().is_err());
    }

    #[test]
    fn measurement_times_cover_window() {
        let c = ExperimentCase::new(CaseId::Homog1dEx2, 0.5, 0.5).unwrap();
        let t = c.measurement_times();
        assert_eq!(t.len(), 17);
        assert_eq!(t[0], 0.4);
        assert_eq!(t[1], 0.1);
        assert_eq!(t[16], 1.0);
    }

    #[test]
    fn exact_truth_rejected_without_formula() {
        let c = ExperimentCase::new(CaseId::Homog2dEx2, 0.5, 0.5).unwrap();
        assert!(c.with_truth(GroundTruth::Exact).is_err());
    }

    #[test]
    fn scalar_case_matches_closed_form() {
        let c = ExperimentCase::new(CaseId::ScalarEx1, 0.2, 0.77).unwrap();
        let s = run_case(&c, 60, 0.0, &RunOptions::default()).unwrap();
        let exact = 1.0 + 0.75 * std::f64::consts::PI.sqrt();
        assert!((s[0].values[0] - exact).abs() < 1e-12);
    }

    #[test]
    fn example_three_source_matches_closed_form() {
        let c = ExperimentCase::new(CaseId::Nonhomog1dEx3, 0.5, 0.5).unwrap();
        let src = c.source().unwrap();
        let (x, t): ([f64; 1], f64) = ([0.3], 0.7);
        let beta_term = 0.3 * 0.7 * t.powf(0.5) / gamma(1.5);
        let expected = beta_term + 2.0 * t + 2.0 * t.powf(1.5) / gamma(2.5);
        assert!((src.value(&x, t) - expected).abs() < 1e-14);
    }

    #[test]
    fn stats_count_node_solves() {
        let c = ExperimentCase::new(CaseId::ScalarEx1, 0.2, 0.77).unwrap();
        let opts = RunOptions::default();
        run_case(&c, 30, 0.0, &opts).unwrap();
        assert_eq!(opts.stats.node_solves(), 30);
        let accel = RunOptions {
            n_cheb: 8,
            ..Default::default()
        };
        run_case(&c, 30, 0.0, &accel).unwrap();
        assert_eq!(accel.stats.node_solves(), 9);
    }
}
