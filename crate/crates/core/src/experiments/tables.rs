//! Temporal and spatial error tables.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{
    discretize, exact_samples, run_case, run_case_at, CaseId, ExperimentCase, GroundTruth,
    ReferenceStore, RunOptions, TimeSample,
};
use crate::error::{CimError, Result};
use crate::fem::{FemSystem, Mesh};

/// The quantity varied along a table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    Nodes(usize),
    MeshSize(f64),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Param::Nodes(n) => write!(f, "{n}"),
            Param::MeshSize(h) => {
                let inv = 1.0 / h;
                if (inv - inv.round()).abs() < 1e-9 * inv {
                    write!(f, "1/{}", inv.round() as u64)
                } else {
                    write!(f, "{h}")
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub param: Param,
    pub error: f64,
    pub order: Option<f64>,
}

/// Errors for one order pair, one row per discretization parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorTable {
    pub case: CaseId,
    pub alpha: f64,
    pub beta: f64,
    pub t: f64,
    pub lambda: f64,
    /// The parameter held fixed (`h` for temporal tables, `N` for spatial).
    pub fixed: Param,
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    fn new(case: &ExperimentCase, t: f64, fixed: Param) -> Self {
        Self {
            case: case.id,
            alpha: case.orders.alpha,
            beta: case.orders.beta,
            t,
            lambda: case.lambda,
            fixed,
            rows: Vec::new(),
        }
    }

    /// Fills the order column with `log2(e_{i−1}/e_i)`.
    fn with_orders(mut self) -> Self {
        for i in 1..self.rows.len() {
            self.rows[i].order = Some(observed_order(self.rows[i - 1].error, self.rows[i].error));
        }
        self
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }

    /// CSV with header `param,error,order`; the order is empty where undefined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,error,order\n");
        for r in &self.rows {
            let order = r.order.map(|o| format!("{o:.4}")).unwrap_or_default();
            out.push_str(&format!("{},{:.6e},{}\n", r.param, r.error, order));
        }
        out
    }
}

/// `ln(e_coarse/e_fine)/ln 2`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).ln() / std::f64::consts::LN_2
}

/// Least-squares slope of `log10(error)` against `N`.
pub fn decay_rate(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|&(n, e)| (n as f64, e.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxy: f64 = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Ground truth sampled on its own mesh.
struct Truth {
    mesh: Option<Arc<Mesh<f64>>>,
    system: Option<FemSystem<f64>>,
    samples: Arc<Vec<TimeSample>>,
}

fn mesh_of(system: &Option<FemSystem<f64>>) -> Option<Arc<Mesh<f64>>> {
    system.as_ref().and_then(|s| s.mesh().cloned())
}

fn truth_for(
    case: &ExperimentCase,
    h: f64,
    store: &ReferenceStore,
    options: &RunOptions,
) -> Result<Truth> {
    let (samples, h_truth) = match case.truth {
        GroundTruth::Exact => (Arc::new(exact_samples(case, h)?), h),
        GroundTruth::Reference { h: h_ref, .. } => {
            if case.id.dim() > 0 && h_ref > h * (1.0 + 1e-12) {
                return Err(CimError::MissingReference(format!(
                    "reference mesh h = {h_ref} is coarser than h = {h}"
                )));
            }
            (store.reference_solution(case, options)?, h_ref)
        }
    };
    let system = discretize(case, h_truth)?;
    Ok(Truth {
        mesh: mesh_of(&system),
        system,
        samples,
    })
}

/// `‖u − v‖` with `u` on `u_mesh` carried to the finer `v_mesh` first.
fn distance(
    case: &ExperimentCase,
    u: &[f64],
    u_mesh: Option<&Mesh<f64>>,
    v: &[f64],
    v_mesh: Option<&Mesh<f64>>,
    v_system: Option<&FemSystem<f64>>,
) -> f64 {
    match (u_mesh, v_mesh, v_system) {
        (Some(um), Some(vm), Some(vs)) => {
            let diff: Vec<f64> = if um.cells() == vm.cells() {
                u.iter().zip(v).map(|(a, b)| a - b).collect()
            } else {
                let lift = case.lift();
                let shifted: Vec<f64> = u.iter().map(|x| x - lift).collect();
                um.interpolate_to(&shifted, vm)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a + lift - b)
                    .collect()
            };
            vs.l2_norm(&diff)
        }
        _ => (u[0] - v[0]).abs(),
    }
}

/// `Err_τ(N)` at the table time and as a maximum over the window samples.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalTables {
    pub at_t: ErrorTable,
    pub window_max: ErrorTable,
}

/// Temporal errors for each `N` at fixed mesh size `h`.
pub fn temporal_error_table(
    case: &ExperimentCase,
    n_values: &[usize],
    h: f64,
    store: &ReferenceStore,
    options: &RunOptions,
) -> Result<TemporalTables> {
    let truth = truth_for(case, h, store, options)?;
    let test_mesh = match case.id.dim() {
        0 => None,
        _ => mesh_of(&discretize(case, h)?),
    };
    let fixed = Param::MeshSize(h);
    let mut at_t = ErrorTable::new(case, case.table_time(), fixed);
    let mut window = ErrorTable::new(case, case.table_time(), fixed);
    for &n in n_values {
        let samples = run_case(case, n, h, options)?;
        let errs: Vec<f64> = samples
            .iter()
            .zip(truth.samples.iter())
            .map(|(s, r)| {
                distance(
                    case,
                    &s.values,
                    test_mesh.as_deref(),
                    &r.values,
                    truth.mesh.as_deref(),
                    truth.system.as_ref(),
                )
            })
            .collect();
        at_t.rows.push(ErrorRow {
            param: Param::Nodes(n),
            error: errs[0],
            order: None,
        });
        window.rows.push(ErrorRow {
            param: Param::Nodes(n),
            error: errs.iter().copied().fold(0.0, f64::max),
            order: None,
        });
    }
    Ok(TemporalTables {
        at_t,
        window_max: window,
    })
}

/// How spatial errors are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SpatialMode {
    /// `‖u_h − u_{h/2}‖` on the finer mesh, same `N`.
    #[default]
    Successive,
    /// Against the case's ground truth (exact or reference).
    Fixed,
}

/// Solutions at the table time keyed by cells per axis.
type SolutionsByMesh = BTreeMap<usize, (Arc<Mesh<f64>>, FemSystem<f64>, Vec<f64>)>;

/// Spatial errors at the table time for each `h`, with observed orders.
pub fn spatial_error_table(
    case: &ExperimentCase,
    h_values: &[f64],
    n_nodes: usize,
    mode: SpatialMode,
    store: &ReferenceStore,
    options: &RunOptions,
) -> Result<ErrorTable> {
    if case.id.dim() == 0 {
        return Err(CimError::InvalidParameter(
            "the scalar case has no spatial discretization".into(),
        ));
    }
    let t = case.table_time();
    let mut table = ErrorTable::new(case, t, Param::Nodes(n_nodes));
    let mut solved = SolutionsByMesh::new();
    let solve = |solved: &mut SolutionsByMesh, h: f64| -> Result<usize> {
        let cells = (1.0 / h).round() as usize;
        if let Entry::Vacant(slot) = solved.entry(cells) {
            let system = discretize(case, h)?.expect("spatial case");
            let mesh = system.mesh().cloned().expect("mesh-backed");
            let u = run_case_at(case, n_nodes, h, &[t], options)?
                .swap_remove(0)
                .values;
            slot.insert((mesh, system, u));
        }
        Ok(cells)
    };
    match mode {
        SpatialMode::Successive => {
            for &h in h_values {
                let coarse = solve(&mut solved, h)?;
                let fine = solve(&mut solved, h / 2.0)?;
                let (cm, _, cu) = &solved[&coarse];
                let (fm, fs, fu) = &solved[&fine];
                let err = distance(case, cu, Some(cm), fu, Some(fm), Some(fs));
                table.rows.push(ErrorRow {
                    param: Param::MeshSize(h),
                    error: err,
                    order: None,
                });
            }
        }
        SpatialMode::Fixed => {
            for &h in h_values {
                let truth = truth_for(case, h, store, options)?;
                let cells = solve(&mut solved, h)?;
                let (m, _, u) = &solved[&cells];
                let err = distance(
                    case,
                    u,
                    Some(m),
                    &truth.samples[0].values,
                    truth.mesh.as_deref(),
                    truth.system.as_ref(),
                );
                table.rows.push(ErrorRow {
                    param: Param::MeshSize(h),
                    error: err,
                    order: None,
                });
            }
        }
    }
    Ok(table.with_orders())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_format() {
        assert_eq!(Param::Nodes(40).to_string(), "40");
        assert_eq!(Param::MeshSize(1.0 / 32.0).to_string(), "1/32");
        assert_eq!(Param::MeshSize(0.3).to_string(), "0.3");
    }

    #[test]
    fn csv_layout_and_orders() {
        let case = ExperimentCase::new(CaseId::Homog1dEx2, 0.5, 0.5).unwrap();
        let mut t = ErrorTable::new(&case, 0.4, Param::Nodes(200));
        for (h, e) in [
            (1.0 / 32.0, 4e-6),
            (1.0 / 64.0, 1e-6),
            (1.0 / 128.0, 2.5e-7),
        ] {
            t.rows.push(ErrorRow {
                param: Param::MeshSize(h),
                error: e,
                order: None,
            });
        }
        let t = t.with_orders();
        assert_eq!(
            t.to_csv(),
            "param,error,order\n1/32,4.000000e-6,\n1/64,1.000000e-6,2.0000\n1/128,2.500000e-7,2.0000\n"
        );
        for (i, o) in t.orders().iter().enumerate() {
            assert_eq!(*o, observed_order(t.rows[i].error, t.rows[i + 1].error));
        }
    }

    #[test]
    fn decay_rate_of_exact_exponential() {
        let pts: Vec<(usize, f64)> = (1..6)
            .map(|k| (10 * k, 10f64.powf(-0.3 * 10.0 * k as f64)))
            .collect();
        assert!((decay_rate(&pts).unwrap() + 0.3).abs() < 1e-12);
        assert!(decay_rate(&pts[..1]).is_none());
    }

    #[test]
    fn self_comparison_is_zero() {
        let case = ExperimentCase::new(CaseId::Homog1dEx2, 0.5, 0.5)
            .unwrap()
            .with_truth(GroundTruth::Reference {
                n_nodes: 30,
                h: 1.0 / 16.0,
            })
            .unwrap();
        let store = ReferenceStore::in_memory();
        let opts = RunOptions::default();
        let t = temporal_error_table(&case, &[30], 1.0 / 16.0, &store, &opts).unwrap();
        assert_eq!(t.at_t.rows[0].error, 0.0);
        assert_eq!(t.window_max.rows[0].error, 0.0);
    }

    #[test]
    fn reference_coarser_than_test_mesh_is_missing() {
        let case = ExperimentCase::new(CaseId::Homog1dEx2, 0.5, 0.5).unwrap();
        let store = ReferenceStore::in_memory();
        let r = temporal_error_table(&case, &[20], 1.0 / 256.0, &store, &RunOptions::default());
        assert!(matches!(r, Err(CimError::MissingReference(_))));
    }

    #[test]
    fn scalar_temporal_table_decays() {
        let case = ExperimentCase::new(CaseId::ScalarEx1, 0.2, 0.77).unwrap();
        let store = ReferenceStore::in_memory();
        let t = temporal_error_table(&case, &[10, 20, 30], 0.0, &store, &RunOptions::default())
            .unwrap();
        let e = t.at_t.errors();
        assert!(e[0] > e[1] && e[1] > e[2]);
        assert!(t
            .window_max
            .rows
            .iter()
            .zip(&t.at_t.rows)
            .all(|(w, a)| w.error >= a.error));
    }
}
