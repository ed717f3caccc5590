mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;

use cim::checks;
use cim::contour::FractionalOrders;
use cim::experiments::{
    discretize, run_case_at, spatial_error_table, temporal_error_table, CaseId, ErrorTable,
    ExperimentCase, GroundTruth, ReferenceStore, RunOptions, Stats,
};
use cim::CimError;

use config::{resolve, Cli, RunConfig, TruthChoice, UsageError, CACHE_ENV};

const DEFAULT_N_LIST: [usize; 5] = [20, 40, 60, 80, 100];
const DEFAULT_SOLVE_NODES: usize = 100;
const DEFAULT_SPATIAL_NODES: usize = 200;
const DEFAULT_REFERENCE_NODES: usize = 200;

enum Failure {
    Usage(String),
    Lib(CimError),
    Checks(usize),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<CimError> for Failure {
    fn from(e: CimError) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    /// `(exit code, kind)`.
    fn classify(&self) -> (u8, &'static str) {
        match self {
            Failure::Usage(_) => (2, "usage"),
            Failure::Checks(_) => (1, "check"),
            Failure::Lib(e) => match e {
                CimError::InvalidParameter(_)
                | CimError::NonPositiveStrip { .. }
                | CimError::DomainError { .. }
                | CimError::BadMeshSize { .. }
                | CimError::OutOfWindow { .. }
                | CimError::MissingReference(_) => (2, "usage"),
                CimError::SingularPoint
                | CimError::ResolventSingular { .. }
                | CimError::SolveFailure { .. } => (3, "solve"),
                CimError::CacheCorrupt { .. } => (4, "cache"),
                CimError::Io(_) => (4, "io"),
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
            Failure::Checks(n) => format!("{n} checks failed"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let first = e.to_string().lines().next().unwrap_or_default().to_string();
            return report(Failure::Usage(
                first.trim_start_matches("error: ").to_string(),
            ));
        }
    };
    let outcome = resolve(&cli.command, std::env::var(CACHE_ENV).ok())
        .map_err(Failure::from)
        .and_then(|cfg| dispatch(&cfg));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(failure: Failure) -> ExitCode {
    let (code, kind) = failure.classify();
    let message = failure.message().replace('"', "'");
    eprintln!("error: code={code} kind={kind} message=\"{message}\"");
    ExitCode::from(code)
}

fn dispatch(cfg: &RunConfig) -> Result<(), Failure> {
    let stats = Arc::new(Stats::default());
    let opts = RunOptions {
        threads: cfg.threads,
        n_cheb: cfg.n_cheb,
        stats: stats.clone(),
    };
    let result = match cfg.command {
        "check" => return run_check(),
        "solve" => run_solve(cfg, &opts),
        "table-temporal" => run_temporal(cfg, &opts),
        "table-spatial" => run_spatial(cfg, &opts),
        "reference" => run_reference(cfg, &opts),
        other => unreachable!("unknown command {other}"),
    };
    if cfg.verbose {
        eprintln!(
            "node_solves={} reference_solves={}",
            stats.node_solves(),
            stats.reference_solves()
        );
    }
    result
}

fn case_id(cfg: &RunConfig) -> CaseId {
    cfg.case.expect("validated")
}

fn order_pairs(cfg: &RunConfig) -> Vec<(f64, f64)> {
    match cfg.orders {
        Some(p) => vec![p],
        None => case_id(cfg).table_pairs().to_vec(),
    }
}

/// Mesh size used when `--h` is absent.
fn default_h(id: CaseId) -> f64 {
    match id {
        CaseId::ScalarEx1 => 0.5,
        CaseId::Nonsmooth1dEx4 => 1.0 / 1024.0,
        CaseId::Homog1dEx2 | CaseId::Nonhomog1dEx3 => 1.0 / 128.0,
        CaseId::Homog2dEx2 | CaseId::Nonhomog2dEx3 => 1.0 / 64.0,
    }
}

fn default_h_list(id: CaseId) -> Vec<f64> {
    let first = if id.dim() == 2 { 4 } else { 5 };
    (first..first + 4).map(|k| 0.5f64.powi(k)).collect()
}

fn build_case(
    cfg: &RunConfig,
    (alpha, beta): (f64, f64),
    test_h: f64,
) -> Result<ExperimentCase, Failure> {
    let id = case_id(cfg);
    let mut case = ExperimentCase::new(id, alpha, beta)?;
    case.theta = cfg.theta;
    case.t0 = cfg.t0;
    case.orders = match cfg.epsilon {
        Some(eps) => FractionalOrders::new(alpha, beta, eps)?,
        None => FractionalOrders::with_default_epsilon(alpha, beta, cfg.theta)?,
    };
    if let Some(l) = cfg.lambda {
        case.lambda = l;
    }
    let default_ref = id.default_reference();
    let reference = |fallback: (usize, f64)| GroundTruth::Reference {
        n_nodes: cfg.ref_n.unwrap_or(fallback.0),
        h: cfg.ref_h.unwrap_or(fallback.1),
    };
    let truth = match cfg.truth {
        TruthChoice::Exact => GroundTruth::Exact,
        TruthChoice::Reference => {
            reference(default_ref.unwrap_or((DEFAULT_REFERENCE_NODES, test_h)))
        }
        TruthChoice::Default => match case.truth {
            GroundTruth::Reference { n_nodes, h } => reference((n_nodes, h)),
            GroundTruth::Exact if cfg.ref_n.is_some() || cfg.ref_h.is_some() => {
                reference((DEFAULT_REFERENCE_NODES, test_h))
            }
            GroundTruth::Exact => GroundTruth::Exact,
        },
    };
    Ok(case.with_truth(truth)?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(CimError::from)?;
            }
            std::fs::write(p, text).map_err(CimError::from)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// `out.csv` becomes `out.window.csv`.
fn window_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned());
    let name = match ext {
        Some(e) => format!("{stem}.window.{e}"),
        None => format!("{stem}.window"),
    };
    path.with_file_name(name)
}

fn tables_csv(tables: &[ErrorTable]) -> String {
    let mut out = String::from("alpha,beta,param,error,order\n");
    for t in tables {
        for line in t.to_csv().lines().skip(1) {
            let _ = writeln!(out, "{},{},{line}", t.alpha, t.beta);
        }
    }
    out
}

fn run_check() -> Result<(), Failure> {
    let outcomes = checks::run_all();
    for c in &outcomes {
        println!("{c}");
    }
    match outcomes.iter().filter(|c| !c.passed).count() {
        0 => Ok(()),
        n => Err(Failure::Checks(n)),
    }
}

fn run_solve(cfg: &RunConfig, opts: &RunOptions) -> Result<(), Failure> {
    let id = case_id(cfg);
    let pair = order_pairs(cfg)[0];
    let h = cfg.h.unwrap_or_else(|| default_h(id));
    let case = build_case(cfg, pair, h)?;
    let times = if cfg.times.is_empty() {
        vec![case.table_time()]
    } else {
        cfg.times.clone()
    };
    let n = cfg.n_nodes.unwrap_or(DEFAULT_SOLVE_NODES);
    let samples = run_case_at(&case, n, h, &times, opts)?;
    let mut out = String::new();
    match discretize(&case, h)? {
        None => {
            out.push_str("t,u\n");
            for s in &samples {
                let _ = writeln!(out, "{:.16e},{:.16e}", s.t, s.values[0]);
            }
        }
        Some(system) => {
            let mesh = system.mesh().expect("mesh-backed system").clone();
            out.push_str(if mesh.dim() == 1 {
                "t,x,u\n"
            } else {
                "t,x,y,u\n"
            });
            for s in &samples {
                for (k, v) in s.values.iter().enumerate() {
                    let p = mesh.interior_point(k);
                    if mesh.dim() == 1 {
                        let _ = writeln!(out, "{:.16e},{:.16e},{v:.16e}", s.t, p[0]);
                    } else {
                        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{v:.16e}", s.t, p[0], p[1]);
                    }
                }
            }
        }
    }
    write_output(cfg.output.as_deref(), &out)
}

fn run_temporal(cfg: &RunConfig, opts: &RunOptions) -> Result<(), Failure> {
    let id = case_id(cfg);
    let h = cfg.h.unwrap_or_else(|| default_h(id));
    let n_list = if cfg.n_list.is_empty() {
        DEFAULT_N_LIST.to_vec()
    } else {
        cfg.n_list.clone()
    };
    let store = ReferenceStore::at(&cfg.cache_dir);
    let mut at_t = Vec::new();
    let mut window = Vec::new();
    for pair in order_pairs(cfg) {
        let case = build_case(cfg, pair, h)?;
        let tables = temporal_error_table(&case, &n_list, h, &store, opts)?;
        at_t.push(tables.at_t);
        window.push(tables.window_max);
    }
    match cfg.output.as_deref() {
        Some(path) => {
            write_output(Some(path), &tables_csv(&at_t))?;
            write_output(Some(&window_path(path)), &tables_csv(&window))
        }
        None => {
            print!("{}", tables_csv(&at_t));
            println!("# window maximum");
            print!("{}", tables_csv(&window));
            Ok(())
        }
    }
}

fn run_spatial(cfg: &RunConfig, opts: &RunOptions) -> Result<(), Failure> {
    let id = case_id(cfg);
    if id.dim() == 0 {
        return Err(Failure::Usage(
            "--case: the scalar case has no spatial discretization".into(),
        ));
    }
    let h_list = if cfg.h_list.is_empty() {
        default_h_list(id)
    } else {
        cfg.h_list.clone()
    };
    let finest = h_list.iter().copied().fold(f64::INFINITY, f64::min);
    let n = cfg.n_nodes.unwrap_or(DEFAULT_SPATIAL_NODES);
    let store = ReferenceStore::at(&cfg.cache_dir);
    let mut tables = Vec::new();
    for pair in order_pairs(cfg) {
        let case = build_case(cfg, pair, finest)?;
        tables.push(spatial_error_table(
            &case,
            &h_list,
            n,
            cfg.spatial_mode,
            &store,
            opts,
        )?);
    }
    write_output(cfg.output.as_deref(), &tables_csv(&tables))
}

fn run_reference(cfg: &RunConfig, opts: &RunOptions) -> Result<(), Failure> {
    let id = case_id(cfg);
    let store = ReferenceStore::at(&cfg.cache_dir);
    let h = cfg.h.unwrap_or_else(|| default_h(id));
    let forced = RunConfig {
        truth: TruthChoice::Reference,
        ..cfg.clone()
    };
    for pair in order_pairs(cfg) {
        let case = build_case(&forced, pair, h)?;
        store.reference_solution(&case, opts)?;
        let GroundTruth::Reference { n_nodes, h } = case.truth else {
            unreachable!("reference truth forced")
        };
        let key = ReferenceStore::key(&case, n_nodes, h);
        let path = store.path_for(&case, &key).expect("store has a directory");
        println!("{}", path.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        let code = |e: CimError| Failure::Lib(e).classify().0;
        assert_eq!(code(CimError::InvalidParameter("x".into())), 2);
        assert_eq!(code(CimError::BadMeshSize { h: 0.3 }), 2);
        assert_eq!(
            code(CimError::SolveFailure {
                node: 3,
                re: 1.0,
                im: 2.0,
                reason: "zero pivot".into()
            }),
            3
        );
        assert_eq!(code(CimError::SingularPoint), 3);
        assert_eq!(
            code(CimError::CacheCorrupt {
                path: "p".into(),
                reason: "r".into()
            }),
            4
        );
        assert_eq!(Failure::Usage("u".into()).classify(), (2, "usage"));
    }

    #[test]
    fn window_file_sits_next_to_output() {
        assert_eq!(
            window_path(Path::new("out/t1.csv")),
            PathBuf::from("out/t1.window.csv")
        );
        assert_eq!(window_path(Path::new("t1")), PathBuf::from("t1.window"));
    }

    #[test]
    fn default_mesh_lists_follow_dimension() {
        assert_eq!(
            default_h_list(CaseId::Homog1dEx2),
            vec![1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]
        );
        assert_eq!(default_h_list(CaseId::Nonhomog2dEx3)[0], 1.0 / 16.0);
    }
}
