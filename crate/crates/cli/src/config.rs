//! Command-line flags, the optional `key=value` config file, and the merged
//! run configuration.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cim::contour::{DEFAULT_T0, DEFAULT_THETA};
use cim::experiments::{CaseId, SpatialMode};

pub const CACHE_ENV: &str = "CIM_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".cim-cache";

#[derive(Debug, Parser)]
#[command(
    name = "cim",
    version,
    about = "Contour-integral solver for time-fractional integro-differential equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one case and write the nodal solution at the requested times.
    Solve(Flags),
    /// Temporal error table: error against the ground truth for each N.
    TableTemporal(Flags),
    /// Spatial error table with observed orders for each h.
    TableSpatial(Flags),
    /// Compute and cache reference solutions.
    Reference(Flags),
    /// Run the built-in property checks.
    Check(Flags),
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::Solve(f)
            | Command::TableTemporal(f)
            | Command::TableSpatial(f)
            | Command::Reference(f)
            | Command::Check(f) => f,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::TableTemporal(_) => "table-temporal",
            Command::TableSpatial(_) => "table-spatial",
            Command::Reference(_) => "reference",
            Command::Check(_) => "check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Successive,
    Fixed,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Case id, e.g. scalar_ex1 or homog_1d_ex2.
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of contour nodes.
    #[arg(long = "N")]
    pub n_nodes: Option<usize>,
    /// Chebyshev interpolation degree; 0 disables acceleration.
    #[arg(long = "n-cheb")]
    pub n_cheb: Option<usize>,
    /// Mesh size, as a decimal or a fraction like 1/128.
    #[arg(long)]
    pub h: Option<String>,
    /// Comma-separated evaluation times.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long = "N-list")]
    pub n_list: Option<String>,
    #[arg(long = "h-list")]
    pub h_list: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long = "cache-dir")]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads for node solves; 0 uses every core.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Measure against the closed-form solution.
    #[arg(long, conflicts_with = "reference")]
    pub exact: bool,
    /// Measure against a computed reference solution.
    #[arg(long)]
    pub reference: bool,
    #[arg(long = "ref-N")]
    pub ref_n: Option<usize>,
    #[arg(long = "ref-h")]
    pub ref_h: Option<String>,
    #[arg(long = "spatial-mode", value_enum)]
    pub spatial_mode: Option<ModeArg>,
    /// Print solve counters to stderr.
    #[arg(long)]
    pub verbose: bool,
}

/// A bad flag or config value.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

type Usage<T> = Result<T, UsageError>;

/// Which ground truth the tables use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruthChoice {
    Default,
    Exact,
    Reference,
}

/// Fully merged configuration of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub case: Option<CaseId>,
    /// `None` means every tabulated order pair of the case.
    pub orders: Option<(f64, f64)>,
    pub epsilon: Option<f64>,
    pub theta: f64,
    pub t0: f64,
    pub lambda: Option<f64>,
    pub n_nodes: Option<usize>,
    pub n_cheb: usize,
    pub h: Option<f64>,
    pub times: Vec<f64>,
    pub n_list: Vec<usize>,
    pub h_list: Vec<f64>,
    pub output: Option<PathBuf>,
    pub cache_dir: PathBuf,
    pub threads: Option<usize>,
    pub truth: TruthChoice,
    pub ref_n: Option<usize>,
    pub ref_h: Option<f64>,
    pub spatial_mode: SpatialMode,
    pub verbose: bool,
}

/// Parses `1/128`, `0.25` or `1e-3`.
pub fn parse_size(flag: &str, s: &str) -> Usage<f64> {
    let s = s.trim();
    let bad = || {
        UsageError(format!(
            "--{flag}: cannot parse '{s}' as a number or fraction"
        ))
    };
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            n / d
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if !v.is_finite() || v <= 0.0 {
        return Err(UsageError(format!("--{flag}: '{s}' must be positive")));
    }
    Ok(v)
}

fn parse_list<T>(flag: &str, s: &str, item: impl Fn(&str) -> Usage<T>) -> Usage<Vec<T>> {
    let out = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(item)
        .collect::<Usage<Vec<T>>>()?;
    if out.is_empty() {
        return Err(UsageError(format!("--{flag}: empty list")));
    }
    Ok(out)
}

fn parse_num<T: FromStr>(flag: &str, s: &str) -> Usage<T> {
    s.trim()
        .parse()
        .map_err(|_| UsageError(format!("--{flag}: cannot parse '{}'", s.trim())))
}

/// Reads a flat `key=value` file. Blank lines and `#` comments are skipped;
/// keys use the long flag names.
pub fn read_config_file(path: &Path) -> Usage<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("--config: cannot read {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            UsageError(format!(
                "--config: line {} of {} is not key=value",
                i + 1,
                path.display()
            ))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

const CONFIG_KEYS: &[&str] = &[
    "case",
    "alpha",
    "beta",
    "epsilon",
    "theta",
    "t0",
    "lambda",
    "N",
    "n-cheb",
    "h",
    "t",
    "N-list",
    "h-list",
    "output",
    "cache-dir",
    "threads",
    "exact",
    "reference",
    "ref-N",
    "ref-h",
    "spatial-mode",
    "verbose",
];

/// Merges flags over the config file over defaults. `env_cache` is the
/// value of `CIM_CACHE_DIR`, which beats the config file but not the flag.
pub fn resolve(command: &Command, env_cache: Option<String>) -> Usage<RunConfig> {
    let f = command.flags();
    let file = match &f.config {
        Some(p) => read_config_file(p)?,
        None => HashMap::new(),
    };
    if let Some(k) = file.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(UsageError(format!("--config: unknown key '{k}'")));
    }
    // Flag text if given, else the config value.
    let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());
    let num = |v: Option<f64>, key: &str| -> Usage<Option<f64>> {
        match v {
            Some(v) => Ok(Some(v)),
            None => file.get(key).map(|s| parse_num(key, s)).transpose(),
        }
    };
    let count = |v: Option<usize>, key: &str| -> Usage<Option<usize>> {
        match v {
            Some(v) => Ok(Some(v)),
            None => file.get(key).map(|s| parse_num(key, s)).transpose(),
        }
    };
    let switch = |v: bool, key: &str| -> Usage<bool> {
        if v {
            return Ok(true);
        }
        file.get(key).map_or(Ok(false), |s| parse_num(key, s))
    };

    let case = pick(f.case.clone(), "case")
        .map(|s| {
            CaseId::from_str(&s).map_err(|_| UsageError(format!("--case: unknown case '{s}'")))
        })
        .transpose()?;
    let orders = match (num(f.alpha, "alpha")?, num(f.beta, "beta")?) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        (Some(_), None) => return Err(UsageError("--beta is required with --alpha".into())),
        (None, Some(_)) => return Err(UsageError("--alpha is required with --beta".into())),
    };
    let exact = switch(f.exact, "exact")?;
    let reference = switch(f.reference, "reference")?;
    if exact && reference {
        return Err(UsageError("--exact conflicts with --reference".into()));
    }
    let truth = match (exact, reference) {
        (true, _) => TruthChoice::Exact,
        (_, true) => TruthChoice::Reference,
        _ => TruthChoice::Default,
    };
    let threads = count(f.threads, "threads")?;
    let spatial_mode = match f.spatial_mode {
        Some(ModeArg::Successive) => SpatialMode::Successive,
        Some(ModeArg::Fixed) => SpatialMode::Fixed,
        None => match file.get("spatial-mode").map(String::as_str) {
            None | Some("successive") => SpatialMode::Successive,
            Some("fixed") => SpatialMode::Fixed,
            Some(other) => {
                return Err(UsageError(format!(
                    "--spatial-mode: unknown mode '{other}'"
                )))
            }
        },
    };
    let cache_dir = f
        .cache_dir
        .clone()
        .or_else(|| env_cache.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| file.get("cache-dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));

    let cfg = RunConfig {
        command: command.name(),
        case,
        orders,
        epsilon: num(f.epsilon, "epsilon")?,
        theta: num(f.theta, "theta")?.unwrap_or(DEFAULT_THETA),
        t0: num(f.t0, "t0")?.unwrap_or(DEFAULT_T0),
        lambda: num(f.lambda, "lambda")?,
        n_nodes: count(f.n_nodes, "N")?,
        n_cheb: count(f.n_cheb, "n-cheb")?.unwrap_or(0),
        h: pick(f.h.clone(), "h")
            .map(|s| parse_size("h", &s))
            .transpose()?,
        times: pick(f.t.clone(), "t")
            .map(|s| parse_list("t", &s, |p| parse_num("t", p)))
            .transpose()?
            .unwrap_or_default(),
        n_list: pick(f.n_list.clone(), "N-list")
            .map(|s| parse_list("N-list", &s, |p| parse_num("N-list", p)))
            .transpose()?
            .unwrap_or_default(),
        h_list: pick(f.h_list.clone(), "h-list")
            .map(|s| parse_list("h-list", &s, |p| parse_size("h-list", p)))
            .transpose()?
            .unwrap_or_default(),
        output: f
            .output
            .clone()
            .or_else(|| file.get("output").map(PathBuf::from)),
        cache_dir,
        threads: threads.filter(|&n| n > 0),
        truth,
        ref_n: count(f.ref_n, "ref-N")?,
        ref_h: pick(f.ref_h.clone(), "ref-h")
            .map(|s| parse_size("ref-h", &s))
            .transpose()?,
        spatial_mode,
        verbose: switch(f.verbose, "verbose")?,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Usage<()> {
    if cfg.command != "check" && cfg.case.is_none() {
        return Err(UsageError("--case is required".into()));
    }
    if let Some((a, b)) = cfg.orders {
        for (flag, v) in [("alpha", a), ("beta", b)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(UsageError(format!("--{flag}: {v} is not in (0,1)")));
            }
        }
    }
    if cfg.n_nodes == Some(0) || cfg.n_list.contains(&0) || cfg.ref_n == Some(0) {
        return Err(UsageError("--N: node counts must be positive".into()));
    }
    if !(cfg.theta > 0.0 && cfg.theta < std::f64::consts::FRAC_PI_2) {
        return Err(UsageError(format!(
            "--theta: {} is not in (0, pi/2)",
            cfg.theta
        )));
    }
    if !(cfg.t0 > 0.0) {
        return Err(UsageError(format!("--t0: {} must be positive", cfg.t0)));
    }
    if let Some(l) = cfg.lambda {
        if !(l > 1.0) {
            return Err(UsageError(format!("--lambda: {l} must exceed 1")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Usage<RunConfig> {
        let cli = Cli::try_parse_from(std::iter::once("cim").chain(args.iter().copied()))
            .map_err(|e| UsageError(e.to_string()))?;
        resolve(&cli.command, None)
    }

    #[test]
    fn solve_fills_defaults() {
        let cfg = parse(&[
            "solve",
            "--case",
            "scalar_ex1",
            "--alpha",
            "0.2",
            "--beta",
            "0.77",
            "--N",
            "60",
            "--t",
            "0.5",
        ])
        .unwrap();
        assert_eq!(cfg.case, Some(CaseId::ScalarEx1));
        assert_eq!(cfg.orders, Some((0.2, 0.77)));
        assert_eq!(cfg.theta, 0.6767);
        assert_eq!(cfg.t0, 0.1);
        assert_eq!(cfg.lambda, None);
        assert_eq!(cfg.n_nodes, Some(60));
        assert_eq!(cfg.times, vec![0.5]);
        assert_eq!(cfg.n_cheb, 0);
        assert_eq!(cfg.threads, None);
        assert_eq!(cfg.cache_dir, PathBuf::from(DEFAULT_CACHE_DIR));
    }

    #[test]
    fn fractions_in_mesh_lists() {
        let cfg = parse(&[
            "table-spatial",
            "--case",
            "homog_1d_ex2",
            "--h-list",
            "1/32,1/64,1/128,1/256",
            "--N",
            "200",
        ])
        .unwrap();
        assert_eq!(
            cfg.h_list,
            vec![1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]
        );
        assert_eq!(cfg.orders, None);
        assert_eq!(cfg.spatial_mode, SpatialMode::Successive);
    }

    #[test]
    fn exact_and_reference_conflict() {
        let err = parse(&[
            "table-temporal",
            "--case",
            "nonsmooth_1d_ex4",
            "--exact",
            "--reference",
        ])
        .unwrap_err();
        assert!(
            err.0.contains("--exact") || err.0.contains("--reference"),
            "{err}"
        );
    }

    #[test]
    fn offending_flag_is_named() {
        let err = parse(&["solve", "--case", "scalar_ex1", "--h", "1/0"]).unwrap_err();
        assert!(err.0.starts_with("--h:"), "{err}");
        let err = parse(&["solve", "--case", "nope"]).unwrap_err();
        assert!(err.0.starts_with("--case:"), "{err}");
        let err = parse(&["solve", "--case", "scalar_ex1", "--alpha", "0.3"]).unwrap_err();
        assert!(err.0.contains("--beta"), "{err}");
        let err = parse(&["solve"]).unwrap_err();
        assert!(err.0.contains("--case"), "{err}");
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# table run\ncase = homog_1d_ex2\nlambda=20\nN=80\nthreads=2\nexact=false\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let cfg = parse(&["solve", "--config", p, "--N", "40"]).unwrap();
        assert_eq!(cfg.case, Some(CaseId::Homog1dEx2));
        assert_eq!(cfg.lambda, Some(20.0));
        assert_eq!(cfg.n_nodes, Some(40));
        assert_eq!(cfg.threads, Some(2));
        std::fs::write(&path, "bogus=1\n").unwrap();
        assert!(parse(&["solve", "--config", p])
            .unwrap_err()
            .0
            .contains("bogus"));
    }

    #[test]
    fn cache_dir_precedence() {
        let cli = Cli::try_parse_from(["cim", "reference", "--case", "homog_1d_ex2"]).unwrap();
        let cfg = resolve(&cli.command, Some("/tmp/env-cache".into())).unwrap();
        assert_eq!(cfg.cache_dir, PathBuf::from("/tmp/env-cache"));
        let cli = Cli::try_parse_from([
            "cim",
            "reference",
            "--case",
            "homog_1d_ex2",
            "--cache-dir",
            "here",
        ])
        .unwrap();
        let cfg = resolve(&cli.command, Some("/tmp/env-cache".into())).unwrap();
        assert_eq!(cfg.cache_dir, PathBuf::from("here"));
    }

    #[test]
    fn zero_threads_means_automatic() {
        let cfg = parse(&["check", "--threads", "0"]).unwrap();
        assert_eq!(cfg.threads, None);
    }
}
