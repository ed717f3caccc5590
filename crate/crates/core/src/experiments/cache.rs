//! Reference solutions and their on-disk cache.
//!
//! A cache file is plain text: the header `#cim-cache v1 <key>` and one line
//! `t,v1,v2,...` per measurement time, every number printed with 17
//! significant digits so that reloading is bit-exact.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::Ordering;
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use super::{run_case, ExperimentCase, GroundTruth, RunOptions, TimeSample};
use crate::error::{CimError, Result};

const HEADER: &str = "#cim-cache v1";

/// Where reference solutions live. Results are also memoised in memory so a
/// session never computes the same reference twice.
#[derive(Debug, Default)]
pub struct ReferenceStore {
    dir: Option<PathBuf>,
    memo: Mutex<HashMap<String, Arc<Vec<TimeSample>>>>,
}

impl ReferenceStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
            memo: Mutex::default(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Content hash of everything the reference depends on.
    pub fn key(case: &ExperimentCase, n_ref: usize, h_ref: f64) -> String {
        let o = &case.orders;
        let canonical = format!(
            "case={};alpha={:016x};beta={:016x};theta={:016x};epsilon={:016x};t0={:016x};\
             lambda={:016x};n_ref={};h_ref={:016x}",
            case.id,
            o.alpha.to_bits(),
            o.beta.to_bits(),
            case.theta.to_bits(),
            o.epsilon.to_bits(),
            case.t0.to_bits(),
            case.lambda.to_bits(),
            n_ref,
            h_ref.to_bits()
        );
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn path_for(&self, case: &ExperimentCase, key: &str) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("{}-{}.csv", case.id, &key[..16])))
    }

    /// The reference solution of `case`, from memory, disk, or a fresh
    /// computation (which is then written to disk).
    pub fn reference_solution(
        &self,
        case: &ExperimentCase,
        options: &RunOptions,
    ) -> Result<Arc<Vec<TimeSample>>> {
        let GroundTruth::Reference { n_nodes, h } = case.truth else {
            return Err(CimError::MissingReference(format!(
                "{} is configured with an exact solution",
                case.id
            )));
        };
        let key = Self::key(case, n_nodes, h);
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(hit.clone());
        }
        let path = self.path_for(case, &key);
        let samples = match &path {
            Some(p) if p.exists() => read_cache(p, &key)?,
            _ => {
                let ref_opts = RunOptions {
                    n_cheb: 0,
                    ..options.clone()
                };
                let before = options.stats.node_solves();
                let samples = run_case(case, n_nodes, h, &ref_opts)?;
                options
                    .stats
                    .reference_solves
                    .fetch_add(options.stats.node_solves() - before, Ordering::Relaxed);
                if let Some(p) = &path {
                    write_cache(p, &key, &samples)?;
                }
                samples
            }
        };
        let samples = Arc::new(samples);
        self.memo
            .lock()
            .expect("memo lock")
            .insert(key, samples.clone());
        Ok(samples)
    }
}

/// Writes `samples` to a temporary sibling of `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_cache(path: &Path, key: &str, samples: &[TimeSample]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = format!("{HEADER} {key}\n");
    for s in samples {
        text.push_str(&format!("{:.16e}", s.t));
        for v in &s.values {
            text.push_str(&format!(",{v:.16e}"));
        }
        text.push('\n');
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a cache file, checking the header against `key`.
pub fn read_cache(path: &Path, key: &str) -> Result<Vec<TimeSample>> {
    let corrupt = |reason: String| CimError::CacheCorrupt {
        path: path.display().to_string(),
        reason,
    };
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| corrupt("empty file".into()))?;
    let found = header
        .strip_prefix(HEADER)
        .map(str::trim)
        .ok_or_else(|| corrupt(format!("bad header '{header}'")))?;
    if found != key {
        return Err(corrupt(format!("hash {found} does not match {key}")));
    }
    let mut samples = Vec::new();
    let mut width = None;
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',').map(|f| {
            f.parse::<f64>()
                .map_err(|e| corrupt(format!("line {}: '{f}': {e}", i + 2)))
        });
        let t = fields
            .next()
            .ok_or_else(|| corrupt(format!("line {} is empty", i + 2)))??;
        let values = fields.collect::<Result<Vec<_>>>()?;
        if values.is_empty() || *width.get_or_insert(values.len()) != values.len() {
            return Err(corrupt(format!("line {} has the wrong width", i + 2)));
        }
        samples.push(TimeSample { t, values });
    }
    if samples.is_empty() {
        return Err(corrupt("no samples".into()));
    }
    Ok(samples)
}
