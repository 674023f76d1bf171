//! Orchestration: load the config, run the jobs on a worker pool, write every
//! artifact from this thread, and account for the run in `manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{self, Experiment};
use crate::experiments::{self, JobRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Clone)]
pub struct Invocation {
    pub experiment: Experiment,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'static str,
    config_hash: String,
    versions: BTreeMap<&'static str, String>,
    jobs_requested: usize,
    jobs: &'a [JobRecord],
    outputs: Vec<String>,
    warnings: &'a [String],
    exit_code: i32,
    total_wall_time_s: f64,
}

/// SHA-256 of the normalized config text, hex encoded.
pub fn config_hash(normalized: &str) -> String {
    format!("{:x}", Sha256::digest(normalized.as_bytes()))
}

fn check_writable(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".specgap-write-probe");
    fs::write(&probe, b"")?;
    fs::remove_file(probe)
}

/// Runs one experiment and returns the process exit code. Diagnostics go to
/// stderr, one per line.
pub fn run(inv: &Invocation) -> i32 {
    let started = Instant::now();
    let source = match fs::read_to_string(&inv.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: cannot read config: {e}", inv.config.display());
            return EXIT_INVALID;
        }
    };
    let cfg = match config::load(&source, inv.experiment) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", e.render(&inv.config));
            return EXIT_INVALID;
        }
    };
    let out_dir = inv.out.clone().unwrap_or_else(|| PathBuf::from(cfg.output.as_deref().expect("normalized output")));
    if let Err(e) = check_writable(&out_dir) {
        match (&inv.out, config::line_of(&source, "output")) {
            (None, Some(line)) => {
                eprintln!("{}:{line}: output: {} is not writable: {e}", inv.config.display(), out_dir.display())
            }
            _ => eprintln!("{}: output directory is not writable: {e}", out_dir.display()),
        }
        return EXIT_INVALID;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(inv.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start {} workers: {e}", inv.jobs);
            return EXIT_SOLVER;
        }
    };

    let normalized = cfg.to_toml();
    let outcome = experiments::execute(&cfg, &pool);
    let exit_code = if outcome.failed() { EXIT_SOLVER } else { EXIT_OK };

    let mut outputs = Vec::new();
    let mut write = |name: &str, bytes: &[u8]| match fs::write(out_dir.join(name), bytes) {
        Ok(()) => {
            outputs.push(name.to_string());
            true
        }
        Err(e) => {
            eprintln!("{}: cannot write: {e}", out_dir.join(name).display());
            false
        }
    };
    let mut ok = write("config.toml", normalized.as_bytes());
    for (name, bytes) in &outcome.artifacts {
        ok &= write(name, bytes);
    }
    for job in outcome.jobs.iter().filter(|j| j.error.is_some()) {
        eprintln!("error: {} {} failed: {}", job.label, job.params, job.error.as_deref().unwrap_or_default());
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let versions = BTreeMap::from([
        ("specgap", env!("CARGO_PKG_VERSION").to_string()),
        ("specgap-core", specgap_core::VERSION.to_string()),
        ("model-reference-format", specgap_core::model::REFERENCE_VERSION.to_string()),
    ]);
    let manifest = Manifest {
        experiment: inv.experiment.name(),
        config_hash: config_hash(&normalized),
        versions,
        jobs_requested: inv.jobs,
        jobs: &outcome.jobs,
        outputs,
        warnings: &outcome.warnings,
        exit_code,
        total_wall_time_s: started.elapsed().as_secs_f64(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    if fs::write(out_dir.join("manifest.json"), bytes).is_err() || !ok {
        eprintln!("{}: writing artifacts failed", out_dir.display());
        return EXIT_SOLVER;
    }
    exit_code
}
