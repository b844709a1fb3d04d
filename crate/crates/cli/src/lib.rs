//! Experiment runner: configuration, subcommand pipelines and reproducible
//! output emission.
//!
//! Every run writes into its own directory. Failures additionally produce
//! `error.json` with a machine-readable `reason` and map to exit codes
//! 2 (validation), 3 (numerical terminal error) and 4 (enumeration budget).

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub mod commands;
pub mod config;
pub mod output;
pub mod setup;

use config::Config;

/// Output root when neither `--out` nor this variable is given: `./out`.
pub const OUT_ROOT_VAR: &str = "GLMCF_OUT_ROOT";
/// Worker count for sweeps; defaults to the available parallelism.
pub const JOBS_VAR: &str = "GLMCF_JOBS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Validation,
    Numerical,
    Budget,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Budget => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunError {
    pub kind: ErrorKind,
    pub reason: String,
}

impl RunError {
    pub fn validation(reason: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Validation, reason: reason.into() }
    }

    pub fn numerical(reason: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Numerical, reason: reason.into() }
    }

    /// Filesystem failures are reported as validation errors: the run never started.
    pub fn io(reason: impl Into<String>) -> Self {
        Self::validation(reason)
    }
}

impl From<glmcf_core::Error> for RunError {
    fn from(e: glmcf_core::Error) -> Self {
        use glmcf_core::Error as E;
        let kind = match e {
            E::InvalidInput(_) | E::DimensionUnsupported(_) | E::Precondition(_) | E::ZeroRemainder => ErrorKind::Validation,
            E::EnumerationBudget { .. } => ErrorKind::Budget,
            E::DegenerateEdge { .. } | E::NoConvergence(_) | E::Blowup(_) | E::Boundary(_) => ErrorKind::Numerical,
        };
        Self { kind, reason: e.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Lattice,
    Spectrum,
    Variation,
    Flow,
    Orbit,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self, RunError> {
        Ok(match s {
            "lattice" => Command::Lattice,
            "spectrum" => Command::Spectrum,
            "variation" => Command::Variation,
            "flow" => Command::Flow,
            "orbit" => Command::Orbit,
            other => return Err(RunError::validation(format!("unknown command '{other}'"))),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Lattice => "lattice",
            Command::Spectrum => "spectrum",
            Command::Variation => "variation",
            Command::Flow => "flow",
            Command::Orbit => "orbit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    /// Overrides the config `seed`.
    pub seed: Option<u64>,
    /// Overrides the config `nodes`.
    pub nodes: Option<usize>,
    /// Applied after the config file, in order.
    pub overrides: Vec<(String, String)>,
}

impl RunSpec {
    pub fn new(command: Command, config: Option<PathBuf>, out: PathBuf) -> Self {
        Self { command, config, out, seed: None, nodes: None, overrides: Vec::new() }
    }

    pub fn load_config(&self) -> Result<Config, RunError> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        for (k, v) in &self.overrides {
            cfg.set(k, v)?;
        }
        if let Some(s) = self.seed {
            cfg.set("seed", &s.to_string())?;
        }
        if let Some(n) = self.nodes {
            cfg.set("nodes", &n.to_string())?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    /// The one-line summary printed to stdout.
    pub summary: String,
}

/// `$GLMCF_OUT_ROOT/<name>`, or `out/<name>`.
pub fn default_out_dir(name: &str) -> PathBuf {
    let root = std::env::var_os(OUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
    root.join(name)
}

fn write_error(dir: &Path, err: &RunError) {
    #[derive(Serialize)]
    struct ErrorFile<'a> {
        reason: &'a str,
        kind: ErrorKind,
        exit_code: i32,
    }
    let file = ErrorFile { reason: &err.reason, kind: err.kind, exit_code: err.kind.exit_code() };
    // The error is already being reported; a failed write leaves only stdout.
    let _ = std::fs::create_dir_all(dir).map(|_| output::write_json(dir, "error.json", &file));
}

/// Runs one spec to completion; never panics on bad input.
pub fn run(spec: &RunSpec) -> RunOutcome {
    let result = spec.load_config().and_then(|cfg| {
        std::fs::create_dir_all(&spec.out)
            .map_err(|e| RunError::io(format!("cannot create {}: {e}", spec.out.display())))?;
        let _ = std::fs::remove_file(spec.out.join("error.json"));
        match spec.command {
            Command::Lattice => commands::lattice::run(&cfg, &spec.out),
            Command::Spectrum => commands::spectrum::run(&cfg, &spec.out),
            Command::Variation => commands::variation::run(&cfg, &spec.out),
            Command::Flow => commands::flow::run(&cfg, &spec.out),
            Command::Orbit => commands::orbit::run(&cfg, &spec.out),
        }
    });
    match result {
        Ok(summary) => RunOutcome { exit_code: 0, summary },
        Err(e) => {
            write_error(&spec.out, &e);
            RunOutcome { exit_code: e.kind.exit_code(), summary: format!("error: {}", e.reason) }
        }
    }
}

pub fn jobs_from_env() -> Option<usize> {
    std::env::var(JOBS_VAR).ok().and_then(|v| v.parse().ok()).filter(|&j| j > 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub outcomes: Vec<RunOutcome>,
    pub exit_code: i32,
    pub summary: String,
}

/// Runs every spec on `jobs` workers, each in its own directory, and merges
/// the one-line summaries into `out/sweep.csv` in spec order. The exit code
/// is the largest exit code of any run.
pub fn sweep(specs: &[RunSpec], jobs: Option<usize>, out: &Path) -> SweepReport {
    let fail = |e: RunError| {
        write_error(out, &e);
        SweepReport { outcomes: Vec::new(), exit_code: e.kind.exit_code(), summary: format!("error: {}", e.reason) }
    };
    if specs.is_empty() {
        return fail(RunError::validation("empty spec list"));
    }
    if let Err(e) = std::fs::create_dir_all(out) {
        return fail(RunError::io(format!("cannot create {}: {e}", out.display())));
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => return fail(RunError::validation(format!("cannot start workers: {e}"))),
    };
    let outcomes: Vec<RunOutcome> = pool.install(|| specs.par_iter().map(run).collect());
    let rows = specs.iter().zip(&outcomes).enumerate().map(|(i, (s, o))| {
        vec![
            i.to_string(),
            s.command.as_str().to_string(),
            s.config.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            s.nodes.map(|n| n.to_string()).unwrap_or_default(),
            s.out.strip_prefix(out).unwrap_or(&s.out).display().to_string(),
            o.exit_code.to_string(),
            o.summary.clone(),
        ]
    });
    let text = output::csv("run;command;config;nodes;dir;exit_code;summary", rows, ";");
    if let Err(e) = output::write_text(out, "sweep.csv", &text) {
        return fail(e);
    }
    let failed = outcomes.iter().filter(|o| o.exit_code != 0).count();
    let exit_code = outcomes.iter().map(|o| o.exit_code).max().unwrap_or(0);
    SweepReport { summary: format!("runs={} failed={failed}", outcomes.len()), outcomes, exit_code }
}
