use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glmcf_cli::config::Config;
use glmcf_cli::{default_out_dir, jobs_from_env, run, sweep, Command, RunSpec};

#[derive(Parser)]
#[command(name = "glmcf", version, about = "Weighted Lagrangian variational experiments and curve flows")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to $GLMCF_OUT_ROOT/<command>_<config stem>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Node count override.
    #[arg(long)]
    nodes: Option<usize>,
    /// Extra `key=value` entries applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Flat torus spectrum of a weight vector, or an exhaustive sweep.
    Lattice {
        /// Weights, comma separated, starting with 1.
        #[arg(long, value_name = "A")]
        a: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        max_entry: Option<String>,
        #[arg(long)]
        max_n: Option<String>,
        #[arg(long)]
        node_cap: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// First eigenvalue and stability verdict of a curve.
    Spectrum(Common),
    /// First and second variation checks.
    Variation(Common),
    /// One flow trajectory with diagnostics.
    Flow(Common),
    /// Torus orbits in weighted projective space.
    Orbit(Common),
    /// Runs several configs concurrently, each in its own directory.
    Sweep {
        /// Configs; each must set `command` unless --command is given.
        configs: Vec<PathBuf>,
        #[arg(long)]
        command: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker count; defaults to $GLMCF_JOBS, then to all cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Repeat every config at these node counts.
        #[arg(long, value_delimiter = ',')]
        resolutions: Vec<usize>,
        /// Scale `dt_cap` by the first resolution over the current one.
        #[arg(long)]
        scale_dt: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn stem(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().and_then(|p| p.file_stem()).map(|s| s.to_string_lossy().into_owned())
}

fn spec(command: Command, common: Common, extra: Vec<(String, String)>) -> Result<RunSpec, String> {
    let name = match stem(&common.config) {
        Some(s) => format!("{}_{s}", command.as_str()),
        None => command.as_str().to_string(),
    };
    let mut overrides = extra;
    for kv in &common.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(RunSpec {
        command,
        out: common.out.unwrap_or_else(|| default_out_dir(&name)),
        config: common.config,
        seed: common.seed,
        nodes: common.nodes,
        overrides,
    })
}

fn sweep_specs(
    configs: &[PathBuf],
    command: Option<&str>,
    out: &Path,
    resolutions: &[usize],
    scale_dt: bool,
    seed: Option<u64>,
) -> Result<Vec<RunSpec>, String> {
    let mut specs = Vec::new();
    for path in configs {
        let cfg = Config::load(path).map_err(|e| e.reason)?;
        let name = command.map(str::to_string).or_else(|| cfg.raw("command").map(str::to_string));
        let cmd = Command::parse(name.as_deref().ok_or_else(|| format!("{}: no command", path.display()))?)
            .map_err(|e| e.reason)?;
        let base = stem(&Some(path.clone())).unwrap_or_default();
        let levels: Vec<Option<usize>> =
            if resolutions.is_empty() { vec![None] } else { resolutions.iter().copied().map(Some).collect() };
        for nodes in levels {
            let mut s = RunSpec::new(cmd, Some(path.clone()), PathBuf::new());
            s.seed = seed;
            s.nodes = nodes;
            let tag = nodes.map_or(String::new(), |n| format!("_N{n}"));
            s.out = out.join(format!("run_{:03}_{base}{tag}", specs.len()));
            if let (true, Some(n)) = (scale_dt, nodes) {
                let cap: f64 = cfg.require("dt_cap").map_err(|e| e.reason)?;
                let scaled = cap * resolutions[0] as f64 / n as f64;
                s.overrides.push(("dt_cap".into(), format!("{scaled:e}")));
            }
            specs.push(s);
        }
    }
    Ok(specs)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let single = |s: Result<RunSpec, String>| -> ExitCode {
        match s {
            Ok(s) => {
                let o = run(&s);
                println!("{}", o.summary);
                ExitCode::from(o.exit_code as u8)
            }
            Err(msg) => {
                eprintln!("{msg}");
                ExitCode::from(2)
            }
        }
    };
    match cli.command {
        Cmd::Lattice { a, r, exhaustive, max_entry, max_n, node_cap, common } => {
            let mut extra = Vec::new();
            let mut push = |k: &str, v: Option<String>| {
                if let Some(v) = v {
                    extra.push((k.to_string(), v));
                }
            };
            push("weights", a);
            push("r", r);
            push("max_entry", max_entry);
            push("max_n", max_n);
            push("node_cap", node_cap);
            if exhaustive {
                extra.push(("exhaustive".into(), "true".into()));
            }
            single(spec(Command::Lattice, common, extra))
        }
        Cmd::Spectrum(c) => single(spec(Command::Spectrum, c, Vec::new())),
        Cmd::Variation(c) => single(spec(Command::Variation, c, Vec::new())),
        Cmd::Flow(c) => single(spec(Command::Flow, c, Vec::new())),
        Cmd::Orbit(c) => single(spec(Command::Orbit, c, Vec::new())),
        Cmd::Sweep { configs, command, out, jobs, resolutions, scale_dt, seed } => {
            let out = out.unwrap_or_else(|| default_out_dir("sweep"));
            let specs = match sweep_specs(&configs, command.as_deref(), &out, &resolutions, scale_dt, seed) {
                Ok(s) => s,
                Err(msg) => {
                    eprintln!("{msg}");
                    return ExitCode::from(2);
                }
            };
            let report = sweep(&specs, jobs.or_else(jobs_from_env), &out);
            for (s, o) in specs.iter().zip(&report.outcomes) {
                println!("{}: {}", s.out.display(), o.summary);
            }
            println!("{}", report.summary);
            ExitCode::from(report.exit_code as u8)
        }
    }
}
