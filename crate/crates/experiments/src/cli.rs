//! Command-line front end.

use crate::config::ExperimentConfig;
use crate::output::{OutputDir, OUT_ENV};
use crate::registry::{ExperimentRegistry, RunContext};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "quasilin", about = "Sparse recovery from quasi-linear measurements", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Restricted-condition probes and rate maps (fig1_rate_map, probe_suite).
    Probe(CommonArgs),
    /// A single greedy run.
    Greedy(CommonArgs),
    /// A single hard-thresholding run.
    Iht(CommonArgs),
    /// A single soft-thresholding run.
    Ist(CommonArgs),
    /// Success-rate grids (fig4_phase_greedy, fig6_threshold_grid).
    Grid(CommonArgs),
    /// The asteroseismology demonstration.
    Astero(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML file, or the name of a file in `configs/` without extension.
    #[arg(long)]
    pub config: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides `out` in the config and the environment.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key.path=value`, applied before validation. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl Command {
    fn parts(&self) -> (&'static str, &CommonArgs) {
        match self {
            Command::Probe(a) => ("probe", a),
            Command::Greedy(a) => ("greedy", a),
            Command::Iht(a) => ("iht", a),
            Command::Ist(a) => ("ist", a),
            Command::Grid(a) => ("grid", a),
            Command::Astero(a) => ("astero", a),
        }
    }
}

/// Experiments each subcommand may run; the first is the default.
fn allowed(sub: &str) -> &'static [&'static str] {
    match sub {
        "probe" => &["probe_suite", "fig1_rate_map"],
        "grid" => &["fig6_threshold_grid", "fig4_phase_greedy"],
        "astero" => &["astero_demo"],
        "greedy" => &["greedy"],
        "iht" => &["iht"],
        "ist" => &["ist"],
        _ => &[],
    }
}

/// `name` as given if it exists; otherwise `configs/<name>.toml` under the
/// working directory, then under the workspace root.
pub fn resolve_config(name: &str) -> PathBuf {
    let direct = PathBuf::from(name);
    if direct.exists() || direct.extension().is_some() || name.contains('/') {
        return direct;
    }
    let file = format!("{name}.toml");
    let local = Path::new("configs").join(&file);
    if local.exists() {
        return local;
    }
    let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(&file);
    if bundled.exists() {
        return bundled;
    }
    direct
}

pub fn output_root(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let (sub, args) = cli.command.parts();
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    let path = resolve_config(&args.config);
    let cfg = match ExperimentConfig::load(&path, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let names = allowed(sub);
    let name = match (&cfg.experiment, sub) {
        (_, "greedy" | "iht" | "ist") => names[0],
        (Some(e), _) => match names.iter().find(|n| **n == e.as_str()) {
            Some(n) => n,
            None => {
                eprintln!("error: `{sub}` cannot run experiment `{e}` (allowed: {})", names.join(", "));
                return EXIT_CONFIG;
            }
        },
        (None, _) => names[0],
    };
    let registry = ExperimentRegistry::with_defaults();
    let experiment = match registry.get(name) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let out = match OutputDir::create(output_root(args.out.as_deref(), &cfg)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_CONFIG;
        }
    };
    let ctx = RunContext::default();
    match experiment.run(&cfg, &ctx, &out) {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            for p in out.written() {
                println!("wrote {}", p.display());
            }
            if summary.diverged {
                eprintln!("error: solver diverged");
                EXIT_DIVERGED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_CONFIG
        }
    }
}
