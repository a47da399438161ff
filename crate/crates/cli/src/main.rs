use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phaselab::Error;
use phaselab_cli::config::{ExperimentConfig, ExperimentKind};
use phaselab_cli::experiments;

#[derive(Parser)]
#[command(
    name = "phaselab",
    version,
    about = "Planted Fourier-phase experiments: online SGD sweeps, loss landscapes, drift ODEs, spectral surgery, and shallow-net texture training"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// key=value experiment config; kind defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's `out`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for seed-level parallelism (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the config's `seed_base`
    #[arg(long = "seed-base")]
    seed_base: Option<u64>,
    /// Also emit SVG plots next to the CSVs
    #[arg(long)]
    plots: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the Monte Carlo statistical validation battery
    ValidateStats(RunArgs),
    /// Online SGD hardness sweep on the isotropic spectrum
    IsotropicSweep(RunArgs),
    /// Power-law spectrum sweep: principal rise, phase recovery, forgetting
    PowerlawSweep(RunArgs),
    /// Monte Carlo population-loss landscape over the phase plane
    Landscape(RunArgs),
    /// Rescaled SGD medians against the drift ODE on a shared time axis
    OdeCompare(RunArgs),
    /// Materialize original/flattened/transplanted corpus variants
    Surgery(RunArgs),
    /// Train the two-layer net on each corpus variant
    TextureTrain(RunArgs),
}

fn main() -> ExitCode {
    // usage errors are config errors (exit 1); clap's default would exit 2,
    // which is reserved for validation-battery failures
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (kind, args) = match &cli.cmd {
        Cmd::ValidateStats(a) => (ExperimentKind::ValidateStats, a),
        Cmd::IsotropicSweep(a) => (ExperimentKind::IsotropicSweep, a),
        Cmd::PowerlawSweep(a) => (ExperimentKind::PowerlawSweep, a),
        Cmd::Landscape(a) => (ExperimentKind::Landscape, a),
        Cmd::OdeCompare(a) => (ExperimentKind::OdeCompare, a),
        Cmd::Surgery(a) => (ExperimentKind::Surgery, a),
        Cmd::TextureTrain(a) => (ExperimentKind::TextureTrain, a),
    };
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(kind: ExperimentKind, args: &RunArgs) -> phaselab::Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::parse(kind, &std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default_for(kind),
    };
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(seed_base) = args.seed_base {
        cfg.seed_base = seed_base;
    }
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        // results are seed-deterministic either way; --jobs only bounds the pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let outcome = experiments::run(&cfg, args.plots)?;
    Ok(outcome.battery_ok)
}
