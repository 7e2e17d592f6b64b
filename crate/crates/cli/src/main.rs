mod manifest;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwf::gaussian::{SignalModel, DEFAULT_GRID};
use gwf::gwf::SolverConfig;
use gwf::radar::{DataModel, PhantomSpec, RadarConfig};
use gwf::Error;

use crate::manifest::{now_ms, RunManifest, MANIFEST_SCHEMA};
use crate::run::RunSpec;

const EXIT_IO: u8 = 2;
const EXIT_FORMAT: u8 = 3;
const EXIT_CONFIG: u8 = 4;
const EXIT_DIVERGENCE: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "gwf", version, about = "Generalized Wirtinger Flow for interferometric inversion")]
struct Cli {
    /// Worker threads for Monte-Carlo trials (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a Gaussian ensemble and signal and write binary inputs for `solve`.
    Simulate(SimulateArgs),
    /// Run GWF on a binary ensemble and data file.
    Solve(SolveArgs),
    /// Recovery probability versus oversampling for Gaussian measurements.
    Gaussian(GaussianArgs),
    /// Recovery constants over delta1, or an empirical RIC estimate.
    Theory(TheoryArgs),
    /// Multistatic radar imaging and the lifted baseline comparison.
    Radar(RadarArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignalChoice {
    Lowpass,
    Gaussian,
    Both,
}

impl SignalChoice {
    fn models(self, n: usize) -> Vec<SignalModel> {
        match self {
            SignalChoice::Lowpass => vec![SignalModel::low_pass(n)],
            SignalChoice::Gaussian => vec![SignalModel::gaussian(n)],
            SignalChoice::Both => vec![SignalModel::low_pass(n), SignalModel::gaussian(n)],
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    #[arg(long, value_enum, default_value = "lowpass")]
    signal: SignalChoice,
    /// Use the same vector on both sides of every pair.
    #[arg(long)]
    phase_retrieval: bool,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Solver configuration JSON (defaults: 2500 iterations, ramp step).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ground truth signal; enables distance columns in the trace.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GaussianArgs {
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Oversampling ratios M/N, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 2500, value_parser = clap::value_parser!(u64).range(1..))]
    iters: u64,
    #[arg(long, value_enum, default_value = "both")]
    signal: SignalChoice,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["curves", "ric"])))]
struct TheoryArgs {
    /// Tabulate epsilon, delta2, c and h over [0, max-delta].
    #[arg(long)]
    curves: bool,
    #[arg(long, default_value_t = 0.214)]
    max_delta: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Estimate the rank-1 RIC of a Gaussian ensemble from random probes.
    #[arg(long)]
    ric: bool,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long)]
    phase_retrieval: bool,
    /// Required with --ric.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Small,
    Paper,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DataModelChoice {
    Full,
    LookDirection,
}

#[derive(Args, Debug)]
struct RadarArgs {
    #[arg(long, value_enum, default_value = "small")]
    preset: Preset,
    /// Scene configuration JSON; replaces the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Phantom specification JSON (points and rectangles in pixel units).
    #[arg(long, conflicts_with = "phantom_seed")]
    phantom: Option<PathBuf>,
    /// Draw a random phantom from this seed instead of the default scene.
    #[arg(long)]
    phantom_seed: Option<u64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    uzawa_iters: Option<usize>,
    #[arg(long, value_enum)]
    data_model: Option<DataModelChoice>,
    /// Trace sampling interval in iterations.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    record_every: u64,
    /// Also run the lifted baselines and write comparison.csv.
    #[arg(long)]
    compare: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::Format { .. } => EXIT_FORMAT,
        Error::Divergence { .. }
        | Error::LiftedDivergence { .. }
        | Error::Initialization { .. }
        | Error::Eigen { .. } => EXIT_DIVERGENCE,
        Error::Config(_)
        | Error::InvalidInput(_)
        | Error::Domain { .. }
        | Error::DimensionMismatch { .. } => EXIT_CONFIG,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> gwf::Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn absolute(path: &Path) -> gwf::Result<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Resolves command-line arguments into a spec and its output directory.
fn resolve(command: Command) -> gwf::Result<(RunSpec, PathBuf)> {
    Ok(match command {
        Command::Simulate(a) => (
            RunSpec::Simulate {
                n: a.n as usize,
                m: a.m as usize,
                signal: a.signal.models(a.n as usize)[0],
                phase_retrieval: a.phase_retrieval,
                seed: a.seed,
            },
            a.out,
        ),
        Command::Solve(a) => {
            let mut solver = match &a.config {
                Some(p) => read_json::<SolverConfig>(p)?,
                None => SolverConfig {
                    record_every: 10,
                    ..SolverConfig::default()
                },
            };
            if let Some(it) = a.iters {
                solver.max_iters = it;
            }
            solver.validate()?;
            (
                RunSpec::Solve {
                    ensemble: absolute(&a.ensemble)?,
                    data: absolute(&a.data)?,
                    truth: a.truth.as_deref().map(absolute).transpose()?,
                    solver,
                },
                a.out,
            )
        }
        Command::Gaussian(a) => (
            RunSpec::Gaussian {
                n: a.n as usize,
                grid: a.grid.unwrap_or_else(|| DEFAULT_GRID.to_vec()),
                trials: a.trials as usize,
                iters: a.iters as usize,
                signals: a.signal.models(a.n as usize),
                seed: a.seed,
            },
            a.out,
        ),
        Command::Theory(a) if a.curves => (
            RunSpec::TheoryCurves {
                max_delta: a.max_delta,
                points: a.points,
            },
            a.out,
        ),
        Command::Theory(a) => {
            let seed = a
                .seed
                .ok_or_else(|| Error::Config("--seed is required with --ric".into()))?;
            (
                RunSpec::TheoryRic {
                    n: a.n as usize,
                    m: a.m as usize,
                    trials: a.trials as usize,
                    phase_retrieval: a.phase_retrieval,
                    seed,
                },
                a.out,
            )
        }
        Command::Radar(a) => {
            let mut config = match (&a.config, a.preset) {
                (Some(p), _) => read_json::<RadarConfig>(p)?,
                (None, Preset::Small) => RadarConfig::small(),
                (None, Preset::Paper) => {
                    eprintln!(
                        "warning: the paper preset (N = 961, 10000 iterations) takes a long time; \
                         the lifted comparison at this size needs hours"
                    );
                    RadarConfig::paper()
                }
            };
            if let Some(it) = a.iters {
                config.gwf_iters = it;
            }
            if let Some(it) = a.uzawa_iters {
                config.uzawa_iters = it;
            }
            match a.data_model {
                Some(DataModelChoice::Full) => config.data_model = DataModel::Full,
                Some(DataModelChoice::LookDirection) => config.data_model = DataModel::LookDirection,
                None => {}
            }
            config.validate()?;
            let phantom = match (&a.phantom, a.phantom_seed) {
                (Some(p), _) => read_json::<PhantomSpec>(p)?,
                (None, Some(s)) => PhantomSpec::random(config.nx, config.ny, s),
                (None, None) => PhantomSpec::default_for(config.nx, config.ny),
            };
            (
                RunSpec::Radar {
                    config,
                    phantom,
                    record_every: a.record_every as usize,
                    compare: a.compare,
                },
                a.out,
            )
        }
        Command::Replay(a) => (RunManifest::read(&a.manifest)?.spec, a.out),
    })
}

fn run(cli: Cli) -> gwf::Result<()> {
    let threads = cli.threads.map(|t| t as usize);
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let (spec, out) = resolve(cli.command)?;
    let started = now_ms();
    log::info!("running {} into {}", spec.name(), out.display());
    let result = run::execute(&spec, &out);
    let outputs = match &result {
        Ok(files) => files.clone(),
        Err(_) => Vec::new(),
    };
    if result.is_ok() || matches!(result, Err(Error::Divergence { .. })) {
        RunManifest {
            schema_version: MANIFEST_SCHEMA,
            command: spec.name().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: spec.seeds(),
            spec,
            threads,
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
            outputs,
        }
        .write(&out)?;
    }
    result.map(|files| {
        for f in files {
            println!("{}", out.join(f).display());
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
