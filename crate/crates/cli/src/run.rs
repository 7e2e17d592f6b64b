//! Fully resolved run specifications and their execution. A spec holds every
//! parameter a run depends on, so replaying it reproduces the outputs.

use std::fs;
use std::path::{Path, PathBuf};

use gwf::gaussian::{self, PhaseTransitionConfig, SignalModel};
use gwf::gwf::SolverConfig;
use gwf::io;
use gwf::radar::{self, ComparisonConfig, PhantomSpec, RadarConfig};
use gwf::seed::{self, stream};
use gwf::theory;
use gwf::{forward_correlate, Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunSpec {
    Simulate {
        n: usize,
        m: usize,
        signal: SignalModel,
        phase_retrieval: bool,
        seed: u64,
    },
    Solve {
        ensemble: PathBuf,
        data: PathBuf,
        truth: Option<PathBuf>,
        solver: SolverConfig,
    },
    Gaussian {
        n: usize,
        grid: Vec<f64>,
        trials: usize,
        iters: usize,
        signals: Vec<SignalModel>,
        seed: u64,
    },
    TheoryCurves {
        max_delta: f64,
        points: usize,
    },
    TheoryRic {
        n: usize,
        m: usize,
        trials: usize,
        phase_retrieval: bool,
        seed: u64,
    },
    Radar {
        config: RadarConfig,
        phantom: PhantomSpec,
        record_every: usize,
        compare: bool,
    },
}

impl RunSpec {
    pub fn name(&self) -> &'static str {
        match self {
            RunSpec::Simulate { .. } => "simulate",
            RunSpec::Solve { .. } => "solve",
            RunSpec::Gaussian { .. } => "gaussian",
            RunSpec::TheoryCurves { .. } | RunSpec::TheoryRic { .. } => "theory",
            RunSpec::Radar { .. } => "radar",
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        match self {
            RunSpec::Simulate { seed, .. }
            | RunSpec::Gaussian { seed, .. }
            | RunSpec::TheoryRic { seed, .. } => vec![*seed],
            _ => Vec::new(),
        }
    }
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl<'a> Outputs<'a> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        io::write_atomic(&self.dir.join(name), bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

/// Runs `spec`, writing results into `dir`; returns the written file names.
/// On solver divergence the partial results are written before the error is
/// returned.
pub fn execute(spec: &RunSpec, dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut out = Outputs {
        dir,
        files: Vec::new(),
    };
    match spec {
        RunSpec::Simulate {
            n,
            m,
            signal,
            phase_retrieval,
            seed,
        } => simulate(&mut out, *n, *m, signal, *phase_retrieval, *seed)?,
        RunSpec::Solve {
            ensemble,
            data,
            truth,
            solver,
        } => solve(&mut out, ensemble, data, truth.as_deref(), solver)?,
        RunSpec::Gaussian {
            n,
            grid,
            trials,
            iters,
            signals,
            seed,
        } => {
            for signal in signals {
                let cfg = PhaseTransitionConfig {
                    n: *n,
                    grid: grid.clone(),
                    trials: *trials,
                    iters: *iters,
                    seed: *seed,
                    signal: *signal,
                };
                let result = gaussian::run_phase_transition(&cfg)?;
                let name = format!("phase_transition_{}.csv", signal.label());
                out.write(&name, io::phase_transition_csv(&result).as_bytes())?;
            }
        }
        RunSpec::TheoryCurves { max_delta, points } => {
            if *points == 0 {
                return Err(Error::Config("points must be >= 1".into()));
            }
            let rows = theory::figure1_curves(&theory::linear_grid(*max_delta, *points))?;
            out.write("figure1.csv", io::constants_csv(&rows).as_bytes())?;
        }
        RunSpec::TheoryRic {
            n,
            m,
            trials,
            phase_retrieval,
            seed,
        } => {
            let ens_seed = seed::derive(*seed, &[stream::ENSEMBLE]);
            let ens = if *phase_retrieval {
                gaussian::gen_gaussian_phase_retrieval(*n, *m, ens_seed)?
            } else {
                gaussian::gen_gaussian_ensemble(*n, *m, ens_seed)?
            };
            let est = theory::estimate_ric_rank1(&ens, *trials, *seed)?;
            out.json(
                "ric.json",
                &json!({
                    "delta_hat": est.delta_hat,
                    "trials": est.trials,
                    "n": est.n,
                    "m": est.m,
                    "seed": est.seed,
                    "rip_claim_refused": est.rip_claim_refused,
                }),
            )?;
        }
        RunSpec::Radar {
            config,
            phantom,
            record_every,
            compare,
        } => radar_run(&mut out, config, phantom, *record_every, *compare)?,
    }
    Ok(out.files)
}

fn simulate(
    out: &mut Outputs,
    n: usize,
    m: usize,
    signal: &SignalModel,
    phase_retrieval: bool,
    seed: u64,
) -> Result<()> {
    let ens_seed = seed::derive(seed, &[stream::ENSEMBLE]);
    let ens = if phase_retrieval {
        gaussian::gen_gaussian_phase_retrieval(n, m, ens_seed)?
    } else {
        gaussian::gen_gaussian_ensemble(n, m, ens_seed)?
    };
    let truth = gaussian::gen_signal(signal, seed::derive(seed, &[stream::SIGNAL]))?;
    let data = forward_correlate(&ens, &truth)?;
    out.write("ensemble.ifn", &io::encode_ensemble(&ens))?;
    out.write("data.ifd", &io::encode_data(&data))?;
    out.write("truth.ifs", &io::encode_signal(&truth))?;
    out.write("truth.csv", io::complex_csv(truth.as_slice()).as_bytes())?;
    out.write("data.csv", io::complex_csv(data.as_slice()).as_bytes())
}

fn solve(
    out: &mut Outputs,
    ensemble: &Path,
    data: &Path,
    truth: Option<&Path>,
    solver: &SolverConfig,
) -> Result<()> {
    let ens = io::read_ensemble(ensemble)?;
    let data = io::read_data(data)?;
    let truth = truth.map(io::read_signal).transpose()?;
    let (trace, failure) = match gwf::gwf::solve(&ens, &data, solver, truth.as_ref()) {
        Ok(t) => (t, None),
        Err(Error::Divergence { iteration, trace }) => {
            let t = (*trace).clone();
            (t, Some(Error::Divergence { iteration, trace }))
        }
        Err(e) => return Err(e),
    };
    let last = trace.last();
    out.write("trace.csv", io::trace_csv(&trace.records).as_bytes())?;
    out.write("estimate.ifs", &io::encode_signal(&trace.final_estimate))?;
    out.write("estimate.csv", io::complex_csv(trace.final_estimate.as_slice()).as_bytes())?;
    out.json(
        "summary.json",
        &json!({
            "iterations": trace.iterations,
            "lambda0": trace.init_eigenvalue,
            "final_objective": last.objective,
            "final_dist": last.dist,
            "final_rel_err": last.rel_err,
            "diverged": failure.is_some(),
            "n": ens.n(),
            "m": ens.m(),
            "config": solver,
        }),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn radar_run(
    out: &mut Outputs,
    config: &RadarConfig,
    phantom_spec: &PhantomSpec,
    record_every: usize,
    compare: bool,
) -> Result<()> {
    let phantom = radar::make_phantom(phantom_spec, config.nx, config.ny)?;
    let solver = radar::gwf_config(config.gwf_iters, record_every);
    let result = radar::run_imaging_experiment(config, &phantom, &solver)?;
    out.write("phantom.csv", io::image_csv(&phantom.reflectivity, config.nx).as_bytes())?;
    out.write("image.csv", io::image_csv(&result.image, config.nx).as_bytes())?;
    out.write("image.pgm", &io::image_pgm(&result.image, config.nx, config.ny)?)?;
    out.write("trace.csv", io::trace_csv(&result.trace.records).as_bytes())?;
    let mut mag = String::from("k,magnitude_rel_err\n");
    for (k, e) in &result.magnitude_trace {
        mag.push_str(&format!("{k},{e}\n"));
    }
    out.write("magnitude_trace.csv", mag.as_bytes())?;
    let mut summary = json!({
        "n": config.n(),
        "m": result.m,
        "iterations": result.trace.iterations,
        "lambda0": result.trace.init_eigenvalue,
        "final_rel_err": result.rel_err,
        "final_magnitude_rel_err": result.magnitude_rel_err,
        "config": config,
    });
    if compare {
        let cmp = radar::run_comparison(config, &phantom, &ComparisonConfig::from_radar(config))?;
        out.write("comparison.csv", io::comparison_csv(&cmp.rows).as_bytes())?;
        summary["comparison"] = serde_json::to_value(&cmp.summaries).expect("serializable");
        summary["uzawa_step"] = json!(cmp.uzawa_step);
    }
    out.json("summary.json", &summary)
}
