//! Random Gaussian measurement model: ensemble and signal generators and the
//! empirical recovery-probability sweep over the oversampling ratio `M/N`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gwf::{self, SolverConfig, StepSchedule};
use crate::measurement::{forward_correlate, ComplexSignal, MeasurementEnsemble};
use crate::seed::{self, stream};

/// Relative-error thresholds for exact and moderately precise recovery.
pub const STRICT_THRESHOLD: f64 = 1e-5;
pub const MODERATE_THRESHOLD: f64 = 1e-3;

/// Default oversampling grid, bracketing the `2.3N` and `3N` operating points.
pub const DEFAULT_GRID: [f64; 8] = [1.0, 1.5, 2.0, 2.3, 2.5, 3.0, 3.5, 4.0];

fn complex_normal_half<R: Rng>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

fn gaussian_block<R: Rng>(rng: &mut R, n: usize, m: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut left = Vec::with_capacity(n * m);
    let mut right = Vec::with_capacity(n * m);
    for _ in 0..m {
        for _ in 0..n {
            left.push(complex_normal_half(rng));
        }
        for _ in 0..n {
            right.push(complex_normal_half(rng));
        }
    }
    (left, right)
}

/// `2M` independent `CN(0, I)` vectors: entries have independent real and
/// imaginary parts of variance 1/2. Draw order is pair-major, left before
/// right, entries ascending, real before imaginary.
pub fn gen_gaussian_ensemble(n: usize, m: usize, seed: u64) -> Result<MeasurementEnsemble> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput(format!("need n, m >= 1 (got n = {n}, m = {m})")));
    }
    let mut rng = seed::rng(seed);
    let (left, right) = gaussian_block(&mut rng, n, m);
    MeasurementEnsemble::interferometric(n, left, right)
}

/// Auto-correlation counterpart: the left block of the same draw is used on
/// both sides.
pub fn gen_gaussian_phase_retrieval(n: usize, m: usize, seed: u64) -> Result<MeasurementEnsemble> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput(format!("need n, m >= 1 (got n = {n}, m = {m})")));
    }
    let mut rng = seed::rng(seed);
    let (left, _) = gaussian_block(&mut rng, n, m);
    MeasurementEnsemble::phase_retrieval(n, left)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    /// `P` consecutive frequencies with unit-variance complex coefficients.
    RandomLowPass { p: usize },
    /// All `N` frequencies, coefficients scaled by `1/√8`.
    RandomGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalModel {
    pub kind: SignalKind,
    pub n: usize,
}

impl SignalModel {
    /// Low-pass model with `P = N/8` (at least 1).
    pub fn low_pass(n: usize) -> Self {
        Self {
            kind: SignalKind::RandomLowPass { p: (n / 8).max(1) },
            n,
        }
    }

    pub fn gaussian(n: usize) -> Self {
        Self {
            kind: SignalKind::RandomGaussian,
            n,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            SignalKind::RandomLowPass { .. } => "lowpass",
            SignalKind::RandomGaussian => "gaussian",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("signal dimension must be >= 1".into()));
        }
        if let SignalKind::RandomLowPass { p } = self.kind {
            if p == 0 || p > self.n {
                return Err(Error::InvalidInput(format!(
                    "low-pass bandwidth P = {p} must lie in 1..={}",
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Frequency offsets `p - 1` summed over and the coefficient scale.
    fn band(&self) -> (i64, usize, f64) {
        match self.kind {
            SignalKind::RandomLowPass { p } => (-((p / 2) as i64), p, 1.0),
            SignalKind::RandomGaussian => (-((self.n / 2) as i64), self.n, 1.0 / 8f64.sqrt()),
        }
    }
}

/// `ρ_l = Σ_p s·(X_p + iY_p) e^{2πi(p-1)(l-1)/N}` with one standard normal
/// pair per frequency, drawn in ascending `p`, real part first.
pub fn gen_signal(model: &SignalModel, seed: u64) -> Result<ComplexSignal> {
    model.validate()?;
    let n = model.n;
    let (lo, count, scale) = model.band();
    let mut rng = seed::rng(seed);
    let coeffs: Vec<(i64, Complex64)> = (0..count as i64)
        .map(|j| {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            (lo + j, Complex64::new(x, y) * scale)
        })
        .collect();
    let values = (0..n)
        .map(|l| {
            coeffs
                .iter()
                .map(|&(f, c)| {
                    let idx = (f * l as i64).rem_euclid(n as i64) as f64;
                    c * Complex64::from_polar(1.0, 2.0 * PI * idx / n as f64)
                })
                .sum()
        })
        .collect();
    ComplexSignal::new(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionRow {
    pub oversampling: f64,
    pub m: usize,
    pub trials: usize,
    pub successes_strict: usize,
    pub successes_moderate: usize,
    /// Trials whose solve returned an error (counted as failures).
    pub solver_failures: usize,
}

impl PhaseTransitionRow {
    pub fn p_strict(&self) -> f64 {
        self.successes_strict as f64 / self.trials as f64
    }

    pub fn p_moderate(&self) -> f64 {
        self.successes_moderate as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionResult {
    pub signal: SignalModel,
    pub rows: Vec<PhaseTransitionRow>,
    pub thresholds: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionConfig {
    pub n: usize,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub iters: usize,
    pub seed: u64,
    pub signal: SignalModel,
}

impl PhaseTransitionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.iters == 0 {
            return Err(Error::Config("iters must be >= 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::Config("oversampling grid is empty".into()));
        }
        if let Some(bad) = self.grid.iter().find(|&&r| !(r >= 1.0 && r.is_finite())) {
            return Err(Error::Config(format!("oversampling ratio {bad} must be >= 1")));
        }
        if self.signal.n != self.n {
            return Err(Error::Config(format!(
                "signal model dimension {} differs from n = {}",
                self.signal.n, self.n
            )));
        }
        self.signal.validate()
    }
}

/// Measurement count for an oversampling ratio.
pub fn measurements_for(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64).round() as usize).max(1)
}

/// Outcome of one random instance: relative error or the solver error text.
pub fn run_trial(
    n: usize,
    m: usize,
    signal: &SignalModel,
    iters: usize,
    trial_seed: u64,
) -> Result<f64> {
    let ensemble = gen_gaussian_ensemble(n, m, seed::derive(trial_seed, &[stream::ENSEMBLE]))?;
    let truth = gen_signal(signal, seed::derive(trial_seed, &[stream::SIGNAL]))?;
    let data = forward_correlate(&ensemble, &truth)?;
    let config = SolverConfig {
        max_iters: iters,
        step_schedule: StepSchedule::default_ramp(),
        normalize_by_init: true,
        stop_tol: 0.0,
        record_every: iters,
    };
    let trace = gwf::solve(&ensemble, &data, &config, Some(&truth))?;
    Ok(trace.last().rel_err.expect("truth supplied"))
}

/// Empirical recovery probabilities over the oversampling grid. Trial seeds
/// derive from `(seed, grid index, trial index)`; trials run on the current
/// rayon pool and the counts do not depend on its size.
pub fn run_phase_transition(config: &PhaseTransitionConfig) -> Result<PhaseTransitionResult> {
    config.validate()?;
    let n = config.n;
    let rows = config
        .grid
        .iter()
        .enumerate()
        .map(|(gi, &ratio)| {
            let m = measurements_for(n, ratio);
            let outcomes: Vec<Option<f64>> = (0..config.trials)
                .into_par_iter()
                .map(|t| {
                    let trial_seed = seed::derive(config.seed, &[gi as u64, t as u64]);
                    match run_trial(n, m, &config.signal, config.iters, trial_seed) {
                        Ok(err) => Some(err),
                        Err(e) => {
                            log::warn!("trial {t} at M/N = {ratio} failed: {e}");
                            None
                        }
                    }
                })
                .collect();
            let errs: Vec<f64> = outcomes.iter().flatten().copied().collect();
            PhaseTransitionRow {
                oversampling: ratio,
                m,
                trials: config.trials,
                successes_strict: errs.iter().filter(|&&e| e <= STRICT_THRESHOLD).count(),
                successes_moderate: errs.iter().filter(|&&e| e <= MODERATE_THRESHOLD).count(),
                solver_failures: outcomes.len() - errs.len(),
            }
        })
        .collect();
    Ok(PhaseTransitionResult {
        signal: config.signal,
        rows,
        thresholds: (STRICT_THRESHOLD, MODERATE_THRESHOLD),
    })
}
