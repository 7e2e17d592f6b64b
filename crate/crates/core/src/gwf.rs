//! Generalized Wirtinger Flow: objective, Wirtinger gradient, spectral
//! initialization, phase-aligned distance and the gradient-descent driver.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops;
use crate::linalg;
use crate::measurement::{
    lifted_adjoint, project_symmetric, ComplexSignal, InterferometricData, LiftedMatrix,
    MeasurementEnsemble,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    Fixed { mu: f64 },
    /// `μ_k = min(1 - exp(-k/τ₀), μ_max)`: small steps while the iterate is
    /// still far from the solution set.
    Ramp { tau0: f64, mu_max: f64 },
}

impl StepSchedule {
    pub const fn default_ramp() -> Self {
        StepSchedule::Ramp {
            tau0: 33000.0,
            mu_max: 0.2,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::Fixed { mu } if !(mu > 0.0 && mu.is_finite()) => {
                Err(Error::Config(format!("fixed step must be positive, got {mu}")))
            }
            StepSchedule::Ramp { tau0, .. } if !(tau0 > 0.0 && tau0.is_finite()) => {
                Err(Error::Config(format!("ramp tau0 must be positive, got {tau0}")))
            }
            StepSchedule::Ramp { mu_max, .. } if !(mu_max > 0.0 && mu_max <= 1.0) => Err(
                Error::Config(format!("ramp mu_max must lie in (0, 1], got {mu_max}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Step size used to produce iterate `k` (`k >= 1`).
pub fn step_size(k: usize, schedule: &StepSchedule) -> f64 {
    match *schedule {
        StepSchedule::Fixed { mu } => mu,
        StepSchedule::Ramp { tau0, mu_max } => (1.0 - (-(k as f64) / tau0).exp()).min(mu_max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub step_schedule: StepSchedule,
    /// Divide each step by `‖ρ₀‖²`.
    pub normalize_by_init: bool,
    /// Relative objective change below which iteration stops; 0 disables.
    pub stop_tol: f64,
    pub record_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 2500,
            step_schedule: StepSchedule::default_ramp(),
            normalize_by_init: true,
            stop_tol: 0.0,
            record_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be >= 1".into()));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::Config(format!(
                "stop_tol must be nonnegative, got {}",
                self.stop_tol
            )));
        }
        self.step_schedule.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub objective: f64,
    /// Step that produced this iterate (0 for the initial estimate).
    pub step: f64,
    pub flops: u64,
    pub dist: Option<f64>,
    pub rel_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    pub final_estimate: ComplexSignal,
    pub init_estimate: ComplexSignal,
    pub init_eigenvalue: f64,
    /// Number of gradient steps taken.
    pub iterations: usize,
}

impl SolverTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds the initial record")
    }
}

fn check(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
    rho: &ComplexSignal,
) -> Result<()> {
    ensemble.check_signal(rho)?;
    ensemble.check_data(data)
}

/// Evaluates `J(ρ)` and writes `∇J(ρ)` into `grad`; one pass over the
/// ensemble, `O(MN)`.
fn objective_and_gradient(
    ensemble: &MeasurementEnsemble,
    data: &[Complex64],
    rho: &[Complex64],
    grad: &mut [Complex64],
) -> f64 {
    grad.iter_mut().for_each(|g| *g = ZERO);
    let mut total = 0.0;
    for (m, &d) in data.iter().enumerate() {
        let li = ensemble.left(m);
        let lj = ensemble.right(m);
        let mut a = ZERO;
        let mut b = ZERO;
        for ((l, r), x) in li.iter().zip(lj).zip(rho) {
            a += l.conj() * x;
            b += r.conj() * x;
        }
        let e = a * b.conj() - d;
        total += e.norm_sqr();
        // conj(e)·(L_i^H ρ)·L_j + e·(L_j^H ρ)·L_i
        let ca = e.conj() * a;
        let cb = e * b;
        for ((g, l), r) in grad.iter_mut().zip(li).zip(lj) {
            *g += ca * r + cb * l;
        }
    }
    let scale = 0.5 / data.len() as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    total * scale
}

/// `J(ρ) = (1/2M) Σ_m |(L_i^m)^H ρρ^H L_j^m - d_m|²`.
pub fn objective(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
    rho: &ComplexSignal,
) -> Result<f64> {
    check(ensemble, data, rho)?;
    let r = rho.as_slice();
    let total: f64 = data
        .as_slice()
        .iter()
        .enumerate()
        .map(|(m, &d)| {
            let a = linalg::inner(ensemble.left(m), r);
            let b = linalg::inner(ensemble.right(m), r);
            (a * b.conj() - d).norm_sqr()
        })
        .sum();
    Ok(total * 0.5 / data.len() as f64)
}

/// Wirtinger gradient `∇J = (∂J/∂ρ̄)^T`.
pub fn gradient(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
    rho: &ComplexSignal,
) -> Result<ComplexSignal> {
    check(ensemble, data, rho)?;
    let mut grad = vec![ZERO; rho.len()];
    objective_and_gradient(ensemble, data.as_slice(), rho.as_slice(), &mut grad);
    Ok(ComplexSignal::from_vec_unchecked(grad))
}

/// Spectral matrix `X̂ = (1/M) P_S(F^H(d))`.
pub fn spectral_matrix(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
) -> Result<LiftedMatrix> {
    ensemble.check_data(data)?;
    let back = lifted_adjoint(ensemble, data.as_slice())?;
    Ok(project_symmetric(&back).scale(1.0 / ensemble.m() as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralInit {
    pub lambda0: f64,
    /// `√λ₀ v₀`.
    pub rho0: ComplexSignal,
}

/// Leading eigenpair of the spectral matrix, scaled to `√λ₀ v₀`.
pub fn spectral_init(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
) -> Result<SpectralInit> {
    let x = spectral_matrix(ensemble, data)?;
    let (lambda0, v0) = linalg::leading_eigenpair(x.matrix())?;
    if !(lambda0 > 0.0) {
        return Err(Error::Initialization { lambda0 });
    }
    let s = lambda0.sqrt();
    Ok(SpectralInit {
        lambda0,
        rho0: ComplexSignal::from_vec_unchecked(v0.into_iter().map(|z| z * s).collect()),
    })
}

fn check_lengths(rho: &ComplexSignal, rho_t: &ComplexSignal) -> Result<()> {
    if rho.len() != rho_t.len() {
        return Err(Error::dim("signal lengths", rho_t.len(), rho.len()));
    }
    Ok(())
}

/// Phase factor `e^{iΦ}` minimizing `‖ρ - e^{iΦ}ρ_t‖`; 1 when `⟨ρ, ρ_t⟩ = 0`.
pub fn optimal_phase(rho: &ComplexSignal, rho_t: &ComplexSignal) -> Result<Complex64> {
    check_lengths(rho, rho_t)?;
    let ip = rho_t.inner(rho);
    let mag = ip.norm();
    Ok(if mag > 0.0 {
        ip / mag
    } else {
        Complex64::new(1.0, 0.0)
    })
}

/// `ρ_t` rotated onto `ρ`.
pub fn aligned_truth(rho: &ComplexSignal, rho_t: &ComplexSignal) -> Result<ComplexSignal> {
    Ok(rho_t.scaled(optimal_phase(rho, rho_t)?))
}

/// Distance to the solution set `{e^{iφ}ρ_t}`, equal to
/// `sqrt(‖ρ‖² + ‖ρ_t‖² - 2|⟨ρ, ρ_t⟩|)`. Evaluated as the norm of the aligned
/// difference, which does not cancel catastrophically near the solution.
pub fn dist(rho: &ComplexSignal, rho_t: &ComplexSignal) -> Result<f64> {
    let phase = optimal_phase(rho, rho_t)?;
    Ok(rho
        .as_slice()
        .iter()
        .zip(rho_t.as_slice())
        .map(|(a, b)| (a - b * phase).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `‖ρρ^H - ρ_tρ_t^H‖_F²` without forming either matrix.
///
/// With `e = ρ - ρ̂_t` (phase-aligned truth) the difference equals
/// `U C U^H`, `U = [e, ρ̂_t]`, `C = [[1, 1], [1, 0]]`, so the squared norm is
/// `tr(C G C G)` with the 2x2 Gram matrix `G = U^H U`. This agrees with
/// `‖ρ‖⁴ + ‖ρ_t‖⁴ - 2|⟨ρ, ρ_t⟩|²` but keeps full relative accuracy when the
/// two are close.
pub fn lifted_dist_sq(rho: &ComplexSignal, rho_t: &ComplexSignal) -> Result<f64> {
    let hat = aligned_truth(rho, rho_t)?;
    let e: Vec<Complex64> = rho
        .as_slice()
        .iter()
        .zip(hat.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    let h = hat.as_slice();
    let gee = linalg::inner(&e, &e);
    let geh = linalg::inner(&e, h);
    let ghe = geh.conj();
    let ghh = linalg::inner(h, h);
    // C G = [[gee + ghe, geh + ghh], [gee, geh]]
    let p00 = gee + ghe;
    let p01 = geh + ghh;
    let p10 = gee;
    let p11 = geh;
    let tr = p00 * p00 + p01 * p10 + p10 * p01 + p11 * p11;
    Ok(tr.re.max(0.0))
}

fn record_distance(
    rho: &ComplexSignal,
    truth: Option<&ComplexSignal>,
) -> Result<(Option<f64>, Option<f64>)> {
    match truth {
        None => Ok((None, None)),
        Some(t) => {
            let d = dist(rho, t)?;
            let nt = t.norm();
            Ok((Some(d), Some(if nt > 0.0 { d / nt } else { d })))
        }
    }
}

/// Spectral initialization followed by gradient descent.
pub fn solve(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
    config: &SolverConfig,
    truth: Option<&ComplexSignal>,
) -> Result<SolverTrace> {
    solve_observed(ensemble, data, config, truth, &mut |_, _| {})
}

/// Like [`solve`], additionally handing every recorded iterate to `observer`.
pub fn solve_observed(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
    config: &SolverConfig,
    truth: Option<&ComplexSignal>,
    observer: &mut dyn FnMut(usize, &ComplexSignal),
) -> Result<SolverTrace> {
    config.validate()?;
    ensemble.check_data(data)?;
    let init = spectral_init(ensemble, data)?;
    let init_flops = flops::spectral_init(ensemble.m(), ensemble.n());
    iterate(ensemble, data, config, init.rho0, init.lambda0, init_flops, truth, observer)
}

/// Gradient descent from a caller-supplied starting point. The eigenvalue slot
/// of the trace holds `‖ρ₀‖²`.
pub fn solve_from(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
    config: &SolverConfig,
    init: ComplexSignal,
    truth: Option<&ComplexSignal>,
) -> Result<SolverTrace> {
    config.validate()?;
    check(ensemble, data, &init)?;
    let lambda = init.norm_sqr();
    iterate(ensemble, data, config, init, lambda, 0, truth, &mut |_, _| {})
}

#[allow(clippy::too_many_arguments)]
fn iterate(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
    config: &SolverConfig,
    init: ComplexSignal,
    init_eigenvalue: f64,
    init_flops: u64,
    truth: Option<&ComplexSignal>,
    observer: &mut dyn FnMut(usize, &ComplexSignal),
) -> Result<SolverTrace> {
    if let Some(t) = truth {
        check_lengths(&init, t)?;
    }
    let n = ensemble.n();
    let per_iter = flops::gwf_iteration(ensemble.m(), n);
    let scale = if config.normalize_by_init {
        let s = init.norm_sqr();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    } else {
        1.0
    };
    let d = data.as_slice();
    let mut rho = init.as_slice().to_vec();
    let mut last_good = rho.clone();
    let mut grad = vec![ZERO; n];
    let mut records = Vec::new();
    let mut prev_obj = f64::NAN;
    let mut step = 0.0;
    let mut k = 0;
    loop {
        let obj = objective_and_gradient(ensemble, d, &rho, &mut grad);
        let current = ComplexSignal::from_vec_unchecked(rho.clone());
        let finite = obj.is_finite() && current.is_finite();
        let stop_now = k > 0
            && config.stop_tol > 0.0
            && (obj - prev_obj).abs() < config.stop_tol * prev_obj.abs();
        let done = k == config.max_iters || stop_now || !finite;
        if finite && (k % config.record_every == 0 || done) {
            let (dist, rel_err) = record_distance(&current, truth)?;
            records.push(TraceRecord {
                k,
                objective: obj,
                step,
                flops: init_flops + k as u64 * per_iter,
                dist,
                rel_err,
            });
            observer(k, &current);
        }
        if !finite {
            let trace = SolverTrace {
                records,
                final_estimate: ComplexSignal::from_vec_unchecked(last_good),
                init_estimate: init,
                init_eigenvalue,
                iterations: k.saturating_sub(1),
            };
            return Err(Error::Divergence {
                iteration: k,
                trace: Box::new(trace),
            });
        }
        if done {
            return Ok(SolverTrace {
                records,
                final_estimate: current,
                init_estimate: init,
                init_eigenvalue,
                iterations: k,
            });
        }
        prev_obj = obj;
        last_good.copy_from_slice(&rho);
        k += 1;
        step = step_size(k, &config.step_schedule);
        let mu = step / scale;
        for (x, g) in rho.iter_mut().zip(&grad) {
            *x -= g * mu;
        }
    }
}
