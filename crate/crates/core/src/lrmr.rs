//! Lifted-domain baselines: Uzawa iterations with singular value
//! thresholding, in trace-regularized, rank-1 constrained and PSD-only form.
//!
//! Each iteration takes a dual ascent step on the data constraint and maps the
//! backprojected multipliers through a spectral projection:
//!
//! ```text
//! ν_k = ν_{k-1} + μ (d - F(X_{k-1}))
//! X_k = Proj(P_S(F^H ν_k))
//! ```
//!
//! Starting from `X_0 = 0, ν_0 = 0`, the first iterate is the projection of the
//! spectral matrix `(1/M) P_S(F^H d)` when `μ = 1/M`. The backprojection of
//! cross-correlations is not Hermitian, so it is symmetrized before any
//! eigen-projection.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops;
use crate::gwf::dist;
use crate::linalg;
use crate::measurement::{
    lifted_adjoint, lifted_apply, project_rank1_psd, project_symmetric, ComplexSignal,
    InterferometricData, LiftedMatrix, MeasurementEnsemble,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UzawaVariant {
    /// Trace regularization: shrink eigenvalues by `τ = μλ`, then clamp to PSD.
    TraceReg { lambda: f64 },
    /// PSD projection followed by the best rank-1 approximation.
    Rank1,
    PsdOnly,
}

impl UzawaVariant {
    pub fn name(&self) -> &'static str {
        match self {
            UzawaVariant::TraceReg { .. } => "uzawa_trace",
            UzawaVariant::Rank1 => "uzawa_rank1",
            UzawaVariant::PsdOnly => "uzawa_psd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UzawaConfig {
    pub variant: UzawaVariant,
    pub step: f64,
    pub max_iters: usize,
    pub record_every: usize,
}

impl UzawaConfig {
    /// 110 iterations with `μ = 1/M`.
    pub fn new(variant: UzawaVariant, m: usize) -> Self {
        Self {
            variant,
            step: 1.0 / m as f64,
            max_iters: 110,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("uzawa step must be positive, got {}", self.step)));
        }
        if self.max_iters == 0 || self.record_every == 0 {
            return Err(Error::Config("uzawa max_iters and record_every must be >= 1".into()));
        }
        if let UzawaVariant::TraceReg { lambda } = self.variant {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(Error::Config(format!("trace lambda must be nonnegative, got {lambda}")));
            }
        }
        Ok(())
    }
}

/// Estimate of `‖F‖²`, the largest eigenvalue of `F^H F` on `N x N` matrices,
/// from `iters` power iterations with a fixed start.
pub fn lifted_norm_sq(ensemble: &MeasurementEnsemble, iters: usize) -> Result<f64> {
    let n = ensemble.n();
    let mut x = LiftedMatrix::new(nalgebra::DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(1.0 + (i * n + j) as f64 / (n * n) as f64, 0.0)
    }))?;
    let mut estimate = 0.0;
    for _ in 0..iters.max(1) {
        let norm = x.frobenius_norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        x = x.scale(1.0 / norm);
        let y = lifted_apply(ensemble, &x)?;
        estimate = y.iter().map(|z| z.norm_sqr()).sum();
        x = lifted_adjoint(ensemble, &y)?;
    }
    Ok(estimate)
}

/// `min(1/M, 1/‖F‖²)`: the dual step `1/M` overshoots when the sampling
/// vectors are strongly correlated.
pub fn stable_step(ensemble: &MeasurementEnsemble) -> Result<f64> {
    let l = lifted_norm_sq(ensemble, 50)?;
    let inv_m = 1.0 / ensemble.m() as f64;
    Ok(if l > 0.0 { inv_m.min(1.0 / l) } else { inv_m })
}

/// `1e-2 · ‖d‖₁ / M`.
pub fn default_trace_lambda(data: &InterferometricData) -> f64 {
    1e-2 * data.l1_norm() / data.len().max(1) as f64
}

/// Replaces each eigenvalue `λ` of the Hermitian part of `x` with
/// `sign(λ) · max(|λ| - τ, 0)`.
pub fn svt_shrink(x: &LiftedMatrix, tau: f64) -> Result<LiftedMatrix> {
    if !(tau >= 0.0) {
        return Err(Error::Domain {
            what: "shrinkage threshold",
            value: tau,
        });
    }
    let h = project_symmetric(x);
    if tau == 0.0 {
        return Ok(h);
    }
    let eig = linalg::hermitian_eigen(h.matrix())?;
    let shrunk = eig.reconstruct_with(|l| l.signum() * (l.abs() - tau).max(0.0));
    Ok(project_symmetric(&LiftedMatrix::new(shrunk)?))
}

fn spectral_projection(z: &LiftedMatrix, variant: UzawaVariant, step: f64) -> Result<LiftedMatrix> {
    let h = project_symmetric(z);
    match variant {
        UzawaVariant::Rank1 => Ok(project_rank1_psd(&h)?.reconstruct()),
        UzawaVariant::PsdOnly | UzawaVariant::TraceReg { .. } => {
            let tau = match variant {
                UzawaVariant::TraceReg { lambda } => step * lambda,
                _ => 0.0,
            };
            let eig = linalg::hermitian_eigen(h.matrix())?;
            let out = eig.reconstruct_with(|l| (l - tau).max(0.0));
            Ok(project_symmetric(&LiftedMatrix::new(out)?))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UzawaState {
    pub x: LiftedMatrix,
    pub nu: Vec<Complex64>,
}

impl UzawaState {
    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            x: LiftedMatrix::zeros(n),
            nu: vec![Complex64::new(0.0, 0.0); m],
        }
    }
}

fn dual_and_primal(
    ensemble: &MeasurementEnsemble,
    data: &[Complex64],
    nu: &[Complex64],
    fx: &[Complex64],
    config: &UzawaConfig,
) -> Result<(LiftedMatrix, Vec<Complex64>)> {
    let nu_next: Vec<Complex64> = nu
        .iter()
        .zip(data)
        .zip(fx)
        .map(|((v, d), f)| v + (d - f) * config.step)
        .collect();
    let back = lifted_adjoint(ensemble, &nu_next)?;
    let x = spectral_projection(&back, config.variant, config.step)?;
    Ok((x, nu_next))
}

/// One dual-then-primal Uzawa update.
pub fn uzawa_step(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
    state: &UzawaState,
    config: &UzawaConfig,
) -> Result<UzawaState> {
    ensemble.check_data(data)?;
    if state.nu.len() != ensemble.m() {
        return Err(Error::dim("uzawa multipliers vs ensemble M", ensemble.m(), state.nu.len()));
    }
    let fx = lifted_apply(ensemble, &state.x)?;
    let (x, nu) = dual_and_primal(ensemble, data.as_slice(), &state.nu, &fx, config)?;
    Ok(UzawaState { x, nu })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedRecord {
    pub k: usize,
    /// `‖X_k - ρ_tρ_t^H‖_F²`.
    pub lifted_mse: Option<f64>,
    /// `dist²` between the best rank-1 extraction of `X_k` and the truth.
    pub signal_mse: Option<f64>,
    /// `‖F(X_k) - d‖²`.
    pub residual: f64,
    pub flops: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedTrace {
    pub records: Vec<LiftedRecord>,
    pub final_matrix: LiftedMatrix,
}

impl LiftedTrace {
    pub fn last(&self) -> &LiftedRecord {
        self.records.last().expect("trace always holds the initial record")
    }
}

/// Best rank-1 signal estimate `√λ₀ v₀` of a lifted iterate.
pub fn rank1_signal(x: &LiftedMatrix) -> Result<ComplexSignal> {
    Ok(project_rank1_psd(x)?.signal())
}

fn lifted_record(
    k: usize,
    x: &LiftedMatrix,
    fx: &[Complex64],
    data: &[Complex64],
    flops: u64,
    truth: Option<(&ComplexSignal, &LiftedMatrix)>,
) -> Result<LiftedRecord> {
    let residual = fx.iter().zip(data).map(|(f, d)| (f - d).norm_sqr()).sum();
    let (lifted_mse, signal_mse) = match truth {
        None => (None, None),
        Some((t, tt)) => {
            let lm = x.sub(tt).frobenius_norm().powi(2);
            let sm = dist(&rank1_signal(x)?, t)?.powi(2);
            (Some(lm), Some(sm))
        }
    };
    Ok(LiftedRecord {
        k,
        lifted_mse,
        signal_mse,
        residual,
        flops,
    })
}

fn finite_matrix(x: &LiftedMatrix) -> bool {
    x.matrix().iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Runs `config.max_iters` Uzawa iterations from `X_0 = 0, ν_0 = 0`.
/// Fails with `LiftedDivergence` once an iterate or its residual is not finite.
pub fn uzawa_solve(
    ensemble: &MeasurementEnsemble,
    data: &InterferometricData,
    config: &UzawaConfig,
    truth: Option<&ComplexSignal>,
) -> Result<LiftedTrace> {
    config.validate()?;
    ensemble.check_data(data)?;
    if let Some(t) = truth {
        ensemble.check_signal(t)?;
    }
    let (n, m) = (ensemble.n(), ensemble.m());
    let truth_outer = truth.map(|t| t.outer());
    let truth_pair = truth.zip(truth_outer.as_ref());
    let per_iter = flops::lifted_iteration(m, n);
    let d = data.as_slice();

    let mut x = LiftedMatrix::zeros(n);
    let mut nu = vec![Complex64::new(0.0, 0.0); m];
    let mut fx = vec![Complex64::new(0.0, 0.0); m];
    let mut records = vec![lifted_record(0, &x, &fx, d, 0, truth_pair)?];

    for k in 1..=config.max_iters {
        let step = dual_and_primal(ensemble, d, &nu, &fx, config);
        let (x_next, nu_next) = match step {
            Ok(pair) if finite_matrix(&pair.0) => pair,
            Ok(_) | Err(Error::Eigen { .. }) => {
                return Err(Error::LiftedDivergence {
                    iteration: k,
                    trace: Box::new(LiftedTrace {
                        records,
                        final_matrix: x,
                    }),
                })
            }
            Err(e) => return Err(e),
        };
        let fx_next = lifted_apply(ensemble, &x_next)?;
        let residual: f64 = fx_next.iter().zip(d).map(|(a, b)| (a - b).norm_sqr()).sum();
        if !residual.is_finite() {
            return Err(Error::LiftedDivergence {
                iteration: k,
                trace: Box::new(LiftedTrace {
                    records,
                    final_matrix: x,
                }),
            });
        }
        x = x_next;
        nu = nu_next;
        fx = fx_next;
        if k % config.record_every == 0 || k == config.max_iters {
            records.push(lifted_record(k, &x, &fx, d, k as u64 * per_iter, truth_pair)?);
        }
    }
    Ok(LiftedTrace {
        records,
        final_matrix: x,
    })
}
