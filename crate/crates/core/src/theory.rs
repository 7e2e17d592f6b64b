//! Exact-recovery constants, the regularity feasibility check, constant
//! curves over `δ₁`, and Monte-Carlo probes of the rank-1 restricted isometry
//! constant and of the spectral-matrix expectation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{gen_gaussian_ensemble, gen_gaussian_phase_retrieval};
use crate::measurement::{
    forward_correlate, lifted_adjoint, ComplexSignal, EnsembleKind, MeasurementEnsemble,
};
use crate::seed::{self, stream};

/// Largest `δ₁` accepted by [`figure1_curves`]; `δ₂` reaches 1 here.
pub const DELTA1_CRITICAL: f64 = 0.214;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConstants {
    pub delta1: f64,
    pub epsilon: f64,
    pub delta2: f64,
    /// Lipschitz-type constant `(2 + ε)(1 + ε)(1 + δ₁)`.
    pub c: f64,
    /// `(1 - δ₂)(1 - ε)(2 - ε)`.
    pub h: f64,
}

fn domain(value: f64) -> Error {
    Error::Domain {
        what: "delta1",
        value,
    }
}

/// Evaluates `ε, δ₂, c, h` at `δ₁`.
///
/// Requires `0 ≤ δ₁ < 1`, `δ₁/(1 - δ₁) ≤ 1` and `ε < 1` so that every square
/// root is real.
pub fn constants_from_delta1(delta1: f64) -> Result<RecoveryConstants> {
    if !(0.0..1.0).contains(&delta1) {
        return Err(domain(delta1));
    }
    let kappa = delta1 / (1.0 - delta1);
    if kappa > 1.0 {
        return Err(domain(delta1));
    }
    // 1 - sqrt(1 - κ) = κ / (1 + sqrt(1 - κ)) avoids cancellation for small κ
    let gap = kappa / (1.0 + (1.0 - kappa).sqrt());
    let eps_sq = (2.0 + delta1) * gap + delta1 * delta1 / 8.0;
    let epsilon = eps_sq.sqrt();
    let denom = (1.0 - epsilon) * (2.0 - epsilon);
    if !(epsilon < 1.0 && denom > 0.0) {
        return Err(domain(delta1));
    }
    let delta2 = 2f64.sqrt() * (2.0 + epsilon) * delta1 / denom.sqrt();
    let c = (2.0 + epsilon) * (1.0 + epsilon) * (1.0 + delta1);
    let h = (1.0 - delta2) * denom;
    Ok(RecoveryConstants {
        delta1,
        epsilon,
        delta2,
        c,
        h,
    })
}

/// True iff `(1+δ₁)/α′ + c²/((1-δ₁)β′) ≤ h` and `α′β′ > 4`.
pub fn regularity_feasible(constants: &RecoveryConstants, alpha_prime: f64, beta_prime: f64) -> bool {
    let k = constants;
    if !(alpha_prime * beta_prime > 4.0) {
        return false;
    }
    let lhs = (1.0 + k.delta1) / alpha_prime + k.c * k.c / ((1.0 - k.delta1) * beta_prime);
    lhs <= k.h
}

/// Constants at each grid point, all within `[0, 0.214]`.
pub fn figure1_curves(grid: &[f64]) -> Result<Vec<RecoveryConstants>> {
    grid.iter()
        .map(|&d| {
            if !(0.0..=DELTA1_CRITICAL).contains(&d) {
                return Err(domain(d));
            }
            constants_from_delta1(d)
        })
        .collect()
}

/// `points` evenly spaced values from 0 to `max` inclusive.
pub fn linear_grid(max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| {
                if i + 1 == points {
                    max
                } else {
                    max * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

/// `|‖F(ρρ^H)‖² / (M ‖ρρ^H‖_F²) - 1|` for the `1/√M`-normalized lifted map.
pub fn ric_sample(ensemble: &MeasurementEnsemble, rho: &ComplexSignal) -> Result<f64> {
    let d = forward_correlate(ensemble, rho)?;
    let energy: f64 = d.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let lifted_norm_sq = rho.norm_sqr().powi(2);
    if lifted_norm_sq == 0.0 {
        return Err(Error::InvalidInput("RIC probe must be nonzero".into()));
    }
    Ok((energy / (ensemble.m() as f64 * lifted_norm_sq) - 1.0).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicEstimate {
    /// Largest sample; a lower bound on the rank-1 RIC.
    pub delta_hat: f64,
    pub samples: Vec<f64>,
    pub trials: usize,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Set when the ensemble is auto-correlation: the estimate is reported but
    /// no recovery guarantee may be derived from it.
    pub rip_claim_refused: bool,
}

impl RicEstimate {
    /// Recovery constants at `δ₁ = δ̂`; refused for auto-correlation ensembles.
    pub fn recovery_constants(&self) -> Result<RecoveryConstants> {
        if self.rip_claim_refused {
            return Err(Error::InvalidInput(
                "auto-correlation ensembles carry an identity bias; no RIP claim is made".into(),
            ));
        }
        constants_from_delta1(self.delta_hat)
    }
}

/// Random unit vector: standard complex Gaussian entries (real part first,
/// ascending index) normalized to unit length.
pub fn random_unit_signal(n: usize, seed: u64) -> Result<ComplexSignal> {
    let mut rng = seed::rng(seed);
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            return ComplexSignal::new(v.into_iter().map(|z| z / norm).collect());
        }
    }
}

/// Sample-based lower bound on the rank-1 RIC. Probe `t` uses the seed
/// derived from `(seed, t)`, so a longer run extends a shorter one.
pub fn estimate_ric_rank1(
    ensemble: &MeasurementEnsemble,
    trials: usize,
    seed: u64,
) -> Result<RicEstimate> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let samples = (0..trials)
        .map(|t| {
            let probe = random_unit_signal(ensemble.n(), seed::derive(seed, &[stream::PROBE, t as u64]))?;
            ric_sample(ensemble, &probe)
        })
        .collect::<Result<Vec<f64>>>()?;
    let delta_hat = samples.iter().copied().fold(0.0, f64::max);
    Ok(RicEstimate {
        delta_hat,
        samples,
        trials,
        n: ensemble.n(),
        m: ensemble.m(),
        seed,
        rip_claim_refused: ensemble.kind() == EnsembleKind::PhaseRetrieval,
    })
}

/// Spectral norm of a general complex matrix.
pub fn spectral_norm(x: &DMatrix<Complex64>) -> f64 {
    x.clone().singular_values().max()
}

/// Averages `Y = (1/M) F^H F(ρ_tρ_t^H)` over `ensembles` independent Gaussian
/// ensembles for a seeded unit `ρ_t` and returns `‖Ȳ - ρ_tρ_t^H‖₂`. Ensemble
/// `e` is drawn from the seed derived from `(seed, e)`, so runs with more
/// ensembles extend runs with fewer.
pub fn spectral_expectation_check(
    n: usize,
    m: usize,
    ensembles: usize,
    seed: u64,
    kind: EnsembleKind,
) -> Result<f64> {
    if n == 0 || m == 0 || ensembles == 0 {
        return Err(Error::Config("n, m and ensemble count must be >= 1".into()));
    }
    let truth = random_unit_signal(n, seed::derive(seed, &[stream::SIGNAL]))?;
    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    for e in 0..ensembles {
        let s = seed::derive(seed, &[stream::ENSEMBLE, e as u64]);
        let ens = match kind {
            EnsembleKind::Interferometric => gen_gaussian_ensemble(n, m, s)?,
            EnsembleKind::PhaseRetrieval => gen_gaussian_phase_retrieval(n, m, s)?,
        };
        let d = forward_correlate(&ens, &truth)?;
        sum += lifted_adjoint(&ens, d.as_slice())?.matrix();
    }
    let avg = sum / Complex64::new((ensembles * m) as f64, 0.0);
    Ok(spectral_norm(&(avg - truth.outer().matrix())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_corner() {
        let k = constants_from_delta1(0.0).unwrap();
        assert_eq!((k.epsilon, k.delta2, k.c, k.h), (0.0, 0.0, 2.0, 2.0));
        assert!(regularity_feasible(&k, 4.0, 4.0));
        assert!(!regularity_feasible(&k, 2.0, 2.0));
    }

    #[test]
    fn domain_errors() {
        for bad in [-0.1, 1.0, 0.6, f64::NAN] {
            assert!(constants_from_delta1(bad).is_err(), "{bad}");
        }
        assert!(figure1_curves(&[0.1, 0.3]).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = linear_grid(0.214, 100);
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[99], 0.214);
        assert_eq!(linear_grid(0.2, 1), vec![0.0]);
    }

    #[test]
    fn refuses_rip_claims_for_auto_correlation() {
        let ens = gen_gaussian_phase_retrieval(4, 64, 1).unwrap();
        let est = estimate_ric_rank1(&ens, 5, 2).unwrap();
        assert!(est.rip_claim_refused);
        assert!(est.recovery_constants().is_err());
    }
}
