//! Multistatic passive radar: scene geometry, full bistatic data simulation,
//! look-direction inversion vectors, phantoms and imaging experiments.
//!
//! Phase conventions. The linear measurement at receiver `i` and frequency
//! `ω` is the plain sum `f_i(ω) = Σ_k exp(-iω(|x_k - a_i| + |x_k - a_t|)/c₀) ρ_k`,
//! and the data are `d = f_i conj(f_j)`. Inversion vectors carry the opposite
//! sign, `L_ik = exp(iω(|x_k - a_i| - â_t·x_k)/c₀)`, because the correlation
//! operator applies `L^H`; with this choice `forward_correlate` over the
//! inversion ensemble reproduces the data up to the far-field transmitter
//! approximation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops;
use crate::gwf::{self, SolverConfig, SolverTrace, StepSchedule};
use crate::lrmr::{self, default_trace_lambda, UzawaConfig, UzawaVariant};
use crate::measurement::{ComplexSignal, InterferometricData, MeasurementEnsemble};
use crate::seed::{self, stream};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Which forward model generates the simulated data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DataModel {
    /// Exact bistatic ranges.
    #[default]
    Full,
    /// The look-direction model used for inversion (no model mismatch).
    LookDirection,
}

pub const RADAR_SCHEMA_VERSION: u32 = 1;

fn schema_v1() -> u32 {
    RADAR_SCHEMA_VERSION
}

/// Scene, antenna and iteration settings; JSON field names carry units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    #[serde(default = "schema_v1")]
    pub schema_version: u32,
    pub nx: usize,
    pub ny: usize,
    pub pixel_m: f64,
    pub receivers: usize,
    pub receiver_radius_m: f64,
    pub receiver_height_m: f64,
    pub transmitter_m: [f64; 3],
    pub center_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub freq_samples: usize,
    #[serde(default)]
    pub data_model: DataModel,
    pub gwf_iters: usize,
    pub uzawa_iters: usize,
}

impl RadarConfig {
    /// 12x12 scene, 12 m pixels, 12 receivers, 10 MHz around 1.9 GHz.
    pub fn small() -> Self {
        Self {
            schema_version: RADAR_SCHEMA_VERSION,
            nx: 12,
            ny: 12,
            pixel_m: 12.0,
            receivers: 12,
            receiver_radius_m: 10_000.0,
            receiver_height_m: 500.0,
            transmitter_m: [11_500.0, 11_500.0, 500.0],
            center_freq_hz: 1.9e9,
            bandwidth_hz: 10e6,
            freq_samples: 32,
            data_model: DataModel::Full,
            gwf_iters: 8000,
            uzawa_iters: 110,
        }
    }

    /// 31x31 scene, 10 m pixels, 16 receivers, 20 MHz around 1 GHz.
    pub fn paper() -> Self {
        Self {
            nx: 31,
            ny: 31,
            pixel_m: 10.0,
            receivers: 16,
            center_freq_hz: 1e9,
            bandwidth_hz: 20e6,
            gwf_iters: 10_000,
            ..Self::small()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "small" => Ok(Self::small()),
            "paper" => Ok(Self::paper()),
            other => Err(Error::Config(format!("unknown radar preset '{other}' (small, paper)"))),
        }
    }

    pub fn n(&self) -> usize {
        self.nx * self.ny
    }

    pub fn pair_count(&self) -> usize {
        self.receivers * self.receivers.saturating_sub(1) / 2
    }

    pub fn m(&self) -> usize {
        self.freq_samples * self.pair_count()
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                issues.push(format!("{name}: must be positive, got {v}"));
            }
        };
        positive("pixel_m", self.pixel_m);
        positive("receiver_radius_m", self.receiver_radius_m);
        positive("center_freq_hz", self.center_freq_hz);
        if self.schema_version != RADAR_SCHEMA_VERSION {
            issues.push(format!(
                "schema_version: expected {RADAR_SCHEMA_VERSION}, got {}",
                self.schema_version
            ));
        }
        if self.nx == 0 {
            issues.push("nx: must be >= 1".into());
        }
        if self.ny == 0 {
            issues.push("ny: must be >= 1".into());
        }
        if self.receivers < 2 {
            issues.push(format!("receivers: need >= 2, got {}", self.receivers));
        }
        if self.freq_samples == 0 {
            issues.push("freq_samples: must be >= 1".into());
        }
        if self.gwf_iters == 0 {
            issues.push("gwf_iters: must be >= 1".into());
        }
        if self.uzawa_iters == 0 {
            issues.push("uzawa_iters: must be >= 1".into());
        }
        if !(self.bandwidth_hz >= 0.0 && self.bandwidth_hz < 2.0 * self.center_freq_hz) {
            issues.push(format!("bandwidth_hz: {} must lie in [0, 2 center_freq_hz)", self.bandwidth_hz));
        }
        if !self.receiver_height_m.is_finite() {
            issues.push("receiver_height_m: must be finite".into());
        }
        if self.transmitter_m.iter().any(|v| !v.is_finite()) {
            issues.push("transmitter_m: coordinates must be finite".into());
        } else if self.transmitter_m.iter().all(|&v| v == 0.0) {
            issues.push("transmitter_m: origin has no look direction".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneGeometry {
    pub nx: usize,
    pub ny: usize,
    pub pixel_m: f64,
    /// Pixel centers, `k = iy·nx + ix`, on the plane `z = 0`.
    pub grid: Vec<[f64; 3]>,
    pub receivers: Vec<[f64; 3]>,
    pub transmitter: [f64; 3],
    /// Angular frequencies (rad/s).
    pub omegas: Vec<f64>,
    pub c0: f64,
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Pixel grid, receiver circle and frequency samples for `config`.
pub fn make_geometry(config: &RadarConfig) -> Result<SceneGeometry> {
    config.validate()?;
    let (nx, ny, dx) = (config.nx, config.ny, config.pixel_m);
    let mut grid = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            grid.push([
                (ix as f64 - (nx as f64 - 1.0) / 2.0) * dx,
                (iy as f64 - (ny as f64 - 1.0) / 2.0) * dx,
                0.0,
            ]);
        }
    }
    let s = config.receivers;
    let receivers = (0..s)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / s as f64;
            [
                config.receiver_radius_m * th.cos(),
                config.receiver_radius_m * th.sin(),
                config.receiver_height_m,
            ]
        })
        .collect();
    let wc = 2.0 * PI * config.center_freq_hz;
    let half = PI * config.bandwidth_hz;
    let mp = config.freq_samples;
    let omegas = (0..mp)
        .map(|q| {
            if mp == 1 {
                wc
            } else {
                wc - half + 2.0 * half * q as f64 / (mp - 1) as f64
            }
        })
        .collect();
    let geometry = SceneGeometry {
        nx,
        ny,
        pixel_m: dx,
        grid,
        receivers,
        transmitter: config.transmitter_m,
        omegas,
        c0: SPEED_OF_LIGHT,
    };
    if geometry.grid.iter().any(|x| distance(x, &geometry.transmitter) < 1e-9) {
        return Err(Error::Config("transmitter lies on the scene grid".into()));
    }
    Ok(geometry)
}

impl SceneGeometry {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    /// Receiver pairs `i < j` in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let s = self.receivers.len();
        (0..s).flat_map(|i| (i + 1..s).map(move |j| (i, j))).collect()
    }

    fn check(&self, receiver: usize, freq: usize) -> Result<()> {
        if receiver >= self.receivers.len() {
            return Err(Error::InvalidInput(format!("receiver index {receiver} out of range")));
        }
        if freq >= self.omegas.len() {
            return Err(Error::InvalidInput(format!("frequency index {freq} out of range")));
        }
        Ok(())
    }

    fn look_direction(&self) -> [f64; 3] {
        let t = self.transmitter;
        let norm = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        [t[0] / norm, t[1] / norm, t[2] / norm]
    }

    /// `exp(-iω(|x_k - a_i| + |x_k - a_t|)/c₀)`; combined with `ρ` by a plain
    /// (unconjugated) sum.
    pub fn full_measurement_vector(&self, receiver: usize, freq: usize) -> Result<Vec<Complex64>> {
        self.check(receiver, freq)?;
        let a = &self.receivers[receiver];
        let k = self.omegas[freq] / self.c0;
        Ok(self
            .grid
            .iter()
            .map(|x| Complex64::from_polar(1.0, -k * (distance(x, a) + distance(x, &self.transmitter))))
            .collect())
    }

    /// `exp(iω(|x_k - a_i| - â_t·x_k)/c₀)`, applied through `L^H`.
    pub fn approx_measurement_vector(&self, receiver: usize, freq: usize) -> Result<Vec<Complex64>> {
        self.check(receiver, freq)?;
        let a = &self.receivers[receiver];
        let u = self.look_direction();
        let k = self.omegas[freq] / self.c0;
        Ok(self
            .grid
            .iter()
            .map(|x| {
                let proj = u[0] * x[0] + u[1] * x[1] + u[2] * x[2];
                Complex64::from_polar(1.0, k * (distance(x, a) - proj))
            })
            .collect())
    }

    /// Linear measurement `f_i(ω)` of `rho` under `model`.
    pub fn linear_measurement(
        &self,
        rho: &[Complex64],
        receiver: usize,
        freq: usize,
        model: DataModel,
    ) -> Result<Complex64> {
        if rho.len() != self.n() {
            return Err(Error::dim("scene reflectivity vs grid", self.n(), rho.len()));
        }
        Ok(match model {
            DataModel::Full => self
                .full_measurement_vector(receiver, freq)?
                .iter()
                .zip(rho)
                .map(|(l, r)| l * r)
                .sum(),
            DataModel::LookDirection => self
                .approx_measurement_vector(receiver, freq)?
                .iter()
                .zip(rho)
                .map(|(l, r)| l.conj() * r)
                .sum(),
        })
    }

    /// `d_ij(ω) = f_i(ω) conj(f_j(ω))`.
    pub fn correlate_pair(
        &self,
        rho: &[Complex64],
        i: usize,
        j: usize,
        freq: usize,
        model: DataModel,
    ) -> Result<Complex64> {
        Ok(self.linear_measurement(rho, i, freq, model)?
            * self.linear_measurement(rho, j, freq, model)?.conj())
    }

    /// Look-direction inversion ensemble, pair-major then frequency ascending.
    pub fn build_inversion_ensemble(&self) -> Result<MeasurementEnsemble> {
        let n = self.n();
        let nf = self.omegas.len();
        let vectors: Vec<Vec<Vec<Complex64>>> = (0..self.receivers.len())
            .map(|r| (0..nf).map(|f| self.approx_measurement_vector(r, f)).collect())
            .collect::<Result<_>>()?;
        let pairs = self.pairs();
        let mut left = Vec::with_capacity(pairs.len() * nf * n);
        let mut right = Vec::with_capacity(pairs.len() * nf * n);
        for &(i, j) in &pairs {
            for f in 0..nf {
                left.extend_from_slice(&vectors[i][f]);
                right.extend_from_slice(&vectors[j][f]);
            }
        }
        MeasurementEnsemble::interferometric(n, left, right)
    }
}

/// Inversion ensemble and data correlated from the phantom under `model`.
pub fn simulate_interferometric_data(
    geometry: &SceneGeometry,
    phantom: &Phantom,
    model: DataModel,
) -> Result<(MeasurementEnsemble, InterferometricData)> {
    if phantom.nx != geometry.nx || phantom.ny != geometry.ny {
        return Err(Error::dim("phantom pixels vs grid", geometry.n(), phantom.reflectivity.len()));
    }
    let rho = phantom.as_signal_values();
    let nf = geometry.omegas.len();
    let measurements: Vec<Vec<Complex64>> = (0..geometry.receivers.len())
        .into_par_iter()
        .map(|r| {
            (0..nf)
                .map(|f| geometry.linear_measurement(&rho, r, f, model))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let data: Vec<Complex64> = geometry
        .pairs()
        .iter()
        .flat_map(|&(i, j)| (0..nf).map(move |f| (i, j, f)))
        .map(|(i, j, f)| measurements[i][f] * measurements[j][f].conj())
        .collect();
    let ensemble = geometry.build_inversion_ensemble()?;
    Ok((ensemble, InterferometricData::new(data)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTarget {
    pub ix: usize,
    pub iy: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectTarget {
    pub ix: usize,
    pub iy: usize,
    pub width: usize,
    pub height: usize,
    pub amplitude: f64,
}

/// Shapes are drawn in order (points, then rectangles); later shapes
/// overwrite earlier ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PhantomSpec {
    pub points: Vec<PointTarget>,
    pub rects: Vec<RectTarget>,
}

impl PhantomSpec {
    /// Stand-in scene with three point targets and two extended targets,
    /// positioned by fractions of the grid size.
    pub fn default_for(nx: usize, ny: usize) -> Self {
        let at = |n: usize, num: usize, den: usize| (n * num / den).min(n.saturating_sub(1));
        let span = |n: usize| (n / 4).max(1);
        Self {
            points: vec![
                PointTarget { ix: at(nx, 1, 6), iy: at(ny, 1, 6), amplitude: 1.0 },
                PointTarget { ix: at(nx, 3, 4), iy: at(ny, 1, 3), amplitude: 0.8 },
                PointTarget { ix: at(nx, 1, 2), iy: at(ny, 3, 4), amplitude: 0.6 },
            ],
            rects: vec![
                RectTarget {
                    ix: at(nx, 1, 3),
                    iy: at(ny, 1, 6),
                    width: span(nx).min(nx - at(nx, 1, 3)),
                    height: (span(ny) / 2).max(1).min(ny - at(ny, 1, 6)),
                    amplitude: 0.7,
                },
                RectTarget {
                    ix: at(nx, 1, 12),
                    iy: at(ny, 1, 2),
                    width: (span(nx) / 2).max(1).min(nx - at(nx, 1, 12)),
                    height: span(ny).min(ny - at(ny, 1, 2)),
                    amplitude: 0.5,
                },
            ],
        }
    }

    /// Three points and two rectangles with uniform positions, sizes up to a
    /// quarter of the grid, and amplitudes in `[0.5, 1]`.
    pub fn random(nx: usize, ny: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed::derive(seed, &[stream::PHANTOM]));
        let points = (0..3)
            .map(|_| PointTarget {
                ix: rng.random_range(0..nx),
                iy: rng.random_range(0..ny),
                amplitude: rng.random_range(0.5..=1.0),
            })
            .collect();
        let rects = (0..2)
            .map(|_| {
                let width = rng.random_range(1..=(nx / 4).max(1));
                let height = rng.random_range(1..=(ny / 4).max(1));
                RectTarget {
                    ix: rng.random_range(0..=nx - width),
                    iy: rng.random_range(0..=ny - height),
                    width,
                    height,
                    amplitude: rng.random_range(0.5..=1.0),
                }
            })
            .collect();
        Self { points, rects }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phantom {
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `k = iy·nx + ix`.
    pub reflectivity: Vec<f64>,
    pub spec: PhantomSpec,
}

impl Phantom {
    pub fn as_signal_values(&self) -> Vec<Complex64> {
        self.reflectivity.iter().map(|&r| Complex64::new(r, 0.0)).collect()
    }

    pub fn as_signal(&self) -> Result<ComplexSignal> {
        ComplexSignal::new(self.as_signal_values())
    }
}

pub fn make_phantom(spec: &PhantomSpec, nx: usize, ny: usize) -> Result<Phantom> {
    let bad_amp = |a: f64| !(a >= 0.0 && a.is_finite());
    let mut img = vec![0.0; nx * ny];
    for p in &spec.points {
        if p.ix >= nx || p.iy >= ny {
            return Err(Error::InvalidInput(format!("point ({}, {}) outside {nx}x{ny} grid", p.ix, p.iy)));
        }
        if bad_amp(p.amplitude) {
            return Err(Error::InvalidInput(format!("amplitude {} must be finite and >= 0", p.amplitude)));
        }
        img[p.iy * nx + p.ix] = p.amplitude;
    }
    for r in &spec.rects {
        if r.width == 0 || r.height == 0 || r.ix + r.width > nx || r.iy + r.height > ny {
            return Err(Error::InvalidInput(format!(
                "rectangle at ({}, {}) size {}x{} outside {nx}x{ny} grid",
                r.ix, r.iy, r.width, r.height
            )));
        }
        if bad_amp(r.amplitude) {
            return Err(Error::InvalidInput(format!("amplitude {} must be finite and >= 0", r.amplitude)));
        }
        for iy in r.iy..r.iy + r.height {
            for ix in r.ix..r.ix + r.width {
                img[iy * nx + ix] = r.amplitude;
            }
        }
    }
    Ok(Phantom {
        nx,
        ny,
        reflectivity: img,
        spec: spec.clone(),
    })
}

/// `|ρ|`, unaffected by the global phase ambiguity.
pub fn aligned_magnitude(estimate: &ComplexSignal) -> Vec<f64> {
    estimate.as_slice().iter().map(|z| z.norm()).collect()
}

/// `‖ |ρ̂| - ρ_t ‖ / ‖ρ_t‖` for a real nonnegative truth.
pub fn magnitude_rel_err(estimate: &ComplexSignal, phantom: &Phantom) -> f64 {
    let mag = aligned_magnitude(estimate);
    let num: f64 = mag
        .iter()
        .zip(&phantom.reflectivity)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let den: f64 = phantom.reflectivity.iter().map(|b| b * b).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImagingResult {
    pub trace: SolverTrace,
    /// `|ρ̂|`, row-major.
    pub image: Vec<f64>,
    /// Phase-aligned complex relative error at the final iterate.
    pub rel_err: f64,
    /// Relative error of the magnitude image.
    pub magnitude_rel_err: f64,
    /// `(k, magnitude relative error)` at every recorded iterate.
    pub magnitude_trace: Vec<(usize, f64)>,
    pub m: usize,
}

pub fn gwf_config(iters: usize, record_every: usize) -> SolverConfig {
    SolverConfig {
        max_iters: iters,
        step_schedule: StepSchedule::default_ramp(),
        normalize_by_init: true,
        stop_tol: 0.0,
        record_every: record_every.max(1),
    }
}

/// Simulates data for the phantom and images it with GWF.
pub fn run_imaging_experiment(
    config: &RadarConfig,
    phantom: &Phantom,
    solver: &SolverConfig,
) -> Result<ImagingResult> {
    let geometry = make_geometry(config)?;
    let (ensemble, data) = simulate_interferometric_data(&geometry, phantom, config.data_model)?;
    let truth = phantom.as_signal()?;
    let mut magnitude_trace = Vec::new();
    let trace = gwf::solve_observed(&ensemble, &data, solver, Some(&truth), &mut |k, rho| {
        magnitude_trace.push((k, magnitude_rel_err(rho, phantom)));
    })?;
    let image = aligned_magnitude(&trace.final_estimate);
    let rel_err = trace.last().rel_err.unwrap_or(f64::NAN);
    let magnitude_rel_err = magnitude_rel_err(&trace.final_estimate, phantom);
    Ok(ImagingResult {
        trace,
        image,
        rel_err,
        magnitude_rel_err,
        magnitude_trace,
        m: ensemble.m(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub k: usize,
    pub flops: u64,
    pub lifted_mse: f64,
    pub signal_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub iterations: usize,
    pub flops: u64,
    pub lifted_mse: f64,
    pub signal_mse: f64,
    /// Set when the method stopped early on non-finite iterates.
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub rows: Vec<ComparisonRow>,
    pub summaries: Vec<MethodSummary>,
    /// Dual step used by every Uzawa run.
    pub uzawa_step: f64,
}

impl ComparisonResult {
    pub fn summary(&self, method: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// Best final signal MSE over every Uzawa run (all variants and all
    /// trace weights).
    pub fn best_uzawa_signal_mse(&self) -> f64 {
        self.summaries
            .iter()
            .filter(|s| s.method.starts_with("uzawa"))
            .map(|s| s.signal_mse)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    pub gwf_iters: usize,
    pub uzawa_iters: usize,
    /// GWF rows are emitted every this many iterations.
    pub gwf_record_every: usize,
    /// Trace weights as multiples of `‖d‖₁/M`.
    pub trace_lambda_factors: Vec<f64>,
}

impl ComparisonConfig {
    pub fn from_radar(config: &RadarConfig) -> Self {
        Self {
            gwf_iters: config.gwf_iters,
            uzawa_iters: config.uzawa_iters,
            gwf_record_every: 100,
            trace_lambda_factors: vec![1e-3, 1e-2, 1e-1],
        }
    }
}

fn uzawa_variants(data: &InterferometricData, factors: &[f64]) -> Vec<(String, UzawaVariant)> {
    let base = default_trace_lambda(data) / 1e-2;
    let mut out: Vec<(String, UzawaVariant)> = factors
        .iter()
        .map(|&f| {
            (
                format!("uzawa_trace_{f:e}"),
                UzawaVariant::TraceReg { lambda: f * base },
            )
        })
        .collect();
    out.push(("uzawa_rank1".into(), UzawaVariant::Rank1));
    out.push(("uzawa_psd".into(), UzawaVariant::PsdOnly));
    out
}

/// Runs GWF and every Uzawa variant on identical data and reports squared
/// errors against the flop ledger. Signal errors use the phase-aligned
/// distance; Uzawa signal estimates are the leading rank-1 factor. The Uzawa
/// dual step is [`lrmr::stable_step`].
pub fn run_comparison(
    config: &RadarConfig,
    phantom: &Phantom,
    cmp: &ComparisonConfig,
) -> Result<ComparisonResult> {
    let geometry = make_geometry(config)?;
    let (ensemble, data) = simulate_interferometric_data(&geometry, phantom, config.data_model)?;
    let truth = phantom.as_signal()?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();

    let solver = gwf_config(cmp.gwf_iters, cmp.gwf_record_every);
    let mut gwf_rows = Vec::new();
    let init_flops = flops::spectral_init(ensemble.m(), ensemble.n());
    let per_iter = flops::gwf_iteration(ensemble.m(), ensemble.n());
    let mut observe = |k: usize, rho: &ComplexSignal| {
        let lifted = gwf::lifted_dist_sq(rho, &truth).unwrap_or(f64::NAN);
        let signal = gwf::dist(rho, &truth).map(|d| d * d).unwrap_or(f64::NAN);
        gwf_rows.push(ComparisonRow {
            method: "gwf".into(),
            k,
            flops: init_flops + k as u64 * per_iter,
            lifted_mse: lifted,
            signal_mse: signal,
        });
    };
    let (iterations, diverged) =
        match gwf::solve_observed(&ensemble, &data, &solver, Some(&truth), &mut observe) {
            Ok(trace) => (trace.iterations, false),
            Err(Error::Divergence { trace, .. }) => (trace.iterations, true),
            Err(e) => return Err(e),
        };
    let last = gwf_rows.last().cloned().expect("initial iterate is recorded");
    summaries.push(MethodSummary {
        method: "gwf".into(),
        iterations,
        flops: last.flops,
        lifted_mse: last.lifted_mse,
        signal_mse: last.signal_mse,
        diverged,
    });
    rows.extend(gwf_rows);

    let uzawa_step = lrmr::stable_step(&ensemble)?;
    for (name, variant) in uzawa_variants(&data, &cmp.trace_lambda_factors) {
        let mut ucfg = UzawaConfig::new(variant, ensemble.m());
        ucfg.max_iters = cmp.uzawa_iters;
        ucfg.step = uzawa_step;
        let (trace, diverged) = match lrmr::uzawa_solve(&ensemble, &data, &ucfg, Some(&truth)) {
            Ok(t) => (t, false),
            Err(Error::LiftedDivergence { trace, .. }) => (*trace, true),
            Err(e) => return Err(e),
        };
        for r in &trace.records {
            rows.push(ComparisonRow {
                method: name.clone(),
                k: r.k,
                flops: r.flops,
                lifted_mse: r.lifted_mse.unwrap_or(f64::NAN),
                signal_mse: r.signal_mse.unwrap_or(f64::NAN),
            });
        }
        let last = trace.last();
        summaries.push(MethodSummary {
            method: name,
            iterations: last.k,
            flops: last.flops,
            lifted_mse: last.lifted_mse.unwrap_or(f64::NAN),
            signal_mse: last.signal_mse.unwrap_or(f64::NAN),
            diverged,
        });
    }
    Ok(ComparisonResult {
        rows,
        summaries,
        uzawa_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        let s = RadarConfig::small();
        s.validate().unwrap();
        assert_eq!(s.n(), 144);
        assert_eq!(s.pair_count(), 66);
        assert_eq!(s.m(), 66 * 32);
        let p = RadarConfig::paper();
        assert_eq!(p.n(), 961);
        assert_eq!(p.m(), 3840);
        assert!(RadarConfig::preset("huge").is_err());
    }

    #[test]
    fn invalid_counts_rejected() {
        let mut c = RadarConfig::small();
        c.receivers = 1;
        assert!(make_geometry(&c).is_err());
        c = RadarConfig::small();
        c.freq_samples = 0;
        assert!(make_geometry(&c).is_err());
    }

    #[test]
    fn default_phantom_fits_small_and_paper_grids() {
        for (nx, ny) in [(12, 12), (31, 31), (4, 4), (1, 1)] {
            let spec = PhantomSpec::default_for(nx, ny);
            make_phantom(&spec, nx, ny).unwrap();
            for seed in 0..10 {
                make_phantom(&PhantomSpec::random(nx, ny, seed), nx, ny).unwrap();
            }
        }
    }
}
