//! Generalized Wirtinger Flow for interferometric inversion.
//!
//! Recovers a complex signal `ρ` from cross-correlations
//! `d_m = (L_i^H ρ) conj(L_j^H ρ)` by spectral initialization followed by
//! Wirtinger gradient descent, with lifted-domain Uzawa baselines, recovery
//! theory constants, and Gaussian and multistatic radar experiment harnesses.
//!
//! Inner products are conjugate-linear in the first argument: `⟨a, b⟩ = a^H b`.

pub mod error;
pub mod flops;
pub mod gaussian;
pub mod gwf;
pub mod io;
pub mod linalg;
pub mod lrmr;
pub mod measurement;
pub mod radar;
pub mod seed;
pub mod theory;

pub use error::{Error, Result};
pub use gwf::{solve, SolverConfig, SolverTrace, StepSchedule};
pub use measurement::{
    forward_correlate, lifted_adjoint, lifted_apply, ComplexSignal, EnsembleKind,
    InterferometricData, LiftedMatrix, MeasurementEnsemble,
};
pub use num_complex::Complex64;
