//! Cross-correlation measurement map, its lifted form and the matrix
//! projections shared by every solver.
//!
//! Inner products follow the convention `⟨a, b⟩ = a^H b`, so a measurement is
//! `d_m = (L_i^H ρ) · conj(L_j^H ρ) = L_i^H ρρ^H L_j`. All sums over
//! measurements run in ascending `m`, which keeps traces bit-reproducible.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, frobenius_norm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn all_finite(values: &[Complex64]) -> bool {
    values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// The unknown signal and its iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    values: Vec<Complex64>,
}

impl ComplexSignal {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("signal must have length >= 1".into()));
        }
        if !all_finite(&values) {
            return Err(Error::InvalidInput("signal has non-finite entries".into()));
        }
        Ok(Self { values })
    }

    /// Standard basis vector `e_k` of length `n`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut values = vec![ZERO; n];
        values[k] = Complex64::new(1.0, 0.0);
        Self { values }
    }

    pub(crate) fn from_vec_unchecked(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.values)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self, other⟩ = self^H other`.
    pub fn inner(&self, other: &ComplexSignal) -> Complex64 {
        linalg::inner(&self.values, &other.values)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|z| z * factor).collect(),
        }
    }

    /// Multiplies every entry by `e^{iφ}`.
    pub fn rotated(&self, phi: f64) -> Self {
        self.scaled(Complex64::from_polar(1.0, phi))
    }

    /// `ρρ^H`.
    pub fn outer(&self) -> LiftedMatrix {
        let n = self.len();
        LiftedMatrix::from_matrix_unchecked(DMatrix::from_fn(n, n, |a, b| {
            self.values[a] * self.values[b].conj()
        }))
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.values)
    }
}

/// Whether the two sensing processes are distinct (cross-correlations) or one
/// and the same (auto-correlations, i.e. phase retrieval).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EnsembleKind {
    Interferometric,
    PhaseRetrieval,
}

/// `M` pairs of length-`N` sampling vectors `(L_i^m, L_j^m)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble {
    n: usize,
    m: usize,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
    kind: EnsembleKind,
}

impl MeasurementEnsemble {
    /// Builds a cross-correlation ensemble from row-major `m x n` left and
    /// right blocks.
    pub fn interferometric(
        n: usize,
        left: Vec<Complex64>,
        right: Vec<Complex64>,
    ) -> Result<Self> {
        Self::build(n, left, right, EnsembleKind::Interferometric)
    }

    /// Builds an auto-correlation ensemble where `L_i^m == L_j^m`.
    pub fn phase_retrieval(n: usize, vectors: Vec<Complex64>) -> Result<Self> {
        let right = vectors.clone();
        Self::build(n, vectors, right, EnsembleKind::PhaseRetrieval)
    }

    pub fn from_pairs(n: usize, pairs: &[(Vec<Complex64>, Vec<Complex64>)]) -> Result<Self> {
        let mut left = Vec::with_capacity(pairs.len() * n);
        let mut right = Vec::with_capacity(pairs.len() * n);
        for (l, r) in pairs {
            if l.len() != n {
                return Err(Error::dim("ensemble left vector", n, l.len()));
            }
            if r.len() != n {
                return Err(Error::dim("ensemble right vector", n, r.len()));
            }
            left.extend_from_slice(l);
            right.extend_from_slice(r);
        }
        Self::interferometric(n, left, right)
    }

    fn build(
        n: usize,
        left: Vec<Complex64>,
        right: Vec<Complex64>,
        kind: EnsembleKind,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("ensemble dimension N must be >= 1".into()));
        }
        if left.len() % n != 0 || left.is_empty() {
            return Err(Error::InvalidInput(format!(
                "left block of {} entries is not a positive multiple of N = {n}",
                left.len()
            )));
        }
        if right.len() != left.len() {
            return Err(Error::dim("ensemble right block", left.len(), right.len()));
        }
        if !all_finite(&left) || !all_finite(&right) {
            return Err(Error::InvalidInput("ensemble has non-finite entries".into()));
        }
        let m = left.len() / n;
        Ok(Self {
            n,
            m,
            left,
            right,
            kind,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn left(&self, m: usize) -> &[Complex64] {
        &self.left[m * self.n..(m + 1) * self.n]
    }

    pub fn right(&self, m: usize) -> &[Complex64] {
        &self.right[m * self.n..(m + 1) * self.n]
    }

    pub fn left_block(&self) -> &[Complex64] {
        &self.left
    }

    pub fn right_block(&self) -> &[Complex64] {
        &self.right
    }

    pub(crate) fn check_signal(&self, signal: &ComplexSignal) -> Result<()> {
        if signal.len() != self.n {
            return Err(Error::dim("signal length vs ensemble N", self.n, signal.len()));
        }
        Ok(())
    }

    pub(crate) fn check_data(&self, data: &InterferometricData) -> Result<()> {
        if data.len() != self.m {
            return Err(Error::dim("data length vs ensemble M", self.m, data.len()));
        }
        Ok(())
    }
}

/// Cross-correlated measurements `d_ij^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferometricData {
    values: Vec<Complex64>,
}

impl InterferometricData {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if !all_finite(&values) {
            return Err(Error::InvalidInput("data has non-finite entries".into()));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum()
    }
}

/// Dense `N x N` complex matrix in the lifted domain. Structural properties
/// are never assumed; use the `is_*` checks.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMatrix {
    entries: DMatrix<Complex64>,
}

impl LiftedMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::dim("lifted matrix columns", entries.nrows(), entries.ncols()));
        }
        if entries.nrows() == 0 {
            return Err(Error::InvalidInput("lifted matrix must be at least 1x1".into()));
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_matrix_unchecked(entries: DMatrix<Complex64>) -> Self {
        Self { entries }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(&self.entries)
    }

    /// `⟨self, other⟩_F = tr(self^H other)`.
    pub fn frobenius_inner(&self, other: &LiftedMatrix) -> Complex64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn sub(&self, other: &LiftedMatrix) -> LiftedMatrix {
        LiftedMatrix::from_matrix_unchecked(&self.entries - &other.entries)
    }

    pub fn scale(&self, s: f64) -> LiftedMatrix {
        LiftedMatrix::from_matrix_unchecked(&self.entries * Complex64::new(s, 0.0))
    }

    /// `max |X - X^H|` is within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).all(|a| (0..=a).all(|b| (self.entries[(a, b)] - self.entries[(b, a)].conj()).norm() <= tol))
    }

    /// Hermitian within `tol` and minimum eigenvalue `>= -tol`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        if !self.is_hermitian(tol) {
            return Ok(false);
        }
        let eig = linalg::hermitian_eigen(&project_symmetric(self).entries)?;
        Ok(eig.values.last().copied().unwrap_or(0.0) >= -tol)
    }

    /// PSD within `tol` with at most one eigenvalue above `tol · λ_max`.
    pub fn is_rank1(&self, tol: f64) -> Result<bool> {
        if !self.is_hermitian(tol) {
            return Ok(false);
        }
        let eig = linalg::hermitian_eigen(&project_symmetric(self).entries)?;
        let scale = eig.values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        Ok(eig.values.iter().skip(1).all(|l| l.abs() <= tol * scale.max(1.0)))
    }
}

/// `d_m = (L_i^m)^H ρ · conj((L_j^m)^H ρ)`.
pub fn forward_correlate(
    ensemble: &MeasurementEnsemble,
    signal: &ComplexSignal,
) -> Result<InterferometricData> {
    ensemble.check_signal(signal)?;
    let rho = signal.as_slice();
    let values = (0..ensemble.m())
        .map(|m| {
            let fi = linalg::inner(ensemble.left(m), rho);
            let fj = linalg::inner(ensemble.right(m), rho);
            fi * fj.conj()
        })
        .collect();
    Ok(InterferometricData { values })
}

/// Lifted forward model `F(X)_m = (L_i^m)^H X L_j^m`.
pub fn lifted_apply(ensemble: &MeasurementEnsemble, x: &LiftedMatrix) -> Result<Vec<Complex64>> {
    if x.n() != ensemble.n() {
        return Err(Error::dim("lifted matrix vs ensemble N", ensemble.n(), x.n()));
    }
    let mut xl = vec![ZERO; ensemble.n()];
    Ok((0..ensemble.m())
        .map(|m| {
            linalg::mat_vec(&x.entries, ensemble.right(m), &mut xl);
            linalg::inner(ensemble.left(m), &xl)
        })
        .collect())
}

/// Backprojection `F^H(y) = Σ_m y_m L_i^m (L_j^m)^H`.
pub fn lifted_adjoint(ensemble: &MeasurementEnsemble, y: &[Complex64]) -> Result<LiftedMatrix> {
    if y.len() != ensemble.m() {
        return Err(Error::dim("backprojection input vs ensemble M", ensemble.m(), y.len()));
    }
    let n = ensemble.n();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    let mut scaled = vec![ZERO; n];
    for (m, &ym) in y.iter().enumerate() {
        if ym == ZERO {
            continue;
        }
        for (s, l) in scaled.iter_mut().zip(ensemble.left(m)) {
            *s = ym * l;
        }
        for (b, r) in ensemble.right(m).iter().enumerate() {
            let rc = r.conj();
            let mut col = out.column_mut(b);
            for a in 0..n {
                col[a] += scaled[a] * rc;
            }
        }
    }
    Ok(LiftedMatrix { entries: out })
}

/// `(X + X^H) / 2`.
pub fn project_symmetric(x: &LiftedMatrix) -> LiftedMatrix {
    let n = x.n();
    let e = &x.entries;
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for b in 0..n {
        for a in 0..n {
            out[(a, b)] = if a == b {
                Complex64::new(e[(a, a)].re, 0.0)
            } else {
                (e[(a, b)] + e[(b, a)].conj()) * 0.5
            };
        }
    }
    LiftedMatrix { entries: out }
}

/// Tolerance on `max |X - X^H|` below which a matrix is treated as Hermitian
/// without an explicit symmetrization.
pub const HERMITIAN_TOL: f64 = 1e-10;

fn hermitian_input(x: &LiftedMatrix) -> LiftedMatrix {
    // Always symmetrize: it is exact for Hermitian input and makes the
    // eigensolver see exactly real diagonals.
    if !x.is_hermitian(HERMITIAN_TOL) {
        log::debug!("symmetrizing non-Hermitian input before spectral projection");
    }
    project_symmetric(x)
}

/// Projection onto the PSD cone: clamp negative eigenvalues to zero.
pub fn project_psd(x: &LiftedMatrix) -> Result<LiftedMatrix> {
    let h = hermitian_input(x);
    let eig = linalg::hermitian_eigen(&h.entries)?;
    if eig.values.iter().all(|&l| l >= 0.0) {
        return Ok(h);
    }
    Ok(project_symmetric(&LiftedMatrix {
        entries: eig.reconstruct_with(|l| l.max(0.0)),
    }))
}

/// Leading eigenpair of a Hermitian matrix, clamped to the PSD cone.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Projection {
    pub eigenvalue: f64,
    /// Unit norm, largest-magnitude entry real and positive.
    pub eigenvector: ComplexSignal,
    /// Set when the input was the zero matrix.
    pub degenerate: bool,
}

impl Rank1Projection {
    /// `λ v v^H`.
    pub fn reconstruct(&self) -> LiftedMatrix {
        self.eigenvector.outer().scale(self.eigenvalue)
    }

    /// `√λ v`.
    pub fn signal(&self) -> ComplexSignal {
        self.eigenvector
            .scaled(Complex64::new(self.eigenvalue.sqrt(), 0.0))
    }
}

/// Nearest rank-1 PSD matrix in Frobenius norm, returned as its eigenpair.
pub fn project_rank1_psd(x: &LiftedMatrix) -> Result<Rank1Projection> {
    let h = hermitian_input(x);
    let n = h.n();
    if h.entries.iter().all(|z| *z == ZERO) {
        return Ok(Rank1Projection {
            eigenvalue: 0.0,
            eigenvector: ComplexSignal::basis(n, 0),
            degenerate: true,
        });
    }
    let (lambda, v) = linalg::leading_eigenpair(&h.entries)?;
    Ok(Rank1Projection {
        eigenvalue: lambda.max(0.0),
        eigenvector: ComplexSignal::from_vec_unchecked(v),
        degenerate: false,
    })
}
