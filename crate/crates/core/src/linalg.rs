//! Dense Hermitian eigen-solvers and small complex vector helpers.
//!
//! Matrices up to [`DENSE_EIGEN_LIMIT`] are handled by a full Hermitian
//! eigendecomposition. Above that only the leading pair is ever needed, so a
//! shifted power iteration is used instead.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest dimension handled by the dense eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 2048;
pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITERS: usize = 5000;

/// Eigenvalues sorted in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl HermitianEigen {
    pub fn vector(&self, idx: usize) -> Vec<Complex64> {
        self.vectors.column(idx).iter().copied().collect()
    }

    /// Rebuilds `V diag(f(λ)) V^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        let n = self.vectors.nrows();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(k);
            for b in 0..n {
                let cb = v[b].conj() * w;
                for a in 0..n {
                    out[(a, b)] += v[a] * cb;
                }
            }
        }
        out
    }
}

pub fn frobenius_norm(x: &DMatrix<Complex64>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn eigen_error(x: &DMatrix<Complex64>) -> Error {
    Error::Eigen {
        n: x.nrows(),
        frobenius: frobenius_norm(x),
        max_abs: x.iter().map(|z| z.norm()).fold(0.0, f64::max),
    }
}

/// Full eigendecomposition of a Hermitian matrix. Only the lower triangle's
/// Hermitian part matters; callers symmetrize beforehand.
pub fn hermitian_eigen(x: &DMatrix<Complex64>) -> Result<HermitianEigen> {
    if x.nrows() != x.ncols() {
        return Err(Error::dim("hermitian_eigen", x.nrows(), x.ncols()));
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(eigen_error(x));
    }
    let eig =
        SymmetricEigen::try_new(x.clone(), f64::EPSILON, 100_000).ok_or_else(|| eigen_error(x))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let n = x.nrows();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Rotates `v` so its largest-magnitude entry is real and positive. Ties go
/// to the lowest index. A zero vector is left alone.
pub fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag <= 0.0 {
        return;
    }
    let rot = v[best].conj() / best_mag;
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[best] = Complex64::new(v[best].re, 0.0);
}

pub fn mat_vec(x: &DMatrix<Complex64>, v: &[Complex64], out: &mut [Complex64]) {
    let n = x.nrows();
    out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    for (b, &vb) in v.iter().enumerate() {
        let col = x.column(b);
        for a in 0..n {
            out[a] += col[a] * vb;
        }
    }
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a, b⟩ = a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Leading (algebraically largest) eigenpair by power iteration on `X + sI`.
///
/// The shift makes the spectrum nonnegative so the dominant eigenvalue of the
/// shifted matrix is the algebraically largest one of `X`.
pub fn power_iteration(
    x: &DMatrix<Complex64>,
    tol: f64,
    max_iters: usize,
) -> Result<(f64, Vec<Complex64>)> {
    let n = x.nrows();
    if n != x.ncols() {
        return Err(Error::dim("power_iteration", n, x.ncols()));
    }
    // Gershgorin bound on the spectral radius.
    let shift = (0..n)
        .map(|a| x.row(a).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    if shift == 0.0 {
        let mut e1 = vec![Complex64::new(0.0, 0.0); n];
        e1[0] = Complex64::new(1.0, 0.0);
        return Ok((0.0, e1));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut lambda = 0.0;
    for _ in 0..max_iters {
        mat_vec(x, &v, &mut w);
        lambda = inner(&v, &w).re;
        let resid = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if resid <= tol * shift {
            fix_phase(&mut v);
            return Ok((lambda, v));
        }
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += vi * shift;
        }
        let nw = norm(&w);
        if !nw.is_finite() || nw == 0.0 {
            return Err(eigen_error(x));
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
    }
    log::warn!("power iteration hit {max_iters} iterations; returning last Rayleigh quotient");
    fix_phase(&mut v);
    Ok((lambda, v))
}

/// Leading eigenpair with the phase convention of [`fix_phase`]. Dense for
/// `n <= dense_limit`, power iteration otherwise.
pub fn leading_eigenpair_with(
    x: &DMatrix<Complex64>,
    dense_limit: usize,
) -> Result<(f64, Vec<Complex64>)> {
    if x.nrows() <= dense_limit {
        let eig = hermitian_eigen(x)?;
        let mut v = eig.vector(0);
        fix_phase(&mut v);
        Ok((eig.values[0], v))
    } else {
        power_iteration(x, POWER_TOL, POWER_MAX_ITERS)
    }
}

pub fn leading_eigenpair(x: &DMatrix<Complex64>) -> Result<(f64, Vec<Complex64>)> {
    leading_eigenpair_with(x, DENSE_EIGEN_LIMIT)
}
