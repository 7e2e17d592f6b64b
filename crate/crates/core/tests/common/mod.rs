#![allow(dead_code)]

use gwf::gaussian::gen_gaussian_ensemble;
use gwf::measurement::{ComplexSignal, LiftedMatrix, MeasurementEnsemble};
use gwf::seed;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(s: u64) -> ChaCha20Rng {
    seed::rng(s)
}

pub fn cn(rng: &mut ChaCha20Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

pub fn rand_vec(rng: &mut ChaCha20Rng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| cn(rng)).collect()
}

pub fn rand_signal(n: usize, s: u64) -> ComplexSignal {
    ComplexSignal::new(rand_vec(&mut rng(s), n)).unwrap()
}

pub fn rand_ensemble(n: usize, m: usize, s: u64) -> MeasurementEnsemble {
    gen_gaussian_ensemble(n, m, s).unwrap()
}

pub fn rand_dense(n: usize, s: u64) -> DMatrix<Complex64> {
    let mut r = rng(s);
    DMatrix::from_fn(n, n, |_, _| cn(&mut r))
}

pub fn rand_matrix(n: usize, s: u64) -> LiftedMatrix {
    LiftedMatrix::new(rand_dense(n, s)).unwrap()
}

pub fn rand_hermitian(n: usize, s: u64) -> LiftedMatrix {
    let a = rand_dense(n, s);
    LiftedMatrix::new((&a + a.adjoint()) * c(0.5, 0.0)).unwrap()
}

/// `Σ_a conj(u_a) v_a`.
pub fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for k in 0..u.len() {
        s += u[k].conj() * v[k];
    }
    s
}

pub fn naive_forward(ens: &MeasurementEnsemble, rho: &[Complex64]) -> Vec<Complex64> {
    (0..ens.m())
        .map(|m| dot(ens.left(m), rho) * dot(ens.right(m), rho).conj())
        .collect()
}

pub fn naive_apply(ens: &MeasurementEnsemble, x: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = ens.n();
    (0..ens.m())
        .map(|m| {
            let (li, lj) = (ens.left(m), ens.right(m));
            let mut s = c(0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    s += li[a].conj() * x[(a, b)] * lj[b];
                }
            }
            s
        })
        .collect()
}

pub fn naive_adjoint(ens: &MeasurementEnsemble, y: &[Complex64]) -> DMatrix<Complex64> {
    let n = ens.n();
    let mut out = DMatrix::zeros(n, n);
    for m in 0..ens.m() {
        let (li, lj) = (ens.left(m), ens.right(m));
        for a in 0..n {
            for b in 0..n {
                out[(a, b)] += y[m] * li[a] * lj[b].conj();
            }
        }
    }
    out
}

pub fn frob(x: &DMatrix<Complex64>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|a - b| / max(1, |a|, |b|)`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Least-squares slope and R² of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Applies `f` to the eigenvalues of Hermitian `h = A + iB` through the real
/// symmetric embedding `[[A, -B], [B, A]]`, where every eigenvalue of `h`
/// appears twice.
pub fn hermitian_fn_oracle(h: &DMatrix<Complex64>, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    let mut e = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let z = h[(a, b)];
            e[(a, b)] = z.re;
            e[(a + n, b + n)] = z.re;
            e[(a, b + n)] = -z.im;
            e[(a + n, b)] = z.im;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(e);
    let mapped = eig.eigenvalues.map(f);
    let r = &eig.eigenvectors * DMatrix::from_diagonal(&mapped) * eig.eigenvectors.transpose();
    DMatrix::from_fn(n, n, |a, b| c(r[(a, b)], r[(a + n, b)]))
}
