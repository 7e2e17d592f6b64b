//! Flop accounting used to put signal-domain and lifted-domain solvers on a
//! common axis. Only the orders of growth are meaningful; the constants are
//! fixed so that comparisons stay reproducible.

/// One gradient iteration: two inner products per measurement, the error
/// products, and two vector accumulations, `8·M·N`.
pub fn gwf_iteration(m: usize, n: usize) -> u64 {
    8 * m as u64 * n as u64
}

/// One lifted-domain iteration (backprojection, eigendecomposition, forward
/// apply): `8·M·N² + 14·N³`. The spectral initialization costs the same.
pub fn lifted_iteration(m: usize, n: usize) -> u64 {
    let (m, n) = (m as u64, n as u64);
    8 * m * n * n + 14 * n * n * n
}

pub fn spectral_init(m: usize, n: usize) -> u64 {
    lifted_iteration(m, n)
}
