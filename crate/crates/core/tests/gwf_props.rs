mod common;

use common::*;
use gwf::gwf::{
    aligned_truth, dist, gradient, lifted_dist_sq, objective, optimal_phase, solve, solve_from,
    spectral_init, spectral_matrix, step_size, SolverConfig, StepSchedule,
};
use gwf::measurement::{
    forward_correlate, lifted_adjoint, lifted_apply, project_symmetric, ComplexSignal,
    InterferometricData, MeasurementEnsemble,
};
use gwf::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn instance(n: usize, m: usize, s: u64) -> (MeasurementEnsemble, ComplexSignal, InterferometricData) {
    let ens = rand_ensemble(n, m, s);
    let truth = rand_signal(n, s ^ 0xabc);
    let data = forward_correlate(&ens, &truth).unwrap();
    (ens, truth, data)
}

fn perturb(rho: &ComplexSignal, k: usize, delta: Complex64) -> ComplexSignal {
    let mut v = rho.as_slice().to_vec();
    v[k] += delta;
    ComplexSignal::new(v).unwrap()
}

fn fd_max_rel_dev(ens: &MeasurementEnsemble, data: &InterferometricData, rho: &ComplexSignal, h: f64) -> f64 {
    let g = gradient(ens, data, rho).unwrap();
    let gmax = g.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for k in 0..rho.len() {
        for (dir, part) in [(c(h, 0.0), 0), (c(0.0, h), 1)] {
            let jp = objective(ens, data, &perturb(rho, k, dir)).unwrap();
            let jm = objective(ens, data, &perturb(rho, k, -dir)).unwrap();
            let fd = (jp - jm) / (2.0 * h);
            let pred = 2.0 * if part == 0 { g.as_slice()[k].re } else { g.as_slice()[k].im };
            worst = worst.max((fd - pred).abs() / (2.0 * gmax));
        }
    }
    worst
}

#[test]
fn gradient_matches_central_differences() {
    for t in 0..10u64 {
        let n = 2 + (t % 7) as usize;
        let m = 4 + (t % 13) as usize;
        let (ens, _, data) = instance(n, m, 10 + t);
        let rho = rand_signal(n, 90 + t);
        let dev = fd_max_rel_dev(&ens, &data, &rho, 1e-6);
        assert!(dev <= 1e-5, "instance {t}: {dev}");
    }
}

#[test]
fn gradient_matches_central_differences_at_n4_m8() {
    let (ens, _, data) = instance(4, 8, 77);
    let rho = rand_signal(4, 78);
    assert!(fd_max_rel_dev(&ens, &data, &rho, 1e-6) <= 1e-6);
}

#[test]
fn objective_matches_straight_loop_oracle() {
    let (ens, _, data) = instance(3, 5, 5);
    let rho = rand_signal(3, 6);
    let pred = naive_forward(&ens, rho.as_slice());
    let oracle: f64 = pred
        .iter()
        .zip(data.as_slice())
        .map(|(p, d)| (p - d).norm_sqr())
        .sum::<f64>()
        / 10.0;
    assert!(rel(objective(&ens, &data, &rho).unwrap(), oracle) < 1e-12);
}

#[test]
fn objective_and_gradient_vanish_on_solution_set() {
    let (ens, truth, data) = instance(6, 30, 3);
    assert!(objective(&ens, &data, &truth).unwrap() <= 1e-20);
    for k in 0..8 {
        let r = truth.rotated(0.7 * k as f64);
        assert!(objective(&ens, &data, &r).unwrap() <= 1e-20);
    }
    let g = gradient(&ens, &data, &truth).unwrap();
    assert!(vec_norm(g.as_slice()) <= 1e-14);
}

#[test]
fn objective_equals_lifted_residual() {
    for t in 0..10u64 {
        let (ens, _, data) = instance(5, 20, 30 + t);
        let rho = rand_signal(5, 40 + t);
        let f = lifted_apply(&ens, &rho.outer()).unwrap();
        let lifted = f
            .iter()
            .zip(data.as_slice())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / 40.0;
        assert!((objective(&ens, &data, &rho).unwrap() - lifted).abs() <= 1e-12 * lifted);
    }
}

#[test]
fn gradient_equals_backprojected_mismatch() {
    for t in 0..10u64 {
        let (ens, _, data) = instance(6, 25, 50 + t);
        let rho = rand_signal(6, 60 + t);
        let e: Vec<Complex64> = lifted_apply(&ens, &rho.outer())
            .unwrap()
            .iter()
            .zip(data.as_slice())
            .map(|(a, b)| a - b)
            .collect();
        let back = project_symmetric(&lifted_adjoint(&ens, &e).unwrap());
        let r = nalgebra::DVector::from_column_slice(rho.as_slice());
        let expect = back.matrix() * r / c(25.0, 0.0);
        let g = gradient(&ens, &data, &rho).unwrap();
        assert!(vec_diff(g.as_slice(), expect.as_slice()) <= 1e-12 * vec_norm(expect.as_slice()));
    }
}

#[test]
fn gradient_reduces_to_classical_wirtinger_flow() {
    let (n, m) = (5, 40);
    let vectors = rand_vec(&mut rng(8), n * m);
    let ens = MeasurementEnsemble::phase_retrieval(n, vectors).unwrap();
    let truth = rand_signal(n, 9);
    let data = forward_correlate(&ens, &truth).unwrap();
    assert!(data.as_slice().iter().all(|d| d.im == 0.0 && d.re >= 0.0));
    let rho = rand_signal(n, 10);
    let mut oracle = vec![c(0.0, 0.0); n];
    for k in 0..m {
        let l = ens.left(k);
        let a = dot(l, rho.as_slice());
        let w = a.norm_sqr() - data.as_slice()[k].re;
        for p in 0..n {
            oracle[p] += l[p] * a * w / m as f64;
        }
    }
    let g = gradient(&ens, &data, &rho).unwrap();
    assert!(vec_diff(g.as_slice(), &oracle) <= 1e-12 * vec_norm(&oracle));
}

#[test]
fn gradient_is_phase_equivariant() {
    let (ens, _, data) = instance(6, 30, 11);
    let rho = rand_signal(6, 12);
    let g = gradient(&ens, &data, &rho).unwrap();
    for k in 0..8 {
        let phi = 0.4 * k as f64;
        let gr = gradient(&ens, &data, &rho.rotated(phi)).unwrap();
        let expect = g.rotated(phi);
        assert!(vec_diff(gr.as_slice(), expect.as_slice()) <= 1e-12 * vec_norm(g.as_slice()));
    }
}

#[test]
fn dist_examples() {
    let rho = rand_signal(5, 1);
    assert_eq!(dist(&rho, &rho).unwrap(), 0.0);
    for k in 0..8 {
        assert!(dist(&rho.rotated(0.8 * k as f64), &rho).unwrap() < 1e-14 * rho.norm());
    }
    let e0 = ComplexSignal::basis(3, 0);
    let e1 = ComplexSignal::basis(3, 1);
    assert!((dist(&e0, &e1).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(optimal_phase(&e0, &e1).unwrap(), c(1.0, 0.0));
    assert!((lifted_dist_sq(&e0, &e1).unwrap() - 2.0).abs() < 1e-15);
    assert_eq!(lifted_dist_sq(&rho, &rho).unwrap(), 0.0);
    assert!(dist(&e0, &rand_signal(4, 2)).is_err());
}

#[test]
fn dist_identity_holds() {
    for t in 0..50u64 {
        let rho = rand_signal(7, 100 + t);
        let truth = rand_signal(7, 200 + t);
        let d = dist(&rho, &truth).unwrap();
        let lhs = d * d + 2.0 * truth.inner(&rho).norm();
        let rhs = rho.norm_sqr() + truth.norm_sqr();
        assert!(rel(lhs, rhs) < 1e-12);
    }
}

#[test]
fn lifted_dist_matches_dense_oracle() {
    for t in 0..20u64 {
        let rho = rand_signal(3, 300 + t);
        let truth = rand_signal(3, 400 + t);
        let diff = rho.outer().matrix() - truth.outer().matrix();
        let dense = frob(&diff).powi(2);
        assert!(rel(lifted_dist_sq(&rho, &truth).unwrap(), dense) < 1e-12);
    }
}

#[test]
fn lifted_error_decomposes_around_aligned_truth() {
    for t in 0..20u64 {
        let rho = rand_signal(6, 500 + t);
        let truth = rand_signal(6, 600 + t);
        let hat = aligned_truth(&rho, &truth).unwrap();
        let r = nalgebra::DVector::from_column_slice(rho.as_slice());
        let h = nalgebra::DVector::from_column_slice(hat.as_slice());
        let e = &r - &h;
        let lhs = &r * r.adjoint() - &h * h.adjoint();
        let rhs = &e * e.adjoint() + &e * h.adjoint() + &h * e.adjoint();
        assert!(frob(&(lhs - rhs)) < 1e-12 * r.norm_squared().max(1.0));
    }
}

#[test]
fn lifted_error_is_sandwiched_by_dist() {
    let truth = {
        let t = rand_signal(8, 700);
        t.scaled(c(1.0 / t.norm(), 0.0))
    };
    let mut r = rng(701);
    for eps in [0.1, 0.3, 0.5] {
        for _ in 0..1000 {
            let u = ComplexSignal::new(rand_vec(&mut r, 8)).unwrap();
            let radius: f64 = rand::Rng::random_range(&mut r, 0.0..eps);
            let phi: f64 = rand::Rng::random_range(&mut r, 0.0..6.3);
            let step = u.scaled(c(radius / u.norm(), 0.0));
            let base = truth.rotated(phi);
            let rho = ComplexSignal::new(
                base.as_slice().iter().zip(step.as_slice()).map(|(a, b)| a + b).collect(),
            )
            .unwrap();
            let d = dist(&rho, &truth).unwrap();
            assert!(d <= eps);
            let l = lifted_dist_sq(&rho, &truth).unwrap().sqrt();
            assert!(((1.0 - eps) * (2.0 - eps)).sqrt() * d <= l * (1.0 + 1e-12) + 1e-15);
            assert!(l <= (2.0 + eps) * d * (1.0 + 1e-12) + 1e-15);
        }
    }
}

#[test]
fn spectral_init_on_identity_pairs() {
    let n = 5;
    let pairs: Vec<_> = (0..n)
        .map(|k| {
            let e = ComplexSignal::basis(n, k).into_vec();
            (e.clone(), e)
        })
        .collect();
    let ens = MeasurementEnsemble::from_pairs(n, &pairs).unwrap();
    let truth = ComplexSignal::new(vec![c(0.5, 0.1), c(-1.0, 2.0), c(0.3, 0.0), c(1.0, 1.0), c(0.0, -0.2)]).unwrap();
    let data = forward_correlate(&ens, &truth).unwrap();
    let x = spectral_matrix(&ens, &data).unwrap();
    for a in 0..n {
        for b in 0..n {
            let expect = if a == b { truth.as_slice()[a].norm_sqr() / n as f64 } else { 0.0 };
            assert!((x.matrix()[(a, b)] - c(expect, 0.0)).norm() < 1e-15);
        }
    }
    let init = spectral_init(&ens, &data).unwrap();
    let peak = truth.as_slice()[1].norm() / (n as f64).sqrt();
    let mut expect = vec![c(0.0, 0.0); n];
    expect[1] = c(peak, 0.0);
    assert!(vec_diff(init.rho0.as_slice(), &expect) < 1e-14);
}

#[test]
fn spectral_matrix_is_symmetrized_backprojection() {
    let (ens, _, data) = instance(7, 40, 13);
    let x = spectral_matrix(&ens, &data).unwrap();
    let expect = project_symmetric(&lifted_adjoint(&ens, data.as_slice()).unwrap()).scale(1.0 / 40.0);
    assert!(frob(&(x.matrix() - expect.matrix())) < 1e-12 * frob(expect.matrix()));
    let direct = naive_adjoint(&ens, data.as_slice());
    let sym = (&direct + direct.adjoint()) * c(0.5 / 40.0, 0.0);
    assert!(frob(&(x.matrix() - &sym)) < 1e-12 * frob(&sym));
}

#[test]
fn spectral_init_rejects_nonpositive_eigenvalue() {
    let ens = rand_ensemble(4, 10, 1);
    let data = InterferometricData::new(vec![c(0.0, 0.0); 10]).unwrap();
    assert!(matches!(spectral_init(&ens, &data), Err(Error::Initialization { .. })));
}

#[test]
fn spectral_init_improves_with_more_measurements() {
    let n = 64;
    let mut means = Vec::new();
    for ratio in [4, 6, 8] {
        let mut total = 0.0;
        for s in 0..20u64 {
            let (ens, truth, data) = instance(n, ratio * n, 1000 + s);
            let init = spectral_init(&ens, &data).unwrap();
            total += dist(&init.rho0, &truth).unwrap() / truth.norm();
        }
        means.push(total / 20.0);
    }
    assert!(means[0] < 1.0, "{means:?}");
    assert!(means[0] > means[1] && means[1] > means[2], "{means:?}");
}

#[test]
fn step_schedule_examples() {
    let ramp = StepSchedule::default_ramp();
    let s = step_size(2500, &ramp);
    assert!((0.0725..=0.0735).contains(&s), "{s}");
    assert_eq!(step_size(10_000_000, &ramp), 0.2);
    assert_eq!(step_size(7, &StepSchedule::Fixed { mu: 0.1 }), 0.1);
}

#[test]
fn truth_is_a_fixed_point() {
    let (ens, truth, data) = instance(6, 30, 21);
    let cfg = SolverConfig { max_iters: 50, ..SolverConfig::default() };
    let trace = solve_from(&ens, &data, &cfg, truth.clone(), Some(&truth)).unwrap();
    assert!(trace.records.iter().all(|r| r.objective <= 1e-20));
    assert!(vec_diff(trace.final_estimate.as_slice(), truth.as_slice()) < 1e-12);
}

#[test]
fn fixed_step_converges_log_linearly() {
    let (ens, truth, data) = instance(16, 128, 31);
    let cfg = SolverConfig {
        max_iters: 300,
        step_schedule: StepSchedule::Fixed { mu: 0.05 },
        record_every: 1,
        ..SolverConfig::default()
    };
    let trace = solve(&ens, &data, &cfg, Some(&truth)).unwrap();
    let tail = &trace.records[trace.records.len() / 2..];
    let xs: Vec<f64> = tail.iter().map(|r| r.k as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|r| (r.dist.unwrap().powi(2)).ln()).collect();
    let (slope, r2) = linear_fit(&xs, &ys);
    assert!(tail.last().unwrap().dist.unwrap() > 1e-12);
    assert!(slope < 0.0 && r2 > 0.99, "slope {slope}, r2 {r2}");
}

#[test]
fn flops_strictly_increase_and_objective_stays_finite() {
    let (ens, truth, data) = instance(8, 40, 41);
    let cfg = SolverConfig { max_iters: 100, record_every: 7, ..SolverConfig::default() };
    let trace = solve(&ens, &data, &cfg, Some(&truth)).unwrap();
    assert!(trace.records.windows(2).all(|w| w[1].flops > w[0].flops));
    assert!(trace.records.iter().all(|r| r.objective.is_finite() && r.objective >= 0.0));
    assert_eq!(trace.last().k, 100);
    assert_eq!(trace.records[1].flops - trace.records[0].flops, 7 * 8 * 40 * 8);
}

#[test]
fn divergence_reports_last_finite_estimate() {
    let (ens, _, data) = instance(6, 30, 51);
    let cfg = SolverConfig {
        max_iters: 10_000,
        step_schedule: StepSchedule::Fixed { mu: 1e6 },
        normalize_by_init: false,
        ..SolverConfig::default()
    };
    match solve(&ens, &data, &cfg, None) {
        Err(Error::Divergence { iteration, trace }) => {
            assert!(iteration < 10_000);
            assert!(trace.final_estimate.is_finite());
            assert!(trace.records.iter().all(|r| r.objective.is_finite()));
        }
        other => panic!("expected divergence, got {:?}", other.map(|t| t.iterations)),
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let (ens, _, data) = instance(4, 16, 61);
    let bad = [
        SolverConfig { max_iters: 0, ..SolverConfig::default() },
        SolverConfig { record_every: 0, ..SolverConfig::default() },
        SolverConfig { stop_tol: -1.0, ..SolverConfig::default() },
        SolverConfig { step_schedule: StepSchedule::Ramp { tau0: 1.0, mu_max: 1.5 }, ..SolverConfig::default() },
        SolverConfig { step_schedule: StepSchedule::Fixed { mu: 0.0 }, ..SolverConfig::default() },
    ];
    for cfg in bad {
        assert!(matches!(solve(&ens, &data, &cfg, None), Err(Error::Config(_))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dist_is_phase_invariant(n in 1usize..8, s in any::<u64>(), phi in 0.0f64..6.3, psi in 0.0f64..6.3) {
        let rho = rand_signal(n, s);
        let truth = rand_signal(n, s ^ 7);
        let d = dist(&rho, &truth).unwrap();
        let d2 = dist(&rho.rotated(phi), &truth.rotated(psi)).unwrap();
        prop_assert!((d - d2).abs() <= 1e-12 * (rho.norm() + truth.norm()));
        prop_assert!(d <= (rho.norm() + truth.norm()) * (1.0 + 1e-12));
    }

    #[test]
    fn objective_is_nonnegative(n in 1usize..6, m in 1usize..12, s in any::<u64>()) {
        let (ens, _, data) = instance(n, m, s);
        let j = objective(&ens, &data, &rand_signal(n, s ^ 3)).unwrap();
        prop_assert!(j >= 0.0 && j.is_finite());
    }
}
