use super::*;
use crate::operators::{make_gaussian, EnsembleSpec, GaussianNormalization, LinearOperator, OperatorRegistry};
use crate::rng::SeededRng;
use crate::sparsity::best_k_approx;
use nalgebra::DMatrix;

fn sig(v: &[f64]) -> Signal {
    Signal::from_slice(v).unwrap()
}

/// Linear Gaussian operator rescaled to spectral norm `target`.
fn scaled_linear(n: usize, d: usize, seed: u64, target: f64) -> LinearOperator {
    let a = make_gaussian(n, d, seed, GaussianNormalization::None);
    let s = spectral_norm(&a).value;
    LinearOperator::new(a.scaled(target / s))
}

fn example_operator(seed: u64) -> crate::operators::SharedOperator {
    let mut spec = EnsembleSpec::new("lipschitz_perturbed", 20, 80, seed);
    spec.unit_bound = true;
    OperatorRegistry::with_defaults().build(&spec).unwrap()
}

#[test]
fn soft_threshold_examples() {
    assert_eq!(soft_threshold(&sig(&[3.0, -1.0, 0.2]), 2.0).unwrap(), sig(&[2.0, 0.0, 0.0]));
    let x = sig(&[0.3, -7.0, 0.0]);
    assert_eq!(soft_threshold(&x, 0.0).unwrap(), x);
    assert!(soft_threshold(&x, -1.0).is_err());
}

#[test]
fn soft_threshold_matches_proximal_oracle() {
    // argmin_t (t - x)^2 + alpha |t|: zero when 0 is a subgradient, otherwise
    // the root of the monotone derivative 2(t - x) + alpha sign(t), by bisection
    let mut rng = SeededRng::new(1);
    for _ in 0..1000 {
        let x = rng.uniform_in(-5.0, 5.0);
        let alpha = rng.uniform_in(0.0, 4.0);
        let oracle = if 2.0 * x.abs() <= alpha {
            0.0
        } else {
            let s = x.signum();
            let g = |t: f64| 2.0 * (t - x) + alpha * s;
            let (mut lo, mut hi) = if s > 0.0 { (0.0, 10.0) } else { (-10.0, 0.0) };
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let got = soft_threshold(&sig(&[x]), alpha).unwrap().get(0);
        assert!((got - oracle).abs() <= 1e-8, "x={x} alpha={alpha}: {got} vs {oracle}");
    }
}

#[test]
fn soft_threshold_is_nonexpansive() {
    let mut rng = SeededRng::new(2);
    for _ in 0..10_000 {
        let x = sig(&rng.gaussian_vec(6));
        let y = sig(&rng.gaussian_vec(6));
        let a = rng.uniform_in(0.0, 3.0);
        let lhs = soft_threshold(&x, a).unwrap().distance(&soft_threshold(&y, a).unwrap()).unwrap();
        assert!(lhs <= x.distance(&y).unwrap() * (1.0 + 1e-15));
    }
}

#[test]
fn iht_recovers_one_sparse_linear() {
    let a = make_gaussian(20, 40, 3, GaussianNormalization::BySqrtN);
    let mu = spectral_norm(&a).value.powi(2);
    let op = LinearOperator::new(a);
    let mut rng = SeededRng::new(4);
    for _ in 0..10 {
        let i = rng.below(40);
        let xhat = Signal::sparse(40, &[(i, rng.gaussian())]).unwrap();
        let b = op.evaluate(&xhat);
        let cfg = IhtConfig { mu: MuRule::Fixed { mu }, stop_tol: 1e-14, ..IhtConfig::new(1) };
        let rep = iht(&op, &b, &cfg).unwrap();
        assert!(rep.final_x.distance(&xhat).unwrap() <= 1e-6);
        assert!(rep.iterates.iter().skip(1).all(|x| x.l0() <= 1));
    }
}

#[test]
fn iht_zero_data_stays_zero() {
    let op = scaled_linear(5, 8, 1, 1.0);
    let rep = iht(&op, &Signal::zeros(5), &IhtConfig::new(2)).unwrap();
    assert!(rep.iterates.iter().all(|x| x.l0() == 0));
    assert!(rep.converged);
}

#[test]
fn iht_single_step_by_hand() {
    let m = Matrix::new(DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 2.0])).unwrap();
    let op = LinearOperator::new(m);
    let b = sig(&[1.0, 3.0]);
    let cfg = IhtConfig { mu: MuRule::Fixed { mu: 2.0 }, max_iters: 1, ..IhtConfig::new(1) };
    let rep = iht(&op, &b, &cfg).unwrap();
    // x0 = 0: gradient step = A^T b / 2 = (0.5, 1.5, 3.5); keep the largest entry
    assert_eq!(rep.final_x, sig(&[0.0, 0.0, 3.5]));
    assert_eq!(rep.iterations, 1);
}

#[test]
fn iht_config_errors() {
    let op = scaled_linear(3, 4, 1, 1.0);
    let b = Signal::zeros(3);
    assert!(iht(&op, &b, &IhtConfig { mu: MuRule::Fixed { mu: 0.0 }, ..IhtConfig::new(1) }).is_err());
    assert!(iht(&op, &b, &IhtConfig::new(0)).is_err());
    assert!(ist(&op, &b, &IstConfig::new(0.0)).is_err());
}

#[test]
fn objective_examples_and_two_paths() {
    let op = example_operator(5);
    let mut rng = SeededRng::new(6);
    let b = sig(&rng.gaussian_vec(20));
    assert!((objective_j(op.as_ref(), &b, 0.3, &Signal::zeros(80)).unwrap() - b.norm_squared()).abs() < 1e-12);
    for _ in 0..100 {
        let x = sig(&rng.gaussian_vec(80));
        let alpha = rng.uniform_in(0.0, 2.0);
        let f = op.factor(&x).unwrap();
        let data = f.apply(&x).unwrap().sub(&b).unwrap().norm_squared();
        let reg: f64 = x.as_slice().iter().map(|v| v.abs()).sum();
        let two = data + alpha * reg;
        let j = objective_j(op.as_ref(), &b, alpha, &x).unwrap();
        assert!((j - two).abs() <= 1e-10 * (1.0 + two));
        // exact data gives zero at alpha = 0
        let bx = op.evaluate(&x);
        assert!(objective_j(op.as_ref(), &bx, 0.0, &x).unwrap() < 1e-20);
    }
}

#[test]
fn surrogate_identity_and_terms() {
    let op = example_operator(7);
    let mut rng = SeededRng::new(8);
    let b = sig(&rng.gaussian_vec(20));
    let z = Signal::zeros(80);
    assert!((surrogate_j(op.as_ref(), &b, 1.0, &z, &z).unwrap() - b.norm_squared()).abs() < 1e-12);
    for _ in 0..1000 {
        let x = sig(&rng.gaussian_vec(80)).scaled(rng.uniform_in(0.0, 2.0));
        let alpha = rng.uniform_in(0.0, 2.0);
        let j = objective_j(op.as_ref(), &b, alpha, &x).unwrap();
        let s = surrogate_j(op.as_ref(), &b, alpha, &x, &x).unwrap();
        assert!((s - j).abs() <= 1e-12 * j.abs().max(1.0));
        let a = sig(&rng.gaussian_vec(80));
        let fa = op.factor(&a).unwrap().into_dmatrix();
        let (xv, av, bv) = (x.as_vector(), a.as_vector(), b.as_vector());
        let oracle = (&fa * xv - bv).norm_squared() + alpha * x.l1_norm() + (xv - av).norm_squared()
            - (&fa * xv - &fa * av).norm_squared();
        let got = surrogate_j(op.as_ref(), &b, alpha, &x, &a).unwrap();
        assert!((got - oracle).abs() <= 1e-10 * (1.0 + oracle.abs()));
    }
}

#[test]
fn ist_zero_data() {
    let op = example_operator(9);
    let rep = ist(op.as_ref(), &Signal::zeros(20), &IstConfig::new(0.1)).unwrap();
    assert!(rep.iterates.iter().all(|x| x.l0() == 0));
    assert_eq!(rep.fixed_point_residual, 0.0);
}

#[test]
fn fixed_point_map_composition() {
    let op = example_operator(10);
    let mut rng = SeededRng::new(11);
    let b = sig(&rng.gaussian_vec(20));
    assert_eq!(fixed_point_map(op.as_ref(), &Signal::zeros(20), 0.5, &Signal::zeros(80)).unwrap(), Signal::zeros(80));
    for _ in 0..50 {
        let x = sig(&rng.gaussian_vec(80));
        let f = op.factor(&x).unwrap().into_dmatrix();
        let inner = x.as_vector() - f.transpose() * (&f * x.as_vector()) + f.transpose() * b.as_vector();
        let oracle = soft_threshold(&Signal::from_vector(inner).unwrap(), 0.5).unwrap();
        let got = fixed_point_map(op.as_ref(), &b, 0.5, &x).unwrap();
        assert!(got.distance(&oracle).unwrap() < 1e-12);
    }
    // ist iterates follow the map
    let rep = ist(op.as_ref(), &b.scaled(0.05), &IstConfig { max_iters: 20, ..IstConfig::new(0.01) }).unwrap();
    for w in rep.iterates.windows(2) {
        let next = fixed_point_map(op.as_ref(), &b.scaled(0.05), 0.01, &w[0]).unwrap();
        assert_eq!(next, w[1]);
    }
}

/// Solution of the l1-regularized least-squares problem by a very long run.
fn reference_minimizer(op: &LinearOperator, b: &Signal, alpha: f64) -> Signal {
    let cfg = IstConfig { max_iters: 100_000, stop_tol: 0.0, ..IstConfig::new(alpha) };
    ist(op, b, &cfg).unwrap().final_x
}

#[test]
fn ist_linear_matches_long_run_and_is_monotone() {
    let op = scaled_linear(8, 10, 12, 0.95);
    let mut rng = SeededRng::new(13);
    let b = sig(&rng.gaussian_vec(8));
    let reference = reference_minimizer(&op, &b, 0.2);
    let rep = ist(&op, &b, &IstConfig { stop_tol: 1e-13, ..IstConfig::new(0.2) }).unwrap();
    assert!(rep.converged);
    assert!(rep.final_x.distance(&reference).unwrap() <= 1e-6);
    assert!(!rep.objective_increased);
    assert!(rep.objective_history.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    assert!(rep.fixed_point_residual <= 10.0 * 1e-13);
    // first-order optimality of the limit: |A^T(b - Ax)|_i <= alpha/2 with equality on the support
    let a = op.matrix();
    let g = a.apply_adjoint(&b.sub(&a.apply(&rep.final_x).unwrap()).unwrap()).unwrap();
    for i in 0..10 {
        assert!(g.get(i).abs() <= 0.1 + 1e-6);
        if rep.final_x.get(i) != 0.0 {
            assert!((g.get(i) - 0.1 * rep.final_x.get(i).signum()).abs() < 1e-6);
        }
    }
}

#[test]
fn ist_converges_geometrically_once_contracting() {
    let op = scaled_linear(30, 5, 14, 0.9);
    let mut rng = SeededRng::new(15);
    let b = sig(&rng.gaussian_vec(30));
    let rep = ist(&op, &b, &IstConfig { stop_tol: 1e-13, ..IstConfig::new(0.05) }).unwrap();
    assert!(rep.converged && rep.iterations < THIN_AFTER);
    let est = &rep.contraction_estimates;
    // first window of 10 consecutive estimates below one; estimate index i is step i+2 over i+1
    let start = (0..est.len().saturating_sub(10)).find(|&i| est[i..i + 10].iter().all(|&g| g < 1.0)).unwrap();
    let gamma = est[start..].iter().copied().fold(0.0, f64::max);
    assert!(gamma < 1.0);
    let j0 = start + 1;
    let xf = &rep.final_x;
    let e0 = rep.iterates[j0].distance(xf).unwrap();
    for j in j0..rep.iterations {
        let ej = rep.iterates[j].distance(xf).unwrap();
        assert!(ej <= gamma.powi((j - j0) as i32) * e0 * (1.0 + 1e-6) + 1e-13, "j={j}");
    }
}

#[test]
fn ist_reports_divergence() {
    // step 1 with ||A|| = 3 is unstable
    let op = scaled_linear(6, 6, 16, 3.0);
    let b = sig(&[1.0, -1.0, 2.0, 0.5, 0.0, 1.0]);
    let rep = ist(&op, &b, &IstConfig::new(1e-3)).unwrap();
    assert!(rep.diverged && !rep.converged);
}

#[test]
fn iterates_are_thinned_after_the_threshold() {
    let op = scaled_linear(8, 10, 17, 0.999);
    let mut rng = SeededRng::new(18);
    let b = sig(&rng.gaussian_vec(8));
    let rep = ist(&op, &b, &IstConfig { max_iters: 1500, stop_tol: 0.0, ..IstConfig::new(1e-6) }).unwrap();
    assert_eq!(rep.iterations, 1500);
    assert_eq!(rep.objective_history.len(), 1501);
    assert_eq!(rep.iterates.len(), 1001 + 50);
    assert_eq!(*rep.iterate_index.last().unwrap(), 1500);
}

#[test]
fn continuation_respects_l1_bound_and_residual_order() {
    let op = scaled_linear(15, 30, 19, 0.95);
    let xhat = Signal::sparse(30, &[(3, 1.0), (17, -0.5)]).unwrap();
    let b = op.evaluate(&xhat);
    let alphas: Vec<f64> = (0..9).map(|i| 0.5f64.powi(i)).collect();
    let cfg = IstConfig { stop_tol: 1e-12, max_iters: 100_000, ..IstConfig::new(1.0) };
    let path = alpha_continuation(&op, &b, &alphas, &cfg, Some(&xhat)).unwrap();
    assert_eq!(path.l1_bound_holds, Some(true));
    assert!(path.residual_monotone, "{:?}", path.residuals);
    let single = alpha_continuation(&op, &b, &[0.3], &cfg, None).unwrap();
    assert_eq!(single.reports[0], ist(&op, &b, &IstConfig { alpha: 0.3, ..cfg.clone() }).unwrap());
    assert!(alpha_continuation(&op, &b, &[0.3, 0.3], &cfg, None).is_err());
}

#[test]
fn geometric_path() {
    let a = geometric_alphas(1.0, 1e-4, 5).unwrap();
    assert_eq!(a.len(), 5);
    assert!((a[4] - 1e-4).abs() < 1e-16);
    assert!(a.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn contraction_of_linear_is_zero() {
    let op = scaled_linear(10, 20, 20, 1.0);
    let mut rng = SeededRng::new(21);
    let b = sig(&rng.gaussian_vec(10));
    let p = probe_contraction(&op, &b, 0.1, 20, 1).unwrap();
    assert_eq!(p.max_ratio, 0.0);
}

#[test]
fn contraction_small_data_and_linear_scaling() {
    let op = example_operator(22);
    let mut rng = SeededRng::new(23);
    let dir = sig(&rng.gaussian_vec(20));
    let dir = dir.scaled(1.0 / dir.norm());
    let mut maxima = Vec::new();
    for norm in [0.003, 0.03] {
        let b = dir.scaled(norm);
        let alpha = default_alpha(op.as_ref(), &b).unwrap();
        maxima.push(probe_contraction(op.as_ref(), &b, alpha, 200, 5).unwrap().max_ratio);
    }
    let b = dir.scaled(0.01);
    let p = probe_contraction(op.as_ref(), &b, default_alpha(op.as_ref(), &b).unwrap(), 200, 5).unwrap();
    assert!(p.max_ratio < 1.0, "{}", p.max_ratio);
    assert_eq!(p.skipped, 0);
    // a decade of data magnitude moves the ratio by a decade, within a factor of two
    let slope = maxima[1] / maxima[0];
    assert!((5.0..=20.0).contains(&slope), "{maxima:?}");
}

#[test]
fn stability_bound_evaluates() {
    let c = StabilityConstants {
        alpha: 0.04,
        c1: 1.0,
        c2: 1.0,
        c3: 0.5,
        gamma_tilde: 0.19,
        b_norm: 0.1,
        xhat_norm: 1.0,
        minimizer_gap: 0.0,
    };
    let a = 0.9 - 0.05;
    assert!((stability_bound(&c).unwrap() - (0.004f64).sqrt() / a).abs() < 1e-15);
    assert!(stability_bound(&StabilityConstants { b_norm: 10.0, ..c }).is_err());
    let _ = best_k_approx(&sig(&[1.0]), 1);
}

#[test]
fn frozen_solve_matches_long_iteration() {
    let mut rng = SeededRng::new(24);
    for t in 0..10 {
        let op = scaled_linear(12, 30, 30 + t, 1.0);
        let b = sig(&rng.gaussian_vec(12));
        let alpha = rng.uniform_in(0.01, 0.5);
        let fast = solve_frozen(op.matrix(), &b, alpha).unwrap();
        assert!(fast.converged);
        let slow = ist(&op, &b, &IstConfig { max_iters: 200_000, stop_tol: 1e-15, ..IstConfig::new(alpha) }).unwrap();
        assert!(fast.y.distance(&slow.final_x).unwrap() < 1e-7, "t={t}");
    }
}
