//! Acceptance suite: one line per criterion on stdout, tolerances pinned below.
//!
//! The whole suite is a single test so that the timed criteria do not share
//! the machine with each other. Criteria listed in `KNOWN_FAILURES` are
//! reported as FAIL but do not fail the test; any other FAIL does.

use nalgebra::DMatrix;
use quasilin::greedy::{greedy_recover, GreedyConfig, SubsolverConfig};
use quasilin::operators::GaussianNormalization;
use quasilin::ripprobe::{probe_eq1, probe_linear_rip};
use quasilin::sparsity::decay_tail_bound_check;
use quasilin::thresholding::{default_alpha, objective_j, probe_contraction, soft_threshold, surrogate_j};
use quasilin::{
    best_k_approx, derive_seed, hs_outer_distance, in_decay_class, EnsembleSpec, OperatorRegistry, SeededRng, Signal,
};
use quasilin_experiments::config::{ExperimentConfig, SupportRule};
use quasilin_experiments::registry::RunContext;
use quasilin_experiments::runs::fig6::Fig6Result;
use quasilin_experiments::runs::{astero, fig1, fig4, fig6};
use quasilin_experiments::signals::sparse_gaussian;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

const SEED: u64 = 20_240_611;

/// Trials per k for the criterion (4 x 25 = 100); the extended sweep runs `C1_EXTENDED` per k.
const C1_TRIALS: usize = 25;
const C1_EXTENDED: usize = 100;
const C1_ERR: f64 = 1e-6;
const C1_SECS: f64 = 30.0;
const C2_RATE_K1: f64 = 0.8;
const C2_RATE_K2: f64 = 0.6;
const C2_N: usize = 11;
const C2_SECS: f64 = 600.0;
const C3_SOFT_K1: f64 = 0.9;
const C3_SMALL_NORM: f64 = 0.05;
const C3_HARD_K1: f64 = 0.9;
const C3_HARD_K3_MEAN: f64 = 0.2;
const C3_SECS: f64 = 900.0;
const C4_SECS: f64 = 60.0;
const C4_HS_PAIRS: usize = 10_000;
const C4_HS_TOL: f64 = 1e-10;
const C4_PROX_CASES: usize = 1_000;
const C4_PROX_TOL: f64 = 1e-8;
const C4_CHAIN_CASES: usize = 1_000;
const C4_BESTK_CASES: usize = 1_000;
const C4_SURROGATE_CASES: usize = 1_000;
const C4_SURROGATE_TOL: f64 = 1e-12;
const C4_FP_FACTOR: f64 = 10.0;
const C5_NEAR_DEG: f64 = 10.0;
const C5_NEAR_MAX: f64 = 0.2;
const C5_FAR_DEG: f64 = 45.0;
const C5_FAR_MIN: f64 = 0.95;
const C5_SECS: f64 = 300.0;
const C6_MIN_EXACT: usize = 8;
const C6_SECS: f64 = 600.0;
const C7_NORMS: [f64; 3] = [0.003, 0.01, 0.03];
const C7_PAIRS: usize = 200;
const C7_SECS: f64 = 120.0;

/// Criteria that fail on the committed configuration; see the README.
const KNOWN_FAILURES: &[&str] = &["3b-norm", "6"];

struct Report {
    lines: Vec<(String, bool)>,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, text: String) {
        let tag = match (pass, KNOWN_FAILURES.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        let mut out = std::io::stdout().lock();
        writeln!(out, "acceptance {id:>8} {tag:<12} {text}").unwrap();
        out.flush().unwrap();
        self.lines.push((id.to_string(), pass));
    }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs().join(name), &[]).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64())
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn criterion1(rep: &mut Report) {
    let ops = OperatorRegistry::with_defaults();
    let (failures, secs) = timed(|| {
        let mut failures = Vec::new();
        for k in 1..=4 {
            for t in 0..C1_EXTENDED {
                let seed = derive_seed(SEED, &[1, k as u64, t as u64]);
                let mut spec = EnsembleSpec::new("gaussian_matrix", 25, 40, derive_seed(seed, &[0]));
                spec.normalize = GaussianNormalization::BySqrtN;
                let op = ops.build(&spec).unwrap();
                let mut rng = SeededRng::new(derive_seed(seed, &[1]));
                let x = sparse_gaussian(40, k, 1.0, SupportRule::Uniform, None, &mut rng).unwrap();
                let b = op.evaluate(&x);
                let cfg = GreedyConfig { subsolver: SubsolverConfig::linear_least_squares(), ..GreedyConfig::new(k) };
                let trace = greedy_recover(op.as_ref(), &b, &cfg).unwrap();
                let xk = trace.final_iterate().unwrap();
                let exact = sorted(trace.supports[k - 1].clone()) == x.support();
                if !exact || xk.distance(&x).unwrap() > C1_ERR {
                    failures.push((k, t));
                }
            }
        }
        failures
    });
    let core: Vec<_> = failures.iter().filter(|f| f.1 < C1_TRIALS).collect();
    let (total, extended) = (4 * C1_TRIALS, 4 * C1_EXTENDED);
    rep.line(
        "1",
        core.is_empty() && secs < C1_SECS,
        format!(
            "linear greedy exact recovery: {}/{total} (k=1..4, err <= {C1_ERR:e}); extended sweep {}/{extended} \
             failing (k, trial) {failures:?}; {secs:.1} s < {C1_SECS} s",
            total - core.len(),
            extended - failures.len()
        ),
    );
}

fn criterion2(rep: &mut Report, ctx: &RunContext) -> fig4::Fig4Result {
    let cfg = load("fig4.toml");
    let (res, secs) = timed(|| fig4::run_fig4(&cfg, ctx).unwrap());
    let r1 = res.rate(C2_N, 1).unwrap();
    let r2 = res.rate(C2_N, 2).unwrap();
    let rho = res.spearman_k(C2_N).unwrap();
    let rates: Vec<String> = cfg.grid.ks.iter().map(|&k| format!("{:.2}", res.rate(C2_N, k).unwrap())).collect();
    rep.line(
        "2",
        r1 >= C2_RATE_K1 && r2 >= C2_RATE_K2 && rho <= 0.0 && secs < C2_SECS,
        format!(
            "phase-retrieval greedy n={C2_N}: rates [{}], k=1 {r1:.2} >= {C2_RATE_K1}, k=2 {r2:.2} >= {C2_RATE_K2}, \
             spearman {rho:.3} <= 0, {secs:.1} s < {C2_SECS} s",
            rates.join(" ")
        ),
    );
    res
}

fn criterion3(rep: &mut Report, ctx: &RunContext) -> Fig6Result {
    let cfg = load("fig6.toml");
    let (res, secs) = timed(|| fig6::run_fig6(&cfg, ctx).unwrap());
    let in_time = secs < C3_SECS;

    let k1 = res.soft.row_of(1).unwrap();
    let small: Vec<f64> = (0..res.soft.cols.len())
        .filter(|&c| res.soft.cols[c] <= C3_SMALL_NORM * (1.0 + 1e-12))
        .map(|c| res.soft.rate(k1, c))
        .collect();
    let min_small = small.iter().copied().fold(f64::INFINITY, f64::min);
    rep.line(
        "3a",
        min_small >= C3_SOFT_K1 && in_time,
        format!(
            "soft k=1, norm <= {C3_SMALL_NORM}: min rate {min_small:.2} >= {C3_SOFT_K1} over {} cells, grid {secs:.1} s < {C3_SECS} s",
            small.len()
        ),
    );

    let rho_k = res.soft_trend_in_k();
    rep.line("3b-k", rho_k <= 0.0, format!("soft rate vs k at norm {:.3}: spearman {rho_k:.3} <= 0", res.soft.cols[0]));

    let rho_norm = res.soft_pooled_trend_in_norm(2);
    let per_k: Vec<String> = res
        .soft
        .ks
        .iter()
        .filter(|&&k| k >= 2)
        .map(|&k| format!("{k}:{:+.2}", res.soft_trend_in_norm(k).unwrap()))
        .collect();
    rep.line(
        "3b-norm",
        rho_norm <= 0.0,
        format!("soft rate vs norm, k >= 2 pooled: spearman {rho_norm:+.3} <= 0 (per k {})", per_k.join(" ")),
    );

    let hk1 = res.hard.row_of(1).unwrap();
    let hard_min = res.hard.row_rates(hk1).into_iter().fold(f64::INFINITY, f64::min);
    let rows: Vec<usize> = (0..res.hard.ks.len()).filter(|&r| res.hard.ks[r] >= 3).collect();
    let cells = rows.len() * res.hard.cols.len();
    let hard_mean =
        rows.iter().flat_map(|&r| res.hard.row_rates(r)).sum::<f64>() / cells.max(1) as f64;
    rep.line(
        "3c",
        hard_min >= C3_HARD_K1 && hard_mean <= C3_HARD_K3_MEAN,
        format!(
            "hard k=1 min rate {hard_min:.2} >= {C3_HARD_K1}, mean over k >= 3 {hard_mean:.3} <= {C3_HARD_K3_MEAN}"
        ),
    );
    res
}

/// Minimizer of `(t - x)^2 + alpha |t|`, by bisection on the increasing
/// subgradient `2 (t - x) + alpha sign(t)`.
fn prox_oracle(x: f64, alpha: f64) -> f64 {
    let g = |t: f64| 2.0 * (t - x) + alpha * t.signum() * f64::from(u8::from(t != 0.0));
    let (mut lo, mut hi) = (-x.abs() - alpha - 1.0, x.abs() + alpha + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn gaussian_signal(rng: &mut SeededRng, d: usize) -> Signal {
    Signal::from_slice(&rng.gaussian_vec(d)).unwrap()
}

/// Smallest and largest singular value of `a` restricted to any `s` columns.
fn restricted_extremes(a: &DMatrix<f64>, s: usize) -> (f64, f64) {
    let d = a.ncols();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize != s {
            continue;
        }
        let cols: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
        let sub = a.select_columns(cols.iter());
        let sv = sub.singular_values();
        lo = lo.min(sv.min());
        hi = hi.max(sv.max());
    }
    (lo, hi)
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn criterion4(rep: &mut Report, fig6: &Fig6Result) {
    let start = Instant::now();
    let mut rng = SeededRng::new(derive_seed(SEED, &[4]));
    let mut checks: Vec<(String, bool)> = Vec::new();

    // outer-product sandwich, with the HS distance also checked against explicit matrices
    let mut bad = 0;
    for _ in 0..C4_HS_PAIRS {
        let d = 1 + rng.below(8);
        let x = gaussian_signal(&mut rng, d).scaled(rng.uniform_in(0.1, 3.0));
        let y = gaussian_signal(&mut rng, d).scaled(rng.uniform_in(0.1, 3.0));
        let hs = hs_outer_distance(&x, &y).unwrap();
        let prod = x.distance(&y).unwrap() * x.add(&y).unwrap().norm();
        let (xv, yv) = (x.as_vector(), y.as_vector());
        let explicit = (xv * xv.transpose() - yv * yv.transpose()).norm();
        let slack = C4_HS_TOL * (1.0 + prod);
        let ok = hs <= prod + slack
            && prod <= 2f64.sqrt() * hs + slack
            && (hs - explicit).abs() <= 1e-9 * (1.0 + explicit);
        bad += usize::from(!ok);
    }
    checks.push((format!("sandwich {}/{C4_HS_PAIRS}", C4_HS_PAIRS - bad), bad == 0));

    let mut worst = 0.0f64;
    for _ in 0..C4_PROX_CASES {
        let x = gaussian_signal(&mut rng, 6).scaled(rng.uniform_in(0.1, 4.0));
        let alpha = rng.uniform_in(0.0, 4.0);
        let s = soft_threshold(&x, alpha).unwrap();
        for i in 0..6 {
            worst = worst.max((s.get(i) - prox_oracle(x.get(i), alpha)).abs());
        }
    }
    checks.push((format!("prox max dev {worst:.1e}"), worst <= C4_PROX_TOL));

    let mut bad = 0;
    for _ in 0..C4_CHAIN_CASES {
        let d = 2 + rng.below(19);
        let kappa = rng.uniform_in(0.05, 0.95);
        let mut mags = vec![rng.uniform_in(0.1, 10.0)];
        for _ in 1..d {
            let last = *mags.last().unwrap();
            mags.push(last * kappa * rng.uniform_in(0.0, 1.0));
        }
        let order = rng.subset(d, d);
        let mut v = vec![0.0; d];
        for (m, &i) in mags.iter().zip(&order) {
            v[i] = if rng.uniform() < 0.5 { -m } else { *m };
        }
        let x = Signal::from_slice(&v).unwrap();
        let j = 1 + rng.below(d - 1);
        let tb = decay_tail_bound_check(&x, j, kappa).unwrap();
        let tail: f64 = mags[j..].iter().map(|m| m * m).sum::<f64>().sqrt();
        let ok = in_decay_class(&x, kappa).unwrap()
            && tb.chain_holds(1e-12)
            && (tb.lhs - tail).abs() <= 1e-12 * (1.0 + tail);
        bad += usize::from(!ok);
    }
    checks.push((format!("tail chain {}/{C4_CHAIN_CASES}", C4_CHAIN_CASES - bad), bad == 0));

    let mut bad = 0;
    for _ in 0..C4_BESTK_CASES {
        let d = 1 + rng.below(8);
        let k = rng.below(d + 1);
        let x = gaussian_signal(&mut rng, d);
        let approx = best_k_approx(&x, k).unwrap();
        let err = x.distance(&approx).unwrap();
        let best = (0u32..(1 << d))
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| {
                let s: Vec<usize> = (0..d).filter(|i| m & (1 << i) != 0).collect();
                x.distance(&x.restricted_to(&s)).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        bad += usize::from(!(approx.is_k_sparse(k) && err <= best + 1e-12));
    }
    checks.push((format!("best-k {}/{C4_BESTK_CASES}", C4_BESTK_CASES - bad), bad == 0));

    let ops = OperatorRegistry::with_defaults();
    let mut worst = 0.0f64;
    for c in 0..C4_SURROGATE_CASES {
        let mut spec = EnsembleSpec::new("lipschitz_perturbed", 20, 80, derive_seed(SEED, &[4, c as u64]));
        spec.unit_bound = true;
        let op = ops.build(&spec).unwrap();
        let x = gaussian_signal(&mut rng, 80).scaled(rng.uniform_in(0.0, 2.0));
        let b = gaussian_signal(&mut rng, 20).scaled(rng.uniform_in(0.0, 2.0));
        let alpha = rng.uniform_in(0.0, 1.0);
        let j = objective_j(op.as_ref(), &b, alpha, &x).unwrap();
        let s = surrogate_j(op.as_ref(), &b, alpha, &x, &x).unwrap();
        worst = worst.max((j - s).abs() / j.abs().max(f64::MIN_POSITIVE));
    }
    checks.push((format!("surrogate rel dev {worst:.1e}"), worst <= C4_SURROGATE_TOL));

    let converged: Vec<_> = fig6.trials.iter().filter(|t| t.soft_converged).collect();
    let bad = converged.iter().filter(|t| t.soft_fp_residual.is_nan() || t.soft_fp_residual > C4_FP_FACTOR * t.soft_stop_tol).count();
    checks.push((
        format!("ist fixed point {}/{} converged", converged.len() - bad, converged.len()),
        bad == 0 && !converged.is_empty(),
    ));

    // at x = 0 the eq1 ratios are linear RIP ratios; elsewhere they lie in the 2k-restricted range
    let mut spec = EnsembleSpec::new("gaussian_matrix", 60, 120, derive_seed(SEED, &[4, 7]));
    spec.normalize = GaussianNormalization::BySqrtN;
    let op = ops.build(&spec).unwrap();
    let m = op.linear_matrix().unwrap();
    let trials = 2000;
    let lin = probe_linear_rip(m, 3, trials, derive_seed(SEED, &[4, 8])).unwrap();
    let eq = probe_eq1(op.as_ref(), &Signal::zeros(120), 3, 2.0, trials, 0.0, derive_seed(SEED, &[4, 9])).unwrap();
    let ks = ks_statistic(&lin.ratios, &eq.ratios);
    let ks_crit = 1.63 * (2.0 / trials as f64).sqrt();
    let mut spec = EnsembleSpec::new("gaussian_matrix", 8, 12, derive_seed(SEED, &[4, 10]));
    spec.normalize = GaussianNormalization::BySqrtN;
    let small = ops.build(&spec).unwrap();
    let (lo, hi) = restricted_extremes(small.linear_matrix().unwrap().as_dmatrix(), 4);
    let xhat = gaussian_signal(&mut rng, 12);
    let eq_small = probe_eq1(small.as_ref(), &xhat, 2, 2.0, trials, 0.0, derive_seed(SEED, &[4, 11])).unwrap();
    let bracketed = eq_small.ratios.iter().all(|&r| r >= lo * (1.0 - 1e-10) && r <= hi * (1.0 + 1e-10));
    checks.push((format!("eq1/linear KS {ks:.3} <= {ks_crit:.3}, bracket {bracketed}"), ks <= ks_crit && bracketed));

    let secs = start.elapsed().as_secs_f64();
    let pass = checks.iter().all(|(_, ok)| *ok) && secs < C4_SECS;
    let text: Vec<String> =
        checks.iter().map(|(s, ok)| format!("{s}{}", if *ok { "" } else { " [x]" })).collect();
    rep.line("4", pass, format!("properties: {}; {secs:.1} s < {C4_SECS} s", text.join(", ")));
}

fn criterion5(rep: &mut Report, ctx: &RunContext) -> Vec<quasilin::ripprobe::RateMap> {
    let cfg = load("fig1.toml");
    let mid = cfg.ratemap.as_ref().unwrap().middle;
    let (maps, secs) = timed(|| fig1::run_fig1(&cfg, ctx).unwrap());
    let map = maps.iter().find(|m| m.k == 2).unwrap();
    let near = map.max_rate_near_antipode(mid, C5_NEAR_DEG);
    let far = map.min_rate_away_from_antipode(mid, C5_FAR_DEG);
    rep.line(
        "5",
        near <= C5_NEAR_MAX && far >= C5_FAR_MIN && secs < C5_SECS,
        format!(
            "rate map k=2 at threshold {}: max within {C5_NEAR_DEG} deg of -x {near:.3} <= {C5_NEAR_MAX}, \
             min beyond {C5_FAR_DEG} deg {far:.3} >= {C5_FAR_MIN}, {} draws, {secs:.1} s < {C5_SECS} s",
            map.thresholds[mid], map.draws
        ),
    );
    maps
}

fn criterion6(rep: &mut Report, ctx: &RunContext) {
    let cfg = load("astero.toml");
    let (res, secs) = timed(|| astero::run_astero(&cfg, ctx).unwrap());
    let sparse: Vec<_> = res.summaries.iter().filter(|s| s.sparse).collect();
    let pass = sparse.iter().all(|s| s.exact >= C6_MIN_EXACT) && secs < C6_SECS;
    let text: Vec<String> = sparse
        .iter()
        .map(|s| format!("{} {}/{} (median rel err {:.2})", s.case, s.exact, s.runs, s.median_rel_error))
        .collect();
    rep.line(
        "6",
        pass,
        format!("astero exact support in k steps: {}, need >= {C6_MIN_EXACT}; {secs:.1} s < {C6_SECS} s", text.join(", ")),
    );
}

fn criterion7(rep: &mut Report) {
    let mut spec = EnsembleSpec::new("lipschitz_perturbed", 20, 80, derive_seed(SEED, &[7]));
    spec.unit_bound = true;
    let op = OperatorRegistry::with_defaults().build(&spec).unwrap();
    let mut rng = SeededRng::new(derive_seed(SEED, &[7, 1]));
    let dir = gaussian_signal(&mut rng, 20);
    let dir = dir.scaled(1.0 / dir.norm());
    let (maxima, secs) = timed(|| {
        C7_NORMS
            .iter()
            .map(|&nb| {
                let b = dir.scaled(nb);
                let alpha = default_alpha(op.as_ref(), &b).unwrap();
                probe_contraction(op.as_ref(), &b, alpha, C7_PAIRS, derive_seed(SEED, &[7, 2])).unwrap().max_ratio
            })
            .collect::<Vec<f64>>()
    });
    let pass = maxima.iter().all(|&m| m < 1.0) && maxima.windows(2).all(|w| w[0] < w[1]) && secs < C7_SECS;
    let text: Vec<String> = C7_NORMS.iter().zip(&maxima).map(|(n, m)| format!("{n}:{m:.4}")).collect();
    rep.line(
        "7",
        pass,
        format!("contraction max ratio by |b| [{}] < 1 and increasing, {secs:.1} s < {C7_SECS} s", text.join(" ")),
    );
}

fn fig4_csvs(r: &fig4::Fig4Result) -> Vec<String> {
    vec![r.grid.to_csv().render(), r.trials_csv().render()]
}

fn fig6_csvs(r: &Fig6Result) -> Vec<String> {
    vec![r.soft.to_csv().render(), r.hard.to_csv().render(), r.trials_csv().render()]
}

fn fig1_csvs(maps: &[quasilin::ripprobe::RateMap]) -> Vec<String> {
    let mut v: Vec<String> = maps.iter().map(|m| fig1::map_csv(m).render()).collect();
    v.push(fig1::meta_csv(maps).render());
    v
}

/// Reruns on a pool with a different thread count, so agreement also covers scheduling.
fn criterion8(rep: &mut Report, ctx: &RunContext, f4: &fig4::Fig4Result, f6: &Fig6Result, f1: &[quasilin::ripprobe::RateMap]) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let (same, secs) = timed(|| {
        pool.install(|| {
            let a = fig4_csvs(&fig4::run_fig4(&load("fig4.toml"), ctx).unwrap()) == fig4_csvs(f4);
            let b = fig6_csvs(&fig6::run_fig6(&load("fig6.toml"), ctx).unwrap()) == fig6_csvs(f6);
            let c = fig1_csvs(&fig1::run_fig1(&load("fig1.toml"), ctx).unwrap()) == fig1_csvs(f1);
            [a, b, c]
        })
    });
    rep.line(
        "8",
        same.iter().all(|&s| s),
        format!(
            "byte-identical reruns: fig4 {}, fig6 {}, fig1 {} (timing tables excluded), {secs:.1} s",
            same[0], same[1], same[2]
        ),
    );
}

#[test]
fn acceptance() {
    let ctx = RunContext::default();
    let mut rep = Report { lines: Vec::new() };
    criterion1(&mut rep);
    let f4 = criterion2(&mut rep, &ctx);
    let f6 = criterion3(&mut rep, &ctx);
    criterion4(&mut rep, &f6);
    let f1 = criterion5(&mut rep, &ctx);
    criterion6(&mut rep, &ctx);
    criterion7(&mut rep);
    criterion8(&mut rep, &ctx, &f4, &f6, &f1);
    let unexpected: Vec<&str> = rep
        .lines
        .iter()
        .filter(|(id, pass)| !pass && !KNOWN_FAILURES.contains(&id.as_str()))
        .map(|(id, _)| id.as_str())
        .collect();
    assert!(unexpected.is_empty(), "acceptance criteria failed: {unexpected:?}");
}
