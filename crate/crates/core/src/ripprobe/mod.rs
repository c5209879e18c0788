//! Monte-Carlo probes of the restricted-isometry-type hypotheses used by the
//! recovery theorems.
//!
//! Probes sample sparse vectors, evaluate the ratio a hypothesis bounds from
//! below and above, and report the extremal values seen together with the
//! fraction of samples whose ratio exceeds a threshold. They estimate
//! constants; they never certify them.
//!
//! Every trial `t` draws from its own stream `derive_seed(seed, [t])`, so a
//! probe with `T` trials sees exactly the first `T` samples of one with more
//! trials, and parallel execution does not change results.

mod ratemap;

pub use ratemap::{build_rate_map, RateCell, RateMap, RateMapSpec};

use crate::distance::hs_outer_distance;
use crate::error::{invalid, Error, Result};
use crate::greedy::BoundVariant;
use crate::linalg::{spectral_norm, Matrix};
use crate::operators::QuasiLinearOperator;
use crate::rng::{derive_seed, SeededRng};
use crate::signal::{lp_norm, Signal};
use crate::sparsity::best_k_approx;
use rayon::prelude::*;

/// Pairs whose denominator falls below this are skipped and counted.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Relative slack for the outer-product sandwich cross-check.
pub const SANDWICH_TOL: f64 = 1e-10;

/// Which inequality a probe measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `||A x|| / ||x||` for a matrix on sparse unit vectors.
    LinearRip,
    /// `||A(x_k) - A(y)||_p / ||x_k - y||`.
    Eq1,
    /// `||A(x_k) - A(y)||_p / ||x_k x_k* - y y*||_HS`.
    Eq1b,
    /// `||F(z)(x - y)|| / ||x - y||`.
    FRip,
    /// `||F(x_k) - F(y)||_2 / ||x_k - y||`.
    LipschitzF,
    /// `||A(x) - A(x_k)||_p / ||x - x_k||`.
    TailL,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::LinearRip => "linear_rip",
            Condition::Eq1 => "eq1",
            Condition::Eq1b => "eq1b",
            Condition::FRip => "f_rip",
            Condition::LipschitzF => "lipschitz_F",
            Condition::TailL => "tail_L",
        }
    }
}

/// Empirical constants from one probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub condition: Condition,
    /// Smallest sampled ratio.
    pub alpha_hat: f64,
    /// Largest sampled ratio.
    pub beta_hat: f64,
    pub threshold: Option<f64>,
    /// Fraction of non-degenerate samples with ratio strictly above the
    /// threshold; 1 when no threshold was given.
    pub success_rate: f64,
    /// Trials drawn, including skipped ones.
    pub samples: usize,
    pub skipped: usize,
    pub seed: u64,
    /// Non-degenerate ratios in trial order.
    pub ratios: Vec<f64>,
    /// Pairs violating the outer-product sandwich (only counted by `eq1b`).
    pub sandwich_violations: usize,
}

impl ProbeResult {
    fn from_ratios(
        condition: Condition,
        samples: Vec<Option<f64>>,
        threshold: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        let total = samples.len();
        let ratios: Vec<f64> = samples.into_iter().flatten().collect();
        if ratios.is_empty() {
            return Err(Error::AllSamplesDegenerate(total));
        }
        let alpha_hat = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let beta_hat = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut out = Self {
            condition,
            alpha_hat,
            beta_hat,
            threshold,
            success_rate: 1.0,
            samples: total,
            skipped: total - ratios.len(),
            seed,
            ratios,
            sandwich_violations: 0,
        };
        if let Some(t) = threshold {
            out.success_rate = out.rate_at(t);
        }
        Ok(out)
    }

    /// `max(1 - alpha_hat, beta_hat - 1)`, the RIP constant in `(1 ± delta)` form.
    pub fn delta_hat(&self) -> f64 {
        (1.0 - self.alpha_hat).max(self.beta_hat - 1.0)
    }

    /// Fraction of recorded ratios strictly above `threshold`.
    pub fn rate_at(&self, threshold: f64) -> f64 {
        let above = self.ratios.iter().filter(|&&r| r > threshold).count();
        above as f64 / self.ratios.len() as f64
    }

    pub fn median_ratio(&self) -> f64 {
        let mut v = self.ratios.clone();
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        if v.len() % 2 == 1 {
            v[m]
        } else {
            0.5 * (v[m - 1] + v[m])
        }
    }
}

/// A uniformly random support of size `k` carrying a unit-norm Gaussian vector.
pub fn sample_sparse_sphere(d: usize, k: usize, seed: u64) -> Result<Signal> {
    sample_sparse_sphere_with(d, k, &mut SeededRng::new(seed))
}

pub(crate) fn sample_sparse_sphere_with(d: usize, k: usize, rng: &mut SeededRng) -> Result<Signal> {
    if k < 1 || k > d {
        return Err(invalid(format!("sparse sphere needs 1 <= k <= d, got k = {k}, d = {d}")));
    }
    let support = rng.subset(d, k);
    loop {
        let entries: Vec<(usize, f64)> = support.iter().map(|&i| (i, rng.gaussian())).collect();
        let x = Signal::sparse(d, &entries)?;
        let nrm = x.norm();
        if nrm > 0.0 {
            return Ok(x.scaled(1.0 / nrm));
        }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(invalid("probe needs at least one trial"));
    }
    Ok(())
}

fn check_dims(op: &dyn QuasiLinearOperator, x: &Signal, k: usize) -> Result<()> {
    let (_, d) = op.dims();
    crate::error::ensure_len("probe signal", d, x.len())?;
    if k < 1 || k > d {
        return Err(invalid(format!("k = {k} outside 1..={d}")));
    }
    Ok(())
}

/// Draws the comparison vector `y`: a random k-sparse direction with radius
/// uniform on `[0, 2 s)`, where `s` is `||x_k||` (or 1 when `x_k = 0`).
fn sample_partner(d: usize, k: usize, scale: f64, rng: &mut SeededRng) -> Result<Signal> {
    let u = sample_sparse_sphere_with(d, k, rng)?;
    Ok(u.scaled(2.0 * scale * rng.uniform()))
}

fn partner_scale(xk: &Signal) -> f64 {
    let s = xk.norm();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Ratios `||A x||` over random k-sparse unit vectors.
pub fn probe_linear_rip(a: &Matrix, k: usize, trials: usize, seed: u64) -> Result<ProbeResult> {
    check_trials(trials)?;
    let d = a.ncols();
    if k < 1 || k > d {
        return Err(invalid(format!("k = {k} outside 1..={d}")));
    }
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = sample_sparse_sphere(d, k, derive_seed(seed, &[t as u64]))?;
            Ok(Some(a.apply(&x)?.norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    ProbeResult::from_ratios(Condition::LinearRip, samples, None, seed)
}

/// Lower/upper ratios of the restricted bi-Lipschitz condition around `x_k`.
pub fn probe_eq1(
    op: &dyn QuasiLinearOperator,
    xhat: &Signal,
    k: usize,
    p: f64,
    trials: usize,
    alpha_threshold: f64,
    seed: u64,
) -> Result<ProbeResult> {
    probe_pairs(op, xhat, k, p, trials, alpha_threshold, seed, Denominator::Euclidean)
}

/// As [`probe_eq1`] with the outer-product distance `||x_k x_k* - y y*||_HS`
/// as denominator. Every sampled pair is also checked against
/// `HS <= ||x - y|| ||x + y|| <= sqrt(2) HS`.
pub fn probe_eq1b(
    op: &dyn QuasiLinearOperator,
    xhat: &Signal,
    k: usize,
    p: f64,
    trials: usize,
    alpha_threshold: f64,
    seed: u64,
) -> Result<ProbeResult> {
    probe_pairs(op, xhat, k, p, trials, alpha_threshold, seed, Denominator::Outer)
}

#[derive(Clone, Copy)]
enum Denominator {
    Euclidean,
    Outer,
}

#[allow(clippy::too_many_arguments)]
fn probe_pairs(
    op: &dyn QuasiLinearOperator,
    xhat: &Signal,
    k: usize,
    p: f64,
    trials: usize,
    alpha_threshold: f64,
    seed: u64,
    denominator: Denominator,
) -> Result<ProbeResult> {
    check_trials(trials)?;
    check_dims(op, xhat, k)?;
    lp_norm(xhat, p)?;
    let d = xhat.len();
    let xk = best_k_approx(xhat, k)?;
    let ax = op.evaluate(&xk);
    let scale = partner_scale(&xk);
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = SeededRng::new(derive_seed(seed, &[t as u64]));
            let y = sample_partner(d, k, scale, &mut rng)?;
            Ok(pair_ratio(op, &xk, &ax, &y, p, denominator))
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = rows.iter().filter(|(_, ok)| !ok).count();
    let condition = match denominator {
        Denominator::Euclidean => Condition::Eq1,
        Denominator::Outer => Condition::Eq1b,
    };
    let mut out = ProbeResult::from_ratios(
        condition,
        rows.into_iter().map(|(r, _)| r).collect(),
        Some(alpha_threshold),
        seed,
    )?;
    out.sandwich_violations = violations;
    Ok(out)
}

/// The ratio for one pair, or `None` when the denominator is degenerate, and
/// whether the sandwich inequality held (always true for the Euclidean form).
fn pair_ratio(
    op: &dyn QuasiLinearOperator,
    xk: &Signal,
    ax: &Signal,
    y: &Signal,
    p: f64,
    denominator: Denominator,
) -> (Option<f64>, bool) {
    let diff = xk.sub(y).expect("same length");
    let (den, sandwich_ok) = match denominator {
        Denominator::Euclidean => (diff.norm(), true),
        Denominator::Outer => {
            let hs = hs_outer_distance(xk, y).expect("same length");
            let prod = diff.norm() * xk.add(y).expect("same length").norm();
            let slack = SANDWICH_TOL * (1.0 + prod);
            (hs, hs <= prod + slack && prod <= std::f64::consts::SQRT_2 * hs + slack)
        }
    };
    if den < DEGENERATE_TOL {
        return (None, sandwich_ok);
    }
    let num = lp_norm(&ax.sub(&op.evaluate(y)).expect("same length"), p).expect("p validated");
    (Some(num / den), sandwich_ok)
}

/// Ratios `||F(z)(x - y)|| / ||x - y||` over random k-sparse triples. All
/// three vectors have a random k-sparse direction and radius uniform on `[0, 2)`.
pub fn probe_f_rip(op: &dyn QuasiLinearOperator, k: usize, trials: usize, seed: u64) -> Result<ProbeResult> {
    check_trials(trials)?;
    if !op.supports_factor() {
        return Err(Error::FactorUnavailable(op.kind()));
    }
    let (_, d) = op.dims();
    if k < 1 || k > d {
        return Err(invalid(format!("k = {k} outside 1..={d}")));
    }
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = SeededRng::new(derive_seed(seed, &[t as u64]));
            let x = sample_partner(d, k, 1.0, &mut rng)?;
            let y = sample_partner(d, k, 1.0, &mut rng)?;
            let z = sample_partner(d, k, 1.0, &mut rng)?;
            let diff = x.sub(&y)?;
            let den = diff.norm();
            if den < DEGENERATE_TOL {
                return Ok(None);
            }
            let f = op.factor(&z).ok_or(Error::FactorUnavailable(op.kind()))?;
            Ok(Some(f.apply(&diff)?.norm() / den))
        })
        .collect::<Result<Vec<_>>>()?;
    ProbeResult::from_ratios(Condition::FRip, samples, None, seed)
}

/// Lipschitz estimates of `F` around `x_k` and of `A` across the tail of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzProbe {
    /// Ratios `||F(x_k) - F(y)||_2 / ||x_k - y||`; `beta_hat` is the estimate of `C_k`.
    pub factor: ProbeResult,
    /// `||A(x) - A(x_k)||_p / ||x - x_k||` as a single-sample result.
    pub tail: ProbeResult,
    /// `||A(x) - A(x_k)||_p / ||x x* - x_k x_k*||_HS`.
    pub tail_hs: f64,
    /// Set when `x` is exactly k-sparse; the tail ratios are then reported as 0.
    pub tail_undefined: bool,
}

impl LipschitzProbe {
    pub fn c_hat(&self) -> f64 {
        self.factor.beta_hat
    }
}

pub fn probe_lipschitz_f(
    op: &dyn QuasiLinearOperator,
    xhat: &Signal,
    k: usize,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<LipschitzProbe> {
    check_trials(trials)?;
    check_dims(op, xhat, k)?;
    lp_norm(xhat, p)?;
    if !op.supports_factor() {
        return Err(Error::FactorUnavailable(op.kind()));
    }
    let d = xhat.len();
    let xk = best_k_approx(xhat, k)?;
    let fx = op.factor(&xk).ok_or(Error::FactorUnavailable(op.kind()))?;
    let scale = partner_scale(&xk);
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = SeededRng::new(derive_seed(seed, &[t as u64]));
            let y = sample_partner(d, k, scale, &mut rng)?;
            let den = xk.distance(&y)?;
            if den < DEGENERATE_TOL {
                return Ok(None);
            }
            let fy = op.factor(&y).ok_or(Error::FactorUnavailable(op.kind()))?;
            Ok(Some(spectral_norm(&fx.sub(&fy)?).value / den))
        })
        .collect::<Result<Vec<_>>>()?;
    let factor = ProbeResult::from_ratios(Condition::LipschitzF, samples, None, seed)?;

    let tail_den = xhat.distance(&xk)?;
    let tail_undefined = tail_den < DEGENERATE_TOL;
    let (tail_l, tail_hs) = if tail_undefined {
        (0.0, 0.0)
    } else {
        let num = lp_norm(&op.evaluate(xhat).sub(&op.evaluate(&xk))?, p)?;
        let hs = hs_outer_distance(xhat, &xk)?;
        let hs_ratio = if hs < DEGENERATE_TOL { 0.0 } else { num / hs };
        (num / tail_den, hs_ratio)
    };
    let tail = ProbeResult {
        condition: Condition::TailL,
        alpha_hat: tail_l,
        beta_hat: tail_l,
        threshold: None,
        success_rate: 1.0,
        samples: 1,
        skipped: usize::from(tail_undefined),
        seed,
        ratios: vec![tail_l],
        sandwich_violations: 0,
    };
    Ok(LipschitzProbe {
        factor,
        tail,
        tail_hs,
        tail_undefined,
    })
}

/// Largest admissible decay rate `kappa` for the recovery theorems:
/// `a / sqrt(a^2 + c (beta + 2L)^2)` with `a = alpha - 2 e / r_k`, `c = 1`
/// (Euclidean) or `c = 2` (outer-product distance).
pub fn decay_threshold_kappa(
    alpha: f64,
    beta: f64,
    lipschitz: f64,
    e_lp: f64,
    r_k: f64,
    variant: BoundVariant,
) -> Result<f64> {
    for (name, v) in [("alpha", alpha), ("beta", beta), ("L", lipschitz), ("e", e_lp), ("r_k", r_k)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(invalid(format!("{name} must be finite and nonnegative, got {v}")));
        }
    }
    let noise = if e_lp == 0.0 { 0.0 } else { 2.0 * e_lp / r_k };
    let a = alpha - noise;
    if !(a > 0.0) {
        return Err(Error::NoiseTooLarge(a));
    }
    let c = match variant {
        BoundVariant::Euclidean => 1.0,
        BoundVariant::HilbertSchmidt => 2.0,
    };
    let m = beta + 2.0 * lipschitz;
    Ok(a / (a * a + c * m * m).sqrt())
}
