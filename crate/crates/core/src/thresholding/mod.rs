//! Iterative hard thresholding and surrogate-functional iterative soft
//! thresholding for quasi-linear measurements, with objective and fixed-point
//! diagnostics.

mod contraction;

pub use contraction::{probe_contraction, solve_frozen, ContractionProbe, ProximalSolve, PROX_MAX_ITERS, PROX_TOL};

use crate::error::{invalid, Error, Result};
use crate::linalg::{spectral_norm, Matrix};
use crate::operators::QuasiLinearOperator;
use crate::signal::Signal;
use crate::sparsity::best_k_approx;
use serde::{Deserialize, Serialize};

/// Componentwise shrinkage by `alpha / 2`, the proximal map of `alpha ||.||_1`
/// for the squared-distance term `||t - x||^2`.
pub fn soft_threshold(x: &Signal, alpha: f64) -> Result<Signal> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("threshold must be finite and >= 0, got {alpha}")));
    }
    Ok(soft_threshold_unchecked(x, alpha))
}

pub(crate) fn soft_threshold_unchecked(x: &Signal, alpha: f64) -> Signal {
    let h = alpha / 2.0;
    Signal::from_vector_unchecked(x.as_vector().map(|v| {
        if v >= h {
            v - h
        } else if v <= -h {
            v + h
        } else {
            0.0
        }
    }))
}

fn require_factor(op: &dyn QuasiLinearOperator, x: &Signal) -> Result<Matrix> {
    op.factor(x).ok_or(Error::FactorUnavailable("thresholding iterations need F(x)"))
}

fn check_dims(op: &dyn QuasiLinearOperator, b: &Signal, x: &Signal) -> Result<()> {
    let (n, d) = op.dims();
    if b.len() != n {
        return Err(Error::DimensionMismatch { what: "measurement length", expected: n, got: b.len() });
    }
    if x.len() != d {
        return Err(Error::DimensionMismatch { what: "signal length", expected: d, got: x.len() });
    }
    Ok(())
}

/// `J_alpha(x) = ||F(x) x - b||^2 + alpha ||x||_1`.
pub fn objective_j(op: &dyn QuasiLinearOperator, b: &Signal, alpha: f64, x: &Signal) -> Result<f64> {
    check_dims(op, b, x)?;
    Ok(op.evaluate(x).sub(b)?.norm_squared() + alpha * x.l1_norm())
}

/// `J^S(x, a) = ||F(a) x - b||^2 + alpha ||x||_1 + ||x - a||^2 - ||F(a) x - F(a) a||^2`.
pub fn surrogate_j(op: &dyn QuasiLinearOperator, b: &Signal, alpha: f64, x: &Signal, a: &Signal) -> Result<f64> {
    check_dims(op, b, x)?;
    check_dims(op, b, a)?;
    let f = require_factor(op, a)?;
    let fx = f.apply(x)?;
    let fa = f.apply(a)?;
    Ok(fx.sub(b)?.norm_squared() + alpha * x.l1_norm() + x.distance(a)?.powi(2) - fx.distance(&fa)?.powi(2))
}

/// `S_alpha((I - F(x)* F(x)) x + F(x)* b)`.
pub fn fixed_point_map(op: &dyn QuasiLinearOperator, b: &Signal, alpha: f64, x: &Signal) -> Result<Signal> {
    check_dims(op, b, x)?;
    let f = require_factor(op, x)?;
    Ok(soft_threshold_unchecked(&gradient_step(&f, b, x, 1.0), alpha))
}

/// `x + c F* (b - F x)`.
fn gradient_step(f: &Matrix, b: &Signal, x: &Signal, c: f64) -> Signal {
    let r = b.sub(&f.apply(x).expect("dims checked")).expect("dims checked");
    x.add(&f.apply_adjoint(&r).expect("dims checked").scaled(c)).expect("dims checked")
}

/// Number of leading iterations stored verbatim; later ones are kept every
/// [`THIN_STRIDE`] steps.
pub const THIN_AFTER: usize = 1000;
pub const THIN_STRIDE: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdingReport {
    /// Stored iterates, with their iteration numbers in `iterate_index`.
    pub iterates: Vec<Signal>,
    pub iterate_index: Vec<usize>,
    pub final_x: Signal,
    /// `J_alpha` (soft) or `||F(x)x - b||^2` (hard) at every iterate from `x0` on.
    pub objective_history: Vec<f64>,
    pub fixed_point_residual: f64,
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
    /// `||x_{j+1} - x_j|| / ||x_j - x_{j-1}||` where the denominator is nonzero.
    pub contraction_estimates: Vec<f64>,
    /// Set when the objective rose between consecutive iterates.
    pub objective_increased: bool,
}

struct Recorder {
    iterates: Vec<Signal>,
    iterate_index: Vec<usize>,
    objective: Vec<f64>,
    contraction: Vec<f64>,
    last_step: Option<f64>,
}

impl Recorder {
    fn new(x0: &Signal, obj0: f64) -> Self {
        Self {
            iterates: vec![x0.clone()],
            iterate_index: vec![0],
            objective: vec![obj0],
            contraction: Vec::new(),
            last_step: None,
        }
    }

    fn push(&mut self, j: usize, x: &Signal, obj: f64, step: f64) {
        if j <= THIN_AFTER || j.is_multiple_of(THIN_STRIDE) {
            self.iterates.push(x.clone());
            self.iterate_index.push(j);
        }
        self.objective.push(obj);
        if let Some(prev) = self.last_step {
            if prev > 0.0 {
                self.contraction.push(step / prev);
            }
        }
        self.last_step = Some(step);
    }

    fn finish(
        mut self,
        j: usize,
        x: Signal,
        fixed_point_residual: f64,
        converged: bool,
        diverged: bool,
    ) -> ThresholdingReport {
        if self.iterate_index.last() != Some(&j) {
            self.iterates.push(x.clone());
            self.iterate_index.push(j);
        }
        let objective_increased = self.objective.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-300);
        ThresholdingReport {
            iterates: self.iterates,
            iterate_index: self.iterate_index,
            final_x: x,
            objective_history: self.objective,
            fixed_point_residual,
            converged,
            diverged,
            iterations: j,
            contraction_estimates: self.contraction,
            objective_increased,
        }
    }
}

fn default_max_iters() -> usize {
    10_000
}
fn default_stop_tol() -> f64 {
    1e-10
}
fn default_mu_refresh() -> usize {
    10
}

/// Step rule for hard thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum MuRule {
    Fixed { mu: f64 },
    /// `mu = ||F(x_j)||_2^2`, recomputed every `every` iterations.
    Refreshed { every: usize },
}

impl Default for MuRule {
    fn default() -> Self {
        MuRule::Refreshed { every: default_mu_refresh() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IhtConfig {
    pub k: usize,
    #[serde(default)]
    pub mu: MuRule,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    #[serde(skip)]
    pub x0: Option<Signal>,
}

impl IhtConfig {
    pub fn new(k: usize) -> Self {
        Self { k, mu: MuRule::default(), max_iters: default_max_iters(), stop_tol: default_stop_tol(), x0: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("iht needs k >= 1".into()));
        }
        match self.mu {
            MuRule::Fixed { mu } if !(mu > 0.0) || !mu.is_finite() => {
                Err(Error::Config(format!("mu must be finite and > 0, got {mu}")))
            }
            MuRule::Refreshed { every: 0 } => Err(Error::Config("mu refresh interval must be >= 1".into())),
            _ if !(self.stop_tol >= 0.0) => Err(Error::Config("stop_tol must be >= 0".into())),
            _ => Ok(()),
        }
    }
}

fn divergence_limit(b: &Signal) -> f64 {
    1e6 * (1.0 + b.norm())
}

/// `x_{j+1} = H_k(x_j + (1/mu) F(x_j)* (b - F(x_j) x_j))`.
pub fn iht(op: &dyn QuasiLinearOperator, b: &Signal, cfg: &IhtConfig) -> Result<ThresholdingReport> {
    cfg.validate()?;
    let d = op.dims().1;
    let mut x = cfg.x0.clone().unwrap_or_else(|| Signal::zeros(d));
    check_dims(op, b, &x)?;
    if cfg.k > d {
        return Err(Error::Config(format!("k = {} exceeds d = {d}", cfg.k)));
    }
    let limit = divergence_limit(b);
    let mut f = require_factor(op, &x)?;
    let mut rec = Recorder::new(&x, f.apply(&x)?.sub(b)?.norm_squared());
    let mut mu = match cfg.mu {
        MuRule::Fixed { mu } => mu,
        MuRule::Refreshed { .. } => refreshed_mu(&f, 1.0),
    };
    let mut converged = false;
    let mut diverged = false;
    let mut j = 0;
    while j < cfg.max_iters {
        if let MuRule::Refreshed { every } = cfg.mu {
            if j > 0 && j % every == 0 {
                mu = refreshed_mu(&f, mu);
            }
        }
        let next = best_k_approx(&gradient_step(&f, b, &x, 1.0 / mu), cfg.k)?;
        j += 1;
        let step = next.distance(&x)?;
        x = next;
        if !(x.norm() <= limit) {
            diverged = true;
            break;
        }
        f = require_factor(op, &x)?;
        rec.push(j, &x, f.apply(&x)?.sub(b)?.norm_squared(), step);
        if step <= cfg.stop_tol {
            converged = true;
            break;
        }
    }
    let fpr = if diverged {
        f64::INFINITY
    } else {
        best_k_approx(&gradient_step(&f, b, &x, 1.0 / mu), cfg.k)?.distance(&x)?
    };
    Ok(rec.finish(j, x, fpr, converged, diverged))
}

/// `||F||^2`, keeping `fallback` when `F = 0` (the step is then void anyway).
fn refreshed_mu(f: &Matrix, fallback: f64) -> f64 {
    let s = spectral_norm(f).value;
    if s > 0.0 {
        s * s
    } else {
        fallback
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IstConfig {
    pub alpha: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    #[serde(skip)]
    pub x0: Option<Signal>,
}

impl IstConfig {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, max_iters: default_max_iters(), stop_tol: default_stop_tol(), x0: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be finite and > 0, got {}", self.alpha)));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::Config("stop_tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// `x_{j+1} = S_alpha((I - F(x_j)* F(x_j)) x_j + F(x_j)* b)`, from `x0 = 0` by default.
pub fn ist(op: &dyn QuasiLinearOperator, b: &Signal, cfg: &IstConfig) -> Result<ThresholdingReport> {
    cfg.validate()?;
    let d = op.dims().1;
    let mut x = cfg.x0.clone().unwrap_or_else(|| Signal::zeros(d));
    check_dims(op, b, &x)?;
    let limit = divergence_limit(b);
    let alpha = cfg.alpha;
    let mut f = require_factor(op, &x)?;
    // b - F(x) x, shared by the objective and the next step
    let mut r = b.sub(&f.apply(&x)?)?;
    let mut rec = Recorder::new(&x, r.norm_squared() + alpha * x.l1_norm());
    let mut converged = false;
    let mut diverged = false;
    let mut j = 0;
    while j < cfg.max_iters {
        let next = soft_threshold_unchecked(&x.add(&f.apply_adjoint(&r)?)?, alpha);
        j += 1;
        let step = next.distance(&x)?;
        x = next;
        if !(x.norm() <= limit) {
            diverged = true;
            break;
        }
        f = require_factor(op, &x)?;
        r = b.sub(&f.apply(&x)?)?;
        rec.push(j, &x, r.norm_squared() + alpha * x.l1_norm(), step);
        if step <= cfg.stop_tol {
            converged = true;
            break;
        }
    }
    let fpr = if diverged {
        f64::INFINITY
    } else {
        soft_threshold_unchecked(&gradient_step(&f, b, &x, 1.0), alpha).distance(&x)?
    };
    Ok(rec.finish(j, x, fpr, converged, diverged))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationReport {
    pub alphas: Vec<f64>,
    pub reports: Vec<ThresholdingReport>,
    /// `||x_alpha||_1` per stage.
    pub l1_norms: Vec<f64>,
    /// `||F(x_alpha) x_alpha - b||` per stage.
    pub residuals: Vec<f64>,
    /// Whether every `||x_alpha||_1 <= ||x_feasible||_1 + 1e-8`, when a feasible point was given.
    pub l1_bound_holds: Option<bool>,
    /// Whether the residuals are nonincreasing within `1e-8`.
    pub residual_monotone: bool,
}

impl ContinuationReport {
    pub fn final_x(&self) -> &Signal {
        &self.reports.last().expect("nonempty path").final_x
    }
}

/// Runs [`ist`] along a strictly decreasing `alphas`, warm-starting each stage
/// at the previous limit.
pub fn alpha_continuation(
    op: &dyn QuasiLinearOperator,
    b: &Signal,
    alphas: &[f64],
    cfg: &IstConfig,
    feasible: Option<&Signal>,
) -> Result<ContinuationReport> {
    if alphas.is_empty() {
        return Err(invalid("alpha path is empty"));
    }
    if alphas.windows(2).any(|w| !(w[1] < w[0])) || !(alphas[alphas.len() - 1] > 0.0) {
        return Err(invalid("alpha path must be strictly decreasing and positive"));
    }
    let mut reports: Vec<ThresholdingReport> = Vec::with_capacity(alphas.len());
    let mut x0 = cfg.x0.clone();
    for &alpha in alphas {
        let stage = IstConfig { alpha, x0: x0.take(), ..cfg.clone() };
        let rep = ist(op, b, &stage)?;
        let stop = rep.diverged;
        x0 = Some(rep.final_x.clone());
        reports.push(rep);
        if stop {
            break;
        }
    }
    let l1_norms: Vec<f64> = reports.iter().map(|r| r.final_x.l1_norm()).collect();
    let residuals = reports
        .iter()
        .map(|r| Ok(op.evaluate(&r.final_x).sub(b)?.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let l1_bound_holds = feasible.map(|xf| {
        let bound = xf.l1_norm() + 1e-8;
        l1_norms.iter().all(|&v| v <= bound)
    });
    let residual_monotone = residuals.windows(2).all(|w| w[1] <= w[0] + 1e-8);
    Ok(ContinuationReport {
        alphas: alphas[..reports.len()].to_vec(),
        reports,
        l1_norms,
        residuals,
        l1_bound_holds,
        residual_monotone,
    })
}

/// `alpha = 0.1 ||F(0)* b||_inf`.
pub fn default_alpha(op: &dyn QuasiLinearOperator, b: &Signal) -> Result<f64> {
    let d = op.dims().1;
    check_dims(op, b, &Signal::zeros(d))?;
    let f = require_factor(op, &Signal::zeros(d))?;
    Ok(0.1 * f.apply_adjoint(b)?.max_abs())
}

/// Geometric path from `start` down to `start * floor_ratio` in `stages` steps.
pub fn geometric_alphas(start: f64, floor_ratio: f64, stages: usize) -> Result<Vec<f64>> {
    if !(start > 0.0) || !(floor_ratio > 0.0 && floor_ratio < 1.0) || stages < 2 {
        return Err(invalid("geometric alpha path needs start > 0, ratio in (0,1), stages >= 2"));
    }
    let q = floor_ratio.powf(1.0 / (stages - 1) as f64);
    Ok((0..stages).map(|s| start * q.powi(s as i32)).collect())
}

/// Constants of the a-priori distance between the soft-thresholding limit and
/// a sparse minimizer of `J_alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub gamma_tilde: f64,
    pub b_norm: f64,
    /// `||x_hat||` of an exact solution `F(x_hat) x_hat = b`.
    pub xhat_norm: f64,
    /// `||x_hat_alpha - x_hat||`.
    pub minimizer_gap: f64,
}

/// Diagnostic evaluation of
/// `sqrt(alpha c2 ||b||)/a + (c1 + c3 ||x_hat||)/a ||x_hat_alpha - x_hat||`
/// with `a = sqrt(1 - gamma_tilde) - c2 c3 ||b||`. Never used as an assertion:
/// the constants are not computable exactly.
pub fn stability_bound(c: &StabilityConstants) -> Result<f64> {
    let fields = [c.alpha, c.c1, c.c2, c.c3, c.b_norm, c.xhat_norm, c.minimizer_gap];
    if fields.iter().any(|v| !(*v >= 0.0)) || !(c.gamma_tilde >= 0.0 && c.gamma_tilde < 1.0) {
        return Err(invalid("stability constants out of range"));
    }
    let a = (1.0 - c.gamma_tilde).sqrt() - c.c2 * c.c3 * c.b_norm;
    if !(a > 0.0) {
        return Err(Error::Precondition(format!("c2 c3 ||b|| too large: a = {a}")));
    }
    Ok((c.alpha * c.c2 * c.b_norm).sqrt() / a + (c.c1 + c.c3 * c.xhat_norm) / a * c.minimizer_gap)
}

#[cfg(test)]
mod tests;
