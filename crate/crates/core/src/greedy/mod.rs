//! Greedy `l_p` recovery: grow the support one index at a time, refitting on
//! every candidate support and keeping the index with the smallest residual.

mod local;
mod subsolver;

pub use local::{GaussNewton, GradientDescent, LocalMethod, LocalMethodRegistry, LocalResult, RestrictedObjective, SMOOTHING_EPS};
pub use subsolver::{
    subproblem, LinearLeastSquares, MultistartLocal, Subproblem, SubproblemSolution, Subsolver, SubsolverConfig,
    SubsolverRegistry,
};

use crate::error::{invalid, Error, Result};
use crate::operators::QuasiLinearOperator;
use crate::rng::derive_seed;
use crate::signal::{lp_norm, Signal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

fn default_p() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreedyConfig {
    #[serde(default = "default_p")]
    pub p: f64,
    pub k_max: usize,
    #[serde(default)]
    pub residual_tol: f64,
    #[serde(default)]
    pub subsolver: SubsolverConfig,
    #[serde(default)]
    pub seed: u64,
}

impl GreedyConfig {
    pub fn new(k_max: usize) -> Self {
        Self { p: 2.0, k_max, residual_tol: 0.0, subsolver: SubsolverConfig::default(), seed: 0 }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::Config(format!("p must lie in [1, inf), got {}", self.p)));
        }
        if self.k_max > d {
            return Err(Error::Config(format!("k_max = {} exceeds d = {d}", self.k_max)));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(Error::Config("residual_tol must be >= 0".into()));
        }
        self.subsolver.validate()
    }
}

/// Step-by-step record of a greedy run; entry `j - 1` describes step `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    /// `||A(0) - b||_p`.
    pub initial_residual: f64,
    pub supports: Vec<Vec<usize>>,
    pub iterates: Vec<Signal>,
    pub residual_lp: Vec<f64>,
    /// Index added at each step.
    pub selected: Vec<usize>,
    /// Number of candidate subproblems per step whose local search hit the iteration cap.
    pub nonconverged: Vec<usize>,
}

impl GreedyTrace {
    pub fn steps(&self) -> usize {
        self.iterates.len()
    }

    pub fn final_iterate(&self) -> Option<&Signal> {
        self.iterates.last()
    }

    /// Support nesting, support sizes, supports containing the iterates and
    /// nonincreasing residuals.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut prev_res = self.initial_residual;
        for j in 0..self.steps() {
            let s = &self.supports[j];
            if s.len() != j + 1 {
                return Err(format!("support {} has size {}", j + 1, s.len()));
            }
            if j > 0 && !self.supports[j - 1].iter().all(|i| s.contains(i)) {
                return Err(format!("support {} does not contain its predecessor", j + 1));
            }
            if !self.iterates[j].support().iter().all(|i| s.contains(i)) {
                return Err(format!("iterate {} leaves its support", j + 1));
            }
            if self.residual_lp[j] > prev_res {
                return Err(format!("residual increased at step {}: {} > {prev_res}", j + 1, self.residual_lp[j]));
            }
            prev_res = self.residual_lp[j];
        }
        Ok(())
    }
}

/// Runs the greedy method with the default subsolver registry.
pub fn greedy_recover(op: &dyn QuasiLinearOperator, b: &Signal, cfg: &GreedyConfig) -> Result<GreedyTrace> {
    greedy_recover_with(op, b, cfg, &SubsolverRegistry::with_defaults())
}

/// Runs the greedy method. Candidates of one step are solved in parallel;
/// candidate `l` at step `j` uses seed `derive_seed(cfg.seed, [j, l])`, and the
/// argmin is taken in index order so ties go to the smallest `l`.
pub fn greedy_recover_with(
    op: &dyn QuasiLinearOperator,
    b: &Signal,
    cfg: &GreedyConfig,
    registry: &SubsolverRegistry,
) -> Result<GreedyTrace> {
    let (n, d) = op.dims();
    if b.len() != n {
        return Err(Error::DimensionMismatch { what: "measurement length", expected: n, got: b.len() });
    }
    cfg.validate(d)?;
    let solver = registry.get(&cfg.subsolver.kind)?;
    let initial_residual = lp_norm(&op.evaluate(&Signal::zeros(d)).sub(b)?, cfg.p)?;
    let mut trace = GreedyTrace {
        initial_residual,
        supports: Vec::new(),
        iterates: Vec::new(),
        residual_lp: Vec::new(),
        selected: Vec::new(),
        nonconverged: Vec::new(),
    };
    let mut support: Vec<usize> = Vec::new();
    let mut current = Signal::zeros(d);
    let mut residual = initial_residual;
    for j in 1..=cfg.k_max {
        if j > 1 && residual <= cfg.residual_tol {
            break;
        }
        let candidates: Vec<usize> = (0..d).filter(|l| !support.contains(l)).collect();
        let results: Vec<Result<(usize, Vec<usize>, SubproblemSolution)>> = candidates
            .par_iter()
            .map(|&l| {
                let mut s = support.clone();
                s.push(l);
                s.sort_unstable();
                let prob = Subproblem {
                    op,
                    b,
                    support: &s,
                    p: cfg.p,
                    previous: Some(&current),
                    seed: derive_seed(cfg.seed, &[j as u64, l as u64]),
                };
                let sol = solver.solve(&prob, &cfg.subsolver, &registry.locals)?;
                Ok((l, s, sol))
            })
            .collect();
        let mut best: Option<(usize, Vec<usize>, SubproblemSolution)> = None;
        let mut nonconverged = 0;
        for r in results {
            let (l, s, sol) = r?;
            if !sol.converged {
                nonconverged += 1;
            }
            if best.as_ref().is_none_or(|(_, _, bs)| sol.residual_lp < bs.residual_lp) {
                best = Some((l, s, sol));
            }
        }
        let (l, s, sol) = best.ok_or_else(|| invalid("no candidate index left"))?;
        support = s;
        current = sol.x;
        residual = sol.residual_lp;
        trace.supports.push(support.clone());
        trace.iterates.push(current.clone());
        trace.residual_lp.push(residual);
        trace.selected.push(l);
        trace.nonconverged.push(nonconverged);
    }
    Ok(trace)
}

/// Constants entering the a-priori error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub alpha: f64,
    pub beta: f64,
    pub lipschitz: f64,
    pub kappa: f64,
    pub e_norm: f64,
    /// Largest magnitude `r_1` of the target.
    pub r1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// Constant `sqrt(2)`.
    Euclidean,
    /// Outer-product distance, constant `sqrt(3)`.
    HilbertSchmidt,
}

/// `||e||/alpha + kappa^j r1 c (1 + (beta + 2L)/alpha)` with `c = sqrt(2)` or `sqrt(3)`.
pub fn recovery_error_bound(params: &BoundParams, j: usize, variant: BoundVariant) -> Result<f64> {
    let BoundParams { alpha, beta, lipschitz, kappa, e_norm, r1 } = *params;
    if !(alpha > 0.0) || !(beta > 0.0) || lipschitz < 0.0 || e_norm < 0.0 || r1 < 0.0 {
        return Err(invalid("bound constants must be positive"));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(invalid(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    let c = match variant {
        BoundVariant::Euclidean => 2f64.sqrt(),
        BoundVariant::HilbertSchmidt => 3f64.sqrt(),
    };
    Ok(e_norm / alpha + kappa.powi(j as i32) * r1 * c * (1.0 + (beta + 2.0 * lipschitz) / alpha))
}

/// The bound for every step recorded in `trace`.
pub fn recovery_error_bounds(trace: &GreedyTrace, params: &BoundParams, variant: BoundVariant) -> Result<Vec<f64>> {
    (1..=trace.steps()).map(|j| recovery_error_bound(params, j, variant)).collect()
}
