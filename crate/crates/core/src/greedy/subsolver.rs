//! Solvers for the support-restricted subproblem
//! `argmin_{supp x ⊂ S} ||A(x) - b||_p`.

use super::local::{LocalMethodRegistry, RestrictedObjective};
use crate::error::{invalid, Error, Result};
use crate::linalg::least_squares_min_norm;
use crate::operators::QuasiLinearOperator;
use crate::rng::SeededRng;
use crate::signal::{lp_norm, Signal};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

fn default_kind() -> String {
    "multistart_local".into()
}
fn default_starts() -> usize {
    10
}
fn default_max_iters() -> usize {
    500
}
fn default_step_tol() -> f64 {
    1e-10
}
fn default_init_scale() -> f64 {
    1.0
}
fn default_local_method() -> String {
    "gauss_newton".into()
}
fn default_scan_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsolverConfig {
    /// Registered subsolver name.
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_step_tol")]
    pub step_tol: f64,
    /// Random starts are drawn as `init_scale * sqrt(||b||) / sqrt(|S|) * N(0, I)`.
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    /// Registered local method used by `multistart_local`.
    #[serde(default = "default_local_method")]
    pub local_method: String,
    /// When positive, one start scans the single new coordinate over this many
    /// equispaced values in `[-scan_radius, scan_radius]`.
    #[serde(default)]
    pub scan_points: usize,
    #[serde(default = "default_scan_radius")]
    pub scan_radius: f64,
}

impl Default for SubsolverConfig {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            starts: default_starts(),
            max_iters: default_max_iters(),
            step_tol: default_step_tol(),
            init_scale: default_init_scale(),
            local_method: default_local_method(),
            scan_points: 0,
            scan_radius: default_scan_radius(),
        }
    }
}

impl SubsolverConfig {
    pub fn linear_least_squares() -> Self {
        Self { kind: "linear_least_squares".into(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::Config("subsolver needs starts >= 1".into()));
        }
        if !(self.step_tol >= 0.0) || !(self.init_scale > 0.0) {
            return Err(Error::Config("step_tol must be >= 0 and init_scale > 0".into()));
        }
        if self.scan_points == 1 || !(self.scan_radius > 0.0) {
            return Err(Error::Config("scan needs scan_points = 0 or >= 2 and scan_radius > 0".into()));
        }
        Ok(())
    }
}

/// One subproblem instance.
pub struct Subproblem<'a> {
    pub op: &'a dyn QuasiLinearOperator,
    pub b: &'a Signal,
    pub support: &'a [usize],
    pub p: f64,
    /// Previous greedy iterate, supported on a subset of `support`.
    pub previous: Option<&'a Signal>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub x: Signal,
    /// Unsmoothed `||A(x) - b||_p`.
    pub residual_lp: f64,
    pub converged: bool,
}

pub trait Subsolver: Send + Sync {
    fn solve(&self, prob: &Subproblem, cfg: &SubsolverConfig, locals: &LocalMethodRegistry) -> Result<SubproblemSolution>;
}

fn zero_solution(prob: &Subproblem) -> Result<SubproblemSolution> {
    let x = Signal::zeros(prob.op.dims().1);
    let r = prob.op.evaluate(&x).sub(prob.b)?;
    Ok(SubproblemSolution { residual_lp: lp_norm(&r, prob.p)?, x, converged: true })
}

/// Exact minimum-norm restricted least squares; linear operators and `p = 2` only.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearLeastSquares;

impl Subsolver for LinearLeastSquares {
    fn solve(&self, prob: &Subproblem, _cfg: &SubsolverConfig, _locals: &LocalMethodRegistry) -> Result<SubproblemSolution> {
        let m = prob.op.linear_matrix().ok_or_else(|| {
            Error::Config(format!("linear_least_squares needs a linear operator, got `{}`", prob.op.kind()))
        })?;
        if prob.p != 2.0 {
            return Err(Error::Config(format!("linear_least_squares needs p = 2, got {}", prob.p)));
        }
        if prob.support.is_empty() {
            return zero_solution(prob);
        }
        let z = least_squares_min_norm(&m.columns(prob.support), prob.b.as_vector());
        let mut x = DVector::zeros(m.ncols());
        for (c, &i) in prob.support.iter().enumerate() {
            x[i] = z[c];
        }
        let x = Signal::from_vector(x)?;
        let r = m.apply(&x)?.sub(prob.b)?;
        Ok(SubproblemSolution { residual_lp: r.norm(), x, converged: true })
    }
}

/// Best of several local searches. Start order:
///
/// 1. the previous iterate, zero on the new coordinates, or, if
///    `scan_points > 0` and one coordinate is new, with that coordinate set to
///    the best value of a grid scan;
/// 2. the previous iterate with the new coordinates fitted by least squares
///    against the residual, using the columns of `F(previous)`;
/// 3. Gaussian starts of scale `init_scale * sqrt(||b||) / sqrt(|S|)`.
///
/// Start 2 falls back to a Gaussian draw when the operator has no factor or the
/// fit is degenerate. Each start point is itself a candidate, so the returned
/// residual never exceeds that of the previous iterate.
#[derive(Debug, Clone, Copy, Default)]
pub struct MultistartLocal;

impl MultistartLocal {
    fn starts(prob: &Subproblem, obj: &RestrictedObjective, cfg: &SubsolverConfig) -> Vec<DVector<f64>> {
        let k = prob.support.len();
        let mut rng = SeededRng::new(prob.seed);
        let scale = cfg.init_scale * prob.b.norm().sqrt() / (k as f64).sqrt();
        let gaussian = |rng: &mut SeededRng| DVector::from_vec(rng.gaussian_vec(k)) * scale;
        let mut out = Vec::with_capacity(cfg.starts);
        let prev = match prob.previous {
            Some(p) => obj.restrict(p),
            None => DVector::zeros(k),
        };
        out.push(prev.clone());
        if cfg.scan_points > 0 && out.len() < cfg.starts {
            if let Some(z) = Self::scan_start(prob, obj, &prev, cfg) {
                out.push(z);
            }
        }
        if out.len() < cfg.starts {
            out.push(Self::linearized_start(prob, &prev).unwrap_or_else(|| gaussian(&mut rng)));
        }
        while out.len() < cfg.starts {
            out.push(gaussian(&mut rng));
        }
        out
    }

    fn scan_start(prob: &Subproblem, obj: &RestrictedObjective, prev: &DVector<f64>, cfg: &SubsolverConfig) -> Option<DVector<f64>> {
        let fresh: Vec<usize> = match prob.previous {
            Some(p) => (0..prob.support.len()).filter(|&c| p.get(prob.support[c]) == 0.0).collect(),
            None => (0..prob.support.len()).collect(),
        };
        let &[c] = fresh.as_slice() else {
            return None;
        };
        let m = cfg.scan_points;
        let mut z = prev.clone();
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..m {
            let t = cfg.scan_radius * (2.0 * i as f64 / (m - 1) as f64 - 1.0);
            z[c] = t;
            let v = obj.value(&z);
            if v < best.0 {
                best = (v, t);
            }
        }
        z[c] = best.1;
        Some(z)
    }

    fn linearized_start(prob: &Subproblem, prev: &DVector<f64>) -> Option<DVector<f64>> {
        let base = prob.previous.cloned().unwrap_or_else(|| Signal::zeros(prob.op.dims().1));
        let f = prob.op.factor(&base)?;
        let fresh: Vec<usize> = (0..prob.support.len()).filter(|&c| base.get(prob.support[c]) == 0.0).collect();
        if fresh.is_empty() {
            return None;
        }
        let cols: Vec<usize> = fresh.iter().map(|&c| prob.support[c]).collect();
        let sub = f.columns(&cols);
        if sub.iter().all(|v| *v == 0.0) {
            return None;
        }
        let resid = prob.b.as_vector() - prob.op.evaluate(&base).as_vector();
        let z = least_squares_min_norm(&sub, &resid);
        if z.iter().all(|v| *v == 0.0) || z.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mut start = prev.clone();
        for (t, &c) in fresh.iter().enumerate() {
            start[c] = z[t];
        }
        Some(start)
    }
}

impl Subsolver for MultistartLocal {
    fn solve(&self, prob: &Subproblem, cfg: &SubsolverConfig, locals: &LocalMethodRegistry) -> Result<SubproblemSolution> {
        if prob.support.is_empty() {
            return zero_solution(prob);
        }
        let method = locals.get(&cfg.local_method)?;
        let obj = RestrictedObjective { op: prob.op, b: prob.b, support: prob.support, p: prob.p };
        let mut best: Option<(f64, DVector<f64>, bool)> = None;
        for z0 in Self::starts(prob, &obj, cfg) {
            let v0 = obj.value(&z0);
            let res = method.minimize(&obj, z0.clone(), cfg.max_iters, cfg.step_tol);
            let v = obj.value(&res.z);
            let (val, z, conv) = if v <= v0 { (v, res.z, res.converged) } else { (v0, z0, res.converged) };
            if best.as_ref().is_none_or(|(bv, _, _)| val < *bv) {
                best = Some((val, z, conv));
            }
        }
        let (val, z, converged) = best.expect("at least one start");
        if !val.is_finite() {
            return Err(invalid("every start produced a non-finite residual"));
        }
        Ok(SubproblemSolution { x: Signal::from_vector(obj.embed(&z).into_vector())?, residual_lp: val, converged })
    }
}

/// Name-keyed subsolvers.
pub struct SubsolverRegistry {
    solvers: BTreeMap<String, Box<dyn Subsolver>>,
    pub locals: LocalMethodRegistry,
}

impl SubsolverRegistry {
    pub fn empty() -> Self {
        Self { solvers: BTreeMap::new(), locals: LocalMethodRegistry::empty() }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self { solvers: BTreeMap::new(), locals: LocalMethodRegistry::with_defaults() };
        r.register("linear_least_squares", LinearLeastSquares);
        r.register("multistart_local", MultistartLocal);
        r
    }

    pub fn register(&mut self, name: &str, solver: impl Subsolver + 'static) {
        self.solvers.insert(name.to_string(), Box::new(solver));
    }

    pub fn get(&self, name: &str) -> Result<&dyn Subsolver> {
        self.solvers.get(name).map(|s| s.as_ref()).ok_or_else(|| Error::UnknownStrategy {
            registry: "subsolver",
            name: name.to_string(),
            known: self.solvers.keys().cloned().collect::<Vec<_>>().join(", "),
        })
    }

    pub fn solve(&self, prob: &Subproblem, cfg: &SubsolverConfig) -> Result<SubproblemSolution> {
        self.get(&cfg.kind)?.solve(prob, cfg, &self.locals)
    }
}

impl Default for SubsolverRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

/// Solves one subproblem with the default registries.
pub fn subproblem(
    op: &dyn QuasiLinearOperator,
    b: &Signal,
    support: &[usize],
    p: f64,
    cfg: &SubsolverConfig,
) -> Result<SubproblemSolution> {
    let (n, d) = op.dims();
    if b.len() != n {
        return Err(Error::DimensionMismatch { what: "measurement length", expected: n, got: b.len() });
    }
    if let Some(&i) = support.iter().find(|&&i| i >= d) {
        return Err(invalid(format!("support index {i} out of range for d = {d}")));
    }
    cfg.validate()?;
    SubsolverRegistry::with_defaults().solve(&Subproblem { op, b, support, p, previous: None, seed: 0 }, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::operators::{make_gaussian, GaussianNormalization, LinearOperator, Rank1Phase, VectorDistribution};
    use nalgebra::DMatrix;

    #[test]
    fn identity_restricts_data() {
        let op = LinearOperator::new(Matrix::identity(4, 4));
        let b = Signal::from_slice(&[1.0, -2.0, 3.0, 0.5]).unwrap();
        for cfg in [SubsolverConfig::linear_least_squares(), SubsolverConfig::default()] {
            let s = subproblem(&op, &b, &[1, 3], 2.0, &cfg).unwrap();
            assert!(s.x.distance(&b.restricted_to(&[1, 3])).unwrap() < 1e-8, "{}", cfg.kind);
        }
    }

    #[test]
    fn empty_support_gives_zero() {
        let op = LinearOperator::new(Matrix::identity(2, 2));
        let b = Signal::from_slice(&[3.0, 4.0]).unwrap();
        let s = subproblem(&op, &b, &[], 2.0, &SubsolverConfig::default()).unwrap();
        assert_eq!(s.x, Signal::zeros(2));
        assert_eq!(s.residual_lp, 5.0);
    }

    #[test]
    fn gaussian_matches_pseudo_inverse_oracle() {
        let a = make_gaussian(12, 9, 4, GaussianNormalization::None);
        let op = LinearOperator::new(a.clone());
        let mut rng = SeededRng::new(5);
        let b = Signal::new(rng.gaussian_vec(12)).unwrap();
        let support = [2, 5, 7];
        let sub: DMatrix<f64> = a.columns(&support);
        let oracle = (sub.transpose() * &sub).try_inverse().unwrap() * sub.transpose() * b.as_vector();
        for cfg in [SubsolverConfig::linear_least_squares(), SubsolverConfig::default()] {
            let s = subproblem(&op, &b, &support, 2.0, &cfg).unwrap();
            for (c, &i) in support.iter().enumerate() {
                assert!((s.x.get(i) - oracle[c]).abs() < 1e-8, "{}", cfg.kind);
            }
        }
    }

    #[test]
    fn linear_solver_rejects_nonlinear_or_p1() {
        let a = make_gaussian(3, 3, 4, GaussianNormalization::None);
        let b = Signal::from_slice(&[1.0, 2.0, 3.0]).unwrap();
        let cfg = SubsolverConfig::linear_least_squares();
        assert!(matches!(subproblem(&LinearOperator::new(a), &b, &[0], 1.0, &cfg), Err(Error::Config(_))));
        let op = Rank1Phase::<f64>::random(3, 3, 1, VectorDistribution::Gaussian).unwrap();
        assert!(matches!(subproblem(&op, &b, &[0], 2.0, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn phase_one_dimensional_matches_grid_oracle() {
        let op = Rank1Phase::<f64>::random(6, 3, 8, VectorDistribution::Gaussian).unwrap();
        let xhat = Signal::sparse(3, &[(0, 2.0)]).unwrap();
        let b = op.evaluate(&xhat);
        let s = subproblem(&op, &b, &[0], 2.0, &SubsolverConfig::default()).unwrap();
        // grid oracle over t for the 1-D objective sum_i (a_i1^2 t^2 - b_i)^2
        let grid_best = (0..=80_000)
            .map(|s| -4.0 + s as f64 * 1e-4)
            .min_by(|&t, &u| {
                let f = |t: f64| (0..6).map(|i| (op.vector(i)[0].powi(2) * t * t - b.get(i)).powi(2)).sum::<f64>();
                f(t).total_cmp(&f(u))
            })
            .unwrap();
        assert!((s.x.get(0).abs() - grid_best.abs()).abs() < 1e-3);
        assert!((s.x.get(0).abs() - 2.0).abs() < 1e-8);
        assert!(s.residual_lp < 1e-8);
    }
}
