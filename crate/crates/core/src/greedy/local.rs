//! Local minimizers for a support-restricted `l_p` residual.

use crate::error::{Error, Result};
use crate::operators::QuasiLinearOperator;
use crate::signal::{lp_norm_slice, Signal};
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;

/// Smoothing constant inside `|t|_eps = sqrt(t^2 + eps^2)`; objective values
/// reported to callers are never smoothed.
pub const SMOOTHING_EPS: f64 = 1e-9;

/// `z ↦ ||A(embed(z)) - b||_p` for `z` indexed by `support`.
pub struct RestrictedObjective<'a> {
    pub op: &'a dyn QuasiLinearOperator,
    pub b: &'a Signal,
    pub support: &'a [usize],
    pub p: f64,
}

impl RestrictedObjective<'_> {
    pub fn dim(&self) -> usize {
        self.support.len()
    }

    pub fn embed(&self, z: &DVector<f64>) -> Signal {
        let d = self.op.dims().1;
        let mut x = DVector::zeros(d);
        for (c, &i) in self.support.iter().enumerate() {
            x[i] = z[c];
        }
        Signal::from_vector_unchecked(x)
    }

    pub fn restrict(&self, x: &Signal) -> DVector<f64> {
        DVector::from_iterator(self.support.len(), self.support.iter().map(|&i| x.get(i)))
    }

    pub fn residual(&self, z: &DVector<f64>) -> DVector<f64> {
        self.op.evaluate(&self.embed(z)).into_vector() - self.b.as_vector()
    }

    /// Unsmoothed `l_p` norm of the residual; `inf` if it is not finite.
    pub fn value(&self, z: &DVector<f64>) -> f64 {
        let r = self.residual(z);
        finite_or_inf(lp_norm_slice(r.as_slice(), self.p).unwrap_or(f64::INFINITY))
    }

    /// `sum_i (r_i^2 + eps^2)^{p/2}`, the objective the local methods descend.
    pub fn smoothed_of(&self, r: &DVector<f64>) -> f64 {
        let e2 = SMOOTHING_EPS * SMOOTHING_EPS;
        let half = self.p / 2.0;
        finite_or_inf(r.iter().map(|v| (v * v + e2).powf(half)).sum())
    }

    /// Central-difference Jacobian of the residual in the support coordinates.
    pub fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let h = 1e-6 * (1.0 + z.norm());
        let n = self.b.len();
        let mut jac = DMatrix::zeros(n, z.len());
        let mut zp = z.clone();
        for c in 0..z.len() {
            zp[c] = z[c] + h;
            let fp = self.op.evaluate(&self.embed(&zp)).into_vector();
            zp[c] = z[c] - h;
            let fm = self.op.evaluate(&self.embed(&zp)).into_vector();
            zp[c] = z[c];
            jac.set_column(c, &((fp - fm) / (2.0 * h)));
        }
        jac
    }

    /// Per-residual IRLS weights `p (r^2 + eps^2)^{p/2 - 1}`; the gradient of the
    /// smoothed objective is `J^T W r`.
    fn weights(&self, r: &DVector<f64>) -> DVector<f64> {
        let e2 = SMOOTHING_EPS * SMOOTHING_EPS;
        r.map(|v| self.p * (v * v + e2).powf(self.p / 2.0 - 1.0))
    }
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub z: DVector<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// A local descent method started from a given point.
pub trait LocalMethod: Send + Sync {
    fn minimize(&self, obj: &RestrictedObjective, z0: DVector<f64>, max_iters: usize, step_tol: f64) -> LocalResult;
}

/// Levenberg–Marquardt on iteratively reweighted least squares. For `p = 2`
/// the weights are constant and this is plain damped Gauss–Newton.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussNewton;

impl LocalMethod for GaussNewton {
    fn minimize(&self, obj: &RestrictedObjective, z0: DVector<f64>, max_iters: usize, step_tol: f64) -> LocalResult {
        let mut z = z0;
        let mut r = obj.residual(&z);
        let mut phi = obj.smoothed_of(&r);
        let mut lambda = 1e-3;
        let k = z.len();
        if k == 0 || !phi.is_finite() {
            return LocalResult { z, converged: k == 0, iterations: 0 };
        }
        for it in 1..=max_iters {
            let jac = obj.jacobian(&z);
            let w = obj.weights(&r);
            let wmax = w.max().max(f64::MIN_POSITIVE);
            let w = w / wmax;
            let jw = DMatrix::from_fn(jac.nrows(), k, |i, c| jac[(i, c)] * w[i]);
            let h = jw.tr_mul(&jac);
            let g = jw.tr_mul(&r);
            if g.norm() == 0.0 {
                return LocalResult { z, converged: true, iterations: it };
            }
            let mut accepted = false;
            while lambda < 1e16 {
                let mut a = h.clone();
                for c in 0..k {
                    a[(c, c)] += lambda * (h[(c, c)] + 1e-12 * (1.0 + h.diagonal().max()));
                }
                let step = match a.cholesky() {
                    Some(ch) => -ch.solve(&g),
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                };
                let trial = &z + &step;
                let rt = obj.residual(&trial);
                let phit = obj.smoothed_of(&rt);
                if phit < phi {
                    let small = step.norm() <= step_tol * (1.0 + z.norm());
                    let stalled = phi - phit <= 1e-15 * phi;
                    z = trial;
                    r = rt;
                    phi = phit;
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    if small || stalled {
                        return LocalResult { z, converged: true, iterations: it };
                    }
                    break;
                }
                if step.norm() <= step_tol * (1.0 + z.norm()) {
                    // no decrease even for a negligible step: stationary
                    return LocalResult { z, converged: true, iterations: it };
                }
                lambda *= 4.0;
            }
            if !accepted {
                return LocalResult { z, converged: true, iterations: it };
            }
        }
        LocalResult { z, converged: false, iterations: max_iters }
    }
}

/// Steepest descent on the smoothed objective with an Armijo backtracking
/// line search.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradientDescent;

impl LocalMethod for GradientDescent {
    fn minimize(&self, obj: &RestrictedObjective, z0: DVector<f64>, max_iters: usize, step_tol: f64) -> LocalResult {
        let mut z = z0;
        let mut r = obj.residual(&z);
        let mut phi = obj.smoothed_of(&r);
        let mut t = 1.0;
        if z.is_empty() || !phi.is_finite() {
            return LocalResult { z: z.clone(), converged: z.is_empty(), iterations: 0 };
        }
        for it in 1..=max_iters {
            let g = obj.jacobian(&z).tr_mul(&obj.weights(&r).component_mul(&r));
            let gn2 = g.norm_squared();
            if gn2 == 0.0 {
                return LocalResult { z, converged: true, iterations: it };
            }
            t *= 2.0;
            loop {
                let step = &g * (-t);
                let trial = &z + &step;
                let rt = obj.residual(&trial);
                let phit = obj.smoothed_of(&rt);
                if phit <= phi - 1e-4 * t * gn2 {
                    z = trial;
                    r = rt;
                    phi = phit;
                    break;
                }
                t *= 0.5;
                if t * gn2.sqrt() <= step_tol * (1.0 + z.norm()) {
                    return LocalResult { z, converged: true, iterations: it };
                }
            }
            if t * gn2.sqrt() <= step_tol * (1.0 + z.norm()) {
                return LocalResult { z, converged: true, iterations: it };
            }
        }
        LocalResult { z, converged: false, iterations: max_iters }
    }
}

/// Name-keyed local methods.
pub struct LocalMethodRegistry {
    methods: BTreeMap<String, Box<dyn LocalMethod>>,
}

impl LocalMethodRegistry {
    pub fn empty() -> Self {
        Self { methods: BTreeMap::new() }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("gauss_newton", GaussNewton);
        r.register("gradient_descent", GradientDescent);
        r
    }

    pub fn register(&mut self, name: &str, method: impl LocalMethod + 'static) {
        self.methods.insert(name.to_string(), Box::new(method));
    }

    pub fn get(&self, name: &str) -> Result<&dyn LocalMethod> {
        self.methods.get(name).map(|m| m.as_ref()).ok_or_else(|| Error::UnknownStrategy {
            registry: "local method",
            name: name.to_string(),
            known: self.methods.keys().cloned().collect::<Vec<_>>().join(", "),
        })
    }
}

impl Default for LocalMethodRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}
