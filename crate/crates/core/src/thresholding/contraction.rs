use super::{check_dims, gradient_step, require_factor, soft_threshold_unchecked};
use crate::error::{invalid, Error, Result};
use crate::linalg::{spectral_norm, Matrix};
use crate::operators::QuasiLinearOperator;
use crate::rng::{derive_seed, SeededRng};
use crate::signal::Signal;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Inner tolerance and iteration cap of the frozen-matrix solves.
pub const PROX_TOL: f64 = 1e-10;
pub const PROX_MAX_ITERS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ProximalSolve {
    pub y: Signal,
    pub converged: bool,
    pub iterations: usize,
}

/// `argmin_y ||M y - b||^2 + alpha ||y||_1`.
///
/// The minimizer is first computed by the piecewise-linear homotopy in the
/// regularization weight, then confirmed or refined by classical iterative
/// soft thresholding with step `1/||M||^2` until an iteration moves less than
/// [`PROX_TOL`]. Without a usable homotopy result the iteration starts at zero.
pub fn solve_frozen(m: &Matrix, b: &Signal, alpha: f64) -> Result<ProximalSolve> {
    let d = m.ncols();
    let s = spectral_norm(m).value;
    if s == 0.0 {
        return Ok(ProximalSolve { y: Signal::zeros(d), converged: true, iterations: 0 });
    }
    let l = s * s;
    let mut y = lasso_homotopy(m, b, alpha).unwrap_or_else(|| Signal::zeros(d));
    for it in 1..=PROX_MAX_ITERS {
        let next = soft_threshold_unchecked(&gradient_step(m, b, &y, 1.0 / l), alpha / l);
        let step = next.distance(&y)?;
        y = next;
        if step <= PROX_TOL {
            return Ok(ProximalSolve { y, converged: true, iterations: it });
        }
    }
    Ok(ProximalSolve { y, converged: false, iterations: PROX_MAX_ITERS })
}

/// Follows the active set of `min 1/2 ||M y - b||^2 + lambda ||y||_1` from
/// `lambda = ||M^T b||_inf` down to `alpha / 2`. Returns `None` if a restricted
/// Gram matrix becomes singular or the step count runs out.
fn lasso_homotopy(m: &Matrix, b: &Signal, alpha: f64) -> Option<Signal> {
    let a = m.as_dmatrix();
    let d = a.ncols();
    let target = alpha / 2.0;
    let gram = a.tr_mul(a);
    let mut c = a.tr_mul(b.as_vector());
    let mut lambda = c.amax();
    let mut y = DVector::<f64>::zeros(d);
    if lambda <= target {
        return Some(Signal::zeros(d));
    }
    let mut active: Vec<usize> = vec![c.iamax()];
    for _ in 0..8 * (d + a.nrows()) {
        let k = active.len();
        let signs = DVector::from_iterator(k, active.iter().map(|&i| c[i].signum()));
        let g_aa = DMatrix::from_fn(k, k, |r, q| gram[(active[r], active[q])]);
        let dir_a = g_aa.cholesky()?.solve(&signs);
        let mut dir = DVector::zeros(d);
        for (r, &i) in active.iter().enumerate() {
            dir[i] = dir_a[r];
        }
        let slope = &gram * &dir;
        let mut gamma = lambda - target;
        let mut event: Option<(usize, bool)> = None;
        for j in 0..d {
            if active.contains(&j) {
                let t = -y[j] / dir[j];
                if t > 1e-15 && t < gamma {
                    gamma = t;
                    event = Some((j, false));
                }
            } else {
                for t in [(lambda - c[j]) / (1.0 - slope[j]), (lambda + c[j]) / (1.0 + slope[j])] {
                    if t > 1e-15 && t < gamma {
                        gamma = t;
                        event = Some((j, true));
                    }
                }
            }
        }
        y += &dir * gamma;
        c -= &slope * gamma;
        lambda -= gamma;
        match event {
            None => return Signal::from_vector(y).ok(),
            Some((j, true)) => active.push(j),
            Some((j, false)) => {
                y[j] = 0.0;
                active.retain(|&i| i != j);
                if active.is_empty() {
                    return None;
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionProbe {
    /// Largest `||S(x) - S(y)|| / ||x - y||` over the kept pairs.
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
    /// Pairs dropped because an inner solve hit its cap.
    pub skipped: usize,
}

/// Samples pairs `(x, y)` and measures how much the map
/// `x ↦ argmin_y ||F(x) y - b||^2 + alpha ||y||_1` can expand distances.
///
/// `x` has a Gaussian direction and radius uniform in `[0, 2)`; `y = x + delta`
/// with `||delta||` uniform in `[0.01, 0.5)`.
pub fn probe_contraction(
    op: &dyn QuasiLinearOperator,
    b: &Signal,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<ContractionProbe> {
    if trials == 0 {
        return Err(invalid("contraction probe needs trials >= 1"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("contraction probe needs alpha > 0"));
    }
    let d = op.dims().1;
    check_dims(op, b, &Signal::zeros(d))?;
    let samples: Vec<Result<Option<f64>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = SeededRng::new(derive_seed(seed, &[t as u64]));
            let x = random_direction(&mut rng, d).scaled(rng.uniform_in(0.0, 2.0));
            let delta = random_direction(&mut rng, d).scaled(rng.uniform_in(0.01, 0.5));
            let y = x.add(&delta)?;
            let sx = solve_frozen(&require_factor(op, &x)?, b, alpha)?;
            let sy = solve_frozen(&require_factor(op, &y)?, b, alpha)?;
            if !(sx.converged && sy.converged) {
                return Ok(None);
            }
            Ok(Some(sx.y.distance(&sy.y)? / delta.norm()))
        })
        .collect();
    let mut ratios = Vec::with_capacity(trials);
    let mut skipped = 0;
    for s in samples {
        match s? {
            Some(r) => ratios.push(r),
            None => skipped += 1,
        }
    }
    if ratios.is_empty() {
        return Err(Error::AllSamplesDegenerate(trials));
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ContractionProbe { max_ratio, ratios, skipped })
}

fn random_direction(rng: &mut SeededRng, d: usize) -> Signal {
    loop {
        let v = Signal::from_vector_unchecked(DVector::from_vec(rng.gaussian_vec(d)));
        let n = v.norm();
        if n > 0.0 {
            return v.scaled(1.0 / n);
        }
    }
}
