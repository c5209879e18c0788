use super::QuasiLinearOperator;
use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::rng::SeededRng;
use crate::signal::Signal;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// `n` raised-cosine windows on `[lo, hi]` forming a partition of unity on the
/// whole real line: neighbouring windows cross-fade as `cos^2`/`sin^2`, and the
/// outermost windows are held at one beyond the covered range.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPartition {
    count: usize,
    lo: f64,
    hi: f64,
}

impl WindowPartition {
    pub fn raised_cosine(count: usize, lo: f64, hi: f64) -> Result<Self> {
        if count == 0 {
            return Err(invalid("window partition needs at least one window"));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(format!("window range [{lo}, {hi}] is empty")));
        }
        Ok(Self { count, lo, hi })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Nonzero `(window, weight)` pairs at `t`; at most two.
    pub fn weights(&self, t: f64) -> [(usize, f64); 2] {
        if self.count == 1 {
            return [(0, 1.0), (0, 0.0)];
        }
        let last = self.count - 1;
        if t <= self.lo {
            return [(0, 1.0), (0, 0.0)];
        }
        if t >= self.hi {
            return [(last, 1.0), (last, 0.0)];
        }
        let h = (self.hi - self.lo) / last as f64;
        let pos = (t - self.lo) / h;
        let l = (pos.floor() as usize).min(last - 1);
        let s = pos - l as f64;
        let c = (FRAC_PI_2 * s).cos();
        [(l, c * c), (l + 1, 1.0 - c * c)]
    }

    /// All `n` window values at `t`.
    pub fn evaluate(&self, t: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.count];
        for (l, v) in self.weights(t) {
            w[l] += v;
        }
        w
    }
}

fn default_limb_coefficient() -> f64 {
    0.6
}

fn default_limb_floor() -> f64 {
    0.2
}

fn default_window_range() -> f64 {
    1.5
}

/// Tunable pieces of the light-curve model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsteroParams {
    /// Phase offset; drawn uniformly from `[0, 2 pi)` with the seed when absent.
    #[serde(default)]
    pub theta: Option<f64>,
    /// Linear limb-darkening law `f_j = 1 - c (1 - cos(pi j / d))`.
    #[serde(default = "default_limb_coefficient")]
    pub limb_coefficient: f64,
    /// Lower clip of the limb-darkening weights.
    #[serde(default = "default_limb_floor")]
    pub limb_floor: f64,
    /// Windows are spread over `[-window_range, window_range]`.
    #[serde(default = "default_window_range")]
    pub window_range: f64,
}

impl Default for AsteroParams {
    fn default() -> Self {
        Self {
            theta: None,
            limb_coefficient: default_limb_coefficient(),
            limb_floor: default_limb_floor(),
            window_range: default_window_range(),
        }
    }
}

/// Pulsating-star light-curve model.
///
/// Coefficient `x[i]` multiplies frequency `i + 1` of the contour
/// `u(phi) = sum_i x_i sin((2 pi phi + theta) i)`, sampled at `phi = j/d`,
/// `j = -d..=d`. Measurement `l` integrates the limb-darkened contour through
/// window `omega_l`:
///
/// `b_l = sqrt(pi)/(2d+1) sum_j omega_l(f_j u_j) f_j u_j`.
#[derive(Debug, Clone)]
pub struct Asteroseismology {
    d: usize,
    theta: f64,
    limb: Vec<f64>,
    windows: WindowPartition,
    /// `sin((2 pi j/d + theta) (i+1))`, row `j + d`, column `i`.
    sines: DMatrix<f64>,
}

impl Asteroseismology {
    pub fn new(n: usize, d: usize, seed: u64, params: &AsteroParams) -> Result<Self> {
        if n == 0 {
            return Err(invalid("asteroseismology model needs at least one window"));
        }
        if d == 0 {
            return Err(invalid("asteroseismology model needs d >= 1"));
        }
        if !(params.limb_floor > 0.0) || params.limb_floor > 1.0 {
            return Err(invalid("limb_floor must lie in (0, 1]"));
        }
        let theta = match params.theta {
            Some(t) if t.is_finite() => t,
            Some(t) => return Err(invalid(format!("theta must be finite, got {t}"))),
            None => SeededRng::new(seed).uniform() * TAU,
        };
        let r = params.window_range;
        let windows = WindowPartition::raised_cosine(n, -r, r)?;
        let df = d as f64;
        let limb = (-(d as i64)..=d as i64)
            .map(|j| {
                let f = 1.0 - params.limb_coefficient * (1.0 - (PI * j as f64 / df).cos());
                f.clamp(params.limb_floor, 1.0)
            })
            .collect();
        let sines = DMatrix::from_fn(2 * d + 1, d, |row, i| {
            let j = row as f64 - df;
            ((TAU * j / df + theta) * (i + 1) as f64).sin()
        });
        Ok(Self { d, theta, limb, windows, sines })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn windows(&self) -> &WindowPartition {
        &self.windows
    }

    /// Limb-darkening weights `f_j`, indexed by `j + d`.
    pub fn limb_weights(&self) -> &[f64] {
        &self.limb
    }

    fn scale(&self) -> f64 {
        PI.sqrt() / (2 * self.d + 1) as f64
    }

    /// `u_j` at every sample, skipping zero coefficients.
    pub fn contour_samples(&self, x: &Signal) -> Vec<f64> {
        assert_eq!(x.len(), self.d, "signal length matches operator");
        let nz: Vec<(usize, f64)> = x.as_slice().iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
        (0..self.sines.nrows())
            .map(|row| nz.iter().map(|&(i, v)| v * self.sines[(row, i)]).sum())
            .collect()
    }

    /// `u(phi)` at arbitrary phases.
    pub fn contour(&self, x: &Signal, phis: &[f64]) -> Vec<f64> {
        phis.iter()
            .map(|&phi| {
                x.as_slice()
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, v)| v * ((TAU * phi + self.theta) * (i + 1) as f64).sin())
                    .sum()
            })
            .collect()
    }
}

impl QuasiLinearOperator for Asteroseismology {
    fn kind(&self) -> &'static str {
        "asteroseismology"
    }

    fn dims(&self) -> (usize, usize) {
        (self.windows.count(), self.d)
    }

    fn evaluate(&self, x: &Signal) -> Signal {
        let u = self.contour_samples(x);
        let mut b = DVector::zeros(self.windows.count());
        for (j, &uj) in u.iter().enumerate() {
            let t = self.limb[j] * uj;
            for (l, w) in self.windows.weights(t) {
                b[l] += w * t;
            }
        }
        Signal::from_vector_unchecked(b * self.scale())
    }

    fn factor(&self, x: &Signal) -> Option<Matrix> {
        let u = self.contour_samples(x);
        // Per-window sample weights omega_l(f_j u_j) f_j, then one product with the sine table.
        let mut w = DMatrix::zeros(self.windows.count(), u.len());
        for (j, &uj) in u.iter().enumerate() {
            let fj = self.limb[j];
            for (l, v) in self.windows.weights(fj * uj) {
                w[(l, j)] += v * fj;
            }
        }
        Some(Matrix::from_dmatrix_unchecked(w * &self.sines * self.scale()))
    }
}
