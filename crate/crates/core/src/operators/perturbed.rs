use super::QuasiLinearOperator;
use crate::error::{ensure_len, invalid, Result};
use crate::linalg::Matrix;
use crate::signal::Signal;
use std::fmt::Debug;
use std::sync::Arc;

/// Scalar profile `f` in `A1 x + eps f(||x - x0||) A2 x`.
pub trait PerturbationProfile: Send + Sync + Debug {
    fn name(&self) -> &'static str;
    fn value(&self, t: f64) -> f64;
    /// Lipschitz constant of `f` on `[0, inf)`.
    fn lipschitz(&self) -> f64;
    /// `sup |f|`.
    fn bound(&self) -> f64;
}

/// `f(t) = 1/(1+t^2)`: bounded by 1 with Lipschitz constant `3 sqrt(3)/8`,
/// attained at `t = 1/sqrt(3)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct InverseQuadratic;

impl PerturbationProfile for InverseQuadratic {
    fn name(&self) -> &'static str {
        "inverse_quadratic"
    }

    fn value(&self, t: f64) -> f64 {
        1.0 / (1.0 + t * t)
    }

    fn lipschitz(&self) -> f64 {
        3.0 * 3f64.sqrt() / 8.0
    }

    fn bound(&self) -> f64 {
        1.0
    }
}

/// `A(x) = A1 x + eps f(||x - x0||) A2 x`, so `F(x) = A1 + eps f(||x - x0||) A2`.
#[derive(Debug, Clone)]
pub struct LipschitzPerturbed {
    a1: Matrix,
    a2: Matrix,
    epsilon: f64,
    x0: Signal,
    profile: Arc<dyn PerturbationProfile>,
}

impl LipschitzPerturbed {
    pub fn new(
        a1: Matrix,
        a2: Matrix,
        epsilon: f64,
        x0: Signal,
        profile: Arc<dyn PerturbationProfile>,
    ) -> Result<Self> {
        ensure_len("perturbation matrix rows", a1.nrows(), a2.nrows())?;
        ensure_len("perturbation matrix columns", a1.ncols(), a2.ncols())?;
        ensure_len("anchor x0 length", a1.ncols(), x0.len())?;
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(invalid(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        Ok(Self { a1, a2, epsilon, x0, profile })
    }

    pub fn a1(&self) -> &Matrix {
        &self.a1
    }

    pub fn a2(&self) -> &Matrix {
        &self.a2
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn x0(&self) -> &Signal {
        &self.x0
    }

    pub fn profile(&self) -> &dyn PerturbationProfile {
        self.profile.as_ref()
    }

    /// `eps f(||x - x0||)`.
    pub fn weight(&self, x: &Signal) -> f64 {
        let t = x.distance(&self.x0).expect("signal length matches operator");
        self.epsilon * self.profile.value(t)
    }

    /// Rescales `A1` and `A2` by the same factor `1/s`.
    pub fn rescaled(&self, s: f64) -> Self {
        Self {
            a1: self.a1.scaled(1.0 / s),
            a2: self.a2.scaled(1.0 / s),
            ..self.clone()
        }
    }
}

impl QuasiLinearOperator for LipschitzPerturbed {
    fn kind(&self) -> &'static str {
        "lipschitz_perturbed"
    }

    fn dims(&self) -> (usize, usize) {
        self.a1.dims()
    }

    fn evaluate(&self, x: &Signal) -> Signal {
        let base = self.a1.apply(x).expect("signal length matches operator");
        if self.epsilon == 0.0 {
            return base;
        }
        let w = self.weight(x);
        let pert = self.a2.apply(x).expect("signal length matches operator");
        base.add(&pert.scaled(w)).expect("equal lengths")
    }

    fn factor(&self, x: &Signal) -> Option<Matrix> {
        let w = self.weight(x);
        let mut m = self.a1.as_dmatrix().clone();
        m.zip_apply(self.a2.as_dmatrix(), |a, b| *a += b * w);
        Some(Matrix::from_dmatrix_unchecked(m))
    }
}
