use super::QuasiLinearOperator;
use crate::error::{ensure_len, invalid, Result};
use crate::linalg::Matrix;
use crate::rng::SeededRng;
use crate::signal::Signal;
use nalgebra::{DMatrix, DVector};

/// `X ↦ n^{-1/2} (tr(A_1^T X), ..., tr(A_n^T X))` with i.i.d. Gaussian `A_i`,
/// evaluated on symmetric matrices of rank at most two given in factored form
/// `X = sum_r w_r v_r v_r^T`.
#[derive(Debug, Clone)]
pub struct NearlyIsometric {
    d: usize,
    mats: Vec<DMatrix<f64>>,
}

impl NearlyIsometric {
    pub fn random(n: usize, d: usize, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("nearly isometric ensemble needs n, d >= 1"));
        }
        let mut rng = SeededRng::new(seed);
        let mats = (0..n)
            .map(|_| {
                let e: Vec<f64> = (0..d * d).map(|_| rng.gaussian()).collect();
                DMatrix::from_row_slice(d, d, &e)
            })
            .collect();
        Ok(Self { d, mats })
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    /// `𝒜(X)` for `X = sum w v v^T` with at most two terms.
    pub fn apply(&self, factors: &[(f64, &Signal)]) -> Result<Signal> {
        if factors.len() > 2 {
            return Err(invalid(format!(
                "factored input has rank {} > 2",
                factors.len()
            )));
        }
        for (_, v) in factors {
            ensure_len("factor vector length", self.d, v.len())?;
        }
        let scale = 1.0 / (self.mats.len() as f64).sqrt();
        let out = self
            .mats
            .iter()
            .map(|a| {
                // tr(A^T v v^T) = v^T A v
                factors
                    .iter()
                    .map(|(w, v)| w * v.as_vector().dot(&(a * v.as_vector())))
                    .sum::<f64>()
                    * scale
            })
            .collect::<Vec<_>>();
        Ok(Signal::from_vector_unchecked(DVector::from_vec(out)))
    }
}

impl QuasiLinearOperator for NearlyIsometric {
    fn kind(&self) -> &'static str {
        "nearly_isometric"
    }

    fn dims(&self) -> (usize, usize) {
        (self.mats.len(), self.d)
    }

    fn evaluate(&self, x: &Signal) -> Signal {
        self.apply(&[(1.0, x)]).expect("signal length matches operator")
    }

    fn supports_factor(&self) -> bool {
        false
    }

    fn factor(&self, _x: &Signal) -> Option<Matrix> {
        None
    }
}
