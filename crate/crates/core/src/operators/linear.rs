use super::QuasiLinearOperator;
use crate::linalg::Matrix;
use crate::rng::SeededRng;
use crate::signal::Signal;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianNormalization {
    #[default]
    None,
    /// Scale by `1/sqrt(n)` so that `E||Ax||^2 = ||x||^2`.
    BySqrtN,
}

/// `n × d` matrix of i.i.d. standard normals, drawn row by row from the seeded stream.
pub fn make_gaussian(n: usize, d: usize, seed: u64, normalize: GaussianNormalization) -> Matrix {
    assert!(n >= 1 && d >= 1, "gaussian ensemble needs n, d >= 1");
    let mut rng = SeededRng::new(seed);
    let scale = match normalize {
        GaussianNormalization::None => 1.0,
        GaussianNormalization::BySqrtN => 1.0 / (n as f64).sqrt(),
    };
    let entries: Vec<f64> = (0..n * d).map(|_| rng.gaussian() * scale).collect();
    Matrix::from_dmatrix_unchecked(DMatrix::from_row_slice(n, d, &entries))
}

/// Plain linear measurements `A(x) = M x`; `F(x) = M` for all `x`.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    matrix: Matrix,
}

impl LinearOperator {
    pub fn new(matrix: Matrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

impl QuasiLinearOperator for LinearOperator {
    fn kind(&self) -> &'static str {
        "gaussian_matrix"
    }

    fn dims(&self) -> (usize, usize) {
        self.matrix.dims()
    }

    fn evaluate(&self, x: &Signal) -> Signal {
        self.matrix.apply(x).expect("signal length matches operator")
    }

    fn factor(&self, _x: &Signal) -> Option<Matrix> {
        Some(self.matrix.clone())
    }

    fn linear_matrix(&self) -> Option<&Matrix> {
        Some(&self.matrix)
    }
}
