//! Dense matrices, spectral-norm estimation and restricted least squares.

use crate::error::{ensure_len, invalid, Result};
use crate::rng::SeededRng;
use crate::scalar::Scalar;
use crate::signal::Signal;
use nalgebra::{DMatrix, DVector};

/// A finite dense `n × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T: Scalar = f64> {
    inner: DMatrix<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(inner: DMatrix<T>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(invalid("matrix must have at least one row and column"));
        }
        if inner.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        Ok(Self { inner })
    }

    pub(crate) fn from_dmatrix_unchecked(inner: DMatrix<T>) -> Self {
        Self { inner }
    }

    pub fn from_fn(n: usize, d: usize, f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, d, f))
    }

    /// Rectangular identity: ones on the main diagonal, zeros elsewhere.
    pub fn identity(n: usize, d: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, d),
        }
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            inner: DMatrix::zeros(n, d),
        }
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<T> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<T> {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.inner[(i, j)]
    }

    /// `M x`.
    pub fn apply(&self, x: &Signal<T>) -> Result<Signal<T>> {
        ensure_len("matrix-vector operand", self.ncols(), x.len())?;
        Ok(Signal::from_vector_unchecked(&self.inner * x.as_vector()))
    }

    /// `M* y`.
    pub fn apply_adjoint(&self, y: &Signal<T>) -> Result<Signal<T>> {
        ensure_len("adjoint matrix-vector operand", self.nrows(), y.len())?;
        Ok(Signal::from_vector_unchecked(self.inner.ad_mul(y.as_vector())))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            inner: &self.inner * c,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        ensure_len("matrix difference rows", self.nrows(), other.nrows())?;
        ensure_len("matrix difference columns", self.ncols(), other.ncols())?;
        Ok(Self {
            inner: &self.inner - &other.inner,
        })
    }

    /// Columns listed in `cols`, in that order.
    pub fn columns(&self, cols: &[usize]) -> DMatrix<T> {
        self.inner.select_columns(cols)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }
}

/// Result of a power-iteration spectral-norm estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralNorm {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

const SPECTRAL_START_SEED: u64 = 0x005E_ED0F_5EC7;
pub const SPECTRAL_MAX_ITERS: usize = 10_000;

/// `||M||_2` by power iteration on `M* M` from a fixed seeded start.
///
/// Stops when the Rayleigh estimate changes by less than `1e-13` relative;
/// at the iteration cap the best estimate is returned with `converged = false`.
pub fn spectral_norm<T: Scalar>(m: &Matrix<T>) -> SpectralNorm {
    spectral_norm_dense(m.as_dmatrix())
}

pub(crate) fn spectral_norm_dense<T: Scalar>(m: &DMatrix<T>) -> SpectralNorm {
    let mut rng = SeededRng::new(SPECTRAL_START_SEED);
    let mut v = DVector::from_fn(m.ncols(), |_, _| T::standard_normal(&mut rng));
    v /= T::from_real(v.norm());
    let mut estimate = 0.0;
    for it in 1..=SPECTRAL_MAX_ITERS {
        let mv = m * &v;
        let sigma = mv.norm();
        if sigma == 0.0 {
            // v is in the kernel; a random restart is only needed if M != 0.
            if m.iter().all(|x| x.is_zero()) {
                return SpectralNorm { value: 0.0, converged: true, iterations: it };
            }
            v = DVector::from_fn(m.ncols(), |_, _| T::standard_normal(&mut rng));
            v /= T::from_real(v.norm());
            continue;
        }
        let w = m.ad_mul(&mv);
        let wn = w.norm();
        let converged = (sigma - estimate).abs() <= 1e-13 * sigma;
        estimate = sigma;
        if converged || wn == 0.0 {
            return SpectralNorm { value: estimate, converged: true, iterations: it };
        }
        v = w / T::from_real(wn);
    }
    SpectralNorm {
        value: estimate,
        converged: false,
        iterations: SPECTRAL_MAX_ITERS,
    }
}

/// Minimum-norm least-squares solution of `a z ≈ b` via SVD; singular values
/// below `1e-12 · sigma_max` are treated as zero.
pub fn least_squares_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return DVector::zeros(a.ncols());
    }
    svd.solve(b, 1e-12 * smax)
        .expect("both singular-vector sets were computed")
}
