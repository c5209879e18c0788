use super::QuasiLinearOperator;
use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::rng::SeededRng;
use crate::scalar::Scalar;
use crate::signal::Signal;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorDistribution {
    #[default]
    Gaussian,
    UnitSphere,
}

/// Phase-retrieval measurements `b_i = |<a_i, x>|^2` with `A_i = a_i a_i*`.
#[derive(Debug, Clone)]
pub struct Rank1Phase<T: Scalar = f64> {
    /// Row `i` holds `conj(a_i)`, so that `(conj_rows x)_i = <a_i, x>`.
    conj_rows: DMatrix<T>,
}

impl<T: Scalar> Rank1Phase<T> {
    pub fn random(n: usize, d: usize, seed: u64, dist: VectorDistribution) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("rank-1 phase ensemble needs n, d >= 1"));
        }
        let mut rng = SeededRng::new(seed);
        let mut rows = DMatrix::<T>::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                rows[(i, j)] = T::standard_normal(&mut rng);
            }
            if dist == VectorDistribution::UnitSphere {
                let norm = rows.row(i).norm();
                rows.row_mut(i).unscale_mut(norm);
            }
        }
        Ok(Self::from_rows(rows))
    }

    /// Builds the operator from measurement vectors given as the rows of `vectors`.
    pub fn from_vectors(vectors: Matrix<T>) -> Self {
        Self::from_rows(vectors.into_dmatrix())
    }

    fn from_rows(rows: DMatrix<T>) -> Self {
        Self { conj_rows: rows.conjugate() }
    }

    /// The measurement vector `a_i`.
    pub fn vector(&self, i: usize) -> DVector<T> {
        self.conj_rows.row(i).transpose().conjugate()
    }

    fn correlations(&self, x: &Signal<T>) -> DVector<T> {
        &self.conj_rows * x.as_vector()
    }
}

impl<T: Scalar> QuasiLinearOperator<T> for Rank1Phase<T> {
    fn kind(&self) -> &'static str {
        "rank1_phase"
    }

    fn dims(&self) -> (usize, usize) {
        self.conj_rows.shape()
    }

    fn evaluate(&self, x: &Signal<T>) -> Signal<T> {
        assert_eq!(x.len(), self.conj_rows.ncols(), "signal length matches operator");
        let c = self.correlations(x);
        Signal::from_vector_unchecked(c.map(|v| T::from_real(v.modulus_squared())))
    }

    /// Row `i` is `x* A_i = conj(<a_i, x>) a_i*`.
    fn factor(&self, x: &Signal<T>) -> Option<Matrix<T>> {
        let c = self.correlations(x);
        let mut f = self.conj_rows.clone();
        for (i, ci) in c.iter().enumerate() {
            let cc = ci.conjugate();
            for v in f.row_mut(i).iter_mut() {
                *v *= cc;
            }
        }
        Some(Matrix::from_dmatrix_unchecked(f))
    }
}

/// `b_i = (d/m) ||P_{V_i} x||^2` for Haar-random `m`-dimensional subspaces `V_i`.
#[derive(Debug, Clone)]
pub struct RankMProjectorPhase {
    d: usize,
    m: usize,
    /// Orthonormal `d × m` bases of the subspaces.
    bases: Vec<DMatrix<f64>>,
}

impl RankMProjectorPhase {
    pub fn random(n: usize, d: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("projector ensemble needs n, d >= 1"));
        }
        if m == 0 || m > d {
            return Err(invalid(format!("projector rank m must satisfy 1 <= m <= d = {d}, got {m}")));
        }
        let mut rng = SeededRng::new(seed);
        let bases = (0..n)
            .map(|_| {
                let g = DMatrix::from_fn(d, m, |_, _| rng.gaussian());
                g.qr().q()
            })
            .collect();
        Ok(Self { d, m, bases })
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    /// Dense `P_{V_i}`.
    pub fn projector(&self, i: usize) -> Matrix {
        let q = &self.bases[i];
        Matrix::from_dmatrix_unchecked(q * q.transpose())
    }

    fn scale(&self) -> f64 {
        self.d as f64 / self.m as f64
    }
}

impl QuasiLinearOperator for RankMProjectorPhase {
    fn kind(&self) -> &'static str {
        "rankm_projector_phase"
    }

    fn dims(&self) -> (usize, usize) {
        (self.bases.len(), self.d)
    }

    fn evaluate(&self, x: &Signal) -> Signal {
        assert_eq!(x.len(), self.d, "signal length matches operator");
        let s = self.scale();
        let b = self
            .bases
            .iter()
            .map(|q| s * q.tr_mul(x.as_vector()).norm_squared())
            .collect::<Vec<_>>();
        Signal::from_vector_unchecked(DVector::from_vec(b))
    }

    fn factor(&self, x: &Signal) -> Option<Matrix> {
        let s = self.scale();
        let mut f = DMatrix::zeros(self.bases.len(), self.d);
        for (i, q) in self.bases.iter().enumerate() {
            let px = q * q.tr_mul(x.as_vector());
            f.row_mut(i).copy_from(&(px.transpose() * s));
        }
        Some(Matrix::from_dmatrix_unchecked(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn basis_vector_example() {
        let op = Rank1Phase::<f64>::from_vectors(Matrix::identity(1, 3));
        assert_eq!(op.evaluate(&Signal::basis(3, 0)).get(0), 1.0);
    }

    #[test]
    fn matches_scalar_summation_and_is_even() {
        let op = Rank1Phase::<f64>::random(9, 6, 11, VectorDistribution::Gaussian).unwrap();
        let mut rng = SeededRng::new(12);
        for _ in 0..200 {
            let x = Signal::new(rng.gaussian_vec(6)).unwrap();
            let b = op.evaluate(&x);
            for i in 0..9 {
                let a = op.vector(i);
                let s: f64 = (0..6).map(|j| a[j] * x.get(j)).sum();
                assert!((b.get(i) - s * s).abs() <= 1e-12 * (1.0 + s * s));
            }
            assert_eq!(b, op.evaluate(&x.neg()));
            let c = rng.uniform_in(-3.0, 3.0);
            let scaled = op.evaluate(&x.scaled(c));
            assert!((scaled.sub(&b.scaled(c * c)).unwrap()).norm() <= 1e-12 * (1.0 + scaled.norm()));
        }
    }

    #[test]
    fn complex_matches_scalar_summation() {
        let op = Rank1Phase::<Complex64>::random(4, 3, 13, VectorDistribution::Gaussian).unwrap();
        let x = Signal::new(vec![
            Complex64::new(0.5, -1.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(-1.5, 0.25),
        ])
        .unwrap();
        let b = op.evaluate(&x);
        for i in 0..4 {
            let a = op.vector(i);
            let s: Complex64 = (0..3).map(|j| a[j].conj() * x.get(j)).sum();
            assert!((b.get(i).re - s.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_sphere_vectors_have_unit_norm() {
        let op = Rank1Phase::<f64>::random(20, 7, 14, VectorDistribution::UnitSphere).unwrap();
        for i in 0..20 {
            assert!((op.vector(i).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn projectors_are_orthogonal_projections() {
        let op = RankMProjectorPhase::random(6, 7, 3, 15).unwrap();
        for i in 0..6 {
            let p = op.projector(i).into_dmatrix();
            assert!((&p * &p - &p).norm() < 1e-10);
            assert!((p.transpose() - &p).norm() < 1e-10);
            assert!((p.trace() - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn full_rank_projector_measures_squared_norm() {
        let op = RankMProjectorPhase::random(5, 6, 6, 16).unwrap();
        let mut rng = SeededRng::new(17);
        for _ in 0..50 {
            let x = Signal::new(rng.gaussian_vec(6)).unwrap();
            let n2 = x.norm_squared();
            for b in op.evaluate(&x).as_slice() {
                assert!((b - n2).abs() <= 1e-12 * (1.0 + n2));
            }
        }
    }

    #[test]
    fn projector_rank_out_of_range() {
        assert!(RankMProjectorPhase::random(2, 3, 4, 0).is_err());
        assert!(RankMProjectorPhase::random(2, 3, 0, 0).is_err());
    }

    #[test]
    fn projector_measurements_are_isotropic_on_average() {
        // E (d/m) ||P x||^2 = ||x||^2 for a Haar subspace; 10^4 independent draws
        let x = Signal::from_slice(&[0.6, 0.0, -0.8, 0.0, 0.0]).unwrap();
        let op = RankMProjectorPhase::random(10_000, 5, 2, 18).unwrap();
        let b = op.evaluate(&x);
        let n = b.len() as f64;
        let mean = b.as_slice().iter().sum::<f64>() / n;
        let var = b.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 1.0).abs() <= 3.0 * (var / n).sqrt(), "mean {mean}");
    }
}
