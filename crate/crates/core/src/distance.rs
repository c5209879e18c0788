//! Distances that are blind to the global sign (real) or phase (complex) of a
//! signal, as needed for phase retrieval.

use crate::error::{ensure_len, Result};
use crate::scalar::{Field, Scalar};
use crate::signal::Signal;

/// `||x x* - y y*||_HS` via the Gram identity
/// `||x||^4 + ||y||^4 - 2 |<x, y>|^2`, without forming d×d matrices.
pub fn hs_outer_distance<T: Scalar>(x: &Signal<T>, y: &Signal<T>) -> Result<f64> {
    ensure_len("outer-product distance operands", x.len(), y.len())?;
    let nx = x.norm_squared();
    let ny = y.norm_squared();
    let ip = x.inner(y)?.modulus_squared();
    Ok((nx * nx + ny * ny - 2.0 * ip).max(0.0).sqrt())
}

/// Distance up to a global sign (real) or unimodular factor (complex):
/// `min_{|c| = 1} ||x - c y||`.
pub fn phase_aligned_distance<T: Scalar>(x: &Signal<T>, y: &Signal<T>) -> Result<f64> {
    ensure_len("phase-aligned distance operands", x.len(), y.len())?;
    match T::FIELD {
        Field::Real => Ok(x.distance(y)?.min(x.add(y)?.norm())),
        Field::Complex => {
            let ip = x.inner(y)?.modulus();
            Ok((x.norm_squared() + y.norm_squared() - 2.0 * ip).max(0.0).sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn sig(v: &[f64]) -> Signal {
        Signal::from_slice(v).unwrap()
    }

    #[test]
    fn hs_examples() {
        let x = sig(&[0.3, -1.2, 2.0]);
        assert_eq!(hs_outer_distance(&x, &x).unwrap(), 0.0);
        let e1 = Signal::<f64>::basis(3, 0);
        let e2 = Signal::<f64>::basis(3, 1);
        assert!((hs_outer_distance(&e1, &e2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(hs_outer_distance(&e1, &Signal::zeros(2)).is_err());
    }

    #[test]
    fn hs_matches_dense_frobenius_oracle() {
        let mut rng = SeededRng::new(21);
        for t in 0..500 {
            let d = 1 + t % 6;
            let x = sig(&rng.gaussian_vec(d));
            let y = sig(&rng.gaussian_vec(d));
            let xv = x.as_vector();
            let yv = y.as_vector();
            let dense: DMatrix<f64> = xv * xv.transpose() - yv * yv.transpose();
            let oracle = dense.norm();
            assert!((hs_outer_distance(&x, &y).unwrap() - oracle).abs() < 1e-12 * (1.0 + oracle));
        }
    }

    #[test]
    fn hs_symmetries() {
        let mut rng = SeededRng::new(22);
        for _ in 0..200 {
            let x = sig(&rng.gaussian_vec(7));
            let y = sig(&rng.gaussian_vec(7));
            let h = hs_outer_distance(&x, &y).unwrap();
            assert!((h - hs_outer_distance(&y, &x).unwrap()).abs() <= 1e-12 * (1.0 + h));
            assert!((h - hs_outer_distance(&x.neg(), &y).unwrap()).abs() <= 1e-12 * (1.0 + h));
        }
    }

    #[test]
    fn phase_aligned_examples() {
        let x = sig(&[1.0, -2.0, 0.5]);
        assert_eq!(phase_aligned_distance(&x, &x.neg()).unwrap(), 0.0);
        let e1 = Signal::<Complex64>::basis(2, 0);
        let ie1 = e1.scaled(Complex64::new(0.0, 1.0));
        assert!(phase_aligned_distance(&e1, &ie1).unwrap() < 1e-15);
    }

    #[test]
    fn complex_phase_distance_matches_phase_grid() {
        let mut rng = SeededRng::new(23);
        for _ in 0..100 {
            let mk = |rng: &mut SeededRng| {
                Signal::new((0..4).map(|_| Complex64::new(rng.gaussian(), rng.gaussian())).collect())
                    .unwrap()
            };
            let x = mk(&mut rng);
            let y = mk(&mut rng);
            let grid = (0..3600)
                .map(|s| {
                    let th = s as f64 * std::f64::consts::TAU / 3600.0;
                    x.distance(&y.scaled(Complex64::from_polar(1.0, th))).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            let d = phase_aligned_distance(&x, &y).unwrap();
            assert!(d <= grid + 1e-12);
            assert!(grid - d < 1e-6 * (1.0 + x.norm() * y.norm()), "grid {grid} vs {d}");
        }
    }

    #[test]
    fn real_phase_distance_is_sign_minimum() {
        let mut rng = SeededRng::new(24);
        for _ in 0..100 {
            let x = sig(&rng.gaussian_vec(5));
            let y = sig(&rng.gaussian_vec(5));
            let grid = [1.0, -1.0]
                .iter()
                .map(|&c| x.distance(&y.scaled(c)).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert_eq!(phase_aligned_distance(&x, &y).unwrap(), grid);
        }
    }
}
