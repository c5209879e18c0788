//! Scalar fields the library works over.

use nalgebra::ComplexField;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;

/// Which field a signal or operator lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    Complex,
}

/// A 64-bit real or complex scalar.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Debug + PartialEq + Send + Sync {
    const FIELD: Field;

    /// Draws a standard normal scalar. Complex draws have unit total variance.
    fn standard_normal(rng: &mut crate::rng::SeededRng) -> Self;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn standard_normal(rng: &mut crate::rng::SeededRng) -> Self {
        rng.gaussian()
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    fn standard_normal(rng: &mut crate::rng::SeededRng) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let re = rng.gaussian();
        let im = rng.gaussian();
        Complex64::new(re * s, im * s)
    }
}
