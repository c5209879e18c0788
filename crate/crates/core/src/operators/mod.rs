//! Quasi-linear measurement operators `A(x) = F(x) x`.
//!
//! Every ensemble implements [`QuasiLinearOperator`] and is constructed from an
//! [`EnsembleSpec`] through a builder registered by name in an
//! [`OperatorRegistry`]. The default registry knows:
//!
//! | kind                     | model                                             |
//! |--------------------------|---------------------------------------------------|
//! | `gaussian_matrix`        | linear `A x` with i.i.d. normal entries            |
//! | `lipschitz_perturbed`    | `A1 x + eps f(||x - x0||) A2 x`                   |
//! | `rank1_phase`            | `|<a_i, x>|^2`                                    |
//! | `rankm_projector_phase`  | `(d/m) ||P_{V_i} x||^2`                           |
//! | `nearly_isometric`       | `n^{-1/2} (tr(A_i^T x x^T))_i`                     |
//! | `asteroseismology`       | windowed, limb-darkened light-curve model          |

mod astero;
mod isometric;
mod linear;
mod perturbed;
mod phase;
mod registry;

pub use astero::{AsteroParams, Asteroseismology, WindowPartition};
pub use isometric::NearlyIsometric;
pub use linear::{make_gaussian, GaussianNormalization, LinearOperator};
pub use perturbed::{InverseQuadratic, LipschitzPerturbed, PerturbationProfile};
pub use phase::{Rank1Phase, RankMProjectorPhase, VectorDistribution};
pub use registry::{EnsembleBuilder, EnsembleSpec, OperatorRegistry, PerturbationMatrix};

pub use crate::linalg::{spectral_norm, SpectralNorm};

use crate::linalg::Matrix;
use crate::scalar::{Field, Scalar};
use crate::signal::Signal;
use std::fmt::Debug;
use std::sync::Arc;

/// A measurement map of the form `A(x) = F(x) x`.
///
/// `evaluate` and `factor` panic if `x` does not have length `d`; the solver
/// entry points validate dimensions before calling them.
pub trait QuasiLinearOperator<T: Scalar = f64>: Send + Sync + Debug {
    /// Registry name of the ensemble that produced this operator.
    fn kind(&self) -> &'static str;

    /// `(n, d)`: number of measurements and signal length.
    fn dims(&self) -> (usize, usize);

    fn field(&self) -> Field {
        T::FIELD
    }

    fn evaluate(&self, x: &Signal<T>) -> Signal<T>;

    /// Whether [`factor`](Self::factor) returns the matrix `F(x)`.
    fn supports_factor(&self) -> bool {
        true
    }

    /// `F(x)`, or `None` when the operator does not expose it.
    fn factor(&self, x: &Signal<T>) -> Option<Matrix<T>>;

    /// The constant matrix when `F` does not depend on `x`.
    fn linear_matrix(&self) -> Option<&Matrix<T>> {
        None
    }
}

pub type SharedOperator = Arc<dyn QuasiLinearOperator<f64>>;

/// Checks `A(x)` against `F(x) x`; returns `||A(x) - F(x) x||` or `None` if the
/// operator has no factor.
pub fn factor_consistency<T: Scalar>(op: &dyn QuasiLinearOperator<T>, x: &Signal<T>) -> Option<f64> {
    let f = op.factor(x)?;
    let fx = f.apply(x).ok()?;
    op.evaluate(x).distance(&fx).ok()
}
