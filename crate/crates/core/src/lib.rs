//! Sparse recovery from quasi-linear measurements `b = F(x) x + e`.
//!
//! The crate is organised around the [`operators::QuasiLinearOperator`] trait.
//! Solvers ([`greedy`], [`thresholding`]) and the restricted-isometry probes
//! ([`ripprobe`]) work against that trait, and every interchangeable piece
//! (ensembles, subproblem solvers, local methods) is looked up by name in a
//! registry so experiments can select it from configuration.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distance;
pub mod error;
pub mod greedy;
pub mod linalg;
pub mod operators;
pub mod ripprobe;
pub mod rng;
pub mod scalar;
pub mod signal;
pub mod sparsity;
pub mod thresholding;

pub use distance::{hs_outer_distance, phase_aligned_distance};
pub use error::{Error, Result};
pub use linalg::{spectral_norm, Matrix, SpectralNorm};
pub use operators::{EnsembleSpec, OperatorRegistry, QuasiLinearOperator, SharedOperator};
pub use rng::{derive_seed, SeededRng};
pub use scalar::{Field, Scalar};
pub use signal::{lp_norm, Signal};
pub use sparsity::{best_k_approx, in_decay_class, rearrange, DecayClassParams, Rearrangement};
