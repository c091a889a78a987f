//! A numerical laboratory for the full mixed bi-parameter dyadic
//! paraproduct.
//!
//! The crate computes, on exact truncated dyadic grids over `[0,1)²`:
//!
//! - the conditional and unconditional operator norms of the paraproduct
//!   form induced by a finitely supported coefficient sequence
//!   ([`norms::x_norm`], [`norms::xprime_norm`]);
//! - the pointwise matrix-multiplier norm that dominates the conditional
//!   norm ([`norms::mlambda_norm`]);
//! - rectangular, product, and one-parameter (mixed) BMO norms
//!   ([`bmo`]);
//! - the isometric lift of finite matrices into space-independent
//!   sequences ([`sequences::lift_matrix`]) together with an exact
//!   scale-block norm engine for such sequences
//!   ([`norms::x_norm_space_independent`]);
//! - reproducible desk-scale experiments that exhibit the separations
//!   between these conditions ([`experiments`]).
//!
//! Grid geometry is exact integer arithmetic on (scale, position) pairs;
//! truncation at any depth resolving the sequence support computes the
//! norms exactly rather than approximately. The analytic code is generic
//! over the floating-point scalar through [`scalar::Scalar`]; the `f64`
//! instantiations used by the experiments are re-exported as type aliases
//! at the crate root.

pub mod bmo;
pub mod config;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod forms;
pub mod norms;
pub mod scalar;
pub mod sequences;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` coefficient sequence, the default for experiments and the CLI.
pub type Sequence64 = sequences::CoefficientSequence<f64>;
/// `f64` dense matrix.
pub type Matrix64 = sequences::DenseMatrix<f64>;
/// `f64` double-Haar expansion.
pub type Expansion64 = forms::HaarExpansion2D<f64>;
/// `f64` one-parameter function family.
pub type Family64 = forms::FunctionFamily<f64>;
/// `f64` truncated form operator.
pub type Operator64 = forms::TruncatedFormOperator<f64>;
/// `f64` 2D step function.
pub type Step64 = bmo::Step2D<f64>;
