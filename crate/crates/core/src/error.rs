//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("observation outside the support of the component family: {0}")]
    Domain(String),

    #[error("covariance matrix is not positive definite")]
    SingularCovariance,

    #[error("components belong to different families or dimensions")]
    FamilyMismatch,

    #[error("operation not supported for this family: {0}")]
    UnsupportedFamily(&'static str),

    #[error("required distribution missing from context model: {0}")]
    MissingDistribution(&'static str),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("observed context value has zero prior probability")]
    ZeroPrior,

    #[error("no root for the KL equation within the bracket expansion limit")]
    NoRoot,

    #[error("component {component} degenerated at iteration {iteration}: total responsibility {weight:.3e}")]
    DegenerateComponent {
        component: usize,
        iteration: usize,
        weight: f64,
    },

    #[error("responsibility row {row} is identically zero")]
    AllZeroRow { row: usize },

    #[error("matrix dimensions do not conform: {0}")]
    DimensionMismatch(String),

    #[error("length mismatch: {what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("operation requires an internal tree node, found a leaf")]
    LeafNode,

    #[error("algorithm {0} requires {1}")]
    MissingLabels(&'static str, &'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
