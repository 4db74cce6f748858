use thiserror::Error;

use crate::expr::ExprError;

/// Errors raised by the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate vector (|y| = {norm:e}); tensor operations need y != 0")]
    DegenerateVector { norm: f64 },

    #[error("not strongly convex at y = {witness:?} (min/max eigenvalue ratio {ratio:e})")]
    NotStronglyConvex { witness: Vec<f64>, ratio: f64 },

    #[error("not positive: F(y) = {value:e} at y = {witness:?}")]
    NotPositive { witness: Vec<f64>, value: f64 },

    #[error("not positively homogeneous: F({lambda}y)/({lambda}F(y)) - 1 = {defect:e} at y = {witness:?}")]
    NotHomogeneous {
        witness: Vec<f64>,
        lambda: f64,
        defect: f64,
    },

    #[error("norm is not Ad(H)-invariant: defect {defect:e} at u = {witness:?}")]
    NotInvariant { witness: Vec<f64>, defect: f64 },

    #[error("algebra construction failed: {0}")]
    Algebra(String),

    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error("navigation domain violated: F(-V) = {value} >= 1")]
    NavigationDomain { value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("vector field is not Killing: relative defect {defect:e}")]
    NotKilling { defect: f64 },

    #[error("point too close to the chart boundary (|x| = {radius}); switch charts")]
    SwitchChart { radius: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("invalid flag: {0}")]
    InvalidFlag(String),

    #[error("orbit did not close within horizon {horizon}")]
    NotClosed { horizon: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("distance search failed: best miss {miss:e}")]
    SearchFailure { miss: f64 },

    #[error("geodesics disagree at time pi (spread {spread:e}); curvature is not constant")]
    NotConstantCurvature { spread: f64 },

    #[error("vector field vanishes at the base point")]
    VanishingField,

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
