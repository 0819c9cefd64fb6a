use thiserror::Error;

use crate::domain::Mode;

/// Failures reported by the toolkit.
///
/// Solver non-convergence is not an error: it is carried on
/// [`SolveReport`](crate::nonlinear::SolveReport) together with the last iterate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {point:?} lies outside the closed domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("truncation order {order} exceeds grid resolution {resolution}")]
    Truncation { order: usize, resolution: usize },

    #[error("shifts are complex: beta^2 + 4 alpha = {discriminant}")]
    ComplexRoots { discriminant: f64 },

    #[error("shift mu = {mu} is not below the first Dirichlet eigenvalue {lambda1}")]
    ShiftTooLarge { mu: f64, lambda1: f64 },

    #[error("constant {name} is degenerate ({value}); truncation too coarse or shift inadmissible")]
    ConstantDegenerate { name: &'static str, value: f64 },

    #[error("near resonance at mode {mode}: operator symbol {symbol:e}")]
    NearResonance { mode: Mode, symbol: f64 },

    #[error("configuration mismatch: {0}")]
    Mismatch(String),

    #[error("nonlinearity returned {value} < 0 at (u1, u2) = ({u1}, {u2})")]
    NonlinearityContract { value: f64, u1: f64, u2: f64 },

    #[error("singular Jacobian at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("discrete operator is singular: min pivot {min_pivot:e}, max pivot {max_pivot:e}")]
    DiscreteResonance { min_pivot: f64, max_pivot: f64 },

    #[error("parameters are not admissible: {0}")]
    Inadmissible(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
