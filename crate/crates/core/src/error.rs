use thiserror::Error;

pub type Result<T> = std::result::Result<T, CondRiskError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CondRiskError {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid probability space: {0}")]
    InvalidSpace(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("non-finite value at index {index} in {context}")]
    NonFinite { context: &'static str, index: usize },

    #[error("invalid atom index {index} (partition has {atoms} atoms)")]
    InvalidAtom { index: usize, atoms: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown divergence generator {name:?}; valid generators are \"kl\", \"chi2\", \"power:<alpha>\" with alpha > 1")]
    UnknownGenerator { name: String },

    #[error("invalid generator {name}: {reason}")]
    InvalidGenerator { name: String, reason: String },

    #[error("invalid conditional density: {0}")]
    InvalidDensity(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("bracket expansion exceeded cap {cap} while {context}")]
    BracketExpansion { context: &'static str, cap: f64 },

    #[error("non-finite generator evaluation in {context} (argument {argument})")]
    NonFiniteEvaluation { context: &'static str, argument: f64 },

    #[error("constraint function is not monotone on atom {atom}")]
    NonMonotone { atom: usize },

    #[error("solver did not converge on atom {atom}: residual {residual:e} above tolerance {tol:e}")]
    NotConverged { atom: usize, residual: f64, tol: f64 },

    #[error("operator is missing required flags: {0}")]
    MissingFlags(String),

    #[error("instance too large for brute force: {0}")]
    TooLarge(String),

    #[error("zero mass for atom {atom} under the supplied measure")]
    ZeroMass { atom: usize },
}
