use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("weight cannot be evaluated at the boundary (d = {d})")]
    BoundaryEvaluation { d: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("empty subdomain: margin 1/{n} is not smaller than the radius {radius}")]
    EmptyDomain { n: usize, radius: f64 },

    #[error("assembly failed at node {node}: {reason}")]
    Assembly { node: usize, reason: String },

    #[error("ordering violated at node {node}: lower {lower} > upper {upper}")]
    Ordering { node: usize, lower: f64, upper: f64 },

    #[error("boundary datum {value} at node {node} lies outside [{lower}, {upper}]")]
    BoundaryData {
        node: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("non-finite value at node {node}")]
    Numeric { node: usize },

    #[error("zero pivot in tridiagonal elimination at row {row}")]
    SingularPivot { row: usize },

    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("activation radius not bracketed in (0, R) for C = {c}")]
    ActivationRadius { c: f64 },

    #[error("fit error: {0}")]
    Fit(String),
}
