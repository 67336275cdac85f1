use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("point {point:?} outside domain box")]
    Domain { point: Vec<f64> },
    #[error("singular locus: {0}")]
    Singular(String),
    #[error("non-finite intermediate value")]
    NonFinite,
    #[error("expression needs {needed} variables, got {got}")]
    Arity { needed: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("degenerate metric or frame: {0}")]
    Degenerate(String),
    #[error("vector is not null (det = {0:e})")]
    NonNull(f64),
    #[error("Weyl spinor below tolerance but noise above it (max |psi| = {0:e})")]
    Indeterminate(f64),
    #[error("missing data: {0}")]
    Missing(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("{0}")]
    Invalid(String),
    #[error("quadrature tolerance unreachable: {0}")]
    Quadrature(String),
    #[error("intersection form is not unimodular (det = {0})")]
    NotUnimodular(i64),
    #[error("unknown name {0:?}")]
    Unknown(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
