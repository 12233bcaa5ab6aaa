use thiserror::Error;

pub type Result<T> = std::result::Result<T, PsrError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PsrError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular transform")]
    SingularTransform,

    #[error("not in standard form: coefficient of {monomial} is {value}, expected {expected}")]
    NotStandardForm {
        monomial: String,
        value: f64,
        expected: f64,
    },

    #[error("point is not hyperbolic: {0}")]
    NotHyperbolic(String),

    #[error("h(p) = {0} is not positive")]
    NonPositiveValue(f64),

    #[error("h(p) = {0}, expected 1")]
    NotOnLevelSet(f64),

    #[error("∂_x h vanishes at the base point ({0:e})")]
    DegenerateChart(f64),

    #[error("|a| = {0} exceeds 2/(3√3), no closed horizon")]
    NoClosedHorizon(f64),

    #[error("input is not closed (sphere maximum {0})")]
    NotClosed(f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("extrapolation unstable: error estimate {estimate:e}")]
    ExtrapolationUnstable { estimate: f64, per_coefficient: Vec<f64> },

    #[error("no catalog match: {0}")]
    NoCatalogMatch(String),

    #[error("metric did not converge: {0}")]
    NotConverged(String),

    #[error("point lies outside the domain: h(1,y) = {0}")]
    OutsideDomain(f64),

    #[error("invalid F matrices: {0}")]
    InvalidF(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown name: {0}")]
    UnknownName(String),
}

impl PsrError {
    /// Stable machine-readable kind used by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            PsrError::DimensionMismatch { .. } => "DimensionMismatch",
            PsrError::SingularTransform => "SingularTransform",
            PsrError::NotStandardForm { .. } => "NotStandardForm",
            PsrError::NotHyperbolic(_) => "NotHyperbolic",
            PsrError::NonPositiveValue(_) => "NonPositiveValue",
            PsrError::NotOnLevelSet(_) => "NotOnLevelSet",
            PsrError::DegenerateChart(_) => "DegenerateChart",
            PsrError::NoClosedHorizon(_) => "NoClosedHorizon",
            PsrError::NotClosed(_) => "NotClosed",
            PsrError::OutOfRange(_) => "OutOfRange",
            PsrError::ExtrapolationUnstable { .. } => "ExtrapolationUnstable",
            PsrError::NoCatalogMatch(_) => "NoCatalogMatch",
            PsrError::NotConverged(_) => "NotConverged",
            PsrError::OutsideDomain(_) => "OutsideDomain",
            PsrError::InvalidF(_) => "InvalidF",
            PsrError::Parse(_) => "ParseError",
            PsrError::Schema(_) => "SchemaError",
            PsrError::UnknownName(_) => "UnknownName",
        }
    }
}
