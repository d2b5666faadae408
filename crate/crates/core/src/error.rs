use thiserror::Error;

/// Errors raised by the matrix kernel, state constructors and protocol stages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is {0} instead of 1")]
    NotNormalized(f64),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("filter blocks the whole state (zero transmitted trace)")]
    FullyBlocked,

    #[error("zero-probability branch: {0}")]
    ZeroProbability(&'static str),

    #[error("filtration expects a stage II outcome, got stage {0}")]
    WrongStage(&'static str),

    #[error("closed form undefined: {0}")]
    Undefined(String),

    #[error("degenerate coupling T = {0}")]
    DegenerateCoupling(f64),

    #[error("zero locus T/(1-T) lies outside [0, 1] for T = {0}")]
    LocusOutOfRange(f64),

    #[error("invalid reference data: {0}")]
    ReferenceData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}
