use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("region `{0}` appears on both operands of a tensor product")]
    LabelCollision(String),

    #[error("region `{0}` is not present on the operator")]
    LabelNotFound(String),

    #[error("region label `{0}` is listed twice")]
    DuplicateLabel(String),

    #[error("region `{label}` has dimension {left} on one operand and {right} on the other")]
    DimensionMismatch {
        label: String,
        left: usize,
        right: usize,
    },

    #[error("matrix is {rows}x{cols} but its regions span dimension {expected}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("region `{0}` must have positive dimension")]
    ZeroDimension(String),

    #[error("operator is not Hermitian (max |M - M^dag| = {0:.3e})")]
    NotHermitian(f64),

    #[error("operator has eigenvalue {value:.3e} below the negativity cutoff {cutoff:.3e}")]
    NegativeEigenvalue { value: f64, cutoff: f64 },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("not a density operator: {0}")]
    InvalidState(String),

    #[error("not a valid conditional state: {0}")]
    InvalidConditional(String),

    #[error("not a valid POVM: {0}")]
    InvalidPovm(String),

    #[error("not a valid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("not a valid channel: {0}")]
    InvalidChannel(String),

    #[error("not a valid instrument: {0}")]
    InvalidInstrument(String),

    #[error("not a valid classical table: {0}")]
    InvalidClassical(String),

    #[error("operator is not an isometry (max |U^dag U - I| = {0:.3e})")]
    NotIsometry(f64),

    #[error("flavor mismatch: {0}")]
    Flavor(String),

    #[error("index {index} out of range for region `{label}` of dimension {dim}")]
    IndexOutOfRange {
        label: String,
        index: usize,
        dim: usize,
    },

    #[error("outcome {0} has zero probability")]
    ZeroProbability(usize),

    #[error("numerical domain error: {0}")]
    Domain(String),
}

impl Error {
    /// True for failures caused by the numbers (negative spectra, singular
    /// inverses, zero probabilities) rather than by malformed objects.
    pub fn is_numerical_domain(&self) -> bool {
        matches!(
            self,
            Error::NegativeEigenvalue { .. }
                | Error::NotHermitian(_)
                | Error::ZeroProbability(_)
                | Error::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
