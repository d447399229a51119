//! Shared error type for the whole crate.

/// Errors raised by the library.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A word or index tuple was constructed from an empty list.
    #[error("index list must be nonempty")]
    Empty,

    /// Adjacent equal entries in a word of the index semigroup.
    #[error("adjacent entries at positions {position} and {} are both {value}", position + 1)]
    NeighborRepeat { position: usize, value: u32 },

    /// Index count and item count disagree.
    #[error("length mismatch: {indices} indices vs {items} items")]
    LengthMismatch { indices: usize, items: usize },

    /// A matrix does not have the expected square dimension.
    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    ShapeMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    /// The Kraus family fails the contractivity bound.
    #[error("channel not contractive: max eigenvalue of sum V_i^* V_i is {max_eig} > 1 + {tol:e}")]
    NotContractive { max_eig: f64, tol: f64 },

    /// A matrix handed to the positivity check is too far from Hermitian.
    #[error("matrix not Hermitian: asymmetry {asymmetry:e} exceeds {limit:e}")]
    AsymmetryTooLarge { asymmetry: f64, limit: f64 },

    /// The height-reduction factorization needs a family of positive height.
    #[error("maximum height of the generator family is zero")]
    HeightZero,

    /// A generator product left the finite truncation of the dilation model.
    #[error("product of {generator} with basis element {basis} leaves the truncation (max height {max_height}, max length {max_len})")]
    OutOfTruncation {
        generator: String,
        basis: String,
        max_height: u32,
        max_len: usize,
    },

    /// The assembled Gram matrix has negative mass beyond what rounding can explain.
    #[error("Gram clip too large: most negative eigenvalue {min_eig:e} vs maximum {max_eig:e}")]
    GramClipTooLarge { min_eig: f64, max_eig: f64 },

    /// The A-corner block of the Gram form is numerically singular.
    #[error("corner block degenerate: min eigenvalue {min_eig:e}")]
    CornerDegenerate { min_eig: f64 },

    /// An operation that requires a unital channel was given a non-unital one.
    #[error("channel not unital: |phi(I) - I| = {residual:e}")]
    NotUnital { residual: f64 },

    /// Textual input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Truncation or configuration parameters out of range.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
