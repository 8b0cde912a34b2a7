//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Distance matrix rows do not all have the same length as the matrix.
    #[error("distance matrix is not square: row {row} has {got} entries, expected {expected}")]
    NonSquareMatrix {
        row: usize,
        got: usize,
        expected: usize,
    },

    /// Label list and matrix size disagree.
    #[error("label/matrix size mismatch: {labels} labels for a {rows}x{rows} matrix")]
    LabelMismatch { labels: usize, rows: usize },

    /// A matrix entry is NaN, infinite or negative.
    #[error("invalid distance entry {value} at ({i},{j}); entries must be finite and nonnegative")]
    InvalidEntry { i: usize, j: usize, value: f64 },

    /// A scalar or structural argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Vector length does not match the declared dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The space has a triple with vanishing (or insufficient) triangle slack.
    #[error(
        "space is not strongly concave enough: triple ({i},{j},{k}) has slack {slack}, need >= {required}"
    )]
    NotStronglyConcave {
        i: usize,
        j: usize,
        k: usize,
        slack: f64,
        required: f64,
    },

    /// The sup-norm distance identity failed for a pair; names the witnessing coordinate.
    #[error(
        "sup-norm identity violated for pair ({n},{m}) at coordinate {coord}: sup {actual}, expected {expected}"
    )]
    IdentityViolation {
        n: usize,
        m: usize,
        coord: usize,
        actual: f64,
        expected: f64,
    },

    /// An iteration-map coordinate left the cube [0, eta].
    #[error("iteration map left [0,{eta}] at pair ({n},{m}): value {value}")]
    CubeExit {
        n: usize,
        m: usize,
        eta: f64,
        value: f64,
    },

    /// The norm's distortion is too large for the requested cube edge.
    #[error("distortion delta={delta} is not admissible for eta={eta}, diameter={diameter}")]
    NotAdmissible { delta: f64, eta: f64, diameter: f64 },

    /// The norm carries no analytic certificate and no override was given.
    #[error("norm distortion is not certified; set allow_uncertified_norm to proceed")]
    UncertifiedNorm,

    /// A sampled vector broke a norm axiom.
    #[error("norm axiom violated ({axiom}) on sample {vector:?}")]
    NormAxiom { axiom: &'static str, vector: Vec<f64> },

    /// Extraction ran out of candidates before producing the requested indices.
    #[error("extraction shortfall: produced {got} of {requested} indices before exhausting the horizon")]
    Shortfall { requested: usize, got: usize },

    /// A lazily generated distance exceeded the declared uniform bound.
    #[error("distance {value} at ({i},{j}) exceeds the declared bound {bound}")]
    BoundExceeded {
        i: usize,
        j: usize,
        value: f64,
        bound: f64,
    },
}
