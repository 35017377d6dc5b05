use thiserror::Error;

/// Errors surfaced by measure construction, integration and the stochastic engines.
#[derive(Debug, Error)]
pub enum Error {
    /// An integral diverges: an atom at 0 met a singular weight, or a density
    /// piece is not integrable against the requested weight on the interval.
    #[error("non-integrable: {0}")]
    NonIntegrable(String),

    /// Arguments outside the operation's domain (e.g. k < 2 in a merger rate).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid measure specification (bad parameters, overlapping atoms, ...).
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// Two partitions of different ground sets were combined.
    #[error("partition size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    /// Block indices passed to a merge were out of range or not distinct.
    #[error("bad block indices: {0}")]
    BadIndices(String),

    /// The source partition of a restriction is not finer than the target.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Dominance of one measure by another could not be certified syntactically.
    #[error("not dominated: {0}")]
    NotDominated(String),

    /// A path was absorbed before reaching a single block; tmrca-dependent
    /// statistics are undefined.
    #[error("incomplete path: absorbed at {blocks} blocks")]
    IncompletePath { blocks: usize },

    /// Total merger rate is zero where a positive rate is required.
    #[error("degenerate rate: g_{0} = 0")]
    DegenerateRate(usize),

    /// A normalizer (mu^(n)) is zero where a positive value is required.
    #[error("degenerate: {0}")]
    Degenerate(String),

    /// Statistical test invoked on an empty sample.
    #[error("empty sample")]
    EmptySample,

    /// Serialization failure for measure or partition JSON.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
