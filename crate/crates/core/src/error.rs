use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid format: {0}")]
    InvalidFormat(String),

    /// A size guard tripped. `report` is a human-readable sizing summary.
    #[error("{what}: {required} exceeds cap {cap}{}", if report.is_empty() { String::new() } else { format!(" ({report})") })]
    CapExceeded {
        what: &'static str,
        required: u128,
        cap: u128,
        report: String,
    },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("point is the zero tensor")]
    ZeroPoint,

    #[error("rational reconstruction failed ({0}); add primes")]
    Reconstruction(String),

    #[error("prime exhaustion: {0}")]
    PrimeExhaustion(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("no invariant in candidate space at degree {degree} ({candidates} candidates, {samples} samples)")]
    NoInvariant {
        degree: usize,
        candidates: usize,
        samples: usize,
    },

    #[error("kernel dimension {kernel_dim} > 1: insufficient samples or reducible candidate space ({candidates} candidates, {samples} samples)")]
    AmbiguousKernel {
        kernel_dim: usize,
        candidates: usize,
        samples: usize,
    },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("candidate basis is empty: {0}")]
    EmptyCandidates(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
