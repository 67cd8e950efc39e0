use thiserror::Error;

pub type Result<T, E = RpssError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RpssError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid jitter model: {0}")]
    InvalidJitter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("characteristic-function denominator vanished at omega={omega}")]
    Singular { omega: f64 },

    #[error("residue inversion produced probability {value} at r={residue}")]
    NegativeProbability { residue: usize, value: f64 },

    #[error("series truncation point {needed} exceeds cap {cap}")]
    TruncationCap { needed: u64, cap: u64 },

    #[error("trial guard of {0} exceeded; the engine rng is likely broken")]
    TrialGuard(u64),

    #[error("permutation length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("empty input")]
    Empty,

    #[error("unknown jitter preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
