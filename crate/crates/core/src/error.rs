use thiserror::Error;

use crate::qrt::QrtRunRecord;

pub type Result<T> = std::result::Result<T, Error>;

/// Where in the end-to-end pipeline a failure happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePhase {
    Calibration,
    Solve,
    Extraction,
}

impl std::fmt::Display for SolvePhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolvePhase::Calibration => write!(f, "beta calibration"),
            SolvePhase::Solve => write!(f, "solve"),
            SolvePhase::Extraction => write!(f, "solution extraction"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("{routine} did not converge after {iterations} sweeps")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("sparsity {s} is too small; need s >= 2")]
    InvalidSparsity { s: usize },

    #[error("matrix is rank deficient: smallest singular value {sigma_min:e}")]
    RankDeficient { sigma_min: f64 },

    #[error("solution decomposition is degenerate: |d1| = {d1:e}")]
    DegenerateDecomposition { d1: f64 },

    #[error("block-encoding normalization violated: ||B/alpha|| = {norm}")]
    Normalization { norm: f64 },

    #[error("QSP product needs an even number of phases, got {degree}")]
    Parity { degree: usize },

    #[error("filter half-degree exceeds cap {cap} (delta = {delta:e}, epsilon = {epsilon:e})")]
    DegreeOverflow {
        cap: usize,
        delta: f64,
        epsilon: f64,
    },

    #[error("phase-factor solve stalled with residual {residual:e} after {iterations} iterations")]
    PhaseSolve { residual: f64, iterations: usize },

    #[error("probe did not decay within {} rounds", record.rounds)]
    NoDecay { record: Box<QrtRunRecord> },

    #[error("d1 estimation failed: no last-component outcome in {shots} shots")]
    Estimation { shots: usize },

    #[error("post-selection starved: acceptance rate {rate:e} below {floor}")]
    PostSelectionStarvation { rate: f64, floor: f64 },

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("{phase} failed: {source}")]
    Phase {
        phase: SolvePhase,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_phase(self, phase: SolvePhase) -> Error {
        match self {
            e @ Error::Phase { .. } => e,
            e => Error::Phase {
                phase,
                source: Box::new(e),
            },
        }
    }
}
