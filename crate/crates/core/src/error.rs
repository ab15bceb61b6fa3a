use thiserror::Error;

/// Errors produced by framekit operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max |m[i][j] - m[j][i]| = {max_asymmetry:e})")]
    Asymmetric { max_asymmetry: f64 },

    #[error("family is not linearly independent (rank {rank} < size {size})")]
    NotLinearlyIndependent { rank: usize, size: usize },

    #[error("family is not a frame for the space: {deficient} deficient dimension(s)")]
    NotAFrame { deficient: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("exhaustive search limited to {limit} vectors, family has {size}; use sampled mode")]
    SizeLimit { size: usize, limit: usize },

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("wrong structure: {0}")]
    WrongStructure(String),

    #[error("infeasible construction spec: {reason}{}", min_dim.map(|d| format!(" (needs dim >= {d})")).unwrap_or_default())]
    InfeasibleSpec {
        reason: String,
        min_dim: Option<usize>,
    },

    #[error("vectors not contained in the required subspace (worst residual {worst_residual:e})")]
    NotOrthogonal { worst_residual: f64 },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

impl FrameError {
    /// True for failures caused by the numbers rather than the shape of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FrameError::NotLinearlyIndependent { .. }
                | FrameError::NotAFrame { .. }
                | FrameError::Degenerate(_)
                | FrameError::NoConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, FrameError>;
