use thiserror::Error;

/// Errors produced by projector construction, operator arithmetic and the
/// model generators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("empty span: at least one vector is required")]
    EmptySpan,

    #[error("rank zero: every span vector has norm below {tol:.3e}")]
    RankZero { tol: f64 },

    #[error("matrix not symmetric: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotSymmetric { residual: f64, tol: f64 },

    #[error("generator index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error(
        "power iteration diverged at power {at_power}: norm {norm:.3e} exceeds guard {guard:.3e}"
    )]
    Diverged {
        at_power: u64,
        norm: f64,
        guard: f64,
    },

    #[error("invalid overlap c = {c}: Gram matrix is not positive definite")]
    InvalidOverlap { c: f64 },

    #[error("bad ranks: {reason}")]
    BadRanks { reason: String },

    #[error("empty kernel: every basis state is Pauli forbidden")]
    EmptyKernel,

    #[error("requested {levels} levels but the allowed subspace has dimension {kernel_dim}")]
    LevelCountExceedsKernel { levels: usize, kernel_dim: usize },

    #[error("quadrature failure in {check}: residual {residual:.3e} exceeds {tol:.3e}")]
    QuadratureFailure {
        check: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("invalid parameter: {reason}")]
    InvalidParams { reason: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
