use alloc::string::String;

/// Errors raised by the chain, state, rank and oracle computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),

    #[error("sector r={r} is outside 0..={max} for N={n}")]
    InvalidSector { n: usize, r: usize, max: usize },

    #[error("no transition above sector r={r} for N={n} (last sector is {last})")]
    NoTransition { n: usize, r: usize, last: usize },

    #[error("B={field} coincides with the critical field between sectors {lower} and {upper}")]
    Degenerate { lower: usize, upper: usize, field: f64 },

    #[error("invalid site subset for N={n}: {reason}")]
    InvalidSubset { n: usize, reason: &'static str },

    #[error("{what}: {requested} exceeds cap {cap}")]
    Capacity { what: &'static str, requested: u128, cap: u128 },

    #[error("invalid bipartition M={m} for N={n} (need 1 <= M < N)")]
    InvalidBipartition { n: usize, m: usize },

    #[error("bipartition mismatch: ({n_a}, {m_a}) vs ({n_b}, {m_b})")]
    BipartitionMismatch { n_a: usize, m_a: usize, n_b: usize, m_b: usize },

    #[error("invalid block l={l} for r={r} across M={m}|{rest}")]
    InvalidBlock { r: usize, l: usize, m: usize, rest: usize },

    #[error("relative tolerance {0} must lie in (0, 1)")]
    InvalidTolerance(f64),

    #[error("recurrence check needs at least 3 rows, got M={0}")]
    TooFewRows(usize),

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} restarts")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("basis mismatch: state (N={n_state}, r={r_state}) vs block (N={n_block}, r={r_block})")]
    BasisMismatch { n_state: usize, r_state: usize, n_block: usize, r_block: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
