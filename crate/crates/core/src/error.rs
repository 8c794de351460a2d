use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("operator is singular on the requested subspace: {0}")]
    RankDeficient(String),

    #[error("Hamiltonian is not Hermitian (max |H - H^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("adiabatic elimination precondition violated: {0}")]
    EliminationCondition(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("outside the adiabatic regime: {0}")]
    Regime(String),

    #[error("Liouvillian has an empty null space (no steady state)")]
    EmptyNullspace,

    #[error("numerical invariant violated in {module}: {detail}")]
    Instability { module: &'static str, detail: String },

    #[error("correlation undefined: steady-state flux is zero")]
    ZeroFlux,

    #[error("efficiency undefined: T_alpha + T_beta = 0")]
    UndefinedEfficiency,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported perturbative order {0} (only 0 and 1 are tabulated)")]
    UnsupportedOrder(u32),
}

impl Error {
    pub(crate) fn instability(module: &'static str, detail: impl Into<String>) -> Self {
        Error::Instability { module, detail: detail.into() }
    }

    /// True for failures of a numerical invariant, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Instability { .. }
                | Error::EmptyNullspace
                | Error::RankDeficient(_)
                | Error::NonFinite
                | Error::ZeroFlux
                | Error::UndefinedEfficiency
                | Error::InsufficientData(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
