use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    Hermiticity { deviation: f64 },
    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    Unitarity { deviation: f64 },
    #[error("non-finite value encountered in {context}")]
    Numeric { context: &'static str },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("dimension {required} exceeds the configured cap of {cap}")]
    Capacity { required: usize, cap: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("Hamiltonian has no terms")]
    EmptyHamiltonian,
    #[error("vector is not normalized (norm {norm:.15})")]
    Normalization { norm: f64 },
    #[error("sum of |c_i| is {sum:.15}, exceeds 1")]
    CoefficientBound { sum: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Post-selection amplitude vanished; the output state is undefined.
    #[error("zero-wave outcome{}: success probability {probability:.3e}", segment.map(|s| format!(" in segment {s}")).unwrap_or_default())]
    ZeroWaveOutcome {
        probability: f64,
        segment: Option<usize>,
    },
}

impl SimError {
    /// Short stable identifier, used in report files.
    pub fn code(&self) -> &'static str {
        match self {
            SimError::Hermiticity { .. } => "hermiticity",
            SimError::Unitarity { .. } => "unitarity",
            SimError::Numeric { .. } => "numeric",
            SimError::Dimension(_) => "dimension",
            SimError::Capacity { .. } => "capacity",
            SimError::Parse { .. } => "parse",
            SimError::EmptyHamiltonian => "empty_hamiltonian",
            SimError::Normalization { .. } => "normalization",
            SimError::CoefficientBound { .. } => "coefficient_bound",
            SimError::Parameter(_) => "parameter",
            SimError::ZeroWaveOutcome { .. } => "zero_wave",
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
