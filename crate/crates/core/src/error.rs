use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("qubit count {0} unsupported (must be 1..={max})", max = crate::algebra::MAX_QUBITS)]
    UnsupportedQubitCount(usize),
    #[error("majorana index {index} out of range for {n} qubits")]
    MajoranaOutOfRange { index: usize, n: usize },
    #[error("majorana indices must be strictly increasing")]
    UnsortedIndices,
    #[error("rank {rank} out of range for C({total}, {kappa})")]
    RankOutOfRange {
        rank: usize,
        total: usize,
        kappa: usize,
    },
    #[error("subset of size {got} where grade {kappa} was expected")]
    GradeMismatch { got: usize, kappa: usize },
    #[error("module mismatch: expected grade {expected}, got {got}")]
    ModuleMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported module grade {0}")]
    UnsupportedGrade(usize),
    #[error("ansatz needs at least 2 qubits, got {0}")]
    TooFewQubits(usize),
    #[error("dense oracle limited to n <= {max}, got {n}")]
    DenseTooLarge { n: usize, max: usize },
    #[error("density matrix is not normalized (trace {0})")]
    NotNormalized(f64),
    #[error("density matrix is not Hermitian")]
    NotHermitian,
    #[error("ambiguous readout: |<Z_{site}>| = {value:.4} is within the threshold")]
    AmbiguousReadout { site: usize, value: f64 },
    #[error("hamiltonian ground state is degenerate ({0} states)")]
    DegenerateGround(usize),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("graph parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("3-regular graphs need an even vertex count >= 4, got {0}")]
    RegularParity(usize),
    #[error("brute force limited to n <= {max}, got {n}")]
    BruteForceTooLarge { n: usize, max: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
