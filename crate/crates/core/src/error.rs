use thiserror::Error;

/// Every failure the laboratory can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension cap exceeded: {qubits} qubits requested, cap is {cap}")]
    DimensionCapExceeded { qubits: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown register group `{0}`")]
    UnknownGroup(String),

    #[error("duplicate register group `{0}`")]
    DuplicateGroup(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("post-selection branch has probability {0:e}")]
    ZeroProbabilityBranch(f64),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("witness is not valid for the instance: {0}")]
    InvalidWitness(String),

    #[error("no witness exists for instance {0}")]
    NoWitnessExists(String),

    #[error("malformed distribution: {0}")]
    MalformedDistribution(String),

    #[error("exact enumeration infeasible: {0}")]
    EnumerationInfeasible(String),

    #[error("odd message count {0}; pad the protocol first")]
    OddMessageCount(usize),

    #[error("wrong message count: expected {expected}, got {got}")]
    WrongMessageCount { expected: usize, got: usize },

    #[error("even repetition count {0}; majority needs an odd count")]
    EvenRepetitions(usize),

    #[error("unsupported protocol shape: {0}")]
    Unsupported(String),

    #[error("sampling exhausted after {attempts} attempts; failing rows {rows:?}")]
    SamplingExhausted { attempts: usize, rows: Vec<usize> },

    #[error("advice does not match the relation: {0}")]
    AdviceRelationMismatch(String),

    #[error("misconfigured: {0}")]
    Misconfigured(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("stage `{stage}` is infeasible after completing {completed:?}: {source}")]
    InfeasibleStage {
        stage: String,
        completed: Vec<String>,
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
