use thiserror::Error;

/// Errors raised by the simulator, the algorithms built on it, and the cost model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is outside the supported range [2, 2^31)")]
    ModulusOutOfRange(u64),
    #[error("division by zero in the coefficient field")]
    DivisionByZero,

    #[error("invalid machine parameters: {0}")]
    InvalidParams(String),
    #[error("thread id {t} out of range for a block of {block_dim} threads")]
    ThreadOutOfRange { t: usize, block_dim: usize },
    #[error("invalid launch configuration for kernel `{kernel}`: {reason}")]
    InvalidLaunch { kernel: String, reason: String },
    #[error(
        "CREW violation in kernel `{kernel}`: {array}[{index}] written by threads {first} and {second}"
    )]
    CrewViolation {
        kernel: String,
        array: String,
        index: usize,
        first: usize,
        second: usize,
    },
    #[error("local memory overflow in kernel `{kernel}` block {block}: {requested} words requested, Z = {capacity}")]
    LocalOverflow {
        kernel: String,
        block: usize,
        requested: usize,
        capacity: usize,
    },
    #[error("out-of-bounds access to {array}[{index}] (length {len}) in kernel `{kernel}` block {block}")]
    OutOfBounds {
        kernel: String,
        array: String,
        index: i64,
        len: usize,
        block: usize,
    },
    #[error("unknown global array id {0}")]
    UnknownArray(usize),

    #[error("program has no kernels")]
    EmptyProgram,
    #[error("kernel DAG contains a cycle")]
    Cycle,
    #[error("kernel id {0} does not exist")]
    UnknownKernel(usize),
    #[error("antichain width is only computable exactly for level-decomposable DAGs")]
    NotLevelDecomposable,
    #[error("missing block metrics for kernel {0}")]
    MissingMetrics(usize),

    #[error("invalid polynomial input: {0}")]
    InvalidInput(String),
    #[error("invalid cost-model input: {0}")]
    InvalidCostInput(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps `self` with a description of what was being simulated.
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
