use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected n={expected}, found n={found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension n={0}")]
    InvalidDimension(usize),

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("cannot differentiate {0} without a positivity certificate")]
    Uncertified(&'static str),

    #[error("expression is not rational: {0}")]
    NotRational(&'static str),

    #[error("index {index} out of range for dimension n={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("inadmissible bubble parameters: Im(lambda)={im_lambda} must exceed |mu|^2/4={bound}")]
    Inadmissible { im_lambda: f64, bound: f64 },

    #[error("PDE gate rejected the input: relative residual {residual:e} exceeds {tolerance:e}")]
    GateRejected { residual: f64, tolerance: f64 },

    #[error("amplitude ratio is not constant across probes (spread {spread:e})")]
    NonConstantRatio { spread: f64 },

    #[error("superharmonicity violated: Laplacian {value:e} > 0 at a sample point")]
    NotSuperharmonic { value: f64 },

    #[error("jets have different base points or shapes")]
    JetMismatch,

    #[error("finite-difference evaluator failed: {0}")]
    Evaluator(String),

    #[error("unknown series '{0}'")]
    UnknownSeries(String),

    #[error("config error: {0}")]
    Config(String),
}
