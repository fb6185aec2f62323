use thiserror::Error;

/// Errors produced by sketch construction, queries, generators and I/O.
#[derive(Debug, Error)]
pub enum HskError {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("label must be -1 or 1")]
    BadLabel,

    #[error("point norm {norm} exceeds bound {bound}")]
    NormViolation { norm: f64, bound: f64 },

    #[error("value {value} outside domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("input is not sorted ascending at position {index}")]
    Unsorted { index: usize },

    #[error("sketch is not frozen; call freeze() before querying")]
    NotFrozen,

    #[error("sketch is frozen; no further updates accepted")]
    Frozen,

    #[error("query direction must be nonzero")]
    ZeroDirection,

    #[error("grid has {size} candidates, above the budget of {budget}; increase epsilon or lambda")]
    GridBudget { size: u128, budget: u128 },

    #[error("replicas disagree on parameters: {0}")]
    MixedReplicas(String),

    #[error("parameters outside the instance validity regime: {0}")]
    ValidityRegime(String),

    #[error("did not converge within {iterations} iterations (duality gap {gap:e})")]
    NoConvergence {
        iterations: usize,
        gap: f64,
        best: Vec<f64>,
    },

    #[error("rejection sampling exhausted {attempts} attempts; use a smaller delta")]
    RejectionBudget { attempts: usize },

    #[error("bit string too long: {len} > {max}")]
    TooManyBits { len: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("bad sketch file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HskError>;

/// Broad error class, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad parameters or an infeasible configuration.
    Config,
    /// Bad input data or sketch files.
    Data,
}

impl HskError {
    pub fn class(&self) -> ErrorClass {
        use HskError::*;
        match self {
            InvalidParameter { .. } | GridBudget { .. } | MixedReplicas(_) | ValidityRegime(_) | RejectionBudget { .. }
            | TooManyBits { .. } | Unsupported(_) | NotFrozen | Frozen | ZeroDirection | NoConvergence { .. } => {
                ErrorClass::Config
            }
            EmptyDataset | DimensionMismatch { .. } | BadLabel | NormViolation { .. } | OutOfDomain { .. }
            | Unsorted { .. } | Parse { .. } | Format(_) | Io(_) => ErrorClass::Data,
        }
    }

    /// Short snake-case name of the variant.
    pub fn kind(&self) -> &'static str {
        use HskError::*;
        match self {
            EmptyDataset => "empty_dataset",
            DimensionMismatch { .. } => "dimension_mismatch",
            InvalidParameter { .. } => "invalid_parameter",
            BadLabel => "bad_label",
            NormViolation { .. } => "norm_violation",
            OutOfDomain { .. } => "out_of_domain",
            Unsorted { .. } => "unsorted",
            NotFrozen => "not_frozen",
            Frozen => "frozen",
            ZeroDirection => "zero_direction",
            GridBudget { .. } => "grid_budget",
            MixedReplicas(_) => "mixed_replicas",
            ValidityRegime(_) => "validity_regime",
            NoConvergence { .. } => "no_convergence",
            RejectionBudget { .. } => "rejection_budget",
            TooManyBits { .. } => "too_many_bits",
            Unsupported(_) => "unsupported",
            Parse { .. } => "parse",
            Format(_) => "format",
            Io(_) => "io",
        }
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> HskError {
    HskError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
