use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state range [{lo}, {hi}] must contain 0")]
    RangeExcludesZero { lo: f64, hi: f64 },

    #[error("invalid state range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("state {value} outside certified range [{lo}, {hi}]")]
    RangeViolation { value: f64, lo: f64, hi: f64 },

    #[error("flux derivative is not finite at u = {at}")]
    DerivativeFailure { at: f64 },

    #[error("lipschitz constant {given} too small: sampled slope {observed} on the state range")]
    LipschitzTooSmall { given: f64, observed: f64 },

    #[error("direction {0:?} is not a unit vector")]
    NonUnitDirection(Vec<f64>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("filter scale must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("filter support {support} exceeds half the domain ({half})")]
    SupportTooLarge { support: f64, half: f64 },

    #[error("filter has unbounded value at the origin")]
    UnboundedFilter,

    #[error("radial cells reach {reach}, short of the filter support {support}")]
    Truncation { reach: f64, support: f64 },

    #[error("direction measure violates the second-moment normalisation by {0:e}")]
    Normalization(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("time step {dt} exceeds the stability bound {bound}")]
    StepBound { dt: f64, bound: f64 },

    #[error("non-finite value at cell {cell} (t = {t})")]
    NonFinite { cell: usize, t: f64 },

    #[error("solution left the invariant region at t = {t}: {value} not in [{lo}, {hi}]")]
    BlowUp { t: f64, value: f64, lo: f64, hi: f64 },

    #[error("entropy is not convex: second derivative {value} at u = {at}")]
    NonConvexEntropy { at: f64, value: f64 },

    #[error("Riemann data ({u_l}, {u_r}) is not admissible for a {kind}")]
    Inadmissible { kind: &'static str, u_l: f64, u_r: f64 },

    #[error("waves of the periodic Riemann problem interact before t = {0}")]
    WaveInteraction(f64),

    #[error("flux is not monotone non-decreasing on the state range (f⁻ reaches {0:e})")]
    NotMonotone(f64),

    #[error("invalid argument: {0}")]
    Invalid(String),
}
