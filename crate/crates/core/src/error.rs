use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("circle set must contain at least one arc or point")]
    EmptySet,

    #[error("invalid arc (start={start}, length={length}): {reason}")]
    InvalidArc { start: f64, length: f64, reason: String },

    #[error("arcs overlap near angle {angle}")]
    OverlappingArcs { angle: f64 },

    #[error("invalid cantor spec at index {index}: {reason}")]
    InvalidCantorSpec { index: u32, reason: String },

    #[error("generation {requested} exceeds safe cap {cap} for this length rule")]
    GenerationTooDeep { requested: u32, cap: u32 },

    #[error("weight profile invalid at t={t}: {reason}")]
    InvalidProfile { t: f64, reason: String },

    #[error("{quantity} is not {expected} at t={t} (value {value})")]
    MonotonicityViolation { quantity: String, expected: String, t: f64, value: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("grid size must be a power of two >= {min}, got {got}")]
    BadGridSize { got: usize, min: usize },

    #[error("boundary modulus vanishes on a sizeable part of the grid ({fraction:.3} clamped)")]
    NotLogIntegrable { fraction: f64 },

    #[error("evaluation point too close to the boundary (|z| = {modulus}); use the boundary trace instead")]
    TooCloseToBoundary { modulus: f64 },

    #[error("no root for eta_delta in (delta, pi]: delta={delta} too large for this psi")]
    EtaOutOfRange { delta: f64 },

    #[error("quadrature budget exceeded: partial value {partial} with error estimate {error}")]
    BudgetExceeded { partial: f64, error: f64 },

    #[error("fusion hypothesis |h*| <= d/pi violated at angle {angle} (|h*|={value}, bound={bound})")]
    FusionHypothesis { angle: f64, value: f64, bound: f64 },

    #[error("descriptor error: {0}")]
    Descriptor(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
