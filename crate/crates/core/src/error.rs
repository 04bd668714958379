use thiserror::Error;

/// Errors shared across the simulation modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("unsupported matrix size {dim} (small dense only, dim <= 16)")]
    UnsupportedSize { dim: usize },
    #[error("insufficient samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("degenerate spectrum at t = {t}: gap {gap:.3e}")]
    Degeneracy { t: f64, gap: f64 },
    #[error("level-tracking ambiguity at t = {t} (competing overlaps {best:.3} vs {second:.3}); use a denser grid")]
    TrackingAmbiguity { t: f64, best: f64, second: f64 },
    #[error("frame sequence too discontinuous for derivatives (continuity {continuity:.3e} > {limit:.3e})")]
    UnreliableDerivative { continuity: f64, limit: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("integrator stability refusal: step * max-frequency = {product:.3e} > 0.2")]
    StabilityRefusal { product: f64 },
    #[error("norm drift {drift:.3e} exceeds 1e-6 without renormalization")]
    AccuracyLoss { drift: f64 },
    #[error("adiabatic approximation does not hold: min tracked-level population {min_overlap:.3} < 0.9")]
    NotAdiabatic { min_overlap: f64 },
    #[error("grid undersampled: step {step:.3e} exceeds required {required:.3e}")]
    Undersampled { step: f64, required: f64 },
    #[error("gauge error: {0}")]
    Gauge(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
