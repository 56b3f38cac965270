use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feature {0} has zero norm")]
    ZeroFeature(usize),

    #[error("region is empty (psi = {psi})")]
    EmptyRegion { psi: f64 },

    #[error("halfspace does not cut the sphere (psi = {psi}); the region is the whole sphere")]
    ImproperRegion { psi: f64 },

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("sphere cannot be refined by this halfspace (psi = {psi})")]
    NotRefinable { psi: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("active-set system is inconsistent (residual {residual:e}); the dual point is not optimal")]
    InconsistentSystem { residual: f64 },

    #[error("safety violation: full-dictionary gap {gap:e} exceeds {bound:e} after screening")]
    SafetyViolation { gap: f64, bound: f64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ScreenError>;
