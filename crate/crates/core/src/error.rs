//! Crate-wide error type.

/// Errors produced by model construction, the eigensolver, quadrature and
/// the simulator.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Off-diagonal product `sup[n]*sub[n]` was not positive; the similarity
    /// transform to symmetric form is undefined.
    #[error("degenerate off-diagonal at row {row}: sup*sub = {product}")]
    DegenerateOffDiagonal { row: usize, product: f64 },

    /// Inverse iteration did not converge; usually indicates a bad shift.
    #[error("inverse iteration failed to converge for shift {shift} after {iterations} iterations")]
    EigenvectorNonConvergence { shift: f64, iterations: usize },

    /// Adaptive quadrature could not reach the requested tolerance. Carries
    /// the best estimate and the achieved error bound.
    #[error("quadrature tolerance not met: estimate {estimate}, achieved error {achieved}")]
    QuadratureTolerance { estimate: f64, achieved: f64 },

    /// An asymptotic formula was evaluated outside its traffic-intensity
    /// regime.
    #[error("regime error: {operation} requires {required}, got rho = {rho}")]
    Regime {
        operation: &'static str,
        required: &'static str,
        rho: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    /// The critical-regime V-scale expansion is an outer solution; it is not
    /// evaluated inside the exclusion zone around the turning point `V = A`.
    #[error("V = {v} is inside the turning-point exclusion zone around A = {a}; use the U-scale form there")]
    TurningPoint { v: f64, a: f64 },

    #[error("insufficient tail data: {found} samples exceed t_min = {t_min}, need at least {required}")]
    InsufficientTailData {
        found: usize,
        required: usize,
        t_min: f64,
    },

    #[error("ODE step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
