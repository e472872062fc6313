//! Error types shared across the library.

use thiserror::Error;

/// Failure modes of model construction, solvers, and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An input is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model description is structurally invalid (labels, dimensions, ordering).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A closed form hit a vanishing denominator or an otherwise degenerate model.
    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    /// The restricted stationary problem has more than one zero mode, so no
    /// unique state can be returned.
    #[error("stationary state is not unique: restricted kernel dimension is {dim}")]
    AmbiguousKernel { dim: usize },

    /// A documented modeling assumption does not hold for the given inputs.
    #[error("assumption violated: {0}")]
    Assumption(String),

    /// The requested time step violates the integrator stability guard.
    #[error("time step too large: dt * rate scale = {product:.3e} exceeds {limit}")]
    TimeStepTooLarge { product: f64, limit: f64 },

    /// Trajectory quality monitors tripped; a smaller dt usually fixes this.
    #[error("integration quality failure: {0} (retry with a smaller dt)")]
    IntegrationQuality(String),

    /// The relaxation-rate fit could not be performed on the given trace.
    #[error("relaxation fit failed: {0}")]
    FitFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
