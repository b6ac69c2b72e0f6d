use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The Fock cutoff is too small for the requested state.
    #[error("truncation error: {0}")]
    Truncation(String),
    /// A function was evaluated outside the region where it is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// Mismatched matrix or vector shapes.
    #[error("shape error: {0}")]
    Shape(String),
    /// Invalid model parameters.
    #[error("parameter error: {0}")]
    Param(String),
    /// A numerical routine failed (non-finite values, singular systems).
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A propagation step was rejected (step too long or state left the
    /// physical region).
    #[error("step error: {0}")]
    Step(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
