use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {value:e}, error {error:e})")]
    NonConvergence {
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("integrand returned a non-finite value at x = {x:e}")]
    NonFinite { x: f64 },

    #[error("integral diverges: tail blocks grew over {blocks} consecutive doublings starting near t = {start:e}")]
    Divergent { blocks: usize, start: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sigma = {sigma} is not below the threshold sigma_alpha = {sigma_alpha}")]
    Threshold { sigma: f64, sigma_alpha: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("optimization failed: {0}")]
    OptFailure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
