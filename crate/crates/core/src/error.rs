use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate quadrature direction: mu and nu are both zero")]
    DegenerateDirection,

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("input is not normalized: integral = {measured}")]
    NotNormalized { measured: f64 },

    #[error(
        "unsupported potential of degree {degree}: the reduced evolution equation \
         keeps inverse shift derivatives and is integro-differential"
    )]
    UnsupportedPotential { degree: usize },

    #[error("unsupported evolution equation: {0}")]
    UnsupportedEquation(String),

    #[error("CFL condition violated: number {cfl:.3} exceeds limit {limit}")]
    Cfl { cfl: f64, limit: f64 },

    #[error("aliasing: {0}")]
    Aliasing(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
