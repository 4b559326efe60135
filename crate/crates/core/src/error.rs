use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("argument outside the function's domain: {0}")]
    Domain(String),

    #[error("argument out of supported range: {0}")]
    OutOfRange(String),

    #[error("series precision loss: achieved tail bound {achieved:e} after {terms} terms")]
    PrecisionLoss { achieved: f64, terms: usize },

    #[error("evaluation at {z} is {distance:e} from a pole")]
    PoleProximity { z: Complex64, distance: f64 },

    #[error("singular denominator ({0})")]
    SingularDenominator(String),

    #[error("function vanishes on the contour near {z} (|f| = {modulus:e})")]
    ZeroOnContour { z: Complex64, modulus: f64 },

    #[error("adaptive subdivision did not converge: {0}")]
    NonConvergence(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot perturb: composite vanishes at every boundary sample")]
    CannotPerturb,

    #[error("ambiguous near-zero plateau on [{a}, {b}]")]
    Ambiguity { a: f64, b: f64 },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),
}
