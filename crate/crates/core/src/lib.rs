//! Zero counting for `P(z, j(z))` and `P(z, ℘(z))` on fundamental domains
//! by winding numbers, together with numerical checks of the identities,
//! Pfaffian chains and zero bounds that the counts are compared against.

pub mod analytic;
pub mod config;
pub mod contour;
pub mod domains;
pub mod error;
pub mod pfaffian;
pub mod poly;
pub mod special;

pub use analytic::{Analytic, Sample};
pub use error::{Error, Result};
pub use poly::BivariatePolynomial;
