//! Special functions: `₂F₁`, Eisenstein series, Klein's `j`, and the
//! Weierstrass `℘` function of a rectangular lattice.

pub mod hyp;
pub mod modular;
pub mod qseries;
pub mod weierstrass;

pub use hyp::{gauss_relation_residuals, hyp2f1, hyp2f1_with, Hyp2F1Options, SeriesValue};
pub use modular::{
    delta, eisenstein_q, eisenstein_r, j_inverse, j_inverse_with, klein_j, klein_j_bounded,
    klein_j_derivative, ramanujan_inversion_residual, JInverse, JInverseMethod, JInverseOptions,
    KleinJ,
};
pub use qseries::QSeries;
pub use weierstrass::{
    wp_eval, wp_invariants, wp_ode_residual, wp_prime, LatticeParams, Weierstrass,
};
