//! Klein's j-invariant on `Im τ ≥ ½`, its derivative, and the inverse of
//! `t ↦ j(it)` through a ratio of hypergeometric functions.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::{Analytic, Sample};
use crate::error::{Error, Result};
use crate::special::hyp::{hyp2f1_with, Hyp2F1Options};
use crate::special::qseries::{delta_series, eisenstein_q_series, eisenstein_r_series, j_series};

/// Smallest `Im τ` accepted by [`klein_j`].
pub const MIN_IM_TAU: f64 = 0.5;

const SERIES_REL_TOL: f64 = 1e-16;

/// A value with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounded {
    pub value: Complex64,
    pub error_bound: f64,
}

/// `q = e^{2πiτ}`.
pub fn nome(tau: Complex64) -> Complex64 {
    (Complex64::new(0.0, TAU) * tau).exp()
}

fn check_tau(tau: Complex64) -> Result<()> {
    if !(tau.im >= MIN_IM_TAU) || !tau.re.is_finite() {
        return Err(Error::OutOfRange(format!(
            "Im tau = {} below {MIN_IM_TAU}",
            tau.im
        )));
    }
    Ok(())
}

/// Series values with an absolute tail bound plus a rounding allowance.
fn series_at(s: &crate::special::qseries::QSeries, q: Complex64) -> Result<(Complex64, f64)> {
    let v = s.eval(q, SERIES_REL_TOL)?;
    Ok((
        v.value,
        v.tail_bound + 4.0 * f64::EPSILON * v.value.norm().max(1e-300),
    ))
}

/// `Q(q) = 1 + 240Σσ₃(n)qⁿ`, `|q| ≤ 0.95`.
pub fn eisenstein_q(q: Complex64) -> Result<Complex64> {
    check_q(q)?;
    Ok(eisenstein_q_series().eval(q, 1e-15)?.value)
}

/// `R(q) = 1 − 504Σσ₅(n)qⁿ`, `|q| ≤ 0.95`.
pub fn eisenstein_r(q: Complex64) -> Result<Complex64> {
    check_q(q)?;
    Ok(eisenstein_r_series().eval(q, 1e-15)?.value)
}

/// `Δ(q)`, summed from its own integer coefficients rather than as
/// `(Q³ − R²)/1728`, which cancels catastrophically for small `q`.
pub fn delta(q: Complex64) -> Result<Complex64> {
    check_q(q)?;
    Ok(delta_series().eval(q, 1e-15)?.value)
}

fn check_q(q: Complex64) -> Result<()> {
    if !(q.norm() <= 0.95) {
        return Err(Error::OutOfRange(format!("|q| = {} above 0.95", q.norm())));
    }
    Ok(())
}

/// `j(τ) = 1728·Q³/(Q³ − R²) = Q³/Δ` with an error bound.
pub fn klein_j_bounded(tau: Complex64) -> Result<Bounded> {
    check_tau(tau)?;
    let q = nome(tau);
    let (qv, qe) = series_at(eisenstein_q_series(), q)?;
    let (dv, de) = series_at(delta_series(), q)?;
    if dv.norm() <= 2.0 * de {
        return Err(Error::SingularDenominator(format!(
            "|Δ| = {:e} at tau = {tau}",
            dv.norm()
        )));
    }
    let cube = qv * qv * qv;
    let j = cube / dv;
    let cube_err = 3.0 * (qv.norm() + qe).powi(2) * qe + 4.0 * f64::EPSILON * cube.norm();
    let error_bound = (cube_err + j.norm() * de) / (dv.norm() - de) + 2.0 * f64::EPSILON * j.norm();
    Ok(Bounded {
        value: j,
        error_bound,
    })
}

pub fn klein_j(tau: Complex64) -> Result<Complex64> {
    Ok(klein_j_bounded(tau)?.value)
}

/// `dj/dτ = 2πi·q·dj/dq`, term-wise from the j expansion.
pub fn klein_j_derivative_bounded(tau: Complex64) -> Result<Bounded> {
    check_tau(tau)?;
    let q = nome(tau);
    let v = j_series().eval_q_derivative(q, SERIES_REL_TOL)?;
    let factor = Complex64::new(0.0, TAU);
    Ok(Bounded {
        value: factor * v.value,
        error_bound: TAU * (v.tail_bound + 8.0 * f64::EPSILON * v.value.norm()),
    })
}

pub fn klein_j_derivative(tau: Complex64) -> Result<Complex64> {
    Ok(klein_j_derivative_bounded(tau)?.value)
}

/// Handle for `j` as an analytic function of `τ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct KleinJ;

impl Analytic for KleinJ {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        klein_j(z)
    }
    fn deriv(&self, z: Complex64) -> Result<Complex64> {
        klein_j_derivative(z)
    }
    fn sample(&self, z: Complex64) -> Result<Sample> {
        let b = klein_j_bounded(z)?;
        Ok(Sample {
            value: b.value,
            scale: b.value.norm().max(1728.0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JInverseMethod {
    Hypergeometric,
    /// Fixed-point inversion of the cusp expansion; used past the
    /// hypergeometric threshold where `½ + ½√(1 − 1728/x)` approaches 1.
    CuspAsymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JInverse {
    pub value: f64,
    pub method: JInverseMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JInverseOptions {
    pub hyp: Hyp2F1Options,
    /// Above this `x` the cusp expansion is used instead of `₂F₁`.
    pub asymptotic_threshold: f64,
}

impl Default for JInverseOptions {
    fn default() -> Self {
        Self {
            hyp: Hyp2F1Options {
                delta: 1e-4,
                rel_tol: 1e-15,
                ..Hyp2F1Options::default()
            },
            asymptotic_threshold: 1e6,
        }
    }
}

const SEXTIC_A: f64 = 1.0 / 6.0;
const SEXTIC_B: f64 = 5.0 / 6.0;

/// `₂F₁(1/6, 5/6; 1; x)` for real `x`.
pub fn sextic_f(x: f64, opts: &Hyp2F1Options) -> Result<f64> {
    Ok(
        hyp2f1_with(SEXTIC_A, SEXTIC_B, 1.0, Complex64::new(x, 0.0), opts)?
            .value
            .re,
    )
}

/// Inverse of `t ↦ j(it)` on `x ≥ 1728`:
/// `F(½ + ½√(1 − 1728/x)) / F(½ − ½√(1 − 1728/x))` with `F = ₂F₁(1/6, 5/6; 1; ·)`.
pub fn j_inverse_with(x: f64, opts: &JInverseOptions) -> Result<JInverse> {
    if !(x >= 1728.0) {
        return Err(Error::Domain(format!("j_inverse needs x >= 1728, got {x}")));
    }
    if x == 1728.0 {
        return Ok(JInverse {
            value: 1.0,
            method: JInverseMethod::Hypergeometric,
        });
    }
    if x > opts.asymptotic_threshold {
        return Ok(JInverse {
            value: j_inverse_cusp(x)?,
            method: JInverseMethod::CuspAsymptotic,
        });
    }
    let y = (1.0 - 1728.0 / x).sqrt();
    Ok(JInverse {
        value: hypergeometric_ratio(y, &opts.hyp)?,
        method: JInverseMethod::Hypergeometric,
    })
}

pub fn j_inverse(x: f64) -> Result<JInverse> {
    j_inverse_with(x, &JInverseOptions::default())
}

/// `F(½ + y/2) / F(½ − y/2)`.
pub fn hypergeometric_ratio(y: f64, opts: &Hyp2F1Options) -> Result<f64> {
    Ok(sextic_f(0.5 + 0.5 * y, opts)? / sextic_f(0.5 - 0.5 * y, opts)?)
}

/// Solves `x = q⁻¹ + 744 + Σ c(n)qⁿ` for real `q` by fixed-point
/// iteration, then `t = −ln q / 2π`.
fn j_inverse_cusp(x: f64) -> Result<f64> {
    let js = j_series();
    let mut q = 1.0 / (x - 744.0);
    for _ in 0..100 {
        let rest: f64 = js.coefficients[2..]
            .iter()
            .enumerate()
            .map(|(k, c)| c * q.powi(k as i32 + 1))
            .take_while(|t| t.is_finite())
            .sum();
        let next = 1.0 / (x - 744.0 - rest);
        if (next - q).abs() <= 1e-16 * q {
            q = next;
            break;
        }
        q = next;
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::NonConvergence(format!("cusp inversion at x = {x}")));
    }
    Ok(-q.ln() / TAU)
}

/// `q = exp(−2π·F(1−x)/F(x))` for `x ∈ (0, 1)`.
pub fn ramanujan_nome(x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    let opts = Hyp2F1Options::default();
    Ok((-TAU * sextic_f(1.0 - x, &opts)? / sextic_f(x, &opts)?).exp())
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(x >= 1e-3 && x <= 1.0 - 1e-3) {
        return Err(Error::Domain(format!("x = {x} not in [1e-3, 1 - 1e-3]")));
    }
    Ok(())
}

/// `|x(1−x) − (Q³ − R²)/(4Q³)|` at `q = exp(−2π·F(1−x)/F(x))`.
///
/// `Q³ − R²` is evaluated as `1728·Δ` to avoid cancellation.
pub fn ramanujan_inversion_residual(x: f64) -> Result<f64> {
    let q = Complex64::new(ramanujan_nome(x)?, 0.0);
    let qv = eisenstein_q(q)?;
    let rhs = 1728.0 * delta(q)? / (4.0 * qv * qv * qv);
    Ok((x * (1.0 - x) - rhs).norm())
}

/// `(Q³ − R²)/(4Q³)` evaluated naively from `Q` and `R`; for comparison.
pub fn ramanujan_rhs_direct(q: f64) -> Result<f64> {
    let q = Complex64::new(q, 0.0);
    let qv = eisenstein_q(q)?;
    let rv = eisenstein_r(q)?;
    Ok(((qv * qv * qv - rv * rv) / (4.0 * qv * qv * qv)).re)
}

/// The Δ product `q·∏(1 − qⁿ)²⁴`, an independent route to `Δ`.
pub fn delta_product(q: Complex64) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    let mut qn = q;
    while qn.norm() > 1e-18 {
        prod *= (1.0 - qn).powi(24);
        qn *= q;
    }
    q * prod
}

/// The corner `ρ = −½ + i√3/2` of the fundamental domain, where `j` has a triple zero.
pub fn rho() -> Complex64 {
    Complex64::new(-0.5, 3f64.sqrt() / 2.0)
}
