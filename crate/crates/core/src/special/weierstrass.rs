//! Weierstrass `℘` for the rectangular lattice `⟨1, iτ⟩`, `τ > 0` real.
//!
//! Invariants come from row-by-row lattice summation: each row
//! `{m + inτ : m ∈ ℤ}` is summed in closed form through
//! `Σ_m (m+w)⁻⁴ = π⁴(s² − 2s/3)` and `Σ_m (m+w)⁻⁶ = π⁶(s³ − s² + 2s/15)`,
//! `s = csc²(πw)`, which decays like `e^{−2πnτ}` in the row index.
//!
//! `℘` itself is the Laurent series at the nearest lattice point with
//! coefficients from the standard recursion. Lattices with `τ < 1` are
//! evaluated through `⟨1, iτ⟩ = iτ·⟨1, i/τ⟩`, so the series always runs
//! on a lattice whose shortest vector is 1.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analytic::{Analytic, Sample};
use crate::error::{Error, Result};

pub const TAU_MIN: f64 = 0.1;
pub const TAU_MAX: f64 = 10.0;

/// Distance from a lattice point below which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-8;

/// Reduced arguments with `|z|` above this are evaluated by duplication.
const LAURENT_RADIUS: f64 = 0.75;
const LAURENT_TERMS: usize = 240;
const ROW_SUM_TOL: f64 = 1e-17;

#[derive(Debug, Clone)]
struct Laurent {
    tau: f64,
    g2: f64,
    /// `c_k` multiplying `z^{2k}`, index 0 unused
    coeffs: Vec<f64>,
    /// `|c_k| ≤ majorant·(2k+1)` on the unit-shortest-vector lattice
    majorant: f64,
}

#[derive(Debug, Clone)]
pub struct LatticeParams {
    pub tau: f64,
    pub g2: f64,
    pub g3: f64,
    /// `℘(½)`, `℘(½ + iτ/2)`, `℘(iτ/2)`
    pub half_period_values: [f64; 3],
    /// Imaginary parts of the raw complex row sums for `G₄`, `G₆`.
    pub raw_imag: [f64; 2],
    laurent: Laurent,
}

/// `G₄`, `G₆` of `⟨1, iτ⟩` with the discarded-row bound.
#[derive(Debug, Clone, Copy)]
pub struct EisensteinSums {
    pub g4: Complex64,
    pub g6: Complex64,
    pub tail_bound: f64,
    pub rows: usize,
}

/// Row-wise Eisenstein summation of `G₄`, `G₆` over `⟨1, iτ⟩`.
///
/// The tail after row `N` is bounded by comparing `1/sinh²(πnτ)` with the
/// geometric sequence `4e^{−2πnτ}/(1 − e^{−2πτ})²`.
pub fn eisenstein_lattice_sums(tau: f64, tol: f64) -> EisensteinSums {
    let zeta4 = PI.powi(4) / 90.0;
    let zeta6 = PI.powi(6) / 945.0;
    let mut g4 = Complex64::new(2.0 * zeta4, 0.0);
    let mut g6 = Complex64::new(2.0 * zeta6, 0.0);
    let decay = (-2.0 * PI * tau).exp();
    let mut n = 1usize;
    loop {
        let w = Complex64::new(0.0, n as f64 * tau);
        let sin = (PI * w).sin();
        let s = 1.0 / (sin * sin);
        let row4 = PI.powi(4) * (s * s - s * (2.0 / 3.0));
        let row6 = PI.powi(6) * (s * s * s - s * s + s * (2.0 / 15.0));
        // rows n and −n contribute equally
        g4 += 2.0 * row4;
        g6 += 2.0 * row6;
        let u = 4.0 * decay.powi(n as i32 + 1) / (1.0 - decay).powi(2);
        let tail = 2.0 * PI.powi(6).max(PI.powi(4)) * (u + u * u + u * u * u) / (1.0 - decay);
        if tail < tol * g4.norm().max(1.0) || n > 10_000 {
            return EisensteinSums {
                g4,
                g6,
                tail_bound: tail,
                rows: n,
            };
        }
        n += 1;
    }
}

fn laurent_coefficients(g2: f64, g3: f64, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n + 1];
    c[1] = g2 / 20.0;
    if n >= 2 {
        c[2] = g3 / 28.0;
    }
    for k in 3..=n {
        let conv: f64 = (1..=k - 2).map(|m| c[m] * c[k - 1 - m]).sum();
        c[k] = 3.0 / ((2 * k + 3) as f64 * (k - 2) as f64) * conv;
    }
    c
}

fn build_laurent(tau: f64) -> Laurent {
    let sums = eisenstein_lattice_sums(tau, ROW_SUM_TOL);
    let g2 = 60.0 * sums.g4.re;
    let g3 = 140.0 * sums.g6.re;
    let coeffs = laurent_coefficients(g2, g3, LAURENT_TERMS);
    let majorant = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.abs() / (2 * k + 1) as f64)
        .fold(0.0, f64::max)
        * 1.5;
    Laurent {
        tau,
        g2,
        coeffs,
        majorant,
    }
}

/// `g₂ = 60·G₄`, `g₃ = 140·G₆` for `⟨1, iτ⟩`, plus the half-period values.
pub fn wp_invariants(tau: f64) -> Result<LatticeParams> {
    if !(TAU_MIN..=TAU_MAX).contains(&tau) {
        return Err(Error::OutOfRange(format!(
            "tau = {tau} outside [{TAU_MIN}, {TAU_MAX}]"
        )));
    }
    let sums = eisenstein_lattice_sums(tau, ROW_SUM_TOL);
    let raw_imag = [sums.g4.im, sums.g6.im];
    debug_assert!(raw_imag.iter().all(|v| v.abs() < 1e-12));
    let canonical = if tau >= 1.0 { tau } else { 1.0 / tau };
    let mut params = LatticeParams {
        tau,
        g2: 60.0 * sums.g4.re,
        g3: 140.0 * sums.g6.re,
        half_period_values: [0.0; 3],
        raw_imag,
        laurent: build_laurent(canonical),
    };
    let half = [
        Complex64::new(0.5, 0.0),
        Complex64::new(0.5, 0.5 * tau),
        Complex64::new(0.0, 0.5 * tau),
    ];
    let mut values = [0.0; 3];
    for (slot, z) in values.iter_mut().zip(half) {
        *slot = wp_eval(z, &params)?.re;
    }
    params.half_period_values = values;
    Ok(params)
}

/// `℘`, `℘′` and a bound on the truncation error of each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpValue {
    pub value: Complex64,
    pub derivative: Complex64,
    pub tail_bound: f64,
    pub derivative_tail_bound: f64,
    pub terms: usize,
}

impl LatticeParams {
    /// Nearest lattice point to `z`.
    pub fn nearest_lattice_point(&self, z: Complex64) -> Complex64 {
        Complex64::new(z.re.round(), (z.im / self.tau).round() * self.tau)
    }

    /// Roots of `4t³ − g₂t − g₃` are the half-period values.
    pub fn cubic(&self, t: Complex64) -> Complex64 {
        4.0 * t * t * t - self.g2 * t - self.g3
    }

    pub fn evaluate(&self, z: Complex64, max_terms: Option<usize>) -> Result<WpValue> {
        let nearest = self.nearest_lattice_point(z);
        let d = (z - nearest).norm();
        if d < POLE_GUARD {
            return Err(Error::PoleProximity { z, distance: d });
        }
        let terms = max_terms.unwrap_or(LAURENT_TERMS).min(LAURENT_TERMS);
        if self.tau >= 1.0 {
            canonical_eval(&self.laurent, z, terms)
        } else {
            // ℘(z; λΛ′) = λ⁻²℘(z/λ; Λ′), λ = iτ
            let lambda = Complex64::new(0.0, self.tau);
            let inner = canonical_eval(&self.laurent, z / lambda, terms)?;
            let l2 = lambda * lambda;
            let l3 = l2 * lambda;
            Ok(WpValue {
                value: inner.value / l2,
                derivative: inner.derivative / l3,
                tail_bound: inner.tail_bound / l2.norm(),
                derivative_tail_bound: inner.derivative_tail_bound / l3.norm(),
                terms: inner.terms,
            })
        }
    }
}

fn canonical_eval(lat: &Laurent, z: Complex64, terms: usize) -> Result<WpValue> {
    let m = z.re.round();
    let n = (z.im / lat.tau).round();
    let w = z - Complex64::new(m, n * lat.tau);
    let d = w.norm();
    if d < POLE_GUARD {
        return Err(Error::PoleProximity { z, distance: d });
    }
    if d <= LAURENT_RADIUS {
        return Ok(laurent_sum(lat, w, terms));
    }
    // ℘(2u) from ℘(u), ℘′(u)
    let half = canonical_eval(lat, 0.5 * w, terms)?;
    let (p, dp) = (half.value, half.derivative);
    let a = 6.0 * p * p - 0.5 * lat.g2;
    let value = -2.0 * p + a * a / (4.0 * dp * dp);
    let derivative = -dp + 3.0 * a * p / dp - a * a * a / (4.0 * dp * dp * dp);
    let dv_dp = (-2.0 + 6.0 * a * p / (dp * dp)).norm();
    let dv_ddp = (a * a / (2.0 * dp * dp * dp)).norm();
    let dd_dp = (3.0 * a / dp + 36.0 * p * p / dp - 36.0 * a * a * p / (4.0 * dp * dp * dp)).norm();
    let dd_ddp = (-1.0 - 3.0 * a * p / (dp * dp) + 3.0 * a * a * a / (4.0 * dp.powi(4))).norm();
    Ok(WpValue {
        value,
        derivative,
        tail_bound: dv_dp * half.tail_bound + dv_ddp * half.derivative_tail_bound,
        derivative_tail_bound: dd_dp * half.tail_bound + dd_ddp * half.derivative_tail_bound,
        terms: half.terms,
    })
}

/// `1/w² + Σ c_k w^{2k}` and its derivative, stopping once the majorant
/// `A·Σ_{k>N}(2k+1)|w|^{2k}` drops below double-precision resolution.
fn laurent_sum(lat: &Laurent, w: Complex64, max_terms: usize) -> WpValue {
    let w2 = w * w;
    let r = w2.norm();
    let mut value = 1.0 / w2;
    let mut derivative = -2.0 / (w2 * w);
    let mut power = Complex64::new(1.0, 0.0);
    let mut tail = f64::INFINITY;
    let mut dtail = f64::INFINITY;
    let mut used = 0;
    for k in 1..=max_terms {
        let dpow = power * w;
        power *= w2;
        let c = lat.coeffs[k];
        value += c * power;
        derivative += 2.0 * k as f64 * c * dpow;
        used = k;
        let next = (k + 1) as f64;
        let rho = r * (2.0 * next + 3.0) / (2.0 * next + 1.0);
        if rho < 1.0 {
            let lead = lat.majorant * (2.0 * next + 1.0) * r.powf(next);
            tail = lead / (1.0 - rho);
            let drho = rho * (next + 1.0) / next;
            dtail = if drho < 1.0 {
                2.0 * next * lead / w.norm() / (1.0 - drho)
            } else {
                f64::INFINITY
            };
            if tail <= 1e-17 * value.norm() && dtail <= 1e-17 * derivative.norm() {
                break;
            }
        }
    }
    WpValue {
        value,
        derivative,
        tail_bound: tail,
        derivative_tail_bound: dtail,
        terms: used,
    }
}

/// `℘(z)` on `⟨1, iτ⟩`.
pub fn wp_eval(z: Complex64, params: &LatticeParams) -> Result<Complex64> {
    Ok(params.evaluate(z, None)?.value)
}

/// `℘′(z)` on `⟨1, iτ⟩`.
pub fn wp_prime(z: Complex64, params: &LatticeParams) -> Result<Complex64> {
    Ok(params.evaluate(z, None)?.derivative)
}

/// `|℘′² − (4℘³ − g₂℘ − g₃)|`, relative to `max(1, |℘′|², |4℘³|)`.
pub fn wp_ode_residual(z: Complex64, params: &LatticeParams) -> Result<f64> {
    let v = params.evaluate(z, None)?;
    let lhs = v.derivative * v.derivative;
    let rhs = params.cubic(v.value);
    let scale = 1f64.max(lhs.norm()).max(4.0 * v.value.norm().powi(3));
    Ok((lhs - rhs).norm() / scale)
}

/// Handle for `℘` as an analytic function.
#[derive(Debug, Clone)]
pub struct Weierstrass {
    pub params: LatticeParams,
}

impl Weierstrass {
    pub fn new(tau: f64) -> Result<Self> {
        Ok(Self {
            params: wp_invariants(tau)?,
        })
    }
}

impl Analytic for Weierstrass {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        wp_eval(z, &self.params)
    }
    fn deriv(&self, z: Complex64) -> Result<Complex64> {
        wp_prime(z, &self.params)
    }
    fn sample(&self, z: Complex64) -> Result<Sample> {
        let v = self.params.evaluate(z, None)?;
        Ok(Sample {
            value: v.value,
            scale: v.value.norm().max(1.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_lattice_invariants() {
        // mpmath q-expansion: g₂(τ=1) = 189.07272012923385229306…
        let p = wp_invariants(1.0).unwrap();
        assert!(p.g3.abs() < 1e-10, "g3 = {}", p.g3);
        assert!((p.g2 - 189.072_720_129_233_85).abs() < 1e-9 * p.g2);
        assert!(p.raw_imag.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn laurent_leading_terms() {
        let p = wp_invariants(1.5).unwrap();
        let c = &p.laurent.coeffs;
        assert_eq!(c[1], p.g2 / 20.0);
        assert_eq!(c[2], p.g3 / 28.0);
        assert!((c[3] - p.g2 * p.g2 / 1200.0).abs() < 1e-12 * c[3].abs());
    }

    #[test]
    fn refuses_points_at_lattice_points() {
        let p = wp_invariants(1.0).unwrap();
        for z in [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(-2.0, 0.0),
        ] {
            assert!(matches!(wp_eval(z, &p), Err(Error::PoleProximity { .. })));
        }
        assert!(wp_invariants(0.05).is_err());
    }

    #[test]
    fn half_period_value_matches_reference() {
        // mpmath: roots of 4t³ − g₂t at τ = 1 are 0, ±6.87518581802037282749…
        let p = wp_invariants(1.0).unwrap();
        assert!((p.half_period_values[0] - 6.875_185_818_020_373).abs() < 1e-9);
        assert!(p.half_period_values[1].abs() < 1e-9);
        assert!((p.half_period_values[2] + 6.875_185_818_020_373).abs() < 1e-9);
    }

    #[test]
    fn duplication_branch_agrees_with_direct_series() {
        // tall lattice: the reduced point 0.2 + 0.8i lies outside LAURENT_RADIUS
        let p = wp_invariants(2.0).unwrap();
        let z = Complex64::new(0.2, 0.8);
        let dup = p.evaluate(z, None).unwrap();
        let direct = laurent_sum(&p.laurent, z, LAURENT_TERMS);
        assert!((dup.value - direct.value).norm() < 1e-10 * dup.value.norm().max(1.0));
        assert!(
            (dup.derivative - direct.derivative).norm() < 1e-9 * dup.derivative.norm().max(1.0)
        );
    }
}
