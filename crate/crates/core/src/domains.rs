//! The two counting settings: the truncated fundamental domain for `j` and
//! the notched period cell for `℘`, with pipelines that count zeros of
//! `P(z, j(z))` and `P(z, ℘(z))` and set them against the zero bounds.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{Analytic, Difference, FnPair};
use crate::contour::{
    dominant_term_bound, localize_zeros, phase_trace, winding_number_with, Contour,
    DominantTermBound, LocalizeOptions, LocalizedZero, PathSegment, Rect, WindingOptions,
    WindingResult,
};
use crate::error::{Error, Result};
use crate::pfaffian::{khovanskii_zero_bound, real_zero_count, RealZeroOptions};
use crate::poly::{perturb, perturb_with_epsilon, BivariatePolynomial, PerturbedComposite};
use crate::special::modular::KleinJ;
use crate::special::weierstrass::{Weierstrass, TAU_MAX, TAU_MIN};

pub const SCHEMA: &str = "mzl/1";

/// Signed inset of the `j` contour; negative values push it outward so
/// that zeros on `∂𝔉` (such as the double zero of `j − 1728` at `i`) are
/// enclosed.
pub const DEFAULT_J_INSET: f64 = -1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JDomainSpec {
    pub y: f64,
    pub inset: f64,
}

impl Default for JDomainSpec {
    fn default() -> Self {
        Self {
            y: 2.0,
            inset: DEFAULT_J_INSET,
        }
    }
}

impl JDomainSpec {
    fn validate(&self) -> Result<()> {
        if !(self.inset.abs() < 0.05) {
            return Err(Error::InvalidSpec(format!(
                "inset {} too large",
                self.inset
            )));
        }
        if !(self.y > 1.0 + self.inset.max(0.0)) {
            return Err(Error::InvalidSpec(format!("Y = {} must exceed 1", self.y)));
        }
        Ok(())
    }

    /// Half-width of the vertical sides and radius of the arc.
    fn geometry(&self) -> (f64, f64, f64) {
        let half = 0.5 - self.inset;
        let radius = 1.0 + self.inset;
        let foot = (radius * radius - half * half).sqrt();
        (half, radius, foot)
    }

    /// Closed region bounded by the contour.
    pub fn contains(&self, z: Complex64) -> bool {
        let (half, radius, _) = self.geometry();
        z.re.abs() <= half && z.norm() >= radius && z.im <= self.y
    }
}

/// Arc from `e^{2πi/3}` to `e^{πi/3}`, the side `Re z = ½` up to `Y`, the
/// top line, and the side `Re z = −½` back down; positively oriented.
pub fn build_j_contour(spec: &JDomainSpec) -> Result<Contour> {
    spec.validate()?;
    let (half, radius, foot) = spec.geometry();
    let right = foot.atan2(half);
    let left = PI - right;
    let top = spec.y;
    let c = Complex64::new;
    Contour::closed(vec![
        PathSegment::arc(c(0.0, 0.0), radius, left, right)?,
        PathSegment::line(c(half, foot), c(half, top))?,
        PathSegment::line(c(half, top), c(-half, top))?,
        PathSegment::line(c(-half, top), c(-half, foot))?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WpDomainSpec {
    pub tau: f64,
    pub beta: Complex64,
    pub delta: f64,
}

impl WpDomainSpec {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            beta: Complex64::new(0.0, 0.0),
            delta: 0.02 * tau.min(1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(TAU_MIN..=TAU_MAX).contains(&self.tau) {
            return Err(Error::OutOfRange(format!("tau = {}", self.tau)));
        }
        if !(self.delta > 0.0 && self.delta < self.tau.min(1.0) / 4.0) {
            return Err(Error::InvalidSpec(format!(
                "delta = {} must lie in (0, min(1, tau)/4)",
                self.delta
            )));
        }
        Ok(())
    }

    fn corners(&self) -> [Complex64; 4] {
        let b = self.beta;
        [
            b,
            b + 1.0,
            b + Complex64::new(1.0, self.tau),
            b + Complex64::new(0.0, self.tau),
        ]
    }

    /// Lattice points among the corners.
    fn corner_poles(&self) -> Vec<Complex64> {
        self.corners()
            .into_iter()
            .filter(|&w| is_lattice_point(w, self.tau))
            .collect()
    }

    /// Half-open cell `β + [0, 1) × [0, τ)` minus the notch discs, shifted
    /// by `CELL_EDGE_TOL` so that a zero on the lower or left edge is kept
    /// exactly once whichever lattice image localization lands on.
    pub fn contains(&self, z: Complex64) -> bool {
        let w = z - self.beta + Complex64::new(CELL_EDGE_TOL, CELL_EDGE_TOL);
        let inside = w.re >= 0.0 && w.re < 1.0 && w.im >= 0.0 && w.im < self.tau;
        inside
            && self
                .corner_poles()
                .iter()
                .all(|&p| (z - p).norm() > self.delta)
    }
}

pub const CELL_EDGE_TOL: f64 = 1e-6;

fn is_lattice_point(w: Complex64, tau: f64) -> bool {
    (w.re - w.re.round()).abs() < 1e-12 && (w.im / tau - (w.im / tau).round()).abs() < 1e-12
}

/// Parallelogram `β → β+1 → β+1+iτ → β+iτ` with interior quarter-circle
/// notches of radius `δ` at corners that are lattice points.
pub fn build_wp_contour(spec: &WpDomainSpec) -> Result<Contour> {
    spec.validate()?;
    let d = spec.delta;
    let corners = spec.corners();
    let notched: Vec<bool> = corners
        .iter()
        .map(|&w| is_lattice_point(w, spec.tau))
        .collect();
    // direction of travel along each side
    let dirs = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut segs = Vec::new();
    for k in 0..4 {
        let a = corners[k];
        let b = corners[(k + 1) % 4];
        let start = if notched[k] { a + d * dirs[k] } else { a };
        let end = if notched[(k + 1) % 4] {
            b - d * dirs[k]
        } else {
            b
        };
        segs.push(PathSegment::line(start, end)?);
        if notched[(k + 1) % 4] {
            // clockwise quarter turn about the corner, from −dir to the next dir
            let from = (-dirs[k]).arg();
            segs.push(PathSegment::arc(b, d, from, from - FRAC_PI_2)?);
        }
    }
    Contour::closed(segs)
}

/// Options shared by both pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct CountOptions {
    pub winding: WindingOptions,
    pub localize: LocalizeOptions,
    /// Boundary samples per segment used to pick the Rouché shift.
    pub boundary_samples: usize,
    /// Below this `min|P|/scale` the contour is treated as meeting a zero.
    pub vanishing_ratio: f64,
    /// Shift used, relative to the local scale, when it does.
    pub fallback_epsilon: f64,
    /// Required `|leading term| / |remainder|` on the top line.
    pub dominance: f64,
    pub max_y: f64,
    pub max_delta_halvings: u32,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            winding: WindingOptions::default(),
            localize: LocalizeOptions::default(),
            boundary_samples: 256,
            vanishing_ratio: 1e-9,
            fallback_epsilon: 1e-6,
            dominance: 2.2,
            max_y: 40.0,
            max_delta_halvings: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroReport {
    pub center: [String; 2],
    pub radius: String,
    pub multiplicity: i64,
    pub resolved: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindingReport {
    pub winding: i64,
    pub turns: String,
    pub total_variation: String,
    pub min_modulus: String,
    pub samples_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopLineReport {
    pub leading: String,
    pub bound: String,
    pub direct: String,
    pub dominance: String,
    pub holds: bool,
}

/// Result of one counting pipeline; floats are rendered as decimal strings.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroCountReport {
    pub schema: &'static str,
    pub domain: &'static str,
    pub polynomial: BivariatePolynomial,
    pub degree: usize,
    pub parameters: BTreeMap<&'static str, String>,
    pub count: i64,
    pub winding: WindingReport,
    pub epsilon: String,
    pub theta: String,
    /// True when `P∘f` vanished on the contour and a fixed shift was used.
    pub boundary_zero: bool,
    pub localized: Vec<ZeroReport>,
    pub localized_total: i64,
    pub cross_validated: bool,
    pub top_line: Option<TopLineReport>,
    pub bound: String,
    pub bound_formula: &'static str,
    pub within_bound: bool,
    pub proof_bound: Option<String>,
    pub within_proof_bound: Option<bool>,
    pub pass: bool,
}

pub fn dec(x: f64) -> String {
    format!("{x:?}")
}

fn zero_report(z: &LocalizedZero) -> ZeroReport {
    ZeroReport {
        center: [dec(z.center.re), dec(z.center.im)],
        radius: dec(z.radius),
        multiplicity: z.multiplicity,
        resolved: z.resolved,
    }
}

fn winding_report(w: &WindingResult) -> WindingReport {
    WindingReport {
        winding: w.winding,
        turns: dec(w.turns),
        total_variation: dec(w.total_variation),
        min_modulus: dec(w.min_modulus),
        samples_used: w.samples_used,
    }
}

/// Degree used for the bounds: total degree, at least 1.
pub fn bound_degree(p: &BivariatePolynomial) -> u64 {
    p.total_degree().max(1) as u64
}

pub fn j_count_bound(d: u64) -> BigUint {
    (BigUint::one() << 68u32) * BigUint::from(d).pow(10)
}

pub fn wp_count_bound(d: u64) -> BigUint {
    BigUint::from(8 * d * d + 14 * d + 5)
}

/// Constant reached at the end of the argument for the `℘` bound.
pub fn wp_proof_bound(d: u64) -> BigUint {
    BigUint::from(8 * d * d + 14 * d + 7)
}

pub fn proposition_bound(d: u64) -> BigUint {
    BigUint::from(4 * d * d + 6 * d + 1)
}

pub fn bezout_step_bound(d: u64) -> BigUint {
    BigUint::from(2 * d * d + 3 * d)
}

/// Chooses `ε`, `θ` for the Rouché shift from contour samples.
fn shifted<F: Analytic + Clone>(
    p: &BivariatePolynomial,
    inner: &F,
    contour: &Contour,
    opts: &CountOptions,
) -> Result<(PerturbedComposite<F>, bool)> {
    let plain = PerturbedComposite::unperturbed(p.clone(), inner.clone());
    // uniform samples plus the adaptive trace, which crowds near close zeros
    let mut pts = contour.sample_points(opts.boundary_samples);
    let traced = match phase_trace(&plain, contour, &opts.winding, true) {
        Ok(trace) => {
            pts.extend(trace.points.iter().map(|t| t.z));
            true
        }
        Err(Error::ZeroOnContour { .. } | Error::NonConvergence(_)) => false,
        Err(e) => return Err(e),
    };
    let samples: Vec<_> = pts
        .par_iter()
        .map(|&z| plain.sample(z))
        .collect::<Result<Vec<_>>>()?;
    let (k, ratio) = samples
        .iter()
        .enumerate()
        .map(|(k, s)| (k, s.value.norm() / s.scale))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    if !traced || ratio < opts.vanishing_ratio {
        let eps = opts.fallback_epsilon * samples[k].scale;
        Ok((
            perturb_with_epsilon(p.clone(), inner.clone(), &pts, eps)?,
            true,
        ))
    } else {
        Ok((perturb(p.clone(), inner.clone(), &pts)?, false))
    }
}

/// `f = a·(iY)ⁿ·e^{−2πilz}` for the leading cusp term of `P`.
fn cusp_term(p: &BivariatePolynomial, y: f64) -> impl Analytic {
    let (l, n, a) = p.leading_cusp_term();
    let scale = a * Complex64::new(0.0, y).powi(n as i32);
    let k = Complex64::new(0.0, -TAU * l as f64);
    FnPair::new(
        move |z: Complex64| scale * (k * z).exp(),
        move |z: Complex64| scale * k * (k * z).exp(),
    )
}

fn top_line(spec: &JDomainSpec) -> Result<Contour> {
    let (half, _, _) = spec.geometry();
    Contour::new(vec![PathSegment::line(
        Complex64::new(half, spec.y),
        Complex64::new(-half, spec.y),
    )?])
}

/// Smallest `|f|/|g|` on the top line at height `spec.y`.
fn cusp_dominance(p: &BivariatePolynomial, spec: &JDomainSpec) -> Result<f64> {
    let f = cusp_term(p, spec.y);
    let full = PerturbedComposite::unperturbed(p.clone(), KleinJ);
    let line = top_line(spec)?;
    let pts = line.sample_points(256);
    let ratios: Vec<f64> = pts
        .par_iter()
        .map(|&z| {
            let fv = f.eval(z)?;
            let g = full.eval(z)? - fv;
            Ok(if g.norm() == 0.0 {
                f64::INFINITY
            } else {
                fv.norm() / g.norm()
            })
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(f64::INFINITY, f64::min))
}

fn top_line_bound(p: &BivariatePolynomial, spec: &JDomainSpec) -> Result<DominantTermBound> {
    let f = cusp_term(p, spec.y);
    let full = PerturbedComposite::unperturbed(p.clone(), KleinJ);
    let g = Difference(full, cusp_term(p, spec.y));
    dominant_term_bound(&f, &g, &top_line(spec)?, 2.0)
}

fn j_localize_box(spec: &JDomainSpec) -> Result<Rect> {
    let (half, _, foot) = spec.geometry();
    let pad = 0.02;
    Rect::new(
        Complex64::new(-half - pad, foot - pad),
        Complex64::new(half + pad, spec.y),
    )
}

/// Counts zeros of `P(z, j(z))` in the truncated fundamental domain.
///
/// `Y` is raised from `spec.y` until the leading cusp term dominates the
/// rest of `P(z, j(z))` on the top line and no zero sits within ½ of it.
pub fn count_zeros_j(
    p: &BivariatePolynomial,
    spec: &JDomainSpec,
    opts: &CountOptions,
) -> Result<ZeroCountReport> {
    if p.is_zero() {
        return Err(Error::Precondition("P is identically zero".into()));
    }
    spec.validate()?;
    let (l, _, _) = p.leading_cusp_term();
    let y_cap = opts.max_y.min(100.0 / l.max(1) as f64).max(spec.y);
    let mut spec = *spec;
    loop {
        while cusp_dominance(p, &spec)? <= opts.dominance {
            if spec.y + 0.5 > y_cap {
                return Err(Error::NonConvergence(format!(
                    "leading cusp term not dominant below Y = {y_cap}"
                )));
            }
            spec.y += 0.5;
        }
        let contour = build_j_contour(&spec)?;
        let (shifted, boundary_zero) = shifted(p, &KleinJ, &contour, opts)?;
        let w = winding_number_with(&shifted, &contour, &opts.winding)?;
        let plain = PerturbedComposite::unperturbed(p.clone(), KleinJ);
        let zeros = localize_zeros(&plain, j_localize_box(&spec)?, &opts.localize)?;
        let inside: Vec<LocalizedZero> = zeros
            .into_iter()
            .filter(|z| spec.contains(z.center))
            .collect();
        if inside.iter().any(|z| z.center.im > spec.y - 0.5) && spec.y + 1.0 <= y_cap {
            spec.y += 1.0;
            continue;
        }
        let top = top_line_bound(p, &spec).ok();
        let d = bound_degree(p);
        let bound = j_count_bound(d);
        let mut params = BTreeMap::new();
        params.insert("Y", dec(spec.y));
        params.insert("inset", dec(spec.inset));
        return Ok(finish_report(
            "j",
            p,
            params,
            w.winding,
            &w,
            &shifted,
            boundary_zero,
            &inside,
            top,
            bound,
            "2^68 d^10",
            None,
        ));
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_report<F>(
    domain: &'static str,
    p: &BivariatePolynomial,
    parameters: BTreeMap<&'static str, String>,
    count: i64,
    w: &WindingResult,
    shifted: &PerturbedComposite<F>,
    boundary_zero: bool,
    zeros: &[LocalizedZero],
    top: Option<DominantTermBound>,
    bound: BigUint,
    bound_formula: &'static str,
    proof_bound: Option<BigUint>,
) -> ZeroCountReport {
    let localized_total: i64 = zeros.iter().map(|z| z.multiplicity).sum();
    let cross_validated = localized_total == count;
    let within = |b: &BigUint| count >= 0 && BigInt::from(count) <= BigInt::from(b.clone());
    let within_bound = within(&bound);
    let within_proof = proof_bound.as_ref().map(within);
    ZeroCountReport {
        schema: SCHEMA,
        domain,
        polynomial: p.clone(),
        degree: p.total_degree(),
        parameters,
        count,
        winding: winding_report(w),
        epsilon: dec(shifted.epsilon),
        theta: dec(shifted.theta),
        boundary_zero,
        localized: zeros.iter().map(zero_report).collect(),
        localized_total,
        cross_validated,
        top_line: top.map(|b| TopLineReport {
            leading: dec(b.leading),
            bound: dec(b.bound),
            direct: dec(b.direct),
            dominance: dec(b.dominance),
            holds: b.holds,
        }),
        bound: bound.to_string(),
        bound_formula,
        within_bound,
        proof_bound: proof_bound.map(|b| b.to_string()),
        within_proof_bound: within_proof,
        pass: within_bound && cross_validated,
    }
}

/// Order of the pole of `P(z, ℘(z))` at the lattice point `w`; negative
/// values are zero orders.
pub fn pole_order(p: &BivariatePolynomial, w: Complex64) -> i64 {
    leading_laurent(p, w).0
}

/// `(m, A)` with `P(z, ℘(z)) ≈ A·(z − w)^{−m}` near the lattice point `w`.
pub fn leading_laurent(p: &BivariatePolynomial, w: Complex64) -> (i64, Complex64) {
    let mut best: Option<(i64, Complex64)> = None;
    for j in 0..=p.deg_y() {
        let col = p.y_coefficient(j);
        let Some((ord, coeff)) = root_order(&col, w) else {
            continue;
        };
        let m = 2 * j as i64 - ord as i64;
        best = match best {
            Some((bm, _)) if bm > m => best,
            Some((bm, bc)) if bm == m => Some((m, bc + coeff)),
            _ => Some((m, coeff)),
        };
    }
    best.unwrap_or((i64::MIN, Complex64::new(0.0, 0.0)))
}

/// Multiplicity of `w` as a root of `Σ cᵢzⁱ` and the next Taylor coefficient.
fn root_order(col: &[Complex64], w: Complex64) -> Option<(usize, Complex64)> {
    let scale: f64 = col
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm() * w.norm().max(1.0).powi(i as i32))
        .sum();
    if scale == 0.0 {
        return None;
    }
    // Taylor coefficients at w by repeated synthetic division
    let mut poly: Vec<Complex64> = col.to_vec();
    for k in 0..col.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut quotient = vec![Complex64::new(0.0, 0.0); poly.len().saturating_sub(1)];
        for i in (0..poly.len()).rev() {
            acc = acc * w + poly[i];
            if i > 0 {
                quotient[i - 1] = acc;
            }
        }
        if acc.norm() > 1e-12 * scale {
            return Some((k, acc));
        }
        poly = quotient;
    }
    None
}

/// Counts zeros of `P(z, ℘(z))` inside the notched cell.
///
/// `δ` is halved until no localized zero lies within `2δ` of a pole.
pub fn count_zeros_wp(
    p: &BivariatePolynomial,
    spec: &WpDomainSpec,
    opts: &CountOptions,
) -> Result<ZeroCountReport> {
    if p.is_zero() {
        return Err(Error::Precondition("P is identically zero".into()));
    }
    spec.validate()?;
    let wp = Weierstrass::new(spec.tau)?;
    let mut spec = *spec;
    let mut halvings = 0;
    loop {
        let contour = build_wp_contour(&spec)?;
        let (shifted, boundary_zero) = shifted(p, &wp, &contour, opts)?;
        let w = winding_number_with(&shifted, &contour, &opts.winding)?;
        let interior_poles = interior_pole_orders(p, &spec);
        let count = w.winding + interior_poles;

        let pad = 0.5 * spec.delta;
        let bx = Rect::new(
            spec.beta - Complex64::new(pad, pad),
            spec.beta + Complex64::new(1.0 + pad, spec.tau + pad),
        )?;
        let mut lopts = opts.localize.clone();
        lopts.poles = lattice_points_in(&bx, spec.tau)
            .into_iter()
            .map(|w| (w, pole_order(p, w).max(0)))
            .filter(|&(_, m)| m > 0)
            .collect();
        let plain = PerturbedComposite::unperturbed(p.clone(), wp.clone());
        let zeros = localize_zeros(&plain, bx, &lopts)?;
        let near_pole = zeros.iter().any(|z| {
            spec.corner_poles()
                .iter()
                .any(|&q| (z.center - q).norm() < 2.0 * spec.delta)
                && z.center.re > spec.beta.re - pad
        });
        let inside: Vec<LocalizedZero> = zeros
            .into_iter()
            .filter(|z| spec.contains(z.center))
            .collect();
        if near_pole && halvings < opts.max_delta_halvings {
            spec.delta *= 0.5;
            halvings += 1;
            continue;
        }
        let d = bound_degree(p);
        let mut params = BTreeMap::new();
        params.insert("tau", dec(spec.tau));
        params.insert("delta", dec(spec.delta));
        params.insert("beta_re", dec(spec.beta.re));
        params.insert("beta_im", dec(spec.beta.im));
        return Ok(finish_report(
            "wp",
            p,
            params,
            count,
            &w,
            &shifted,
            boundary_zero,
            &inside,
            None,
            wp_count_bound(d),
            "8d^2+14d+5",
            Some(wp_proof_bound(d)),
        ));
    }
}

fn lattice_points_in(b: &Rect, tau: f64) -> Vec<Complex64> {
    let mut out = Vec::new();
    for m in (b.lo.re.ceil() as i64)..=(b.hi.re.floor() as i64) {
        for n in ((b.lo.im / tau).ceil() as i64)..=((b.hi.im / tau).floor() as i64) {
            let w = Complex64::new(m as f64, n as f64 * tau);
            if b.contains(w) {
                out.push(w);
            }
        }
    }
    out
}

/// Poles strictly inside the contour (only when `β` is not a lattice point).
fn interior_pole_orders(p: &BivariatePolynomial, spec: &WpDomainSpec) -> i64 {
    let cell = Rect {
        lo: spec.beta,
        hi: spec.beta + Complex64::new(1.0, spec.tau),
    };
    lattice_points_in(&cell, spec.tau)
        .into_iter()
        .map(|w| pole_order(p, w).max(0))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Line {
    /// `(0, 1)`
    Horizontal,
    /// `(0, iτ)`
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Re,
    Im,
}

pub const LINE_POLE_OFFSET: f64 = 1e-4;

/// Sign-change zeros of `Re` or `Im` of `P(z, ℘(z))` on the open line
/// between adjacent poles.
pub fn line_im_zero_count(
    p: &BivariatePolynomial,
    tau: f64,
    line: Line,
    component: Component,
) -> Result<usize> {
    let wp = Weierstrass::new(tau)?;
    let f = PerturbedComposite::unperturbed(p.clone(), wp);
    let (len, dir) = match line {
        Line::Horizontal => (1.0, Complex64::new(1.0, 0.0)),
        Line::Vertical => (tau, Complex64::new(0.0, 1.0)),
    };
    let g = |t: f64| {
        let v = f.eval(dir * t)?;
        Ok(match component {
            Component::Re => v.re,
            Component::Im => v.im,
        })
    };
    let opts = RealZeroOptions {
        endpoint_offset: LINE_POLE_OFFSET,
        ..RealZeroOptions::default()
    };
    Ok(real_zero_count(g, (0.0, len), &opts)?.count)
}

/// `(1/2π)·|∫ P′/P|` bound over a quarter circle of radius `δ` about a
/// pole `w`, from the dominant Laurent term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarterCircleEstimate {
    pub order: i64,
    pub normalized_bound: f64,
    pub normalized_direct: f64,
    pub limit: f64,
}

pub fn quarter_circle_estimate(
    p: &BivariatePolynomial,
    tau: f64,
    w: Complex64,
    start_angle: f64,
    delta: f64,
) -> Result<QuarterCircleEstimate> {
    let wp = Weierstrass::new(tau)?;
    let (m, a) = leading_laurent(p, w);
    if m == i64::MIN {
        return Err(Error::Precondition("P vanishes identically".into()));
    }
    let k = -m;
    let lead = FnPair::new(
        move |z: Complex64| a * (z - w).powi(k as i32),
        move |z: Complex64| a * k as f64 * (z - w).powi(k as i32 - 1),
    );
    let full = PerturbedComposite::unperturbed(p.clone(), wp);
    let g = Difference(
        full,
        FnPair::new(
            move |z: Complex64| a * (z - w).powi(k as i32),
            move |z: Complex64| a * k as f64 * (z - w).powi(k as i32 - 1),
        ),
    );
    let arc = Contour::new(vec![PathSegment::arc(
        w,
        delta,
        start_angle,
        start_angle - FRAC_PI_2,
    )?])?;
    let b = dominant_term_bound(&lead, &g, &arc, 2.0)?;
    Ok(QuarterCircleEstimate {
        order: k,
        normalized_bound: b.bound / TAU,
        normalized_direct: b.direct / TAU,
        limit: k.abs() as f64 / 4.0,
    })
}

/// `Im P(it, y)` as a real polynomial `Q(t, y)`; coefficients `Q[i][j]`.
pub fn imaginary_axis_reduction(p: &BivariatePolynomial) -> Vec<Vec<f64>> {
    p.coeffs()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let ik = Complex64::new(0.0, 1.0).powi(i as i32);
            row.iter().map(|c| (c * ik).im).collect()
        })
        .collect()
}

/// Randomized trial configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub j_trials: usize,
    pub wp_trials: usize,
    pub j_max_degree: usize,
    pub wp_max_degree: usize,
    pub tau: f64,
    pub seed: u64,
    pub ledger_max_d: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            j_trials: 20,
            wp_trials: 50,
            j_max_degree: 2,
            wp_max_degree: 3,
            tau: 1.0,
            seed: 1,
            ledger_max_d: 100,
        }
    }
}

/// Random `P` of total degree `≤ d` with coefficient moduli in `[0.5, 1.5]`.
pub fn random_polynomial(rng: &mut impl Rng, d: usize, real: bool) -> BivariatePolynomial {
    let mut terms = Vec::new();
    for i in 0..=d {
        for j in 0..=(d - i) {
            let r = rng.gen_range(0.5..1.5);
            let c = if real {
                Complex64::new(if rng.gen_bool(0.5) { r } else { -r }, 0.0)
            } else {
                Complex64::from_polar(r, rng.gen_range(0.0..TAU))
            };
            terms.push((i, j, c));
        }
    }
    BivariatePolynomial::from_terms(&terms)
}

/// Random `P` of total degree `≤ d` with real coefficients whose moduli are
/// log-uniform in `[10⁻¹, 10³]`, so that low-order terms can balance the
/// powers of `℘` and the real-line counts are not all zero.
pub fn random_wide_polynomial(rng: &mut impl Rng, d: usize) -> BivariatePolynomial {
    let mut terms = Vec::new();
    for i in 0..=d {
        for j in 0..=(d - i) {
            let m = 10f64.powf(rng.gen_range(-1.0..3.0));
            terms.push((
                i,
                j,
                Complex64::new(if rng.gen_bool(0.5) { m } else { -m }, 0.0),
            ));
        }
    }
    BivariatePolynomial::from_terms(&terms)
}

/// Per-trial generator: independent of thread scheduling.
pub fn trial_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(index as u128 * 1024);
    rng
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub domain: &'static str,
    pub index: usize,
    pub polynomial: BivariatePolynomial,
    pub count: Option<i64>,
    pub localized_total: Option<i64>,
    pub bound: String,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerCheck {
    pub name: &'static str,
    pub d_max: u64,
    pub holds: bool,
    pub first_failure: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub schema: &'static str,
    pub config: SuiteConfig,
    pub trials: Vec<TrialRecord>,
    pub ledger: Vec<LedgerCheck>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// `2³⁶·4d·(3+4d)⁹ ≤ 2⁶⁴d¹⁰`, i.e. the Khovanskii count for the order-9
/// chain with `β = 4d` fits under the per-line budget.
pub fn ledger_khovanskii(d: u64) -> bool {
    khovanskii_zero_bound(9, 3, (4 * d) as u32)
        <= (BigUint::one() << 64u32) * BigUint::from(d).pow(10)
}

/// `8·2⁶⁴d¹⁰ + 10d + 0.2 ≤ 2⁶⁸d¹⁰`, multiplied through by 5.
pub fn ledger_total(d: u64) -> bool {
    let d10 = BigUint::from(d).pow(10);
    let lhs = BigUint::from(40u32) * (BigUint::one() << 64u32) * &d10 + BigUint::from(50 * d + 1);
    let rhs = BigUint::from(5u32) * (BigUint::one() << 68u32) * d10;
    lhs <= rhs
}

fn ledger_check(name: &'static str, d_max: u64, f: fn(u64) -> bool) -> LedgerCheck {
    let first_failure = (1..=d_max).find(|&d| !f(d));
    LedgerCheck {
        name,
        d_max,
        holds: first_failure.is_none(),
        first_failure,
    }
}

pub fn verify_bounds_report(cfg: &SuiteConfig, opts: &CountOptions) -> Result<BoundsReport> {
    if cfg.j_max_degree > 4
        || cfg.wp_max_degree > 5
        || cfg.j_max_degree == 0
        || cfg.wp_max_degree == 0
    {
        return Err(Error::InvalidSpec(
            "suite degrees must be 1..=4 (j) and 1..=5 (wp)".into(),
        ));
    }
    let j_trials: Vec<TrialRecord> = (0..cfg.j_trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(cfg.seed, 1, k as u64);
            let d = rng.gen_range(1..=cfg.j_max_degree);
            let p = random_polynomial(&mut rng, d, false);
            let r = count_zeros_j(&p, &JDomainSpec::default(), opts);
            trial_record("j", k, p, j_count_bound(d as u64), r)
        })
        .collect();
    let wp_trials: Vec<TrialRecord> = (0..cfg.wp_trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(cfg.seed, 2, k as u64);
            let d = rng.gen_range(1..=cfg.wp_max_degree);
            let p = random_polynomial(&mut rng, d, false);
            let r = count_zeros_wp(&p, &WpDomainSpec::new(cfg.tau), opts);
            trial_record("wp", k, p, wp_count_bound(d as u64), r)
        })
        .collect();
    let ledger = vec![
        ledger_check(
            "khovanskii(9,3,4d) <= 2^64 d^10",
            cfg.ledger_max_d,
            ledger_khovanskii,
        ),
        ledger_check(
            "8*2^64 d^10 + 10d + 0.2 <= 2^68 d^10",
            cfg.ledger_max_d,
            ledger_total,
        ),
    ];
    let mut trials = j_trials;
    trials.extend(wp_trials);
    let mut failures: Vec<String> = trials
        .iter()
        .filter(|t| !t.pass)
        .map(|t| format!("{} trial {}", t.domain, t.index))
        .collect();
    failures.extend(
        ledger
            .iter()
            .filter(|l| !l.holds)
            .map(|l| l.name.to_string()),
    );
    Ok(BoundsReport {
        schema: SCHEMA,
        config: cfg.clone(),
        pass: failures.is_empty(),
        trials,
        ledger,
        failures,
    })
}

fn trial_record(
    domain: &'static str,
    index: usize,
    polynomial: BivariatePolynomial,
    bound: BigUint,
    r: Result<ZeroCountReport>,
) -> TrialRecord {
    match r {
        Ok(rep) => TrialRecord {
            domain,
            index,
            polynomial,
            count: Some(rep.count),
            localized_total: Some(rep.localized_total),
            bound: bound.to_string(),
            pass: rep.pass,
            error: None,
        },
        Err(e) => TrialRecord {
            domain,
            index,
            polynomial,
            count: None,
            localized_total: None,
            bound: bound.to_string(),
            pass: false,
            error: Some(e.to_string()),
        },
    }
}

/// Largest count that still fits in an `f64` comparison, for summaries.
pub fn bound_as_f64(b: &BigUint) -> f64 {
    b.to_f64().unwrap_or(f64::INFINITY)
}
