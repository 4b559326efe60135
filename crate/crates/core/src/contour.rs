//! Piecewise contours, winding numbers by adaptive phase tracking, the
//! dominant-term estimate, the crossing-count inequality, and zero
//! localization by box subdivision.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{Analytic, Sample};
use crate::error::{Error, Result};
use crate::pfaffian::{real_zero_count, RealZeroOptions};

pub const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathSegment {
    Line {
        start: Complex64,
        end: Complex64,
    },
    /// Counterclockwise when `end_angle > start_angle`.
    Arc {
        center: Complex64,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
}

impl PathSegment {
    pub fn line(start: Complex64, end: Complex64) -> Result<Self> {
        if (end - start).norm() == 0.0 {
            return Err(Error::InvalidSpec("zero-length line".into()));
        }
        Ok(PathSegment::Line { start, end })
    }

    pub fn arc(center: Complex64, radius: f64, start_angle: f64, end_angle: f64) -> Result<Self> {
        if !(radius > 0.0) || start_angle == end_angle {
            return Err(Error::InvalidSpec(format!(
                "degenerate arc: radius {radius}, sweep {}",
                end_angle - start_angle
            )));
        }
        Ok(PathSegment::Arc {
            center,
            radius,
            start_angle,
            end_angle,
        })
    }

    /// Position at parameter `t ∈ [0, 1]`.
    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            PathSegment::Line { start, end } => start + (end - start) * t,
            PathSegment::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                center + Complex64::from_polar(radius, start_angle + (end_angle - start_angle) * t)
            }
        }
    }

    /// `dz/dt`.
    pub fn derivative(&self, t: f64) -> Complex64 {
        match *self {
            PathSegment::Line { start, end } => end - start,
            PathSegment::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => {
                let sweep = end_angle - start_angle;
                Complex64::new(0.0, sweep) * Complex64::from_polar(radius, start_angle + sweep * t)
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            PathSegment::Line { start, end } => (end - start).norm(),
            PathSegment::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => radius * (end_angle - start_angle).abs(),
        }
    }

    pub fn reversed(&self) -> Self {
        match *self {
            PathSegment::Line { start, end } => PathSegment::Line {
                start: end,
                end: start,
            },
            PathSegment::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => PathSegment::Arc {
                center,
                radius,
                start_angle: end_angle,
                end_angle: start_angle,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    segments: Vec<PathSegment>,
    closed: bool,
}

impl Contour {
    /// Chains segments whose consecutive endpoints agree to `CLOSURE_TOL`.
    pub fn new(segments: Vec<PathSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidSpec("empty contour".into()));
        }
        for (k, w) in segments.windows(2).enumerate() {
            let gap = (w[0].end() - w[1].start()).norm();
            if gap > CLOSURE_TOL {
                return Err(Error::InvalidSpec(format!("gap {gap:e} after segment {k}")));
            }
        }
        let closed =
            (segments[segments.len() - 1].end() - segments[0].start()).norm() <= CLOSURE_TOL;
        Ok(Self { segments, closed })
    }

    pub fn closed(segments: Vec<PathSegment>) -> Result<Self> {
        let c = Self::new(segments)?;
        if !c.closed {
            return Err(Error::InvalidSpec("contour is not closed".into()));
        }
        Ok(c)
    }

    /// Positively oriented boundary of the rectangle with corners `lo`, `hi`.
    pub fn rectangle(lo: Complex64, hi: Complex64) -> Result<Self> {
        let a = lo;
        let b = Complex64::new(hi.re, lo.im);
        let c = hi;
        let d = Complex64::new(lo.re, hi.im);
        Self::closed(vec![
            PathSegment::line(a, b)?,
            PathSegment::line(b, c)?,
            PathSegment::line(c, d)?,
            PathSegment::line(d, a)?,
        ])
    }

    pub fn circle(center: Complex64, radius: f64) -> Result<Self> {
        Self::closed(vec![PathSegment::arc(center, radius, 0.0, TAU)?])
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(PathSegment::length).sum()
    }

    /// Position at global parameter `s ∈ [0, segment count]`.
    pub fn point(&self, s: f64) -> Complex64 {
        let n = self.segments.len();
        let k = (s.floor().max(0.0) as usize).min(n - 1);
        self.segments[k].point(s - k as f64)
    }

    /// `n` equispaced parameter samples per segment, endpoints excluded at the end.
    pub fn sample_points(&self, per_segment: usize) -> Vec<Complex64> {
        let n = per_segment.max(1);
        self.segments
            .iter()
            .flat_map(|seg| (0..n).map(move |k| seg.point(k as f64 / n as f64)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingOptions {
    /// `|f| < zero_tol·scale` at a sample is a zero on the contour.
    pub zero_tol: f64,
    pub initial_samples: usize,
    /// Largest accepted phase change between neighbouring samples.
    pub max_step: f64,
    pub max_depth: u32,
    /// Largest allowed distance of the total increment from a multiple of 2π, in turns.
    pub integrality_tol: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self {
            zero_tol: 1e-12,
            initial_samples: 64,
            max_step: FRAC_PI_2,
            max_depth: 48,
            integrality_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingResult {
    pub winding: i64,
    /// Total argument increment divided by 2π before rounding.
    pub turns: f64,
    pub total_variation: f64,
    pub min_modulus: f64,
    pub samples_used: usize,
}

/// One sample of a phase trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub s: f64,
    pub z: Complex64,
    pub value: Complex64,
    /// Unwrapped argument, continuous along the contour.
    pub arg: f64,
}

/// Accumulated change of `log f` along a contour.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrace {
    pub delta_arg: f64,
    pub delta_log_modulus: f64,
    pub total_variation: f64,
    pub min_modulus: f64,
    pub samples: usize,
    pub points: Vec<TracePoint>,
}

impl PhaseTrace {
    /// `∫ f′/f dz = Δ ln|f| + iΔ arg f`.
    pub fn log_integral(&self) -> Complex64 {
        Complex64::new(self.delta_log_modulus, self.delta_arg)
    }
}

struct Piece {
    delta: f64,
    variation: f64,
    min_modulus: f64,
    samples: usize,
    points: Vec<(f64, Complex64, Complex64)>,
}

fn checked_sample<F: Analytic + ?Sized>(
    f: &F,
    z: Complex64,
    opts: &WindingOptions,
) -> Result<Sample> {
    let s = f.sample(z)?;
    if !s.value.is_finite() {
        return Err(Error::NonConvergence(format!("non-finite value at {z}")));
    }
    if s.value.norm() < opts.zero_tol * s.scale {
        return Err(Error::ZeroOnContour {
            z,
            modulus: s.value.norm(),
        });
    }
    Ok(s)
}

/// Value and `|d log f / dt|` at parameter `t`.
fn phase_sample<F: Analytic + ?Sized>(
    f: &F,
    seg: &PathSegment,
    t: f64,
    opts: &WindingOptions,
) -> Result<(Complex64, f64)> {
    let z = seg.point(t);
    let v = checked_sample(f, z, opts)?.value;
    let rate = (f.deriv(z)? / v * seg.derivative(t)).norm();
    Ok((
        v,
        if rate.is_finite() {
            rate
        } else {
            f64::INFINITY
        },
    ))
}

fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b / a).arg()
}

/// Refines `[t0, t1]` on one segment until every step turns by less than
/// `max_step`, judged both from the sampled values and from the speed of
/// `log f` at the samples, so fast turns between samples are not aliased
/// and zeros close to the segment are approached until detected.
#[allow(clippy::too_many_arguments)]
fn refine_interval<F: Analytic + ?Sized>(
    f: &F,
    seg: &PathSegment,
    seg_index: usize,
    (t0, v0, r0): (f64, Complex64, f64),
    (t1, v1, r1): (f64, Complex64, f64),
    opts: &WindingOptions,
    keep: bool,
) -> Result<Piece> {
    let mut piece = Piece {
        delta: 0.0,
        variation: 0.0,
        min_modulus: v0.norm().min(v1.norm()),
        samples: 0,
        points: Vec::new(),
    };
    // explicit stack, processed left to right
    let mut stack = vec![(t0, v0, r0, t1, v1, r1, 0u32)];
    while let Some((a, va, ra, b, vb, rb, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let zm = seg.point(m);
        let (vm, rm) = phase_sample(f, seg, m, opts)?;
        piece.samples += 1;
        piece.min_modulus = piece.min_modulus.min(vm.norm());
        let d1 = phase_step(va, vm);
        let d2 = phase_step(vm, vb);
        let whole = phase_step(va, vb);
        let dip = vm.norm() < 0.5 * va.norm().min(vb.norm());
        let fast = ra.max(rm).max(rb) * 0.5 * (b - a) >= opts.max_step;
        let ok = d1.abs() < opts.max_step
            && d2.abs() < opts.max_step
            && whole.abs() < opts.max_step
            && !dip
            && !fast;
        if ok || depth >= opts.max_depth {
            if !ok {
                return Err(Error::NonConvergence(format!(
                    "phase not resolved near {zm} after {depth} subdivisions"
                )));
            }
            piece.delta += d1 + d2;
            piece.variation += d1.abs() + d2.abs();
            if keep {
                piece.points.push((seg_index as f64 + m, zm, vm));
                piece.points.push((seg_index as f64 + b, seg.point(b), vb));
            }
        } else {
            // right half first so the left half is processed next
            stack.push((m, vm, rm, b, vb, rb, depth + 1));
            stack.push((a, va, ra, m, vm, rm, depth + 1));
        }
    }
    Ok(piece)
}

/// Tracks `arg f` and `ln |f|` along the contour.
pub fn phase_trace<F: Analytic + ?Sized>(
    f: &F,
    contour: &Contour,
    opts: &WindingOptions,
    keep_points: bool,
) -> Result<PhaseTrace> {
    let n = opts.initial_samples.max(4);
    let mut pieces = Vec::new();
    let mut first_value = None;
    let mut last_value = None;
    for (k, seg) in contour.segments().iter().enumerate() {
        let grid: Vec<(f64, Complex64, f64)> = (0..=n)
            .into_par_iter()
            .map(|i| {
                let t = i as f64 / n as f64;
                let (v, r) = phase_sample(f, seg, t, opts)?;
                Ok((t, v, r))
            })
            .collect::<Result<_>>()?;
        if first_value.is_none() {
            first_value = Some(grid[0].1);
        }
        last_value = Some(grid[n].1);
        if keep_points && k == 0 {
            pieces.push(Piece {
                delta: 0.0,
                variation: 0.0,
                min_modulus: grid[0].1.norm(),
                samples: 0,
                points: vec![(0.0, seg.point(0.0), grid[0].1)],
            });
        }
        let seg_pieces: Vec<Piece> = grid
            .par_windows(2)
            .map(|w| refine_interval(f, seg, k, w[0], w[1], opts, keep_points))
            .collect::<Result<_>>()?;
        let grid_samples = grid.len();
        pieces.extend(seg_pieces);
        if let Some(p) = pieces.last_mut() {
            p.samples += grid_samples;
        }
    }
    let (v0, v1) = (first_value.unwrap(), last_value.unwrap());
    let mut trace = PhaseTrace {
        delta_arg: 0.0,
        delta_log_modulus: v1.norm().ln() - v0.norm().ln(),
        total_variation: 0.0,
        min_modulus: f64::INFINITY,
        samples: 0,
        points: Vec::new(),
    };
    let mut arg = v0.arg();
    let mut prev = v0;
    for p in pieces {
        trace.delta_arg += p.delta;
        trace.total_variation += p.variation;
        trace.min_modulus = trace.min_modulus.min(p.min_modulus);
        trace.samples += p.samples;
        for (s, z, v) in p.points {
            if !trace.points.is_empty() {
                arg += phase_step(prev, v);
            }
            prev = v;
            trace.points.push(TracePoint {
                s,
                z,
                value: v,
                arg,
            });
        }
    }
    Ok(trace)
}

/// Winding number of `f` around a closed contour.
pub fn winding_number<F: Analytic + ?Sized>(f: &F, contour: &Contour) -> Result<WindingResult> {
    winding_number_with(f, contour, &WindingOptions::default())
}

pub fn winding_number_with<F: Analytic + ?Sized>(
    f: &F,
    contour: &Contour,
    opts: &WindingOptions,
) -> Result<WindingResult> {
    if !contour.is_closed() {
        return Err(Error::Precondition(
            "winding number needs a closed contour".into(),
        ));
    }
    let trace = phase_trace(f, contour, opts, false)?;
    let turns = trace.delta_arg / TAU;
    let winding = turns.round();
    if (turns - winding).abs() > opts.integrality_tol {
        return Err(Error::NonConvergence(format!(
            "non-integral winding {turns}"
        )));
    }
    Ok(WindingResult {
        winding: winding as i64,
        turns,
        total_variation: trace.total_variation,
        min_modulus: trace.min_modulus,
        samples_used: trace.samples,
    })
}

/// Both sides of the dominant-term estimate on one contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominantTermBound {
    /// `|∫ f′/f| + C/(C−1)·|Γ|·sup(|f′||g|/|f|² + |g′|/|f|)`.
    pub bound: f64,
    /// `|∫ f′/f|`.
    pub leading: f64,
    pub sup_term: f64,
    /// Directly computed `|∫ (f+g)′/(f+g)|`.
    pub direct: f64,
    /// Smallest `|f|/|g|` seen.
    pub dominance: f64,
    pub holds: bool,
}

pub const DOMINANCE_SAMPLES: usize = 256;

/// Sampled check of `|f| > C|g|`, then the estimate and the direct integral.
pub fn dominant_term_bound<F, G>(
    f: &F,
    g: &G,
    contour: &Contour,
    c: f64,
) -> Result<DominantTermBound>
where
    F: Analytic + ?Sized,
    G: Analytic + ?Sized,
{
    if !(c > 1.0) {
        return Err(Error::Precondition(format!("C = {c} must exceed 1")));
    }
    let pts = contour.sample_points(DOMINANCE_SAMPLES);
    let mut closing = pts.clone();
    if !contour.is_closed() {
        closing.push(contour.segments().last().unwrap().end());
    }
    let rows: Vec<(Complex64, f64, f64)> = closing
        .par_iter()
        .map(|&z| {
            let fv = f.eval(z)?;
            let gv = g.eval(z)?;
            let fd = f.deriv(z)?;
            let gd = g.deriv(z)?;
            let af = fv.norm();
            let ratio = if gv.norm() == 0.0 {
                f64::INFINITY
            } else {
                af / gv.norm()
            };
            let term = fd.norm() * gv.norm() / (af * af) + gd.norm() / af;
            Ok((z, ratio, term))
        })
        .collect::<Result<_>>()?;
    let (worst_z, dominance) =
        rows.iter()
            .map(|r| (r.0, r.1))
            .fold((Complex64::new(0.0, 0.0), f64::INFINITY), |a, b| {
                if b.1 < a.1 {
                    b
                } else {
                    a
                }
            });
    if !(dominance > c) {
        return Err(Error::Precondition(format!(
            "|f| > {c}|g| fails at {worst_z}: ratio {dominance}"
        )));
    }
    let sup_term = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let opts = WindingOptions::default();
    let leading = phase_trace(f, contour, &opts, false)?.log_integral().norm();
    let both = crate::analytic::Sum(f, g);
    let direct = phase_trace(&both, contour, &opts, false)?
        .log_integral()
        .norm();
    let bound = leading + c / (c - 1.0) * contour.length() * sup_term;
    Ok(DominantTermBound {
        bound,
        leading,
        sup_term,
        direct,
        dominance,
        holds: bound >= direct * (1.0 - 1e-12),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingReport {
    pub winding_abs_over_2pi: f64,
    pub im_crossings: usize,
    pub re_crossings: usize,
    pub lemma2_holds: bool,
}

/// Compares `|∫ f′/f|/2π` with half the number of sign changes of `Im f`
/// (and of `Re f`) along the contour, plus one.
pub fn crossing_bound_check<F: Analytic + ?Sized>(
    f: &F,
    contour: &Contour,
) -> Result<CrossingReport> {
    let opts = WindingOptions::default();
    let w = phase_trace(f, contour, &opts, false)?.log_integral().norm() / TAU;
    let n = contour.segments().len() as f64;
    let zopts = RealZeroOptions::default();
    let count = |part: fn(Complex64) -> f64| -> Result<usize> {
        let g = |s: f64| Ok(part(f.eval(contour.point(s))?));
        Ok(real_zero_count(g, (0.0, n), &zopts)?.count)
    };
    let im = count(|v| v.im)?;
    let re = count(|v| v.re)?;
    let slack = 1e-9;
    Ok(CrossingReport {
        winding_abs_over_2pi: w,
        im_crossings: im,
        re_crossings: re,
        lemma2_holds: w <= im as f64 / 2.0 + 1.0 + slack && w <= re as f64 / 2.0 + 1.0 + slack,
    })
}

/// Axis-aligned box `[lo.re, hi.re] × [lo.im, hi.im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Complex64,
    pub hi: Complex64,
}

impl Rect {
    pub fn new(lo: Complex64, hi: Complex64) -> Result<Self> {
        if !(lo.re < hi.re && lo.im < hi.im) {
            return Err(Error::InvalidSpec(format!("empty box {lo} .. {hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn center(&self) -> Complex64 {
        0.5 * (self.lo + self.hi)
    }

    /// Half the diagonal.
    pub fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo).norm()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.lo.re && z.re < self.hi.re && z.im > self.lo.im && z.im < self.hi.im
    }

    fn quarters(&self, split: Complex64) -> [Rect; 4] {
        let (lo, hi, s) = (self.lo, self.hi, split);
        [
            Rect { lo, hi: s },
            Rect {
                lo: Complex64::new(s.re, lo.im),
                hi: Complex64::new(hi.re, s.im),
            },
            Rect { lo: s, hi },
            Rect {
                lo: Complex64::new(lo.re, s.im),
                hi: Complex64::new(s.re, hi.im),
            },
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizeOptions {
    pub target_radius: f64,
    pub max_depth: u32,
    /// Known poles with their orders; box counts add the orders inside.
    pub poles: Vec<(Complex64, i64)>,
    pub winding: WindingOptions,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        Self {
            target_radius: 1e-8,
            max_depth: 48,
            poles: Vec::new(),
            winding: WindingOptions {
                initial_samples: 16,
                ..WindingOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizedZero {
    pub center: Complex64,
    pub radius: f64,
    pub multiplicity: i64,
    /// False for clusters left when subdivision could not proceed.
    pub resolved: bool,
}

fn box_count<F: Analytic + ?Sized>(f: &F, b: &Rect, opts: &LocalizeOptions) -> Result<i64> {
    let w = winding_number_with(f, &Contour::rectangle(b.lo, b.hi)?, &opts.winding)?.winding;
    let poles: i64 = opts
        .poles
        .iter()
        .filter(|p| b.contains(p.0))
        .map(|p| p.1)
        .sum();
    Ok(w + poles)
}

fn retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::ZeroOnContour { .. } | Error::PoleProximity { .. } | Error::NonConvergence(_)
    )
}

/// Offsets, as fractions of the box size, tried for the split point.
const SPLIT_OFFSETS: [(f64, f64); 6] = [
    (0.0, 0.0),
    (0.0123, -0.0171),
    (-0.0219, 0.0137),
    (0.0311, 0.0293),
    (-0.0407, -0.0383),
    (0.0577, -0.0519),
];

/// Zeros of `f` in `bx` (with multiplicity) by recursive quartering.
pub fn localize_zeros<F: Analytic + ?Sized>(
    f: &F,
    bx: Rect,
    opts: &LocalizeOptions,
) -> Result<Vec<LocalizedZero>> {
    // the top-level boundary is moved by up to 1e-6 if it meets a zero
    let mut top = None;
    let mut last_err = None;
    for k in 0..8 {
        let pad = 1.25e-7 * k as f64;
        let b = Rect {
            lo: bx.lo - Complex64::new(pad, pad),
            hi: bx.hi + Complex64::new(pad, pad),
        };
        match box_count(f, &b, opts) {
            Ok(n) => {
                top = Some((b, n));
                break;
            }
            Err(e) if retryable(&e) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let (b, n) = match top {
        Some(t) => t,
        None => return Err(last_err.unwrap()),
    };
    subdivide(f, b, n, 0, opts)
}

fn subdivide<F: Analytic + ?Sized>(
    f: &F,
    b: Rect,
    count: i64,
    depth: u32,
    opts: &LocalizeOptions,
) -> Result<Vec<LocalizedZero>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let cluster = |resolved| {
        Ok(vec![LocalizedZero {
            center: b.center(),
            radius: b.radius(),
            multiplicity: count,
            resolved,
        }])
    };
    if count < 0 {
        return cluster(false);
    }
    if b.radius() <= opts.target_radius {
        return cluster(true);
    }
    if depth >= opts.max_depth {
        return cluster(false);
    }
    let size = b.hi - b.lo;
    let mut children = None;
    for &(ox, oy) in &SPLIT_OFFSETS {
        let split = b.center() + Complex64::new(ox * size.re, oy * size.im);
        let quarters = b.quarters(split);
        let counts: Vec<Result<i64>> = quarters.par_iter().map(|q| box_count(f, q, opts)).collect();
        if counts.iter().any(|c| matches!(c, Err(e) if !retryable(e))) {
            return Err(counts.into_iter().find_map(|c| c.err()).unwrap());
        }
        if counts.iter().all(|c| c.is_ok()) {
            let counts: Vec<i64> = counts.into_iter().map(|c| c.unwrap()).collect();
            if counts.iter().sum::<i64>() == count {
                children = Some((quarters, counts));
                break;
            }
        }
    }
    let Some((quarters, counts)) = children else {
        return cluster(false);
    };
    let parts: Vec<Result<Vec<LocalizedZero>>> = quarters
        .par_iter()
        .zip(counts.par_iter())
        .map(|(q, &k)| subdivide(f, *q, k, depth + 1, opts))
        .collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
