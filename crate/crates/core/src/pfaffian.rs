//! Pfaffian chains on a real interval, their numerical validation, the
//! Khovanskii zero bound, and an empirical sign-change zero counter.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::hyp::{hyp2f1_with, Hyp2F1Options};

/// `2^{r(r−1)/2}·β·(α+β)^r`, exact. `β = 0` gives 0.
pub fn khovanskii_zero_bound(r: u32, alpha: u32, beta: u32) -> BigUint {
    if beta == 0 {
        return BigUint::zero();
    }
    let shift = (r as u64) * (r as u64).saturating_sub(1) / 2;
    let power = BigUint::from(alpha + beta).pow(r);
    (BigUint::one() << shift) * BigUint::from(beta) * power
}

/// Real polynomial in `(x, f₁, …, f_k)` stored as a coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    nvars: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl MultiPoly {
    pub fn new(nvars: usize) -> Self {
        Self {
            nvars,
            terms: Vec::new(),
        }
    }

    /// Adds `coeff·∏ v_k^{e_k}` given `(variable, exponent)` pairs.
    pub fn term(mut self, coeff: f64, powers: &[(usize, u32)]) -> Self {
        let mut exps = vec![0u32; self.nvars];
        for &(v, e) in powers {
            assert!(v < self.nvars, "variable {v} out of range");
            exps[v] += e;
        }
        if coeff != 0.0 {
            self.terms.push((exps, coeff));
        }
        self
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Highest variable index with a nonzero exponent.
    pub fn highest_variable(&self) -> Option<usize> {
        self.terms
            .iter()
            .filter_map(|(e, _)| e.iter().rposition(|&k| k > 0))
            .max()
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(vars)
                    .fold(*c, |acc, (&k, &v)| acc * v.powi(k as i32))
            })
            .sum()
    }
}

pub type MemberFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// `f_i′ = P_i(x, f₁, …, f_i)` on `(a, b)` with independent member evaluators.
#[derive(Clone)]
pub struct PfaffianChain {
    pub name: String,
    pub interval: (f64, f64),
    rhs: Vec<MultiPoly>,
    members: Vec<MemberFn>,
    /// Degree stated for the construction in the literature, if it differs.
    pub stated_alpha: Option<u32>,
}

impl fmt::Debug for PfaffianChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PfaffianChain")
            .field("name", &self.name)
            .field("interval", &self.interval)
            .field("rhs", &self.rhs)
            .finish_non_exhaustive()
    }
}

impl PfaffianChain {
    pub fn new(
        name: impl Into<String>,
        interval: (f64, f64),
        rhs: Vec<MultiPoly>,
        members: Vec<MemberFn>,
    ) -> Result<Self> {
        if rhs.is_empty() || rhs.len() != members.len() {
            return Err(Error::InvalidSpec("rhs and member counts differ".into()));
        }
        if !(interval.0 < interval.1) {
            return Err(Error::InvalidSpec("empty interval".into()));
        }
        for (i, p) in rhs.iter().enumerate() {
            if p.nvars() > rhs.len() + 1 {
                return Err(Error::InvalidSpec(format!(
                    "rhs {i} has too many variables"
                )));
            }
            if let Some(v) = p.highest_variable() {
                if v > i + 1 {
                    return Err(Error::InvalidSpec(format!(
                        "rhs {} uses f{} (not triangular)",
                        i + 1,
                        v
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            interval,
            rhs,
            members,
            stated_alpha: None,
        })
    }

    pub fn order(&self) -> usize {
        self.rhs.len()
    }

    /// Maximum total degree over the right-hand sides.
    pub fn alpha(&self) -> u32 {
        self.rhs
            .iter()
            .map(MultiPoly::total_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn rhs(&self) -> &[MultiPoly] {
        &self.rhs
    }

    pub fn member(&self, i: usize, x: f64) -> Result<f64> {
        (self.members[i])(x)
    }

    /// `[x, f₁(x), …, f_r(x)]`.
    pub fn point(&self, x: f64) -> Result<Vec<f64>> {
        let mut v = Vec::with_capacity(self.order() + 1);
        v.push(x);
        for i in 0..self.order() {
            v.push(self.member(i, x)?);
        }
        Ok(v)
    }

    /// Copy with `delta` added to the constant term of `rhs[i]`.
    pub fn corrupted(&self, i: usize, delta: f64) -> Self {
        let mut out = self.clone();
        let n = out.rhs[i].nvars();
        out.rhs[i] = out.rhs[i].clone().term(delta, &[(0, 0)]);
        debug_assert_eq!(out.rhs[i].nvars(), n);
        out
    }
}

/// Polynomial in chain members; degree `β` is the outer total degree.
#[derive(Debug, Clone)]
pub struct PfaffianFunction {
    pub chain: PfaffianChain,
    pub outer: MultiPoly,
}

impl PfaffianFunction {
    pub fn beta(&self) -> u32 {
        self.outer.total_degree()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.outer.eval(&self.chain.point(x)?))
    }

    pub fn khovanskii_bound(&self) -> BigUint {
        khovanskii_zero_bound(self.chain.order() as u32, self.chain.alpha(), self.beta())
    }
}

/// Options for evaluating chain members near the interval ends.
fn chain_hyp_options() -> Hyp2F1Options {
    Hyp2F1Options {
        delta: 1e-6,
        ..Hyp2F1Options::default()
    }
}

fn hyp_real(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    Ok(
        hyp2f1_with(a, b, c, Complex64::new(x, 0.0), &chain_hyp_options())?
            .value
            .re,
    )
}

/// Contiguous-relation coefficients shared by both chain builders.
#[derive(Debug, Clone, Copy)]
struct Gauss {
    a: f64,
    b: f64,
    c: f64,
}

impl Gauss {
    fn k(&self) -> f64 {
        (self.c - self.a) * (self.c - self.b) / self.c
    }
    fn s(&self) -> f64 {
        self.a + self.b - self.c
    }

    /// Right-hand sides of `h = F/F(c+)`, `G = F(c+)`, `F`, scaled by `sign`,
    /// with `1/x` in variable `inv_x` and `1/(1−x)` in `inv_1mx`.
    fn rhs(&self, n: usize, sign: f64, inv_x: usize, inv_1mx: usize, h: usize) -> [MultiPoly; 3] {
        let (g, f) = (h + 1, h + 2);
        let c = self.c;
        let h_rhs = MultiPoly::new(n)
            .term(sign * self.k(), &[(inv_1mx, 1)])
            .term(sign * self.s(), &[(inv_1mx, 1), (h, 1)])
            .term(sign * c, &[(inv_x, 1), (h, 1)])
            .term(-sign * c, &[(inv_x, 1), (h, 2)]);
        let g_rhs = MultiPoly::new(n)
            .term(sign * c, &[(inv_x, 1), (g, 1), (h, 1)])
            .term(-sign * c, &[(inv_x, 1), (g, 1)]);
        let f_rhs = MultiPoly::new(n)
            .term(sign * self.k(), &[(inv_1mx, 1), (g, 1)])
            .term(sign * self.s(), &[(inv_1mx, 1), (f, 1)]);
        [h_rhs, g_rhs, f_rhs]
    }

    /// `(1/F)′ = −F′/F²` with `F·(1/F) = 1` used to lower one term.
    fn reciprocal_rhs(&self, n: usize, sign: f64, inv_1mx: usize, g: usize, r: usize) -> MultiPoly {
        MultiPoly::new(n)
            .term(-sign * self.k(), &[(inv_1mx, 1), (g, 1), (r, 2)])
            .term(-sign * self.s(), &[(inv_1mx, 1), (r, 1)])
    }

    fn members(&self, arg: fn(f64) -> f64) -> [MemberFn; 3] {
        let Gauss { a, b, c } = *self;
        [
            Arc::new(move |x| {
                let t = arg(x);
                Ok(hyp_real(a, b, c, t)? / hyp_real(a, b, c + 1.0, t)?)
            }),
            Arc::new(move |x| hyp_real(a, b, c + 1.0, arg(x))),
            Arc::new(move |x| hyp_real(a, b, c, arg(x))),
        ]
    }
}

/// The six-member chain `1/x, 1/(1−x), F/F(c+), F(c+), F, 1/F` on `(0, 1)`.
///
/// `F′` is taken from the contiguous relation directly, which keeps its
/// right-hand side at degree 2; `(1/F)′` then has degree 4.
pub fn build_hypergeometric_chain(a: f64, b: f64, c: f64) -> Result<PfaffianChain> {
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::Domain(format!("c = {c} is a non-positive integer")));
    }
    let g = Gauss { a, b, c };
    let n = 7;
    let [h, gc, f] = g.rhs(n, 1.0, 1, 2, 3);
    let rhs = vec![
        MultiPoly::new(n).term(-1.0, &[(1, 2)]),
        MultiPoly::new(n).term(1.0, &[(2, 2)]),
        h,
        gc,
        f,
        g.reciprocal_rhs(n, 1.0, 2, 4, 6),
    ];
    let [mh, mg, mf] = g.members(|x| x);
    let members: Vec<MemberFn> = vec![
        Arc::new(|x| Ok(1.0 / x)),
        Arc::new(|x| Ok(1.0 / (1.0 - x))),
        mh,
        mg,
        mf,
        Arc::new(move |x| Ok(1.0 / hyp_real(a, b, c, x)?)),
    ];
    let mut chain = PfaffianChain::new("hypergeometric", (0.0, 1.0), rhs, members)?;
    chain.stated_alpha = Some(3);
    Ok(chain)
}

const SEXTIC: Gauss = Gauss {
    a: 1.0 / 6.0,
    b: 5.0 / 6.0,
    c: 1.0,
};

fn upper(y: f64) -> f64 {
    0.5 + 0.5 * y
}

fn lower(y: f64) -> f64 {
    0.5 - 0.5 * y
}

/// Nine-member chain in `y ∈ (0, 1)` carrying `F(½ ± y/2)`, `F = ₂F₁(1/6, 5/6; 1)`.
///
/// Members: `1/u, 1/v, h(u), G(u), F(u), h(v), G(v), F(v), 1/F(v)` with
/// `u = ½ + y/2`, `v = ½ − y/2`, so that `1/(1−u) = 1/v` and the ratio is
/// the degree-2 monomial `F(u)·(1/F(v))`.
pub fn build_ratio_chain() -> Result<PfaffianChain> {
    let g = SEXTIC;
    let n = 10;
    let [hu, gu, fu] = g.rhs(n, 0.5, 1, 2, 3);
    let [hv, gv, fv] = g.rhs(n, -0.5, 2, 1, 6);
    let rhs = vec![
        MultiPoly::new(n).term(-0.5, &[(1, 2)]),
        MultiPoly::new(n).term(0.5, &[(2, 2)]),
        hu,
        gu,
        fu,
        hv,
        gv,
        fv,
        g.reciprocal_rhs(n, -0.5, 1, 7, 9),
    ];
    let [mhu, mgu, mfu] = g.members(upper);
    let [mhv, mgv, mfv] = g.members(lower);
    let members: Vec<MemberFn> = vec![
        Arc::new(|y| Ok(1.0 / upper(y))),
        Arc::new(|y| Ok(1.0 / lower(y))),
        mhu,
        mgu,
        mfu,
        mhv,
        mgv,
        mfv,
        Arc::new(|y| Ok(1.0 / hyp_real(SEXTIC.a, SEXTIC.b, SEXTIC.c, lower(y))?)),
    ];
    let mut chain = PfaffianChain::new("ratio", (0.0, 1.0), rhs, members)?;
    chain.stated_alpha = Some(2);
    Ok(chain)
}

/// `F(½ + y/2)/F(½ − y/2)` as a Pfaffian function of the ratio chain.
pub fn ratio_function() -> Result<PfaffianFunction> {
    let chain = build_ratio_chain()?;
    let outer = MultiPoly::new(chain.order() + 1).term(1.0, &[(5, 1), (9, 1)]);
    Ok(PfaffianFunction { chain, outer })
}

pub const CHAIN_FD_STEP: f64 = 1e-6;
pub const CHAIN_ENDPOINT_OFFSET: f64 = 1e-3;

/// Worst residual with its location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainResidual {
    pub max_residual: f64,
    pub member: usize,
    pub x: f64,
}

/// Largest `|f_i′ − P_i(x, f₁, …, f_i)| / max(1, |P_i|)` on `n_samples`
/// equispaced points, `f_i′` by a five-point central difference.
///
/// The relative form keeps the figure meaningful where members such as
/// `1/x` grow like `10³` near the ends of `(0, 1)`.
pub fn chain_residual(chain: &PfaffianChain, n_samples: usize) -> Result<ChainResidual> {
    let (a, b) = chain.interval;
    let lo = a + CHAIN_ENDPOINT_OFFSET;
    let hi = b - CHAIN_ENDPOINT_OFFSET;
    let n = n_samples.max(2);
    let h = CHAIN_FD_STEP;
    let worst = (0..n)
        .into_par_iter()
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let at = |x: f64| chain.point(x).map_err(|e| located(e, x));
            let p0 = at(x)?;
            let stencil = [at(x - 2.0 * h)?, at(x - h)?, at(x + h)?, at(x + 2.0 * h)?];
            let mut best = ChainResidual {
                max_residual: 0.0,
                member: 0,
                x,
            };
            for i in 0..chain.order() {
                let m = i + 1;
                let fd = (stencil[0][m] - 8.0 * stencil[1][m] + 8.0 * stencil[2][m]
                    - stencil[3][m])
                    / (12.0 * h);
                let p = chain.rhs[i].eval(&p0);
                let r = (fd - p).abs() / p.abs().max(1.0);
                if !(r <= best.max_residual) {
                    best = ChainResidual {
                        max_residual: r,
                        member: i + 1,
                        x,
                    };
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(worst.into_iter().fold(
        ChainResidual {
            max_residual: 0.0,
            member: 0,
            x: lo,
        },
        |acc, r| {
            if r.max_residual > acc.max_residual || r.max_residual.is_nan() {
                r
            } else {
                acc
            }
        },
    ))
}

fn located(e: Error, x: f64) -> Error {
    Error::Domain(format!("member evaluation failed at x = {x}: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealZeroOptions {
    pub initial_points: usize,
    /// Refine where `|f|` falls below this fraction of the local scale.
    pub refine_ratio: f64,
    pub max_refine_depth: u32,
    pub root_width: f64,
    /// Local minima of `|f|` below this fraction of the scale are flagged.
    pub tangential_ratio: f64,
    /// Samples this close to zero (relative) count as vanishing.
    pub plateau_ratio: f64,
    pub endpoint_offset: f64,
}

impl Default for RealZeroOptions {
    fn default() -> Self {
        Self {
            initial_points: 1 << 12,
            refine_ratio: 1e-3,
            max_refine_depth: 12,
            root_width: 1e-10,
            tangential_ratio: 1e-9,
            plateau_ratio: 1e-15,
            endpoint_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealZeroCount {
    /// Sign-change roots; a lower bound on the zero count.
    pub count: usize,
    pub roots: Vec<f64>,
    /// Suspected even-order zeros, not included in `count`.
    pub tangential: Vec<f64>,
    pub evaluations: usize,
}

/// Counts sign changes of `f` on `[a + δ, b − δ]` with adaptive refinement
/// near small values, bisecting each bracket to `root_width`.
pub fn real_zero_count<F>(
    f: F,
    interval: (f64, f64),
    opts: &RealZeroOptions,
) -> Result<RealZeroCount>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let lo = interval.0 + opts.endpoint_offset;
    let hi = interval.1 - opts.endpoint_offset;
    if !(lo < hi) {
        return Err(Error::InvalidSpec(format!("empty interval ({lo}, {hi})")));
    }
    let n = opts.initial_points.max(8);
    let grid: Vec<(f64, f64)> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let x = if k == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / n as f64
            };
            Ok((x, f(x)?))
        })
        .collect::<Result<_>>()?;
    let mut evaluations = grid.len();

    let window = 8usize;
    let local_scale = |k: usize| {
        let a = k.saturating_sub(window);
        let b = (k + window).min(grid.len() - 1);
        grid[a..=b].iter().map(|p| p.1.abs()).fold(0.0, f64::max)
    };

    // refined sample sequence
    let mut pts: Vec<(f64, f64)> = vec![grid[0]];
    for k in 0..grid.len() - 1 {
        let scale = local_scale(k).max(local_scale(k + 1));
        refine(
            &f,
            grid[k],
            grid[k + 1],
            scale,
            opts,
            0,
            &mut pts,
            &mut evaluations,
        )?;
    }

    // vanishing and tangency are judged against the initial grid nearby,
    // since a restriction to a contour can span many orders of magnitude
    let mags: Vec<f64> = pts.iter().map(|p| p.1.abs()).collect();
    let near_scale: Vec<f64> = pts
        .iter()
        .map(|p| {
            let k = (((p.0 - lo) / (hi - lo)) * n as f64)
                .floor()
                .clamp(0.0, n as f64) as usize;
            local_scale(k)
        })
        .collect();
    let is_zero = |i: usize| mags[i] <= opts.plateau_ratio * near_scale[i];
    let mut roots = Vec::new();
    let mut tangential = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    let mut zero_run: Vec<f64> = Vec::new();
    for (i, &(x, v)) in pts.iter().enumerate() {
        if is_zero(i) {
            zero_run.push(x);
            if zero_run.len() > 2 {
                return Err(Error::Ambiguity {
                    a: zero_run[0],
                    b: x,
                });
            }
            continue;
        }
        if let Some((xl, vl)) = last {
            if !zero_run.is_empty() {
                let mid = zero_run[zero_run.len() / 2];
                if vl.signum() != v.signum() {
                    roots.push(mid);
                } else {
                    tangential.push(mid);
                }
            } else if vl.signum() != v.signum() {
                roots.push(bisect(&f, xl, vl, x, v, opts.root_width, &mut evaluations)?);
            }
        }
        zero_run.clear();
        // local minimum of |f| without a sign change
        if i > 0 && i + 1 < pts.len() {
            let (l, r) = (pts[i - 1].1, pts[i + 1].1);
            if v.abs() < l.abs()
                && v.abs() < r.abs()
                && l.signum() == v.signum()
                && r.signum() == v.signum()
                && v.abs() < opts.tangential_ratio * near_scale[i]
            {
                tangential.push(x);
            }
        }
        last = Some((x, v));
    }
    Ok(RealZeroCount {
        count: roots.len(),
        roots,
        tangential,
        evaluations,
    })
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &F,
    p0: (f64, f64),
    p1: (f64, f64),
    scale: f64,
    opts: &RealZeroOptions,
    depth: u32,
    out: &mut Vec<(f64, f64)>,
    evaluations: &mut usize,
) -> Result<()>
where
    F: Fn(f64) -> Result<f64>,
{
    let small = p0.1.abs().min(p1.1.abs()) < opts.refine_ratio * scale;
    if small && depth < opts.max_refine_depth {
        let xm = 0.5 * (p0.0 + p1.0);
        let pm = (xm, f(xm)?);
        *evaluations += 1;
        refine(f, p0, pm, scale, opts, depth + 1, out, evaluations)?;
        refine(f, pm, p1, scale, opts, depth + 1, out, evaluations)?;
    } else {
        out.push(p1);
    }
    Ok(())
}

fn bisect<F>(
    f: &F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    _fb: f64,
    width: f64,
    evaluations: &mut usize,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    while (b - a).abs() > width {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m)?;
        *evaluations += 1;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
