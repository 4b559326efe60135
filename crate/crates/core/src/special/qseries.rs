//! Truncated q-expansions with explicit tail majorants.
//!
//! Coefficients of `Q = 1 + 240Σσ₃(n)qⁿ`, `R = 1 − 504Σσ₅(n)qⁿ`,
//! `Δ = (Q³ − R²)/1728` and `j = Q³/Δ` are generated once, in exact integer
//! arithmetic where they are later divided, and cached.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::special::hyp::SeriesValue;

/// Bound on `|aₙ|` for the coefficients beyond the truncation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientBound {
    /// `|aₙ| ≤ c·nᵏ`
    Power { c: f64, k: i32 },
    /// `|aₙ| ≤ e^{4π√n} / (√2·n^{3/4})`, the envelope of the j coefficients
    ExpSqrt,
}

impl CoefficientBound {
    fn at(&self, n: f64) -> f64 {
        match *self {
            CoefficientBound::Power { c, k } => c * n.powi(k),
            CoefficientBound::ExpSqrt => {
                (4.0 * std::f64::consts::PI * n.sqrt()).exp()
                    / (std::f64::consts::SQRT_2 * n.powf(0.75))
            }
        }
    }

    /// Upper bound on successive majorant ratios `bound(n+1)/bound(n)` for
    /// all `n ≥ from`, excluding the `|q|` factor.
    fn ratio_from(&self, from: f64) -> f64 {
        match *self {
            CoefficientBound::Power { k, .. } => ((from + 1.0) / from).powi(k.max(0)),
            CoefficientBound::ExpSqrt => (2.0 * std::f64::consts::PI / from.sqrt()).exp(),
        }
    }

    /// Bound for the coefficients `n·aₙ` of `q·d/dq`.
    fn differentiated(&self) -> DerivedBound {
        DerivedBound(*self)
    }
}

struct DerivedBound(CoefficientBound);

impl DerivedBound {
    fn at(&self, n: f64) -> f64 {
        n * self.0.at(n)
    }
    fn ratio_from(&self, from: f64) -> f64 {
        self.0.ratio_from(from) * (from + 1.0) / from
    }
}

/// `Σ_{n ≥ n₀} aₙ qⁿ` truncated at `n₀ + coefficients.len() − 1`.
#[derive(Debug, Clone)]
pub struct QSeries {
    pub offset: i32,
    pub coefficients: Vec<f64>,
    pub bound: CoefficientBound,
}

impl QSeries {
    pub fn truncation_order(&self) -> i32 {
        self.offset + self.coefficients.len() as i32 - 1
    }

    /// Bound on `|Σ_{n > N} aₙ qⁿ|` at `|q| = r` for truncation order `N`.
    pub fn tail_bound(&self, r: f64, order: i32) -> f64 {
        geometric_tail(
            r,
            (order + 1) as f64,
            |n| self.bound.at(n),
            |n| self.bound.ratio_from(n),
        )
    }

    /// Evaluates with the fewest terms whose tail bound is below
    /// `rel_tol·|value|`.
    pub fn eval(&self, q: Complex64, rel_tol: f64) -> Result<SeriesValue> {
        self.eval_inner(q, rel_tol, false)
    }

    /// `q·dS/dq`, the term-wise derivative, with its own tail bound.
    pub fn eval_q_derivative(&self, q: Complex64, rel_tol: f64) -> Result<SeriesValue> {
        self.eval_inner(q, rel_tol, true)
    }

    /// Evaluates with exactly `terms` coefficients (no adaptivity).
    pub fn eval_truncated(&self, q: Complex64, terms: usize) -> SeriesValue {
        let terms = terms.min(self.coefficients.len());
        let mut power = q.powi(self.offset);
        let mut acc = Complex64::new(0.0, 0.0);
        for &a in &self.coefficients[..terms] {
            acc += a * power;
            power *= q;
        }
        let order = self.offset + terms as i32 - 1;
        SeriesValue {
            value: acc,
            tail_bound: self.tail_bound(q.norm(), order),
            terms,
        }
    }

    fn eval_inner(&self, q: Complex64, rel_tol: f64, derivative: bool) -> Result<SeriesValue> {
        let r = q.norm();
        if r >= 1.0 {
            return Err(Error::OutOfRange(format!("|q| = {r} >= 1")));
        }
        let dbound = self.bound.differentiated();
        let mut power = q.powi(self.offset);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut tail = f64::INFINITY;
        for (idx, &a) in self.coefficients.iter().enumerate() {
            let n = self.offset + idx as i32;
            acc += if derivative {
                (n as f64) * a * power
            } else {
                a * power
            };
            power *= q;
            if n < 1 {
                continue;
            }
            let next = (n + 1) as f64;
            tail = if derivative {
                geometric_tail(r, next, |m| dbound.at(m), |m| dbound.ratio_from(m))
            } else {
                geometric_tail(r, next, |m| self.bound.at(m), |m| self.bound.ratio_from(m))
            };
            if tail <= rel_tol * acc.norm() || tail == 0.0 {
                return Ok(SeriesValue {
                    value: acc,
                    tail_bound: tail,
                    terms: idx + 1,
                });
            }
        }
        Err(Error::PrecisionLoss {
            achieved: tail / acc.norm().max(f64::MIN_POSITIVE),
            terms: self.coefficients.len(),
        })
    }
}

/// `Σ_{n ≥ from} bound(n)·rⁿ` bounded by its first term over `1 − ρ`.
fn geometric_tail(
    r: f64,
    from: f64,
    bound: impl Fn(f64) -> f64,
    ratio: impl Fn(f64) -> f64,
) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let rho = ratio(from) * r;
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    bound(from) * (from * r.ln()).exp() / (1.0 - rho)
}

/// Number of coefficients kept for `Q` and `R` (enough for `|q| ≤ 0.95`).
const QR_TERMS: usize = 2400;
/// Number of coefficients kept for `Δ` and `j`.
const CUSP_TERMS: usize = 160;

fn divisor_sums(n_max: usize, k: u32) -> Vec<f64> {
    let mut sums = vec![0u128; n_max + 1];
    for d in 1..=n_max {
        let dk = (d as u128).pow(k);
        let mut m = d;
        while m <= n_max {
            sums[m] += dk;
            m += d;
        }
    }
    sums.into_iter().map(|s| s as f64).collect()
}

fn integer_divisor_sums(n_max: usize, k: u32) -> Vec<BigInt> {
    let mut sums = vec![BigInt::zero(); n_max + 1];
    for d in 1..=n_max {
        let dk = BigInt::from(d).pow(k);
        let mut m = d;
        while m <= n_max {
            sums[m] += &dk;
            m += d;
        }
    }
    sums
}

fn mul_truncated(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n];
    for (i, ai) in a.iter().enumerate().take(n) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Exact integer coefficients of the cusp-form and j expansions.
struct CuspTables {
    q_cubed: Vec<BigInt>,
    delta: Vec<BigInt>,
    /// j coefficients starting at q⁻¹
    j: Vec<BigInt>,
}

fn cusp_tables() -> &'static CuspTables {
    static TABLES: OnceLock<CuspTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let n = CUSP_TERMS + 2;
        let s3 = integer_divisor_sums(n, 3);
        let s5 = integer_divisor_sums(n, 5);
        let mut q: Vec<BigInt> = s3.iter().map(|s| s * 240).collect();
        q[0] = BigInt::from(1);
        let mut r: Vec<BigInt> = s5.iter().map(|s| s * -504).collect();
        r[0] = BigInt::from(1);
        let q2 = mul_truncated(&q, &q, n);
        let q3 = mul_truncated(&q2, &q, n);
        let r2 = mul_truncated(&r, &r, n);
        let delta: Vec<BigInt> = q3
            .iter()
            .zip(&r2)
            .map(|(a, b)| {
                let diff = a - b;
                debug_assert!((&diff % BigInt::from(1728)).is_zero());
                diff / 1728
            })
            .collect();
        // Δ = q·D(q) with D(0) = 1, so j = Q³/Δ = q⁻¹·Q³/D and the
        // coefficients of Q³/D follow from D·(Q³/D) = Q³ without division.
        let d: Vec<BigInt> = delta[1..].to_vec();
        let mut j = vec![BigInt::zero(); n - 1];
        for m in 0..n - 1 {
            let mut acc = q3[m].clone();
            for k in 1..=m {
                acc -= &d[k] * &j[m - k];
            }
            j[m] = acc;
        }
        CuspTables {
            q_cubed: q3,
            delta,
            j,
        }
    })
}

fn to_f64(v: &[BigInt]) -> Vec<f64> {
    v.iter()
        .map(|x| x.to_f64().unwrap_or(f64::INFINITY))
        .collect()
}

/// `Q(q) = 1 + 240·Σσ₃(n)qⁿ`.
pub fn eisenstein_q_series() -> &'static QSeries {
    static S: OnceLock<QSeries> = OnceLock::new();
    S.get_or_init(|| {
        let mut c: Vec<f64> = divisor_sums(QR_TERMS, 3)
            .into_iter()
            .map(|s| 240.0 * s)
            .collect();
        c[0] = 1.0;
        QSeries {
            offset: 0,
            coefficients: c,
            // σ₃(n) ≤ ζ(3)·n³
            bound: CoefficientBound::Power {
                c: 240.0 * 1.202_056_903_2,
                k: 3,
            },
        }
    })
}

/// `R(q) = 1 − 504·Σσ₅(n)qⁿ`.
pub fn eisenstein_r_series() -> &'static QSeries {
    static S: OnceLock<QSeries> = OnceLock::new();
    S.get_or_init(|| {
        let mut c: Vec<f64> = divisor_sums(QR_TERMS, 5)
            .into_iter()
            .map(|s| -504.0 * s)
            .collect();
        c[0] = 1.0;
        QSeries {
            offset: 0,
            coefficients: c,
            // σ₅(n) ≤ ζ(5)·n⁵
            bound: CoefficientBound::Power {
                c: 504.0 * 1.036_927_755_2,
                k: 5,
            },
        }
    })
}

/// `Δ(q) = q∏(1 − qⁿ)²⁴ = (Q³ − R²)/1728`, coefficients from the exact
/// integer division.
pub fn delta_series() -> &'static QSeries {
    static S: OnceLock<QSeries> = OnceLock::new();
    S.get_or_init(|| QSeries {
        offset: 0,
        coefficients: to_f64(&cusp_tables().delta[..CUSP_TERMS]),
        // |τ(n)| ≤ d(n)·n^{11/2} ≤ 2·n⁶
        bound: CoefficientBound::Power { c: 2.0, k: 6 },
    })
}

/// `Q³` as a series, used by the j evaluation.
pub fn eisenstein_q_cubed_series() -> &'static QSeries {
    static S: OnceLock<QSeries> = OnceLock::new();
    S.get_or_init(|| QSeries {
        offset: 0,
        coefficients: to_f64(&cusp_tables().q_cubed[..CUSP_TERMS]),
        // Q³ = E₁₂ + (432000/691)·Δ, so |aₙ| ≤ (65520/691)·ζ(11)·n¹¹ + 1250·n⁶
        bound: CoefficientBound::Power { c: 1350.0, k: 11 },
    })
}

/// `j(q) = q⁻¹ + 744 + 196884q + …`, obtained by dividing `Q³` by `Δ`.
pub fn j_series() -> &'static QSeries {
    static S: OnceLock<QSeries> = OnceLock::new();
    S.get_or_init(|| QSeries {
        offset: -1,
        coefficients: to_f64(&cusp_tables().j[..CUSP_TERMS]),
        bound: CoefficientBound::ExpSqrt,
    })
}

/// Exact integer j coefficients `c(−1), c(0), c(1), …`.
pub fn j_coefficients_exact(count: usize) -> Vec<BigInt> {
    cusp_tables().j.iter().take(count).cloned().collect()
}
