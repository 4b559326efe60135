//! Gauss hypergeometric series `₂F₁(a, b; c; z)` for `|z| < 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Options {
    /// Arguments with `|z| > 1 − delta` are rejected.
    pub delta: f64,
    /// Summation stops once the tail bound is below `rel_tol·|value|`.
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for Hyp2F1Options {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            rel_tol: 1e-16,
            max_terms: 50_000_000,
        }
    }
}

/// A truncated series value together with a bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Neumaier-compensated complex accumulator.
#[derive(Default)]
struct Accumulator {
    re: (f64, f64),
    im: (f64, f64),
}

impl Accumulator {
    fn add(&mut self, v: Complex64) {
        fn step((s, c): &mut (f64, f64), x: f64) {
            let t = *s + x;
            if s.abs() >= x.abs() {
                *c += (*s - t) + x;
            } else {
                *c += (x - t) + *s;
            }
            *s = t;
        }
        step(&mut self.re, v.re);
        step(&mut self.im, v.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Sums `t_{n0} + t_{n0+1} + …` with
/// `t_{n+1} = t_n · z·(a+n)(b+n)/((c+n)(n+1))`, starting from `offset`.
///
/// For `n ≥ N` past every parameter's sign change the factors
/// `(a+n)/(n+1)` and `(b+n)/(c+n)` are monotone in `n`, so their suprema
/// over the tail are attained at `N` or in the limit 1; this gives a
/// geometric majorant for the tail.
fn ratio_series(
    offset: Complex64,
    first: Complex64,
    n0: usize,
    (a, b, c): (f64, f64, f64),
    z: Complex64,
    opts: &Hyp2F1Options,
    cap: usize,
) -> std::result::Result<SeriesValue, SeriesValue> {
    let az = z.norm();
    let mut acc = Accumulator::default();
    acc.add(offset);
    let mut term = first;
    let mut n = n0;
    let monotone_from = [-a, -b, -c, -1.0]
        .iter()
        .fold(0.0f64, |m, &v| m.max(v))
        .ceil() as usize
        + 1;
    loop {
        acc.add(term);
        let nf = n as f64;
        let next = term * z * ((a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)));
        n += 1;
        if next.norm() == 0.0 {
            // a or b is a non-positive integer: the series terminates
            return Ok(SeriesValue {
                value: acc.value(),
                tail_bound: 0.0,
                terms: n - n0,
            });
        }
        term = next;
        if n >= monotone_from {
            let nf = n as f64;
            let rho = az
                * ((a + nf).abs() / (nf + 1.0)).max(1.0)
                * ((b + nf).abs() / (c + nf).abs()).max(1.0);
            if rho < 1.0 {
                let tail = term.norm() / (1.0 - rho);
                let value = acc.value();
                if tail <= opts.rel_tol * value.norm() || tail == 0.0 {
                    return Ok(SeriesValue {
                        value,
                        tail_bound: tail,
                        terms: n - n0,
                    });
                }
                if n - n0 >= cap {
                    return Err(SeriesValue {
                        value,
                        tail_bound: tail,
                        terms: n - n0,
                    });
                }
            } else if n - n0 >= cap {
                return Err(SeriesValue {
                    value: acc.value(),
                    tail_bound: f64::INFINITY,
                    terms: n - n0,
                });
            }
        }
    }
}

fn check_args(c: f64, z: Complex64) -> Result<()> {
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!("c = {c} is a non-positive integer")));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    Ok(())
}

fn finish(
    r: std::result::Result<SeriesValue, SeriesValue>,
    z: Complex64,
    opts: &Hyp2F1Options,
) -> Result<SeriesValue> {
    match r {
        Ok(v) if z.norm() <= 1.0 - opts.delta + 1e-15 => Ok(v),
        Ok(v) | Err(v) => Err(Error::PrecisionLoss {
            achieved: v.tail_bound / v.value.norm().max(f64::MIN_POSITIVE),
            terms: v.terms,
        }),
    }
}

/// Term budget when `z` is past the admissible radius: enough to report
/// how far the series got, without running to `max_terms`.
fn budget(z: Complex64, opts: &Hyp2F1Options) -> usize {
    if z.norm() <= 1.0 - opts.delta + 1e-15 {
        opts.max_terms
    } else {
        ((50.0 / opts.delta) as usize).min(opts.max_terms)
    }
}

/// `₂F₁(a, b; c; z)` with its tail bound.
pub fn hyp2f1_with(
    a: f64,
    b: f64,
    c: f64,
    z: Complex64,
    opts: &Hyp2F1Options,
) -> Result<SeriesValue> {
    check_args(c, z)?;
    let one = Complex64::new(1.0, 0.0);
    let r = ratio_series(
        Complex64::new(0.0, 0.0),
        one,
        0,
        (a, b, c),
        z,
        opts,
        budget(z, opts),
    );
    finish(r, z, opts)
}

/// `₂F₁(a, b; c; z)` with default options.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    Ok(hyp2f1_with(a, b, c, z, &Hyp2F1Options::default())?.value)
}

/// Real-argument convenience wrapper.
pub fn hyp2f1_real(a: f64, b: f64, c: f64, x: f64, opts: &Hyp2F1Options) -> Result<f64> {
    Ok(hyp2f1_with(a, b, c, Complex64::new(x, 0.0), opts)?.value.re)
}

/// `dF/dz` by term-wise differentiation: `Σ n·t_n·z^{n−1}`, which is the
/// series `(ab/c)·₂F₁(a+1, b+1; c+1; z)`.
pub fn hyp2f1_derivative(
    a: f64,
    b: f64,
    c: f64,
    z: Complex64,
    opts: &Hyp2F1Options,
) -> Result<SeriesValue> {
    check_args(c, z)?;
    let lead = a * b / c;
    let r = ratio_series(
        Complex64::new(0.0, 0.0),
        Complex64::new(lead, 0.0),
        0,
        (a + 1.0, b + 1.0, c + 1.0),
        z,
        opts,
        budget(z, opts),
    );
    finish(r, z, opts)
}

/// `(c−1)·₂F₁(a, b; c−1; z)`, summed in a form that stays finite at
/// `c = 1`: the `n`-th term is `(a)_n (b)_n zⁿ / ((c)_{n−1} n!)` for `n ≥ 1`.
pub fn hyp2f1_lowered_scaled(
    a: f64,
    b: f64,
    c: f64,
    z: Complex64,
    opts: &Hyp2F1Options,
) -> Result<SeriesValue> {
    check_args(c, z)?;
    let r = ratio_series(
        Complex64::new(c - 1.0, 0.0),
        a * b * z,
        1,
        (a, b, c - 1.0),
        z,
        opts,
        budget(z, opts),
    );
    finish(r, z, opts)
}

/// Residuals of the two contiguous relations
///
/// ```text
/// z·F′ = (c−1)·(F(c−) − F)
/// z·F′ = z·[(c−a)(c−b)·F(c+) + c(a+b−c)·F] / (c(1−z))
/// ```
///
/// Each residual is `|lhs − rhs| / max(1, |z·F′|)`.
pub fn gauss_relation_residuals(a: f64, b: f64, c: f64, z: f64) -> Result<(f64, f64)> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::Domain(format!("z = {z} outside (0, 1)")));
    }
    if is_nonpositive_integer(c + 1.0) {
        return Err(Error::Domain(format!(
            "c + 1 = {} is a non-positive integer",
            c + 1.0
        )));
    }
    let opts = Hyp2F1Options {
        rel_tol: 1e-16,
        ..Hyp2F1Options::default()
    };
    let zc = Complex64::new(z, 0.0);
    let f = hyp2f1_with(a, b, c, zc, &opts)?.value;
    let df = hyp2f1_derivative(a, b, c, zc, &opts)?.value;
    let f_up = hyp2f1_with(a, b, c + 1.0, zc, &opts)?.value;
    let f_down_scaled = hyp2f1_lowered_scaled(a, b, c, zc, &opts)?.value;

    let lhs = zc * df;
    let rhs1 = f_down_scaled - (c - 1.0) * f;
    let rhs2 = zc * ((c - a) * (c - b) * f_up + c * (a + b - c) * f) / (c * (1.0 - z));
    let scale = lhs.norm().max(1.0);
    Ok(((lhs - rhs1).norm() / scale, (lhs - rhs2).norm() / scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn value_at_origin_is_one() {
        for &(a, b, c) in &[
            (0.3, 1.7, 2.2),
            (-1.5, 4.0, 0.5),
            (1.0 / 6.0, 5.0 / 6.0, 1.0),
        ] {
            assert_eq!(hyp2f1(a, b, c, re(0.0)).unwrap(), re(1.0));
        }
    }

    #[test]
    fn log_closed_form() {
        // 2F1(1,1;2;z) = -ln(1-z)/z
        let v = hyp2f1(1.0, 1.0, 2.0, re(0.5)).unwrap();
        assert!(
            (v.re - 2.0 * std::f64::consts::LN_2).abs() < 1e-14,
            "{}",
            v.re - 2.0 * std::f64::consts::LN_2
        );
        let z = Complex64::new(0.3, 0.4);
        let v = hyp2f1(1.0, 1.0, 2.0, z).unwrap();
        let exact = -(1.0 - z).ln() / z;
        assert!((v - exact).norm() < 1e-14);
    }

    #[test]
    fn terminating_series() {
        // 2F1(-2, b; c; z) = 1 - 2bz/c + b(b+1)z²/(c(c+1))
        let (b, c, z) = (1.5, 0.7, 0.9);
        let exact = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
        let v = hyp2f1_with(-2.0, b, c, re(z), &Hyp2F1Options::default()).unwrap();
        assert!((v.value.re - exact).abs() < 1e-14);
        assert_eq!(v.tail_bound, 0.0);
    }

    #[test]
    fn reference_value_sextic_parameters() {
        // mpmath: hyp2f1(1/6, 5/6, 1, 0.3) = 1.0501305055253937502888...
        let v = hyp2f1(1.0 / 6.0, 5.0 / 6.0, 1.0, re(0.3)).unwrap();
        assert!((v.re - 1.050_130_505_525_393_8).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_c_and_near_unit_argument() {
        assert!(matches!(
            hyp2f1(1.0, 1.0, -2.0, re(0.1)),
            Err(Error::Domain(_))
        ));
        let err = hyp2f1(1.0 / 6.0, 5.0 / 6.0, 1.0, re(0.9999)).unwrap_err();
        match err {
            Error::PrecisionLoss { achieved, .. } => assert!(achieved > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn smaller_delta_admits_arguments_near_one() {
        let opts = Hyp2F1Options {
            delta: 1e-5,
            ..Default::default()
        };
        let v = hyp2f1_with(0.5, 0.5, 2.0, re(0.9999), &opts).unwrap();
        assert!(v.tail_bound <= 1e-14 * v.value.norm());
    }

    #[test]
    fn derivative_matches_central_difference() {
        let (a, b, c) = (0.4, 1.3, 1.9);
        let z = Complex64::new(0.35, -0.2);
        let h = 1e-6;
        let fd = (hyp2f1(a, b, c, z + h).unwrap() - hyp2f1(a, b, c, z - h).unwrap()) / (2.0 * h);
        let d = hyp2f1_derivative(a, b, c, z, &Hyp2F1Options::default())
            .unwrap()
            .value;
        assert!((d - fd).norm() < 1e-8);
    }

    #[test]
    fn lowered_scaled_matches_direct_series_off_c_equal_one() {
        let (a, b, c, z) = (0.3, 0.8, 2.5, re(0.6));
        let direct = (c - 1.0) * hyp2f1(a, b, c - 1.0, z).unwrap();
        let scaled = hyp2f1_lowered_scaled(a, b, c, z, &Hyp2F1Options::default())
            .unwrap()
            .value;
        assert!((direct - scaled).norm() < 1e-13);
    }

    #[test]
    fn contiguous_relations_at_sextic_parameters() {
        let (r1, r2) = gauss_relation_residuals(1.0 / 6.0, 5.0 / 6.0, 1.0, 0.3).unwrap();
        assert!(r1 < 1e-10 && r2 < 1e-10, "{r1} {r2}");
    }

    #[test]
    fn contiguous_relations_near_origin() {
        let (r1, r2) = gauss_relation_residuals(0.7, 1.1, 1.4, 1e-9).unwrap();
        assert!(r1 < 1e-15 && r2 < 1e-15);
    }
}
