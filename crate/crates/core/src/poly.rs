//! Bivariate complex polynomials `P(X, Y)` and their composition `P(z, f(z))`
//! with an analytic function, including the constant Rouché shift
//! `P(z, f(z)) + ε·e^{iθ}`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analytic::{Analytic, Sample};
use crate::error::{Error, Result};

/// Dense coefficient table, `coeffs[i][j]` multiplies `Xⁱ Yʲ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePolynomial {
    coeffs: Vec<Vec<Complex64>>,
}

impl BivariatePolynomial {
    /// Builds a polynomial from a rectangular table, trimming trailing rows
    /// and columns that are entirely zero.
    pub fn new(coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        if coeffs.is_empty() || coeffs[0].is_empty() {
            return Err(Error::InvalidSpec("empty coefficient table".into()));
        }
        let width = coeffs[0].len();
        if coeffs.iter().any(|row| row.len() != width) {
            return Err(Error::InvalidSpec(
                "coefficient table rows differ in length".into(),
            ));
        }
        if coeffs
            .iter()
            .flatten()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidSpec("non-finite coefficient".into()));
        }
        let mut p = Self { coeffs };
        p.trim();
        Ok(p)
    }

    pub fn zero() -> Self {
        Self {
            coeffs: vec![vec![Complex64::new(0.0, 0.0)]],
        }
    }

    /// Builds from `(i, j, c)` triples meaning `c·Xⁱ·Yʲ`; repeated monomials add.
    pub fn from_terms(terms: &[(usize, usize, Complex64)]) -> Self {
        let dx = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let dy = terms.iter().map(|t| t.1).max().unwrap_or(0);
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); dy + 1]; dx + 1];
        for &(i, j, c) in terms {
            coeffs[i][j] += c;
        }
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        let zero = |c: &Complex64| c.re == 0.0 && c.im == 0.0;
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().iter().all(zero) {
            self.coeffs.pop();
        }
        while self.coeffs[0].len() > 1 && self.coeffs.iter().all(|r| zero(r.last().unwrap())) {
            for row in &mut self.coeffs {
                row.pop();
            }
        }
    }

    pub fn deg_x(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn deg_y(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    /// Degree in either variable, the `d` of the zero-count bounds.
    pub fn degree(&self) -> usize {
        self.deg_x().max(self.deg_y())
    }

    pub fn total_degree(&self) -> usize {
        self.terms().map(|(i, j, _)| i + j).max().unwrap_or(0)
    }

    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| c.norm() == 0.0)
    }

    /// Nonzero terms as `(i, j, c)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.coeffs.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| c.norm() != 0.0)
                .map(move |(j, &c)| (i, j, c))
        })
    }

    /// Coefficient of `Yʲ` as a polynomial in `X` (ascending powers).
    pub fn y_coefficient(&self, j: usize) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|row| row.get(j).copied().unwrap_or_default())
            .collect()
    }

    /// True when every coefficient is real.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| c.im == 0.0)
    }

    /// Horner in `Y` for each row, then Horner in `X`.
    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, row| {
                acc * x + horner(row, y)
            })
    }

    /// Value and both partial derivatives `(P, P_X, P_Y)`.
    pub fn eval_with_partials(
        &self,
        x: Complex64,
        y: Complex64,
    ) -> (Complex64, Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut px, mut py) = (zero, zero, zero);
        for row in self.coeffs.iter().rev() {
            let (r, dr) = horner_with_derivative(row, y);
            px = px * x + p;
            p = p * x + r;
            py = py * x + dr;
        }
        (p, px, py)
    }

    /// `Σ |c_ij|·|x|ⁱ·|y|ʲ`, the size of the terms cancelling in `eval`.
    pub fn magnitude(&self, x: Complex64, y: Complex64) -> f64 {
        let (ax, ay) = (x.norm(), y.norm());
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            acc * ax + row.iter().rev().fold(0.0, |a, c| a * ay + c.norm())
        })
    }

    /// The highest power `l` of `Y`, the degree `n` of its coefficient in
    /// `X`, and that coefficient's leading term. This is the term that
    /// dominates `P(z, j(z))` at the cusp.
    pub fn leading_cusp_term(&self) -> (usize, usize, Complex64) {
        let l = self.deg_y();
        let col = self.y_coefficient(l);
        let n = col.iter().rposition(|c| c.norm() != 0.0).unwrap_or(0);
        (l, n, col[n])
    }
}

fn horner(row: &[Complex64], y: Complex64) -> Complex64 {
    row.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * y + c)
}

fn horner_with_derivative(row: &[Complex64], y: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    row.iter()
        .rev()
        .fold((zero, zero), |(v, d), &c| (v * y + c, d * y + v))
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    deg_x: usize,
    deg_y: usize,
    coeffs: Vec<Vec<[f64; 2]>>,
}

impl Serialize for BivariatePolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            deg_x: self.deg_x(),
            deg_y: self.deg_y(),
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BivariatePolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        if raw.coeffs.len() != raw.deg_x + 1 || raw.coeffs.iter().any(|r| r.len() != raw.deg_y + 1)
        {
            return Err(D::Error::custom(format!(
                "coefficient table is not ({}+1) x ({}+1)",
                raw.deg_x, raw.deg_y
            )));
        }
        let coeffs = raw
            .coeffs
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect()
            })
            .collect();
        BivariatePolynomial::new(coeffs).map_err(D::Error::custom)
    }
}

/// `P(z, f(z))`.
pub fn eval_composed<F: Analytic + ?Sized>(
    p: &BivariatePolynomial,
    f: &F,
    z: Complex64,
) -> Result<Complex64> {
    Ok(p.eval(z, f.eval(z)?))
}

/// `P_X(z, f(z)) + P_Y(z, f(z))·f′(z)`.
pub fn derivative_composed<F: Analytic + ?Sized>(
    p: &BivariatePolynomial,
    f: &F,
    z: Complex64,
) -> Result<Complex64> {
    let (_, px, py) = p.eval_with_partials(z, f.eval(z)?);
    Ok(px + py * f.deriv(z)?)
}

/// `P(z, f(z)) + ε·e^{iθ}`; with `ε = 0` this is the plain composite.
#[derive(Debug, Clone)]
pub struct PerturbedComposite<F> {
    pub base: BivariatePolynomial,
    pub inner: F,
    pub epsilon: f64,
    pub theta: f64,
}

impl<F: Analytic> PerturbedComposite<F> {
    pub fn unperturbed(base: BivariatePolynomial, inner: F) -> Self {
        Self {
            base,
            inner,
            epsilon: 0.0,
            theta: 0.0,
        }
    }

    pub fn shift(&self) -> Complex64 {
        Complex64::from_polar(self.epsilon, self.theta)
    }
}

impl<F: Analytic> Analytic for PerturbedComposite<F> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(eval_composed(&self.base, &self.inner, z)? + self.shift())
    }

    fn deriv(&self, z: Complex64) -> Result<Complex64> {
        derivative_composed(&self.base, &self.inner, z)
    }

    fn sample(&self, z: Complex64) -> Result<Sample> {
        let y = self.inner.eval(z)?;
        Ok(Sample {
            value: self.base.eval(z, y) + self.shift(),
            scale: self.base.magnitude(z, y) + self.epsilon,
        })
    }
}

const THETA_GRID: usize = 64;
const THETA_GRID_MAX: usize = 1 << 12;

/// Rouché shift with `ε = ½·min |P(z, f(z))|` over the boundary samples.
pub fn perturb<F: Analytic>(
    base: BivariatePolynomial,
    inner: F,
    boundary: &[Complex64],
) -> Result<PerturbedComposite<F>> {
    let values = composite_values(&base, &inner, boundary)?;
    if values.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::CannotPerturb);
    }
    let min = values
        .iter()
        .map(|v| v.norm())
        .fold(f64::INFINITY, f64::min);
    let theta = choose_theta(&values, 0.5 * min)?;
    Ok(PerturbedComposite {
        base,
        inner,
        epsilon: 0.5 * min,
        theta,
    })
}

/// Rouché shift with a caller-chosen `ε`, for contours on which `P∘f`
/// vanishes. `θ` is chosen so that `|P_ε| > ε/4` at every sample.
pub fn perturb_with_epsilon<F: Analytic>(
    base: BivariatePolynomial,
    inner: F,
    boundary: &[Complex64],
    epsilon: f64,
) -> Result<PerturbedComposite<F>> {
    if !(epsilon >= 0.0) {
        return Err(Error::Precondition(format!(
            "epsilon {epsilon} must be >= 0"
        )));
    }
    let values = composite_values(&base, &inner, boundary)?;
    if values.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::CannotPerturb);
    }
    let theta = if epsilon == 0.0 {
        0.0
    } else {
        choose_theta(&values, epsilon)?
    };
    Ok(PerturbedComposite {
        base,
        inner,
        epsilon,
        theta,
    })
}

fn composite_values<F: Analytic>(
    base: &BivariatePolynomial,
    inner: &F,
    boundary: &[Complex64],
) -> Result<Vec<Complex64>> {
    if boundary.is_empty() {
        return Err(Error::Precondition("no boundary samples".into()));
    }
    boundary
        .iter()
        .map(|&z| eval_composed(base, inner, z))
        .collect()
}

/// Best angle on a 64-point grid, refined dyadically until the shifted
/// values clear `ε/4`.
fn choose_theta(values: &[Complex64], epsilon: f64) -> Result<f64> {
    let mut n = THETA_GRID;
    while n <= THETA_GRID_MAX {
        let (theta, min) = (0..n)
            .map(|k| {
                let theta = TAU * k as f64 / n as f64;
                let shift = Complex64::from_polar(epsilon, theta);
                let m = values
                    .iter()
                    .map(|v| (v + shift).norm())
                    .fold(f64::INFINITY, f64::min);
                (theta, m)
            })
            .fold((0.0, f64::NEG_INFINITY), |best, cand| {
                if cand.1 > best.1 {
                    cand
                } else {
                    best
                }
            });
        if min > 0.25 * epsilon {
            return Ok(theta);
        }
        n *= 2;
    }
    Err(Error::CannotPerturb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{FnPair, Identity};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trims_zero_rows_and_columns() {
        let p = BivariatePolynomial::new(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert_eq!((p.deg_x(), p.deg_y()), (0, 0));
    }

    #[test]
    fn rejects_ragged_table() {
        assert!(BivariatePolynomial::new(vec![vec![c(1.0, 0.0)], vec![]]).is_err());
    }

    #[test]
    fn projection_and_cancellation() {
        let x = BivariatePolynomial::from_terms(&[(1, 0, c(1.0, 0.0))]);
        let z = c(3.0, 4.0);
        assert_eq!(eval_composed(&x, &Identity, z).unwrap(), z);

        let y_minus_x =
            BivariatePolynomial::from_terms(&[(0, 1, c(1.0, 0.0)), (1, 0, c(-1.0, 0.0))]);
        assert_eq!(
            eval_composed(&y_minus_x, &Identity, c(-0.7, 2.5)).unwrap(),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn product_rule() {
        // P = X·Y, f(z0) = a, f'(z0) = b  =>  a + z0·b
        let a = c(2.0, -1.0);
        let b = c(0.5, 3.0);
        let z0 = c(1.5, 0.25);
        let f = FnPair::new(move |z| a + b * (z - z0), move |_| b);
        let p = BivariatePolynomial::from_terms(&[(1, 1, c(1.0, 0.0))]);
        let d = derivative_composed(&p, &f, z0).unwrap();
        assert!((d - (a + z0 * b)).norm() < 1e-14);
    }

    #[test]
    fn partials_match_definition() {
        let p = BivariatePolynomial::from_terms(&[
            (2, 1, c(1.0, 2.0)),
            (0, 3, c(-0.5, 0.0)),
            (1, 0, c(0.0, 1.0)),
        ]);
        let (x, y) = (c(0.3, -0.2), c(1.1, 0.4));
        let (v, px, py) = p.eval_with_partials(x, y);
        let ev = c(1.0, 2.0) * x * x * y - 0.5 * y * y * y + c(0.0, 1.0) * x;
        let epx = 2.0 * c(1.0, 2.0) * x * y + c(0.0, 1.0);
        let epy = c(1.0, 2.0) * x * x - 1.5 * y * y;
        assert!((v - ev).norm() < 1e-14);
        assert!((px - epx).norm() < 1e-14);
        assert!((py - epy).norm() < 1e-14);
    }

    #[test]
    fn json_round_trip_and_shape_check() {
        let p = BivariatePolynomial::from_terms(&[(1, 2, c(1.0, -2.0)), (0, 0, c(3.0, 0.0))]);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with("{\"deg_x\":1,\"deg_y\":2,\"coeffs\":[[[3.0,0.0]"));
        let back: BivariatePolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"deg_x":1,"deg_y":0,"coeffs":[[[1,0]]]}"#;
        assert!(serde_json::from_str::<BivariatePolynomial>(bad).is_err());
    }

    #[test]
    fn epsilon_is_half_the_boundary_minimum() {
        // P = Y, f = identity, samples with minimum modulus 2
        let p = BivariatePolynomial::from_terms(&[(0, 1, c(1.0, 0.0))]);
        let samples = [c(2.0, 0.0), c(0.0, 3.0), c(-4.0, 0.0)];
        let pc = perturb(p, Identity, &samples).unwrap();
        assert_eq!(pc.epsilon, 1.0);
        for z in samples {
            assert!(pc.eval(z).unwrap().norm() > 0.25);
        }
    }

    #[test]
    fn zero_epsilon_reproduces_composite() {
        let p = BivariatePolynomial::from_terms(&[(1, 1, c(1.0, 1.0)), (0, 0, c(2.0, 0.0))]);
        let samples = [c(1.0, 0.0), c(0.0, 1.0)];
        let pc = perturb_with_epsilon(p.clone(), Identity, &samples, 0.0).unwrap();
        for z in [c(0.3, 0.1), c(-1.0, 2.0)] {
            assert_eq!(
                pc.eval(z).unwrap(),
                eval_composed(&p, &Identity, z).unwrap()
            );
        }
    }

    #[test]
    fn all_zero_boundary_cannot_perturb() {
        let p = BivariatePolynomial::from_terms(&[(0, 1, c(1.0, 0.0)), (1, 0, c(-1.0, 0.0))]);
        let err = perturb(p, Identity, &[c(1.0, 0.0), c(0.0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::CannotPerturb));
    }

    #[test]
    fn leading_cusp_term_picks_top_y_power() {
        let p = BivariatePolynomial::from_terms(&[
            (3, 1, c(1.0, 0.0)),
            (2, 2, c(0.0, 5.0)),
            (0, 2, c(1.0, 0.0)),
        ]);
        assert_eq!(p.leading_cusp_term(), (2, 2, c(0.0, 5.0)));
    }
}
