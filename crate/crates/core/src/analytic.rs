//! Handles for analytic (or meromorphic) functions of one complex variable.

use num_complex::Complex64;

use crate::error::Result;

/// A function value together with the magnitude of the terms that produced it.
///
/// `scale` is what a value is compared against when deciding whether the
/// function vanishes numerically: a composite `P(z, f(z))` whose terms are
/// of size 1e13 but which sums to 1e-4 is not zero, and one whose terms are
/// of size 1 and sums to 1e-15 is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub value: Complex64,
    pub scale: f64,
}

pub trait Analytic: Send + Sync {
    fn eval(&self, z: Complex64) -> Result<Complex64>;

    fn deriv(&self, z: Complex64) -> Result<Complex64>;

    fn sample(&self, z: Complex64) -> Result<Sample> {
        let value = self.eval(z)?;
        Ok(Sample {
            value,
            scale: value.norm().max(1.0),
        })
    }
}

impl<T: Analytic + ?Sized> Analytic for &T {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        (**self).eval(z)
    }
    fn deriv(&self, z: Complex64) -> Result<Complex64> {
        (**self).deriv(z)
    }
    fn sample(&self, z: Complex64) -> Result<Sample> {
        (**self).sample(z)
    }
}

impl<T: Analytic + ?Sized> Analytic for Box<T> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        (**self).eval(z)
    }
    fn deriv(&self, z: Complex64) -> Result<Complex64> {
        (**self).deriv(z)
    }
    fn sample(&self, z: Complex64) -> Result<Sample> {
        (**self).sample(z)
    }
}

impl<T: Analytic + ?Sized> Analytic for std::sync::Arc<T> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        (**self).eval(z)
    }
    fn deriv(&self, z: Complex64) -> Result<Complex64> {
        (**self).deriv(z)
    }
    fn sample(&self, z: Complex64) -> Result<Sample> {
        (**self).sample(z)
    }
}

/// An entire function given by a pair of infallible closures.
pub struct FnPair<F, D> {
    f: F,
    df: D,
}

impl<F, D> FnPair<F, D>
where
    F: Fn(Complex64) -> Complex64 + Send + Sync,
    D: Fn(Complex64) -> Complex64 + Send + Sync,
{
    pub fn new(f: F, df: D) -> Self {
        Self { f, df }
    }
}

impl<F, D> Analytic for FnPair<F, D>
where
    F: Fn(Complex64) -> Complex64 + Send + Sync,
    D: Fn(Complex64) -> Complex64 + Send + Sync,
{
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.f)(z))
    }
    fn deriv(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.df)(z))
    }
}

/// The identity map, `f(z) = z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Analytic for Identity {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(z)
    }
    fn deriv(&self, _z: Complex64) -> Result<Complex64> {
        Ok(Complex64::new(1.0, 0.0))
    }
}

/// Sum of two handles; used to form `f + g` in the dominant-term estimate.
pub struct Sum<A, B>(pub A, pub B);

impl<A: Analytic, B: Analytic> Analytic for Sum<A, B> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.0.eval(z)? + self.1.eval(z)?)
    }
    fn deriv(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.0.deriv(z)? + self.1.deriv(z)?)
    }
    fn sample(&self, z: Complex64) -> Result<Sample> {
        let a = self.0.sample(z)?;
        let b = self.1.sample(z)?;
        Ok(Sample {
            value: a.value + b.value,
            scale: a.scale.max(b.scale),
        })
    }
}

/// Central-difference derivative, used by tests and by diagnostics.
pub fn central_difference<F>(f: F, z: Complex64, h: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let step = Complex64::new(h, 0.0);
    Ok((f(z + step)? - f(z - step)?) / (2.0 * h))
}

/// Difference of two handles; the remainder `g = F − f` of a dominant term.
pub struct Difference<A, B>(pub A, pub B);

impl<A: Analytic, B: Analytic> Analytic for Difference<A, B> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.0.eval(z)? - self.1.eval(z)?)
    }
    fn deriv(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.0.deriv(z)? - self.1.deriv(z)?)
    }
}
