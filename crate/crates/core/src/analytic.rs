//! Pointwise evaluators for analytic functions on the annulus.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

/// An analytic function evaluable anywhere in the (closed) annulus.
pub trait Analytic: Send + Sync {
    fn eval(&self, z: Complex64) -> Complex64;

    /// Complex derivative; central differences unless overridden.
    fn derivative(&self, z: Complex64) -> Complex64 {
        let h = 1e-6 * z.norm().max(1e-3);
        let hr = Complex64::new(h, 0.0);
        let hi = Complex64::new(0.0, h);
        // Average of the real and imaginary directions cancels the leading error of each.
        let dr = (self.eval(z + hr) - self.eval(z - hr)) / (2.0 * hr);
        let di = (self.eval(z + hi) - self.eval(z - hi)) / (2.0 * hi);
        0.5 * (dr + di)
    }
}

/// Shared, type-erased evaluator.
pub type AnalyticRef = Arc<dyn Analytic>;

/// Wraps a closure as an [`Analytic`] evaluator.
pub struct FnAnalytic<F>(pub F);

impl<F> Analytic for FnAnalytic<F>
where
    F: Fn(Complex64) -> Complex64 + Send + Sync,
{
    fn eval(&self, z: Complex64) -> Complex64 {
        (self.0)(z)
    }
}

impl<F> fmt::Debug for FnAnalytic<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnAnalytic")
    }
}

pub fn from_fn<F>(f: F) -> AnalyticRef
where
    F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
{
    Arc::new(FnAnalytic(f))
}

impl<T: Analytic + ?Sized> Analytic for Arc<T> {
    fn eval(&self, z: Complex64) -> Complex64 {
        (**self).eval(z)
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        (**self).derivative(z)
    }
}

impl<T: Analytic + ?Sized> Analytic for &T {
    fn eval(&self, z: Complex64) -> Complex64 {
        (**self).eval(z)
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        (**self).derivative(z)
    }
}

/// Pointwise product of two evaluators.
pub fn product(a: AnalyticRef, b: AnalyticRef) -> AnalyticRef {
    from_fn(move |z| a.eval(z) * b.eval(z))
}

/// Pointwise quotient `a / b`.
pub fn quotient(a: AnalyticRef, b: AnalyticRef) -> AnalyticRef {
    from_fn(move |z| a.eval(z) / b.eval(z))
}
