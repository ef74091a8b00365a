//! Truncated Laurent series `Σ_{n=lo}^{hi} c_n z^n`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::analytic::Analytic;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaurentPolynomial {
    lo: i64,
    coeffs: Vec<Complex64>,
}

impl LaurentPolynomial {
    /// Coefficients `coeffs[k]` multiply `z^(lo + k)`. An empty vector is the zero polynomial.
    pub fn new(lo: i64, coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            return Self::zero();
        }
        Self { lo, coeffs }
    }

    pub fn zero() -> Self {
        Self {
            lo: 0,
            coeffs: vec![Complex64::new(0.0, 0.0)],
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self { lo: 0, coeffs: vec![c] }
    }

    pub fn monomial(n: i64) -> Self {
        Self {
            lo: n,
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// `z - a`.
    pub fn linear(a: Complex64) -> Self {
        Self {
            lo: 0,
            coeffs: vec![-a, Complex64::new(1.0, 0.0)],
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^n` (zero outside the window).
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n < self.lo || n > self.hi() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n - self.lo) as usize]
        }
    }

    /// Whether every nonzero coefficient lies in `[-n, n]`.
    pub fn within_window(&self, n: i64) -> bool {
        (self.lo..=self.hi())
            .all(|k| (-n..=n).contains(&k) || self.coeff(k) == Complex64::new(0.0, 0.0))
    }

    /// Coefficients on the symmetric window `[-n, n]`, discarding anything outside.
    pub fn window_vector(&self, n: i64) -> Vec<Complex64> {
        (-n..=n).map(|k| self.coeff(k)).collect()
    }

    pub fn from_window(n: i64, coeffs: Vec<Complex64>) -> Self {
        Self::new(-n, coeffs)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            lo: self.lo + k,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn derivative_poly(&self) -> Self {
        let coeffs = (self.lo..=self.hi())
            .map(|n| self.coeff(n) * n as f64)
            .collect();
        Self::new(self.lo - 1, coeffs)
    }

    /// Maximum coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Laurent coefficients on `[lo, hi]` of an analytic `f`, by FFT of samples on `|z| = radius`.
    ///
    /// `samples` must exceed the window width; aliasing from outside the window decays with it.
    pub fn from_samples(
        f: &dyn Analytic,
        radius: f64,
        lo: i64,
        hi: i64,
        samples: usize,
    ) -> Result<Self> {
        let width = (hi - lo + 1) as usize;
        if hi < lo || samples < width {
            return Err(Error::RejectArgument(format!(
                "need at least {width} samples for window [{lo}, {hi}], got {samples}"
            )));
        }
        let mut buf: Vec<Complex64> = (0..samples)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
                f.eval(Complex64::from_polar(radius, theta))
            })
            .collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(samples).process(&mut buf);
        let coeffs = (lo..=hi)
            .map(|n| {
                let idx = n.rem_euclid(samples as i64) as usize;
                buf[idx] / samples as f64 * radius.powi(-(n as i32))
            })
            .collect();
        Ok(Self::new(lo, coeffs))
    }

    /// As [`Self::from_samples`] for `f` analytic on the closed annulus `r ≤ |z| ≤ 1`:
    /// non-negative powers come from `|z| = 1` and negative ones from `|z| = r`, so
    /// no coefficient is divided by a small power of the radius.
    pub fn from_annulus_samples(
        f: &dyn Analytic,
        r: f64,
        lo: i64,
        hi: i64,
        samples: usize,
    ) -> Result<Self> {
        let outer = Self::from_samples(f, 1.0, lo, hi, samples)?;
        let inner = Self::from_samples(f, r, lo, hi, samples)?;
        let coeffs = (lo..=hi)
            .map(|n| if n >= 0 { outer.coeff(n) } else { inner.coeff(n) })
            .collect();
        Ok(Self::new(lo, coeffs))
    }
}

impl Analytic for LaurentPolynomial {
    fn eval(&self, z: Complex64) -> Complex64 {
        // Horner in z from the top, then divide out z^(-lo).
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.lo as i32)
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        self.derivative_poly().eval(z)
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn add(self, rhs: Self) -> LaurentPolynomial {
        let lo = self.lo.min(rhs.lo);
        let hi = self.hi().max(rhs.hi());
        LaurentPolynomial::new(lo, (lo..=hi).map(|n| self.coeff(n) + rhs.coeff(n)).collect())
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn sub(self, rhs: Self) -> LaurentPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn neg(self) -> LaurentPolynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn mul(self, rhs: Self) -> LaurentPolynomial {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LaurentPolynomial::new(self.lo + rhs.lo, coeffs)
    }
}
