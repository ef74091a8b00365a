//! Harmonic functions on the annulus by Fourier matching on the two circles.
//!
//! A harmonic function is stored as
//! `u = c0 + clog·log ρ + Σ_{n≥1} Re[(A_n ρ^n + B_n ρ^{-n}) e^{inθ}]`,
//! which is the general real harmonic function on the annulus. Its multi-valued
//! analytic completion is `c0 + clog·log z + Σ (A_n z^n + conj(B_n) z^{-n})`, so the
//! conjugate has period `2π·clog` around the inner circle.
//!
//! Green's function uses one reflection in each circle before Fourier matching:
//! `g(z, a) = -log|z - a| + log|1 - āz| + log|z - r²/ā| + h(z)`, so the boundary
//! data left for `h` have Fourier coefficients decaying like `r^n` wherever the pole is.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{AnnulusDomain, BoundarySample, OUTER};
use crate::laurent::LaurentPolynomial;

/// Truncation used when a caller does not choose one.
pub const DEFAULT_TRUNCATION: usize = 64;
/// Above this, `r^{-n}` overflows for small inner radii.
pub const MAX_TRUNCATION: usize = 512;

/// Minimal interface shared by Fourier representations and Green's functions.
pub trait HarmonicFunction {
    fn value(&self, z: Complex64) -> f64;
    /// `∂u/∂ρ` at `z`.
    fn radial_derivative(&self, z: Complex64) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct HarmonicRepresentation {
    pub c0: f64,
    pub clog: f64,
    /// `n -> (A_n, B_n)` for `n ≥ 1`.
    pub modes: BTreeMap<usize, (Complex64, Complex64)>,
}

impl HarmonicRepresentation {
    pub fn constant(c: f64) -> Self {
        Self {
            c0: c,
            ..Self::default()
        }
    }

    /// Highest stored frequency.
    pub fn degree(&self) -> usize {
        self.modes.keys().next_back().copied().unwrap_or(0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            c0: self.c0 * s,
            clog: self.clog * s,
            modes: self
                .modes
                .iter()
                .map(|(&n, &(a, b))| (n, (a * s, b * s)))
                .collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut modes = self.modes.clone();
        for (&n, &(a, b)) in &other.modes {
            let e = modes.entry(n).or_insert((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
            e.0 += a;
            e.1 += b;
        }
        Self {
            c0: self.c0 + other.c0,
            clog: self.clog + other.clog,
            modes,
        }
    }

    /// Single-valued part of the analytic completion (everything except `clog·log z`).
    pub fn completion_laurent(&self) -> LaurentPolynomial {
        let n = self.degree() as i64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (2 * n + 1) as usize];
        coeffs[n as usize] = Complex64::new(self.c0, 0.0);
        for (&k, &(a, b)) in &self.modes {
            let k = k as i64;
            coeffs[(n + k) as usize] += a;
            coeffs[(n - k) as usize] += b.conj();
        }
        LaurentPolynomial::new(-n, coeffs)
    }

    /// Complex Fourier coefficients (two-sided, `-n..=n`) of the trace on `|z| = radius`.
    pub fn trace_coefficients(&self, radius: f64, n: usize) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; 2 * n + 1];
        out[n] = Complex64::new(self.c0 + self.clog * radius.ln(), 0.0);
        for (&k, &(a, b)) in self.modes.range(1..=n) {
            let c = (a * radius.powi(k as i32) + b * radius.powi(-(k as i32))) * 0.5;
            out[n + k] = c;
            out[n - k] = c.conj();
        }
        out
    }
}

impl HarmonicFunction for HarmonicRepresentation {
    fn value(&self, z: Complex64) -> f64 {
        let rho = z.norm();
        let mut acc = self.c0 + self.clog * rho.ln();
        let zbar_inv = 1.0 / z.conj();
        let mut zp = Complex64::new(1.0, 0.0);
        let mut wp = Complex64::new(1.0, 0.0);
        let mut last = 0usize;
        for (&n, &(a, b)) in &self.modes {
            if n == last + 1 {
                zp *= z;
                wp *= zbar_inv;
            } else {
                zp = z.powi(n as i32);
                wp = zbar_inv.powi(n as i32);
            }
            last = n;
            acc += (a * zp + b * wp).re;
        }
        acc
    }

    fn radial_derivative(&self, z: Complex64) -> f64 {
        let rho = z.norm();
        let e = z / rho;
        let mut acc = self.clog / rho;
        for (&n, &(a, b)) in &self.modes {
            let nf = n as f64;
            let up = rho.powi(n as i32 - 1);
            let down = rho.powi(-(n as i32) - 1);
            acc += (nf * (a * up - b * down) * e.powi(n as i32)).re;
        }
        acc
    }
}

/// Solves for the `n`-th mode given Re-convention data `a` (outer) and `b` (inner).
fn mode_coefficients(r: f64, n: usize, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let rn = r.powi(n as i32);
    let rinv = r.powi(-(n as i32));
    let det = rinv - rn;
    debug_assert!(det > 0.0, "radial Wronskian vanished");
    ((a * rinv - b) / det, (b - a * rn) / det)
}

/// Harmonic function from Re-convention boundary modes: outer data
/// `outer0 + Σ Re[outer[n-1] e^{inθ}]`, inner data likewise.
pub(crate) fn from_real_modes(
    r: f64,
    outer0: f64,
    inner0: f64,
    outer: &[Complex64],
    inner: &[Complex64],
) -> HarmonicRepresentation {
    let zero = Complex64::new(0.0, 0.0);
    let n_max = outer.len().max(inner.len());
    let mut modes = BTreeMap::new();
    for n in 1..=n_max {
        let a = outer.get(n - 1).copied().unwrap_or(zero);
        let b = inner.get(n - 1).copied().unwrap_or(zero);
        modes.insert(n, mode_coefficients(r, n, a, b));
    }
    HarmonicRepresentation {
        c0: outer0,
        clog: (inner0 - outer0) / r.ln(),
        modes,
    }
}

fn check_truncation(n: usize) -> Result<()> {
    if n > MAX_TRUNCATION {
        Err(Error::RejectArgument(format!(
            "truncation {n} exceeds the supported maximum {MAX_TRUNCATION}"
        )))
    } else {
        Ok(())
    }
}

/// Dirichlet problem with boundary data given as two-sided complex Fourier
/// coefficients (`data[k]` multiplies `e^{i(k-n)θ}`) on each circle.
pub fn solve_dirichlet(
    domain: &AnnulusDomain,
    outer_data: &[Complex64],
    inner_data: &[Complex64],
    n: usize,
) -> Result<HarmonicRepresentation> {
    check_truncation(n)?;
    for (name, data) in [("outer", outer_data), ("inner", inner_data)] {
        if data.len() != 2 * n + 1 {
            return Err(Error::RejectArgument(format!(
                "{name} data must have 2N+1 = {} coefficients, got {}",
                2 * n + 1,
                data.len()
            )));
        }
        for k in 0..=n {
            let (p, q) = (data[n + k], data[n - k]);
            let scale = 1.0f64.max(p.norm());
            if (p - q.conj()).norm() > 1e-12 * scale {
                return Err(Error::RejectArgument(format!(
                    "{name} data is not conjugate symmetric at frequency {k}"
                )));
            }
        }
    }
    let outer: Vec<Complex64> = (1..=n).map(|k| 2.0 * outer_data[n + k]).collect();
    let inner: Vec<Complex64> = (1..=n).map(|k| 2.0 * inner_data[n + k]).collect();
    Ok(from_real_modes(
        domain.inner_radius(),
        outer_data[n].re,
        inner_data[n].re,
        &outer,
        &inner,
    ))
}

/// Harmonic measure of the outer (`j = 1`) or inner (`j = 2`) circle.
pub fn harmonic_measure(domain: &AnnulusDomain, j: usize) -> Result<HarmonicRepresentation> {
    let l = domain.modulus();
    match j {
        // log(|z|/r) / log(1/r)
        1 => Ok(HarmonicRepresentation {
            c0: 1.0,
            clog: 1.0 / l,
            modes: BTreeMap::new(),
        }),
        // log|z| / log r
        2 => Ok(HarmonicRepresentation {
            c0: 0.0,
            clog: -1.0 / l,
            modes: BTreeMap::new(),
        }),
        _ => Err(Error::RejectArgument(format!(
            "harmonic measure index must be 1 or 2, got {j}"
        ))),
    }
}

/// Green's function with pole `pole`, `g = -log|z-a| + log|1-āz| + log|z-a*| + corrector`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenFunction {
    pub pole: Complex64,
    pub inner_radius: f64,
    pub corrector: HarmonicRepresentation,
}

impl GreenFunction {
    /// Reflection of the pole in the inner circle, `r²/ā`.
    pub fn inner_image(&self) -> Complex64 {
        self.inner_radius * self.inner_radius / self.pole.conj()
    }

    /// Period of the conjugate around the inner circle, along loops separating
    /// the pole from the outer circle. Equals `2π ω₂(pole)`.
    pub fn conjugate_period(&self) -> f64 {
        2.0 * PI * (1.0 + self.corrector.clog)
    }

    /// Analytic completion `p = g + i g̃` with the log terms as separate factors:
    /// `exp(-p) = (z - a) / ((1 - āz)(1 - a*/z)) · z^{-(1 + clog)} · exp(-F)`,
    /// where `F` is the single-valued part returned here.
    pub fn completion_laurent(&self) -> LaurentPolynomial {
        self.corrector.completion_laurent()
    }
}

impl HarmonicFunction for GreenFunction {
    fn value(&self, z: Complex64) -> f64 {
        let a = self.pole;
        -(z - a).norm().ln()
            + (1.0 - a.conj() * z).norm().ln()
            + (z - self.inner_image()).norm().ln()
            + self.corrector.value(z)
    }

    fn radial_derivative(&self, z: Complex64) -> f64 {
        let a = self.pole;
        let e = z / z.norm();
        -(e / (z - a)).re
            + (-a.conj() * e / (1.0 - a.conj() * z)).re
            + (e / (z - self.inner_image())).re
            + self.corrector.radial_derivative(z)
    }
}

/// Green's function of the annulus with pole `pole`, truncated at frequency `n`.
pub fn green(domain: &AnnulusDomain, pole: Complex64, n: usize) -> Result<GreenFunction> {
    if domain.boundary_distance(pole) < 1e-9 || !pole.is_finite() {
        return Err(Error::RejectGeometry(format!(
            "pole {pole} is within 1e-9 of the boundary or outside the annulus"
        )));
    }
    green_interior(domain, pole, n)
}

/// As [`green`] but accepting poles arbitrarily close to Γ; used for the tails of
/// infinite products, whose zeros accumulate at the boundary.
pub(crate) fn green_interior(domain: &AnnulusDomain, pole: Complex64, n: usize) -> Result<GreenFunction> {
    domain.require_interior(pole, "pole")?;
    if n < 8 {
        return Err(Error::RejectArgument(format!("green needs N >= 8, got {n}")));
    }
    check_truncation(n)?;
    let r = domain.inner_radius();
    let image = r * r / pole.conj();
    // Outer data for the corrector: -log|ζ - a*| = Σ Re[conj(a*)^k e^{ikθ}] / k.
    let outer: Vec<Complex64> = (1..=n)
        .map(|k| image.conj().powi(k as i32) / k as f64)
        .collect();
    // Inner data: log(|a|/r) - log|1 - āζ| = log(|a|/r) + Σ Re[(ā r)^k e^{ikθ}] / k.
    let ar = pole.conj() * r;
    let inner: Vec<Complex64> = (1..=n).map(|k| ar.powi(k as i32) / k as f64).collect();
    let corrector = from_real_modes(r, 0.0, (pole.norm() / r).ln(), &outer, &inner);
    Ok(GreenFunction {
        pole,
        inner_radius: r,
        corrector,
    })
}

/// Outward normal derivative at a boundary sample.
pub fn normal_derivative(h: &dyn HarmonicFunction, s: &BoundarySample) -> f64 {
    let d = h.radial_derivative(s.point);
    if s.component_index == OUTER {
        d
    } else {
        -d
    }
}

/// Harmonic-measure density `-(1/2π) ∂g/∂n` with respect to arclength.
pub fn harmonic_measure_density(g: &GreenFunction, s: &BoundarySample) -> f64 {
    -normal_derivative(g, s) / (2.0 * PI)
}

/// The Schottky function `s₁ = (∂ω₁/∂n) / (∂g/∂n)` of the annulus, with `g`
/// the Green's function at the domain's base point.
#[derive(Debug, Clone)]
pub struct SchottkyFunction {
    omega: HarmonicRepresentation,
    green: GreenFunction,
}

impl SchottkyFunction {
    pub fn new(domain: &AnnulusDomain, j: usize, n: usize) -> Result<Self> {
        if j != 1 {
            return Err(Error::RejectArgument(format!(
                "the annulus has a single Schottky function (j = 1), got j = {j}"
            )));
        }
        Ok(Self {
            omega: harmonic_measure(domain, 1)?,
            green: green(domain, domain.base_point(), n)?,
        })
    }

    pub fn green(&self) -> &GreenFunction {
        &self.green
    }

    pub fn eval(&self, s: &BoundarySample) -> Result<f64> {
        let dg = normal_derivative(&self.green, s);
        if dg.abs() < 1e-14 {
            return Err(Error::DivideByZero(dg));
        }
        Ok(normal_derivative(&self.omega, s) / dg)
    }
}

/// `s_j` at a boundary sample.
pub fn schottky(domain: &AnnulusDomain, j: usize, s: &BoundarySample) -> Result<f64> {
    SchottkyFunction::new(domain, j, DEFAULT_TRUNCATION)?.eval(s)
}

/// Period of the harmonic conjugate around the inner circle.
pub fn conjugate_period(h: &HarmonicRepresentation) -> f64 {
    2.0 * PI * h.clog
}

/// `h + i h̃` on the annulus cut along the positive real axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticCompletion {
    pub single_valued: LaurentPolynomial,
    pub log_coeff: f64,
}

/// `log z` with `arg z ∈ [0, 2π)`.
pub fn log_cut(z: Complex64) -> Complex64 {
    let mut arg = z.arg();
    if arg < 0.0 {
        arg += 2.0 * PI;
    }
    Complex64::new(z.norm().ln(), arg)
}

impl AnalyticCompletion {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        use crate::analytic::Analytic;
        self.single_valued.eval(z) + self.log_coeff * log_cut(z)
    }

    /// Jump across the cut, `2πi·clog`.
    pub fn period(&self) -> Complex64 {
        Complex64::new(0.0, 2.0 * PI * self.log_coeff)
    }

    /// `exp(k · completion)` is single-valued iff `k·clog` is an integer.
    pub fn exp_is_single_valued(&self, k: f64, tol: f64) -> bool {
        let p = k * self.log_coeff;
        (p - p.round()).abs() <= tol
    }
}

pub fn analytic_completion(h: &HarmonicRepresentation) -> AnalyticCompletion {
    AnalyticCompletion {
        single_valued: h.completion_laurent(),
        log_coeff: h.clog,
    }
}
