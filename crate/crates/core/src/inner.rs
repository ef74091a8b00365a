//! Inner functions of the annulus: generalized Blaschke factors and products,
//! singular inner functions of atomic measures, the period remover
//! `exp[λ(ω₁ + iω̃₁)] = e^λ z^{λ/log(1/r)}`, and the tests around them
//! (constant boundary modulus, orthogonality, Schottky fits, division bounds).
//!
//! Every inner function is stored as
//! `phase · e^λ · z^k · Π (z−a)/((1−āz)(1−a*/z)) · exp(E(z) + Σ c·H_ζ(z))`
//! with `E` a Laurent polynomial, `H_ζ` Herglotz kernels at the atoms and
//! `k` the integer left over once λ has cancelled the period.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::analytic::Analytic;
use crate::error::{Error, Result};
use crate::geometry::{all_boundary_nodes, boundary_nodes_shifted, AnnulusDomain, INNER, OUTER};
use crate::harmonic::{
    from_real_modes, green, green_interior, GreenFunction, HarmonicFunction, HarmonicRepresentation,
    SchottkyFunction, DEFAULT_TRUNCATION, MAX_TRUNCATION,
};
use crate::laurent::LaurentPolynomial;
use crate::spaces::{Quadrature, SpaceTag};

type ZeroGenerator = Arc<dyn Fn(usize) -> Complex64 + Send + Sync>;

/// Zeros with multiplicity: an explicit prefix, optionally continued by a generator
/// `j ↦ z_j` (`j = prefix.len() + 1, …`).
#[derive(Clone)]
pub struct ZeroSet {
    prefix: Vec<Complex64>,
    tail: Option<ZeroGenerator>,
}

impl fmt::Debug for ZeroSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZeroSet")
            .field("prefix", &self.prefix)
            .field("lazy", &self.tail.is_some())
            .finish()
    }
}

impl ZeroSet {
    pub fn finite(points: Vec<Complex64>) -> Self {
        Self { prefix: points, tail: None }
    }

    pub fn empty() -> Self {
        Self::finite(Vec::new())
    }

    /// Infinite set `z_j = f(j)`, `j = 1, 2, …`.
    pub fn lazy<F>(f: F) -> Self
    where
        F: Fn(usize) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            prefix: Vec::new(),
            tail: Some(Arc::new(f)),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    /// The `j`-th point, 0-based.
    pub fn point(&self, j: usize) -> Option<Complex64> {
        if j < self.prefix.len() {
            Some(self.prefix[j])
        } else {
            self.tail.as_ref().map(|f| f(j + 1))
        }
    }

    pub fn take(&self, count: usize) -> Vec<Complex64> {
        (0..count).map_while(|j| self.point(j)).collect()
    }
}

/// `Σ_j g(z_j, z0)` over a finite list.
pub fn blaschke_sum(domain: &AnnulusDomain, zeros: &[Complex64]) -> Result<f64> {
    let g0 = green(domain, domain.base_point(), DEFAULT_TRUNCATION)?;
    Ok(zeros.iter().map(|&z| g0.value(z)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub point: Complex64,
    pub mass: f64,
}

/// Finite non-positive atomic measure on Γ.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AtomicSingularMeasure {
    pub atoms: Vec<Atom>,
}

impl AtomicSingularMeasure {
    pub fn new(domain: &AnnulusDomain, atoms: Vec<(Complex64, f64)>) -> Result<Self> {
        let r = domain.inner_radius();
        let mut out = Vec::with_capacity(atoms.len());
        for (point, mass) in atoms {
            let rho = point.norm();
            if !((rho - 1.0).abs() <= 1e-12 || (rho - r).abs() <= 1e-12 * r.max(1e-3)) {
                return Err(Error::RejectGeometry(format!(
                    "atom {point} is not on |z| = 1 or |z| = {r}"
                )));
            }
            if !(mass <= 0.0) || !mass.is_finite() {
                return Err(Error::RejectArgument(format!("atom mass {mass} must be finite and non-positive")));
            }
            out.push(Atom { point, mass });
        }
        Ok(Self { atoms: out })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// `c · H(z)` with `H = (ζ+z)/(ζ−z)` on the outer circle and `(z+ζ)/(z−ζ)` on the inner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct Herglotz {
    point: Complex64,
    coeff: f64,
    outer: bool,
}

impl Herglotz {
    fn eval(&self, z: Complex64) -> Complex64 {
        let h = if self.outer {
            (self.point + z) / (self.point - z)
        } else {
            (z + self.point) / (z - self.point)
        };
        h * self.coeff
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        let d = if self.outer {
            2.0 * self.point / ((self.point - z) * (self.point - z))
        } else {
            -2.0 * self.point / ((z - self.point) * (z - self.point))
        };
        d * self.coeff
    }
}

/// A constructed inner function with its bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct InnerFunctionSpec {
    pub domain: AnnulusDomain,
    pub zeros: Vec<Complex64>,
    pub atoms: Vec<Atom>,
    /// Period-removal exponent.
    pub lambda: f64,
    /// `(c_1, c_2)`: modulus on the outer and inner circle.
    pub boundary_moduli: (f64, f64),
    /// Integer power of `z` left after period cancellation.
    pub power: i64,
    /// `2π · dist(measured period / 2π, ℤ)`, from loop integration of the flux of `log|f|`.
    pub period_residual: f64,
    /// `Σ g(z_j, z0)` over the zeros used.
    pub blaschke_sum: f64,
    phase: Complex64,
    exponent: LaurentPolynomial,
    herglotz: Vec<Herglotz>,
    base_log: f64,
    #[serde(skip)]
    greens: Vec<GreenFunction>,
    #[serde(skip)]
    residuals: Vec<(f64, HarmonicRepresentation)>,
}

/// Truncation for Poisson residuals, whose modes decay like `r^n`.
fn poisson_truncation(r: f64) -> usize {
    ((40.0 / (1.0 / r).ln()).ceil() as usize).clamp(DEFAULT_TRUNCATION, MAX_TRUNCATION)
}

/// `(0, 1]` representative of `x mod 1`.
fn lift_unit(x: f64) -> f64 {
    let f = x.rem_euclid(1.0);
    if f < 1e-12 || 1.0 - f < 1e-12 {
        1.0
    } else {
        f
    }
}

struct Parts {
    zeros: Vec<Complex64>,
    atoms: Vec<Atom>,
    greens: Vec<GreenFunction>,
    residuals: Vec<(f64, HarmonicRepresentation)>,
    herglotz: Vec<Herglotz>,
    exponent: LaurentPolynomial,
    base_log: f64,
}

fn parts(domain: &AnnulusDomain, zeros: &[Complex64], atoms: &[Atom], n: usize) -> Result<Parts> {
    let r = domain.inner_radius();
    let mut exponent = LaurentPolynomial::zero();
    let mut base_log = 0.0;
    let mut greens = Vec::with_capacity(zeros.len());
    for &a in zeros {
        let g = green_interior(domain, a, n)?;
        // -p(z, a) contributes z^{-(1+clog)} · exp(-F).
        exponent = &exponent - &g.completion_laurent();
        base_log -= 1.0 + g.corrector.clog;
        greens.push(g);
    }
    let np = poisson_truncation(r).max(n);
    let mut residuals = Vec::with_capacity(atoms.len());
    let mut herglotz = Vec::with_capacity(atoms.len());
    for atom in atoms {
        let zeta = atom.point;
        let outer = (zeta.norm() - 1.0).abs() < (zeta.norm() - r).abs();
        let zero = Complex64::new(0.0, 0.0);
        let (coeff, residual) = if outer {
            // Re (ζ+z)/(ζ−z) = 1 + Σ 2Re[(rζ̄)^n e^{inθ}] on |z| = r; cancel it there.
            let inner: Vec<Complex64> = (1..=np).map(|k| -2.0 * (r * zeta.conj()).powi(k as i32)).collect();
            (atom.mass / (2.0 * PI), from_real_modes(r, 0.0, -1.0, &[zero; 0], &inner))
        } else {
            // (1/r) Re (z+ζ)/(z−ζ) = (1/r)[1 + Σ 2Re[ζ̄^n e^{inθ}]] on |z| = 1.
            let outer_data: Vec<Complex64> = (1..=np).map(|k| -2.0 / r * zeta.conj().powi(k as i32)).collect();
            (atom.mass / (2.0 * PI * r), from_real_modes(r, -1.0 / r, 0.0, &outer_data, &[zero; 0]))
        };
        let scale = atom.mass / (2.0 * PI);
        exponent = &exponent + &residual.completion_laurent().scale(Complex64::new(scale, 0.0));
        base_log += scale * residual.clog;
        herglotz.push(Herglotz { point: zeta, coeff, outer });
        residuals.push((scale, residual));
    }
    Ok(Parts {
        zeros: zeros.to_vec(),
        atoms: atoms.to_vec(),
        greens,
        residuals,
        herglotz,
        exponent,
        base_log,
    })
}

impl InnerFunctionSpec {
    fn from_parts(domain: &AnnulusDomain, p: Parts, lambda_over_l: f64, blaschke_sum: f64) -> Self {
        let l = domain.modulus();
        let lambda = l * lambda_over_l;
        let power = (p.base_log + lambda_over_l).round() as i64;
        let mut f = Self {
            domain: *domain,
            zeros: p.zeros,
            atoms: p.atoms,
            lambda,
            boundary_moduli: (lambda.exp(), 1.0),
            power,
            period_residual: 0.0,
            blaschke_sum,
            phase: Complex64::new(1.0, 0.0),
            exponent: p.exponent,
            herglotz: p.herglotz,
            base_log: p.base_log,
            greens: p.greens,
            residuals: p.residuals,
        };
        let v = f.eval(domain.base_point());
        if v.norm() > 0.0 && v.is_finite() {
            f.phase = Complex64::new(v.norm(), 0.0) / v;
        }
        f
    }

    /// Same function with λ moved by `k` lattice steps of `log(1/r)`.
    pub fn lattice_shifted(&self, k: i64) -> Self {
        let mut f = self.clone();
        f.lambda += k as f64 * self.domain.modulus();
        f.power += k;
        f.boundary_moduli = (f.lambda.exp(), 1.0);
        f.phase = Complex64::new(1.0, 0.0);
        let v = f.eval(self.domain.base_point());
        if v.norm() > 0.0 && v.is_finite() {
            f.phase = Complex64::new(v.norm(), 0.0) / v;
        }
        f
    }

    /// Logarithmic derivative `f'/f`.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(self.power as f64, 0.0) / z + self.exponent.derivative(z);
        for g in &self.greens {
            let a = g.pole;
            let s = g.inner_image();
            acc += 1.0 / (z - a) + a.conj() / (1.0 - a.conj() * z) - s / (z * (z - s));
        }
        for h in &self.herglotz {
            acc += h.derivative(z);
        }
        acc
    }

    /// `∂/∂ρ log|f|` from the harmonic representation of each factor.
    fn log_modulus_radial(&self, z: Complex64) -> f64 {
        let rho = z.norm();
        let e = z / rho;
        let mut acc = self.lambda / self.domain.modulus() / rho;
        for g in &self.greens {
            acc -= g.radial_derivative(z);
        }
        for (h, (scale, res)) in self.herglotz.iter().zip(&self.residuals) {
            acc += (h.derivative(z) * e).re + scale * res.radial_derivative(z);
        }
        acc
    }

    /// Period of `arg f` around a loop inside every zero, by trapezoid integration
    /// of the flux of `log|f|`; returns `(period / 2π, nodes used)`.
    pub fn measured_period(&self) -> (f64, usize) {
        let r = self.domain.inner_radius();
        let nearest = self.zeros.iter().map(|a| a.norm()).fold(1.0, f64::min);
        let rho = 0.5 * (r + nearest);
        let flux = |m: usize| {
            (0..m)
                .map(|k| {
                    let z = Complex64::from_polar(rho, 2.0 * PI * (k as f64 + 0.5) / m as f64);
                    self.log_modulus_radial(z)
                })
                .sum::<f64>()
                * rho
                / m as f64
        };
        let mut m = 512;
        let mut prev = flux(m);
        while m < (1 << 20) {
            m *= 2;
            let next = flux(m);
            if (next - prev).abs() <= 1e-13 * next.abs().max(1.0) {
                return (next, m);
            }
            prev = next;
        }
        (prev, m)
    }

    fn check_period(&mut self) -> f64 {
        let (measured, _) = self.measured_period();
        self.period_residual = 2.0 * PI * (measured - self.power as f64).abs();
        self.period_residual
    }
}

impl Analytic for InnerFunctionSpec {
    fn eval(&self, z: Complex64) -> Complex64 {
        let mut v = self.phase * self.lambda.exp() * z.powi(self.power as i32);
        for g in &self.greens {
            let a = g.pole;
            v *= (z - a) / ((1.0 - a.conj() * z) * (1.0 - g.inner_image() / z));
        }
        let mut e = self.exponent.eval(z);
        for h in &self.herglotz {
            e += h.eval(z);
        }
        v * e.exp()
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        let f = self.eval(z);
        if f.norm() == 0.0 {
            return Analytic::derivative(&crate::analytic::FnAnalytic(|w| self.eval(w)), z);
        }
        f * self.log_derivative(z)
    }
}

/// Builds `B · S` for finite zeros and atoms with λ ∈ (0, log(1/r)] cancelling the period;
/// retries once at doubled truncation if the measured period misses an integer.
fn assemble(domain: &AnnulusDomain, zeros: &[Complex64], atoms: &[Atom], n: usize) -> Result<InnerFunctionSpec> {
    let sum = if zeros.is_empty() { 0.0 } else { blaschke_sum(domain, zeros)? };
    let mut residual = f64::INFINITY;
    for trunc in [n, (2 * n).min(MAX_TRUNCATION)] {
        let p = parts(domain, zeros, atoms, trunc)?;
        let t = lift_unit(-p.base_log);
        let mut f = InnerFunctionSpec::from_parts(domain, p, t, sum);
        residual = f.check_period();
        if residual <= 1e-8 {
            return Ok(f);
        }
    }
    Err(Error::PeriodUnresolved { residual })
}

/// Single generalized Blaschke factor with λ = log(1/r)·ω₂(a).
pub fn blaschke_factor(domain: &AnnulusDomain, a: Complex64) -> Result<InnerFunctionSpec> {
    if domain.boundary_distance(a) < 1e-9 || !a.is_finite() {
        return Err(Error::RejectGeometry(format!("zero {a} is on or outside the boundary")));
    }
    assemble(domain, &[a], &[], DEFAULT_TRUNCATION)
}

/// Limits for infinite products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductOptions {
    /// `BLASCHKE_DIVERGENT` once `Σ g(z_j, z0)` exceeds this.
    pub sum_bound: f64,
    pub max_factors: usize,
    pub truncation: usize,
}

impl Default for ProductOptions {
    fn default() -> Self {
        Self {
            sum_bound: 50.0,
            max_factors: 4096,
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

const TEST_GRID: usize = 16;

fn test_grid(domain: &AnnulusDomain) -> Vec<Complex64> {
    let r = domain.inner_radius();
    let dr = (1.0 - r) / TEST_GRID as f64;
    (0..TEST_GRID)
        .flat_map(|i| {
            (0..TEST_GRID).map(move |j| {
                Complex64::from_polar(r + (i as f64 + 0.5) * dr, 2.0 * PI * (j as f64 + 0.5) / TEST_GRID as f64)
            })
        })
        .collect()
}

/// Zeros of `zeros` that the product actually uses: all of a finite set, or the
/// prefix after which an appended (base-normalized) factor moves values on the
/// 16×16 test grid by less than `tol`.
pub fn product_prefix(domain: &AnnulusDomain, zeros: &ZeroSet, tol: f64, opts: &ProductOptions) -> Result<Vec<Complex64>> {
    let g0 = green(domain, domain.base_point(), opts.truncation)?;
    let grid = test_grid(domain);
    let mut used = Vec::new();
    let mut partial = 0.0;
    let mut j = 0;
    while let Some(a) = zeros.point(j) {
        domain.require_interior(a, "zero")?;
        partial += g0.value(a);
        if partial > opts.sum_bound {
            return Err(Error::BlaschkeDivergent { partial_sum: partial, terms: j + 1 });
        }
        used.push(a);
        j += 1;
        if zeros.is_finite() {
            continue;
        }
        let p = parts(domain, &[a], &[], opts.truncation)?;
        let t = lift_unit(-p.base_log);
        let b = InnerFunctionSpec::from_parts(domain, p, t, 0.0);
        let change = grid
            .iter()
            .map(|&z| (b.eval(z) - 1.0).norm())
            .fold(0.0, f64::max);
        if change < tol {
            break;
        }
        if j >= opts.max_factors {
            return Err(Error::BlaschkeDivergent { partial_sum: partial, terms: j });
        }
    }
    Ok(used)
}

/// Generalized Blaschke product; the empty set gives the constant 1.
pub fn blaschke_product(domain: &AnnulusDomain, zeros: &ZeroSet, tol: f64) -> Result<InnerFunctionSpec> {
    blaschke_product_with(domain, zeros, tol, &ProductOptions::default())
}

pub fn blaschke_product_with(
    domain: &AnnulusDomain,
    zeros: &ZeroSet,
    tol: f64,
    opts: &ProductOptions,
) -> Result<InnerFunctionSpec> {
    let used = product_prefix(domain, zeros, tol, opts)?;
    if used.is_empty() {
        // No period to cancel: λ = 0 keeps the empty product equal to 1.
        let p = parts(domain, &[], &[], opts.truncation)?;
        let mut f = InnerFunctionSpec::from_parts(domain, p, 0.0, 0.0);
        f.check_period();
        return Ok(f);
    }
    assemble(domain, &used, &[], opts.truncation)
}

/// Singular inner function of an atomic measure, with the period removed.
pub fn singular_inner(domain: &AnnulusDomain, mu: &AtomicSingularMeasure) -> Result<InnerFunctionSpec> {
    assemble(domain, &[], &mu.atoms, DEFAULT_TRUNCATION)
}

/// Quasi-contractive divisor `G = B_Z · S_μ` with a single λ ∈ (0, log(1/r)], and `C = 1/r`.
pub fn qc_divisor(
    domain: &AnnulusDomain,
    zeros: &ZeroSet,
    mu: &AtomicSingularMeasure,
    tol: f64,
) -> Result<(InnerFunctionSpec, f64)> {
    let used = product_prefix(domain, zeros, tol, &ProductOptions::default())?;
    let g = assemble(domain, &used, &mu.atoms, DEFAULT_TRUNCATION)?;
    Ok((g, domain.modulus().exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerReport {
    pub c1: f64,
    pub c2: f64,
    pub dev1: f64,
    pub dev2: f64,
    pub passes: bool,
}

/// Mean modulus and max deviation on each circle (nodes at half-steps, off θ = 0).
pub fn verify_inner(f: &dyn Analytic, domain: &AnnulusDomain, m: usize) -> Result<InnerReport> {
    let mut stats = [(0.0, 0.0); 2];
    for (slot, comp) in [OUTER, INNER].into_iter().enumerate() {
        let nodes = boundary_nodes_shifted(domain, comp, m, 0.5)?;
        let moduli: Vec<f64> = nodes.iter().map(|s| f.eval(s.point).norm()).collect();
        let mean = moduli.iter().sum::<f64>() / moduli.len() as f64;
        let dev = moduli.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        stats[slot] = (mean, dev);
    }
    let [(c1, dev1), (c2, dev2)] = stats;
    Ok(InnerReport {
        c1,
        c2,
        dev1,
        dev2,
        passes: dev1 <= 1e-6 * c1 && dev2 <= 1e-6 * c2,
    })
}

/// `max_{0<|n|≤N} |⟨z^n f, f⟩_{E²}|` for a Laurent polynomial, with enough nodes to
/// integrate `z^n |f|²` exactly.
pub fn check_orthogonality(f: &LaurentPolynomial, domain: &AnnulusDomain, n: usize) -> f64 {
    let width = n as i64 + f.lo().abs().max(f.hi().abs());
    let m = ((4 * width + 4) as usize).max(512).next_power_of_two();
    orthogonality_defect(f, domain, n, m)
}

/// `max_{0<|n|≤N} |⟨z^n f, f⟩_{E²}|` from `|f|²` at `m` half-step nodes per circle, by one
/// FFT per circle. Only boundary moduli enter, so singular factors are fine as long as no
/// atom sits on a node.
pub fn orthogonality_defect(f: &dyn Analytic, domain: &AnnulusDomain, n: usize, m: usize) -> f64 {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let step = 2.0 * PI / m as f64;
    let mut moments = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    for rho in [1.0, domain.inner_radius()] {
        let mut buf: Vec<Complex64> = (0..m)
            .map(|q| {
                let z = Complex64::from_polar(rho, (q as f64 + 0.5) * step);
                Complex64::new(f.eval(z).norm_sqr(), 0.0)
            })
            .collect();
        fft.process(&mut buf);
        for (i, k) in (-(n as i64)..=n as i64).enumerate() {
            // ∮ z^k |f|² ds = ρ^{k+1} h Σ_q e^{ik(q+½)h} |f_q|²
            let idx = (-k).rem_euclid(m as i64) as usize;
            let shift = Complex64::from_polar(1.0, 0.5 * k as f64 * step);
            moments[i] += buf[idx] * shift * rho.powi(k as i32 + 1) * step;
        }
    }
    moments
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != n)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchottkyFit {
    pub lambda1: f64,
    pub residual: f64,
}

/// Weighted least squares of `|f|² − 1` against `s₁` over both circles (arclength weights).
pub fn schottky_fit(f: &dyn Analytic, domain: &AnnulusDomain, m: usize) -> Result<SchottkyFit> {
    let s1 = SchottkyFunction::new(domain, 1, DEFAULT_TRUNCATION)?;
    let mut rows = Vec::with_capacity(2 * m);
    for s in all_boundary_nodes(domain, m)? {
        rows.push((s1.eval(&s)?, f.eval(s.point).norm_sqr() - 1.0, s.weight));
    }
    let sxx: f64 = rows.iter().map(|(x, _, w)| w * x * x).sum();
    let sxy: f64 = rows.iter().map(|(x, y, w)| w * x * y).sum();
    let lambda1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let residual = rows
        .iter()
        .map(|(x, y, w)| w * (y - lambda1 * x).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(SchottkyFit { lambda1, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivisionReport {
    /// `max ‖f/G₀‖ / ‖f‖` over the trials.
    pub max_ratio: f64,
    /// `min ‖f/G₀‖ / ‖f‖`, the mirror bound.
    pub min_ratio: f64,
    /// `‖G‖_{H²}`.
    pub g_norm: f64,
    pub trials: usize,
}

/// Random Laurent polynomial on `[-deg, deg]` with coefficients in the unit square.
pub fn random_laurent(rng: &mut ChaCha8Rng, deg: i64) -> LaurentPolynomial {
    let coeffs = (-deg..=deg)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    LaurentPolynomial::new(-deg, coeffs)
}

/// For `f = G₀ h` with `G₀ = G/‖G‖_{H²}`, the ratios `‖h‖ / ‖f‖` in `H²(dω_{z0})`.
/// Trial 0 is `h = 1`; the rest are seeded random Laurent polynomials of degree ≤ 4.
pub fn division_bound_check(
    g: &dyn Analytic,
    domain: &AnnulusDomain,
    trials: usize,
    seed: u64,
    m: usize,
) -> Result<DivisionReport> {
    let quad = Quadrature::for_space(domain, &SpaceTag::hardy(), m)?;
    let nodes: Vec<(Complex64, f64)> = quad
        .rings
        .iter()
        .flat_map(|ring| (0..ring.len()).map(move |k| (ring.point(k), ring.weights[k])))
        .collect();
    let gv: Vec<Complex64> = nodes.iter().map(|(z, _)| g.eval(*z)).collect();
    let g_norm = nodes.iter().zip(&gv).map(|((_, w), v)| w * v.norm_sqr()).sum::<f64>().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max_ratio, mut min_ratio) = (0.0f64, f64::INFINITY);
    for t in 0..trials.max(1) {
        let h = if t == 0 {
            LaurentPolynomial::constant(Complex64::new(1.0, 0.0))
        } else {
            random_laurent(&mut rng, 4)
        };
        let (mut hh, mut ff) = (0.0, 0.0);
        for ((z, w), gz) in nodes.iter().zip(&gv) {
            let hz = h.eval(*z);
            hh += w * hz.norm_sqr();
            ff += w * (gz / g_norm * hz).norm_sqr();
        }
        let ratio = (hh / ff).sqrt();
        max_ratio = max_ratio.max(ratio);
        min_ratio = min_ratio.min(ratio);
    }
    Ok(DivisionReport {
        max_ratio,
        min_ratio,
        g_norm,
        trials: trials.max(1),
    })
}
