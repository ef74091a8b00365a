//! Reproducing kernels of the spaces in [`crate::spaces`], plus zero counting by the
//! argument principle and zero location by grid scan and Newton refinement.
//!
//! Kernels are returned as Laurent sections `K(·, w)`, so every kernel is itself a
//! [`LaurentPolynomial`] and inherits exact derivatives.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DVector, Dyn};
use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::Analytic;
use crate::error::{Error, Result};
use crate::geometry::AnnulusDomain;
use crate::spaces::{monomial_norms, GramSystem, LaurentPolynomial, Quadrature, SpaceKind, SpaceTag};

/// Largest scaled-Gram condition number accepted.
pub const MAX_CONDITION: f64 = 1e14;

/// Default number of contour nodes for phase unwrapping.
pub const CONTOUR_NODES: usize = 512;

const MAX_CONTOUR_NODES: usize = 1 << 20;

#[derive(Debug, Clone)]
pub enum KernelForm {
    /// Orthogonal monomials: `K(z,w) = Σ z^n conj(w)^n / ‖z^n‖²`.
    DiagonalSeries { norms: Vec<f64> },
    /// General Gram: `K(z,w) = φ(z)ᵀ F⁻¹ conj(φ(w))` in the scaled basis of `gram`;
    /// `F⁻¹` is applied through its Cholesky factor with one refinement step.
    GramInverse { gram: GramSystem, factor: Cholesky<Complex64, Dyn>, condition: f64 },
}

#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    pub domain: AnnulusDomain,
    pub tag: SpaceTag,
    pub n: usize,
    pub m: usize,
    pub form: KernelForm,
}

/// Builds the reproducing kernel on the Laurent window `[-N, N]`.
///
/// Unweighted arclength and area kernels use the diagonal series; the
/// harmonic-measure space and every weighted space go through the Gram inverse.
pub fn build_kernel(domain: &AnnulusDomain, tag: &SpaceTag, n: usize, m: usize) -> Result<KernelEvaluator> {
    let diagonal = !tag.is_weighted() && tag.kind != SpaceKind::HardyHarmonicMeasure;
    let form = if diagonal {
        KernelForm::DiagonalSeries { norms: monomial_norms(domain, tag, n)? }
    } else {
        let gram = GramSystem::assemble(domain, tag, n, m)?;
        let (lo, hi) = gram.eigen_range();
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::SingularGram { condition });
        }
        let factor = gram
            .form
            .clone()
            .cholesky()
            .ok_or(Error::SingularGram { condition })?;
        KernelForm::GramInverse { gram, factor, condition }
    };
    Ok(KernelEvaluator {
        domain: *domain,
        tag: tag.clone(),
        n,
        m,
        form,
    })
}

impl KernelEvaluator {
    pub fn form_name(&self) -> &'static str {
        match self.form {
            KernelForm::DiagonalSeries { .. } => "DIAGONAL_SERIES",
            KernelForm::GramInverse { .. } => "GRAM_INVERSE",
        }
    }

    /// The section `K(·, w)` as a Laurent polynomial.
    pub fn section(&self, w: Complex64) -> LaurentPolynomial {
        let n = self.n as i64;
        match &self.form {
            KernelForm::DiagonalSeries { norms } => {
                let wc = w.conj();
                let coeffs = (-n..=n)
                    .zip(norms)
                    .map(|(k, nk)| wc.powi(k as i32) / *nk)
                    .collect();
                LaurentPolynomial::from_window(n, coeffs)
            }
            KernelForm::GramInverse { gram, factor, .. } => {
                let phi = DVector::from_iterator(gram.dim(), gram.basis_values(w).iter().map(|v| v.conj()));
                let mut a = factor.solve(&phi);
                let correction = factor.solve(&(&phi - &gram.form * &a));
                a += correction;
                gram.to_laurent(a.as_slice())
            }
        }
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.section(w).eval(z)
    }

    /// `K(w, w)`, the squared norm of evaluation at `w`.
    pub fn diagonal(&self, w: Complex64) -> f64 {
        self.eval(w, w).re
    }

    pub fn condition(&self) -> f64 {
        match &self.form {
            KernelForm::DiagonalSeries { .. } => 1.0,
            KernelForm::GramInverse { condition, .. } => *condition,
        }
    }

    /// Quadrature for the measure (including weight) of this kernel's space.
    pub fn quadrature(&self) -> Result<Quadrature> {
        Quadrature::for_space(&self.domain, &self.tag, self.m.max(4 * self.n + 4))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReproductionReport {
    pub residual: f64,
    pub out_of_window: bool,
}

/// `|⟨f, K(·,w)⟩ − f(w)|` with the pairing computed by direct quadrature.
pub fn reproduce_check(k: &KernelEvaluator, f: &LaurentPolynomial, w: Complex64) -> Result<ReproductionReport> {
    let section = k.section(w);
    let quad = k.quadrature()?;
    let pairing = quad.integrate(|z| f.eval(z) * section.eval(z).conj());
    Ok(ReproductionReport {
        residual: (pairing - f.eval(w)).norm(),
        out_of_window: !f.within_window(k.n as i64),
    })
}

/// Winding number of `f` around `|z| = radius`, with node doubling on phase jumps.
pub fn winding_number(f: &dyn Analytic, radius: f64, m: usize) -> Result<i64> {
    let mut m = m.max(8);
    loop {
        let values: Vec<Complex64> = (0..m)
            .map(|k| f.eval(Complex64::from_polar(radius, 2.0 * PI * k as f64 / m as f64)))
            .collect();
        let min_modulus = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !(min_modulus >= 1e-10) {
            return Err(Error::ZeroOnContour { radius, min_modulus });
        }
        let mut total = 0.0;
        let mut max_jump: f64 = 0.0;
        for k in 0..m {
            let step = (values[(k + 1) % m] / values[k]).arg();
            max_jump = max_jump.max(step.abs());
            total += step;
        }
        if max_jump <= PI / 2.0 {
            return Ok((total / (2.0 * PI)).round() as i64);
        }
        if m >= MAX_CONTOUR_NODES {
            return Err(Error::ConvergenceFail { best_residual: max_jump });
        }
        m *= 2;
    }
}

/// Number of zeros of `f` in `ρ_lo < |z| < ρ_hi`, counted with multiplicity.
pub fn count_zeros(f: &dyn Analytic, domain: &AnnulusDomain, ring: (f64, f64), m: usize) -> Result<i64> {
    let (lo, hi) = ring;
    let r = domain.inner_radius();
    if !(lo < hi) || lo < r || hi > 1.0 {
        return Err(Error::RejectArgument(format!(
            "ring ({lo}, {hi}) is not inside [{r}, 1]"
        )));
    }
    Ok(winding_number(f, hi, m)? - winding_number(f, lo, m)?)
}

/// The counting ring `(r + ε, 1 − ε)` covering almost the whole annulus.
pub fn full_ring(domain: &AnnulusDomain, eps: f64) -> (f64, f64) {
    (domain.inner_radius() + eps, 1.0 - eps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroReport {
    pub contour_count: usize,
    pub locations: Vec<Complex64>,
    pub residual: f64,
}

const SCAN: usize = 64;

/// Finds `expected` zeros by a 64×64 polar scan for local minima of `|f|`, each
/// refined by Newton's method to `|f| ≤ 1e−10·max(1, mean |f| on the scan)`.
pub fn locate_zeros(f: &dyn Analytic, domain: &AnnulusDomain, expected: usize) -> Result<ZeroReport> {
    let r = domain.inner_radius();
    let dr = (1.0 - r) / SCAN as f64;
    let point = |i: usize, j: usize| {
        Complex64::from_polar(r + (i as f64 + 0.5) * dr, 2.0 * PI * (j as f64 + 0.5) / SCAN as f64)
    };
    let grid: Vec<Vec<f64>> = (0..SCAN)
        .map(|i| (0..SCAN).map(|j| f.eval(point(i, j)).norm()).collect())
        .collect();
    let mean = grid.iter().flatten().sum::<f64>() / (SCAN * SCAN) as f64;
    let tol = 1e-10 * mean.max(1.0);

    let mut candidates = Vec::new();
    for i in 0..SCAN {
        for j in 0..SCAN {
            let v = grid[i][j];
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let ii = i as i64 + di;
                    if (di, dj) == (0, 0) || ii < 0 || ii >= SCAN as i64 {
                        continue;
                    }
                    let jj = (j as i64 + dj).rem_euclid(SCAN as i64) as usize;
                    if grid[ii as usize][jj] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                candidates.push((v, point(i, j)));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut found: Vec<Complex64> = Vec::new();
    let mut residual: f64 = 0.0;
    let mut best_failure = f64::INFINITY;
    for (_, start) in candidates {
        if found.len() == expected {
            break;
        }
        match newton(f, domain, start, tol) {
            Ok((z, res)) => {
                if found.iter().all(|p| (p - z).norm() > 1e-7) {
                    found.push(z);
                    residual = residual.max(res);
                }
            }
            Err(res) => best_failure = best_failure.min(res),
        }
    }
    if found.len() < expected {
        return Err(Error::ConvergenceFail { best_residual: best_failure });
    }
    Ok(ZeroReport {
        contour_count: expected,
        locations: found,
        residual,
    })
}

fn newton(f: &dyn Analytic, domain: &AnnulusDomain, start: Complex64, tol: f64) -> std::result::Result<(Complex64, f64), f64> {
    let mut z = start;
    let mut fz = f.eval(z);
    let mut polish = 0;
    for _ in 0..100 {
        if fz.norm() <= tol {
            // A few extra steps pin the root well below the stopping residual.
            polish += 1;
            if polish > 3 {
                break;
            }
        }
        let d = f.derivative(z);
        if d.norm() == 0.0 || !d.is_finite() {
            break;
        }
        let mut step = fz / d;
        // Damp steps that would leave the annulus or increase |f|.
        let mut accepted = false;
        for _ in 0..30 {
            let trial = z - step;
            if domain.contains(trial) {
                let ft = f.eval(trial);
                if ft.norm() < fz.norm() {
                    z = trial;
                    fz = ft;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if fz.norm() <= tol {
        Ok((z, fz.norm()))
    } else {
        Err(fz.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_annulus;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_zero_counted_and_located() {
        let d = make_annulus(0.5, c(0.6, 0.0)).unwrap();
        let f = LaurentPolynomial::linear(c(0.7, 0.0));
        assert_eq!(count_zeros(&f, &d, (0.55, 0.95), 512).unwrap(), 1);
        let rep = locate_zeros(&f, &d, 1).unwrap();
        assert!((rep.locations[0] - c(0.7, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn zero_on_contour_detected() {
        let d = make_annulus(0.5, c(0.6, 0.0)).unwrap();
        let f = LaurentPolynomial::linear(c(0.7, 0.0));
        assert!(matches!(
            count_zeros(&f, &d, (0.55, 0.7), 512),
            Err(Error::ZeroOnContour { .. })
        ));
    }

    #[test]
    fn constants_reproduce() {
        let d = make_annulus(0.5, c(0.7, 0.0)).unwrap();
        let one = LaurentPolynomial::constant(c(1.0, 0.0));
        for tag in [SpaceTag::smirnov(), SpaceTag::hardy(), SpaceTag::bergman()] {
            let k = build_kernel(&d, &tag, 16, 512).unwrap();
            let res = reproduce_check(&k, &one, c(0.6, 0.2)).unwrap().residual;
            assert!(res <= 1e-12, "{tag:?}: {res:e}");
        }
    }

    #[test]
    fn out_of_window_flagged() {
        let d = make_annulus(0.5, c(0.7, 0.0)).unwrap();
        let k = build_kernel(&d, &SpaceTag::smirnov(), 4, 64).unwrap();
        let rep = reproduce_check(&k, &LaurentPolynomial::monomial(6), c(0.6, 0.2)).unwrap();
        assert!(rep.out_of_window);
        assert!(rep.residual > 1e-3);
    }
}
