//! Hilbert spaces of analytic functions on the annulus, p = 2:
//! the Smirnov space `E²` (arclength on Γ), the Hardy space `H²` (harmonic
//! measure at the base point) and the Bergman space `A²` (area, `dA/π`),
//! each optionally weighted by `|u|²` for an analytic `u`.
//!
//! Every function is expanded in the monomials `z^n`, `|n| ≤ N`. Integrals are
//! trapezoid sums on circles (Gauss–Legendre in radius for `A²`); on each
//! circle the angular sums are evaluated by one FFT of the node weights.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::analytic::{Analytic, AnalyticRef};
use crate::error::{Error, Result};
use crate::geometry::{gauss_legendre, AnnulusDomain, RADIAL_ORDER};
use crate::harmonic::{green, harmonic_measure_density, DEFAULT_TRUNCATION};

pub use crate::laurent::LaurentPolynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpaceKind {
    SmirnovArclength,
    HardyHarmonicMeasure,
    BergmanArea,
}

impl SpaceKind {
    pub fn is_boundary(self) -> bool {
        !matches!(self, SpaceKind::BergmanArea)
    }
}

/// A space together with an optional weight `|u|²`.
#[derive(Clone)]
pub struct SpaceTag {
    pub kind: SpaceKind,
    pub weight: Option<AnalyticRef>,
}

impl fmt::Debug for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceTag")
            .field("kind", &self.kind)
            .field("weighted", &self.weight.is_some())
            .finish()
    }
}

impl SpaceTag {
    pub fn new(kind: SpaceKind) -> Self {
        Self { kind, weight: None }
    }

    pub fn smirnov() -> Self {
        Self::new(SpaceKind::SmirnovArclength)
    }

    pub fn hardy() -> Self {
        Self::new(SpaceKind::HardyHarmonicMeasure)
    }

    pub fn bergman() -> Self {
        Self::new(SpaceKind::BergmanArea)
    }

    /// Same space weighted by `|u|²`.
    pub fn weighted(&self, u: AnalyticRef) -> Self {
        Self {
            kind: self.kind,
            weight: Some(u),
        }
    }

    pub fn unweighted(&self) -> Self {
        Self::new(self.kind)
    }

    pub fn is_weighted(&self) -> bool {
        self.weight.is_some()
    }
}

/// Trapezoid nodes on one circle: angles `(k + offset)·2π/m`.
#[derive(Debug, Clone)]
pub struct QuadRing {
    pub radius: f64,
    pub offset: f64,
    /// Full weight of each node: measure, density and `|u|²` included.
    pub weights: Vec<f64>,
}

impl QuadRing {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> Complex64 {
        let m = self.weights.len() as f64;
        Complex64::from_polar(self.radius, (k as f64 + self.offset) * 2.0 * PI / m)
    }
}

/// Quadrature for the measure of a tagged space.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub rings: Vec<QuadRing>,
}

impl Quadrature {
    pub fn for_space(domain: &AnnulusDomain, tag: &SpaceTag, m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::RejectArgument(format!("need at least 4 nodes, got {m}")));
        }
        let r = domain.inner_radius();
        let step = 2.0 * PI / m as f64;
        let mut rings = match tag.kind {
            SpaceKind::SmirnovArclength => vec![
                QuadRing { radius: 1.0, offset: 0.0, weights: vec![step; m] },
                QuadRing { radius: r, offset: 0.0, weights: vec![r * step; m] },
            ],
            SpaceKind::HardyHarmonicMeasure => {
                let g = green(domain, domain.base_point(), DEFAULT_TRUNCATION)?;
                let nodes = crate::geometry::all_boundary_nodes(domain, m)?;
                let (outer, inner) = nodes.split_at(m);
                let weigh = |s: &crate::geometry::BoundarySample| {
                    harmonic_measure_density(&g, s) * s.weight
                };
                vec![
                    QuadRing { radius: 1.0, offset: 0.0, weights: outer.iter().map(weigh).collect() },
                    QuadRing { radius: r, offset: 0.0, weights: inner.iter().map(weigh).collect() },
                ]
            }
            SpaceKind::BergmanArea => {
                let (radii, rw) = gauss_legendre(RADIAL_ORDER, r, 1.0);
                radii
                    .iter()
                    .zip(&rw)
                    .map(|(&rho, &w)| QuadRing {
                        radius: rho,
                        offset: 0.5,
                        weights: vec![w * rho * step / PI; m],
                    })
                    .collect()
            }
        };
        if let Some(u) = &tag.weight {
            for ring in &mut rings {
                for k in 0..ring.len() {
                    ring.weights[k] *= u.eval(ring.point(k)).norm_sqr();
                }
            }
        }
        Ok(Self { rings })
    }

    /// `Σ w f(z)` over all nodes.
    pub fn integrate<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ring in &self.rings {
            for (k, w) in ring.weights.iter().enumerate() {
                acc += f(ring.point(k)) * *w;
            }
        }
        acc
    }

    pub fn integrate_real<F: Fn(Complex64) -> f64>(&self, f: F) -> f64 {
        let mut acc = 0.0;
        for ring in &self.rings {
            for (k, w) in ring.weights.iter().enumerate() {
                acc += f(ring.point(k)) * w;
            }
        }
        acc
    }

    /// Squared norm of a pointwise evaluator.
    pub fn norm_sqr(&self, f: &dyn Analytic) -> f64 {
        self.integrate_real(|z| f.eval(z).norm_sqr())
    }

    /// `F_{jk} = Σ w z^{lo+k} conj(z^{lo+j})`, i.e. `⟨z^{lo+k}, z^{lo+j}⟩`, by one FFT per ring.
    fn form_matrix(&self, lo: i64, hi: i64) -> DMatrix<Complex64> {
        let dim = (hi - lo + 1) as usize;
        let mut out = DMatrix::<Complex64>::zeros(dim, dim);
        let mut planner = FftPlanner::new();
        for ring in &self.rings {
            let m = ring.len();
            let mut spec: Vec<Complex64> = ring.weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
            planner.plan_fft_forward(m).process(&mut spec);
            let h = 2.0 * PI / m as f64;
            let powers: Vec<f64> = (lo..=hi).map(|n| ring.radius.powi(n as i32)).collect();
            for j in 0..dim {
                for k in 0..dim {
                    let p = k as i64 - j as i64;
                    // Σ_q w_q e^{ipθ_q} = e^{ip·offset·h} conj(X_p)
                    let idx = p.rem_euclid(m as i64) as usize;
                    let phase = Complex64::from_polar(1.0, p as f64 * ring.offset * h);
                    out[(j, k)] += phase * spec[idx].conj() * (powers[j] * powers[k]);
                }
            }
        }
        out
    }
}

/// Gram data in the monomial basis `z^n`, `|n| ≤ N`, with Jacobi scaling.
///
/// `form[(j, k)] = ⟨φ_k, φ_j⟩` for `φ_j = z^{j-N} / scale[j]`; this is the
/// matrix of the quadratic form `‖Σ a_j φ_j‖² = a* F a`.
#[derive(Debug, Clone)]
pub struct GramSystem {
    pub n: usize,
    pub scale: Vec<f64>,
    pub form: DMatrix<Complex64>,
}

impl GramSystem {
    pub fn assemble(domain: &AnnulusDomain, tag: &SpaceTag, n: usize, m: usize) -> Result<Self> {
        check_nodes(n, m)?;
        let quad = Quadrature::for_space(domain, tag, m)?;
        let raw = quad.form_matrix(-(n as i64), n as i64);
        let dim = 2 * n + 1;
        let scale: Vec<f64> = (0..dim).map(|j| raw[(j, j)].re.max(0.0).sqrt()).collect();
        if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::SingularGram { condition: f64::INFINITY });
        }
        let form = DMatrix::from_fn(dim, dim, |j, k| raw[(j, k)] / (scale[j] * scale[k]));
        Ok(Self { n, scale, form })
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Unscaled matrix `G_{jk} = ⟨z^{j-N}, z^{k-N}⟩`.
    pub fn unscaled(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        // ⟨z^j, z^k⟩ = F_{kj} un-scaled.
        DMatrix::from_fn(dim, dim, |j, k| self.form[(k, j)] * (self.scale[j] * self.scale[k]))
    }

    /// Scaled basis values `φ_j(z)`.
    pub fn basis_values(&self, z: Complex64) -> Vec<Complex64> {
        let n = self.n as i64;
        (0..self.dim())
            .map(|j| z.powi((j as i64 - n) as i32) / self.scale[j])
            .collect()
    }

    /// Scaled coefficients to a Laurent polynomial.
    pub fn to_laurent(&self, a: &[Complex64]) -> LaurentPolynomial {
        let coeffs = a.iter().zip(&self.scale).map(|(c, s)| c / s).collect();
        LaurentPolynomial::from_window(self.n as i64, coeffs)
    }

    /// Laurent polynomial to scaled coefficients (window `[-N, N]`).
    pub fn from_laurent(&self, f: &LaurentPolynomial) -> Vec<Complex64> {
        f.window_vector(self.n as i64)
            .iter()
            .zip(&self.scale)
            .map(|(c, s)| c * s)
            .collect()
    }

    /// Extreme eigenvalues of the scaled form matrix.
    pub fn eigen_range(&self) -> (f64, f64) {
        let eig = nalgebra::SymmetricEigen::new(self.form.clone()).eigenvalues;
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    }
}

fn check_nodes(n: usize, m: usize) -> Result<()> {
    if m < 4 * n + 4 {
        return Err(Error::RejectArgument(format!(
            "m = {m} nodes alias a window of N = {n}; need m >= 4N + 4 = {}",
            4 * n + 4
        )));
    }
    Ok(())
}

/// Squared norms `‖z^n‖²`, `n = -N..=N`, of an unweighted space.
pub fn monomial_norms(domain: &AnnulusDomain, tag: &SpaceTag, n: usize) -> Result<Vec<f64>> {
    if tag.is_weighted() {
        return Err(Error::RejectArgument(
            "weighted spaces have non-diagonal Gram matrices; use gram_matrix".into(),
        ));
    }
    let r = domain.inner_radius();
    let n = n as i64;
    match tag.kind {
        SpaceKind::SmirnovArclength => Ok((-n..=n)
            .map(|k| 2.0 * PI * (1.0 + r.powi(2 * k as i32 + 1)))
            .collect()),
        SpaceKind::BergmanArea => Ok((-n..=n)
            .map(|k| {
                if k == -1 {
                    2.0 * (1.0 / r).ln()
                } else {
                    (1.0 - r.powi(2 * k as i32 + 2)) / (k as f64 + 1.0)
                }
            })
            .collect()),
        SpaceKind::HardyHarmonicMeasure => {
            let m = (4 * n as usize + 4).max(512);
            let quad = Quadrature::for_space(domain, tag, m)?;
            Ok((-n..=n)
                .map(|k| quad.integrate_real(|z| z.norm().powi(2 * k as i32)))
                .collect())
        }
    }
}

/// `G_{jk} = ⟨z^j, z^k⟩` for `j, k ∈ [-N, N]` (row/column `j + N`).
pub fn gram_matrix(
    domain: &AnnulusDomain,
    tag: &SpaceTag,
    n: usize,
    m: usize,
) -> Result<DMatrix<Complex64>> {
    Ok(GramSystem::assemble(domain, tag, n, m)?.unscaled())
}

/// `⟨f, g⟩` through the Gram matrix of the smallest symmetric window holding both.
pub fn inner_product(
    f: &LaurentPolynomial,
    g: &LaurentPolynomial,
    domain: &AnnulusDomain,
    tag: &SpaceTag,
    m: usize,
) -> Result<Complex64> {
    let n = [f.lo(), f.hi(), g.lo(), g.hi()]
        .iter()
        .map(|k| k.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let gram = gram_matrix(domain, tag, n, m)?;
    let a = f.window_vector(n as i64);
    let b = g.window_vector(n as i64);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..a.len() {
        for k in 0..b.len() {
            acc += a[j] * b[k].conj() * gram[(j, k)];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::from_fn;
    use crate::geometry::make_annulus;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn domain() -> AnnulusDomain {
        make_annulus(0.5, c(0.7, 0.0)).unwrap()
    }

    #[test]
    fn closed_form_norms() {
        let d = domain();
        let e2 = monomial_norms(&d, &SpaceTag::smirnov(), 2).unwrap();
        assert!((e2[3] - 2.0 * PI * 1.125).abs() < 1e-13);
        let a2 = monomial_norms(&d, &SpaceTag::bergman(), 2).unwrap();
        assert!((a2[2] - 0.75).abs() < 1e-15);
        assert!((a2[1] - 2.0 * 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn weighted_norms_rejected() {
        let d = domain();
        let tag = SpaceTag::bergman().weighted(from_fn(|z| z));
        assert!(matches!(monomial_norms(&d, &tag, 2), Err(Error::RejectArgument(_))));
    }

    #[test]
    fn aliasing_guard() {
        let d = domain();
        assert!(matches!(
            gram_matrix(&d, &SpaceTag::smirnov(), 8, 35),
            Err(Error::RejectArgument(_))
        ));
    }

    #[test]
    fn unweighted_smirnov_gram_is_diagonal() {
        let d = domain();
        let n = 8;
        let g = gram_matrix(&d, &SpaceTag::smirnov(), n, 64).unwrap();
        let norms = monomial_norms(&d, &SpaceTag::smirnov(), n).unwrap();
        for j in 0..g.nrows() {
            for k in 0..g.ncols() {
                let expected = if j == k { norms[j] } else { 0.0 };
                assert!((g[(j, k)] - expected).norm() < 1e-12 * norms[j].max(norms[k]));
            }
        }
    }

    #[test]
    fn bergman_weight_z_shifts_index() {
        let d = domain();
        let n = 6;
        let tag = SpaceTag::bergman().weighted(from_fn(|z| z));
        let g = gram_matrix(&d, &tag, n, 64).unwrap();
        let norms = monomial_norms(&d, &SpaceTag::bergman(), n + 1).unwrap();
        for j in 0..g.nrows() {
            // |z|²|z^k|² = |z^{k+1}|²: entry for k = j - n uses norm index k + 1.
            let expected = norms[j + 2];
            assert!((g[(j, j)].re - expected).abs() < 1e-12 * expected, "j={j}");
            if j + 1 < g.ncols() {
                assert!(g[(j, j + 1)].norm() < 1e-12 * expected);
            }
        }
    }

    #[test]
    fn inner_products() {
        let d = domain();
        let z = LaurentPolynomial::monomial(1);
        let one = LaurentPolynomial::constant(c(1.0, 0.0));
        let zz = inner_product(&z, &z, &d, &SpaceTag::smirnov(), 64).unwrap();
        assert!((zz.re - 2.0 * PI * 1.125).abs() < 1e-12);
        for tag in [SpaceTag::smirnov(), SpaceTag::bergman()] {
            assert!(inner_product(&z, &one, &d, &tag, 64).unwrap().norm() < 1e-13);
        }
    }

    #[test]
    fn hardy_constant_has_unit_norm() {
        let d = domain();
        let norms = monomial_norms(&d, &SpaceTag::hardy(), 4).unwrap();
        assert!((norms[4] - 1.0).abs() < 1e-10);
    }
}
