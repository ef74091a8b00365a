//! Constrained least-norm extremal problems, the Blaschke-times-weighted-kernel
//! realisation of their solutions, candidate divisors, and the operator-norm probe
//! for division in the Bergman space.
//!
//! Two equivalent problems:
//! `sup{|f(z₀)| : f(z_j) = 0, ‖f‖ = 1}` and `inf{‖g‖ : g(z₀) = 1, g(z_j) = 0}`.
//! The second is a linearly constrained quadratic program in the Laurent window and
//! is solved through its bordered (KKT) system.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::{Analytic, AnalyticRef};
use crate::error::{Error, Result};
use crate::geometry::AnnulusDomain;
use crate::inner::{blaschke_factor, InnerFunctionSpec};
use crate::kernels::{build_kernel, count_zeros, full_ring, locate_zeros};
use crate::spaces::{GramSystem, LaurentPolynomial, Quadrature, SpaceKind, SpaceTag};

/// Relative singular-value floor below which evaluation rows count as dependent.
const CONSTRAINT_RANK_TOL: f64 = 1e-11;

/// Truncation ladder for the division probe.
pub const LADDER: [usize; 4] = [8, 16, 24, 32];

pub const EXTRANEOUS_ZERO: &str = "EXTRANEOUS_ZERO";

#[derive(Debug, Clone)]
pub struct ExtremalProblem {
    /// Domain; its base point is `z₀`.
    pub domain: AnnulusDomain,
    pub space: SpaceTag,
    pub base: Complex64,
    pub zeros: Vec<Complex64>,
    pub truncation: usize,
}

impl ExtremalProblem {
    pub fn new(domain: &AnnulusDomain, space: SpaceTag, zeros: Vec<Complex64>, truncation: usize) -> Result<Self> {
        let base = domain.base_point();
        for &z in &zeros {
            domain.require_interior(z, "zero")?;
            if (z - base).norm() < 1e-12 {
                return Err(Error::RejectArgument(format!("zero {z} coincides with the base point")));
            }
        }
        if truncation == 0 {
            return Err(Error::RejectArgument("truncation must be positive".into()));
        }
        Ok(Self {
            domain: *domain,
            space,
            base,
            zeros,
            truncation,
        })
    }

    fn points(&self) -> Vec<Complex64> {
        std::iter::once(self.base).chain(self.zeros.iter().copied()).collect()
    }
}

/// Minimiser of `‖g‖` subject to `g(z₀) = 1` and `g(z_j) = 0`, over `span{z^n : |n| ≤ N}`.
pub fn solve_extremal(p: &ExtremalProblem, m: usize) -> Result<LaurentPolynomial> {
    let gram = GramSystem::assemble(&p.domain, &p.space, p.truncation, m)?;
    solve_with(&gram, p)
}

fn solve_with(gram: &GramSystem, p: &ExtremalProblem) -> Result<LaurentPolynomial> {
    let dim = gram.dim();
    let points = p.points();
    let k = points.len();
    // Constraint rows, each normalised to unit length.
    let mut c = DMatrix::<Complex64>::zeros(k, dim);
    let mut rhs = DVector::<Complex64>::zeros(dim + k);
    for (i, &z) in points.iter().enumerate() {
        let row = gram.basis_values(z);
        let len = row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for (j, v) in row.iter().enumerate() {
            c[(i, j)] = v / len;
        }
        if i == 0 {
            rhs[dim] = Complex64::new(1.0 / len, 0.0);
        }
    }
    let sv = c.clone().svd(false, false).singular_values;
    let (lo, hi) = sv
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
    if k > dim || lo <= CONSTRAINT_RANK_TOL * hi {
        return Err(Error::SingularConstraints);
    }
    // [F  C*; C  0] [a; μ] = [0; b]
    let mut kkt = DMatrix::<Complex64>::zeros(dim + k, dim + k);
    kkt.view_mut((0, 0), (dim, dim)).copy_from(&gram.form);
    kkt.view_mut((0, dim), (dim, k)).copy_from(&c.adjoint());
    kkt.view_mut((dim, 0), (k, dim)).copy_from(&c);
    let lu = kkt.clone().lu();
    let mut x = lu.solve(&rhs).ok_or(Error::SingularConstraints)?;
    if let Some(dx) = lu.solve(&(&rhs - &kkt * &x)) {
        x += dx;
    }
    Ok(gram.to_laurent(&x.as_slice()[..dim]))
}

/// `‖f‖` in the problem's space.
pub fn extremal_norm(f: &LaurentPolynomial, p: &ExtremalProblem, m: usize) -> Result<f64> {
    let gram = GramSystem::assemble(&p.domain, &p.space, p.truncation, m)?;
    let a = DVector::from_vec(gram.from_laurent(f));
    Ok((a.adjoint() * &gram.form * &a)[(0, 0)].re.max(0.0).sqrt())
}

/// The maximiser of `sup{|f(z₀)| : f(z_j) = 0, ‖f‖ = 1}`, built independently of the
/// KKT solve as the normalised projection of `K(·, z₀)` onto `{f : f(z_j) = 0}`.
/// Returns the maximiser and the supremum.
pub fn maximize_extremal(p: &ExtremalProblem, m: usize) -> Result<(LaurentPolynomial, f64)> {
    let k = build_kernel(&p.domain, &p.space, p.truncation, m)?;
    let base = k.section(p.base);
    let secs: Vec<LaurentPolynomial> = p.zeros.iter().map(|&z| k.section(z)).collect();
    let nz = secs.len();
    let mut proj = base.clone();
    if nz > 0 {
        let kzz = DMatrix::from_fn(nz, nz, |i, j| secs[j].eval(p.zeros[i]));
        let rhs = DVector::from_fn(nz, |i, _| base.eval(p.zeros[i]));
        let coef = kzz.lu().solve(&rhs).ok_or(Error::SingularConstraints)?;
        for (s, cf) in secs.iter().zip(coef.iter()) {
            proj = &proj - &s.scale(*cf);
        }
    }
    // ‖P k₀‖² = (P k₀)(z₀).
    let value = proj.eval(p.base).re;
    if !(value > 0.0) {
        return Err(Error::SingularConstraints);
    }
    let sup = value.sqrt();
    Ok((proj.scale(Complex64::new(1.0 / sup, 0.0)), sup))
}

/// Polar grid `ρ_i = r + (i + ½)(1 − r)/n`, `θ_j = 2πj/n`.
pub fn polar_grid(domain: &AnnulusDomain, n: usize) -> Vec<Complex64> {
    let r = domain.inner_radius();
    (0..n)
        .flat_map(|i| {
            let rho = r + (i as f64 + 0.5) * (1.0 - r) / n as f64;
            (0..n).map(move |j| Complex64::from_polar(rho, 2.0 * PI * j as f64 / n as f64))
        })
        .collect()
}

/// `max |f − g|` over the 32×32 polar grid.
pub fn grid_deviation(f: &dyn Analytic, g: &dyn Analytic, domain: &AnnulusDomain) -> f64 {
    polar_grid(domain, 32)
        .into_iter()
        .map(|z| (f.eval(z) - g.eval(z)).norm())
        .fold(0.0, f64::max)
}

/// `B_{z₁}(z)·k^{|B|²}(z, z₀)`, normalised to the value 1 at `z₀`.
#[derive(Clone)]
pub struct KernelExtremal {
    pub blaschke: InnerFunctionSpec,
    pub kernel: LaurentPolynomial,
    scale: Complex64,
}

impl std::fmt::Debug for KernelExtremal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelExtremal").field("scale", &self.scale).finish_non_exhaustive()
    }
}

impl Analytic for KernelExtremal {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.blaschke.eval(z) * self.kernel.eval(z) * self.scale
    }
}

/// The weighted-kernel form of the single-zero extremal.
pub fn kernel_extremal(p: &ExtremalProblem, m: usize) -> Result<KernelExtremal> {
    let [z1] = p.zeros[..] else {
        return Err(Error::RejectArgument("the kernel form needs exactly one zero".into()));
    };
    let blaschke = blaschke_factor(&p.domain, z1)?;
    let weight: AnalyticRef = Arc::new(blaschke.clone());
    let tag = p.space.unweighted().weighted(weight);
    let kernel = build_kernel(&p.domain, &tag, p.truncation, m)?.section(p.base);
    let scale = 1.0 / (blaschke.eval(p.base) * kernel.eval(p.base));
    Ok(KernelExtremal { blaschke, kernel, scale })
}

/// `max |G_KKT − B·k^{|B|²}|` over a 32×32 polar grid, both normalised by `G(z₀) = 1`.
pub fn extremal_identity_check(p: &ExtremalProblem, m: usize) -> Result<f64> {
    let g = solve_extremal(p, m)?;
    let h = kernel_extremal(p, m)?;
    Ok(grid_deviation(&g, &h, &p.domain))
}

/// `max_{|n| ≤ N/2} |∮ z^n |G|² dω_{z₀} − z₀^n| / sup_Γ |z^n|` in the harmonic-measure
/// Hardy space. The scaling keeps negative powers, which reach `r^n` on the inner
/// circle, comparable with the rest of the family.
pub fn repro_fact_check(g: &LaurentPolynomial, p: &ExtremalProblem, m: usize) -> Result<f64> {
    if p.space.kind != SpaceKind::HardyHarmonicMeasure || p.space.is_weighted() {
        return Err(Error::RejectArgument(
            "the reproducing identity holds for the harmonic-measure Hardy space".into(),
        ));
    }
    let quad = Quadrature::for_space(&p.domain, &p.space, m)?;
    let half = (p.truncation / 2) as i32;
    let mut worst = 0.0f64;
    for n in -half..=half {
        let lhs = quad.integrate(|z| z.powi(n) * g.eval(z).norm_sqr());
        let scale = p.domain.inner_radius().powi(n.min(0));
        worst = worst.max((lhs - p.base.powi(n)).norm() / scale);
    }
    Ok(worst)
}

/// The sup-maximiser from the KKT solve: `G/‖G‖`.
pub fn normalized_extremal(p: &ExtremalProblem, m: usize) -> Result<LaurentPolynomial> {
    let g = solve_extremal(p, m)?;
    let norm = extremal_norm(&g, p, m)?;
    Ok(g.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// `G̃ = B_{z₁}·k^{|B|²}_{z₀} / B_{w*}`, with `w*` the extraneous zero of the weighted kernel.
#[derive(Clone, Debug)]
pub struct CandidateDivisor {
    pub extremal: KernelExtremal,
    pub kernel_zero: Complex64,
    pub divisor: InnerFunctionSpec,
}

impl Analytic for CandidateDivisor {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.extremal.eval(z) / self.divisor.eval(z)
    }
}

/// Candidate divisor in the Bergman space of `domain` (base `z₀`) for a single zero `z₁`.
pub fn candidate_divisor(domain: &AnnulusDomain, z1: Complex64, n: usize, m: usize) -> Result<CandidateDivisor> {
    let p = ExtremalProblem::new(domain, SpaceTag::bergman(), vec![z1], n)?;
    let extremal = kernel_extremal(&p, m)?;
    let kernel_zero = locate_zeros(&extremal.kernel, domain, 1)?.locations[0];
    let divisor = blaschke_factor(domain, kernel_zero)?;
    Ok(CandidateDivisor { extremal, kernel_zero, divisor })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisorReport {
    /// Operator-norm estimate `‖f ↦ f/G‖` at the largest truncation.
    pub constant_estimate: f64,
    pub per_truncation: Vec<(usize, f64)>,
    /// Zeros of the unweighted Bergman kernel `K(·, z₀)`.
    pub zero_locations_of_kernel: Vec<Complex64>,
    /// Zeros of `G` other than `z₁`.
    pub extraneous_zeros: Vec<Complex64>,
    pub flags: Vec<String>,
    pub notes: String,
}

/// Squared operator norm of `f ↦ f/G` on `{f : f(z₁) = 0}` truncated to the basis
/// `(z − z₁)z^k`, `|k| ≤ N`: the largest generalised eigenvalue of the Bergman Gram
/// pair (divided basis, original basis).
pub fn division_eigenvalue(g: &dyn Analytic, z1: Complex64, domain: &AnnulusDomain, n: usize, m: usize) -> Result<f64> {
    let quad = Quadrature::for_space(domain, &SpaceTag::bergman(), m)?;
    let nodes: Vec<(Complex64, f64)> = quad
        .rings
        .iter()
        .flat_map(|ring| (0..ring.len()).map(move |k| (ring.point(k), ring.weights[k])))
        .collect();
    let gv: Vec<Complex64> = nodes.iter().map(|(z, _)| g.eval(*z)).collect();
    division_eigenvalue_at(&nodes, &gv, z1, n)
}

fn division_eigenvalue_at(nodes: &[(Complex64, f64)], gv: &[Complex64], z1: Complex64, n: usize) -> Result<f64> {
    let dim = 2 * n + 1;
    let ni = n as i32;
    let mut vo = DMatrix::<Complex64>::zeros(nodes.len(), dim);
    let mut vd = DMatrix::<Complex64>::zeros(nodes.len(), dim);
    for (q, ((z, w), gz)) in nodes.iter().zip(gv).enumerate() {
        let sw = w.sqrt();
        let lin = *z - z1;
        let mut zk = z.powi(-ni);
        for k in 0..dim {
            let e = lin * zk * sw;
            vo[(q, k)] = e;
            vd[(q, k)] = e / gz;
            zk *= z;
        }
    }
    let b = vo.adjoint() * &vo;
    let a = vd.adjoint() * &vd;
    // Jacobi scaling by the original Gram keeps the Cholesky factor well conditioned.
    let s: Vec<f64> = (0..dim).map(|j| 1.0 / b[(j, j)].re.sqrt()).collect();
    let b = DMatrix::from_fn(dim, dim, |i, j| b[(i, j)] * (s[i] * s[j]));
    let a = DMatrix::from_fn(dim, dim, |i, j| a[(i, j)] * (s[i] * s[j]));
    let chol = b.cholesky().ok_or(Error::SingularGram { condition: f64::INFINITY })?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(Error::SingularGram { condition: f64::INFINITY })?;
    let mut c = &linv * a * linv.adjoint();
    c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(c).eigenvalues;
    let top = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() || top <= 0.0 {
        return Err(Error::SingularGram { condition: f64::INFINITY });
    }
    Ok(top)
}

/// Runs the division probe over the ladder entries `≤ N` (and `N` itself).
///
/// Zeros of `G` other than `z₁` make quotients meromorphic; they are located and
/// flagged `EXTRANEOUS_ZERO`.
pub fn quasicontract_estimate(
    g: &dyn Analytic,
    z1: Complex64,
    domain: &AnnulusDomain,
    n: usize,
    m: usize,
) -> Result<DivisorReport> {
    domain.require_interior(z1, "zero")?;
    let mut ladder: Vec<usize> = LADDER.iter().copied().filter(|&k| k <= n).collect();
    if ladder.last() != Some(&n) {
        ladder.push(n);
    }
    let quad = Quadrature::for_space(domain, &SpaceTag::bergman(), m)?;
    let nodes: Vec<(Complex64, f64)> = quad
        .rings
        .iter()
        .flat_map(|ring| (0..ring.len()).map(move |k| (ring.point(k), ring.weights[k])))
        .collect();
    let gv: Vec<Complex64> = nodes.iter().map(|(z, _)| g.eval(*z)).collect();
    let per_truncation = ladder
        .iter()
        .map(|&k| Ok((k, division_eigenvalue_at(&nodes, &gv, z1, k)?.sqrt())))
        .collect::<Result<Vec<_>>>()?;
    let constant_estimate = per_truncation.last().map(|p| p.1).unwrap_or(f64::NAN);

    let count = count_zeros(g, domain, full_ring(domain, 1e-3), 1024)?;
    let mut flags = Vec::new();
    let mut extraneous_zeros = Vec::new();
    if count > 1 {
        flags.push(EXTRANEOUS_ZERO.to_string());
        if let Ok(rep) = locate_zeros(g, domain, count as usize) {
            extraneous_zeros = rep
                .locations
                .into_iter()
                .filter(|z| (z - z1).norm() > 1e-6)
                .collect();
        }
    }
    let kernel = build_kernel(domain, &SpaceTag::bergman(), 96, 1024)?.section(domain.base_point());
    let zero_locations_of_kernel = locate_zeros(&kernel, domain, 1)?.locations;

    let growth: Vec<String> = per_truncation
        .windows(2)
        .map(|w| format!("{:.3e}", w[1].1 / w[0].1 - 1.0))
        .collect();
    let notes = format!(
        "{} zero(s) of G in the ring; relative change along the ladder [{}]; \
         estimates are evidence only, not a bound",
        count,
        growth.join(", ")
    );
    Ok(DivisorReport {
        constant_estimate,
        per_truncation,
        zero_locations_of_kernel,
        extraneous_zeros,
        flags,
        notes,
    })
}
