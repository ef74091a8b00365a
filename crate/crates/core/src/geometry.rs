//! The annulus `{r < |z| < 1}`, its boundary quadrature and regular exhaustions.
//!
//! The outer radius is fixed at 1; any other annulus is a dilation of this one.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Component index of the outer circle `|z| = 1`.
pub const OUTER: usize = 1;
/// Component index of the inner circle `|z| = r`.
pub const INNER: usize = 2;

/// The annulus `{r < |z| < 1}` together with a base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusDomain {
    inner_radius: f64,
    base_point: Complex64,
}

impl AnnulusDomain {
    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    /// `log(1/r)`, the conformal modulus of the annulus.
    pub fn modulus(&self) -> f64 {
        -self.inner_radius.ln()
    }

    /// Same annulus, different base point.
    pub fn with_base(&self, base: Complex64) -> Result<Self> {
        make_annulus(self.inner_radius, base)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let rho = z.norm();
        rho > self.inner_radius && rho < 1.0
    }

    /// Distance from `z` to the boundary `Γ` (negative outside).
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        let rho = z.norm();
        (rho - self.inner_radius).min(1.0 - rho)
    }

    /// Radius of the boundary component `component` (1 = outer, 2 = inner).
    pub fn component_radius(&self, component: usize) -> f64 {
        if component == OUTER {
            1.0
        } else {
            self.inner_radius
        }
    }

    pub(crate) fn require_interior(&self, z: Complex64, what: &str) -> Result<()> {
        if self.contains(z) && z.is_finite() {
            Ok(())
        } else {
            Err(Error::RejectGeometry(format!(
                "{what} {z} is not inside the annulus {} < |z| < 1",
                self.inner_radius
            )))
        }
    }
}

/// Validated constructor for the annulus of inner radius `r` with base point `base`.
pub fn make_annulus(r: f64, base: Complex64) -> Result<AnnulusDomain> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::RejectGeometry(format!(
            "inner radius {r} must lie in (0, 1)"
        )));
    }
    let domain = AnnulusDomain {
        inner_radius: r,
        base_point: base,
    };
    domain.require_interior(base, "base point")?;
    Ok(domain)
}

/// A node of the trapezoid rule on one boundary circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySample {
    pub component_index: usize,
    pub angle: f64,
    pub point: Complex64,
    /// Arclength weight.
    pub weight: f64,
}

impl BoundarySample {
    /// Radius of the circle the sample lives on.
    pub fn radius(&self) -> f64 {
        self.point.norm()
    }
}

/// `m` equally spaced trapezoid nodes on boundary component `component`.
pub fn boundary_nodes(
    domain: &AnnulusDomain,
    component: usize,
    m: usize,
) -> Result<Vec<BoundarySample>> {
    boundary_nodes_shifted(domain, component, m, 0.0)
}

/// As [`boundary_nodes`], with all angles rotated by `shift` times the node spacing.
pub fn boundary_nodes_shifted(
    domain: &AnnulusDomain,
    component: usize,
    m: usize,
    shift: f64,
) -> Result<Vec<BoundarySample>> {
    if m < 4 {
        return Err(Error::RejectArgument(format!(
            "at least 4 boundary nodes are required, got {m}"
        )));
    }
    if component != OUTER && component != INNER {
        return Err(Error::RejectArgument(format!(
            "boundary component must be 1 or 2, got {component}"
        )));
    }
    let radius = domain.component_radius(component);
    let step = 2.0 * PI / m as f64;
    let weight = radius * step;
    Ok((0..m)
        .map(|k| {
            let angle = (k as f64 + shift) * step;
            BoundarySample {
                component_index: component,
                angle,
                point: Complex64::from_polar(radius, angle),
                weight,
            }
        })
        .collect())
}

/// Nodes on both circles, outer first.
pub fn all_boundary_nodes(domain: &AnnulusDomain, m: usize) -> Result<Vec<BoundarySample>> {
    let mut nodes = boundary_nodes(domain, OUTER, m)?;
    nodes.extend(boundary_nodes(domain, INNER, m)?);
    Ok(nodes)
}

/// A ring `{inner < |z| < outer}`; exhaustion stages do not share the normal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ring {
    pub inner: f64,
    pub outer: f64,
}

impl Ring {
    pub fn contains(&self, z: Complex64) -> bool {
        let rho = z.norm();
        rho > self.inner && rho < self.outer
    }

    /// Closure of `self` lies in the open ring `other`.
    pub fn compactly_inside(&self, other: &Ring) -> bool {
        self.inner > other.inner && self.outer < other.outer
    }
}

/// Nested rings increasing to the annulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exhaustion {
    pub stages: Vec<Ring>,
}

/// Stage `k` (1-based) is `{r + δ_k < |z| < 1 - δ_k}` with `δ_k = (1 - r) / (4(k + 1))`.
pub fn exhaustion_of(domain: &AnnulusDomain, stages: usize) -> Result<Exhaustion> {
    if stages == 0 {
        return Err(Error::RejectArgument("an exhaustion needs at least one stage".into()));
    }
    let r = domain.inner_radius();
    let rings: Vec<Ring> = (1..=stages)
        .map(|k| {
            let delta = (1.0 - r) / (4.0 * (k as f64 + 1.0));
            Ring {
                inner: r + delta,
                outer: 1.0 - delta,
            }
        })
        .collect();
    if !rings[0].contains(domain.base_point()) {
        return Err(Error::RejectGeometry(format!(
            "base point {} lies outside the first exhaustion stage ({}, {})",
            domain.base_point(),
            rings[0].inner,
            rings[0].outer
        )));
    }
    Ok(Exhaustion { stages: rings })
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..n.div_ceil(2) {
        // Newton from the Chebyshev-like initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor area rule on the annulus for the normalized measure `dA/π`:
/// trapezoid in angle, Gauss–Legendre in radius.
#[derive(Debug, Clone)]
pub struct AreaRule {
    pub points: Vec<Complex64>,
    pub weights: Vec<f64>,
}

/// Radial Gauss–Legendre order used for all area integrals.
pub const RADIAL_ORDER: usize = 64;

pub fn area_rule(domain: &AnnulusDomain, m: usize) -> Result<AreaRule> {
    area_rule_with_order(domain, m, RADIAL_ORDER)
}

pub fn area_rule_with_order(domain: &AnnulusDomain, m: usize, radial: usize) -> Result<AreaRule> {
    if m < 4 || radial < 2 {
        return Err(Error::RejectArgument(format!(
            "area rule needs m >= 4 and radial order >= 2, got {m} and {radial}"
        )));
    }
    let (radii, radial_weights) = gauss_legendre(radial, domain.inner_radius(), 1.0);
    let step = 2.0 * PI / m as f64;
    let mut points = Vec::with_capacity(m * radial);
    let mut weights = Vec::with_capacity(m * radial);
    for (rho, wr) in radii.iter().zip(&radial_weights) {
        for k in 0..m {
            // Half-step offset keeps nodes off the positive real axis.
            let theta = (k as f64 + 0.5) * step;
            points.push(Complex64::from_polar(*rho, theta));
            weights.push(wr * rho * step / PI);
        }
    }
    Ok(AreaRule { points, weights })
}
