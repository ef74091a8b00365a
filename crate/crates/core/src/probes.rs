//! Numerical probes: the reproducing kernel of square-integrable harmonic functions,
//! the harmonic part of `|G|²` for area extremals, and a finite-difference clamped
//! biharmonic Green's function on the disk and the annulus.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::analytic::Analytic;
use crate::error::{Error, Result};
use crate::geometry::{gauss_legendre, AnnulusDomain, RADIAL_ORDER};
use crate::spaces::{Quadrature, SpaceTag};

/// Degree of the harmonic test family used by [`bergman_decomposition_residual`].
pub const TEST_DEGREE: i32 = 8;

/// Reproducing kernel of the real harmonic functions in `L²(dA/π)` on the annulus.
///
/// In polar form the space splits into the block `{1, log ρ}` and, for each `n ≥ 1`,
/// the blocks `{ρ^n, ρ^{-n}}·cos nθ` and `{ρ^n, ρ^{-n}}·sin nθ`; every block Gram is
/// a closed-form radial integral, so
/// `H(z,w) = [1, log ρ] G₀⁻¹ [1, log ρ']ᵀ + Σ cos n(θ − θ')·[ρ^n, ρ^{-n}] G_n⁻¹ [ρ'^n, ρ'^{-n}]ᵀ`.
#[derive(Debug, Clone)]
pub struct HarmonicKernel {
    pub inner_radius: f64,
    pub pole: Complex64,
    pub truncation: usize,
    /// Inverse block Grams `[a, b, c]` for the symmetric `[[a, b], [b, c]]`.
    blocks: Vec<[f64; 3]>,
}

/// `∫_r^1 ρ^p dρ`.
fn power_integral(r: f64, p: i32) -> f64 {
    if p == -1 {
        -r.ln()
    } else {
        (1.0 - r.powi(p + 1)) / (p + 1) as f64
    }
}

fn invert_sym([a, b, c]: [f64; 3]) -> [f64; 3] {
    let det = a * c - b * b;
    [c / det, -b / det, a / det]
}

pub fn harmonic_l2_kernel(domain: &AnnulusDomain, z0: Complex64, n: usize) -> Result<HarmonicKernel> {
    domain.require_interior(z0, "pole")?;
    let r = domain.inner_radius();
    let lr = r.ln();
    let r2 = r * r;
    // (1/π)·2π·∫ρ{1, log ρ, log² ρ} dρ
    let m0 = 2.0 * power_integral(r, 1);
    let m1 = 2.0 * (-(r2 / 2.0 * lr - r2 / 4.0) - 0.25);
    let m2 = 2.0 * (0.25 - (r2 / 2.0 * lr * lr - r2 / 2.0 * lr + r2 / 4.0));
    let mut blocks = vec![invert_sym([m0, m1, m2])];
    for k in 1..=n as i32 {
        // (1/π)·π·∫ρ{ρ^{2k}, 1, ρ^{-2k}} dρ
        blocks.push(invert_sym([
            power_integral(r, 2 * k + 1),
            power_integral(r, 1),
            power_integral(r, 1 - 2 * k),
        ]));
    }
    Ok(HarmonicKernel {
        inner_radius: r,
        pole: z0,
        truncation: n,
        blocks,
    })
}

impl HarmonicKernel {
    pub fn eval_pair(&self, z: Complex64, w: Complex64) -> f64 {
        let (rz, tz) = z.to_polar();
        let (rw, tw) = w.to_polar();
        let quad = |[a, b, c]: [f64; 3], x: [f64; 2], y: [f64; 2]| {
            a * x[0] * y[0] + b * (x[0] * y[1] + x[1] * y[0]) + c * x[1] * y[1]
        };
        let mut acc = quad(self.blocks[0], [1.0, rz.ln()], [1.0, rw.ln()]);
        for (k, blk) in self.blocks.iter().enumerate().skip(1) {
            let k = k as i32;
            acc += (k as f64 * (tz - tw)).cos() * quad(*blk, [rz.powi(k), rz.powi(-k)], [rw.powi(k), rw.powi(-k)]);
        }
        acc
    }

    /// `H(z, z₀)`.
    pub fn eval(&self, z: Complex64) -> f64 {
        self.eval_pair(z, self.pole)
    }
}

/// Annulus defect constant `c₀ = 2π∫_r^1 ρ log ρ dρ`, by Gauss–Legendre quadrature.
pub fn defect_constant(domain: &AnnulusDomain) -> f64 {
    let (x, w) = gauss_legendre(RADIAL_ORDER, domain.inner_radius(), 1.0);
    2.0 * PI * x.iter().zip(&w).map(|(rho, wi)| wi * rho * rho.ln()).sum::<f64>()
}

/// Real harmonic test family of degree `≤ d`: `1`, `log ρ`, `Re z^n`, `Im z^n` for `1 ≤ |n| ≤ d`.
fn test_family(d: i32) -> Vec<Box<dyn Fn(Complex64) -> f64>> {
    let mut out: Vec<Box<dyn Fn(Complex64) -> f64>> = vec![Box::new(|_| 1.0), Box::new(|z: Complex64| z.norm().ln())];
    for n in (-d..=d).filter(|n| *n != 0) {
        out.push(Box::new(move |z: Complex64| z.powi(n).re));
        out.push(Box::new(move |z: Complex64| z.powi(n).im));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionFit {
    pub lambda1: f64,
    /// Largest unexplained pairing over the unit-normalised test family.
    pub residual: f64,
}

/// Fits `⟨|G|² − H(·,z₀), u⟩ ≈ λ₁⟨ν₁, u⟩` over the degree-8 harmonic test family, where
/// `ν₁ = log|z| − P(log|z|)` and `P` projects onto the real parts of Laurent monomials
/// of degree `≤ 8` with the area Gram. `G` should have unit norm.
pub fn bergman_decomposition_residual(
    g: &dyn Analytic,
    domain: &AnnulusDomain,
    z0: Complex64,
    m: usize,
) -> Result<DecompositionFit> {
    let quad = Quadrature::for_space(domain, &SpaceTag::bergman(), m)?;
    let nodes: Vec<(Complex64, f64)> = quad
        .rings
        .iter()
        .flat_map(|ring| (0..ring.len()).map(move |k| (ring.point(k), ring.weights[k])))
        .collect();
    let h = harmonic_l2_kernel(domain, z0, 64)?;
    let family = test_family(TEST_DEGREE);
    // Node values: one column per family member, plus the weights.
    let values = DMatrix::from_fn(nodes.len(), family.len(), |k, i| family[i](nodes[k].0));
    let weights = DVector::from_iterator(nodes.len(), nodes.iter().map(|(_, w)| *w));
    let weighted = DMatrix::from_fn(nodes.len(), family.len(), |k, i| weights[k] * values[(k, i)]);
    let full_gram = values.transpose() * &weighted;

    // Re-analytic family: everything in the test family except log ρ (column 1).
    let keep: Vec<usize> = (0..family.len()).filter(|i| *i != 1).collect();
    let gram = DMatrix::from_fn(keep.len(), keep.len(), |i, j| full_gram[(keep[i], keep[j])]);
    let rhs = DVector::from_fn(keep.len(), |i, _| full_gram[(1, keep[i])]);
    let coef = gram
        .cholesky()
        .ok_or(Error::SingularGram { condition: f64::INFINITY })?
        .solve(&rhs);
    // Pairings of ν₁ with the family follow from the Gram directly.
    let nu_pair = DVector::from_fn(family.len(), |u, _| {
        full_gram[(1, u)] - keep.iter().zip(coef.iter()).map(|(&i, c)| c * full_gram[(i, u)]).sum::<f64>()
    });
    let defect = DVector::from_iterator(nodes.len(), nodes.iter().map(|(z, _)| g.eval(*z).norm_sqr() - h.eval(*z)));
    let defect_pair = weighted.transpose() * defect;

    let rows: Vec<(f64, f64)> = (0..family.len())
        .map(|u| {
            let norm = full_gram[(u, u)].sqrt();
            (defect_pair[u] / norm, nu_pair[u] / norm)
        })
        .collect();
    let see: f64 = rows.iter().map(|(_, e)| e * e).sum();
    let sde: f64 = rows.iter().map(|(d, e)| d * e).sum();
    let lambda1 = if see > 0.0 { sde / see } else { 0.0 };
    let residual = rows
        .iter()
        .map(|(d, e)| (d - lambda1 * e).abs())
        .fold(0.0, f64::max);
    Ok(DecompositionFit { lambda1, residual })
}

/// Uniform polar grid with node values; `values[i][j]` sits at `(radii[i], angles[j])`.
#[derive(Debug, Clone, Serialize)]
pub struct PolarGrid {
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl PolarGrid {
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.radii[i], self.angles[j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PlateDomain {
    /// Unit disk on the shifted grid `ρ_i = (i + ½)h`, clamped at `ρ = 1`.
    Disk,
    /// `r < |z| < 1`, clamped on both circles.
    Annulus { inner_radius: f64 },
}

impl PlateDomain {
    pub fn annulus(domain: &AnnulusDomain) -> Self {
        PlateDomain::Annulus { inner_radius: domain.inner_radius() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BiharmonicSolution {
    pub domain: PlateDomain,
    pub grid: PolarGrid,
    pub pole: Complex64,
    /// Grid node carrying the load.
    pub pole_node: (usize, usize),
    pub min_value: f64,
    pub max_value: f64,
    /// Cells `(i, j)` spanning nodes `i..=i+1`, `j..=j+1` whose corners take both signs.
    pub sign_change_cells: Vec<(usize, usize)>,
}

/// Radial layout: node radii, spacing, index range of unknowns, boundary nodes.
struct RadialGrid {
    rho: Vec<f64>,
    h: f64,
    /// Whether node 0 is a clamped boundary (annulus) or the first shifted node (disk).
    inner_boundary: bool,
}

impl RadialGrid {
    fn new(domain: PlateDomain, n: usize) -> Self {
        match domain {
            PlateDomain::Disk => {
                let h = 1.0 / (n as f64 - 0.5);
                RadialGrid {
                    rho: (0..n).map(|i| (i as f64 + 0.5) * h).collect(),
                    h,
                    inner_boundary: false,
                }
            }
            PlateDomain::Annulus { inner_radius } => {
                let h = (1.0 - inner_radius) / (n - 1) as f64;
                RadialGrid {
                    rho: (0..n).map(|i| inner_radius + i as f64 * h).collect(),
                    h,
                    inner_boundary: true,
                }
            }
        }
    }

    fn unknowns(&self) -> std::ops::Range<usize> {
        let n = self.rho.len();
        if self.inner_boundary {
            1..n - 1
        } else {
            0..n - 1
        }
    }

    /// Full-node matrix of the polar Laplacian for angular symbol `mu` (`∂²_θ → −mu`),
    /// conservative in ρ; boundary rows fold in the mirrored ghost `u_ghost = u_{neighbour}`
    /// that enforces `∂u/∂ρ = 0` alongside `u = 0`.
    fn laplacian(&self, mu: f64) -> DMatrix<f64> {
        let n = self.rho.len();
        let h2 = self.h * self.h;
        let mut l = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let rho = self.rho[i];
            let up = rho + self.h / 2.0;
            let down = if !self.inner_boundary && i == 0 { 0.0 } else { rho - self.h / 2.0 };
            if i == n - 1 {
                l[(i, i - 1)] = (up + down) / (rho * h2);
                continue;
            }
            if self.inner_boundary && i == 0 {
                l[(i, 1)] = (up + down) / (rho * h2);
                continue;
            }
            l[(i, i)] = -(up + down) / (rho * h2) - mu / (rho * rho);
            l[(i, i + 1)] = up / (rho * h2);
            if i > 0 {
                l[(i, i - 1)] = down / (rho * h2);
            }
        }
        l
    }
}

/// Angular symbol of the periodic second difference for mode `k` of `n_theta`.
fn angular_symbol(k: usize, n_theta: usize) -> f64 {
    let ht = 2.0 * PI / n_theta as f64;
    4.0 / (ht * ht) * (PI * k as f64 / n_theta as f64).sin().powi(2)
}

/// Clamped biharmonic Green's function `Δ²g = δ_pole`, `g = ∂g/∂n = 0` on the boundary,
/// by second-order finite differences on an `n_rho × n_theta` polar grid.
///
/// The operator is the square of the five-point polar Laplacian. It is diagonalised
/// in θ by the DFT, leaving one dense radial system per angular mode. The load is a
/// discrete delta at the nearest node, scaled by the inverse cell area `ρ h_ρ h_θ`.
pub fn biharmonic_green(domain: PlateDomain, pole: Complex64, n_rho: usize, n_theta: usize) -> Result<BiharmonicSolution> {
    if n_rho < 32 || n_theta < 32 {
        return Err(Error::RejectArgument(format!(
            "grid {n_rho}×{n_theta} is below the 32×32 minimum"
        )));
    }
    let rg = RadialGrid::new(domain, n_rho);
    let ht = 2.0 * PI / n_theta as f64;
    let (pr, pt) = pole.to_polar();
    let pi_node = (0..n_rho)
        .min_by(|&a, &b| (rg.rho[a] - pr).abs().total_cmp(&(rg.rho[b] - pr).abs()))
        .unwrap();
    let pj_node = ((pt.rem_euclid(2.0 * PI) / ht).round() as usize) % n_theta;
    let interior = rg.unknowns();
    let to_outer = interior.end as i64 - pi_node as i64;
    let clearance = if rg.inner_boundary { to_outer.min(pi_node as i64) } else { to_outer };
    if clearance < 2 {
        return Err(Error::RejectGeometry(format!(
            "pole {pole} is within two grid cells of the boundary"
        )));
    }

    let load = 1.0 / (rg.rho[pi_node] * rg.h * ht);
    // DFT of a delta at angle j*: e^{-2πi k j*/n}.
    let dim = interior.len();
    let offset = interior.start;
    let mut modes: Vec<DVector<f64>> = Vec::with_capacity(n_theta);
    let mut solved: Vec<Option<DVector<f64>>> = vec![None; n_theta];
    for k in 0..n_theta {
        let kk = k.min(n_theta - k);
        if solved[kk].is_none() {
            let l = rg.laplacian(angular_symbol(kk, n_theta));
            let l2 = &l * &l;
            let a = l2.view((offset, offset), (dim, dim)).into_owned();
            let lu = a.clone().lu();
            let mut rhs = DVector::<f64>::zeros(dim);
            rhs[pi_node - offset] = load;
            let x = lu.solve(&rhs).ok_or_else(|| Error::SolverFail(format!("mode {kk} is singular")))?;
            let res = (&a * &x - &rhs).amax() / load;
            if !(res <= 1e-6) {
                return Err(Error::SolverFail(format!("mode {kk} residual {res:e}")));
            }
            solved[kk] = Some(x);
        }
        modes.push(solved[kk].clone().unwrap());
    }

    // u_{i,j} = (1/n) Σ_k x_k[i] e^{-2πi k j*/n} e^{2πi k j/n}
    let mut values = vec![vec![0.0; n_theta]; n_rho];
    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(n_theta);
    for (row, i) in interior.clone().enumerate() {
        let mut buf: Vec<Complex64> = (0..n_theta)
            .map(|k| modes[k][row] * Complex64::from_polar(1.0, -2.0 * PI * (k * pj_node) as f64 / n_theta as f64))
            .collect();
        ifft.process(&mut buf);
        for j in 0..n_theta {
            values[i][j] = buf[j].re / n_theta as f64;
        }
    }
    let grid = PolarGrid {
        radii: rg.rho.clone(),
        angles: (0..n_theta).map(|j| j as f64 * ht).collect(),
        values,
    };
    let all = || grid.values.iter().flatten().copied();
    let min_value = all().fold(f64::INFINITY, f64::min);
    let max_value = all().fold(f64::NEG_INFINITY, f64::max);
    let sign_change_cells = sign_changes(&grid, max_value.abs().max(min_value.abs()) * 1e-12);
    Ok(BiharmonicSolution {
        domain,
        grid,
        pole,
        pole_node: (pi_node, pj_node),
        min_value,
        max_value,
        sign_change_cells,
    })
}

fn sign_changes(grid: &PolarGrid, tol: f64) -> Vec<(usize, usize)> {
    let (nr, nt) = (grid.radii.len(), grid.angles.len());
    let mut out = Vec::new();
    for i in 0..nr - 1 {
        for j in 0..nt {
            let corners = [
                grid.values[i][j],
                grid.values[i + 1][j],
                grid.values[i][(j + 1) % nt],
                grid.values[i + 1][(j + 1) % nt],
            ];
            if corners.iter().any(|v| *v > tol) && corners.iter().any(|v| *v < -tol) {
                out.push((i, j));
            }
        }
    }
    out
}

impl BiharmonicSolution {
    /// Normwise backward error `‖Δ²_h u − f‖∞ / (‖Δ_h‖∞²‖u‖∞ + ‖f‖∞)`, applying the grid
    /// operator directly in physical space (no Fourier transform).
    pub fn operator_residual(&self) -> f64 {
        let rg = RadialGrid::new(self.domain, self.grid.radii.len());
        let nt = self.grid.angles.len();
        let ht = 2.0 * PI / nt as f64;
        let nr = rg.rho.len();
        let u = &self.grid.values;
        let lap = |f: &dyn Fn(usize, usize) -> f64, i: usize, j: usize| -> f64 {
            let rho = rg.rho[i];
            let up = rho + rg.h / 2.0;
            let down = if !rg.inner_boundary && i == 0 { 0.0 } else { rho - rg.h / 2.0 };
            let below = if i == 0 {
                if rg.inner_boundary { f(1, j) } else { 0.0 }
            } else {
                f(i - 1, j)
            };
            let above = if i == nr - 1 { f(nr - 2, j) } else { f(i + 1, j) };
            let c = f(i, j);
            let radial = (up * (above - c) - down * (c - below)) / (rho * rg.h * rg.h);
            let ang = (f(i, (j + 1) % nt) - 2.0 * c + f(i, (j + nt - 1) % nt)) / (ht * ht * rho * rho);
            radial + ang
        };
        let uf = |i: usize, j: usize| u[i][j];
        let mut v = DMatrix::<f64>::zeros(nr, nt);
        for i in 0..nr {
            for j in 0..nt {
                v[(i, j)] = lap(&uf, i, j);
            }
        }
        let vf = |i: usize, j: usize| v[(i, j)];
        let load = 1.0 / (rg.rho[self.pole_node.0] * rg.h * ht);
        // ‖L‖∞ from the stencil row sums; ‖L²‖∞ ≤ ‖L‖∞².
        let lap_norm = (0..nr)
            .map(|i| {
                let rho = rg.rho[i];
                2.0 * (2.0 * rho + rg.h) / (rho * rg.h * rg.h) + 4.0 / (ht * ht * rho * rho)
            })
            .fold(0.0, f64::max);
        let u_norm = u.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut worst = 0.0f64;
        for i in rg.unknowns() {
            for j in 0..nt {
                let target = if (i, j) == self.pole_node { load } else { 0.0 };
                worst = worst.max((lap(&vf, i, j) - target).abs());
            }
        }
        worst / (lap_norm * lap_norm * u_norm + load)
    }

    /// Physical centre `(ρ, θ)` of a cell.
    pub fn cell_centre(&self, (i, j): (usize, usize)) -> (f64, f64) {
        let nt = self.grid.angles.len();
        let ht = 2.0 * PI / nt as f64;
        (
            0.5 * (self.grid.radii[i] + self.grid.radii[i + 1]),
            (j as f64 + 0.5) * ht,
        )
    }
}

pub const RESOLUTION_WARNING: &str = "RESOLUTION_WARNING";

#[derive(Debug, Clone, Serialize)]
pub struct RefinementReport {
    pub coarse: BiharmonicSolution,
    pub fine: BiharmonicSolution,
    /// `|min_fine − min_coarse| / |min_fine|`.
    pub min_value_change: f64,
    /// Every sign-change cell of either grid has one in the other within one coarse cell.
    pub cells_persist: bool,
    pub warnings: Vec<String>,
}

/// Solves on `n_rho × n_theta` and on the doubled grid and compares the sign structure.
pub fn biharmonic_refinement(domain: PlateDomain, pole: Complex64, n_rho: usize, n_theta: usize) -> Result<RefinementReport> {
    let coarse = biharmonic_green(domain, pole, n_rho, n_theta)?;
    let fine = biharmonic_green(domain, pole, 2 * n_rho, 2 * n_theta)?;
    let min_value_change = if fine.min_value != 0.0 {
        (fine.min_value - coarse.min_value).abs() / fine.min_value.abs()
    } else {
        (fine.min_value - coarse.min_value).abs()
    };
    let dr = coarse.grid.radii[1] - coarse.grid.radii[0];
    let dt = 2.0 * PI / n_theta as f64;
    let near = |a: (f64, f64), b: (f64, f64)| {
        let dth = (a.1 - b.1).rem_euclid(2.0 * PI);
        let dth = dth.min(2.0 * PI - dth);
        (a.0 - b.0).abs() <= dr * 1.0001 && dth <= dt * 1.0001
    };
    let cc: Vec<(f64, f64)> = coarse.sign_change_cells.iter().map(|&c| coarse.cell_centre(c)).collect();
    let fc: Vec<(f64, f64)> = fine.sign_change_cells.iter().map(|&c| fine.cell_centre(c)).collect();
    let cells_persist = cc.iter().all(|a| fc.iter().any(|b| near(*a, *b)))
        && fc.iter().all(|b| cc.iter().any(|a| near(*a, *b)));
    let mut warnings = Vec::new();
    if min_value_change > 0.1 {
        warnings.push(RESOLUTION_WARNING.to_string());
    }
    Ok(RefinementReport {
        coarse,
        fine,
        min_value_change,
        cells_persist,
        warnings,
    })
}
