//! One function per command; each fills a [`Report`] as it goes, so a failure part-way
//! still leaves the scalars computed so far.

use std::sync::Arc;

use annulus_core::analytic::{Analytic, AnalyticRef};
use annulus_core::extremal::{
    candidate_divisor, extremal_identity_check, extremal_norm, maximize_extremal, normalized_extremal,
    quasicontract_estimate, solve_extremal, DivisorReport, ExtremalProblem, LADDER,
};
use annulus_core::geometry::{all_boundary_nodes, boundary_nodes, AnnulusDomain, INNER, OUTER};
use annulus_core::harmonic::{green, harmonic_measure, harmonic_measure_density, HarmonicFunction};
use annulus_core::inner::{
    blaschke_factor, blaschke_product, division_bound_check, orthogonality_defect, qc_divisor, schottky_fit,
    singular_inner, verify_inner, AtomicSingularMeasure, InnerFunctionSpec, ZeroSet,
};
use annulus_core::kernels::{build_kernel, count_zeros, full_ring, locate_zeros, reproduce_check, CONTOUR_NODES};
use annulus_core::probes::{
    bergman_decomposition_residual, biharmonic_green, biharmonic_refinement, defect_constant, BiharmonicSolution,
    PlateDomain,
};
use annulus_core::spaces::{LaurentPolynomial, SpaceTag};
use annulus_core::{Complex64, Error, Result};
use serde_json::{json, Map, Value};

use crate::config::{Command, RunConfig, Space};

/// Everything a command produces besides metadata.
#[derive(Debug, Default)]
pub struct Report {
    pub scalars: Map<String, Value>,
    pub tolerances: Map<String, Value>,
    pub ladder: Vec<usize>,
    pub warnings: Vec<String>,
    /// Rows `(ρ, θ, re, im)`.
    pub grid: Option<Vec<[f64; 4]>>,
}

impl Report {
    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.scalars.insert(key.to_string(), v.into());
    }

    fn tol(&mut self, key: &str, v: f64) {
        self.tolerances.insert(key.to_string(), v.into());
    }
}

pub fn cjson(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn points(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().copied().map(cjson).collect())
}

fn polar_rows(domain: &AnnulusDomain, cfg: &RunConfig, f: impl Fn(Complex64) -> Complex64) -> Vec<[f64; 4]> {
    let r = domain.inner_radius();
    let (nr, nt) = (cfg.n_rho.max(2), cfg.n_theta);
    let mut rows = Vec::with_capacity(nr * nt);
    for i in 0..nr {
        let rho = r + (1.0 - r) * i as f64 / (nr - 1) as f64;
        for j in 0..nt {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
            let v = f(Complex64::from_polar(rho, theta));
            rows.push([rho, theta, v.re, v.im]);
        }
    }
    rows
}

fn domain(cfg: &RunConfig) -> &AnnulusDomain {
    cfg.domain.as_ref().expect("validated: annulus commands carry a domain")
}

fn space_tag(cfg: &RunConfig, default: Space) -> Result<SpaceTag> {
    let tag = cfg.space.unwrap_or(default).tag();
    match cfg.weight_zero {
        None => Ok(tag),
        Some(a) => {
            let b: AnalyticRef = Arc::new(blaschke_factor(domain(cfg), a)?);
            Ok(tag.weighted(b))
        }
    }
}

pub fn run(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    rep.tol("tol", cfg.tol);
    if cfg.command != Command::QcEstimate {
        rep.ladder = vec![cfg.n];
    }
    match cfg.command {
        Command::Green => run_green(cfg, rep),
        Command::Hmeasure => run_hmeasure(cfg, rep),
        Command::Blaschke => {
            let f = blaschke_product(domain(cfg), &ZeroSet::finite(cfg.zeros.clone()), cfg.tol)?;
            inner_summary(cfg, &f, rep)
        }
        Command::Singular => {
            let mu = AtomicSingularMeasure::new(domain(cfg), cfg.atoms.clone())?;
            let f = singular_inner(domain(cfg), &mu)?;
            inner_summary(cfg, &f, rep)
        }
        Command::InnerVerify => run_inner_verify(cfg, rep),
        Command::Kernel => run_kernel(cfg, rep),
        Command::KernelZeros => run_kernel_zeros(cfg, rep),
        Command::Extremal => run_extremal(cfg, rep),
        Command::CandidateDivisor => run_candidate(cfg, rep),
        Command::QcDivisor => run_qc_divisor(cfg, rep),
        Command::QcEstimate => run_qc_estimate(cfg, rep),
        Command::SchottkyFit => run_schottky(cfg, rep),
        Command::Decomposition => run_decomposition(cfg, rep),
        Command::Biharmonic => run_biharmonic(cfg, rep),
    }
}

fn run_green(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    let pole = cfg.pole.expect("validated");
    let g = green(d, pole, cfg.n)?;
    let residual = all_boundary_nodes(d, 256)?
        .iter()
        .map(|s| g.value(s.point).abs())
        .fold(0.0, f64::max);
    let base = d.base_point();
    rep.put("boundary_residual", residual);
    rep.put("conjugate_period", g.conjugate_period());
    if (base - pole).norm() > 1e-12 {
        let forward = g.value(base);
        let back = green(d, base, cfg.n)?.value(pole);
        rep.put("value_at_base", forward);
        rep.put("symmetry_defect", (forward - back).abs());
    }
    rep.grid = Some(polar_rows(d, cfg, |z| Complex64::new(g.value(z), 0.0)));
    Ok(())
}

fn run_hmeasure(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    let w = harmonic_measure(d, cfg.component)?;
    let other = harmonic_measure(d, 3 - cfg.component)?;
    rep.put("component", cfg.component);
    rep.put("c0", w.c0);
    rep.put("clog", w.clog);
    let base = d.base_point();
    rep.put("value_at_base", w.value(base));
    // Total mass of the harmonic measure at z₀ from the Green's function's normal derivative.
    let g = green(d, base, cfg.n)?;
    let nodes = all_boundary_nodes(d, cfg.m)?;
    let mass = |comp: Option<usize>| -> f64 {
        nodes
            .iter()
            .filter(|s| comp.is_none_or(|c| s.component_index == c))
            .map(|s| harmonic_measure_density(&g, s) * s.weight)
            .sum()
    };
    rep.put("total_mass", mass(None));
    rep.put("component_mass", mass(Some(cfg.component)));
    let partition = nodes
        .iter()
        .map(|s| s.point * 0.5 + base * 0.5)
        .map(|z| (w.value(z) + other.value(z) - 1.0).abs())
        .fold(0.0, f64::max);
    rep.put("partition_of_unity_defect", partition);
    rep.grid = Some(polar_rows(d, cfg, |z| Complex64::new(w.value(z), 0.0)));
    Ok(())
}

fn modulus_extrema(f: &dyn Analytic, d: &AnnulusDomain, m: usize) -> Result<Value> {
    let mut out = Map::new();
    for (name, comp) in [("outer", OUTER), ("inner", INNER)] {
        let moduli: Vec<f64> = boundary_nodes(d, comp, m)?.iter().map(|s| f.eval(s.point).norm()).collect();
        out.insert(
            name.into(),
            json!({
                "min": moduli.iter().copied().fold(f64::INFINITY, f64::min),
                "max": moduli.iter().copied().fold(0.0, f64::max),
            }),
        );
    }
    Ok(Value::Object(out))
}

fn inner_summary(cfg: &RunConfig, f: &InnerFunctionSpec, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    rep.put("zeros_used", f.zeros.len());
    rep.put("lambda", f.lambda);
    rep.put("power", f.power);
    rep.put("boundary_moduli", json!({ "c1": f.boundary_moduli.0, "c2": f.boundary_moduli.1 }));
    rep.put("period_residual", f.period_residual);
    rep.put("blaschke_sum", f.blaschke_sum);
    let v = verify_inner(f, d, cfg.m)?;
    rep.put("verify", serde_json::to_value(v).unwrap_or(Value::Null));
    rep.tol("verify_relative", 1e-6);
    rep.grid = Some(polar_rows(d, cfg, |z| f.eval(z)));
    Ok(())
}

fn run_inner_verify(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    let mu = AtomicSingularMeasure::new(d, cfg.atoms.clone())?;
    let (f, _) = qc_divisor(d, &ZeroSet::finite(cfg.zeros.clone()), &mu, cfg.tol)?;
    inner_summary(cfg, &f, rep)?;
    // Moments up to |n| = 16 against |f|² on 4096 half-step nodes per circle.
    rep.put("orthogonality", orthogonality_defect(&f, d, 16, 4096.max(cfg.m)));
    rep.tol("orthogonality", 1e-6);
    rep.put("period_ok", f.period_residual <= 1e-8);
    rep.tol("period", 1e-8);
    Ok(())
}

fn run_kernel(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    let tag = space_tag(cfg, Space::Bergman)?;
    let k = build_kernel(d, &tag, cfg.n, cfg.m)?;
    let base = d.base_point();
    rep.put("form", k.form_name());
    rep.put("condition", k.condition());
    rep.put("diagonal_at_base", k.diagonal(base));
    // 1 + z/2 + z⁻¹/4 sits well inside every window.
    let probe = LaurentPolynomial::new(
        -1,
        vec![Complex64::new(0.25, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)],
    );
    let check = reproduce_check(&k, &probe, base)?;
    rep.put("reproduction_residual", check.residual);
    let section = k.section(base);
    rep.grid = Some(polar_rows(d, cfg, |z| section.eval(z)));
    Ok(())
}

fn run_kernel_zeros(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    let tag = space_tag(cfg, Space::Bergman)?;
    let section = build_kernel(d, &tag, cfg.n, cfg.m)?.section(d.base_point());
    let count = count_zeros(&section, d, full_ring(d, 1e-3), CONTOUR_NODES.max(cfg.m))?;
    rep.put("count", count);
    if count > 0 {
        let z = locate_zeros(&section, d, count as usize)?;
        rep.put("locations", points(&z.locations));
        rep.put("newton_residual", z.residual);
    } else {
        rep.put("locations", Value::Array(vec![]));
    }
    Ok(())
}

fn run_extremal(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    let p = ExtremalProblem::new(d, space_tag(cfg, Space::Bergman)?, cfg.zeros.clone(), cfg.n)?;
    let g = solve_extremal(&p, cfg.m)?;
    rep.put("norm", extremal_norm(&g, &p, cfg.m)?);
    let constraint = std::iter::once((g.eval(p.base) - 1.0).norm())
        .chain(p.zeros.iter().map(|z| g.eval(*z).norm()))
        .fold(0.0, f64::max);
    rep.put("constraint_residual", constraint);
    let (_, sup) = maximize_extremal(&p, cfg.m)?;
    rep.put("sup_value", sup);
    if p.zeros.len() == 1 {
        rep.put("kernel_identity_deviation", extremal_identity_check(&p, cfg.m)?);
    }
    rep.grid = Some(polar_rows(d, cfg, |z| g.eval(z)));
    Ok(())
}

fn run_candidate(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    let z1 = cfg.zeros[0];
    let cand = candidate_divisor(d, z1, cfg.n, cfg.m)?;
    rep.put("kernel_zero", cjson(cand.kernel_zero));
    let ring = full_ring(d, 1e-3);
    rep.put("extremal_zero_count", count_zeros(&cand.extremal, d, ring, 1024)?);
    rep.put("zero_count", count_zeros(&cand, d, ring, 1024)?);
    let v = verify_inner(&cand, d, cfg.m)?;
    rep.put("verify", serde_json::to_value(v).unwrap_or(Value::Null));
    rep.grid = Some(polar_rows(d, cfg, |z| cand.eval(z)));
    Ok(())
}

fn run_qc_divisor(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    let mu = AtomicSingularMeasure::new(d, cfg.atoms.clone())?;
    let (g, c) = qc_divisor(d, &ZeroSet::finite(cfg.zeros.clone()), &mu, cfg.tol)?;
    rep.put("C", c);
    rep.put("lambda", g.lambda);
    let extrema = modulus_extrema(&g, d, cfg.m)?;
    let lo = extrema["outer"]["min"].as_f64().unwrap_or(f64::NAN).min(extrema["inner"]["min"].as_f64().unwrap_or(f64::NAN));
    let hi = extrema["outer"]["max"].as_f64().unwrap_or(f64::NAN).max(extrema["inner"]["max"].as_f64().unwrap_or(f64::NAN));
    rep.put("boundary_modulus", extrema);
    rep.put("bounds_hold", lo >= 1.0 - 1e-7 && hi <= c + 1e-7);
    rep.tol("bounds", 1e-7);
    let div = division_bound_check(&g, d, cfg.trials, cfg.seed, cfg.m)?;
    rep.put("division", serde_json::to_value(div).unwrap_or(Value::Null));
    rep.put("division_bound_holds", div.max_ratio <= c + 1e-6);
    rep.tol("division", 1e-6);
    rep.grid = Some(polar_rows(d, cfg, |z| g.eval(z)));
    Ok(())
}

fn divisor_report(rep: &mut Report, r: &DivisorReport) {
    rep.put("constant_estimate", r.constant_estimate);
    rep.put(
        "per_truncation",
        Value::Array(r.per_truncation.iter().map(|(n, v)| json!({ "N": n, "estimate": v })).collect()),
    );
    rep.put("kernel_zeros", points(&r.zero_locations_of_kernel));
    rep.put("extraneous_zeros", points(&r.extraneous_zeros));
    rep.put("flags", r.flags.clone());
    rep.put("notes", r.notes.clone());
    rep.warnings.extend(r.flags.iter().cloned());
}

fn run_qc_estimate(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    let z1 = cfg.zeros[0];
    let top = *LADDER.last().expect("non-empty ladder");
    rep.ladder = LADDER.to_vec();
    let cand = candidate_divisor(d, z1, cfg.n, cfg.m)?;
    rep.put("target", if cfg.undivided { "undivided" } else { "candidate" });
    rep.put("kernel_zero", cjson(cand.kernel_zero));
    let r = if cfg.undivided {
        quasicontract_estimate(&cand.extremal, z1, d, top, cfg.m)?
    } else {
        quasicontract_estimate(&cand, z1, d, top, cfg.m)?
    };
    divisor_report(rep, &r);
    Ok(())
}

fn run_schottky(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    let p = ExtremalProblem::new(d, space_tag(cfg, Space::Hardy)?, cfg.zeros.clone(), cfg.n)?;
    let g = normalized_extremal(&p, cfg.m)?;
    let fit = schottky_fit(&g, d, cfg.m)?;
    rep.put("lambda1", fit.lambda1);
    rep.put("residual", fit.residual);
    let v = verify_inner(&g, d, cfg.m)?;
    rep.put("verify", serde_json::to_value(v).unwrap_or(Value::Null));
    rep.grid = Some(polar_rows(d, cfg, |z| g.eval(z)));
    Ok(())
}

fn run_decomposition(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let d = domain(cfg);
    rep.put("c0", defect_constant(d));
    let p = ExtremalProblem::new(d, SpaceTag::bergman(), cfg.zeros.clone(), cfg.n)?;
    let g = normalized_extremal(&p, cfg.m)?;
    let fit = bergman_decomposition_residual(&g, d, p.base, cfg.m)?;
    rep.put("lambda1", fit.lambda1);
    rep.put("residual", fit.residual);
    Ok(())
}

fn solution_scalars(rep: &mut Report, s: &BiharmonicSolution, prefix: &str) {
    rep.put(&format!("{prefix}min_value"), s.min_value);
    rep.put(&format!("{prefix}max_value"), s.max_value);
    rep.put(&format!("{prefix}sign_change_count"), s.sign_change_cells.len());
}

fn run_biharmonic(cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    let plate = if cfg.disk {
        PlateDomain::Disk
    } else {
        PlateDomain::annulus(domain(cfg))
    };
    let pole = cfg.pole.expect("validated");
    let s = biharmonic_green(plate, pole, cfg.n_rho, cfg.n_theta)?;
    rep.put("grid_size", json!([cfg.n_rho, cfg.n_theta]));
    rep.put("pole_node", json!({ "rho": s.grid.radii[s.pole_node.0], "theta": s.grid.angles[s.pole_node.1] }));
    solution_scalars(rep, &s, "");
    rep.put("positive", s.min_value >= -1e-6 * s.max_value);
    rep.tol("positivity_relative", 1e-6);
    rep.put(
        "sign_change_cells",
        Value::Array(
            s.sign_change_cells
                .iter()
                .map(|&c| {
                    let (rho, theta) = s.cell_centre(c);
                    json!({ "rho": rho, "theta": theta })
                })
                .collect(),
        ),
    );
    rep.put("operator_residual", s.operator_residual());
    if cfg.refine {
        let r = biharmonic_refinement(plate, pole, cfg.n_rho, cfg.n_theta)?;
        solution_scalars(rep, &r.fine, "refined_");
        rep.put("min_value_change", r.min_value_change);
        rep.put("cells_persist", r.cells_persist);
        rep.tol("refinement_relative", 0.1);
        rep.warnings.extend(r.warnings.iter().cloned());
    }
    let mut rows = Vec::with_capacity(s.grid.radii.len() * s.grid.angles.len());
    for (i, rho) in s.grid.radii.iter().enumerate() {
        for (j, theta) in s.grid.angles.iter().enumerate() {
            rows.push([*rho, *theta, s.grid.values[i][j], 0.0]);
        }
    }
    rep.grid = Some(rows);
    Ok(())
}

/// Exit code for a library failure: rejections are input problems (3), the rest are
/// numerical failures whose partial output is flagged unverified (4).
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::RejectGeometry(_) | Error::RejectArgument(_) => 3,
        _ => 4,
    }
}
