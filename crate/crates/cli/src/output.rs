//! Result documents (JSON) and grid blocks (CSV).

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::commands::{cjson, Report};
use crate::config::RunConfig;

pub const SCHEMA_ID: &str = "annulus-results/1";
pub const GRID_COLUMNS: [&str; 4] = ["rho", "theta", "re", "im"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// The library rejected the input after parsing (exit 3).
    Rejected,
    /// A numerical failure part-way; scalars are partial (exit 4).
    Unverified,
}

#[derive(Debug, Serialize)]
pub struct ErrorBlock {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct GridBlock {
    pub columns: [&'static str; 4],
    pub rows: usize,
    /// CSV file holding the rows, when one was written.
    pub path: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub command: String,
    pub version: &'static str,
    pub parameters: Map<String, Value>,
    pub truncation_ladder: Vec<usize>,
    pub tolerances: Map<String, Value>,
    pub seed: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
pub struct Document {
    pub schema: &'static str,
    pub status: Status,
    pub metadata: Metadata,
    pub results: Map<String, Value>,
    pub warnings: Vec<String>,
    pub error: Option<ErrorBlock>,
    pub grid: Option<GridBlock>,
}

fn parameters(cfg: &RunConfig) -> Map<String, Value> {
    let mut p = Map::new();
    let mut put = |k: &str, v: Value| {
        if !v.is_null() {
            p.insert(k.to_string(), v);
        }
    };
    put("r", json!(cfg.r));
    put("base", cfg.domain.map(|d| cjson(d.base_point())).unwrap_or(Value::Null));
    put("pole", cfg.pole.map(cjson).unwrap_or(Value::Null));
    put("zeros", Value::Array(cfg.zeros.iter().copied().map(cjson).collect()));
    put(
        "atoms",
        Value::Array(cfg.atoms.iter().map(|(z, m)| json!({ "point": cjson(*z), "mass": m })).collect()),
    );
    put("space", json!(cfg.space));
    put("weight_zero", cfg.weight_zero.map(cjson).unwrap_or(Value::Null));
    put("component", json!(cfg.component));
    put("N", json!(cfg.n));
    put("m", json!(cfg.m));
    put("tol", json!(cfg.tol));
    put("trials", json!(cfg.trials));
    put("disk", json!(cfg.disk));
    put("refine", json!(cfg.refine));
    put("undivided", json!(cfg.undivided));
    put("n_rho", json!(cfg.n_rho));
    put("n_theta", json!(cfg.n_theta));
    p
}

pub fn document(
    cfg: &RunConfig,
    rep: Report,
    status: Status,
    error: Option<ErrorBlock>,
    wall_time_s: f64,
    grid_path: Option<&Path>,
) -> Document {
    let grid = rep.grid.as_ref().map(|rows| GridBlock {
        columns: GRID_COLUMNS,
        rows: rows.len(),
        path: grid_path.map(|p| p.display().to_string()),
    });
    Document {
        schema: SCHEMA_ID,
        status,
        metadata: Metadata {
            command: cfg.command.name(),
            version: env!("CARGO_PKG_VERSION"),
            parameters: parameters(cfg),
            truncation_ladder: rep.ladder,
            tolerances: rep.tolerances,
            seed: cfg.seed,
            wall_time_s,
        },
        results: rep.scalars,
        warnings: rep.warnings,
        error,
        grid,
    }
}

/// Writes `rows` with a `rho,theta,re,im` header.
pub fn write_grid<W: Write>(out: W, rows: &[[f64; 4]]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRID_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
