mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use commands::{exit_code, Report};
use config::{parse_config, ConfigError, Format, RunConfig};
use output::{document, write_grid, ErrorBlock, Status};

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(cfg: &RunConfig, rep: Report, status: Status, error: Option<ErrorBlock>, secs: f64) -> io::Result<()> {
    if let (Some(path), Some(rows)) = (&cfg.grid, &rep.grid) {
        write_grid(File::create(path)?, rows).map_err(io::Error::other)?;
    }
    let mut out = sink(cfg.out.as_deref())?;
    match cfg.format {
        Format::Csv => write_grid(&mut out, rep.grid.as_deref().unwrap_or(&[])).map_err(io::Error::other)?,
        Format::Json => {
            let doc = document(cfg, rep, status, error, secs, cfg.grid.as_deref());
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    out.flush()
}

fn main() -> ExitCode {
    let cfg = match parse_config(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(ConfigError::Clap(e)) => e.exit(),
        Err(ConfigError::Usage(e)) => {
            eprintln!("USAGE_ERROR: {e}");
            return ExitCode::from(2);
        }
        Err(ConfigError::Rejected(e)) => {
            eprintln!("{}: {e}", e.code());
            return ExitCode::from(3);
        }
    };

    let start = Instant::now();
    let mut rep = Report::default();
    let result = commands::run(&cfg, &mut rep);
    let secs = start.elapsed().as_secs_f64();
    let (status, error, code) = match result {
        Ok(()) => (Status::Ok, None, 0),
        Err(e) => {
            eprintln!("{}: {e}", e.code());
            let code = exit_code(&e);
            let status = if code == 3 { Status::Rejected } else { Status::Unverified };
            (status, Some(ErrorBlock { code: e.code().into(), message: e.to_string() }), code)
        }
    };
    if let Err(e) = emit(&cfg, rep, status, error, secs) {
        eprintln!("IO_ERROR: {e}");
        return ExitCode::from(4);
    }
    ExitCode::from(code as u8)
}
