//! Flags, config files and the literals they carry.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use annulus_core::geometry::{make_annulus, AnnulusDomain};
use annulus_core::spaces::SpaceTag;
use annulus_core::Complex64;
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Green,
    Hmeasure,
    Blaschke,
    Singular,
    InnerVerify,
    Kernel,
    KernelZeros,
    Extremal,
    CandidateDivisor,
    QcDivisor,
    QcEstimate,
    SchottkyFit,
    Decomposition,
    Biharmonic,
}

impl Command {
    pub fn has_grid(self) -> bool {
        !matches!(self, Command::KernelZeros | Command::QcEstimate | Command::Decomposition)
    }

    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    /// Smirnov class E², arclength on both circles.
    #[value(alias = "smirnov", alias = "arclength")]
    #[serde(alias = "smirnov", alias = "arclength")]
    Szego,
    /// Hardy space H² with harmonic measure at the base point.
    #[value(alias = "harmonic-measure")]
    #[serde(alias = "harmonic-measure")]
    Hardy,
    /// Bergman space A², normalised area.
    #[value(alias = "area")]
    #[serde(alias = "area")]
    Bergman,
}

impl Space {
    pub fn tag(self) -> SpaceTag {
        match self {
            Space::Szego => SpaceTag::smirnov(),
            Space::Hardy => SpaceTag::hardy(),
            Space::Bergman => SpaceTag::bergman(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Complex literal: `a+bi`, `a-bi`, `0.6i`, `-i`, `0.7`, or polar `ρ∠θ` (θ in radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C(pub Complex64);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot read {0:?} as a complex number")]
pub struct LiteralError(String);

fn real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Imaginary coefficient of a trailing-`i` term such as `0.6i`, `-i`, `+2.5i`.
fn imag(s: &str) -> Option<f64> {
    let body = s.trim().strip_suffix('i')?;
    match body {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => real(body),
    }
}

impl FromStr for C {
    type Err = LiteralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LiteralError(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(err());
        }
        if let Some((rho, theta)) = t.split_once('∠') {
            let (rho, theta) = (real(rho).ok_or_else(err)?, real(theta).ok_or_else(err)?);
            return Ok(C(Complex64::from_polar(rho, theta)));
        }
        if let Some(x) = real(&t) {
            return Ok(C(Complex64::new(x, 0.0)));
        }
        if !t.ends_with('i') {
            return Err(err());
        }
        // Split at the last sign that is not part of an exponent and not leading.
        let bytes = t.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => {
                let re = real(&t[..k]).ok_or_else(err)?;
                let im = imag(&t[k..]).ok_or_else(err)?;
                Ok(C(Complex64::new(re, im)))
            }
            None => Ok(C(Complex64::new(0.0, imag(&t).ok_or_else(err)?))),
        }
    }
}

impl fmt::Display for C {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Complex64 { re, im } = self.0;
        if im < 0.0 {
            write!(f, "{re}-{}i", -im)
        } else {
            write!(f, "{re}+{im}i")
        }
    }
}

/// Comma-separated complex literals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Points(pub Vec<Complex64>);

impl FromStr for Points {
    type Err = LiteralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Ok(Points(Vec::new()));
        }
        s.split(',').map(|p| p.parse::<C>().map(|c| c.0)).collect::<Result<_, _>>().map(Points)
    }
}

/// Comma-separated `ζ:mass` pairs, e.g. `1:-1,0.5i:-0.25`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Atoms(pub Vec<(Complex64, f64)>);

impl FromStr for Atoms {
    type Err = LiteralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Ok(Atoms(Vec::new()));
        }
        s.split(',')
            .map(|item| {
                let (z, m) = item.rsplit_once(':').ok_or_else(|| LiteralError(item.to_string()))?;
                Ok((z.parse::<C>()?.0, real(m).ok_or_else(|| LiteralError(item.to_string()))?))
            })
            .collect::<Result<_, _>>()
            .map(Atoms)
    }
}

/// Config-file values: strings go through the flag parser, numbers are real,
/// arrays are joined with commas.
fn literal<'de, D, T>(d: D) -> Result<Option<T>, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: fmt::Display,
{
    fn flatten(v: &serde_json::Value) -> String {
        match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Array(items) => items.iter().map(flatten).collect::<Vec<_>>().join(","),
            other => other.to_string(),
        }
    }
    let v = Option::<serde_json::Value>::deserialize(d)?;
    match v {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(v) => flatten(&v).parse::<T>().map(Some).map_err(serde::de::Error::custom),
    }
}

/// Flags of every command; a JSON config file may supply any of them, and flags win.
#[derive(Debug, Clone, Default, Parser, Deserialize)]
#[command(name = "annulus", version, about = "Function theory on the annulus r < |z| < 1")]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    /// Command to run (may instead come from the config file).
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON object mirroring these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Inner radius r of the annulus.
    #[arg(long)]
    pub r: Option<f64>,
    /// Base point z₀ [default: (1 + r)/2].
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "literal")]
    pub base: Option<C>,
    /// Pole of a Green's function.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "literal")]
    pub pole: Option<C>,
    /// Comma-separated zeros.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "literal")]
    pub zeros: Option<Points>,
    /// Comma-separated `ζ:mass` atoms of a singular measure (ζ on a boundary circle, mass ≤ 0).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "literal")]
    pub atoms: Option<Atoms>,
    #[arg(long, value_enum)]
    pub space: Option<Space>,
    /// Weight the space by |B_a|², B_a the Blaschke factor with zero `a`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "literal")]
    pub weight_zero: Option<C>,
    /// Boundary component for `hmeasure`: 1 outer, 2 inner.
    #[arg(long)]
    pub component: Option<usize>,
    /// Laurent truncation N [default: 64].
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Quadrature nodes per circle m [default: 512].
    #[arg(long)]
    pub m: Option<usize>,
    /// Tolerance for infinite products [default: 1e-8].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for random trials [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random trials for the division bound [default: 100].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Plate on the unit disk instead of the annulus.
    #[arg(long)]
    #[serde(default)]
    pub disk: bool,
    /// Also solve on the doubled grid and report sign-pattern stability.
    #[arg(long)]
    #[serde(default)]
    pub refine: bool,
    /// Probe the undivided extremal (control) instead of the candidate divisor.
    #[arg(long)]
    #[serde(default)]
    pub undivided: bool,
    /// Radial grid size [default: 64].
    #[arg(long)]
    pub n_rho: Option<usize>,
    /// Angular grid size [default: 64].
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Result document path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `json` writes the result document, `csv` the grid block.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write the grid block as CSV to this path.
    #[arg(long)]
    pub grid: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UsageError {
    #[error("--{flag}: {message}")]
    Flag { flag: &'static str, message: String },
    #[error("config file {path}: {message}")]
    Config { path: String, message: String },
    #[error("no command given")]
    NoCommand,
}

/// Weighted-kernel sections need N = 96 before the truncated section has a single
/// zero near the inner circle; every other command defaults to 64.
fn default_truncation(command: Command) -> usize {
    match command {
        Command::CandidateDivisor | Command::QcEstimate => 96,
        _ => 64,
    }
}

fn missing(flag: &'static str, command: Command) -> UsageError {
    UsageError::Flag { flag, message: format!("required by `{}`", command.name()) }
}

impl Flags {
    /// Fills unset flags from the config file named by `--config`.
    pub fn with_config(self) -> Result<Self, UsageError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = load(&path)?;
        Ok(Flags {
            command: self.command.or(file.command),
            config: self.config,
            r: self.r.or(file.r),
            base: self.base.or(file.base),
            pole: self.pole.or(file.pole),
            zeros: self.zeros.or(file.zeros),
            atoms: self.atoms.or(file.atoms),
            space: self.space.or(file.space),
            weight_zero: self.weight_zero.or(file.weight_zero),
            component: self.component.or(file.component),
            n: self.n.or(file.n),
            m: self.m.or(file.m),
            tol: self.tol.or(file.tol),
            seed: self.seed.or(file.seed),
            trials: self.trials.or(file.trials),
            disk: self.disk || file.disk,
            refine: self.refine || file.refine,
            undivided: self.undivided || file.undivided,
            n_rho: self.n_rho.or(file.n_rho),
            n_theta: self.n_theta.or(file.n_theta),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            grid: self.grid.or(file.grid),
        })
    }
}

fn load(path: &Path) -> Result<Flags, UsageError> {
    let err = |message: String| UsageError::Config { path: path.display().to_string(), message };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| err(e.to_string()))
}

/// A complete, validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    /// `None` only for the disk plate.
    pub domain: Option<AnnulusDomain>,
    pub r: Option<f64>,
    pub pole: Option<Complex64>,
    pub zeros: Vec<Complex64>,
    pub atoms: Vec<(Complex64, f64)>,
    pub space: Option<Space>,
    pub weight_zero: Option<Complex64>,
    pub component: usize,
    pub n: usize,
    pub m: usize,
    pub tol: f64,
    pub seed: u64,
    pub trials: usize,
    pub disk: bool,
    pub refine: bool,
    pub undivided: bool,
    pub n_rho: usize,
    pub n_theta: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub grid: Option<PathBuf>,
}

/// Either a usage problem (exit 2) or a rejection from the library constructors (exit 3).
#[derive(Debug)]
pub enum ConfigError {
    /// Malformed flags, or `--help`/`--version`; clap renders and exits.
    Clap(clap::Error),
    Usage(UsageError),
    Rejected(annulus_core::Error),
}

impl From<UsageError> for ConfigError {
    fn from(e: UsageError) -> Self {
        ConfigError::Usage(e)
    }
}

pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let flags = Flags::try_parse_from(argv).map_err(ConfigError::Clap)?;
    validate(flags.with_config()?)
}

/// Enforces command-specific flags, then runs the geometry constructors.
pub fn validate(f: Flags) -> Result<RunConfig, ConfigError> {
    use Command::*;
    let command = f.command.ok_or(UsageError::NoCommand)?;
    let zeros = f.zeros.clone().unwrap_or_default().0;
    let atoms = f.atoms.clone().unwrap_or_default().0;
    let positive = |flag: &'static str, v: Option<usize>, default: usize| match v {
        Some(0) => Err(UsageError::Flag { flag, message: "must be positive".into() }),
        other => Ok(other.unwrap_or(default)),
    };

    let needs_r = !(command == Biharmonic && f.disk);
    if needs_r && f.r.is_none() {
        return Err(missing("r", command).into());
    }
    match command {
        Green | Biharmonic if f.pole.is_none() => return Err(missing("pole", command).into()),
        Blaschke | CandidateDivisor | QcEstimate | SchottkyFit if zeros.is_empty() => {
            return Err(missing("zeros", command).into())
        }
        Singular if atoms.is_empty() => return Err(missing("atoms", command).into()),
        InnerVerify | QcDivisor if zeros.is_empty() && atoms.is_empty() => {
            return Err(UsageError::Flag {
                flag: "zeros",
                message: format!("`{}` needs --zeros or --atoms", command.name()),
            }
            .into())
        }
        Kernel | KernelZeros | Extremal if f.space.is_none() => return Err(missing("space", command).into()),
        _ => {}
    }
    if matches!(command, CandidateDivisor | QcEstimate) && zeros.len() != 1 {
        return Err(UsageError::Flag { flag: "zeros", message: format!("`{}` takes exactly one zero", command.name()) }.into());
    }
    if f.format == Some(Format::Csv) && !command.has_grid() {
        return Err(UsageError::Flag { flag: "format", message: format!("`{}` has no grid block", command.name()) }.into());
    }
    let component = f.component.unwrap_or(1);
    if !(1..=2).contains(&component) {
        return Err(UsageError::Flag { flag: "component", message: "must be 1 or 2".into() }.into());
    }
    let tol = f.tol.unwrap_or(1e-8);
    if !(tol > 0.0 && tol < 1.0) {
        return Err(UsageError::Flag { flag: "tol", message: "must lie in (0, 1)".into() }.into());
    }

    let domain = match f.r {
        Some(r) if needs_r => {
            let base = f.base.map(|c| c.0).unwrap_or(Complex64::new(0.5 * (1.0 + r), 0.0));
            Some(make_annulus(r, base).map_err(ConfigError::Rejected)?)
        }
        _ => None,
    };
    Ok(RunConfig {
        command,
        domain,
        r: f.r,
        pole: f.pole.map(|c| c.0),
        zeros,
        atoms,
        space: f.space,
        weight_zero: f.weight_zero.map(|c| c.0),
        component,
        n: positive("N", f.n, default_truncation(command))?,
        m: positive("m", f.m, 512)?,
        tol,
        seed: f.seed.unwrap_or(0),
        trials: positive("trials", f.trials, 100)?,
        disk: f.disk,
        refine: f.refine,
        undivided: f.undivided,
        n_rho: positive("n-rho", f.n_rho, 64)?,
        n_theta: positive("n-theta", f.n_theta, 64)?,
        out: f.out,
        format: f.format.unwrap_or_default(),
        grid: f.grid,
    })
}
