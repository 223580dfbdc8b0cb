//! `key = value` run configuration with `[physics]`, `[basis]`, `[solver]`
//! and `[output]` sections. `mode` may also appear before the first section.

use std::path::PathBuf;
use std::str::FromStr;

use gbec::ground::{SeedMode, SolverConfig};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Ground,
    Spectrum,
    Sweep,
    Tof,
    Threshold,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ground" => Mode::Ground,
            "spectrum" => Mode::Spectrum,
            "sweep" => Mode::Sweep,
            "tof" => Mode::Tof,
            "threshold" => Mode::Threshold,
            _ => return Err(format!("unknown mode '{s}'")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}'")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(rename = "N")]
    pub n: f64,
    /// Interaction strengths `N a_s / a_ho`.
    pub na_s: Vec<f64>,
    pub n_cut: usize,
    pub l_max: usize,
    /// Angular-momentum sectors of the excitation spectrum.
    pub sectors: Vec<usize>,
    /// Expansion times for `tof`.
    pub times: Vec<f64>,
    /// Also solve the effective equations in `sweep`.
    pub gpe: bool,
    /// Bisection resolution of `threshold`.
    pub resolution: f64,
    pub solver: SolverConfig,
    pub out_dir: PathBuf,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse '{s}'"))
}

/// `a:b:c` (start, stop, step, inclusive), a comma list, or one number.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.len() {
        1 => s.split(',').map(|x| parse_num(x.trim())).collect(),
        3 => {
            let (a, b, h): (f64, f64, f64) = (parse_num(parts[0])?, parse_num(parts[1])?, parse_num(parts[2])?);
            if !(h.is_finite() && h != 0.0) || (b - a) * h < 0.0 {
                return Err(format!("range '{s}' has no points"));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            // Rounded so that grid points print cleanly.
            Ok((0..count).map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12).collect())
        }
        _ => Err(format!("malformed range '{s}'")),
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got '{s}'")),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut mode = Mode::Sweep;
    let mut n = None;
    let mut na_s = None;
    let mut n_cut = 20;
    let mut l_max = 4;
    let mut sectors = vec![0, 1, 2];
    let mut times = vec![0.0, 1.0, 3.0];
    let mut gpe = true;
    let mut resolution = 1e-4;
    let mut solver = SolverConfig::default();
    let mut out_dir = PathBuf::from("out");
    let mut format = Format::Csv;
    let mut section = String::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| ConfigError::Line { line, msg };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| err(format!("malformed section header '{body}'")))?;
            if !["physics", "basis", "solver", "output"].contains(&name) {
                return Err(err(format!("unknown section '{name}'")));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| err(format!("expected key = value, got '{body}'")))?;
        let (key, value) = (key.trim(), value.trim().trim_matches('"'));
        if key.is_empty() || value.is_empty() || value.contains('=') {
            return Err(err(format!("malformed line '{body}'")));
        }
        let r: Result<(), String> = (|| {
            match (section.as_str(), key) {
                ("", "mode") | ("output", "mode") => mode = value.parse()?,
                ("physics", "N") => n = Some(parse_num(value)?),
                ("physics", "na_s") => na_s = Some(parse_list(value)?),
                ("physics", "sectors") => {
                    sectors = value.split(',').map(|x| parse_num(x.trim())).collect::<Result<_, _>>()?
                }
                ("physics", "times") => times = parse_list(value)?,
                ("physics", "gpe") => gpe = parse_bool(value)?,
                ("basis", "n_cut") => n_cut = parse_num(value)?,
                ("basis", "l_max") => l_max = parse_num(value)?,
                ("solver", "dtau") => solver.dtau = parse_num(value)?,
                ("solver", "dtau_max") => solver.dtau_max = Some(parse_num(value)?),
                ("solver", "tol_eta") => solver.tol_eta = parse_num(value)?,
                ("solver", "tol_gamma") => solver.tol_gamma = parse_num(value)?,
                ("solver", "max_steps") => solver.max_steps = parse_num(value)?,
                ("solver", "mu_tol") => solver.mu_tol = parse_num(value)?,
                ("solver", "kappa") => solver.kappa = parse_num(value)?,
                ("solver", "precondition") => solver.precondition = parse_bool(value)?,
                ("solver", "seed") => solver.seed = parse_num(value)?,
                ("solver", "resolution") => resolution = parse_num(value)?,
                ("solver", "seed_mode") => {
                    solver.seed_mode = match value {
                        "coherent" => SeedMode::Coherent,
                        "squeezed" => SeedMode::Squeezed,
                        "vacuum_noise" => SeedMode::VacuumNoise,
                        "auto" => SeedMode::Auto,
                        _ => return Err(format!("unknown seed_mode '{value}'")),
                    }
                }
                ("output", "out_dir") => out_dir = PathBuf::from(value),
                ("output", "format") => format = value.parse()?,
                _ => {
                    let at = if section.is_empty() { String::new() } else { format!(" in [{section}]") };
                    return Err(format!("unknown key '{key}'{at}"));
                }
            }
            Ok(())
        })();
        r.map_err(err)?;
    }

    let n: f64 = n.ok_or_else(|| ConfigError::Invalid("missing [physics] N".into()))?;
    if na_s.is_none() && mode != Mode::Threshold {
        return Err(ConfigError::Invalid("missing [physics] na_s".into()));
    }
    solver.target_n = n;
    let cfg = RunConfig {
        mode,
        n,
        na_s: na_s.unwrap_or_default(),
        n_cut,
        l_max,
        sectors,
        times,
        gpe,
        resolution,
        solver,
        out_dir,
        format,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Checks that depend on the mode; run again after command-line overrides.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(self.n.is_finite() && self.n > 0.0) {
            return invalid("N must be positive and finite".into());
        }
        if self.na_s.iter().chain(&self.times).any(|x| !x.is_finite()) {
            return invalid("physics parameters must be finite".into());
        }
        match self.mode {
            Mode::Threshold => {}
            _ if self.na_s.is_empty() => return invalid("na_s is empty".into()),
            Mode::Tof if self.na_s.len() != 1 => return invalid("tof takes a single na_s".into()),
            _ => {}
        }
        if self.mode == Mode::Spectrum && self.sectors.is_empty() {
            return invalid("sectors is empty".into());
        }
        if self.mode == Mode::Tof && (self.times.is_empty() || self.times.iter().any(|&t| t < 0.0)) {
            return invalid("expansion times must be a non-empty list of non-negative values".into());
        }
        if let Some(&l) = self.sectors.iter().find(|&&l| self.mode == Mode::Spectrum && l > 2 * self.l_max) {
            return invalid(format!("sector L = {l} exceeds 2 l_max = {}", 2 * self.l_max));
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return invalid("resolution must be positive".into());
        }
        gbec::basis::BasisSpec::new(self.n_cut, self.l_max).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.solver.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}
