use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::density::GridSpec;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::functionals::DEFAULT_REL_THRESHOLD;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parse(format!("unknown output format {other:?} (csv|json)"))),
        }
    }
}

/// The slowly growing term `ρ_n` in the split point
/// `T_n = sqrt((s−2) log n + s log log n + ρ_n)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rho {
    #[default]
    LogLog,
    Constant(f64),
}

impl Rho {
    pub fn at(&self, n: u32) -> f64 {
        match self {
            Rho::LogLog => (n as f64).ln().ln(),
            Rho::Constant(c) => *c,
        }
    }
}

impl FromStr for Rho {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("loglog") {
            return Ok(Rho::LogLog);
        }
        s.parse().map(Rho::Constant).map_err(|_| Error::Parse(format!("rho must be `loglog` or a number, got {s:?}")))
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rho::LogLog => f.write_str("loglog"),
            Rho::Constant(c) => write!(f, "{c}"),
        }
    }
}

fn serialize_display<S: serde::Serializer>(v: &impl fmt::Display, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Settings shared by the study, the inequality suite and the decay
/// diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyConfig {
    #[serde(serialize_with = "serialize_display")]
    pub family: Family,
    /// Expansion order; coefficients `c_1..c_{⌊(s−2)/2⌋}` enter the prediction.
    pub s: usize,
    pub n_list: Vec<u32>,
    pub grid: GridSpec,
    /// Positivity threshold relative to `max p`.
    pub threshold: f64,
    pub rho: Rho,
    /// Largest accepted cf tail estimate before inversion is refused.
    pub tail_tolerance: f64,
    /// Overrides every per-inequality slack of the suite when set.
    pub slack: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            family: Family::StandardizedExponential,
            s: 4,
            n_list: vec![64, 128, 256, 512],
            grid: GridSpec::default(),
            threshold: DEFAULT_REL_THRESHOLD,
            rho: Rho::LogLog,
            tail_tolerance: 1e-10,
            slack: None,
            seed: 0,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Parse(format!("{key}: cannot parse {v:?}")))
}

/// Parses `64,128,256`.
pub fn parse_n_list(v: &str) -> Result<Vec<u32>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num("n", s)).collect()
}

impl StudyConfig {
    /// Sets one `key = value` entry. Keys match the CLI flag names, with
    /// `grid_n` (or `grid-N`) for the grid size.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "family" => self.family = v.parse()?,
            "s" => self.s = parse_num(key, v)?,
            "n" | "n_list" => self.n_list = parse_n_list(v)?,
            "grid_n" | "grid-N" | "grid_N" => self.grid.points = parse_num(key, v)?,
            "xmax" => self.grid.xmax = parse_num(key, v)?,
            "threshold" => self.threshold = parse_num(key, v)?,
            "rho" => self.rho = v.parse()?,
            "tail_tolerance" => self.tail_tolerance = parse_num(key, v)?,
            "slack" => self.slack = Some(parse_num(key, v)?),
            "seed" => self.seed = parse_num(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat config text: one `key = value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(k, v).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        self.apply_text(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        self.grid.validate()?;
        if self.s < 2 {
            return Err(Error::InvalidInput(format!("s = {} must be at least 2", self.s)));
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 {
            return Err(Error::InvalidInput("n list must be nonempty and positive".into()));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("n list must be strictly increasing".into()));
        }
        if !(self.threshold >= 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidInput(format!("threshold {} not in [0, 1)", self.threshold)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_text_overrides_defaults() {
        let mut c = StudyConfig::default();
        c.apply_text(
            "# uniform study\nfamily = uniform\ns = 6\nn = 16, 32,64\ngrid_n = 32768\nxmax=30\nformat = json\nrho = 0.5\n",
        )
        .unwrap();
        assert_eq!(c.family, Family::StandardizedUniform);
        assert_eq!((c.s, c.n_list.clone()), (6, vec![16, 32, 64]));
        assert_eq!((c.grid.points, c.grid.xmax), (1 << 15, 30.0));
        assert_eq!(c.format, OutputFormat::Json);
        assert_eq!(c.rho, Rho::Constant(0.5));
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = StudyConfig::default();
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("s 4").is_err());
        c.set("n", "64,32").unwrap();
        assert!(c.validate().is_err());
        c.set("n", "8").unwrap();
        c.set("s", "1").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn rho_default_is_loglog() {
        assert!((Rho::LogLog.at(256) - (256f64).ln().ln()).abs() < 1e-15);
        assert_eq!("loglog".parse::<Rho>().unwrap(), Rho::LogLog);
    }
}
