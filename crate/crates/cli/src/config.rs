//! Run configuration: defaults, a flat `key = value` file format and
//! command-line overrides.

use std::fmt::Write as _;
use std::path::PathBuf;

use nsfd::MapKind;

use crate::error::CliError;

/// Output table format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Tsv,
    Human,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
            Format::Human => "human",
        }
    }
}

pub const KEYS: [&str; 12] = [
    "map",
    "c",
    "N",
    "tol",
    "beta_start",
    "beta_stop",
    "beta_step",
    "richardson_n0",
    "richardson_levels",
    "richardson_orders",
    "output",
    "format",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub map: MapKind,
    pub c: f64,
    pub n: usize,
    pub tol: f64,
    pub beta_start: f64,
    pub beta_stop: f64,
    pub beta_step: f64,
    pub richardson_n0: Option<usize>,
    pub richardson_levels: Option<usize>,
    pub richardson_orders: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            map: MapKind::Logarithmic,
            c: 2.0,
            n: 1000,
            tol: 1e-8,
            beta_start: 0.0,
            beta_stop: 2.0,
            beta_step: 0.2,
            richardson_n0: None,
            richardson_levels: None,
            richardson_orders: None,
            output: None,
            format: Format::Csv,
        }
    }
}

/// Resolved Richardson settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Richardson {
    pub n0: usize,
    pub levels: usize,
    pub orders: Vec<f64>,
}

/// A partial configuration. Files and flags both produce one; later patches
/// win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigPatch {
    pub map: Option<MapKind>,
    pub c: Option<f64>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub beta_start: Option<f64>,
    pub beta_stop: Option<f64>,
    pub beta_step: Option<f64>,
    pub richardson_n0: Option<usize>,
    pub richardson_levels: Option<usize>,
    pub richardson_orders: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ConfigPatch {
    /// Parses the flat file format: one `key = value` per line, blank lines
    /// and lines starting with `#` ignored. Unknown and repeated keys are
    /// errors.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut patch = ConfigPatch::default();
        let mut seen: Vec<&str> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(config_err(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            patch
                .set(key, value)
                .map_err(|e| config_err(format!("line {}: {e}", lineno + 1)))?;
            seen.push(key);
        }
        Ok(patch)
    }

    fn set<'a>(&mut self, key: &'a str, value: &str) -> Result<&'a str, String> {
        match key {
            "map" => self.map = Some(parse_map(value)?),
            "c" => self.c = Some(parse_num(key, value)?),
            "N" => self.n = Some(parse_num(key, value)?),
            "tol" => self.tol = Some(parse_num(key, value)?),
            "beta_start" => self.beta_start = Some(parse_num(key, value)?),
            "beta_stop" => self.beta_stop = Some(parse_num(key, value)?),
            "beta_step" => self.beta_step = Some(parse_num(key, value)?),
            "richardson_n0" => self.richardson_n0 = Some(parse_num(key, value)?),
            "richardson_levels" => self.richardson_levels = Some(parse_num(key, value)?),
            "richardson_orders" => self.richardson_orders = Some(parse_orders(value)?),
            "output" => {
                if value.is_empty() {
                    return Err("`output` needs a path".into());
                }
                self.output = Some(PathBuf::from(value))
            }
            "format" => self.format = Some(parse_format(value)?),
            _ => return Err(format!("unknown key `{key}` (expected one of {})", KEYS.join(", "))),
        }
        Ok(key)
    }
}

fn config_err(msg: String) -> CliError {
    CliError::Config(msg)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

pub fn parse_map(value: &str) -> Result<MapKind, String> {
    match value {
        "log" | "logarithmic" => Ok(MapKind::Logarithmic),
        "alg" | "algebraic" => Ok(MapKind::Algebraic),
        _ => Err(format!("unknown map `{value}` (expected log or alg)")),
    }
}

pub fn parse_format(value: &str) -> Result<Format, String> {
    match value {
        "csv" => Ok(Format::Csv),
        "tsv" => Ok(Format::Tsv),
        "human" => Ok(Format::Human),
        _ => Err(format!("unknown format `{value}` (expected csv, tsv or human)")),
    }
}

/// Comma-separated list of extrapolation exponents.
pub fn parse_orders(value: &str) -> Result<Vec<f64>, String> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| format!("invalid order `{s}`"))
        })
        .collect()
}

impl RunConfig {
    pub fn apply(&mut self, p: ConfigPatch) {
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = p.$f { self.$f = v; })* };
        }
        take!(map, c, n, tol, beta_start, beta_stop, beta_step, format);
        if p.richardson_n0.is_some() {
            self.richardson_n0 = p.richardson_n0;
        }
        if p.richardson_levels.is_some() {
            self.richardson_levels = p.richardson_levels;
        }
        if p.richardson_orders.is_some() {
            self.richardson_orders = p.richardson_orders;
        }
        if p.output.is_some() {
            self.output = p.output;
        }
    }

    /// Defaults, then each patch in order, then validation.
    pub fn resolve(patches: impl IntoIterator<Item = ConfigPatch>) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for p in patches {
            cfg.apply(p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::resolve([ConfigPatch::parse(text)?])
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Config(m));
        if !(self.c.is_finite() && self.c > 0.0) {
            return fail(format!("c must be positive, got {}", self.c));
        }
        if self.n < 2 {
            return fail(format!("N must be at least 2, got {}", self.n));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.beta_start.is_finite() && self.beta_stop.is_finite()) {
            return fail("beta range must be finite".into());
        }
        if self.beta_stop < self.beta_start {
            return fail(format!(
                "beta_stop {} is below beta_start {}",
                self.beta_stop, self.beta_start
            ));
        }
        if !(self.beta_step.is_finite() && self.beta_step > 0.0) {
            return fail(format!("beta_step must be positive, got {}", self.beta_step));
        }
        if let Some(orders) = &self.richardson_orders {
            if orders.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
                return fail("richardson_orders must be positive".into());
            }
        }
        if self.richardson_n0 == Some(0) || self.richardson_n0 == Some(1) {
            return fail("richardson_n0 must be at least 2".into());
        }
        Ok(())
    }

    /// The β values of the sweep, rounded to 12 decimals so that
    /// accumulated steps print as `0.6` rather than `0.6000000000000001`.
    pub fn betas(&self) -> Vec<f64> {
        let span = (self.beta_stop - self.beta_start) / self.beta_step;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| round12(self.beta_start + i as f64 * self.beta_step))
            .collect()
    }

    pub fn richardson(&self) -> Result<Richardson, CliError> {
        let (n0, levels) = match (self.richardson_n0, self.richardson_levels) {
            (Some(n0), Some(levels)) => (n0, levels),
            _ => {
                return Err(CliError::Config(
                    "extrapolation needs richardson_n0 and richardson_levels".into(),
                ))
            }
        };
        let orders = match &self.richardson_orders {
            Some(p) if p.len() < levels => {
                return Err(CliError::Config(format!(
                    "{levels} extrapolation levels need {levels} orders, got {}",
                    p.len()
                )))
            }
            Some(p) => p[..levels].to_vec(),
            None => nsfd::refine::default_orders(levels),
        };
        Ok(Richardson { n0, levels, orders })
    }

    /// Writes every set key in the file format accepted by [`RunConfig::parse`].
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        let map = match self.map {
            MapKind::Logarithmic => "log",
            MapKind::Algebraic => "alg",
        };
        let _ = writeln!(s, "map = {map}");
        let _ = writeln!(s, "c = {}", self.c);
        let _ = writeln!(s, "N = {}", self.n);
        let _ = writeln!(s, "tol = {}", self.tol);
        let _ = writeln!(s, "beta_start = {}", self.beta_start);
        let _ = writeln!(s, "beta_stop = {}", self.beta_stop);
        let _ = writeln!(s, "beta_step = {}", self.beta_step);
        if let Some(v) = self.richardson_n0 {
            let _ = writeln!(s, "richardson_n0 = {v}");
        }
        if let Some(v) = self.richardson_levels {
            let _ = writeln!(s, "richardson_levels = {v}");
        }
        if let Some(p) = &self.richardson_orders {
            let list: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "richardson_orders = {}", list.join(","));
        }
        if let Some(p) = &self.output {
            let _ = writeln!(s, "output = {}", p.display());
        }
        let _ = writeln!(s, "format = {}", self.format.as_str());
        s
    }
}

fn round12(v: f64) -> f64 {
    let r = (v * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}
