//! Run configuration: defaults, a key-value config file, then flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use mvcharlier::weight::Truncation;

use crate::CliError;

/// Largest `n_max` or `x_max` accepted.
pub const CAP: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Matrix size.
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub lambda: Option<u32>,
    #[arg(long)]
    pub n_max: Option<u32>,
    #[arg(long)]
    pub x_max: Option<u32>,
    /// Dual family index (1, 2 or 3).
    #[arg(long)]
    pub family: Option<u8>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub trunc_eps: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Key-value file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Flags {
    /// Fills every unset field from `other`.
    fn or(self, other: Flags) -> Flags {
        Flags {
            n: self.n.or(other.n),
            a: self.a.or(other.a),
            lambda: self.lambda.or(other.lambda),
            n_max: self.n_max.or(other.n_max),
            x_max: self.x_max.or(other.x_max),
            family: self.family.or(other.family),
            tol: self.tol.or(other.tol),
            trunc_eps: self.trunc_eps.or(other.trunc_eps),
            format: self.format.or(other.format),
            out: self.out.or(other.out),
            config: self.config,
        }
    }
}

/// Validated settings. `n`, `a`, `lambda` and `family` stay optional so that
/// `verify` can sweep its grid over the ones left unset.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub a: Option<f64>,
    pub lambda: Option<u32>,
    pub family: Option<u8>,
    pub n_max: u32,
    pub x_max: u32,
    pub tol: f64,
    pub trunc_eps: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Merges flags over the config file and validates the result.
    ///
    /// # Errors
    /// [`CliError::Usage`] for unreadable or malformed config files and for
    /// out-of-range values.
    pub fn resolve(flags: Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_config(path)?,
            None => Flags::default(),
        };
        let f = flags.or(file);
        let cfg = RunConfig {
            n: f.n,
            a: f.a,
            lambda: f.lambda,
            family: f.family,
            n_max: f.n_max.unwrap_or(10),
            x_max: f.x_max.unwrap_or(10),
            tol: f.tol.unwrap_or(1e-8),
            trunc_eps: f.trunc_eps.unwrap_or(1e-14),
            format: f.format.unwrap_or(Format::Json),
            out: f.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.to_string()));
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return usage("--tol must be positive");
        }
        if self.trunc_eps <= 0.0 || !self.trunc_eps.is_finite() {
            return usage("--trunc-eps must be positive");
        }
        if self.n_max > CAP || self.x_max > CAP {
            return usage("--n-max and --x-max are capped at 64");
        }
        if self.n.is_some_and(|n| n < 2) {
            return usage("--N must be at least 2");
        }
        if self.a.is_some_and(|a| a <= 0.0 || !a.is_finite()) {
            return usage("--a must be positive");
        }
        match self.family {
            None | Some(1 | 2) => {}
            Some(3) if self.lambda == Some(0) => return usage("family 3 needs lambda >= 1"),
            Some(3) => {}
            Some(_) => return usage("--family must be 1, 2 or 3"),
        }
        Ok(())
    }

    pub fn truncation(&self) -> Truncation {
        Truncation { eps: self.trunc_eps, ..Truncation::default() }
    }

    /// Single parameter point for `table` and `bench`.
    ///
    /// # Errors
    /// [`CliError::Usage`] when family 3 meets the default `lambda = 0`.
    pub fn point(&self) -> Result<(usize, f64, u32, u8), CliError> {
        let lambda = self.lambda.unwrap_or(0);
        let family = self.family.unwrap_or(1);
        if family == 3 && lambda == 0 {
            return Err(CliError::Usage("family 3 needs lambda >= 1".into()));
        }
        Ok((self.n.unwrap_or(2), self.a.unwrap_or(1.0), lambda, family))
    }
}

fn read_config(path: &Path) -> Result<Flags, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parses `key = value` lines; `#` starts a comment. Keys match the flag
/// names, with `-` and `_` interchangeable.
///
/// # Errors
/// [`CliError::Usage`] on unknown keys or unparsable values.
pub fn parse_config(text: &str) -> Result<Flags, CliError> {
    let mut f = Flags::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: String| CliError::Usage(format!("config line {}: {m}", i + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value".into()))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        match key.as_str() {
            "N" => f.n = val(&key, value).map_err(bad)?,
            "a" => f.a = val(&key, value).map_err(bad)?,
            "lambda" => f.lambda = val(&key, value).map_err(bad)?,
            "n-max" => f.n_max = val(&key, value).map_err(bad)?,
            "x-max" => f.x_max = val(&key, value).map_err(bad)?,
            "family" => f.family = val(&key, value).map_err(bad)?,
            "tol" => f.tol = val(&key, value).map_err(bad)?,
            "trunc-eps" => f.trunc_eps = val(&key, value).map_err(bad)?,
            "format" => {
                f.format = Some(Format::from_str(value, true).map_err(|_| bad(format!("invalid value for {key}")))?)
            }
            "out" => f.out = Some(PathBuf::from(value)),
            _ => return Err(bad(format!("unknown key {key}"))),
        }
    }
    Ok(f)
}

fn val<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>, String> {
    value.parse().map(Some).map_err(|_| format!("invalid value for {key}"))
}
