//! Experiment configuration: a flat `key = value` file with `[section]`
//! headers, overridden by command-line flags of the same names.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::envelope::{EnvelopeMode, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scheme::SchemeProfile;
use crate::sequence::ErrorSequence;

pub const MIN_GRID: usize = 1001;
pub const DEFAULT_GRID: usize = 50_001;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_VERIFY_GRID: usize = 100_000;

const KEYS: &[&str] = &[
    "eps",
    "scheme",
    "n-lo",
    "n-hi",
    "interval",
    "envelope",
    "verify-grid",
    "grid",
    "tol",
    "out",
    "emit-samples",
    "emit-certs",
    "emit-envelope",
    "format",
];

/// Certify lower bounds on best-approximation errors of a lethargy function.
#[derive(Debug, Parser)]
#[command(name = "lethargy", version, about)]
pub struct Args {
    /// Config file (`key = value` lines, optional `[section]` headers).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// power:ALPHA | log | geometric:RHO | file:PATH
    #[arg(long)]
    pub eps: Option<String>,
    /// poly | rational:PATH | spline
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long = "n-lo")]
    pub n_lo: Option<String>,
    #[arg(long = "n-hi")]
    pub n_hi: Option<String>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub interval: Option<Vec<String>>,
    /// identity | mollified:DELTA
    #[arg(long)]
    pub envelope: Option<String>,
    /// Points on the envelope containment verification grid.
    #[arg(long = "verify-grid")]
    pub verify_grid: Option<String>,
    /// Uniform solver grid size (certificate points are added).
    #[arg(long)]
    pub grid: Option<String>,
    /// Relative exchange tolerance.
    #[arg(long)]
    pub tol: Option<String>,
    /// Output directory for report.csv, report.json and requested dumps.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long = "emit-samples")]
    pub emit_samples: Option<String>,
    #[arg(long = "emit-certs")]
    pub emit_certs: bool,
    /// Points per envelope dump (writes envelope_p.csv and envelope_e.csv).
    #[arg(long = "emit-envelope")]
    pub emit_envelope: Option<String>,
    /// csv | json
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeSpec {
    Polynomial,
    Rational(PathBuf),
    Spline,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub eps_label: String,
    pub eps: ErrorSequence,
    pub scheme_label: String,
    pub scheme: SchemeProfile,
    pub n_lo: usize,
    pub n_hi: usize,
    pub interval: Interval,
    pub envelope: EnvelopeMode,
    pub verify_grid: usize,
    pub grid: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub emit_samples: Option<usize>,
    pub emit_certs: bool,
    pub emit_envelope: Option<usize>,
    pub format: Format,
}

impl ExperimentConfig {
    /// The in-code baseline: `power:0.5`, polynomial scheme, levels 0..=15.
    pub fn new(eps: ErrorSequence, scheme: SchemeProfile) -> Self {
        ExperimentConfig {
            eps_label: label_of(&eps),
            eps,
            scheme_label: scheme.name.clone(),
            scheme,
            n_lo: 0,
            n_hi: 15,
            interval: Interval::UNIT,
            envelope: EnvelopeMode::Identity,
            verify_grid: DEFAULT_VERIFY_GRID,
            grid: DEFAULT_GRID,
            tol: DEFAULT_TOL,
            out: None,
            emit_samples: None,
            emit_certs: false,
            emit_envelope: None,
            format: Format::Csv,
        }
    }

    pub fn from_args(args: &Args) -> Result<Self> {
        let mut settings = match &args.config {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("eps", args.eps.clone()),
            ("scheme", args.scheme.clone()),
            ("n-lo", args.n_lo.clone()),
            ("n-hi", args.n_hi.clone()),
            ("interval", args.interval.as_ref().map(|v| v.join(" "))),
            ("envelope", args.envelope.clone()),
            ("verify-grid", args.verify_grid.clone()),
            ("grid", args.grid.clone()),
            ("tol", args.tol.clone()),
            ("out", args.out.clone()),
            ("emit-samples", args.emit_samples.clone()),
            ("emit-certs", args.emit_certs.then(|| "true".to_string())),
            ("emit-envelope", args.emit_envelope.clone()),
            ("format", args.format.clone()),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                settings.insert(key.to_string(), value);
            }
        }
        Self::from_settings(&settings)
    }

    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| settings.get(key).map(|s| s.trim());
        let eps_label = get("eps").unwrap_or("power:0.5").to_string();
        let scheme_label = get("scheme").unwrap_or("poly").to_string();
        let mut config = ExperimentConfig::new(parse_eps(&eps_label)?, load_scheme(&parse_scheme(&scheme_label)?)?);
        config.eps_label = eps_label;
        config.scheme_label = scheme_label;
        if let Some(v) = get("n-lo") {
            config.n_lo = parse_num(v, "n-lo")?;
        }
        if let Some(v) = get("n-hi") {
            config.n_hi = parse_num(v, "n-hi")?;
        }
        if let Some(v) = get("interval") {
            let parts: Vec<&str> = v.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            let [a, b] = parts.as_slice() else {
                return Err(Error::Config(format!("interval needs two numbers, got `{v}`")));
            };
            config.interval = Interval::new(parse_num(a, "interval")?, parse_num(b, "interval")?)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(v) = get("envelope") {
            config.envelope = parse_envelope(v)?;
        }
        if let Some(v) = get("verify-grid") {
            config.verify_grid = parse_num(v, "verify-grid")?;
        }
        if let Some(v) = get("grid") {
            config.grid = parse_num(v, "grid")?;
        }
        if let Some(v) = get("tol") {
            config.tol = parse_num(v, "tol")?;
        }
        config.out = get("out").filter(|v| !v.is_empty()).map(PathBuf::from);
        if let Some(v) = get("emit-samples") {
            config.emit_samples = Some(parse_num(v, "emit-samples")?);
        }
        if let Some(v) = get("emit-certs") {
            config.emit_certs = parse_num(v, "emit-certs")?;
        }
        if let Some(v) = get("emit-envelope") {
            config.emit_envelope = Some(parse_num(v, "emit-envelope")?);
        }
        if let Some(v) = get("format") {
            config.format = match v {
                "csv" => Format::Csv,
                "json" => Format::Json,
                other => return Err(Error::Config(format!("unknown format `{other}` (csv | json)"))),
            };
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_lo > self.n_hi {
            return Err(Error::Config(format!("empty level range {}..={}", self.n_lo, self.n_hi)));
        }
        if self.grid < MIN_GRID {
            return Err(Error::Config(format!("grid must have at least {MIN_GRID} points, got {}", self.grid)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tolerance must lie in (0, 1), got {}", self.tol)));
        }
        if let EnvelopeMode::Mollified { delta } = self.envelope {
            if !(delta > 0.0 && delta < 0.5) {
                return Err(Error::Config(format!("blend radius must lie in (0, 1/2), got {delta}")));
            }
            if self.verify_grid < 1000 {
                return Err(Error::Config("verify-grid must be at least 1000".into()));
            }
        }
        if matches!(self.emit_samples, Some(c) if c < 2) {
            return Err(Error::Config("emit-samples needs at least 2 points".into()));
        }
        if matches!(self.emit_envelope, Some(c) if c < 2) {
            return Err(Error::Config("emit-envelope needs at least 2 points".into()));
        }
        if let Some(levels) = self.scheme.levels() {
            if self.n_hi >= levels {
                return Err(Error::Config(format!("scheme defines {levels} levels, n-hi = {} requested", self.n_hi)));
            }
        }
        Ok(())
    }
}

fn label_of(eps: &ErrorSequence) -> String {
    match eps {
        ErrorSequence::Power { alpha } => format!("power:{alpha}"),
        ErrorSequence::Logarithmic => "log".into(),
        ErrorSequence::Geometric { rho } => format!("geometric:{rho}"),
        ErrorSequence::Explicit { .. } => "explicit".into(),
    }
}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

pub fn parse_eps(spec: &str) -> Result<ErrorSequence> {
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k.trim(), Some(a.trim())),
        None => (spec.trim(), None),
    };
    let to_config = |e: Error| Error::Config(e.to_string());
    match (kind, arg) {
        ("power", Some(a)) => ErrorSequence::power(parse_num(a, "eps")?).map_err(to_config),
        ("log", None) => Ok(ErrorSequence::Logarithmic),
        ("geometric", Some(r)) => ErrorSequence::geometric(parse_num(r, "eps")?).map_err(to_config),
        ("file", Some(path)) => ErrorSequence::from_csv(Path::new(path)).map_err(to_config),
        _ => Err(Error::Config(format!(
            "unknown eps spec `{spec}` (power:ALPHA | log | geometric:RHO | file:PATH)"
        ))),
    }
}

pub fn parse_scheme(spec: &str) -> Result<SchemeSpec> {
    match spec.trim().split_once(':') {
        None if spec.trim() == "poly" => Ok(SchemeSpec::Polynomial),
        None if spec.trim() == "spline" => Ok(SchemeSpec::Spline),
        Some(("rational", path)) => Ok(SchemeSpec::Rational(PathBuf::from(path.trim()))),
        _ => Err(Error::Config(format!("unknown scheme `{spec}` (poly | rational:PATH | spline)"))),
    }
}

fn load_scheme(spec: &SchemeSpec) -> Result<SchemeProfile> {
    match spec {
        SchemeSpec::Polynomial => Ok(SchemeProfile::polynomial()),
        SchemeSpec::Spline => Ok(SchemeProfile::free_knot_spline(SchemeProfile::polynomial())),
        SchemeSpec::Rational(path) => {
            SchemeProfile::rational_from_csv(path).map_err(|e| Error::Config(e.to_string()))
        }
    }
}

pub fn parse_envelope(spec: &str) -> Result<EnvelopeMode> {
    match spec.trim().split_once(':') {
        None if spec.trim() == "identity" => Ok(EnvelopeMode::Identity),
        None if spec.trim() == "mollified" => Ok(EnvelopeMode::Mollified { delta: DEFAULT_DELTA }),
        Some(("mollified", d)) => Ok(EnvelopeMode::Mollified { delta: parse_num(d, "envelope")? }),
        _ => Err(Error::Config(format!("unknown envelope `{spec}` (identity | mollified:DELTA)"))),
    }
}

/// Parses `key = value` lines. `#` starts a comment; `[name]` lines open a
/// section, which only groups keys. Keys must be unique across the file.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') || line.len() < 3 {
                return Err(Error::Config(format!("line {}: malformed section header `{line}`", lineno + 1)));
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected `key = value`", lineno + 1)));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(out)
}

pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Args {
        Args::parse_from(std::iter::once("lethargy").chain(list.iter().copied()))
    }

    #[test]
    fn defaults() {
        let c = ExperimentConfig::from_args(&args(&[])).unwrap();
        assert_eq!(c.eps, ErrorSequence::Power { alpha: 0.5 });
        assert!(c.scheme.is_polynomial());
        assert_eq!((c.n_lo, c.n_hi), (0, 15));
        assert_eq!(c.grid, DEFAULT_GRID);
        assert_eq!(c.format, Format::Csv);
    }

    #[test]
    fn flags_are_parsed() {
        let c = ExperimentConfig::from_args(&args(&[
            "--eps", "geometric:1.1", "--scheme", "spline", "--n-lo", "2", "--n-hi", "4",
            "--interval", "1", "3", "--envelope", "mollified:0.2", "--grid", "2001", "--tol", "1e-6",
            "--emit-certs", "--format", "json",
        ]))
        .unwrap();
        assert_eq!(c.eps, ErrorSequence::Geometric { rho: 1.1 });
        assert_eq!(c.scheme.phi(1).unwrap(), 8);
        assert_eq!((c.n_lo, c.n_hi), (2, 4));
        assert_eq!(c.interval, Interval::new(1.0, 3.0).unwrap());
        assert_eq!(c.envelope, EnvelopeMode::Mollified { delta: 0.2 });
        assert_eq!(c.grid, 2001);
        assert!(c.emit_certs);
        assert_eq!(c.format, Format::Json);
    }

    #[test]
    fn flags_override_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        std::io::Write::write_all(
            &mut file,
            b"# experiment\n[sequence]\neps = log\n[levels]\nn-lo = 1\nn_hi = 3\n[domain]\ninterval = 2, 5\n",
        )
        .unwrap();
        let path = file.path().to_str().unwrap();
        let c = ExperimentConfig::from_args(&args(&["--config", path, "--n-hi", "6"])).unwrap();
        assert_eq!(c.eps, ErrorSequence::Logarithmic);
        assert_eq!((c.n_lo, c.n_hi), (1, 6));
        assert_eq!(c.interval, Interval::new(2.0, 5.0).unwrap());
    }

    #[test]
    fn invalid_settings() {
        for bad in [
            &["--eps", "power:-1"][..],
            &["--eps", "cubic"],
            &["--scheme", "wavelet"],
            &["--n-lo", "4", "--n-hi", "3"],
            &["--grid", "1000"],
            &["--interval", "0", "2"],
            &["--envelope", "mollified:0.7"],
            &["--format", "xml"],
            &["--emit-samples", "1"],
        ] {
            assert!(ExperimentConfig::from_args(&args(bad)).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn config_text_errors() {
        assert!(parse_config_text("colour = red").is_err());
        assert!(parse_config_text("eps").is_err());
        assert!(parse_config_text("[broken\neps = log").is_err());
        assert!(parse_config_text("eps = log\neps = log").is_err());
        assert_eq!(parse_config_text("  # only a comment\n\n").unwrap().len(), 0);
    }
}
