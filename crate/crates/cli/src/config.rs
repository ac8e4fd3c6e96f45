//! Flag and config-file handling. Everything is validated here, before any
//! computation starts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use henon4_core::moser::{moser_profile, MoserParams};
use henon4_core::radial::sigma_alpha;
use henon4_core::{BoundaryKind, BumpKind, QuadratureSpec, ADAMS_32PI2};
use serde::{Deserialize, Serialize};

pub const OUT_DIR_ENV: &str = "HENON4_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "henon4-out";
pub const DEFAULT_SWEEP_ALPHAS: [f64; 6] = [16.0, 32.0, 64.0, 128.0, 256.0, 512.0];
pub const DEFAULT_SCAN_ALPHAS: [f64; 4] = [0.0, 1.0, 4.0, 16.0];
pub const DEFAULT_NAVIER_EPSILONS: &str = "1e-2:1e-10:decade";
/// The Dirichlet sequence needs `log|log ε| > 2` and converges slowly.
pub const DEFAULT_DIRICHLET_EPSILONS: &str = "1e-20:1e-100:5decade";
/// Largest truncation order accepted for `m`.
pub const MAX_M: u32 = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyIdentities,
    ThresholdScan,
    MoserBlowup,
    TalentiCheck,
    SymmetrySweep,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::VerifyIdentities => "verify-identities",
            Command::ThresholdScan => "threshold-scan",
            Command::MoserBlowup => "moser-blowup",
            Command::TalentiCheck => "talenti-check",
            Command::SymmetrySweep => "symmetry-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// `σ` as given on the command line: a number, `k*32pi2` or `k*sigma_alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaToken {
    Value(f64),
    Adams(f64),
    SigmaAlpha(f64),
}

impl SigmaToken {
    pub fn resolve(&self, alpha: f64) -> f64 {
        match *self {
            SigmaToken::Value(v) => v,
            SigmaToken::Adams(k) => k * ADAMS_32PI2,
            SigmaToken::SigmaAlpha(k) => k * sigma_alpha(alpha),
        }
    }
}

impl FromStr for SigmaToken {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let s = s.trim();
        let (k, base) = match s.split_once('*') {
            Some((k, b)) => (
                k.trim()
                    .parse::<f64>()
                    .map_err(|_| ConfigError(format!("bad sigma factor in {s:?}")))?,
                b.trim(),
            ),
            None => (1.0, s),
        };
        let tok = match base {
            "32pi2" => SigmaToken::Adams(k),
            "sigma_alpha" => SigmaToken::SigmaAlpha(k),
            _ if s.contains('*') => return invalid(format!("unknown sigma token {base:?}")),
            _ => SigmaToken::Value(
                s.parse()
                    .map_err(|_| ConfigError(format!("sigma must be a number, 32pi2 or sigma_alpha, got {s:?}")))?,
            ),
        };
        let k = match tok {
            SigmaToken::Value(v) | SigmaToken::Adams(v) | SigmaToken::SigmaAlpha(v) => v,
        };
        if !(k > 0.0 && k.is_finite()) {
            return invalid(format!("sigma must be positive, got {s:?}"));
        }
        Ok(tok)
    }
}

impl fmt::Display for SigmaToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SigmaToken::Value(v) => write!(f, "{v}"),
            SigmaToken::Adams(k) if k == 1.0 => f.write_str("32pi2"),
            SigmaToken::Adams(k) => write!(f, "{k}*32pi2"),
            SigmaToken::SigmaAlpha(k) if k == 1.0 => f.write_str("sigma_alpha"),
            SigmaToken::SigmaAlpha(k) => write!(f, "{k}*sigma_alpha"),
        }
    }
}

/// A number or a string in the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Num(v) => v.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AlphaList {
    List(Vec<f64>),
    Text(String),
}

/// Keys accepted in a `--config` JSON file. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub command: Option<Command>,
    pub alpha: Option<f64>,
    pub sigma: Option<Scalar>,
    pub beta: Option<f64>,
    /// Integer, or `"none"` / `null` for the full functional.
    #[serde(default, deserialize_with = "deserialize_m")]
    pub m: Option<Option<Scalar>>,
    pub epsilons: Option<String>,
    pub alphas: Option<AlphaList>,
    pub bump: Option<String>,
    pub bc: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub rel_tol: Option<f64>,
    pub max_subdiv: Option<usize>,
}

fn deserialize_m<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Option<Scalar>>, D::Error> {
    Ok(Some(Option::<Scalar>::deserialize(d)?))
}

impl ParamFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("config file: {e}")))
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "henon4", version, allow_negative_numbers = true, about = "Weighted Adams-type functionals on the unit ball of R^4")]
pub struct Cli {
    /// Experiment to run; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number, `32pi2`, `sigma_alpha`, or `k*32pi2` / `k*sigma_alpha`.
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Truncation order of F_m, or `none` for the full functional.
    #[arg(long)]
    pub m: Option<String>,
    /// `start:end:decade`, e.g. `1e-2:1e-10:decade` or `1e-2:1e-20:2decade`.
    #[arg(long)]
    pub epsilons: Option<String>,
    /// Comma-separated list.
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long)]
    pub bump: Option<String>,
    /// `navier` or `dirichlet`.
    #[arg(long)]
    pub bc: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to the config file entry, then `$HENON4_OUT_DIR`, then `./henon4-out`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub max_subdiv: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: f64,
    pub sigma: SigmaToken,
    pub beta: f64,
    pub m: Option<u32>,
    pub epsilons: Vec<f64>,
    pub alphas: Vec<f64>,
    pub bump: BumpKind,
    pub bc: BoundaryKind,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: Format,
    pub quadrature: QuadratureSpec,
}

pub fn parse_m(s: &str) -> Result<Option<u32>, ConfigError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    let m: u32 = s
        .parse()
        .map_err(|_| ConfigError(format!("m must be a non-negative integer or none, got {s:?}")))?;
    if m > MAX_M {
        return invalid(format!("m must be <= {MAX_M}, got {m}"));
    }
    Ok(Some(m))
}

/// Parses `start:end:mode` with mode `decade` or `<k>decade`.
pub fn parse_epsilons(s: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [start, end, mode] = parts[..] else {
        return invalid(format!("epsilons must look like start:end:decade, got {s:?}"));
    };
    let num = |x: &str| {
        x.parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0 && *v < 1.0)
            .ok_or_else(|| ConfigError(format!("epsilon bounds must lie in (0, 1), got {x:?}")))
    };
    let (a, b) = (num(start)?, num(end)?);
    let step = match mode.strip_suffix("decade") {
        Some("") => 1,
        Some(k) => k
            .parse::<u32>()
            .ok()
            .filter(|k| *k >= 1)
            .ok_or_else(|| ConfigError(format!("bad epsilon step {mode:?}")))?,
        None => return invalid(format!("epsilon step mode must be decade or <k>decade, got {mode:?}")),
    };
    let (da, db) = (-a.log10(), -b.log10());
    let round = |d: f64| {
        let r = d.round();
        ((d - r).abs() < 1e-9).then_some(r as u32)
    };
    let (Some(da), Some(db)) = (round(da), round(db)) else {
        return invalid("epsilon bounds must be powers of ten");
    };
    if db <= da {
        return invalid("epsilons must decrease from start to end");
    }
    Ok(henon4_core::moser::decade_grid(da, db, step))
}

pub fn parse_alphas(s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| ConfigError(format!("bad alpha {x:?} in list")))
        })
        .collect()
}

fn parse_bc(s: &str) -> Result<BoundaryKind, ConfigError> {
    s.trim().parse().map_err(|e| ConfigError(format!("{e}")))
}

impl RunConfig {
    /// Merges flags over the optional config file, fills defaults and validates.
    pub fn from_cli(cli: &Cli) -> Result<Self, ConfigError> {
        let file = match &cli.config {
            Some(p) => ParamFile::load(p)?,
            None => ParamFile::default(),
        };
        Self::merge(cli, file)
    }

    pub fn merge(cli: &Cli, file: ParamFile) -> Result<Self, ConfigError> {
        let Some(command) = cli.command.or(file.command) else {
            return invalid("no command given");
        };
        let sweep = command == Command::SymmetrySweep;

        let alpha = cli.alpha.or(file.alpha).unwrap_or(0.0);
        let sigma_text = cli.sigma.clone().or(file.sigma.as_ref().map(Scalar::text));
        let sigma = match &sigma_text {
            Some(s) => s.parse()?,
            None if sweep => SigmaToken::Adams(1.0),
            None => SigmaToken::SigmaAlpha(0.9),
        };
        let beta = cli.beta.or(file.beta).unwrap_or(1.2);
        let m = match (&cli.m, &file.m) {
            (Some(s), _) => parse_m(s)?,
            (None, Some(None)) => None,
            (None, Some(Some(Scalar::Num(v)))) if v.fract() == 0.0 && *v >= 0.0 => parse_m(&v.to_string())?,
            (None, Some(Some(Scalar::Num(v)))) => return invalid(format!("m must be an integer, got {v}")),
            (None, Some(Some(Scalar::Text(s)))) => parse_m(s)?,
            (None, None) if sweep => Some(1),
            (None, None) => None,
        };

        let alphas = match (&cli.alphas, &file.alphas) {
            (Some(s), _) => parse_alphas(s)?,
            (None, Some(AlphaList::List(v))) => v.clone(),
            (None, Some(AlphaList::Text(s))) => parse_alphas(s)?,
            (None, None) if sweep => DEFAULT_SWEEP_ALPHAS.to_vec(),
            (None, None) => DEFAULT_SCAN_ALPHAS.to_vec(),
        };
        let bump = match cli.bump.as_deref().or(file.bump.as_deref()) {
            Some(s) => s
                .parse::<BumpKind>()
                .map_err(|e| ConfigError(format!("{e}")))?,
            None => BumpKind::Peak,
        };
        let bc = match cli.bc.as_deref().or(file.bc.as_deref()) {
            Some(s) => parse_bc(s)?,
            None => BoundaryKind::Navier,
        };
        let epsilons = match cli.epsilons.as_deref().or(file.epsilons.as_deref()) {
            Some(s) => parse_epsilons(s)?,
            None if bc == BoundaryKind::Dirichlet => parse_epsilons(DEFAULT_DIRICHLET_EPSILONS)?,
            None => parse_epsilons(DEFAULT_NAVIER_EPSILONS)?,
        };
        let seed = cli.seed.or(file.seed).unwrap_or(7);
        let out_dir = cli
            .out_dir
            .clone()
            .or(file.out_dir)
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let format = cli.format.or(file.format).unwrap_or(Format::Csv);

        let mut quadrature = QuadratureSpec::default();
        if let Some(t) = cli.rel_tol.or(file.rel_tol) {
            quadrature.rel_tol = t;
        }
        if let Some(n) = cli.max_subdiv.or(file.max_subdiv) {
            quadrature.max_subdivisions = n;
        }

        let cfg = RunConfig {
            command,
            alpha,
            sigma,
            beta,
            m,
            epsilons,
            alphas,
            bump,
            bc,
            seed,
            out_dir,
            format,
            quadrature,
        };
        cfg.validate(sigma_text.is_some())?;
        Ok(cfg)
    }

    fn validate(&self, sigma_given: bool) -> Result<(), ConfigError> {
        self.quadrature
            .validate()
            .or_else(|e| invalid(format!("{e}")))?;
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return invalid(format!("alpha must be finite and >= 0, got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return invalid(format!("beta must be finite and > 0, got {}", self.beta));
        }
        if self.alphas.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return invalid("alphas must be finite and >= 0");
        }
        match self.command {
            Command::VerifyIdentities | Command::ThresholdScan => {
                for &a in self.alphas.iter().chain([self.alpha].iter()) {
                    let s = self.sigma.resolve(a);
                    if s >= sigma_alpha(a) {
                        return invalid(format!(
                            "sigma = {s} must lie below sigma_alpha = {} at alpha = {a}",
                            sigma_alpha(a)
                        ));
                    }
                }
                if self.alphas.is_empty() {
                    return invalid("alphas must not be empty");
                }
            }
            Command::MoserBlowup => {
                if sigma_given {
                    return invalid("moser-blowup takes --beta (sigma = beta * sigma_alpha), not --sigma");
                }
                for &e in &self.epsilons {
                    MoserParams::new(e, self.bc)
                        .and_then(|mp| moser_profile(&mp))
                        .or_else(|err| invalid(format!("epsilon {e:e}: {err}")))?;
                }
            }
            Command::TalentiCheck => {}
            Command::SymmetrySweep => {
                if self.alphas.len() < henon4_core::symmetry::FIT_WINDOW {
                    return invalid(format!(
                        "symmetry-sweep needs at least {} alphas",
                        henon4_core::symmetry::FIT_WINDOW
                    ));
                }
                if self.alphas.windows(2).any(|w| !(w[1] > w[0])) {
                    return invalid("alphas must be strictly increasing");
                }
                if self.alphas[0] < 4.0 {
                    return invalid("symmetry-sweep needs alphas >= 4");
                }
                if matches!(self.sigma, SigmaToken::SigmaAlpha(_)) {
                    return invalid("symmetry-sweep needs a fixed sigma, not a multiple of sigma_alpha");
                }
                if !matches!(self.m, Some(m) if m >= 1) {
                    return invalid("symmetry-sweep needs m >= 1");
                }
                for &a in &self.alphas {
                    if self.sigma.resolve(a) > ADAMS_32PI2 * (1.0 + 1e-12) {
                        return invalid("symmetry-sweep needs sigma <= 32pi2");
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("henon4").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn sigma_tokens() {
        let a = 4.0;
        assert_eq!("32pi2".parse::<SigmaToken>().unwrap().resolve(a), ADAMS_32PI2);
        assert_eq!("sigma_alpha".parse::<SigmaToken>().unwrap().resolve(a), sigma_alpha(a));
        let t: SigmaToken = "0.8*sigma_alpha".parse().unwrap();
        assert!((t.resolve(a) - 0.8 * sigma_alpha(a)).abs() < 1e-12);
        assert_eq!("12.5".parse::<SigmaToken>().unwrap(), SigmaToken::Value(12.5));
        assert!("pi".parse::<SigmaToken>().is_err());
        assert!("-1".parse::<SigmaToken>().is_err());
        assert!("2*foo".parse::<SigmaToken>().is_err());
    }

    #[test]
    fn epsilon_grids() {
        let e = parse_epsilons("1e-2:1e-10:decade").unwrap();
        assert_eq!(e.len(), 9);
        assert_eq!(e[0], 1e-2);
        assert_eq!(e[8], 1e-10);
        assert_eq!(parse_epsilons("1e-2:1e-10:2decade").unwrap().len(), 5);
        assert!(parse_epsilons("1e-10:1e-2:decade").is_err());
        assert!(parse_epsilons("2e-2:1e-10:decade").is_err());
        assert!(parse_epsilons("1e-2:1e-10:linear").is_err());
        assert!(parse_epsilons("1e-2:1e-10").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ParamFile::parse(r#"{"command": "symmetry-sweep", "m": 2, "seed": 3, "bump": "poly4"}"#).unwrap();
        let cfg = RunConfig::merge(&cli(&["--seed", "9"]), file).unwrap();
        assert_eq!(cfg.command, Command::SymmetrySweep);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.m, Some(2));
        assert_eq!(cfg.bump, BumpKind::Poly4);
        assert_eq!(cfg.alphas, DEFAULT_SWEEP_ALPHAS.to_vec());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ParamFile::parse(r#"{"alpah": 1}"#).is_err());
        assert!(ParamFile::parse(r#"{"m": null}"#).unwrap().m == Some(None));
    }

    #[test]
    fn validation() {
        let bad = |args: &[&str]| RunConfig::merge(&cli(args), ParamFile::default()).is_err();
        assert!(bad(&["threshold-scan", "--sigma", "sigma_alpha"]));
        assert!(bad(&["symmetry-sweep", "--m", "0"]));
        assert!(bad(&["symmetry-sweep", "--alphas", "16,32,64"]));
        assert!(bad(&["symmetry-sweep", "--sigma", "2*32pi2"]));
        assert!(bad(&["moser-blowup", "--sigma", "32pi2"]));
        assert!(bad(&["moser-blowup", "--alpha", "-1"]));
        assert!(bad(&["moser-blowup", "--bc", "dirichlet", "--epsilons", "1e-2:1e-10:decade"]));
        assert!(!bad(&["moser-blowup", "--bc", "dirichlet"]));
        assert!(bad(&["talenti-check", "--rel-tol", "0"]));
        assert!(bad(&[]));
        assert!(!bad(&["moser-blowup", "--alpha", "0", "--beta", "1.2"]));
    }
}
