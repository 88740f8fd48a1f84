//! Declarative job configuration: a TOML file mirrors the command-line
//! options; explicit flags win over file values.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

/// CLI-level failure with a machine-readable name for the diagnostic stream.
#[derive(Debug)]
pub enum CliError {
    /// An engine error, reported under its own name.
    Core(arbcost::Error),
    /// Filesystem/stream failure.
    Io(String),
    /// Invalid or incomplete configuration; no outputs were written.
    Config(String),
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.name(),
            CliError::Io(_) => "IoError",
            CliError::Config(_) => "ConfigError",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Config(m) => write!(f, "{m}"),
        }
    }
}

impl From<arbcost::Error> for CliError {
    fn from(e: arbcost::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `[params]` table: market parameters.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub m: Option<f64>,
    pub v: Option<f64>,
    pub c: Option<f64>,
}

/// `[price]` table: lattice and payoff settings.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSection {
    pub s0: Option<f64>,
    pub v0: Option<f64>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub horizon: Option<f64>,
    pub payoff: Option<String>,
    pub strike: Option<f64>,
    pub value: Option<f64>,
    pub discount: Option<f64>,
    pub grid_out: Option<PathBuf>,
}

/// `[calibrate]` table.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSection {
    pub chain: Option<PathBuf>,
    pub quote_date: Option<String>,
    pub spot: Option<f64>,
    pub prices: Option<PathBuf>,
    pub direct: Option<bool>,
    pub sigma_star: Option<f64>,
    pub sigma: Option<f64>,
    pub mu: Option<f64>,
}

/// `[surfaces]` table.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfacesSection {
    pub which: Option<String>,
    pub chain: Option<PathBuf>,
    pub quote_date: Option<String>,
    pub spot: Option<f64>,
    pub chain_b: Option<PathBuf>,
    pub quote_date_b: Option<String>,
    pub spot_b: Option<f64>,
    pub prices: Option<PathBuf>,
    pub prices_b: Option<PathBuf>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub mu_b: Option<f64>,
    pub sigma_b: Option<f64>,
    pub r_star: Option<f64>,
    pub price_source: Option<String>,
    pub moneyness_edges: Option<Vec<f64>>,
    pub maturity_days: Option<Vec<f64>>,
}

/// `[series]` table for the rolling implied-rate command.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSection {
    pub prices_s: Option<PathBuf>,
    pub prices_v: Option<PathBuf>,
    pub c: Option<f64>,
    pub window: Option<usize>,
    pub smoothing: Option<String>,
}

/// `[common]` table mirroring the shared flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommonSection {
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub annualization: Option<u32>,
    pub seed: Option<u64>,
}

/// Whole config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub common: CommonSection,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub price: PriceSection,
    #[serde(default)]
    pub calibrate: CalibrateSection,
    #[serde(default)]
    pub surfaces: SurfacesSection,
    #[serde(default)]
    pub series: SeriesSection,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let raw = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&raw)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }
}

/// `flag.or(config)` for any option pair.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

/// Like [`pick`] but required, with the field named in the error.
pub fn require<T: Clone>(flag: &Option<T>, file: &Option<T>, what: &str) -> CliResult<T> {
    pick(flag, file).ok_or_else(|| {
        CliError::Config(format!("missing required option `{what}` (flag or config)"))
    })
}

/// Resolve (dt, steps) from any two of dt/steps/horizon.
pub fn resolve_grid(
    dt: Option<f64>,
    steps: Option<usize>,
    horizon: Option<f64>,
) -> CliResult<(f64, usize)> {
    match (dt, steps, horizon) {
        (Some(dt), Some(n), None) => Ok((dt, n)),
        (Some(dt), None, Some(t)) => {
            if dt <= 0.0 || t <= 0.0 {
                return Err(CliError::Config("dt and horizon must be positive".into()));
            }
            let n = (t / dt).round();
            if n < 1.0 || ((t / dt) - n).abs() > 1e-6 * n.max(1.0) {
                return Err(CliError::Config(format!(
                    "horizon {t} is not an integer multiple of dt {dt}"
                )));
            }
            Ok((dt, n as usize))
        }
        (None, Some(n), Some(t)) => {
            if n == 0 || t <= 0.0 {
                return Err(CliError::Config("steps and horizon must be positive".into()));
            }
            Ok((t / n as f64, n))
        }
        (Some(_), Some(_), Some(_)) => Err(CliError::Config(
            "dt, steps and horizon are over-determined; give exactly two".into(),
        )),
        _ => Err(CliError::Config(
            "give exactly two of dt, steps and horizon".into(),
        )),
    }
}

/// Check that a referenced input file exists before any computation.
pub fn check_exists(path: &Path) -> CliResult<()> {
    if !path.is_file() {
        return Err(CliError::Config(format!(
            "input file {} does not exist",
            path.display()
        )));
    }
    Ok(())
}

pub fn parse_date(raw: &str, what: &str) -> CliResult<chrono::NaiveDate> {
    chrono::NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .map_err(|e| CliError::Config(format!("bad {what} {raw:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_resolution() {
        assert_eq!(resolve_grid(Some(0.01), Some(100), None).unwrap(), (0.01, 100));
        assert_eq!(resolve_grid(Some(0.01), None, Some(1.0)).unwrap(), (0.01, 100));
        let (dt, n) = resolve_grid(None, Some(500), Some(1.0)).unwrap();
        assert_eq!(n, 500);
        assert!((dt - 0.002).abs() < 1e-15);
        assert!(resolve_grid(Some(0.01), Some(100), Some(2.0)).is_err());
        assert!(resolve_grid(None, None, Some(1.0)).is_err());
        assert!(resolve_grid(Some(0.3), None, Some(1.0)).is_err());
    }

    #[test]
    fn flags_override_file_values() {
        assert_eq!(pick(&Some(1.0), &Some(2.0)), Some(1.0));
        assert_eq!(pick(&None, &Some(2.0)), Some(2.0));
        assert_eq!(pick::<f64>(&None, &None), None);
    }

    #[test]
    fn config_parses_all_sections() {
        let toml = r#"
            [common]
            format = "json"
            annualization = 252

            [params]
            mu = 0.05
            sigma = 0.2
            m = 0.03
            v = 0.1
            c = 0.0

            [price]
            s0 = 100.0
            v0 = 90.0
            steps = 500
            horizon = 1.0
            payoff = "call"
            strike = 100.0

            [series]
            window = 252
            c = 299.4773
        "#;
        let cfg: FileConfig = toml::from_str(toml).unwrap();
        assert_eq!(cfg.params.mu, Some(0.05));
        assert_eq!(cfg.price.steps, Some(500));
        assert_eq!(cfg.series.c, Some(299.4773));
    }
}
