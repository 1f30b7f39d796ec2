//! Command-line flags, the JSON config overlay, and the resolved per-command settings.

use crate::InputError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "finpoisson",
    version,
    about = "Randers metrics, singular radial problems and anisotropic Poisson solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output encoding.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON file whose keys override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a norm, its dual, symmetrization, Legendre map and constants.
    Metric(MetricArgs),
    /// Solve the singular radial problem.
    Ode(OdeArgs),
    /// Solve the Poisson problem on a 2-D metric ball.
    Pde(PdeArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Tabulate the disc model along a radius.
    Poincare(PoincareArgs),
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricArgs {
    /// Structure descriptor file (`{"dim", "kind", "b", "h"}`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<PathBuf>,
    /// Norm of the one-form for the planar Randers norm `|y| + β·y`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Direction angle of the one-form.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// Base point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    /// Tangent vector, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    /// Covector, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Curvature `c ≤ 0`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Output nodes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Startup radius (default `1e-6·ρ`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Integrator tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Source scale.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeArgs {
    /// `forward` or `backward`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Nodes per axis (odd, at least 65).
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    /// Seed of the random second start.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    /// Suite name or `all`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Multiplies every tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_scale: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Random samples per structure.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareArgs {
    /// Number of equally spaced radii in `(0, 2)`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

/// Settings common to every command.
#[derive(Debug, Clone)]
pub struct Common {
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<Map<String, Value>, InputError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| InputError(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(InputError(format!("config {} must hold a JSON object", path.display()))),
        Err(e) => Err(InputError(format!("config {}: {e}", path.display()))),
    }
}

/// Overlays the config file on the flags of one command; unknown keys are rejected.
fn overlay<T: Serialize + DeserializeOwned>(flags: &T, config: Map<String, Value>) -> Result<T, InputError> {
    let mut merged = match serde_json::to_value(flags) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("argument structs serialize to objects"),
    };
    merged.extend(config);
    serde_json::from_value(Value::Object(merged)).map_err(|e| InputError(format!("config: {e}")))
}

pub enum Resolved {
    Metric(MetricArgs),
    Ode(OdeArgs),
    Pde(PdeArgs),
    Verify(VerifyArgs),
    Poincare(PoincareArgs),
}

pub fn resolve(cli: Cli) -> Result<(Common, Resolved), InputError> {
    let mut config = match &cli.config {
        Some(p) => read_config(p)?,
        None => Map::new(),
    };
    let format = match config.remove("format") {
        Some(v) => serde_json::from_value(v).map_err(|e| InputError(format!("config key 'format': {e}")))?,
        None => cli.format.unwrap_or(Format::Json),
    };
    let out = match config.remove("out") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => return Err(InputError(format!("config key 'out' must be a string, got {other}"))),
        None => cli.out,
    };
    let resolved = match cli.command {
        Command::Metric(a) => Resolved::Metric(overlay(&a, config)?),
        Command::Ode(a) => Resolved::Ode(overlay(&a, config)?),
        Command::Pde(a) => Resolved::Pde(overlay(&a, config)?),
        Command::Verify(a) => Resolved::Verify(overlay(&a, config)?),
        Command::Poincare(a) => Resolved::Poincare(overlay(&a, config)?),
    };
    Ok((Common { format, out }, resolved))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_overrides_flags_and_rejects_unknown_keys() {
        let flags =
            OdeArgs { n: Some(3), mu: Some(0.1), c: None, rho: None, grid: None, eps: None, tol: None, lambda: None };
        let mut cfg = Map::new();
        cfg.insert("mu".into(), Value::from(0.2));
        let merged = overlay(&flags, cfg).unwrap();
        assert_eq!((merged.n, merged.mu), (Some(3), Some(0.2)));

        let mut bad = Map::new();
        bad.insert("N".into(), Value::from(161));
        assert!(overlay(&flags, bad).is_err());
    }
}
