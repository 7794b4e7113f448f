//! The serializable description of one run. Every output file echoes it, so
//! an artifact can be regenerated from its own header.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use zeno_core::bathsim::Solver;
use zeno_core::decay::{linear_grid, log_grid};
use zeno_core::{ModelSpec, QuadConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Filter,
    Gamma,
    Regimes,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Omega,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub variable: Variable,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    /// A single point is written as min = max, points = 1.
    pub fn single(variable: Variable, at: f64) -> Self {
        Grid {
            variable,
            min: at,
            max: at,
            points: 1,
            spacing: Spacing::Linear,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if self.points == 1 && self.min == self.max {
            return Ok(vec![self.min]);
        }
        let v = match self.spacing {
            Spacing::Linear => linear_grid(self.min, self.max, self.points),
            Spacing::Log => log_grid(self.min, self.max, self.points),
        };
        v.map_err(CliError::from)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Significant digits of emitted numbers.
    pub precision: usize,
}

pub const DEFAULT_PRECISION: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOptions {
    pub modes: usize,
    pub n_max: u32,
    pub max_gap: f64,
    /// Upper edge of the discretized band.
    pub bath_omega_max: f64,
    pub solver: Solver,
    pub budget: usize,
    pub refine: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelSpec,
    pub quad: QuadConfig,
    pub grid: Grid,
    /// Measurement interval of a filter curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleOptions>,
    pub output: OutputOptions,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("run config serializes")
    }

    /// Parses and validates; model and quadrature invariants are checked by
    /// their own deserializers.
    pub fn from_json(s: &str) -> Result<Self, CliError> {
        let c: RunConfig = serde_json::from_str(s).map_err(|e| CliError::Validation(format!("run config: {e}")))?;
        c.grid.values()?;
        if !(1..=17).contains(&c.output.precision) {
            return Err(CliError::Validation(format!(
                "precision must be in 1..=17, got {}",
                c.output.precision
            )));
        }
        Ok(c)
    }
}
