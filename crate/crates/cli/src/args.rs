use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zeno_core::bathsim::Solver;
use zeno_core::{ModelSpec, QuadConfig, SpectralDensity, StatePrep, SystemParams, Temperature};

use crate::config::{Format, OutputOptions, Spacing, DEFAULT_PRECISION};
use crate::error::CliError;

/// Effective decay rates under repeated projective measurement.
///
/// Units are dimensionless with ħ = 1. Angles are in radians
/// (θ = π/2 is 1.5707963...).
#[derive(Debug, Parser)]
#[command(name = "zeno", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Filter function Q(ω, τ) over a frequency grid.
    Filter(FilterArgs),
    /// Decay rate Γ(τ) over a τ grid, with regime labels.
    Gamma(CurveArgs),
    /// Extrema and Zeno/anti-Zeno segments of Γ(τ).
    Regimes(CurveArgs),
    /// Datasets for one of the reference figures.
    Figure(FigureArgs),
    /// Compare simulated single-interval decay with the perturbative rate.
    Oracle(OracleArgs),
    /// Run again from a parameter echo: a JSON output file, a run config, or
    /// one `params` entry of a figure manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// Rotating-wave population decay of the excited state.
    Decay,
    /// σ_z coupling with Δ = 0.
    Dephasing,
    /// General spin-boson qubit.
    General,
    /// N_s spins coupled collectively.
    LargeSpin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Jz,
    Jx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Auto,
    Full,
    ProductForm,
    Sector,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Auto => Solver::Auto,
            SolverArg::Full => Solver::Full,
            SolverArg::ProductForm => Solver::ProductForm,
            SolverArg::Sector => Solver::Sector,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Model family [default: general; dephasing for `oracle`].
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Bias ε.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub eps: f64,
    /// Tunneling Δ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    /// Polar angle of the prepared state, radians [default: π/2; 0 for decay].
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Azimuthal angle of the prepared state, radians [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Number of spins (large-spin family) [default: 1].
    #[arg(long)]
    pub nspins: Option<u32>,
    /// Collective preparation (large-spin family) [default: jz].
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Coupling strength G.
    #[arg(long = "G", default_value_t = 0.01, allow_negative_numbers = true)]
    pub coupling: f64,
    /// Ohmicity s.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub s: f64,
    /// Cutoff frequency ω_c.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub wc: f64,
    /// Inverse bath temperature.
    #[arg(long, conflicts_with = "zero_temp", allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Zero-temperature bath (the default).
    #[arg(long)]
    pub zero_temp: bool,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

impl ModelArgs {
    pub fn quad(&self) -> Result<QuadConfig, CliError> {
        quad_config(self.rel_tol)
    }

    pub fn build(&self, default_family: FamilyArg) -> Result<ModelSpec, CliError> {
        let family = self.family.unwrap_or(default_family);
        let bath = SpectralDensity::new(self.coupling, self.s, self.wc)?;
        let temperature = match self.beta {
            Some(b) => Temperature::finite(b)?,
            None => Temperature::Zero,
        };
        let sys = SystemParams::new(self.eps, self.delta)?;
        if family != FamilyArg::LargeSpin && (self.nspins.is_some() || self.init.is_some()) {
            return Err(CliError::Usage(
                "--nspins and --init apply to --family large-spin only".into(),
            ));
        }
        let model = match family {
            FamilyArg::Decay => {
                if self.theta.is_some_and(|t| t != 0.0) || self.phi.is_some_and(|p| p != 0.0) {
                    return Err(CliError::Usage(
                        "--family decay prepares the excited state; --theta/--phi must be 0 or omitted".into(),
                    ));
                }
                if !temperature.is_zero() {
                    return Err(CliError::Usage(
                        "--family decay is zero-temperature only; drop --beta".into(),
                    ));
                }
                ModelSpec::population_decay(sys, bath)?
            }
            FamilyArg::Dephasing => {
                if self.delta != 0.0 {
                    return Err(CliError::Usage(format!(
                        "--family dephasing needs --delta 0, got {}",
                        self.delta
                    )));
                }
                ModelSpec::pure_dephasing(self.eps, self.qubit()?, temperature, bath)?
            }
            FamilyArg::General => ModelSpec::spin_boson(sys, self.qubit()?, temperature, bath)?,
            FamilyArg::LargeSpin => {
                if self.theta.is_some() || self.phi.is_some() {
                    return Err(CliError::Usage(
                        "--family large-spin takes --init, not --theta/--phi".into(),
                    ));
                }
                let n = self.nspins.unwrap_or(1);
                let prep = match self.init.unwrap_or(InitArg::Jz) {
                    InitArg::Jz => StatePrep::large_spin_jz(n)?,
                    InitArg::Jx => StatePrep::large_spin_jx(n)?,
                };
                ModelSpec::large_spin(sys, prep, temperature, bath)?
            }
        };
        Ok(model)
    }

    fn qubit(&self) -> Result<StatePrep, CliError> {
        Ok(StatePrep::qubit(
            self.theta.unwrap_or(FRAC_PI_2),
            self.phi.unwrap_or(0.0),
        )?)
    }
}

pub fn quad_config(rel_tol: Option<f64>) -> Result<QuadConfig, CliError> {
    let d = QuadConfig::default();
    match rel_tol {
        Some(r) => Ok(QuadConfig::new(r, d.abs_tol(), d.max_panels(), d.tail_cut())?),
        None => Ok(d),
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Significant digits of emitted numbers.
    #[arg(long, default_value_t = DEFAULT_PRECISION, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..=17))]
    pub precision: usize,
}

impl OutputArgs {
    pub fn options(&self) -> OutputOptions {
        OutputOptions {
            format: self.format,
            path: self.out.clone(),
            precision: self.precision,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TauArgs {
    /// Single measurement interval instead of a grid.
    #[arg(long, conflicts_with_all = ["tau_min", "tau_max", "tau_points", "spacing"])]
    pub tau: Option<f64>,
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub tau_points: Option<usize>,
    /// Grid spacing [default: log; linear for `oracle`].
    #[arg(long, value_enum)]
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Measurement interval τ.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.0)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 8.0)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 400)]
    pub omega_points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub taus: TauArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Figure id: 1–2 filter curves, 3–5 Γ(τ) at θ = π/2 for s = 1, 0.8, 2,
    /// 6 collective J_z (s = 0.8, N_s = 20), 7 collective J_x (s = 1.5,
    /// N_s = 20), 8 Γ(τ) at θ = 0 (Ohmic).
    #[arg(value_parser = clap::value_parser!(u8).range(1..=8))]
    pub id: u8,
    /// Output directory [default: figure-<id>].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, default_value_t = DEFAULT_PRECISION, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..=17))]
    pub precision: usize,
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub taus: TauArgs,
    /// Number of bath modes M.
    #[arg(long, default_value_t = 40)]
    pub modes: usize,
    /// Occupation cutoff per mode (full solver).
    #[arg(long, default_value_t = 2)]
    pub nmax: u32,
    /// Largest tolerated relative gap before a row is flagged.
    #[arg(long, default_value_t = 0.05)]
    pub max_gap: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SolverArg,
    /// Upper edge of the discretized band [default: 10·ω_c; 2·ω_c when the
    /// full solver runs, where few modes cannot resolve the tail].
    #[arg(long)]
    pub bath_omega_max: Option<f64>,
    /// Largest Hilbert-space dimension of the full solver.
    #[arg(long, default_value_t = zeno_core::bathsim::DEFAULT_BUDGET)]
    pub budget: usize,
    /// Skip the 2M-mode refinement column.
    #[arg(long)]
    pub no_refine: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// JSON file holding a run config, or an object with a `params` key.
    pub config: PathBuf,
    /// Output file, replacing the recorded one [default: recorded, else stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}
