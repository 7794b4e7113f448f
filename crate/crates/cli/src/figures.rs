//! Parameter sets of the reference figures. All use G = 0.01, ω_c = 10 and
//! a zero-temperature bath.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde_json::json;
use zeno_core::decay::{DEFAULT_TAU_MAX, DEFAULT_TAU_MIN, DEFAULT_TAU_POINTS};
use zeno_core::{ModelSpec, QuadConfig, SpectralDensity, StatePrep, SystemParams, Temperature};

use crate::commands::run;
use crate::config::{Command, Format, Grid, OutputOptions, RunConfig, Spacing, Variable};
use crate::error::CliError;

const G: f64 = 0.01;
const WC: f64 = 10.0;
const N_SPINS: u32 = 20;

pub struct Curve {
    pub slug: &'static str,
    pub label: &'static str,
    pub cfg: RunConfig,
}

pub struct Figure {
    pub id: u8,
    pub title: &'static str,
    pub curves: Vec<Curve>,
}

/// (slug, label, ε, Δ) of the three Γ(τ) curves.
const GAMMA_CASES: [(&str, &str, f64, f64); 3] = [
    ("population-decay", "Delta = 2, eps = 0", 0.0, 2.0),
    ("pure-dephasing", "Delta = 0, eps = 2", 2.0, 0.0),
    ("general", "Delta = 2, eps = 2", 2.0, 2.0),
];

fn bath(s: f64) -> Result<SpectralDensity, CliError> {
    Ok(SpectralDensity::new(G, s, WC)?)
}

fn tau_grid() -> Grid {
    Grid {
        variable: Variable::Tau,
        min: DEFAULT_TAU_MIN,
        max: DEFAULT_TAU_MAX,
        points: DEFAULT_TAU_POINTS,
        spacing: Spacing::Log,
    }
}

pub fn figure(id: u8, format: Format, precision: usize, quad: QuadConfig) -> Result<Figure, CliError> {
    let output = OutputOptions {
        format,
        path: None,
        precision,
    };
    let gamma = |model: ModelSpec| RunConfig {
        command: Command::Gamma,
        model,
        quad,
        grid: tau_grid(),
        tau: None,
        oracle: None,
        output: output.clone(),
    };
    let (title, curves) = match id {
        1 | 2 => {
            let tau = if id == 1 { 2.0 } else { 1.0 };
            let b = bath(1.0)?;
            let x = StatePrep::x_polarized();
            let cases = [
                (
                    "population-decay",
                    "Delta = 1, eps = 0",
                    ModelSpec::population_decay(SystemParams::new(0.0, 1.0)?, b)?,
                ),
                (
                    "pure-dephasing",
                    "Delta = 0, eps = 1",
                    ModelSpec::pure_dephasing(1.0, x, Temperature::Zero, b)?,
                ),
                (
                    "general",
                    "Delta = 1, eps = 2",
                    ModelSpec::spin_boson(SystemParams::new(2.0, 1.0)?, x, Temperature::Zero, b)?,
                ),
            ];
            let curves = cases
                .into_iter()
                .map(|(slug, label, model)| Curve {
                    slug,
                    label,
                    cfg: RunConfig {
                        command: Command::Filter,
                        model,
                        quad,
                        grid: Grid {
                            variable: Variable::Omega,
                            min: 0.0,
                            max: 8.0,
                            points: 400,
                            spacing: Spacing::Linear,
                        },
                        tau: Some(tau),
                        oracle: None,
                        output: output.clone(),
                    },
                })
                .collect();
            let title = if id == 1 {
                "Q(omega, tau = 2), theta = pi/2, phi = 0"
            } else {
                "Q(omega, tau = 1), theta = pi/2, phi = 0"
            };
            (title, curves)
        }
        3..=5 | 8 => {
            let (s, theta, title) = match id {
                3 => (1.0, FRAC_PI_2, "Gamma(tau), theta = pi/2, Ohmic s = 1"),
                4 => (0.8, FRAC_PI_2, "Gamma(tau), theta = pi/2, sub-Ohmic s = 0.8"),
                5 => (2.0, FRAC_PI_2, "Gamma(tau), theta = pi/2, super-Ohmic s = 2"),
                _ => (1.0, 0.0, "Gamma(tau), theta = 0, Ohmic s = 1"),
            };
            let prep = StatePrep::qubit(theta, 0.0)?;
            let mut curves = Vec::new();
            for (slug, label, eps, delta) in GAMMA_CASES {
                let m = ModelSpec::spin_boson(SystemParams::new(eps, delta)?, prep, Temperature::Zero, bath(s)?)?;
                curves.push(Curve {
                    slug,
                    label,
                    cfg: gamma(m),
                });
            }
            (title, curves)
        }
        6 | 7 => {
            let (s, prep, title) = if id == 6 {
                (
                    0.8,
                    StatePrep::large_spin_jz(N_SPINS)?,
                    "Gamma(tau), collective J_z state, N_s = 20, s = 0.8",
                )
            } else {
                (
                    1.5,
                    StatePrep::large_spin_jx(N_SPINS)?,
                    "Gamma(tau), collective J_x state, N_s = 20, s = 1.5",
                )
            };
            let mut curves = Vec::new();
            for (slug, label, eps, delta) in GAMMA_CASES {
                let m = ModelSpec::large_spin(SystemParams::new(eps, delta)?, prep, Temperature::Zero, bath(s)?)?;
                curves.push(Curve {
                    slug,
                    label,
                    cfg: gamma(m),
                });
            }
            (title, curves)
        }
        _ => return Err(CliError::Usage(format!("unknown figure id {id}; valid ids are 1-8"))),
    };
    Ok(Figure { id, title, curves })
}

/// Writes one file per curve and `manifest.json` into `dir`.
pub fn write_figure(fig: &Figure, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for c in &fig.curves {
        let file = format!("{}.{}", c.slug, c.cfg.output.format.extension());
        let text = run(&c.cfg)?.table.render(&c.cfg)?;
        std::fs::write(dir.join(&file), text)?;
        entries.push(json!({"file": file, "label": c.label, "params": c.cfg}));
    }
    let manifest = json!({"figure": fig.id, "title": fig.title, "curves": entries});
    let mut s = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    s.push('\n');
    std::fs::write(dir.join("manifest.json"), s)?;
    Ok(())
}
