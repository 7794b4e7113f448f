use std::io::Write;

use serde_json::{json, Value};
use zeno_core::bathsim::{
    compare_to_perturbative, discretize, product_form_survival, OracleConfig, SimConfig, Solver,
    DEFAULT_OMEGA_MAX_FACTOR,
};
use zeno_core::decay::Regime;
use zeno_core::decay::{CurveStatus, ExtremumKind, DEFAULT_TAU_MAX, DEFAULT_TAU_MIN, DEFAULT_TAU_POINTS};
use zeno_core::{effective_decay_rate, gamma_curve, DecayCurve, Execution, Family};

use crate::args::{CurveArgs, FamilyArg, FilterArgs, OracleArgs, TauArgs};
use crate::config::{Command, Grid, OracleOptions, RunConfig, Spacing, Variable};
use crate::error::CliError;
use crate::table::{col, Cell, Table};

pub const ORACLE_TAU_MIN: f64 = 0.2;
pub const ORACLE_TAU_MAX: f64 = 2.0;
pub const ORACLE_TAU_POINTS: usize = 10;

/// Band edge for the full solver, in units of ω_c. With at most a handful
/// of modes a wide band leaves the spacing coarser than the system
/// frequencies.
pub const FULL_SOLVER_OMEGA_MAX_FACTOR: f64 = 2.0;

/// Result of a run: the table and whether a threshold check failed.
pub struct Outcome {
    pub table: Table,
    pub threshold_failed: bool,
}

pub fn filter_config(a: &FilterArgs) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        command: Command::Filter,
        model: a.model.build(FamilyArg::General)?,
        quad: a.model.quad()?,
        grid: Grid {
            variable: Variable::Omega,
            min: a.omega_min,
            max: a.omega_max,
            points: a.omega_points,
            spacing: Spacing::Linear,
        },
        tau: Some(a.tau),
        oracle: None,
        output: a.output.options(),
    })
}

fn tau_grid(t: &TauArgs, min: f64, max: f64, points: usize, spacing: Spacing) -> Grid {
    match t.tau {
        Some(tau) => Grid::single(Variable::Tau, tau),
        None => Grid {
            variable: Variable::Tau,
            min: t.tau_min.unwrap_or(min),
            max: t.tau_max.unwrap_or(max),
            points: t.tau_points.unwrap_or(points),
            spacing: t.spacing.unwrap_or(spacing),
        },
    }
}

pub fn curve_config(a: &CurveArgs, command: Command) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        command,
        model: a.model.build(FamilyArg::General)?,
        quad: a.model.quad()?,
        grid: tau_grid(
            &a.taus,
            DEFAULT_TAU_MIN,
            DEFAULT_TAU_MAX,
            DEFAULT_TAU_POINTS,
            Spacing::Log,
        ),
        tau: None,
        oracle: None,
        output: a.output.options(),
    })
}

pub fn oracle_config(a: &OracleArgs) -> Result<RunConfig, CliError> {
    let model = a.model.build(FamilyArg::Dephasing)?;
    let solver = Solver::from(a.solver).resolve(model.family())?;
    let factor = if solver == Solver::Full {
        FULL_SOLVER_OMEGA_MAX_FACTOR
    } else {
        DEFAULT_OMEGA_MAX_FACTOR
    };
    if !(a.max_gap.is_finite() && a.max_gap > 0.0) {
        return Err(CliError::Validation(format!(
            "--max-gap must be > 0, got {}",
            a.max_gap
        )));
    }
    Ok(RunConfig {
        command: Command::Oracle,
        quad: a.model.quad()?,
        grid: tau_grid(
            &a.taus,
            ORACLE_TAU_MIN,
            ORACLE_TAU_MAX,
            ORACLE_TAU_POINTS,
            Spacing::Linear,
        ),
        tau: None,
        oracle: Some(OracleOptions {
            modes: a.modes,
            n_max: a.nmax,
            max_gap: a.max_gap,
            bath_omega_max: a.bath_omega_max.unwrap_or(factor * model.bath().cutoff()),
            solver,
            budget: a.budget,
            refine: !a.no_refine,
        }),
        model,
        output: a.output.options(),
    })
}

/// Reads a run config from a file, unwrapping a `params` key if present.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let inner = match v.get("params") {
        Some(p) => p.clone(),
        None => v,
    };
    RunConfig::from_json(&inner.to_string())
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let table = match cfg.command {
        Command::Filter => filter_table(cfg)?,
        Command::Gamma => gamma_table(cfg)?,
        Command::Regimes => regimes_table(cfg)?,
        Command::Oracle => return oracle(cfg),
    };
    Ok(Outcome {
        table,
        threshold_failed: false,
    })
}

/// Writes to the configured path, or stdout.
pub fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output.path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn filter_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let tau = cfg.tau.ok_or_else(|| CliError::Validation("filter needs tau".into()))?;
    let omegas = cfg.grid.values()?;
    let q = Execution::default().try_map(&omegas, |&w| cfg.model.filter(w, tau))?;
    let mut t = Table::new(vec![col("omega", "frequency"), col("Q", "time")]);
    for (w, q) in omegas.iter().zip(q) {
        t.push(vec![(*w).into(), q.into()]);
    }
    Ok(t)
}

fn regime_name(r: Option<Regime>) -> &'static str {
    match r {
        Some(Regime::Zeno) => "zeno",
        Some(Regime::AntiZeno) => "anti-zeno",
        None => "none",
    }
}

fn curve_extras(t: &mut Table, curve: &DecayCurve) {
    let status = match curve.regimes.status {
        CurveStatus::Classified => "classified",
        CurveStatus::DegenerateFlat => "degenerate-flat",
        CurveStatus::NoDecay => "no-decay",
    };
    let extrema: Vec<Value> = curve
        .extrema()
        .iter()
        .map(|e| {
            let kind = match e.kind {
                ExtremumKind::Max => "max",
                ExtremumKind::Min => "min",
            };
            json!({"tau": e.tau, "kind": kind})
        })
        .collect();
    t.extras.insert("status".into(), status.into());
    t.extras.insert("extrema".into(), Value::Array(extrema));
}

fn gamma_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let taus = cfg.grid.values()?;
    let mut t = Table::new(vec![col("tau", "time"), col("gamma", "1/time"), col("label", "regime")]);
    if let [tau] = taus[..] {
        let g = effective_decay_rate(tau, &cfg.model, &cfg.quad)?;
        t.push(vec![tau.into(), g.into(), Cell::Empty]);
        return Ok(t);
    }
    let curve = gamma_curve(&taus, &cfg.model, &cfg.quad)?;
    for ((tau, g), label) in curve.taus.iter().zip(&curve.gammas).zip(curve.labels()) {
        t.push(vec![(*tau).into(), (*g).into(), regime_name(label).into()]);
    }
    curve_extras(&mut t, &curve);
    Ok(t)
}

fn regimes_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let taus = cfg.grid.values()?;
    let curve = gamma_curve(&taus, &cfg.model, &cfg.quad)?;
    let mut t = Table::new(vec![col("start", "time"), col("end", "time"), col("label", "regime")]);
    for s in curve.segments() {
        t.push(vec![s.start.into(), s.end.into(), regime_name(Some(s.label)).into()]);
    }
    curve_extras(&mut t, &curve);
    Ok(t)
}

fn oracle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opts = cfg
        .oracle
        .ok_or_else(|| CliError::Validation("oracle options missing".into()))?;
    let disc = discretize(cfg.model.bath(), opts.modes, opts.bath_omega_max)?;
    let taus = cfg.grid.values()?;
    let oc = OracleConfig {
        sim: SimConfig::default()
            .with_n_max(opts.n_max)
            .with_budget(opts.budget)
            .with_solver(opts.solver),
        quad: cfg.quad,
        max_gap: opts.max_gap,
        refine: opts.refine,
    };
    let report = compare_to_perturbative(&cfg.model, &disc, &taus, &oc)?;
    let dephasing = cfg.model.family() == Family::PureDephasing;
    let mut t = Table::new(vec![
        col("tau", "time"),
        col("gamma_sim", "1/time"),
        col("gamma_pert", "1/time"),
        col("gap", "relative"),
        col("gamma_continuum", "1/time"),
        col("continuum_gap", "relative"),
        col("gamma_exact", "1/time"),
        col("gamma_refined", "1/time"),
        col("survival_sim", "probability"),
        col("survival_analytic", "probability"),
        col("flagged", "bool"),
        col("under_resolved", "bool"),
    ]);
    for r in &report.rows {
        let analytic = if dephasing {
            Some(product_form_survival(&cfg.model, &disc, r.tau)?)
        } else {
            None
        };
        t.push(vec![
            r.tau.into(),
            r.gamma_sim.into(),
            r.gamma_pert.into(),
            r.gap.into(),
            r.gamma_continuum.into(),
            r.continuum_gap.into(),
            r.gamma_exact.into(),
            r.gamma_refined.into(),
            (-r.gamma_sim * r.tau).exp().into(),
            analytic.into(),
            r.flagged.into(),
            r.under_resolved.into(),
        ]);
    }
    let solver = serde_json::to_value(report.solver).unwrap_or(Value::Null);
    t.extras.insert("solver".into(), solver);
    t.extras.insert("modes".into(), report.modes.into());
    t.extras.insert("n_max".into(), report.n_max.into());
    t.extras.insert("max_gap".into(), json!(report.max_gap()));
    t.extras.insert("any_flagged".into(), report.any_flagged().into());
    t.extras
        .insert("any_under_resolved".into(), report.any_under_resolved().into());
    Ok(Outcome {
        threshold_failed: report.any_flagged(),
        table: t,
    })
}
