//! Effective decay rate, survival probability and Zeno/anti-Zeno
//! classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::filters::{
    filter_general, filter_large_spin, filter_population_decay, filter_pure_dephasing, ClosedBranch, Overlap,
};
use crate::params::{MeasurementProtocol, SpectralDensity, StatePrep, SystemParams, Temperature};
use crate::quad::{try_integrate_semi_infinite, try_integrate_triangle, QuadConfig};

/// Smallest grid accepted by [`classify_regimes`].
pub const MIN_CLASSIFY_POINTS: usize = 5;

/// Flat-slope threshold relative to max |Γ|.
pub const SLOPE_EPS_REL: f64 = 1e-6;

/// Tolerated roundoff below zero before a negative rate is an error.
const NEGATIVE_SLACK: f64 = 1e-12;

const THERMAL_TERMS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Rotating-wave excitation exchange; transition frequency Ω.
    PopulationDecay,
    /// σ_z coupling with Δ = 0.
    PureDephasing,
    GeneralSpinBoson,
    LargeSpin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct ModelSpec {
    family: Family,
    sys: SystemParams,
    prep: StatePrep,
    temperature: Temperature,
    bath: SpectralDensity,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    family: Family,
    sys: SystemParams,
    prep: StatePrep,
    #[serde(default)]
    temperature: Temperature,
    bath: SpectralDensity,
}

impl TryFrom<RawModel> for ModelSpec {
    type Error = Error;

    fn try_from(r: RawModel) -> Result<Self> {
        ModelSpec::new(r.family, r.sys, r.prep, r.temperature, r.bath)
    }
}

impl From<ModelSpec> for RawModel {
    fn from(m: ModelSpec) -> Self {
        RawModel {
            family: m.family,
            sys: m.sys,
            prep: m.prep,
            temperature: m.temperature,
            bath: m.bath,
        }
    }
}

impl ModelSpec {
    pub fn new(
        family: Family,
        sys: SystemParams,
        prep: StatePrep,
        temperature: Temperature,
        bath: SpectralDensity,
    ) -> Result<Self> {
        let is_large = matches!(prep, StatePrep::LargeSpinJz(_) | StatePrep::LargeSpinJx(_));
        match family {
            Family::LargeSpin if !is_large => {
                return Err(Error::Model(
                    "the large-spin family needs a large-spin preparation".into(),
                ));
            }
            Family::PopulationDecay | Family::PureDephasing | Family::GeneralSpinBoson if is_large => {
                return Err(Error::Model(format!("{family:?} needs a single-qubit preparation")));
            }
            Family::PopulationDecay => {
                if prep != StatePrep::excited() {
                    return Err(Error::Model(
                        "population decay is defined for the excited state (theta = 0)".into(),
                    ));
                }
                if !temperature.is_zero() {
                    return Err(Error::Model("population decay is a zero-temperature model".into()));
                }
            }
            Family::PureDephasing if sys.delta() != 0.0 => {
                return Err(Error::Model(format!(
                    "pure dephasing needs delta = 0, got {}",
                    sys.delta()
                )));
            }
            _ => {}
        }
        Ok(ModelSpec {
            family,
            sys,
            prep,
            temperature,
            bath,
        })
    }

    /// Rotating-wave decay model of the excited state with transition
    /// frequency Ω.
    pub fn population_decay(sys: SystemParams, bath: SpectralDensity) -> Result<Self> {
        Self::new(
            Family::PopulationDecay,
            sys,
            StatePrep::excited(),
            Temperature::Zero,
            bath,
        )
    }

    pub fn pure_dephasing(
        epsilon: f64,
        prep: StatePrep,
        temperature: Temperature,
        bath: SpectralDensity,
    ) -> Result<Self> {
        Self::new(
            Family::PureDephasing,
            SystemParams::new(epsilon, 0.0)?,
            prep,
            temperature,
            bath,
        )
    }

    pub fn spin_boson(
        sys: SystemParams,
        prep: StatePrep,
        temperature: Temperature,
        bath: SpectralDensity,
    ) -> Result<Self> {
        Self::new(Family::GeneralSpinBoson, sys, prep, temperature, bath)
    }

    pub fn large_spin(
        sys: SystemParams,
        prep: StatePrep,
        temperature: Temperature,
        bath: SpectralDensity,
    ) -> Result<Self> {
        Self::new(Family::LargeSpin, sys, prep, temperature, bath)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn sys(&self) -> &SystemParams {
        &self.sys
    }

    pub fn prep(&self) -> &StatePrep {
        &self.prep
    }

    pub fn temperature(&self) -> Temperature {
        self.temperature
    }

    pub fn bath(&self) -> &SpectralDensity {
        &self.bath
    }

    pub fn with_bath(&self, bath: SpectralDensity) -> Self {
        ModelSpec { bath, ..*self }
    }

    /// Transition frequency of the population-decay model.
    pub fn decay_frequency(&self) -> f64 {
        self.sys.omega()
    }

    /// Filter Q(ω, τ) of this model at ω ≥ 0.
    pub fn filter(&self, omega: f64, tau: f64) -> Result<f64> {
        match self.family {
            Family::PopulationDecay => {
                if omega < 0.0 || omega.is_nan() {
                    return Err(Error::Domain {
                        func: "filter_population_decay",
                        reason: format!("omega must be >= 0, got {omega}"),
                    });
                }
                filter_population_decay(omega, tau, self.decay_frequency())
            }
            Family::PureDephasing => {
                let st = self.theta().sin();
                Ok(st * st * filter_pure_dephasing(omega, tau, self.temperature)?)
            }
            Family::GeneralSpinBoson => match self.prep {
                StatePrep::Qubit(angles) => filter_general(omega, tau, &self.sys, &angles, self.temperature),
                _ => unreachable!("validated at construction"),
            },
            Family::LargeSpin => filter_large_spin(omega, tau, &self.sys, &self.prep, self.temperature),
        }
    }

    fn theta(&self) -> f64 {
        match self.prep {
            StatePrep::Qubit(a) => a.theta(),
            _ => 0.0,
        }
    }

    /// True when the closed-form filter covers this model, so the rate is a
    /// single frequency integral.
    fn has_frequency_route(&self) -> bool {
        match (self.family, self.prep) {
            (Family::GeneralSpinBoson, StatePrep::Qubit(a)) => ClosedBranch::of(&a).is_some(),
            _ => true,
        }
    }

    /// Transition amplitude source and multiplicity for the time-domain route.
    fn overlap(&self) -> (Overlap, f64) {
        match self.prep {
            StatePrep::Qubit(a) => (Overlap::Qubit(a), 1.0),
            StatePrep::LargeSpinJz(n) => (Overlap::CollectiveZ, f64::from(n.get())),
            StatePrep::LargeSpinJx(n) => (Overlap::CollectiveX, f64::from(n.get())),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(invalid("tau", format!("must be > 0, got {tau}")))
    }
}

fn nonnegative(value: f64, error_estimate: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -(NEGATIVE_SLACK + error_estimate) {
        Ok(0.0)
    } else {
        Err(Error::Accuracy {
            estimate: value,
            error_estimate,
            panels: 0,
        })
    }
}

/// Γ(τ) = ∫₀^∞ J(ω) Q(ω, τ) dω.
///
/// Models with a closed-form filter integrate over frequency. Single-qubit
/// preparations without one go through [`effective_decay_rate_time_domain`].
pub fn effective_decay_rate(tau: f64, model: &ModelSpec, cfg: &QuadConfig) -> Result<f64> {
    effective_decay_rate_with(tau, model, cfg, Execution::default())
}

/// [`effective_decay_rate`] with an explicit strategy for the ω panels.
pub fn effective_decay_rate_with(tau: f64, model: &ModelSpec, cfg: &QuadConfig, exec: Execution) -> Result<f64> {
    check_tau(tau)?;
    if !model.has_frequency_route() {
        return effective_decay_rate_time_domain(tau, model, cfg);
    }
    if model.family == Family::PureDephasing && model.theta().sin() == 0.0 {
        return Ok(0.0);
    }
    let osc = tau + 2.0 * std::f64::consts::PI / model.sys.omega().max(1.0);
    let r = try_integrate_semi_infinite(
        |w| {
            let j = model.bath.eval(w);
            if j == 0.0 {
                return Ok(0.0);
            }
            Ok(j * model.filter(w, tau)?)
        },
        model.bath.cutoff(),
        osc,
        cfg,
        exec,
    )?;
    nonnegative(r.value, r.error_estimate)
}

/// Bath correlation pieces C_c(t) = ∫ J coth(βω/2) cos ωt dω and
/// C_s(t) = ∫ J sin ωt dω in closed form for the exponential cutoff.
///
/// With Φ(a, t) = ∫ J e^{−aω} e^{−iωt} dω = G ω_c^{1−s} Γ(s+1) (a + 1/ω_c + it)^{−(s+1)},
/// coth = 1 + 2 Σ_{n≥1} e^{−nβω} turns C_c into a sum of Φ terms. The sum is
/// cut after a fixed number of terms and the rest replaced by its
/// Euler–Maclaurin integral.
#[derive(Debug, Clone, Copy)]
pub struct BathCorrelation {
    weight: f64,
    wc: f64,
    s: f64,
    beta_wc: Option<f64>,
}

impl BathCorrelation {
    pub fn new(bath: &SpectralDensity, temperature: Temperature) -> Self {
        let beta_wc = match temperature {
            Temperature::Zero => None,
            Temperature::Finite(b) => Some(b.get() * bath.cutoff()),
        };
        BathCorrelation {
            weight: bath.total_weight(),
            wc: bath.cutoff(),
            s: bath.ohmicity(),
            beta_wc,
        }
    }

    /// (C_c(t), C_s(t)).
    pub fn at(&self, t: f64) -> (f64, f64) {
        let y = self.wc * t;
        let p = -(self.s + 1.0);
        let phi0 = Complex64::new(1.0, y).powf(p);
        let mut cos_part = phi0.re;
        if let Some(b) = self.beta_wc {
            let mut sum = 0.0;
            for n in 1..=THERMAL_TERMS {
                sum += Complex64::new(1.0 + f64::from(n) * b, y).powf(p).re;
            }
            let z = Complex64::new(1.0 + (f64::from(THERMAL_TERMS) + 0.5) * b, y);
            // ∫_{N+½}^∞ f + f′(N+½)/24
            let tail = z.powf(-self.s).re / (self.s * b) - (self.s + 1.0) * b * z.powf(p - 1.0).re / 24.0;
            cos_part += 2.0 * (sum + tail);
        }
        (self.weight * cos_part, -self.weight * phi0.im)
    }
}

/// Γ(τ) = (2/τ) ∫₀^τ dt ∫₀^t dt′ [C_c(t′) K₁(t, t′) + C_s(t′) K₂(t, t′)],
/// the rate written against the bath correlation function. Valid for every
/// qubit and large-spin preparation; slower than the frequency route.
pub fn effective_decay_rate_time_domain(tau: f64, model: &ModelSpec, cfg: &QuadConfig) -> Result<f64> {
    check_tau(tau)?;
    let corr = BathCorrelation::new(&model.bath, model.temperature);
    let (overlap, mult) = match model.family {
        Family::PopulationDecay => {
            // r₁ + i r₂ = e^{iΩt}: the rotating-wave transition amplitude.
            return decay_time_domain(tau, model.decay_frequency(), &corr, cfg);
        }
        _ => model.overlap(),
    };
    let sys = model.sys;
    let osc = sys.omega().max(model.bath.cutoff());
    let r = try_integrate_triangle(
        |t, tp| {
            let now = overlap.at(t, &sys);
            let past = overlap.at(t - tp, &sys);
            let (cc, cs) = corr.at(tp);
            Ok(cc * (past.r1 * now.r1 + past.r2 * now.r2) + cs * (past.r1 * now.r2 - now.r1 * past.r2))
        },
        tau,
        osc,
        &time_domain_config(cfg, tau),
    )?;
    nonnegative(mult * 2.0 / tau * r.value, 2.0 / tau * r.error_estimate)
}

fn decay_time_domain(tau: f64, w0: f64, corr: &BathCorrelation, cfg: &QuadConfig) -> Result<f64> {
    // τ sinc² = (2/τ)∫∫ cos((w0 − ω)t′); coth is absent in the rotating-wave
    // model so the zero-temperature correlation is used.
    let zero = BathCorrelation { beta_wc: None, ..*corr };
    let r = try_integrate_triangle(
        |_, tp| {
            let (cc, cs) = zero.at(tp);
            let (s, c) = (w0 * tp).sin_cos();
            Ok(cc * c + cs * s)
        },
        tau,
        w0.max(corr.wc),
        &time_domain_config(cfg, tau),
    )?;
    nonnegative(2.0 / tau * r.value, 2.0 / tau * r.error_estimate)
}

fn time_domain_config(cfg: &QuadConfig, tau: f64) -> QuadConfig {
    // The double integral equals Γτ/2; rescale the absolute target so the
    // requested tolerance applies to Γ.
    cfg.with_abs_tol(0.5 * tau * cfg.abs_tol()).unwrap_or(*cfg)
}

/// S = e^{−Γ N τ}.
pub fn survival_probability(protocol: &MeasurementProtocol, gamma: f64) -> f64 {
    (-gamma.max(0.0) * protocol.duration()).exp()
}

/// Exact single-interval rate of the x-polarized state under pure
/// dephasing, Γ = −ln[1 − ½(1 − e^{−γ})]/τ with
/// γ(τ) = ∫ J(ω) (4/ω²)(1 − cos ωτ) coth(βω/2) dω.
pub fn pure_dephasing_exact(
    tau: f64,
    bath: &SpectralDensity,
    temperature: Temperature,
    cfg: &QuadConfig,
) -> Result<f64> {
    let gamma = dephasing_exponent(tau, bath, temperature, cfg)?;
    Ok(-(0.5 * (-gamma).exp_m1()).ln_1p() / tau)
}

/// γ(τ) of the exact pure-dephasing solution.
pub fn dephasing_exponent(tau: f64, bath: &SpectralDensity, temperature: Temperature, cfg: &QuadConfig) -> Result<f64> {
    check_tau(tau)?;
    let r = try_integrate_semi_infinite(
        |w| {
            let j = bath.eval(w);
            if j == 0.0 {
                return Ok(0.0);
            }
            let h = (0.5 * w * tau).sin();
            Ok(j * 8.0 * h * h / (w * w) * temperature.factor(w))
        },
        bath.cutoff(),
        tau,
        cfg,
        Execution::default(),
    )?;
    nonnegative(r.value, r.error_estimate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub tau: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Zeno,
    AntiZeno,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub label: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveStatus {
    Classified,
    /// Every slope is below the flat threshold; one Zeno segment by
    /// convention.
    DegenerateFlat,
    /// Γ vanishes identically.
    NoDecay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regimes {
    pub extrema: Vec<Extremum>,
    pub segments: Vec<Segment>,
    pub status: CurveStatus,
}

impl Regimes {
    /// Regime label at τ (the first segment containing it).
    pub fn label_at(&self, tau: f64) -> Option<Regime> {
        self.segments
            .iter()
            .find(|s| tau >= s.start && tau <= s.end)
            .map(|s| s.label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub taus: Vec<f64>,
    pub gammas: Vec<f64>,
    pub regimes: Regimes,
}

impl DecayCurve {
    pub fn extrema(&self) -> &[Extremum] {
        &self.regimes.extrema
    }

    pub fn segments(&self) -> &[Segment] {
        &self.regimes.segments
    }

    /// Point labels; `None` for curves without decay.
    pub fn labels(&self) -> Vec<Option<Regime>> {
        if self.regimes.status == CurveStatus::NoDecay {
            return vec![None; self.taus.len()];
        }
        self.taus.iter().map(|&t| self.regimes.label_at(t)).collect()
    }
}

fn check_grid(taus: &[f64]) -> Result<()> {
    if taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(invalid("tau_grid", "all points must be finite and > 0"));
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("tau_grid", "must be strictly increasing"));
    }
    Ok(())
}

/// Γ on a τ grid plus its regime classification.
pub fn gamma_curve(taus: &[f64], model: &ModelSpec, cfg: &QuadConfig) -> Result<DecayCurve> {
    gamma_curve_with(taus, model, cfg, Execution::default())
}

/// [`gamma_curve`] with an explicit fan-out strategy over grid points.
pub fn gamma_curve_with(taus: &[f64], model: &ModelSpec, cfg: &QuadConfig, exec: Execution) -> Result<DecayCurve> {
    curve_from_fn(taus, exec, |tau| {
        effective_decay_rate_with(tau, model, cfg, Execution::Sequential)
    })
}

/// Builds a [`DecayCurve`] from any rate function. Each grid point is
/// evaluated independently; the first failing point (in grid order) fails
/// the whole curve.
pub fn curve_from_fn<F>(taus: &[f64], exec: Execution, rate: F) -> Result<DecayCurve>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    check_grid(taus)?;
    let gammas = exec.try_map(taus, |&tau| {
        rate(tau).map_err(|e| Error::CurvePoint {
            tau,
            source: Box::new(e),
        })
    })?;
    if let Some((&tau, _)) = taus.iter().zip(&gammas).find(|(_, g)| !g.is_finite()) {
        return Err(Error::CurvePoint {
            tau,
            source: Box::new(Error::Evaluation { at: tau }),
        });
    }
    let regimes = classify_regimes(taus, &gammas)?;
    Ok(DecayCurve {
        taus: taus.to_vec(),
        gammas,
        regimes,
    })
}

/// Labels each stretch of the curve by the sign of its finite-difference
/// slope: rising is Zeno, falling is anti-Zeno. Extrema sit at sign changes
/// and are refined by the vertex of the parabola through the three bracketing
/// points.
pub fn classify_regimes(taus: &[f64], gammas: &[f64]) -> Result<Regimes> {
    let n = taus.len();
    if n != gammas.len() {
        return Err(invalid(
            "gammas",
            format!("length {} differs from tau grid length {n}", gammas.len()),
        ));
    }
    if n < MIN_CLASSIFY_POINTS {
        return Err(Error::TooFewPoints {
            min: MIN_CLASSIFY_POINTS,
            got: n,
        });
    }
    check_grid(taus)?;
    let (first, last) = (taus[0], taus[n - 1]);
    let scale = gammas.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if scale == 0.0 {
        return Ok(Regimes {
            extrema: vec![],
            segments: vec![Segment {
                start: first,
                end: last,
                label: Regime::Zeno,
            }],
            status: CurveStatus::NoDecay,
        });
    }
    let eps = SLOPE_EPS_REL * scale;
    let raw: Vec<i8> = taus
        .windows(2)
        .zip(gammas.windows(2))
        .map(|(t, g)| {
            let slope = (g[1] - g[0]) / (t[1] - t[0]);
            if slope.abs() < eps {
                0
            } else if slope > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let Some(first_sign) = raw.iter().copied().find(|&s| s != 0) else {
        return Ok(Regimes {
            extrema: vec![],
            segments: vec![Segment {
                start: first,
                end: last,
                label: Regime::Zeno,
            }],
            status: CurveStatus::DegenerateFlat,
        });
    };
    // Flat stretches join the preceding segment (the following one at the
    // start of the grid).
    let mut signs = raw.clone();
    let mut prev = first_sign;
    for s in signs.iter_mut() {
        if *s == 0 {
            *s = prev;
        }
        prev = *s;
    }

    let label = |s: i8| if s > 0 { Regime::Zeno } else { Regime::AntiZeno };
    let mut extrema = Vec::new();
    let mut segments = Vec::new();
    let mut start = first;
    for i in 1..signs.len() {
        if signs[i] == signs[i - 1] {
            continue;
        }
        let kind = if signs[i - 1] > 0 {
            ExtremumKind::Max
        } else {
            ExtremumKind::Min
        };
        let tau = vertex(&taus[i - 1..=i + 1], &gammas[i - 1..=i + 1]).max(start);
        extrema.push(Extremum { tau, kind });
        segments.push(Segment {
            start,
            end: tau,
            label: label(signs[i - 1]),
        });
        start = tau;
    }
    segments.push(Segment {
        start,
        end: last,
        label: label(*signs.last().expect("n >= 5")),
    });
    Ok(Regimes {
        extrema,
        segments,
        status: CurveStatus::Classified,
    })
}

/// Abscissa of the vertex of the parabola through three points, clamped to
/// their span.
fn vertex(t: &[f64], g: &[f64]) -> f64 {
    let (d1, d2) = ((g[1] - g[0]) / (t[1] - t[0]), (g[2] - g[1]) / (t[2] - t[1]));
    let curvature = (d2 - d1) / (t[2] - t[0]);
    if curvature == 0.0 || !curvature.is_finite() {
        return t[1];
    }
    // Derivative of the interpolant vanishes where d1 + curvature·(2x − t0 − t1) = 0.
    let x = 0.5 * (t[0] + t[1]) - d1 / (2.0 * curvature);
    x.clamp(t[0], t[2])
}

/// `n` log-spaced points on [min, max].
pub fn log_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && max.is_finite()) {
        return Err(invalid("grid", format!("need 0 < min < max, got [{min}, {max}]")));
    }
    if n < 2 {
        return Err(invalid("grid", "need at least 2 points"));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => min,
            _ if i == n - 1 => max,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

/// `n` uniform points on [min, max].
pub fn linear_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && max > min) {
        return Err(invalid("grid", format!("need min < max, got [{min}, {max}]")));
    }
    if n < 2 {
        return Err(invalid("grid", "need at least 2 points"));
    }
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                max
            } else {
                min + (max - min) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

pub const DEFAULT_TAU_MIN: f64 = 0.02;
pub const DEFAULT_TAU_MAX: f64 = 3.0;
pub const DEFAULT_TAU_POINTS: usize = 150;

pub fn default_tau_grid() -> Vec<f64> {
    log_grid(DEFAULT_TAU_MIN, DEFAULT_TAU_MAX, DEFAULT_TAU_POINTS).expect("constant grid is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::BlochAngles;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn ohmic(g: f64) -> SpectralDensity {
        SpectralDensity::new(g, 1.0, 10.0).unwrap()
    }

    fn sys(e: f64, d: f64) -> SystemParams {
        SystemParams::new(e, d).unwrap()
    }

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn model_validation() {
        let b = ohmic(0.01);
        let t = Temperature::Zero;
        assert!(ModelSpec::large_spin(sys(1.0, 1.0), StatePrep::x_polarized(), t, b).is_err());
        assert!(ModelSpec::spin_boson(sys(1.0, 1.0), StatePrep::large_spin_jz(3).unwrap(), t, b).is_err());
        assert!(ModelSpec::new(Family::PureDephasing, sys(1.0, 1.0), StatePrep::x_polarized(), t, b).is_err());
        assert!(ModelSpec::new(Family::PopulationDecay, sys(1.0, 0.0), StatePrep::x_polarized(), t, b).is_err());
        let hot = Temperature::finite(1.0).unwrap();
        assert!(ModelSpec::new(Family::PopulationDecay, sys(1.0, 0.0), StatePrep::excited(), hot, b).is_err());
        let m = ModelSpec::spin_boson(sys(2.0, 1.0), StatePrep::x_polarized(), hot, b).unwrap();
        let back: ModelSpec = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = serde_json::to_string(&m)
            .unwrap()
            .replace("general_spin_boson", "large_spin");
        assert!(serde_json::from_str::<ModelSpec>(&bad).is_err());
    }

    #[test]
    fn pure_dephasing_spot_values() {
        let b = ohmic(0.01);
        let m = ModelSpec::pure_dephasing(2.0, StatePrep::x_polarized(), Temperature::Zero, b).unwrap();
        let g = effective_decay_rate(1.0, &m, &cfg()).unwrap();
        assert!((g - 0.01 * 101f64.ln()).abs() < 1e-9);
        let gamma = dephasing_exponent(1.0, &b, Temperature::Zero, &cfg()).unwrap();
        assert!((gamma - 0.02 * 101f64.ln()).abs() < 1e-9);
        let exact = pure_dephasing_exact(1.0, &b, Temperature::Zero, &cfg()).unwrap();
        let expect = -(1.0 - 0.5 * (1.0 - (-0.02 * 101f64.ln()).exp())).ln();
        assert!((exact - expect).abs() < 1e-9);
        // Γ → τ ∫J dω as τ → 0.
        let tiny = pure_dephasing_exact(1e-6, &b, Temperature::Zero, &cfg()).unwrap();
        assert!((tiny / 1e-6 - b.total_weight()).abs() < 1e-3, "{tiny}");
    }

    #[test]
    fn excited_state_does_not_dephase() {
        let m = ModelSpec::pure_dephasing(2.0, StatePrep::excited(), Temperature::Zero, ohmic(0.01)).unwrap();
        let c = gamma_curve(&linear_grid(0.1, 3.0, 20).unwrap(), &m, &cfg()).unwrap();
        assert!(c.gammas.iter().all(|&g| g == 0.0));
        assert_eq!(c.regimes.status, CurveStatus::NoDecay);
        assert!(c.labels().iter().all(Option::is_none));
    }

    #[test]
    fn small_tau_slope() {
        let m = ModelSpec::spin_boson(sys(0.0, 0.1), StatePrep::x_polarized(), Temperature::Zero, ohmic(0.01)).unwrap();
        let g = effective_decay_rate(0.01, &m, &cfg()).unwrap();
        assert!((g - 0.01).abs() < 0.05 * 0.01, "{g}");
    }

    /// Fixed-grid triple sum over (ω, t′, u = t − t′) for θ = π/2, φ = 0 at
    /// zero temperature.
    fn brute_force_rate(tau: f64, s: &SystemParams, bath: &SpectralDensity) -> f64 {
        let ov = Overlap::Qubit(BlochAngles::new(FRAC_PI_2, 0.0).unwrap());
        let n = 1500usize;
        let h = tau / n as f64;
        // k_c(t′) = ∫₀^{τ−t′} K₁(t′+u, t′) du, k_s likewise for K₂.
        let mut kc = vec![0.0; n];
        let mut ks = vec![0.0; n];
        for (j, (kc, ks)) in kc.iter_mut().zip(ks.iter_mut()).enumerate() {
            let tp = (j as f64 + 0.5) * h;
            let span = tau - tp;
            let m = ((span / h).round() as usize).max(1);
            let du = span / m as f64;
            for i in 0..m {
                let t = tp + (i as f64 + 0.5) * du;
                let now = ov.at(t, s);
                let past = ov.at(t - tp, s);
                *kc += (past.r1 * now.r1 + past.r2 * now.r2) * du;
                *ks += (past.r1 * now.r2 - now.r1 * past.r2) * du;
            }
        }
        let dw = 0.004;
        let mut total = 0.0;
        for k in 0..(300.0 / dw) as usize {
            let w = (k as f64 + 0.5) * dw;
            let (mut d1, mut d2) = (0.0, 0.0);
            for j in 0..n {
                let (sn, cs) = (w * (j as f64 + 0.5) * h).sin_cos();
                d1 += cs * kc[j];
                d2 += sn * ks[j];
            }
            total += bath.eval(w) * 2.0 / tau * (d1 + d2) * h * dw;
        }
        total
    }

    #[test]
    fn spin_boson_matches_brute_force_triple_sum() {
        let (s, b) = (sys(2.0, 2.0), ohmic(0.01));
        let m = ModelSpec::spin_boson(s, StatePrep::x_polarized(), Temperature::Zero, b).unwrap();
        let g = effective_decay_rate(1.0, &m, &cfg()).unwrap();
        let reference = brute_force_rate(1.0, &s, &b);
        assert!(((g - reference) / reference).abs() < 1e-4, "{g} vs {reference}");
    }

    #[test]
    fn time_domain_agrees_with_frequency_domain() {
        let b = SpectralDensity::new(0.01, 0.8, 10.0).unwrap();
        for temp in [Temperature::Zero, Temperature::finite(2.0).unwrap()] {
            for prep in [StatePrep::x_polarized(), StatePrep::excited()] {
                let m = ModelSpec::spin_boson(sys(2.0, 1.0), prep, temp, b).unwrap();
                let f = effective_decay_rate(0.7, &m, &cfg()).unwrap();
                let t = effective_decay_rate_time_domain(0.7, &m, &cfg()).unwrap();
                assert!(((f - t) / f).abs() < 1e-6, "{prep:?} {temp:?}: {f} vs {t}");
            }
        }
        let m = ModelSpec::large_spin(
            sys(1.0, 2.0),
            StatePrep::large_spin_jx(3).unwrap(),
            Temperature::Zero,
            b,
        )
        .unwrap();
        let f = effective_decay_rate(1.3, &m, &cfg()).unwrap();
        let t = effective_decay_rate_time_domain(1.3, &m, &cfg()).unwrap();
        assert!(((f - t) / f).abs() < 1e-6, "{f} vs {t}");
        let m = ModelSpec::population_decay(sys(1.5, 0.0), b).unwrap();
        let f = effective_decay_rate(1.3, &m, &cfg()).unwrap();
        let t = effective_decay_rate_time_domain(1.3, &m, &cfg()).unwrap();
        assert!(((f - t) / f).abs() < 1e-6, "{f} vs {t}");
    }

    #[test]
    fn generic_angles_use_time_domain() {
        let b = ohmic(0.01);
        let m =
            ModelSpec::spin_boson(sys(1.0, 1.0), StatePrep::qubit(0.9, 0.4).unwrap(), Temperature::Zero, b).unwrap();
        let g = effective_decay_rate(0.8, &m, &cfg()).unwrap();
        // Γ/τ → sin²θ ∫J at small τ, and Γ stays below that bound's order.
        assert!(g > 0.0 && g < 0.8 * b.total_weight());
        let small = effective_decay_rate(0.005, &m, &cfg()).unwrap();
        let expect = 0.005 * 0.9f64.sin().powi(2) * b.total_weight();
        assert!(((small - expect) / expect).abs() < 0.05, "{small} vs {expect}");
    }

    #[test]
    fn excited_state_rate_is_cubic_at_small_tau() {
        let m = ModelSpec::spin_boson(sys(1.0, 1.0), StatePrep::excited(), Temperature::Zero, ohmic(0.01)).unwrap();
        let a = effective_decay_rate(0.01, &m, &cfg()).unwrap();
        let b = effective_decay_rate(0.02, &m, &cfg()).unwrap();
        assert!((b / a - 8.0).abs() < 0.5, "ratio {}", b / a);
    }

    #[test]
    fn large_spin_scales_exactly() {
        let b = SpectralDensity::new(0.01, 0.8, 10.0).unwrap();
        let one = ModelSpec::large_spin(
            sys(2.0, 2.0),
            StatePrep::large_spin_jz(1).unwrap(),
            Temperature::Zero,
            b,
        )
        .unwrap();
        let twenty = ModelSpec::large_spin(
            sys(2.0, 2.0),
            StatePrep::large_spin_jz(20).unwrap(),
            Temperature::Zero,
            b,
        )
        .unwrap();
        let g1 = effective_decay_rate(1.0, &one, &cfg()).unwrap();
        let g20 = effective_decay_rate(1.0, &twenty, &cfg()).unwrap();
        assert!((g20 - 20.0 * g1).abs() <= 1e-12 * g20);
    }

    #[test]
    fn survival_examples() {
        let p = MeasurementProtocol::new(0.7, 3).unwrap();
        assert_eq!(survival_probability(&p, 0.0), 1.0);
        assert!((survival_probability(&p, 0.5) - (-1.05f64).exp()).abs() < 1e-15);
        assert!(MeasurementProtocol::new(1.0, 0).is_err());
    }

    #[test]
    fn classify_examples() {
        let taus = linear_grid(0.01, 3.0, 100).unwrap();
        let lin: Vec<f64> = taus.clone();
        let r = classify_regimes(&taus, &lin).unwrap();
        assert!(r.extrema.is_empty());
        assert_eq!(r.segments.len(), 1);
        assert_eq!(r.segments[0].label, Regime::Zeno);

        let bowl: Vec<f64> = taus.iter().map(|t| (t - 1.0).powi(2) + 1.0).collect();
        let r = classify_regimes(&taus, &bowl).unwrap();
        assert_eq!(r.extrema.len(), 1);
        assert_eq!(r.extrema[0].kind, ExtremumKind::Min);
        assert!((r.extrema[0].tau - 1.0).abs() < 1e-12);
        let labels: Vec<_> = r.segments.iter().map(|s| s.label).collect();
        assert_eq!(labels, [Regime::AntiZeno, Regime::Zeno]);
        assert_eq!(r.segments[0].end, r.segments[1].start);

        let flat = vec![2.0; 10];
        let r = classify_regimes(&taus[..10], &flat).unwrap();
        assert_eq!(r.status, CurveStatus::DegenerateFlat);
        assert_eq!(r.segments[0].label, Regime::Zeno);

        assert!(matches!(
            classify_regimes(&taus[..4], &lin[..4]),
            Err(Error::TooFewPoints { min: 5, got: 4 })
        ));
    }

    #[test]
    fn flat_stretch_is_merged() {
        let taus = linear_grid(0.0 + 1.0, 10.0, 10).unwrap();
        let g = [1.0, 2.0, 3.0, 3.0, 3.0, 4.0, 5.0, 4.0, 3.0, 2.0];
        let r = classify_regimes(&taus, &g).unwrap();
        assert_eq!(r.extrema.len(), 1);
        assert_eq!(r.extrema[0].kind, ExtremumKind::Max);
    }

    #[test]
    fn injected_rate_and_poisoned_point() {
        let taus = linear_grid(0.1, 3.0, 30).unwrap();
        let c = curve_from_fn(&taus, Execution::default(), Ok).unwrap();
        assert_eq!(c.segments().len(), 1);
        assert!(c.extrema().is_empty());
        let err = curve_from_fn(&taus, Execution::default(), |t| {
            if t > 1.0 {
                Err(Error::Evaluation { at: t })
            } else {
                Ok(t)
            }
        })
        .unwrap_err();
        match err {
            Error::CurvePoint { tau, .. } => assert_eq!(tau, taus.iter().copied().find(|&t| t > 1.0).unwrap()),
            e => panic!("unexpected {e:?}"),
        }
        assert!(curve_from_fn(&[1.0, 0.5, 2.0, 3.0, 4.0], Execution::default(), Ok).is_err());
    }

    #[test]
    fn dephasing_curve_has_one_maximum() {
        let m = ModelSpec::pure_dephasing(2.0, StatePrep::x_polarized(), Temperature::Zero, ohmic(0.01)).unwrap();
        let c = gamma_curve(&default_tau_grid(), &m, &cfg()).unwrap();
        assert_eq!(c.extrema().len(), 1);
        assert_eq!(c.extrema()[0].kind, ExtremumKind::Max);
        let labels: Vec<_> = c.segments().iter().map(|s| s.label).collect();
        assert_eq!(labels, [Regime::Zeno, Regime::AntiZeno]);
        // d/dτ [ln(1 + ω_c²τ²)/τ] = 0 at x = ω_cτ solving 2x² = (1 + x²) ln(1 + x²).
        assert!((c.extrema()[0].tau - 0.19802).abs() < 2e-3, "{}", c.extrema()[0].tau);
    }

    #[test]
    fn curve_is_strategy_independent() {
        let m = ModelSpec::spin_boson(sys(2.0, 2.0), StatePrep::x_polarized(), Temperature::Zero, ohmic(0.01)).unwrap();
        let taus = linear_grid(0.2, 2.0, 8).unwrap();
        let a = gamma_curve_with(&taus, &m, &cfg(), Execution::Sequential).unwrap();
        let b = gamma_curve_with(&taus, &m, &cfg(), Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grids() {
        let g = default_tau_grid();
        assert_eq!(g.len(), 150);
        assert_eq!((g[0], g[149]), (0.02, 3.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(log_grid(0.0, 1.0, 5).is_err());
        assert_eq!(linear_grid(0.0, 8.0, 400).unwrap()[399], 8.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn labels_invariant_under_rescaling(
            coeffs in prop::collection::vec(-1.0f64..1.0, 4), scale in 1e-3f64..1e3,
        ) {
            let taus = linear_grid(0.1, 3.0, 60).unwrap();
            let g: Vec<f64> = taus.iter().map(|t| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)).collect();
            let scaled: Vec<f64> = g.iter().map(|x| x * scale).collect();
            let a = classify_regimes(&taus, &g).unwrap();
            let b = classify_regimes(&taus, &scaled).unwrap();
            prop_assert_eq!(a.segments.len(), b.segments.len());
            for (x, y) in a.segments.iter().zip(&b.segments) {
                prop_assert_eq!(x.label, y.label);
                prop_assert!((x.end - y.end).abs() < 1e-9);
            }
        }

        #[test]
        fn segments_alternate_and_tile(g in prop::collection::vec(0.0f64..1.0, 5..60)) {
            let taus = linear_grid(0.1, 3.0, g.len()).unwrap();
            let r = classify_regimes(&taus, &g).unwrap();
            prop_assert_eq!(r.segments.len(), r.extrema.len() + 1);
            prop_assert_eq!(r.segments[0].start, taus[0]);
            prop_assert_eq!(r.segments.last().unwrap().end, *taus.last().unwrap());
            for (w, e) in r.segments.windows(2).zip(&r.extrema) {
                prop_assert_ne!(w[0].label, w[1].label);
                prop_assert_eq!(w[0].end, e.tau);
                prop_assert_eq!(w[1].start, e.tau);
            }
        }

        #[test]
        fn survival_in_unit_interval(gamma in 0.0f64..1.0, tau in 0.01f64..5.0, n in 1u32..100) {
            let p = MeasurementProtocol::new(tau, n).unwrap();
            let s = survival_probability(&p, gamma);
            prop_assert!(s > 0.0 && s <= 1.0);
        }
    }
}
