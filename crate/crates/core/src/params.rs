//! Domain types shared by every other module, validated at construction.
//!
//! All quantities are dimensionless with ħ = 1. Once built, values are
//! immutable `Copy` data and may be shared freely across threads.

use std::f64::consts::{FRAC_PI_2, PI};
use std::num::NonZeroU32;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};

/// Below this value of βω/2 the hyperbolic cotangent switches to its
/// Laurent series.
pub const COTH_SERIES_THRESHOLD: f64 = 1e-4;

fn finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(name, format!("must be finite, got {x}")))
    }
}

fn positive(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {x}")))
    }
}

/// Two-level system H_S = (ε/2)σ_z + (Δ/2)σ_x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem", into = "RawSystem")]
pub struct SystemParams {
    epsilon: f64,
    delta: f64,
    omega: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSystem {
    epsilon: f64,
    delta: f64,
}

impl TryFrom<RawSystem> for SystemParams {
    type Error = Error;
    fn try_from(raw: RawSystem) -> Result<Self> {
        SystemParams::new(raw.epsilon, raw.delta)
    }
}

impl From<SystemParams> for RawSystem {
    fn from(sys: SystemParams) -> Self {
        RawSystem {
            epsilon: sys.epsilon,
            delta: sys.delta,
        }
    }
}

impl SystemParams {
    /// Both parameters may be zero (trivial system) or negative.
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        let epsilon = finite("epsilon", epsilon)?;
        let delta = finite("delta", delta)?;
        Ok(Self {
            epsilon,
            delta,
            omega: epsilon.hypot(delta),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Ω = √(ε² + Δ²).
    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// Returns Ω = √(ε² + Δ²), the precession frequency of the coupling
/// operator in the interaction picture.
pub fn rabi_frequency(sys: &SystemParams) -> f64 {
    sys.omega()
}

/// Bloch angles of a single-qubit preparation
/// |ψ⟩ = cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩, θ ∈ [0, π], φ ∈ [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAngles", into = "RawAngles")]
pub struct BlochAngles {
    theta: f64,
    phi: f64,
}

#[derive(Serialize, Deserialize)]
struct RawAngles {
    theta: f64,
    phi: f64,
}

impl TryFrom<RawAngles> for BlochAngles {
    type Error = Error;
    fn try_from(raw: RawAngles) -> Result<Self> {
        BlochAngles::new(raw.theta, raw.phi)
    }
}

impl From<BlochAngles> for RawAngles {
    fn from(a: BlochAngles) -> Self {
        RawAngles {
            theta: a.theta,
            phi: a.phi,
        }
    }
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(invalid("theta", format!("must lie in [0, π], got {theta}")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(invalid("phi", format!("must lie in [0, 2π), got {phi}")));
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// The state that is repeatedly prepared and measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatePrep {
    Qubit(BlochAngles),
    /// N_s spins collectively in |j, m = j⟩ along z, j = N_s/2.
    LargeSpinJz(NonZeroU32),
    /// N_s spins collectively in the J_x-maximal state.
    LargeSpinJx(NonZeroU32),
}

impl StatePrep {
    pub fn qubit(theta: f64, phi: f64) -> Result<Self> {
        BlochAngles::new(theta, phi).map(StatePrep::Qubit)
    }

    /// The excited state |↑⟩ (θ = 0).
    pub fn excited() -> Self {
        StatePrep::Qubit(BlochAngles { theta: 0.0, phi: 0.0 })
    }

    /// The x-polarized state |↑_x⟩ (θ = π/2, φ = 0).
    pub fn x_polarized() -> Self {
        StatePrep::Qubit(BlochAngles {
            theta: FRAC_PI_2,
            phi: 0.0,
        })
    }

    pub fn large_spin_jz(n_spins: u32) -> Result<Self> {
        NonZeroU32::new(n_spins)
            .map(StatePrep::LargeSpinJz)
            .ok_or_else(|| invalid("n_spins", "must be >= 1"))
    }

    pub fn large_spin_jx(n_spins: u32) -> Result<Self> {
        NonZeroU32::new(n_spins)
            .map(StatePrep::LargeSpinJx)
            .ok_or_else(|| invalid("n_spins", "must be >= 1"))
    }

    pub fn n_spins(&self) -> Option<u32> {
        match self {
            StatePrep::Qubit(_) => None,
            StatePrep::LargeSpinJz(n) | StatePrep::LargeSpinJx(n) => Some(n.get()),
        }
    }
}

/// J(ω) = G ω^s ω_c^{1−s} e^{−ω/ω_c}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBath", into = "RawBath")]
pub struct SpectralDensity {
    coupling: f64,
    ohmicity: f64,
    cutoff: f64,
}

#[derive(Serialize, Deserialize)]
struct RawBath {
    coupling_g: f64,
    ohmicity_s: f64,
    cutoff_wc: f64,
}

impl TryFrom<RawBath> for SpectralDensity {
    type Error = Error;
    fn try_from(raw: RawBath) -> Result<Self> {
        SpectralDensity::new(raw.coupling_g, raw.ohmicity_s, raw.cutoff_wc)
    }
}

impl From<SpectralDensity> for RawBath {
    fn from(j: SpectralDensity) -> Self {
        RawBath {
            coupling_g: j.coupling,
            ohmicity_s: j.ohmicity,
            cutoff_wc: j.cutoff,
        }
    }
}

impl SpectralDensity {
    pub fn new(coupling: f64, ohmicity: f64, cutoff: f64) -> Result<Self> {
        Ok(Self {
            coupling: positive("coupling_g", coupling)?,
            ohmicity: positive("ohmicity_s", ohmicity)?,
            cutoff: positive("cutoff_wc", cutoff)?,
        })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn ohmicity(&self) -> f64 {
        self.ohmicity
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Same bath with a different coupling strength.
    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(coupling, self.ohmicity, self.cutoff)
    }

    /// Evaluates J(ω) for ω ≥ 0 without the domain check.
    pub(crate) fn eval(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            return 0.0;
        }
        let x = omega / self.cutoff;
        self.coupling * self.cutoff * x.powf(self.ohmicity) * (-x).exp()
    }

    /// ∫₀^∞ J(ω) dω = G ω_c² Γ(s+1).
    pub fn total_weight(&self) -> f64 {
        self.coupling * self.cutoff * self.cutoff * gamma(self.ohmicity + 1.0)
    }
}

/// Evaluates J(ω); ω must be non-negative.
pub fn spectral_density(omega: f64, bath: &SpectralDensity) -> Result<f64> {
    if omega.is_nan() || omega < 0.0 {
        return Err(Error::Domain {
            func: "spectral_density",
            reason: format!("omega must be >= 0, got {omega}"),
        });
    }
    Ok(bath.eval(omega))
}

/// Inverse temperature β > 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Beta(f64);

impl Beta {
    pub fn new(beta: f64) -> Result<Self> {
        positive("beta", beta).map(Beta)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Beta {
    type Error = Error;
    fn try_from(beta: f64) -> Result<Self> {
        Beta::new(beta)
    }
}

impl From<Beta> for f64 {
    fn from(b: Beta) -> f64 {
        b.0
    }
}

/// Bath temperature. The zero-temperature variant makes the thermal factor
/// identically one.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temperature {
    #[default]
    Zero,
    Finite(Beta),
}

impl Temperature {
    pub fn finite(beta: f64) -> Result<Self> {
        Beta::new(beta).map(Temperature::Finite)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Temperature::Zero)
    }

    /// coth(βω/2) assuming ω > 0 has already been checked.
    pub(crate) fn factor(&self, omega: f64) -> f64 {
        match *self {
            Temperature::Zero => 1.0,
            Temperature::Finite(beta) => coth(0.5 * beta.get() * omega),
        }
    }
}

fn coth(x: f64) -> f64 {
    if x < COTH_SERIES_THRESHOLD {
        // 1/x + x/3, i.e. 2/(βω) + βω/6
        1.0 / x + x / 3.0
    } else {
        1.0 + 2.0 / (2.0 * x).exp_m1()
    }
}

/// coth(βω/2), or exactly 1 at zero temperature. ω must be positive; the
/// ω → 0 limit belongs to the quadrature layer.
pub fn thermal_factor(omega: f64, temperature: Temperature) -> Result<f64> {
    if omega.is_nan() || omega <= 0.0 {
        return Err(Error::Domain {
            func: "thermal_factor",
            reason: format!("omega must be > 0, got {omega}"),
        });
    }
    Ok(temperature.factor(omega))
}

/// N measurements spaced by τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementProtocol {
    tau: f64,
    n_measurements: NonZeroU32,
}

impl MeasurementProtocol {
    pub fn new(tau: f64, n_measurements: u32) -> Result<Self> {
        Ok(Self {
            tau: positive("tau", tau)?,
            n_measurements: NonZeroU32::new(n_measurements).ok_or_else(|| invalid("n_measurements", "must be >= 1"))?,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_measurements(&self) -> u32 {
        self.n_measurements.get()
    }

    /// Total elapsed time Nτ.
    pub fn duration(&self) -> f64 {
        self.tau * f64::from(self.n_measurements.get())
    }
}
