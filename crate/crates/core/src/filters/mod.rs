//! Filter functions Q(ω, τ).
//!
//! The effective decay rate is the overlap Γ(τ) = ∫ J(ω) Q(ω, τ) dω. For the
//! spin-boson family the filter is assembled from two ordered double
//! integrals,
//!
//! ```text
//! Q(ω, τ) = (2/τ) { coth(βω/2) D₁(ω, τ) + D₂(ω, τ) }
//! ```
//!
//! evaluated either from the closed forms available for θ = π/2 and θ = 0
//! (see [`closed`]) or numerically for any preparation (see [`numeric`]).
//! The population-decay and pure-dephasing filters are elementary.

pub mod closed;
pub mod coeffs;
pub mod numeric;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{BlochAngles, StatePrep, SystemParams, Temperature};

pub use closed::{d_pair_closed, singular_band, ClosedBranch, SINGULAR_BAND};
pub use coeffs::{overlap_amplitudes, precession_coeffs, rotated_coeffs, Overlap, OverlapAmplitudes, PrecessionCoeffs};
pub use numeric::{d_pair_numeric, d_pair_numeric_for, zero_temperature_amplitude_form, DEFAULT_D_TOL};

/// Values of the two double integrals D₁(ω, τ), D₂(ω, τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DPair {
    pub d1: f64,
    pub d2: f64,
}

fn check_tau(func: &'static str, tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            reason: format!("tau must be > 0, got {tau}"),
        })
    }
}

fn check_omega(func: &'static str, omega: f64, temperature: Temperature) -> Result<()> {
    if omega.is_nan() || omega < 0.0 {
        return Err(Error::Domain {
            func,
            reason: format!("omega must be >= 0, got {omega}"),
        });
    }
    if omega == 0.0 && !temperature.is_zero() {
        return Err(Error::Domain {
            func,
            reason: "the thermal factor diverges at omega = 0 for finite temperature".into(),
        });
    }
    Ok(())
}

/// Unnormalized sinc, sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// (1 − cos ωτ)/ω² without cancellation; τ²/2 at ω = 0.
fn one_minus_cos_over_sq(omega: f64, tau: f64) -> f64 {
    if omega == 0.0 {
        return 0.5 * tau * tau;
    }
    let h = (0.5 * omega * tau).sin();
    2.0 * h * h / (omega * omega)
}

/// τ sinc²[(ε − ω)τ/2], the rotating-wave population-decay filter.
pub fn filter_population_decay(omega: f64, tau: f64, epsilon: f64) -> Result<f64> {
    check_tau("filter_population_decay", tau)?;
    let s = sinc(0.5 * (epsilon - omega) * tau);
    Ok(tau * s * s)
}

/// (2/τ) coth(βω/2) (1 − cos ωτ)/ω², the pure-dephasing filter for the
/// x-polarized state. Returns the analytic limit τ at ω = 0 (zero
/// temperature only).
pub fn filter_pure_dephasing(omega: f64, tau: f64, temperature: Temperature) -> Result<f64> {
    check_tau("filter_pure_dephasing", tau)?;
    check_omega("filter_pure_dephasing", omega, temperature)?;
    let coth = if omega == 0.0 { 1.0 } else { temperature.factor(omega) };
    Ok(2.0 / tau * coth * one_minus_cos_over_sq(omega, tau))
}

/// D-pair for a closed-form branch, falling back to the numeric path inside
/// the singular band.
fn d_pair_routed(
    omega: f64,
    tau: f64,
    sys: &SystemParams,
    branch: ClosedBranch,
    fallback: Overlap,
    tol: f64,
) -> Result<DPair> {
    match d_pair_closed(omega, tau, sys, branch) {
        Err(Error::SingularBand { .. }) => d_pair_numeric_for(omega, tau, sys, fallback, tol),
        other => other,
    }
}

fn assemble(omega: f64, tau: f64, d: DPair, temperature: Temperature) -> f64 {
    let coth = if omega == 0.0 { 1.0 } else { temperature.factor(omega) };
    2.0 / tau * (coth * d.d1 + d.d2)
}

/// D-pair for a single-qubit preparation, routed through the closed forms
/// when available.
pub fn d_pair_qubit(omega: f64, tau: f64, sys: &SystemParams, angles: &BlochAngles, tol: f64) -> Result<DPair> {
    let overlap = Overlap::Qubit(*angles);
    match ClosedBranch::of(angles) {
        Some(branch) => d_pair_routed(omega, tau, sys, branch, overlap, tol),
        None => d_pair_numeric_for(omega, tau, sys, overlap, tol),
    }
}

/// General spin-boson filter for an arbitrary single-qubit preparation.
pub fn filter_general(
    omega: f64,
    tau: f64,
    sys: &SystemParams,
    angles: &BlochAngles,
    temperature: Temperature,
) -> Result<f64> {
    filter_general_tol(omega, tau, sys, angles, temperature, DEFAULT_D_TOL)
}

/// [`filter_general`] with an explicit absolute tolerance for the numeric
/// D-pair path.
pub fn filter_general_tol(
    omega: f64,
    tau: f64,
    sys: &SystemParams,
    angles: &BlochAngles,
    temperature: Temperature,
    tol: f64,
) -> Result<f64> {
    check_tau("filter_general", tau)?;
    check_omega("filter_general", omega, temperature)?;
    let d = d_pair_qubit(omega, tau, sys, angles, tol)?;
    Ok(assemble(omega, tau, d, temperature))
}

/// Collective filter for N_s = 2j spins coupled through 2J_z:
/// 2j times the single-spin filter of the corresponding preparation.
pub fn filter_large_spin(
    omega: f64,
    tau: f64,
    sys: &SystemParams,
    prep: &StatePrep,
    temperature: Temperature,
) -> Result<f64> {
    check_tau("filter_large_spin", tau)?;
    check_omega("filter_large_spin", omega, temperature)?;
    let (n, branch, overlap) = match *prep {
        StatePrep::LargeSpinJz(n) => (n, ClosedBranch::Pole, Overlap::CollectiveZ),
        StatePrep::LargeSpinJx(n) => (n, ClosedBranch::Equator, Overlap::CollectiveX),
        StatePrep::Qubit(_) => {
            return Err(Error::Model("filter_large_spin needs a large-spin preparation".into()));
        }
    };
    let d = d_pair_routed(omega, tau, sys, branch, overlap, DEFAULT_D_TOL)?;
    Ok(f64::from(n.get()) * assemble(omega, tau, d, temperature))
}
