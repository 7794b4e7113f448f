//! Effective decay rates of a repeatedly measured quantum system coupled to
//! a harmonic bath.
//!
//! Γ(τ) = ∫ J(ω) Q(ω, τ) dω, where J is the bath spectral density and Q the
//! filter of the chosen model ([`filters`]). [`decay`] evaluates Γ over τ
//! grids and labels Zeno and anti-Zeno stretches; [`bathsim`] checks the
//! perturbative rates against exact dynamics with a discretized bath.

pub mod bathsim;
pub mod decay;
pub mod error;
pub mod exec;
pub mod filters;
pub mod params;
pub mod quad;

pub use decay::{effective_decay_rate, gamma_curve, survival_probability, DecayCurve, Family, ModelSpec};
pub use error::{Error, Result};
pub use exec::Execution;
pub use params::{BlochAngles, MeasurementProtocol, SpectralDensity, StatePrep, SystemParams, Temperature};
pub use quad::QuadConfig;
