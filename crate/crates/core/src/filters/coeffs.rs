use serde::{Deserialize, Serialize};

use crate::params::{BlochAngles, SystemParams};

/// Coefficients of F̃(t) = e^{iH_S t} σ_z e^{−iH_S t} = a_x σ_x + a_y σ_y + a_z σ_z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecessionCoeffs {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl PrecessionCoeffs {
    pub const Z: PrecessionCoeffs = PrecessionCoeffs {
        ax: 0.0,
        ay: 0.0,
        az: 1.0,
    };

    pub fn norm_sqr(&self) -> f64 {
        self.ax * self.ax + self.ay * self.ay + self.az * self.az
    }
}

fn precession(t: f64, epsilon: f64, delta: f64, omega: f64) -> PrecessionCoeffs {
    if omega == 0.0 {
        return PrecessionCoeffs::Z;
    }
    let half = (0.5 * omega * t).sin();
    let s2 = half * half;
    let w2 = omega * omega;
    PrecessionCoeffs {
        ax: 2.0 * epsilon * delta / w2 * s2,
        ay: delta / omega * (omega * t).sin(),
        az: 1.0 - 2.0 * delta * delta / w2 * s2,
    }
}

pub fn precession_coeffs(t: f64, sys: &SystemParams) -> PrecessionCoeffs {
    precession(t, sys.epsilon(), sys.delta(), sys.omega())
}

/// Coefficients (b_x, b_y, b_z) of the coupling operator in the frame where
/// the J_x-maximal state becomes |j⟩: the same precession formulas with
/// ε_r = Δ and Δ_r = −ε. Stored in the `ax`, `ay`, `az` slots.
pub fn rotated_coeffs(t: f64, sys: &SystemParams) -> PrecessionCoeffs {
    let eps_r = sys.delta();
    let delta_r = -sys.epsilon();
    if sys.omega() == 0.0 {
        return PrecessionCoeffs {
            ax: 1.0,
            ay: 0.0,
            az: 0.0,
        };
    }
    let half = (0.5 * sys.omega() * t).sin();
    let s2 = half * half;
    let w = sys.omega();
    PrecessionCoeffs {
        ax: 1.0 - 2.0 * eps_r * eps_r / (w * w) * s2,
        ay: -eps_r / w * (w * t).sin(),
        az: 2.0 * eps_r * delta_r / (w * w) * s2,
    }
}

/// ⟨ψ|F̃(t)|ψ⊥⟩ = r₁(t) + i r₂(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapAmplitudes {
    pub r1: f64,
    pub r2: f64,
}

pub fn overlap_amplitudes(t: f64, angles: &BlochAngles, sys: &SystemParams) -> OverlapAmplitudes {
    let a = precession_coeffs(t, sys);
    let (st, ct) = angles.theta().sin_cos();
    let (sp, cp) = angles.phi().sin_cos();
    OverlapAmplitudes {
        r1: -a.ax * cp * ct - a.ay * sp * ct + a.az * st,
        r2: a.ay * cp - a.ax * sp,
    }
}

/// Source of the transition amplitude entering the D-integrands, per
/// two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Overlap {
    Qubit(BlochAngles),
    /// Collective |j⟩ along z: ⟨j|F̃|j−1⟩ ∝ a_x − i a_y.
    CollectiveZ,
    /// Collective J_x-maximal state, rotated frame: ⟨j|F̃|j−1⟩ ∝ −(b_x − i b_y).
    CollectiveX,
}

impl Overlap {
    pub fn at(&self, t: f64, sys: &SystemParams) -> OverlapAmplitudes {
        match self {
            Overlap::Qubit(angles) => overlap_amplitudes(t, angles, sys),
            Overlap::CollectiveZ => {
                let a = precession_coeffs(t, sys);
                OverlapAmplitudes { r1: a.ax, r2: -a.ay }
            }
            Overlap::CollectiveX => {
                let b = rotated_coeffs(t, sys);
                OverlapAmplitudes { r1: -b.ax, r2: b.ay }
            }
        }
    }
}
