//! Closed-form D-pairs for the two preparations with printed expressions,
//! the x-polarized state (θ = π/2, φ = 0) and the excited state (θ = 0,
//! φ = 0).
//!
//! Both have removable singularities at ω = 0 and |ω| = Ω (the denominators
//! carry ω²(ω² − Ω²)²). Within a guard band of half-width
//! 10⁻³·max(Ω, 1) around those points the literal expressions are refused
//! and callers are expected to fall back to the numeric double integral.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::DPair;
use crate::error::{Error, Result};
use crate::params::{BlochAngles, SystemParams};

/// Relative half-width of the removable-singularity guard band.
pub const SINGULAR_BAND: f64 = 1e-3;

const ANGLE_MATCH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedBranch {
    /// θ = π/2, φ = 0.
    Equator,
    /// θ = 0, φ = 0.
    Pole,
}

impl ClosedBranch {
    /// The closed-form branch matching `angles`, if any.
    pub fn of(angles: &BlochAngles) -> Option<Self> {
        if angles.phi().abs() > ANGLE_MATCH {
            return None;
        }
        if (angles.theta() - FRAC_PI_2).abs() <= ANGLE_MATCH {
            Some(ClosedBranch::Equator)
        } else if angles.theta().abs() <= ANGLE_MATCH {
            Some(ClosedBranch::Pole)
        } else {
            None
        }
    }

    pub fn angles(self) -> BlochAngles {
        match self {
            ClosedBranch::Equator => BlochAngles::new(FRAC_PI_2, 0.0),
            ClosedBranch::Pole => BlochAngles::new(0.0, 0.0),
        }
        .expect("branch angles are in range")
    }
}

/// Half-width of the guard band for a system with Rabi frequency Ω.
pub fn singular_band(omega_big: f64) -> f64 {
    SINGULAR_BAND * omega_big.max(1.0)
}

/// Evaluates the printed D₁ = X₁/X₂, D₂ = X₃/X₄ literally.
pub fn d_pair_closed(omega: f64, tau: f64, sys: &SystemParams, branch: ClosedBranch) -> Result<DPair> {
    if tau == 0.0 {
        return Ok(DPair { d1: 0.0, d2: 0.0 });
    }
    let big = sys.omega();
    let band = singular_band(big);
    let w_abs = omega.abs();
    if w_abs < band {
        return Err(Error::SingularBand {
            omega,
            center: 0.0,
            band,
        });
    }
    if (w_abs - big).abs() < band {
        return Err(Error::SingularBand {
            omega,
            center: big,
            band,
        });
    }
    if big == 0.0 {
        // Δ = ε = 0: F̃ is constant and only the x-polarized state dephases.
        let h = (0.5 * omega * tau).sin();
        let d1 = match branch {
            ClosedBranch::Equator => 2.0 * h * h / (omega * omega),
            ClosedBranch::Pole => 0.0,
        };
        return Ok(DPair { d1, d2: 0.0 });
    }
    Ok(match branch {
        ClosedBranch::Equator => equator(omega, tau, sys.epsilon(), sys.delta(), big),
        ClosedBranch::Pole => pole(omega, tau, sys.epsilon(), sys.delta(), big),
    })
}

fn equator(w: f64, tau: f64, e: f64, d: f64, big: f64) -> DPair {
    let (e2, d2, w2, b2) = (e * e, d * d, w * w, big * big);
    let (d4, w4, b4) = (d2 * d2, w2 * w2, b2 * b2);
    let (swt, cwt) = (w * tau).sin_cos();
    let (sbt, cbt) = (big * tau).sin_cos();
    let c2bt = (2.0 * big * tau).cos();
    let gap2 = (w2 - b2) * (w2 - b2);

    let x1 = 3.0 * d4 * w4
        + 4.0 * b2 * cwt * (e2 * (e2 - w2) * (w2 - b2) - d2 * w2 * (d2 + w2) * cbt)
        + d2 * w * (4.0 * b2 * big * (e2 - 2.0 * w2) * swt * sbt - w * e2 * (w2 - b2) * (c2bt - 4.0 * cbt))
        - 8.0 * b4 * b2 * (d2 + w2)
        - 3.0 * d2 * w2 * b2 * (d2 + w2)
        + b4 * (4.0 * d4 + 15.0 * d2 * w2 + 4.0 * w4)
        + 4.0 * b4 * b4;
    let x2 = 4.0 * b4 * w2 * gap2;
    let x3 = d
        * (w * big * (e2 - d2 - w2) * swt * sbt
            + cwt * (e2 * (b2 - w2) - (b2 * (d2 + w2) + d2 * w2 - b4) * cbt)
            + b2 * (d2 + w2)
            + d2 * w2
            + e2 * (w2 - b2) * cbt
            - b4);
    let x4 = w * b2 * gap2;
    DPair {
        d1: x1 / x2,
        d2: x3 / x4,
    }
}

fn pole(w: f64, tau: f64, e: f64, d: f64, big: f64) -> DPair {
    let (e2, d2, w2, b2) = (e * e, d * d, w * w, big * big);
    let (w4, b4) = (w2 * w2, b2 * b2);
    let (swt, cwt) = (w * tau).sin_cos();
    let (sbt, cbt) = (big * tau).sin_cos();
    let c2bt = (2.0 * big * tau).cos();
    let gap2 = (w2 - b2) * (w2 - b2);

    let x1 = d2
        * (w2 * b2 * (w2 + 3.0 * b2) - 4.0 * w * b2 * big * (w2 + e2) * swt * sbt
            + 4.0 * b2 * cwt * (e2 * (w2 - b2) - w2 * (b2 + e2) * cbt)
            + w2 * (b2 - w2) * (d2 * c2bt + 4.0 * e2 * cbt)
            + e2 * (3.0 * w4 - 3.0 * w2 * b2 + 4.0 * b4));
    let x2 = 4.0 * b4 * w2 * gap2;
    let (swh, cwh) = (0.5 * w * tau).sin_cos();
    let (sbh, cbh) = (0.5 * big * tau).sin_cos();
    let bracket = w * cwh * sbh - big * swh * cbh;
    let x3 = 4.0 * d2 * e * bracket * bracket;
    let x4 = w * b2 * gap2;
    DPair {
        d1: x1 / x2,
        d2: x3 / x4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(e: f64, d: f64) -> SystemParams {
        SystemParams::new(e, d).unwrap()
    }

    // Reference values from an independent scipy dblquad evaluation of the
    // defining double integrals (epsabs 1e-13).
    const REFERENCE: [(f64, f64, f64, f64, [f64; 4]); 6] = [
        (
            2.0,
            2.0,
            1.0,
            2.0,
            [
                0.34155879415344337,
                -0.3039427728029215,
                0.6323489008287243,
                0.4823237263148504,
            ],
        ),
        (
            2.0,
            2.0,
            20.0,
            0.5,
            [
                0.003778514106620793,
                0.0015546306057422875,
                0.0009700216322386893,
                4.299509015178685e-05,
            ],
        ),
        (
            1.0,
            2.0,
            3.0,
            2.0,
            [
                0.5976861364993249,
                0.5560403351391161,
                0.3915034611573852,
                0.30583314173402415,
            ],
        ),
        (
            1.0,
            2.0,
            0.1,
            0.5,
            [
                0.11422084650599434,
                0.0009371810975765244,
                0.026079153282048288,
                4.0756590871451506e-05,
            ],
        ),
        (
            2.0,
            1.0,
            0.1,
            2.0,
            [
                1.1717395637577723,
                -0.03273451286809579,
                0.5042197764744489,
                0.030001391284313395,
            ],
        ),
        (
            2.0,
            1.0,
            3.0,
            0.5,
            [
                0.10105329828371871,
                0.011300805567860749,
                0.006269955884000588,
                0.0005462457954514143,
            ],
        ),
    ];

    #[test]
    fn matches_frozen_quadrature_reference() {
        for (e, d, w, tau, r) in REFERENCE {
            let eq = d_pair_closed(w, tau, &sys(e, d), ClosedBranch::Equator).unwrap();
            let po = d_pair_closed(w, tau, &sys(e, d), ClosedBranch::Pole).unwrap();
            for (got, want) in [(eq.d1, r[0]), (eq.d2, r[1]), (po.d1, r[2]), (po.d2, r[3])] {
                assert!(
                    (got - want).abs() <= 1e-9 * want.abs(),
                    "({e},{d},{w},{tau}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn pure_dephasing_reduction() {
        for w in [0.3, 1.7, 5.0] {
            let p = d_pair_closed(w, 1.3, &sys(1.0, 0.0), ClosedBranch::Equator).unwrap();
            let expect = (1.0 - (w * 1.3).cos()) / (w * w);
            assert!((p.d1 - expect).abs() < 1e-12);
            assert_eq!(p.d2, 0.0);
        }
    }

    #[test]
    fn zero_tau() {
        let p = d_pair_closed(1.0, 0.0, &sys(2.0, 1.0), ClosedBranch::Pole).unwrap();
        assert_eq!(p, DPair { d1: 0.0, d2: 0.0 });
    }

    #[test]
    fn guard_band_rejects() {
        let s = sys(2.0, 1.0);
        let big = s.omega();
        for w in [0.0, 5e-4, big, big + 5e-4, -big] {
            assert!(matches!(
                d_pair_closed(w, 1.0, &s, ClosedBranch::Equator),
                Err(Error::SingularBand { .. })
            ));
        }
        assert!(d_pair_closed(big + 0.01, 1.0, &s, ClosedBranch::Equator).is_ok());
    }

    #[test]
    // A truncated π/2 must not be treated as the equator.
    #[allow(clippy::approx_constant)]
    fn branch_matching() {
        assert_eq!(
            ClosedBranch::of(&BlochAngles::new(FRAC_PI_2, 0.0).unwrap()),
            Some(ClosedBranch::Equator)
        );
        assert_eq!(
            ClosedBranch::of(&BlochAngles::new(0.0, 0.0).unwrap()),
            Some(ClosedBranch::Pole)
        );
        assert_eq!(ClosedBranch::of(&BlochAngles::new(1.570796, 0.0).unwrap()), None);
        assert_eq!(ClosedBranch::of(&BlochAngles::new(FRAC_PI_2, 0.1).unwrap()), None);
    }
}
