use std::f64::consts::PI;

use super::coeffs::Overlap;
use super::DPair;
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::params::{BlochAngles, SystemParams};
use crate::quad::{try_integrate_interval, try_integrate_triangle, QuadConfig};

/// Default absolute tolerance of the numeric D-pair path.
pub const DEFAULT_D_TOL: f64 = 1e-10;

fn d_config(tol: f64) -> Result<QuadConfig> {
    QuadConfig::default().with_abs_tol(tol)?.with_rel_tol(1e-14)
}

/// D₁ and D₂ from their defining double integrals, for any preparation.
pub fn d_pair_numeric_for(omega: f64, tau: f64, sys: &SystemParams, overlap: Overlap, tol: f64) -> Result<DPair> {
    if tau == 0.0 {
        return Ok(DPair { d1: 0.0, d2: 0.0 });
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid("tau", format!("must be > 0, got {tau}")));
    }
    let cfg = d_config(tol)?;
    let osc = omega.abs().max(sys.omega());
    let d1 = try_integrate_triangle(
        |t, tp| {
            let now = overlap.at(t, sys);
            let past = overlap.at(t - tp, sys);
            Ok((omega * tp).cos() * (past.r1 * now.r1 + past.r2 * now.r2))
        },
        tau,
        osc,
        &cfg,
    )?;
    let d2 = try_integrate_triangle(
        |t, tp| {
            let now = overlap.at(t, sys);
            let past = overlap.at(t - tp, sys);
            Ok((omega * tp).sin() * (past.r1 * now.r2 - now.r1 * past.r2))
        },
        tau,
        osc,
        &cfg,
    )?;
    Ok(DPair {
        d1: d1.value,
        d2: d2.value,
    })
}

/// Numeric D-pair for a single-qubit preparation at the default tolerance.
pub fn d_pair_numeric(omega: f64, tau: f64, sys: &SystemParams, angles: &BlochAngles) -> Result<DPair> {
    d_pair_numeric_for(omega, tau, sys, Overlap::Qubit(*angles), DEFAULT_D_TOL)
}

/// Zero-temperature filter as a squared transition amplitude,
/// (1/τ)|∫₀^τ e^{−iωt}[r₁(t) + i r₂(t)] dt|².
///
/// Uses a single one-dimensional quadrature per component, independent of
/// the D-pair machinery.
pub fn zero_temperature_amplitude_form(
    omega: f64,
    tau: f64,
    sys: &SystemParams,
    overlap: Overlap,
    tol: f64,
) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid("tau", format!("must be > 0, got {tau}")));
    }
    let cfg = d_config(tol)?;
    let osc = omega.abs().max(sys.omega());
    let width = if osc > 0.0 { PI / (10.0 * osc) } else { tau };
    let re = try_integrate_interval(
        |t| {
            let r = overlap.at(t, sys);
            let (s, c) = (omega * t).sin_cos();
            Ok(r.r1 * c + r.r2 * s)
        },
        0.0,
        tau,
        width,
        &cfg,
        Execution::Sequential,
    )?;
    let im = try_integrate_interval(
        |t| {
            let r = overlap.at(t, sys);
            let (s, c) = (omega * t).sin_cos();
            Ok(r.r2 * c - r.r1 * s)
        },
        0.0,
        tau,
        width,
        &cfg,
        Execution::Sequential,
    )?;
    Ok((re.value * re.value + im.value * im.value) / tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn sys(e: f64, d: f64) -> SystemParams {
        SystemParams::new(e, d).unwrap()
    }

    /// Brute-force composite midpoint sum over the triangle with step h.
    /// Midpoints along t′ ∈ [0, t] avoid the diagonal, so the error is O(h²).
    fn brute_force(omega: f64, tau: f64, s: &SystemParams, ov: Overlap, h: f64) -> DPair {
        let n = (tau / h).round() as usize;
        let h = tau / n as f64;
        let (mut d1, mut d2) = (0.0, 0.0);
        for i in 0..n {
            let t = (i as f64 + 0.5) * h;
            let now = ov.at(t, s);
            let m = ((t / h).round() as usize).max(1);
            let k = t / m as f64;
            let (mut a, mut b) = (0.0, 0.0);
            for j in 0..m {
                let tp = (j as f64 + 0.5) * k;
                let past = ov.at(t - tp, s);
                a += (omega * tp).cos() * (past.r1 * now.r1 + past.r2 * now.r2);
                b += (omega * tp).sin() * (past.r1 * now.r2 - now.r1 * past.r2);
            }
            d1 += a * k;
            d2 += b * k;
        }
        DPair { d1: d1 * h, d2: d2 * h }
    }

    #[test]
    fn generic_angles_match_brute_force() {
        let s = sys(1.0, 1.0);
        let ang = BlochAngles::new(FRAC_PI_4, FRAC_PI_3).unwrap();
        let p = d_pair_numeric(2.0, 1.0, &s, &ang).unwrap();
        let reference = brute_force(2.0, 1.0, &s, Overlap::Qubit(ang), 1e-4);
        assert!((p.d1 - reference.d1).abs() < 1e-6, "{} vs {}", p.d1, reference.d1);
        assert!((p.d2 - reference.d2).abs() < 1e-6, "{} vs {}", p.d2, reference.d2);
    }

    #[test]
    fn pure_dephasing_limit() {
        let ang = BlochAngles::new(FRAC_PI_2, 0.0).unwrap();
        for (w, tau) in [(0.7, 1.0), (3.0, 2.0), (1e-5, 1.5)] {
            let p = d_pair_numeric(w, tau, &sys(1.7, 0.0), &ang).unwrap();
            let h = (0.5 * w * tau).sin();
            assert!((p.d1 - 2.0 * h * h / (w * w)).abs() < 1e-11);
            assert!(p.d2.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_tau_is_empty() {
        let ang = BlochAngles::new(0.3, 0.2).unwrap();
        assert_eq!(
            d_pair_numeric(1.0, 0.0, &sys(1.0, 1.0), &ang).unwrap(),
            DPair { d1: 0.0, d2: 0.0 }
        );
    }

    #[test]
    fn amplitude_form_examples() {
        let eq = Overlap::Qubit(BlochAngles::new(FRAC_PI_2, 0.0).unwrap());
        // h(t) = 1
        let (w, tau) = (1.3, 2.0);
        let v = zero_temperature_amplitude_form(w, tau, &sys(0.8, 0.0), eq, 1e-13).unwrap();
        let expect = 2.0 / tau * (1.0 - (w * tau).cos()) / (w * w);
        assert!((v - expect).abs() < 1e-12);
        // h(t) = e^{iΔt}
        let delta = 1.0;
        for w in [0.0, 0.5, 1.0, 2.5] {
            let v = zero_temperature_amplitude_form(w, tau, &sys(0.0, delta), eq, 1e-13).unwrap();
            let x = 0.5 * (delta - w) * tau;
            let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
            assert!((v - tau * sinc * sinc).abs() < 1e-12, "w={w}");
        }
    }

    #[test]
    fn amplitude_form_matches_d_pair() {
        let s = sys(2.0, 2.0);
        let ang = BlochAngles::new(FRAC_PI_2, 0.0).unwrap();
        let p = d_pair_numeric_for(1.0, 1.0, &s, Overlap::Qubit(ang), 1e-13).unwrap();
        let a = zero_temperature_amplitude_form(1.0, 1.0, &s, Overlap::Qubit(ang), 1e-13).unwrap();
        assert!((2.0 * (p.d1 + p.d2) - a).abs() < 1e-8);
    }

    #[test]
    fn rotated_frame_equals_x_polarized_qubit() {
        let s = sys(1.4, 0.9);
        let ang = BlochAngles::new(FRAC_PI_2, 0.0).unwrap();
        let a = d_pair_numeric_for(1.1, 1.5, &s, Overlap::Qubit(ang), 1e-12).unwrap();
        let b = d_pair_numeric_for(1.1, 1.5, &s, Overlap::CollectiveX, 1e-12).unwrap();
        assert!((a.d1 - b.d1).abs() < 1e-12 && (a.d2 - b.d2).abs() < 1e-12);
    }

    #[test]
    fn parity_in_omega() {
        let s = sys(1.0, 2.0);
        let ang = BlochAngles::new(1.0, 2.0).unwrap();
        let p = d_pair_numeric(1.7, 1.2, &s, &ang).unwrap();
        let m = d_pair_numeric(-1.7, 1.2, &s, &ang).unwrap();
        assert!((p.d1 - m.d1).abs() < 1e-12);
        assert!((p.d2 + m.d2).abs() < 1e-12);
    }
}
