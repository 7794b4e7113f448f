//! Short-step Taylor propagation of ψ under e^{−iHt}.
//!
//! The interval is cut into equal steps with ‖H − c‖·dt ≤ 2, where c is
//! the centre of the Gershgorin enclosure. Each step sums the Taylor series
//! until the next term is below the step tolerance. The step sequence only
//! depends on H and t, so runs are reproducible bit for bit.

use num_complex::Complex64;
use serde::Serialize;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

const STEP_THETA: f64 = 2.0;
const MAX_TERMS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    /// Bound on the truncated Taylor remainder per step.
    pub step_tol: f64,
    /// Allowed |1 − ‖ψ‖²| after the full interval.
    pub norm_tol: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            step_tol: 1e-13,
            norm_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationStats {
    pub steps: usize,
    pub matvecs: usize,
    pub norm_drift: f64,
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Evolves `psi` in place by e^{−iHt}.
pub fn evolve(h: &CsrMatrix, psi: &mut [Complex64], t: f64, cfg: &PropagationConfig) -> Result<PropagationStats> {
    let start_norm = norm_sqr(psi);
    if t == 0.0 {
        return Ok(PropagationStats {
            steps: 0,
            matvecs: 0,
            norm_drift: 0.0,
        });
    }
    let (lo, hi) = h.spectral_bounds();
    let centre = 0.5 * (lo + hi);
    let radius = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE);
    let steps = ((t.abs() * radius / STEP_THETA).ceil() as usize).max(1);
    let dt = t / steps as f64;

    let n = psi.len();
    let mut term = vec![Complex64::default(); n];
    let mut next = vec![Complex64::default(); n];
    let mut matvecs = 0;
    for _ in 0..steps {
        term.copy_from_slice(psi);
        let mut k = 1;
        loop {
            h.apply_shifted(&term, centre, &mut next);
            matvecs += 1;
            let scale = Complex64::new(0.0, -dt / k as f64);
            let mut size = 0.0;
            for ((p, x), y) in psi.iter_mut().zip(term.iter_mut()).zip(&next) {
                *x = scale * y;
                *p += *x;
                size += x.norm_sqr();
            }
            let size = size.sqrt();
            if !size.is_finite() {
                return Err(Error::Evaluation { at: dt });
            }
            // Later terms shrink at least geometrically once k > θ.
            let ratio = STEP_THETA / (k + 1) as f64;
            if ratio < 1.0 && size * ratio / (1.0 - ratio) <= cfg.step_tol {
                break;
            }
            k += 1;
            if k > MAX_TERMS {
                return Err(Error::Accuracy {
                    estimate: size,
                    error_estimate: size,
                    panels: steps,
                });
            }
        }
    }
    // Global phase from the spectral shift.
    let phase = Complex64::from_polar(1.0, -centre * t);
    psi.iter_mut().for_each(|p| *p *= phase);

    let drift = (norm_sqr(psi) - start_norm).abs();
    if drift > cfg.norm_tol {
        return Err(Error::Accuracy {
            estimate: norm_sqr(psi),
            error_estimate: drift,
            panels: steps,
        });
    }
    Ok(PropagationStats {
        steps,
        matvecs,
        norm_drift: drift,
    })
}
