//! Exact-dynamics oracle.
//!
//! The bath is replaced by M discrete modes with |g_k|² = J(ω_k)Δω. Starting
//! from |ψ⟩ ⊗ |vac⟩ the joint state evolves for one interval τ under the full
//! Hamiltonian; the survival s(τ) is the weight of e^{−iH_Sτ}|ψ⟩ in the
//! result, summed over bath configurations. Three solvers are available:
//!
//! - [`Solver::Full`]: truncated Fock space, occupations ≤ n_max per mode.
//! - [`Solver::ProductForm`]: pure dephasing, exact for any M (the two
//!   branches displace each mode into opposite coherent states).
//! - [`Solver::Sector`]: rotating-wave decay restricted to the
//!   single-excitation sector, dimension 1 + M.

mod propagate;
mod sparse;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use propagate::{evolve, PropagationConfig, PropagationStats};
pub use sparse::CsrMatrix;

use crate::decay::{dephasing_exponent, effective_decay_rate, Family, ModelSpec};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::params::{SpectralDensity, StatePrep};
use crate::quad::QuadConfig;
use sparse::CsrBuilder;

/// Default ω_max / ω_c.
pub const DEFAULT_OMEGA_MAX_FACTOR: f64 = 10.0;
pub const DEFAULT_N_MAX: u32 = 2;
/// Default cap on the truncated Hilbert-space dimension.
pub const DEFAULT_BUDGET: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// ω_k = (k − ½)Δω.
    Midpoint,
    /// ω_k = kΔω (right endpoints).
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub omega: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathDiscretization {
    modes: Vec<Mode>,
    scheme: Scheme,
    omega_max: f64,
    bath: SpectralDensity,
}

impl BathDiscretization {
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn bath(&self) -> &SpectralDensity {
        &self.bath
    }

    /// Σ_k |g_k|².
    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.g * m.g).sum()
    }

    /// Same grid type and range with twice the modes.
    pub fn refined(&self) -> Result<Self> {
        discretize_with(&self.bath, 2 * self.modes.len(), self.omega_max, self.scheme)
    }

    /// A single mode at ω₀ with coupling g.
    pub fn single_mode(bath: &SpectralDensity, omega: f64, g: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0 && g.is_finite()) {
            return Err(invalid(
                "mode",
                format!("need omega > 0 and finite g, got ({omega}, {g})"),
            ));
        }
        Ok(BathDiscretization {
            modes: vec![Mode { omega, g }],
            scheme: Scheme::Midpoint,
            omega_max: 2.0 * omega,
            bath: *bath,
        })
    }

    /// The same modes with every coupling scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.modes.iter_mut().for_each(|m| m.g *= factor);
        out
    }
}

/// Midpoint grid over (0, ω_max].
pub fn discretize(bath: &SpectralDensity, mode_count: usize, omega_max: f64) -> Result<BathDiscretization> {
    discretize_with(bath, mode_count, omega_max, Scheme::Midpoint)
}

pub fn discretize_with(
    bath: &SpectralDensity,
    mode_count: usize,
    omega_max: f64,
    scheme: Scheme,
) -> Result<BathDiscretization> {
    if mode_count == 0 {
        return Err(invalid("mode_count", "must be >= 1"));
    }
    if !(omega_max.is_finite() && omega_max > 0.0) {
        return Err(invalid("omega_max", format!("must be > 0, got {omega_max}")));
    }
    let dw = omega_max / mode_count as f64;
    let modes = (0..mode_count)
        .map(|k| {
            let omega = match scheme {
                Scheme::Midpoint => (k as f64 + 0.5) * dw,
                Scheme::Uniform => (k + 1) as f64 * dw,
            };
            Mode {
                omega,
                g: (bath.eval(omega) * dw).sqrt(),
            }
        })
        .collect();
    Ok(BathDiscretization {
        modes,
        scheme,
        omega_max,
        bath: *bath,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Product form for pure dephasing, the sector for population decay,
    /// truncated Fock space otherwise.
    Auto,
    Full,
    ProductForm,
    Sector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_max: u32,
    pub budget: usize,
    pub solver: Solver,
    pub propagation: PropagationConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_max: DEFAULT_N_MAX,
            budget: DEFAULT_BUDGET,
            solver: Solver::Auto,
            propagation: PropagationConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn with_n_max(self, n_max: u32) -> Self {
        SimConfig { n_max, ..self }
    }

    pub fn with_solver(self, solver: Solver) -> Self {
        SimConfig { solver, ..self }
    }

    pub fn with_budget(self, budget: usize) -> Self {
        SimConfig { budget, ..self }
    }
}

/// Amplitudes over (system level, mode occupations), system level slowest.
/// Level 0 is |↑⟩ (σ_z = +1).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    amplitudes: Vec<Complex64>,
    modes: usize,
    n_max: u32,
}

impl TruncatedState {
    /// Hilbert dimension 2·(n_max+1)^M, or a capacity error above `budget`.
    pub fn dimension(modes: usize, n_max: u32, budget: usize) -> Result<usize> {
        let base = n_max as usize + 1;
        let dim = (0..modes).fold(2usize, |d, _| d.saturating_mul(base));
        if dim > budget {
            return Err(Error::Capacity { dim, budget });
        }
        Ok(dim)
    }

    /// |system⟩ ⊗ |vac⟩.
    pub fn vacuum(system: [Complex64; 2], modes: usize, n_max: u32, budget: usize) -> Result<Self> {
        let dim = Self::dimension(modes, n_max, budget)?;
        let norm = system[0].norm_sqr() + system[1].norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid("system", format!("state must be normalized, norm² = {norm}")));
        }
        let mut amplitudes = vec![Complex64::default(); dim];
        amplitudes[0] = system[0];
        amplitudes[dim / 2] = system[1];
        Ok(TruncatedState {
            amplitudes,
            modes,
            n_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Σ_n |⟨χ|⊗⟨n| Ψ⟩|² for a system state χ.
    pub fn weight_on(&self, chi: [Complex64; 2]) -> f64 {
        let half = self.dim() / 2;
        let (up, down) = self.amplitudes.split_at(half);
        up.iter()
            .zip(down)
            .map(|(a, b)| (chi[0].conj() * a + chi[1].conj() * b).norm_sqr())
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
enum Coupling {
    /// σ_z Σ g_k (b_k + b_k†).
    SigmaZ,
    /// Σ g_k (σ₊ b_k + σ₋ b_k†).
    Rotating,
}

/// 2×2 system Hamiltonian (hz/2) σ_z + (hx/2) σ_x.
#[derive(Debug, Clone, Copy)]
struct SystemHamiltonian {
    hz: f64,
    hx: f64,
}

impl SystemHamiltonian {
    /// e^{−iH_S t} χ.
    fn rotate(&self, chi: [Complex64; 2], t: f64) -> [Complex64; 2] {
        let w = self.hz.hypot(self.hx);
        if w == 0.0 {
            return chi;
        }
        let (s, c) = (0.5 * w * t).sin_cos();
        let (nz, nx) = (self.hz / w, self.hx / w);
        let i_s = Complex64::new(0.0, -s);
        [
            c * chi[0] + i_s * (nz * chi[0] + nx * chi[1]),
            c * chi[1] + i_s * (nx * chi[0] - nz * chi[1]),
        ]
    }
}

fn hamiltonian(
    sys: SystemHamiltonian,
    coupling: Coupling,
    disc: &BathDiscretization,
    n_max: u32,
    dim: usize,
) -> CsrMatrix {
    let m = disc.modes.len();
    let base = n_max as usize + 1;
    let half = dim / 2;
    let mut strides = Vec::with_capacity(m);
    let mut s = 1;
    for _ in 0..m {
        strides.push(s);
        s *= base;
    }
    // Mode 0 varies fastest.
    let occ = |idx: usize, k: usize| (idx / strides[k]) % base;
    let mut b = CsrBuilder::with_capacity(dim, dim * (2 * m + 2));
    for row in 0..dim {
        let (level, bath) = (row / half, row % half);
        let z = if level == 0 { 1.0 } else { -1.0 };
        let partner = if level == 0 { row + half } else { row - half };
        let mut energy = 0.5 * z * sys.hz;
        for (k, mode) in disc.modes.iter().enumerate() {
            energy += mode.omega * occ(bath, k) as f64;
        }
        match coupling {
            Coupling::SigmaZ => {
                for (k, mode) in disc.modes.iter().enumerate() {
                    let n = occ(bath, k);
                    if n > 0 {
                        b.push(row - strides[k], z * mode.g * (n as f64).sqrt());
                    }
                }
                b.push(row, energy);
                b.push(partner, 0.5 * sys.hx);
                for (k, mode) in disc.modes.iter().enumerate() {
                    let n = occ(bath, k);
                    if n < n_max as usize {
                        b.push(row + strides[k], z * mode.g * ((n + 1) as f64).sqrt());
                    }
                }
            }
            Coupling::Rotating => {
                // ⟨↑, n−1_k| σ₊ b_k |↓, n_k⟩ = √n_k and its transpose.
                if level == 0 {
                    b.push(row, energy);
                    for (k, mode) in disc.modes.iter().enumerate() {
                        if occ(bath, k) < n_max as usize {
                            let n = occ(bath, k) + 1;
                            b.push(partner + strides[k], mode.g * (n as f64).sqrt());
                        }
                    }
                } else {
                    for (k, mode) in disc.modes.iter().enumerate() {
                        let n = occ(bath, k);
                        if n > 0 {
                            b.push(partner - strides[k], mode.g * (n as f64).sqrt());
                        }
                    }
                    b.push(row, energy);
                }
            }
        }
        b.end_row();
    }
    b.finish()
}

fn qubit_state(prep: &StatePrep) -> Result<[Complex64; 2]> {
    match prep {
        StatePrep::Qubit(a) => {
            let (s, c) = (0.5 * a.theta()).sin_cos();
            Ok([Complex64::new(c, 0.0), Complex64::from_polar(s, a.phi())])
        }
        _ => Err(Error::Model("the exact oracle simulates single qubits only".into())),
    }
}

fn check_zero_temperature(model: &ModelSpec) -> Result<()> {
    if model.temperature().is_zero() {
        Ok(())
    } else {
        Err(Error::Model(
            "the exact oracle starts from the bath vacuum (zero temperature only)".into(),
        ))
    }
}

impl Solver {
    /// The concrete solver used for `family`; `Auto` picks the cheapest exact
    /// one.
    pub fn resolve(self, family: Family) -> Result<Solver> {
        match (self, family) {
            (_, Family::LargeSpin) => Err(Error::Model(
                "the exact oracle does not simulate the large-spin family".into(),
            )),
            (Solver::Auto, Family::PureDephasing) => Ok(Solver::ProductForm),
            (Solver::Auto, Family::PopulationDecay) => Ok(Solver::Sector),
            (Solver::Auto, _) => Ok(Solver::Full),
            (Solver::ProductForm, f) if f != Family::PureDephasing => Err(Error::Model(
                "the product-form solver applies to pure dephasing only".into(),
            )),
            (Solver::Sector, f) if f != Family::PopulationDecay => Err(Error::Model(
                "the single-excitation sector applies to population decay only".into(),
            )),
            (s, _) => Ok(s),
        }
    }
}

/// Truncated-Fock-space survival with the propagation statistics.
pub fn full_survival(
    model: &ModelSpec,
    disc: &BathDiscretization,
    tau: f64,
    cfg: &SimConfig,
) -> Result<(f64, PropagationStats)> {
    check_zero_temperature(model)?;
    let (sys, coupling) = match model.family() {
        Family::PopulationDecay => (
            SystemHamiltonian {
                hz: model.decay_frequency(),
                hx: 0.0,
            },
            Coupling::Rotating,
        ),
        Family::PureDephasing | Family::GeneralSpinBoson => (
            SystemHamiltonian {
                hz: model.sys().epsilon(),
                hx: model.sys().delta(),
            },
            Coupling::SigmaZ,
        ),
        Family::LargeSpin => {
            return Err(Error::Model(
                "the exact oracle does not simulate the large-spin family".into(),
            ))
        }
    };
    let psi = qubit_state(model.prep())?;
    let mut state = TruncatedState::vacuum(psi, disc.modes.len(), cfg.n_max, cfg.budget)?;
    let h = hamiltonian(sys, coupling, disc, cfg.n_max, state.dim());
    let stats = evolve(&h, &mut state.amplitudes, tau, &cfg.propagation)?;
    let target = sys.rotate(psi, tau);
    Ok((state.weight_on(target).clamp(0.0, 1.0), stats))
}

/// Exact pure-dephasing survival on the discrete modes,
/// s = 1 − ½ sin²θ (1 − e^{−γ}), γ = Σ 4g_k²(1 − cos ω_kτ)/ω_k².
pub fn product_form_survival(model: &ModelSpec, disc: &BathDiscretization, tau: f64) -> Result<f64> {
    check_zero_temperature(model)?;
    if model.family() != Family::PureDephasing {
        return Err(Error::Model(
            "the product-form solver applies to pure dephasing only".into(),
        ));
    }
    let [up, down] = qubit_state(model.prep())?;
    let gamma: f64 = disc
        .modes
        .iter()
        .map(|m| {
            let h = (0.5 * m.omega * tau).sin();
            8.0 * m.g * m.g * h * h / (m.omega * m.omega)
        })
        .sum();
    let (pu, pd) = (up.norm_sqr(), down.norm_sqr());
    Ok(pu * pu + pd * pd + 2.0 * pu * pd * (-gamma).exp())
}

/// Rotating-wave decay of |↑, vac⟩ inside the single-excitation sector.
pub fn sector_survival(model: &ModelSpec, disc: &BathDiscretization, tau: f64, cfg: &PropagationConfig) -> Result<f64> {
    check_zero_temperature(model)?;
    if model.family() != Family::PopulationDecay {
        return Err(Error::Model(
            "the single-excitation sector applies to population decay only".into(),
        ));
    }
    let w0 = model.decay_frequency();
    let m = disc.modes.len();
    let mut b = CsrBuilder::with_capacity(m + 1, 3 * m + 1);
    b.push(0, 0.5 * w0);
    for (k, mode) in disc.modes.iter().enumerate() {
        b.push(k + 1, mode.g);
    }
    b.end_row();
    for (k, mode) in disc.modes.iter().enumerate() {
        b.push(0, mode.g);
        b.push(k + 1, -0.5 * w0 + mode.omega);
        b.end_row();
    }
    let h = b.finish();
    let mut psi = vec![Complex64::default(); m + 1];
    psi[0] = Complex64::new(1.0, 0.0);
    evolve(&h, &mut psi, tau, cfg)?;
    Ok(psi[0].norm_sqr().clamp(0.0, 1.0))
}

/// One-interval survival s(τ) from the exact bath dynamics.
pub fn single_interval_survival(
    model: &ModelSpec,
    disc: &BathDiscretization,
    tau: f64,
    cfg: &SimConfig,
) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid("tau", format!("must be > 0, got {tau}")));
    }
    match cfg.solver.resolve(model.family())? {
        Solver::ProductForm => product_form_survival(model, disc, tau),
        Solver::Sector => sector_survival(model, disc, tau, &cfg.propagation),
        _ => full_survival(model, disc, tau, cfg).map(|(s, _)| s),
    }
}

/// Σ_k |g_k|² Q(ω_k, τ): the perturbative rate on the discrete modes.
pub fn discrete_perturbative_rate(model: &ModelSpec, disc: &BathDiscretization, tau: f64) -> Result<f64> {
    disc.modes
        .iter()
        .map(|m| Ok(m.g * m.g * model.filter(m.omega, tau)?))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub sim: SimConfig,
    pub quad: QuadConfig,
    /// Rows whose gap exceeds this are flagged.
    pub max_gap: f64,
    /// Repeat the simulation with 2M modes when it fits the budget.
    pub refine: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            sim: SimConfig::default(),
            quad: QuadConfig::default(),
            max_gap: 0.05,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub tau: f64,
    /// −ln s(τ)/τ from the exact dynamics.
    pub gamma_sim: f64,
    /// Perturbative rate on the same discrete modes.
    pub gamma_pert: f64,
    /// Perturbative rate for the continuous J.
    pub gamma_continuum: f64,
    /// |Γ_sim − Γ_pert|/Γ_sim.
    pub gap: f64,
    /// |Γ_sim − Γ_continuum|/Γ_sim.
    pub continuum_gap: f64,
    /// Exact continuum rate when known (pure dephasing).
    pub gamma_exact: Option<f64>,
    /// Γ_sim with twice the modes.
    pub gamma_refined: Option<f64>,
    pub flagged: bool,
    pub under_resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub solver: Solver,
    pub modes: usize,
    pub n_max: u32,
    pub max_gap_threshold: f64,
    pub rows: Vec<OracleRow>,
}

impl OracleReport {
    pub fn max_gap(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.gap))
    }

    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }

    pub fn any_under_resolved(&self) -> bool {
        self.rows.iter().any(|r| r.under_resolved)
    }
}

fn relative_gap(reference: f64, other: f64) -> f64 {
    if reference == other {
        0.0
    } else {
        ((reference - other) / reference).abs()
    }
}

fn simulated_rate(model: &ModelSpec, disc: &BathDiscretization, tau: f64, cfg: &SimConfig) -> Result<f64> {
    let s = single_interval_survival(model, disc, tau, cfg)?;
    Ok(-s.ln() / tau)
}

/// Per-τ comparison of the exact single-interval rate with the perturbative
/// rate. τ points run independently and may fan out across workers.
pub fn compare_to_perturbative(
    model: &ModelSpec,
    disc: &BathDiscretization,
    taus: &[f64],
    cfg: &OracleConfig,
) -> Result<OracleReport> {
    let solver = cfg.sim.solver.resolve(model.family())?;
    if solver == Solver::Full {
        TruncatedState::dimension(disc.modes.len(), cfg.sim.n_max, cfg.sim.budget)?;
    }
    let sim = cfg.sim.with_solver(solver);
    let refined = if cfg.refine {
        let r = disc.refined()?;
        let fits = solver != Solver::Full || TruncatedState::dimension(r.modes.len(), sim.n_max, sim.budget).is_ok();
        fits.then_some(r)
    } else {
        None
    };
    let exact_theta = match (model.family(), model.prep()) {
        (Family::PureDephasing, StatePrep::Qubit(a)) => Some(a.theta()),
        _ => None,
    };
    let rows = Execution::default().try_map(taus, |&tau| -> Result<OracleRow> {
        let gamma_sim = simulated_rate(model, disc, tau, &sim)?;
        let gamma_pert = discrete_perturbative_rate(model, disc, tau)?;
        let gamma_continuum = effective_decay_rate(tau, &model.with_bath(*disc.bath()), &cfg.quad)?;
        let gamma_exact = match exact_theta {
            Some(theta) => {
                let g = dephasing_exponent(tau, disc.bath(), model.temperature(), &cfg.quad)?;
                let w = 0.5 * theta.sin().powi(2);
                Some(-(w * (-g).exp_m1()).ln_1p() / tau)
            }
            None => None,
        };
        let gamma_refined = match &refined {
            Some(r) => Some(simulated_rate(model, r, tau, &sim)?),
            None => None,
        };
        let gap = relative_gap(gamma_sim, gamma_pert);
        let continuum_gap = relative_gap(gamma_sim, gamma_continuum);
        let under_resolved = gamma_refined.is_some_and(|r| relative_gap(gamma_sim, r) > continuum_gap);
        Ok(OracleRow {
            tau,
            gamma_sim,
            gamma_pert,
            gamma_continuum,
            gap,
            continuum_gap,
            gamma_exact,
            gamma_refined,
            flagged: gap > cfg.max_gap,
            under_resolved,
        })
    })?;
    Ok(OracleReport {
        solver,
        modes: disc.modes.len(),
        n_max: sim.n_max,
        max_gap_threshold: cfg.max_gap,
        rows,
    })
}
