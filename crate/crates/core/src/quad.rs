//! Adaptive Gauss–Kronrod quadrature for the spectral overlap integrals.
//!
//! Every integral in this crate is either a one-dimensional integral over
//! ω ∈ [0, ∞) against an exponentially cut-off spectral density, or an
//! ordered double integral over the triangle 0 ≤ t′ ≤ t ≤ τ. Both reduce to
//! the same globally adaptive bisection scheme on a 21-point Kronrod rule
//! with an embedded 10-point Gauss rule for the error estimate.
//!
//! Oscillatory integrands are handled by choosing the initial partition
//! fine enough to resolve the fastest oscillation before any adaptivity
//! kicks in. Evaluation and summation order are deterministic, so results
//! are bit-reproducible for a fixed configuration regardless of the
//! execution strategy.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;

/// Kronrod abscissae on [0, 1]; odd indices are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_164,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Initial-partition sizes below this are evaluated sequentially even under
/// [`Execution::Parallel`].
const PARALLEL_MIN_PANELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct QuadConfig {
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
    tail_cut: f64,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
    tail_cut: f64,
}

impl TryFrom<RawConfig> for QuadConfig {
    type Error = Error;
    fn try_from(r: RawConfig) -> Result<Self> {
        QuadConfig::new(r.rel_tol, r.abs_tol, r.max_panels, r.tail_cut)
    }
}

impl From<QuadConfig> for RawConfig {
    fn from(c: QuadConfig) -> Self {
        RawConfig {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            max_panels: c.max_panels,
            tail_cut: c.tail_cut,
        }
    }
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_panels: 10_000,
            tail_cut: 30.0,
        }
    }
}

impl QuadConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_panels: usize, tail_cut: f64) -> Result<Self> {
        if !(rel_tol.is_finite() && rel_tol > 0.0) {
            return Err(invalid("rel_tol", format!("must be > 0, got {rel_tol}")));
        }
        if !(abs_tol.is_finite() && abs_tol > 0.0) {
            return Err(invalid("abs_tol", format!("must be > 0, got {abs_tol}")));
        }
        if max_panels < 16 {
            return Err(invalid("max_panels", format!("must be >= 16, got {max_panels}")));
        }
        if !(tail_cut.is_finite() && tail_cut > 0.0) {
            return Err(invalid("tail_cut", format!("must be > 0, got {tail_cut}")));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_panels,
            tail_cut,
        })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_panels(&self) -> usize {
        self.max_panels
    }

    pub fn tail_cut(&self) -> f64 {
        self.tail_cut
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Result<Self> {
        Self::new(rel_tol, self.abs_tol, self.max_panels, self.tail_cut)
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Result<Self> {
        Self::new(self.rel_tol, abs_tol, self.max_panels, self.tail_cut)
    }

    pub fn with_max_panels(self, max_panels: usize) -> Result<Self> {
        Self::new(self.rel_tol, self.abs_tol, max_panels, self.tail_cut)
    }

    pub fn with_tail_cut(self, tail_cut: f64) -> Result<Self> {
        Self::new(self.rel_tol, self.abs_tol, self.max_panels, tail_cut)
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels_used: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // max-heap on error; ties broken towards the leftmost panel
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn check(x: f64, fx: f64) -> Result<f64> {
    if fx.is_finite() {
        Ok(fx)
    } else {
        Err(Error::Evaluation { at: x })
    }
}

/// One 21-point Gauss–Kronrod panel.
fn gk21<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = check(center, f(center)?)?;

    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = res_kronrod.abs();

    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let f1 = check(x1, f(x1)?)?;
        let f2 = check(x2, f(x2)?)?;
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let abs_half = half.abs();
    let err = (res_kronrod - res_gauss) * half;
    Ok(Panel {
        a,
        b,
        value: res_kronrod * half,
        error: rescale_error(err, res_abs * abs_half, res_asc * abs_half),
    })
}

fn initial_edges(a: f64, b: f64, max_width: f64) -> Vec<f64> {
    let len = b - a;
    let n = if max_width.is_finite() && max_width > 0.0 {
        (len / max_width).ceil().max(1.0) as usize
    } else {
        1
    };
    (0..=n)
        .map(|i| if i == n { b } else { a + len * (i as f64) / (n as f64) })
        .collect()
}

/// Globally adaptive integration of `f` over `[a, b]`, starting from a
/// uniform partition whose panels are no wider than `max_width`.
pub fn try_integrate_interval<F>(
    f: F,
    a: f64,
    b: f64,
    max_width: f64,
    cfg: &QuadConfig,
    exec: Execution,
) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            panels_used: 0,
        });
    }
    if b < a {
        let r = try_integrate_interval(f, b, a, max_width, cfg, exec)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    let edges = initial_edges(a, b, max_width);
    if edges.len() - 1 > cfg.max_panels {
        return Err(invalid(
            "max_panels",
            format!(
                "initial partition needs {} panels, budget is {}",
                edges.len() - 1,
                cfg.max_panels
            ),
        ));
    }
    let windows: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let exec = if windows.len() < PARALLEL_MIN_PANELS {
        Execution::Sequential
    } else {
        exec
    };
    let panels = exec.try_map(&windows, |&(lo, hi)| gk21(&f, lo, hi))?;

    let mut total_err: f64 = panels.iter().map(|p| p.error).sum();
    let mut total_val: f64 = panels.iter().map(|p| p.value).sum();
    let mut heap: BinaryHeap<Panel> = panels.into_iter().collect();
    let mut settled: Vec<Panel> = Vec::new();

    while total_err > cfg.tolerance(total_val) {
        let Some(worst) = heap.pop() else { break };
        if heap.len() + settled.len() + 2 > cfg.max_panels {
            heap.push(worst);
            let (value, error) = summarize(&heap, &settled);
            return Err(Error::Accuracy {
                estimate: value,
                error_estimate: error,
                panels: heap.len() + settled.len(),
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot bisect any further in floating point
            settled.push(worst);
            total_err -= worst.error;
            if settled.iter().map(|p| p.error).sum::<f64>() > cfg.tolerance(total_val) {
                heap.push(settled.pop().expect("just pushed"));
                let (value, error) = summarize(&heap, &settled);
                return Err(Error::Accuracy {
                    estimate: value,
                    error_estimate: error,
                    panels: heap.len() + settled.len(),
                });
            }
            continue;
        }
        let left = gk21(&f, worst.a, mid)?;
        let right = gk21(&f, mid, worst.b)?;
        total_val += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let panels_used = heap.len() + settled.len();
    let (value, error_estimate) = summarize(&heap, &settled);
    Ok(QuadResult {
        value,
        error_estimate,
        panels_used,
    })
}

/// Left-to-right sum over the final partition.
fn summarize(heap: &BinaryHeap<Panel>, settled: &[Panel]) -> (f64, f64) {
    let mut all: Vec<Panel> = heap.iter().chain(settled.iter()).copied().collect();
    all.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = all.iter().map(|p| p.value).sum();
    let error = all.iter().map(|p| p.error).sum();
    (value, error)
}

pub fn integrate_interval<F>(f: F, a: f64, b: f64, max_width: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    try_integrate_interval(|x| Ok(f(x)), a, b, max_width, cfg, Execution::default())
}

/// Integrates over ω ∈ [0, ∞), truncated at `tail_cut · wc`.
///
/// `osc_scale` is the largest angular frequency (in ω) present in the
/// integrand; the initial panels are at most π/(2·osc_scale) wide.
pub fn try_integrate_semi_infinite<F>(
    f: F,
    wc: f64,
    osc_scale: f64,
    cfg: &QuadConfig,
    exec: Execution,
) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    if !(wc.is_finite() && wc > 0.0) {
        return Err(invalid("wc", format!("cutoff scale must be > 0, got {wc}")));
    }
    let upper = cfg.tail_cut * wc;
    let width = if osc_scale > 0.0 {
        PI / (2.0 * osc_scale)
    } else {
        upper / 16.0
    };
    try_integrate_interval(f, 0.0, upper, width.min(upper / 16.0), cfg, exec)
}

pub fn integrate_semi_infinite<F>(f: F, wc: f64, osc_scale: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    try_integrate_semi_infinite(|x| Ok(f(x)), wc, osc_scale, cfg, Execution::default())
}

/// ∫₀^τ dt ∫₀^t dt′ g(t, t′) by nested adaptive quadrature.
///
/// The tolerance budget is split evenly between the outer integral and the
/// accumulated inner error. Both levels start from panels no wider than
/// π/(10·osc_scale).
pub fn try_integrate_triangle<G>(g: G, tau: f64, osc_scale: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    G: Fn(f64, f64) -> Result<f64> + Sync + Send,
{
    if tau == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            panels_used: 0,
        });
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid("tau", format!("must be >= 0, got {tau}")));
    }
    let width = if osc_scale > 0.0 {
        PI / (10.0 * osc_scale)
    } else {
        f64::INFINITY
    };
    let outer_cfg = QuadConfig {
        rel_tol: 0.5 * cfg.rel_tol,
        abs_tol: 0.5 * cfg.abs_tol,
        ..*cfg
    };
    let inner_cfg = QuadConfig {
        rel_tol: 0.5 * cfg.rel_tol,
        abs_tol: 0.5 * cfg.abs_tol / tau,
        ..*cfg
    };
    let inner_panels = std::sync::atomic::AtomicUsize::new(0);
    let outer = try_integrate_interval(
        |t| {
            let r = try_integrate_interval(|tp| g(t, tp), 0.0, t, width, &inner_cfg, Execution::Sequential)?;
            inner_panels.fetch_add(r.panels_used, std::sync::atomic::Ordering::Relaxed);
            Ok(r.value)
        },
        0.0,
        tau,
        width,
        &outer_cfg,
        Execution::default(),
    )?;
    Ok(QuadResult {
        value: outer.value,
        error_estimate: outer.error_estimate + 0.5 * cfg.abs_tol,
        panels_used: outer.panels_used + inner_panels.into_inner(),
    })
}

pub fn integrate_triangle<G>(g: G, tau: f64, osc_scale: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    G: Fn(f64, f64) -> f64 + Sync + Send,
{
    try_integrate_triangle(|t, tp| Ok(g(t, tp)), tau, osc_scale, cfg)
}
