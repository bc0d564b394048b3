//! Vibrational mode density.
//!
//! Inside the band
//!
//! ```text
//! rho(omega) = 2 N omega / (pi sqrt((Omega_D^2 - omega^2)(omega^2 - Omega_0^2)))
//! ```
//!
//! and zero outside it. Both edges carry inverse square-root (van Hove)
//! singularities, except the lower one of the homogeneous chain where
//! `Omega_0 = 0` and the density stays finite.
//!
//! Integrals are taken in the angle `phi = arccos a(omega)`, where
//! `4 omega d omega / (Omega_D^2 - Omega_0^2) = sin phi d phi` cancels both
//! edge singularities.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::chain::{band_edges, dispersion, BandEdges, ChainSpec};
use crate::error::{non_negative, ChainError, Result};
use crate::greens::{classify, greens_closed_form, greens_damped, FrequencyQuery, Regime};

/// Default distance of sampled curves from the band edges, as a fraction of the band width.
pub const EDGE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ModeDensityCurve {
    pub omegas: Vec<f64>,
    pub rho: Vec<f64>,
    pub n: usize,
    pub band: BandEdges,
}

/// Mode density at `omega`; zero outside the closed band, an error exactly on an edge.
pub fn mode_density(spec: &ChainSpec, omega: f64) -> Result<f64> {
    let tag = classify(spec, omega)?;
    if tag.regime != Regime::InBand {
        return Ok(0.0);
    }
    let (lo2, hi2) = (tag.edges.lower.powi(2), tag.edges.upper.powi(2));
    let w2 = omega * omega;
    Ok(2.0 * spec.n() as f64 * omega / (PI * ((hi2 - w2) * (w2 - lo2)).sqrt()))
}

/// Classical density of the homogeneous chain, `2N / (pi sqrt(omega_D^2 - omega^2))`
/// on `0 <= omega < omega_D`.
pub fn homogeneous_density(n: usize, omega_d: f64, omega: f64) -> f64 {
    if !(0.0..omega_d).contains(&omega) {
        return 0.0;
    }
    2.0 * n as f64 / (PI * (omega_d * omega_d - omega * omega).sqrt())
}

/// `rho = (2 omega / pi) Im Tr G(omega + i eps)` with the trace `N G_pp`.
///
/// `epsilon = 0` uses the exact `eps -> 0+` closed form; a positive `epsilon`
/// gives the broadened density of a damped chain.
pub fn mode_density_from_greens(spec: &ChainSpec, omega: f64, epsilon: f64) -> Result<f64> {
    non_negative("epsilon", epsilon)?;
    let diag = if epsilon == 0.0 {
        greens_closed_form(spec, &FrequencyQuery::new(omega)?, 0, 0)?.value
    } else {
        greens_damped(spec, omega, epsilon, 0, 0)?
    };
    Ok(2.0 * omega / PI * spec.n() as f64 * diag.im)
}

/// `phi = arccos a(omega)` clamped to `[0, pi]`, via
/// `tan(phi/2) = sqrt((omega^2 - Omega_0^2) / (Omega_D^2 - omega^2))`, which
/// stays accurate next to both edges where `arccos` loses half the digits.
pub fn band_angle(edges: &BandEdges, omega: f64) -> f64 {
    let below = ((omega - edges.lower) * (omega + edges.lower)).max(0.0);
    let above = ((edges.upper - omega) * (edges.upper + omega)).max(0.0);
    2.0 * below.sqrt().atan2(above.sqrt())
}

/// Number of modes below `omega`, `N phi(omega) / pi`.
pub fn modes_below(spec: &ChainSpec, omega: f64) -> f64 {
    spec.n() as f64 * band_angle(&band_edges(spec), omega) / PI
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            max_intervals: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

// 15-point Kronrod extension of the 7-point Gauss rule (nodes on [0, 1]
// of the symmetric rule, largest first).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mid = f(center);
    let mut kronrod = WGK[7] * mid;
    let mut gauss = WG[3] * mid;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration; only interior points are sampled.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let piece = |a: f64, b: f64| {
        let (value, error) = kronrod15(&f, a, b);
        Piece { a, b, value, error }
    };
    let mut heap = BinaryHeap::new();
    heap.push(piece(a, b));
    let mut evaluations = 15;
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadResult {
                value,
                error_estimate: error,
                evaluations,
            });
        }
        if heap.len() >= cfg.max_intervals {
            return Err(ChainError::QuadratureFailure {
                estimate: error,
                tol: target,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(piece(worst.a, mid));
        heap.push(piece(mid, worst.b));
        evaluations += 30;
    }
}

/// Integral of the mode density over `[lo, hi]`, clipped to the band.
pub fn integrate_density(spec: &ChainSpec, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let edges = band_edges(spec);
    let lo = lo.max(edges.lower);
    let hi = hi.min(edges.upper);
    if hi <= lo {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let span2 = edges.squared_span();
    let sum2 = edges.upper.powi(2) + edges.lower.powi(2);
    // rho(omega(phi)) * d omega / d phi
    let integrand = |phi: f64| {
        let omega = (0.5 * (sum2 - span2 * phi.cos())).sqrt();
        let jacobian = span2 * phi.sin() / (4.0 * omega);
        mode_density(spec, omega).map(|r| r * jacobian).unwrap_or(f64::NAN)
    };
    let result = integrate(integrand, band_angle(&edges, lo), band_angle(&edges, hi), cfg)?;
    if !result.value.is_finite() {
        return Err(ChainError::QuadratureFailure {
            estimate: f64::INFINITY,
            tol: cfg.abs_tol,
        });
    }
    Ok(result)
}

/// `int rho d omega` over the whole band; should equal `N`.
pub fn normalization_integral(spec: &ChainSpec, cfg: &QuadConfig) -> Result<QuadResult> {
    let edges = band_edges(spec);
    integrate_density(spec, edges.lower, edges.upper, cfg)
}

/// Density sampled on `count` uniformly spaced points strictly inside the band,
/// `margin` (fraction of the band width) away from each edge.
pub fn sample_curve(spec: &ChainSpec, count: usize, margin: f64) -> Result<ModeDensityCurve> {
    if count < 2 {
        return Err(ChainError::InvalidParameter {
            field: "count",
            reason: format!("need at least 2 samples, got {count}"),
        });
    }
    if !(margin > 0.0 && margin < 0.5) {
        return Err(ChainError::InvalidParameter {
            field: "margin",
            reason: format!("must lie in (0, 0.5), got {margin}"),
        });
    }
    let band = band_edges(spec);
    let lo = band.lower + margin * band.width();
    let hi = band.upper - margin * band.width();
    let omegas: Vec<f64> = (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect();
    let rho = omegas
        .iter()
        .map(|&w| mode_density(spec, w))
        .collect::<Result<_>>()?;
    Ok(ModeDensityCurve {
        omegas,
        rho,
        n: spec.n(),
        band,
    })
}

/// Histogram of the exact eigenfrequencies, with `rho` = count / bin width.
#[derive(Debug, Clone, Serialize)]
pub struct DensityHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub curve: ModeDensityCurve,
}

/// Empirical density over `bins` equal bins spanning the band.
pub fn density_histogram_oracle(spec: &ChainSpec, bins: usize) -> Result<DensityHistogram> {
    if bins == 0 {
        return Err(ChainError::InvalidParameter {
            field: "bins",
            reason: "need at least one bin".into(),
        });
    }
    let band = band_edges(spec);
    let width = band.width() / bins as f64;
    let mut counts = vec![0usize; bins];
    for omega in dispersion(spec).frequencies {
        let idx = ((omega - band.lower) / width).floor();
        // eigenfrequencies on the edges land in the outer bins
        let idx = (idx.max(0.0) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let bin_edges: Vec<f64> = (0..=bins).map(|i| band.lower + width * i as f64).collect();
    let omegas = (0..bins).map(|i| band.lower + width * (i as f64 + 0.5)).collect();
    let rho = counts.iter().map(|&c| c as f64 / width).collect();
    Ok(DensityHistogram {
        bin_edges,
        counts,
        curve: ModeDensityCurve {
            omegas,
            rho,
            n: spec.n(),
            band,
        },
    })
}
