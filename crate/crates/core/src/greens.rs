//! Closed-form frequency-domain Green's function of the infinite graded chain.
//!
//! The symmetric function `G(omega) = (L - (omega + i eps)^2)^-1` of the
//! transformed displacements `y_p = xi^p u_p` is evaluated in the
//! `eps -> 0+` limit. Everything is controlled by
//!
//! ```text
//! a(omega) = (Omega_D^2 + Omega_0^2 - 2 omega^2) / (Omega_D^2 - Omega_0^2)
//! ```
//!
//! which lies in `[-1, 1]` inside the band, above 1 below it and below -1
//! above the Debye frequency. The residue form is
//! `(xi / 2 omega0^2) e^{-d phi} / sinh phi` with `cosh phi = a`, `d = |p - q|`,
//! and the branch chosen so that `|e^{-phi}| <= 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{band_edges, BandEdges, ChainSpec};
use crate::error::{non_negative, ChainError, Result};

/// Half-width of the `|a| = 1` window treated as a band edge.
pub const EDGE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `0 <= omega < Omega_0`, case (ii).
    BelowBand,
    /// `Omega_0 <= omega <= Omega_D`, case (i).
    InBand,
    /// `omega > Omega_D`, case (iii).
    AboveBand,
}

impl Regime {
    /// Roman-numeral case label.
    pub fn label(self) -> &'static str {
        match self {
            Regime::InBand => "i",
            Regime::BelowBand => "ii",
            Regime::AboveBand => "iii",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeTag {
    pub regime: Regime,
    pub edges: BandEdges,
}

/// A real frequency with the damping used by finite-`eps` consumers
/// (oracle comparisons, Fourier synthesis). The closed forms themselves
/// take the `eps -> 0+` limit analytically and ignore `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyQuery {
    pub omega: f64,
    pub epsilon: f64,
}

impl FrequencyQuery {
    pub fn new(omega: f64) -> Result<Self> {
        Self::damped(omega, 0.0)
    }

    pub fn damped(omega: f64, epsilon: f64) -> Result<Self> {
        Ok(Self {
            omega: non_negative("omega", omega)?,
            epsilon: non_negative("epsilon", epsilon)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreensKind {
    /// Symmetric function of the transformed field `y`.
    Symmetric,
    /// Non-symmetric function of the true displacements,
    /// `G_pq = xi^-(p-q) G^sym_pq`.
    TrueDisplacement,
}

/// How an index pair is turned into a lattice distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexDistance {
    /// `|p - q|`, the infinite-chain reading.
    Direct,
    /// `min(|p - q|, N - |p - q|)`, the nearest periodic image on the ring.
    MinimumImage,
}

impl IndexDistance {
    pub fn distance(self, n: usize, p: usize, q: usize) -> usize {
        let d = p.abs_diff(q);
        match self {
            IndexDistance::Direct => d,
            IndexDistance::MinimumImage => {
                let d = d % n;
                d.min(n - d)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreensEvaluation {
    pub value: Complex64,
    pub regime: RegimeTag,
    pub p: usize,
    pub q: usize,
    pub kind: GreensKind,
}

/// `a(omega)`; equals `cosh phi` of the residue form.
pub fn coefficient_a(spec: &ChainSpec, omega: f64) -> f64 {
    let xi = spec.xi();
    (1.0 + xi * xi) / (2.0 * xi) - xi * omega * omega / (2.0 * spec.omega0().powi(2))
}

pub fn classify(spec: &ChainSpec, omega: f64) -> Result<RegimeTag> {
    classify_with_guard(spec, omega, EDGE_GUARD)
}

/// Classifies `omega` by the sign of `1 - |a|`, raising
/// [`ChainError::BandEdgeSingularity`] inside the guard window.
pub fn classify_with_guard(spec: &ChainSpec, omega: f64, guard: f64) -> Result<RegimeTag> {
    non_negative("omega", omega)?;
    let edges = band_edges(spec);
    let a = coefficient_a(spec, omega);
    if (a.abs() - 1.0).abs() <= guard {
        let edge = if a > 0.0 { edges.lower } else { edges.upper };
        return Err(ChainError::BandEdgeSingularity { omega, edge });
    }
    let regime = if a > 1.0 {
        Regime::BelowBand
    } else if a < -1.0 {
        Regime::AboveBand
    } else {
        Regime::InBand
    };
    Ok(RegimeTag { regime, edges })
}

/// `xi / (2 omega0^2)`, which also equals `2 / (Omega_D^2 - Omega_0^2)`.
fn residue_prefactor(spec: &ChainSpec) -> f64 {
    spec.xi() / (2.0 * spec.omega0().powi(2))
}

/// Trigonometric/hyperbolic form at lattice distance `d`.
fn trig_form(spec: &ChainSpec, a: f64, regime: Regime, d: usize) -> Complex64 {
    let pre = residue_prefactor(spec);
    let d = d as f64;
    match regime {
        Regime::InBand => {
            let phi = a.acos();
            let sin_phi = (1.0 - a * a).sqrt();
            Complex64::i() * pre * Complex64::from_polar(1.0, phi * d) / sin_phi
        }
        Regime::BelowBand => {
            let chi = a.acosh();
            Complex64::from(pre * (-chi * d).exp() / chi.sinh())
        }
        Regime::AboveBand => {
            let chi = (-a).acosh();
            let sign = if (d as u64).is_multiple_of(2) { -1.0 } else { 1.0 };
            Complex64::from(sign * pre * (-chi * d).exp() / chi.sinh())
        }
    }
}

/// Symmetric Green's function `G_pq(omega)` of the infinite chain, `d = |p - q|`.
pub fn greens_closed_form(
    spec: &ChainSpec,
    query: &FrequencyQuery,
    p: usize,
    q: usize,
) -> Result<GreensEvaluation> {
    let tag = classify(spec, query.omega)?;
    let a = coefficient_a(spec, query.omega);
    Ok(GreensEvaluation {
        value: trig_form(spec, a, tag.regime, p.abs_diff(q)),
        regime: tag,
        p,
        q,
        kind: GreensKind::Symmetric,
    })
}

/// The same function written with the band edges and square roots only,
/// as a second algebraic route to [`greens_closed_form`].
pub fn greens_radical_form(spec: &ChainSpec, omega: f64, p: usize, q: usize) -> Result<Complex64> {
    let tag = classify(spec, omega)?;
    let d = p.abs_diff(q) as i32;
    let (lo2, hi2) = (tag.edges.lower.powi(2), tag.edges.upper.powi(2));
    let w2 = omega * omega;
    let span = hi2 - lo2;
    let sum = hi2 + lo2 - 2.0 * w2;
    Ok(match tag.regime {
        Regime::InBand => {
            let root = ((hi2 - w2) * (w2 - lo2)).sqrt();
            let ratio = Complex64::new(sum, 2.0 * root) / span;
            Complex64::i() / root * ratio.powi(d)
        }
        Regime::BelowBand => {
            let root = ((hi2 - w2) * (lo2 - w2)).sqrt();
            Complex64::from(((sum - 2.0 * root) / span).powi(d) / root)
        }
        Regime::AboveBand => {
            let root = ((hi2 - w2) * (lo2 - w2)).sqrt();
            Complex64::from(-((sum + 2.0 * root) / span).powi(d) / root)
        }
    })
}

/// Residue form at a complex frequency `z` with `Im z > 0`, or at a real
/// frequency outside the band.
///
/// Picks the root `w = e^{-phi}` of `w + 1/w = 2a` inside the unit circle.
pub fn greens_at_complex(spec: &ChainSpec, z: Complex64, d: usize) -> Complex64 {
    let (w, root) = decaying_root(spec, z);
    residue_prefactor(spec) * w.powu(d as u32) / root
}

/// `(w, sinh phi)` with `w = e^{-phi}` the root of `w + 1/w = 2a(z)` inside the unit circle.
fn decaying_root(spec: &ChainSpec, z: Complex64) -> (Complex64, Complex64) {
    let xi = spec.xi();
    let a = Complex64::from((1.0 + xi * xi) / (2.0 * xi)) - z * z * (xi / (2.0 * spec.omega0().powi(2)));
    let mut root = (a * a - 1.0).sqrt();
    if (a - root).norm() > 1.0 {
        root = -root;
    }
    // sinh(phi) = (e^phi - e^-phi)/2 = root
    (a - root, root)
}

/// Exact resolvent of the finite ring at `omega + i epsilon`.
///
/// Summing the infinite-chain response over all periodic images,
/// `sum_j w^|d + jN| = (w^d + w^(N-d)) / (1 - w^N)`. With `epsilon = 0` the
/// frequency must lie outside the band, where `|w| < 1`.
pub fn greens_ring(spec: &ChainSpec, omega: f64, epsilon: f64, p: usize, q: usize) -> Result<Complex64> {
    non_negative("epsilon", epsilon)?;
    let n = spec.n();
    for (field, idx) in [("p", p), ("q", q)] {
        if idx >= n {
            return Err(ChainError::InvalidParameter {
                field,
                reason: format!("site index must be below N = {n}, got {idx}"),
            });
        }
    }
    if epsilon == 0.0 && classify(spec, omega)?.regime == Regime::InBand {
        return Err(ChainError::InvalidParameter {
            field: "epsilon",
            reason: "must be positive for in-band frequencies on a finite ring".into(),
        });
    }
    let (w, root) = decaying_root(spec, Complex64::new(omega, epsilon));
    let d = p.abs_diff(q) as u32;
    let images = (w.powu(d) + w.powu(n as u32 - d)) / (1.0 - w.powu(n as u32));
    Ok(residue_prefactor(spec) * images / root)
}

/// Finite-damping value at `omega + i epsilon` for `epsilon > 0`.
pub fn greens_damped(spec: &ChainSpec, omega: f64, epsilon: f64, p: usize, q: usize) -> Result<Complex64> {
    crate::error::positive("epsilon", epsilon)?;
    if !omega.is_finite() {
        return Err(ChainError::InvalidParameter {
            field: "omega",
            reason: format!("must be finite, got {omega}"),
        });
    }
    Ok(greens_at_complex(spec, Complex64::new(omega, epsilon), p.abs_diff(q)))
}

/// True-displacement Green's function `G_pq = xi^-(p-q) G^sym_pq`.
pub fn greens_true(
    spec: &ChainSpec,
    query: &FrequencyQuery,
    p: usize,
    q: usize,
) -> Result<GreensEvaluation> {
    let sym = greens_closed_form(spec, query, p, q)?;
    let factor = spec.grading_power(q as i64 - p as i64)?;
    Ok(GreensEvaluation {
        value: sym.value * factor,
        kind: GreensKind::TrueDisplacement,
        ..sym
    })
}

/// Full `N x N` matrix assembled from the closed form.
///
/// With [`IndexDistance::MinimumImage`] the entries follow the nearest
/// periodic image, which is what the finite periodic chain approaches as
/// `N` grows; [`IndexDistance::Direct`] uses `|p - q|` as on the infinite chain.
pub fn greens_matrix(
    spec: &ChainSpec,
    query: &FrequencyQuery,
    kind: GreensKind,
    distance: IndexDistance,
) -> Result<DMatrix<Complex64>> {
    let n = spec.n();
    let tag = classify(spec, query.omega)?;
    let a = coefficient_a(spec, query.omega);
    let by_distance: Vec<Complex64> = (0..n).map(|d| trig_form(spec, a, tag.regime, d)).collect();
    let scales: Vec<f64> = match kind {
        GreensKind::Symmetric => Vec::new(),
        GreensKind::TrueDisplacement => {
            spec.grading_power(n as i64 - 1)?;
            (0..n).map(|p| spec.xi().powi(p as i32)).collect()
        }
    };
    Ok(DMatrix::from_fn(n, n, |p, q| {
        let g = by_distance[distance.distance(n, p, q)];
        match kind {
            GreensKind::Symmetric => g,
            // xi^-(p-q) split as xi^q / xi^p keeps both factors in range
            GreensKind::TrueDisplacement => g * (scales[q] / scales[p]),
        }
    }))
}
