//! The continuum limit `h -> 0` of the graded chain.
//!
//! Keeping `L = N h`, `m0 = rho0 h`, `omega0 = Omega / h` and `xi = e^{beta h}`
//! fixed produces an elastic line with density `rho0 e^{2 beta x}` and modulus
//! `Omega^2 rho0 e^{2 beta x}`. The symmetrized field obeys the Klein-Gordon
//! equation `-Omega^2 (y'' - beta^2 y) = omega^2 y`, with dispersion
//! `omega^2 = Omega^2 (K^2 + beta^2)`: a band starting at `beta Omega` and
//! no upper edge, so only the evanescent (below `beta Omega`) and
//! propagating regimes remain.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::error::{non_negative, positive, ChainError, Result};
use crate::greens::{greens_closed_form, FrequencyQuery};
use crate::oracle::greens_spectral_sum;

/// Relative width of the excluded window around `omega = beta Omega`.
pub const EDGE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawContinuumSpec")]
pub struct ContinuumSpec {
    length: f64,
    beta: f64,
    big_omega: f64,
    rho0: f64,
}

#[derive(Deserialize)]
struct RawContinuumSpec {
    length: f64,
    beta: f64,
    big_omega: f64,
    #[serde(default = "unit_density")]
    rho0: f64,
}

fn unit_density() -> f64 {
    1.0
}

impl TryFrom<RawContinuumSpec> for ContinuumSpec {
    type Error = ChainError;

    fn try_from(raw: RawContinuumSpec) -> Result<Self> {
        ContinuumSpec::new(raw.length, raw.beta, raw.big_omega, raw.rho0)
    }
}

impl ContinuumSpec {
    pub fn new(length: f64, beta: f64, big_omega: f64, rho0: f64) -> Result<Self> {
        Ok(Self {
            length: positive("length", length)?,
            beta: non_negative("beta", beta)?,
            big_omega: positive("big_omega", big_omega)?,
            rho0: positive("rho0", rho0)?,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn big_omega(&self) -> f64 {
        self.big_omega
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    /// `beta Omega`, the bottom of the continuum band.
    pub fn lower_edge(&self) -> f64 {
        self.beta * self.big_omega
    }

    /// The chain with `N` particles on this line: `h = L/N`, `xi = e^{beta h}`,
    /// `omega0 = Omega/h`, `m0 = rho0 h`.
    pub fn chain(&self, n: usize) -> Result<ChainSpec> {
        let h = self.length / n as f64;
        ChainSpec::new(n, (self.beta * h).exp(), self.big_omega / h, self.rho0 * h)
    }

    /// `omega^2 / Omega^2 - beta^2`: positive in the band, negative below it.
    fn detuning(&self, omega: f64) -> Result<f64> {
        non_negative("omega", omega)?;
        let w2 = (omega / self.big_omega).powi(2);
        let b2 = self.beta * self.beta;
        let q = w2 - b2;
        if q.abs() <= EDGE_GUARD * (w2 + b2) {
            return Err(ChainError::BandEdgeSingularity {
                omega,
                edge: self.lower_edge(),
            });
        }
        Ok(q)
    }
}

/// How the Green's function treats the finite length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuumMode {
    /// The formulas on the unbounded line.
    Infinite,
    /// `L`-periodic continuation summing `2 images + 1` copies; only below the band,
    /// where the images decay geometrically.
    Periodic { images: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ContinuumRegime {
    Evanescent,
    Propagating,
}

impl ContinuumRegime {
    /// Case label shared with the discrete chain.
    pub fn label(self) -> &'static str {
        match self {
            Self::Evanescent => "ii",
            Self::Propagating => "i",
        }
    }
}

pub fn classify(cspec: &ContinuumSpec, omega: f64) -> Result<ContinuumRegime> {
    Ok(if cspec.detuning(omega)? < 0.0 {
        ContinuumRegime::Evanescent
    } else {
        ContinuumRegime::Propagating
    })
}

/// `omega_m = Omega sqrt(K_m^2 + beta^2)` with `K_m = 2 pi m / L`.
pub fn continuum_dispersion(cspec: &ContinuumSpec, m: i64) -> f64 {
    let k = 2.0 * PI * m as f64 / cspec.length;
    cspec.big_omega * (k * k + cspec.beta * cspec.beta).sqrt()
}

/// Green's function of `-Omega^2 (g'' + (omega^2/Omega^2 - beta^2) g) = delta(x)` on the line.
///
/// Below the band `e^{-kappa|x|} / (2 Omega^2 kappa)`, in the band
/// `i e^{i k |x|} / (2 Omega^2 k)`.
pub fn continuum_greens(cspec: &ContinuumSpec, omega: f64, x: f64) -> Result<Complex64> {
    let q = cspec.detuning(omega)?;
    let two_w2 = 2.0 * cspec.big_omega.powi(2);
    let x = x.abs();
    Ok(if q < 0.0 {
        let kappa = (-q).sqrt();
        Complex64::from((-kappa * x).exp() / (two_w2 * kappa))
    } else {
        let k = q.sqrt();
        Complex64::i() * Complex64::from_polar(1.0, k * x) / (two_w2 * k)
    })
}

pub fn continuum_greens_in(cspec: &ContinuumSpec, omega: f64, x: f64, mode: ContinuumMode) -> Result<Complex64> {
    match mode {
        ContinuumMode::Infinite => continuum_greens(cspec, omega, x),
        ContinuumMode::Periodic { images } => {
            if classify(cspec, omega)? == ContinuumRegime::Propagating {
                return Err(ChainError::Unsupported(
                    "periodic mode in the propagating regime: the image sum does not converge absolutely".into(),
                ));
            }
            let images = images as i64;
            (-images..=images)
                .map(|j| continuum_greens(cspec, omega, x + j as f64 * cspec.length))
                .sum()
        }
    }
}

/// Green's function of the physical displacement, `e^{-beta x} g(|x|)`.
pub fn true_displacement_greens(cspec: &ContinuumSpec, omega: f64, x: f64) -> Result<Complex64> {
    Ok(continuum_greens(cspec, omega, x)? * (-cspec.beta * x).exp())
}

/// `L omega / (pi Omega^2 sqrt(omega^2/Omega^2 - beta^2))` in the band, zero below.
pub fn continuum_mode_density(cspec: &ContinuumSpec, omega: f64) -> Result<f64> {
    let q = cspec.detuning(omega)?;
    if q < 0.0 {
        return Ok(0.0);
    }
    Ok(cspec.length * omega / (PI * cspec.big_omega.powi(2) * q.sqrt()))
}

/// `(2 omega L / pi) Im g(0, omega)`.
pub fn continuum_mode_density_from_greens(cspec: &ContinuumSpec, omega: f64) -> Result<f64> {
    Ok(2.0 * omega * cspec.length / PI * continuum_greens(cspec, omega, 0.0)?.im)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradedModuli {
    pub rho_m: f64,
    pub mu: f64,
}

/// Mass density `rho0 e^{2 beta x}` and modulus `Omega^2 rho0 e^{2 beta x}`.
pub fn graded_moduli(cspec: &ContinuumSpec, x: f64) -> GradedModuli {
    let rho_m = cspec.rho0 * (2.0 * cspec.beta * x).exp();
    GradedModuli {
        rho_m,
        mu: cspec.big_omega.powi(2) * rho_m,
    }
}

/// Uniform finite-difference grid `x = +-(skip + i) spacing`, `i = 0..`, up to `extent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdGrid {
    pub spacing: f64,
    pub extent: f64,
    pub skip: usize,
}

impl FdGrid {
    /// Spacing `L/2048` out to `L/2`, skipping four cells around the origin.
    pub fn for_spec(cspec: &ContinuumSpec) -> Self {
        Self {
            spacing: cspec.length / 2048.0,
            extent: cspec.length / 2.0,
            skip: 4,
        }
    }

    fn points(&self) -> Result<Vec<f64>> {
        positive("spacing", self.spacing)?;
        let count = (self.extent / self.spacing).floor() as usize;
        if count <= self.skip + 1 {
            return Err(ChainError::InvalidParameter {
                field: "extent",
                reason: format!("grid holds no points beyond the {} skipped cells", self.skip),
            });
        }
        let right: Vec<f64> = (self.skip..count).map(|i| i as f64 * self.spacing).collect();
        Ok(right.iter().map(|x| -x).rev().chain(right.iter().copied()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub spacing: f64,
    /// Largest `|residual|` over the grid.
    pub max_residual: f64,
    /// Leading truncation error predicted for the three-point stencil.
    pub truncation_bound: f64,
    /// Cancellation error of the second difference, `8 eps Omega^2 max|g| / spacing^2`.
    pub roundoff_floor: f64,
    /// `g'(0+) - g'(0-)` from second-order one-sided differences.
    pub jump: f64,
    /// `|jump + 1/Omega^2|`.
    pub jump_error: f64,
}

impl ResidualReport {
    /// Fails when the residual exceeds `factor` times the predicted truncation error
    /// (plus a roundoff floor) or the jump misses `-1/Omega^2` by more than `jump_tol`.
    pub fn verify(&self, factor: f64, jump_tol: f64) -> Result<()> {
        let allowed = factor * self.truncation_bound + self.roundoff_floor;
        if self.max_residual > allowed {
            return Err(ChainError::VerificationFailed {
                check: "residual",
                deviation: self.max_residual,
                tol: allowed,
            });
        }
        if self.jump_error > jump_tol {
            return Err(ChainError::VerificationFailed {
                check: "derivative jump",
                deviation: self.jump_error,
                tol: jump_tol,
            });
        }
        Ok(())
    }
}

fn roundoff(w2: f64, max_g: f64, s: f64) -> f64 {
    8.0 * f64::EPSILON * w2 * max_g / (s * s)
}

fn derivative_jump<F: Fn(f64) -> Result<Complex64>>(g: F, s: f64) -> Result<Complex64> {
    let (g0, r1, r2, l1, l2) = (g(0.0)?, g(s)?, g(2.0 * s)?, g(-s)?, g(-2.0 * s)?);
    let right = (-3.0 * g0 + 4.0 * r1 - r2) / (2.0 * s);
    let left = (3.0 * g0 - 4.0 * l1 + l2) / (2.0 * s);
    Ok(right - left)
}

/// Checks `-Omega^2 (g'' + (omega^2/Omega^2 - beta^2) g) = 0` off the origin and the
/// delta normalization at it, with three-point differences.
pub fn helmholtz_residual(cspec: &ContinuumSpec, omega: f64, grid: &FdGrid) -> Result<ResidualReport> {
    let q = cspec.detuning(omega)?;
    let w2 = cspec.big_omega.powi(2);
    let s = grid.spacing;
    let g = |x: f64| continuum_greens(cspec, omega, x);
    let mut max_residual: f64 = 0.0;
    let mut max_g: f64 = 0.0;
    for x in grid.points()? {
        let (gm, g0, gp) = (g(x - s)?, g(x)?, g(x + s)?);
        let second = (gp - 2.0 * g0 + gm) / (s * s);
        max_residual = max_residual.max((-w2 * (second + q * g0)).norm());
        max_g = max_g.max(g0.norm());
    }
    let jump = derivative_jump(g, s)?;
    Ok(ResidualReport {
        spacing: s,
        max_residual,
        // g'''' = q^2 g for these exponentials
        truncation_bound: w2 * s * s * q * q * max_g / 12.0,
        roundoff_floor: roundoff(w2, max_g, s),
        jump: jump.re,
        jump_error: (jump + w2.recip()).norm(),
    })
}

/// Checks `-Omega^2 [(e^{2 beta x} g')' + (omega/Omega)^2 e^{2 beta x} g] = 0` for the
/// true-displacement function off the origin, with the conservative three-point stencil.
pub fn graded_residual(cspec: &ContinuumSpec, omega: f64, grid: &FdGrid) -> Result<ResidualReport> {
    let q = cspec.detuning(omega)?;
    let w2 = cspec.big_omega.powi(2);
    let r2 = (omega / cspec.big_omega).powi(2);
    let b = cspec.beta;
    let s = grid.spacing;
    let g = |x: f64| true_displacement_greens(cspec, omega, x);
    let weight = |x: f64| (2.0 * b * x).exp();
    let mut max_residual: f64 = 0.0;
    let mut bound: f64 = 0.0;
    let mut max_g: f64 = 0.0;
    for x in grid.points()? {
        let (gm, g0, gp) = (g(x - s)?, g(x)?, g(x + s)?);
        let flux = (weight(x + 0.5 * s) * (gp - g0) - weight(x - 0.5 * s) * (g0 - gm)) / (s * s);
        max_residual = max_residual.max((-w2 * (flux + r2 * weight(x) * g0)).norm());
        // derivatives of e^{2bx} g scale with (|b| + sqrt|q|) per order
        max_g = max_g.max(weight(x + s) * g0.norm());
        let rate = b + q.abs().sqrt();
        bound = bound.max(w2 * s * s * rate.powi(4) * weight(x) * g0.norm() / 12.0);
    }
    // the jump condition carries the weight e^0 = 1 at the origin
    let jump = derivative_jump(g, s)?;
    Ok(ResidualReport {
        spacing: s,
        max_residual,
        truncation_bound: bound,
        roundoff_floor: roundoff(w2, max_g, s),
        jump: jump.re,
        jump_error: (jump + w2.recip()).norm(),
    })
}

/// Chains of `N = n_start * 2^i` particles on the same line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretizationLadder {
    pub cspec: ContinuumSpec,
    pub ns: Vec<usize>,
}

impl DiscretizationLadder {
    pub fn powers_of_two(cspec: ContinuumSpec, n_start: usize, rungs: usize) -> Result<Self> {
        if n_start < 2 || rungs == 0 {
            return Err(ChainError::InvalidParameter {
                field: "ladder",
                reason: format!("need n_start >= 2 and at least one rung, got {n_start} and {rungs}"),
            });
        }
        Ok(Self {
            cspec,
            ns: (0..rungs).map(|i| n_start << i).collect(),
        })
    }

    pub fn h_values(&self) -> Vec<f64> {
        self.ns.iter().map(|&n| self.cspec.length / n as f64).collect()
    }

    pub fn chains(&self) -> Result<Vec<ChainSpec>> {
        self.ns.iter().map(|&n| self.cspec.chain(n)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub discrete: f64,
    pub continuum: f64,
    pub error: f64,
    /// `log(e_prev / e) / log(h_prev / h)`; absent on the first rung.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub quantity: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    fn from_samples(quantity: String, samples: Vec<(usize, f64, f64, f64, f64)>) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(samples.len());
        for (n, h, discrete, continuum, error) in samples {
            let observed_order = rows
                .last()
                .map(|prev| (prev.error / error).ln() / (prev.h / h).ln());
            rows.push(ConvergenceRow {
                n,
                h,
                discrete,
                continuum,
                error,
                observed_order,
            });
        }
        Self { quantity, rows }
    }

    /// Smallest observed order over rungs after the first.
    pub fn min_order(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.observed_order)
            .min_by(f64::total_cmp)
    }
}

/// `omega_m` of each rung against `Omega sqrt(K_m^2 + beta^2)`.
pub fn dispersion_convergence(ladder: &DiscretizationLadder, m: i64) -> Result<ConvergenceStudy> {
    let exact = continuum_dispersion(&ladder.cspec, m);
    let mut samples = Vec::new();
    for (chain, h) in ladder.chains()?.iter().zip(ladder.h_values()) {
        let idx = m.rem_euclid(chain.n() as i64) as usize;
        let discrete = chain.eigenvalue(idx).sqrt();
        samples.push((chain.n(), h, discrete, exact, (discrete - exact).abs()));
    }
    Ok(ConvergenceStudy::from_samples(format!("dispersion m={m}"), samples))
}

/// `G_{0,d} / h` with `d = x/h` against the line Green's function at `x`.
///
/// On the infinite line the chain side is the infinite-chain closed form; in
/// periodic mode it is the exact finite-ring sum and the line side the image
/// sum. `x` must land on a lattice site of every rung. The reported values
/// are magnitudes; the error is the complex distance.
pub fn greens_convergence(
    ladder: &DiscretizationLadder,
    omega: f64,
    x: f64,
    mode: ContinuumMode,
) -> Result<ConvergenceStudy> {
    let exact = continuum_greens_in(&ladder.cspec, omega, x, mode)?;
    let mut samples = Vec::new();
    for (chain, h) in ladder.chains()?.iter().zip(ladder.h_values()) {
        let sites = x.abs() / h;
        let d = sites.round();
        if (sites - d).abs() > 1e-9 * sites.max(1.0) {
            return Err(ChainError::InvalidParameter {
                field: "x",
                reason: format!("{x} is not a lattice site for N = {}", chain.n()),
            });
        }
        let d = d as usize;
        let value = match mode {
            ContinuumMode::Infinite => greens_closed_form(chain, &FrequencyQuery::new(omega)?, 0, d)?.value,
            ContinuumMode::Periodic { .. } => greens_spectral_sum(chain, omega, 0.0, 0, d % chain.n())?,
        };
        let discrete = value / h;
        samples.push((chain.n(), h, discrete.norm(), exact.norm(), (discrete - exact).norm()));
    }
    Ok(ConvergenceStudy::from_samples(
        format!("greens omega={omega} x={x}"),
        samples,
    ))
}

/// Chain mode density against the line density at `omega`.
pub fn density_convergence(ladder: &DiscretizationLadder, omega: f64) -> Result<ConvergenceStudy> {
    let exact = continuum_mode_density(&ladder.cspec, omega)?;
    let mut samples = Vec::new();
    for (chain, h) in ladder.chains()?.iter().zip(ladder.h_values()) {
        let discrete = crate::density::mode_density(chain, omega)?;
        samples.push((chain.n(), h, discrete, exact, (discrete - exact).abs()));
    }
    Ok(ConvergenceStudy::from_samples(format!("density omega={omega}"), samples))
}
