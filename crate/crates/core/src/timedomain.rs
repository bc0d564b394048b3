//! Time-domain motion of the free chain and the causal Green's function.
//!
//! In the symmetrized coordinates `y_p = xi^p u_p` every Bloch mode evolves
//! independently, so the general solution is
//!
//! ```text
//! u_p(t) = xi^-p / sqrt(N) sum_m [A_m e^{i(k_m p - omega_m t)} + B_m e^{i(k_m p + omega_m t)}]
//! ```
//!
//! The homogeneous chain has a zero-frequency mode (`m = 0`) that moves as a
//! uniform translation `y_hat(t) = y_hat(0) + t ydot_hat(0)` instead.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::chain::{apply_dynamic_matrix, band_edges, dispersion, hamiltonian, ChainSpec};
use crate::error::{positive, ChainError, Result};
use crate::greens::greens_at_complex;

/// Real initial displacements and velocities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialConditions {
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl InitialConditions {
    pub fn new(u0: Vec<f64>, v0: Vec<f64>) -> Result<Self> {
        if u0.len() != v0.len() {
            return Err(ChainError::DimensionMismatch {
                expected: u0.len(),
                got: v0.len(),
            });
        }
        if let Some(bad) = u0.iter().chain(&v0).find(|x| !x.is_finite()) {
            return Err(ChainError::InvalidParameter {
                field: "initial_conditions",
                reason: format!("entries must be finite, found {bad}"),
            });
        }
        Ok(Self { u0, v0 })
    }

    pub fn at_rest(u0: Vec<f64>) -> Result<Self> {
        let n = u0.len();
        Self::new(u0, vec![0.0; n])
    }

    /// Standing wave `y_p = amplitude cos(k_m p)` released from rest.
    pub fn standing_mode(spec: &ChainSpec, m: usize, amplitude: f64) -> Result<Self> {
        if m >= spec.n() {
            return Err(ChainError::InvalidParameter {
                field: "mode",
                reason: format!("must be below N = {}, got {m}", spec.n()),
            });
        }
        let scales = site_scales(spec)?;
        let k = spec.wavenumber(m);
        let u0 = (0..spec.n())
            .map(|p| amplitude * (k * p as f64).cos() / scales[p])
            .collect();
        Self::at_rest(u0)
    }

    /// A single displaced particle.
    pub fn pulse(spec: &ChainSpec, site: usize, amplitude: f64) -> Result<Self> {
        if site >= spec.n() {
            return Err(ChainError::InvalidParameter {
                field: "site",
                reason: format!("must be below N = {}, got {site}", spec.n()),
            });
        }
        let mut u0 = vec![0.0; spec.n()];
        u0[site] = amplitude;
        Self::at_rest(u0)
    }

    pub fn len(&self) -> usize {
        self.u0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u0.is_empty()
    }
}

/// Mode amplitudes `A_m`, `B_m`.
///
/// For the homogeneous chain the `m = 0` entry holds the translation instead:
/// `a[0]` is the offset, `b[0]` is zero and `drift` the common velocity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalCoefficients {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub drift: Option<Complex64>,
}

/// `xi^p` for `p = 0..N`.
fn site_scales(spec: &ChainSpec) -> Result<Vec<f64>> {
    spec.grading_power(spec.n() as i64 - 1)?;
    Ok((0..spec.n()).map(|p| spec.xi().powi(p as i32)).collect())
}

fn phase(n: usize, m: usize, p: i64) -> Complex64 {
    let r = ((m as i64 * p).rem_euclid(n as i64)) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / n as f64)
}

/// `y_hat_m = N^-1/2 sum_p e^{-i k_m p} y_p`.
fn bloch_transform(y: &[f64]) -> Vec<Complex64> {
    let n = y.len();
    let norm = (n as f64).sqrt().recip();
    (0..n)
        .map(|m| {
            y.iter()
                .enumerate()
                .map(|(p, &v)| phase(n, m, p as i64).conj() * v)
                .sum::<Complex64>()
                * norm
        })
        .collect()
}

fn check_len(spec: &ChainSpec, len: usize) -> Result<()> {
    if len != spec.n() {
        return Err(ChainError::DimensionMismatch {
            expected: spec.n(),
            got: len,
        });
    }
    Ok(())
}

pub fn fit_modal_coefficients(spec: &ChainSpec, ic: &InitialConditions) -> Result<ModalCoefficients> {
    check_len(spec, ic.len())?;
    let scales = site_scales(spec)?;
    let y: Vec<f64> = ic.u0.iter().zip(&scales).map(|(u, s)| u * s).collect();
    let ydot: Vec<f64> = ic.v0.iter().zip(&scales).map(|(v, s)| v * s).collect();
    let y_hat = bloch_transform(&y);
    let ydot_hat = bloch_transform(&ydot);
    let omegas = dispersion(spec).frequencies;

    let mut a = Vec::with_capacity(spec.n());
    let mut b = Vec::with_capacity(spec.n());
    let mut drift = None;
    for m in 0..spec.n() {
        if spec.is_homogeneous() && m == 0 {
            a.push(y_hat[0]);
            b.push(Complex64::new(0.0, 0.0));
            drift = Some(ydot_hat[0]);
            continue;
        }
        // A + B = y_hat, -i omega (A - B) = ydot_hat
        let diff = Complex64::i() * ydot_hat[m] / omegas[m];
        a.push(0.5 * (y_hat[m] + diff));
        b.push(0.5 * (y_hat[m] - diff));
    }
    Ok(ModalCoefficients { a, b, drift })
}

fn check_coeffs(spec: &ChainSpec, coeffs: &ModalCoefficients) -> Result<()> {
    check_len(spec, coeffs.a.len())?;
    check_len(spec, coeffs.b.len())
}

/// Mode amplitudes `y_hat_m(t)` and their time derivatives.
fn mode_state(spec: &ChainSpec, coeffs: &ModalCoefficients, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let omegas = dispersion(spec).frequencies;
    let mut pos = Vec::with_capacity(spec.n());
    let mut vel = Vec::with_capacity(spec.n());
    for (m, &w) in omegas.iter().enumerate() {
        if m == 0 {
            if let Some(v) = coeffs.drift {
                pos.push(coeffs.a[0] + v * t);
                vel.push(v);
                continue;
            }
        }
        let fwd = coeffs.a[m] * Complex64::from_polar(1.0, -w * t);
        let back = coeffs.b[m] * Complex64::from_polar(1.0, w * t);
        pos.push(fwd + back);
        vel.push(Complex64::i() * w * (back - fwd));
    }
    (pos, vel)
}

/// `N^-1/2 sum_m e^{i k_m p} c_m` at an arbitrary integer site.
fn synthesize(amplitudes: &[Complex64], p: i64) -> Complex64 {
    let n = amplitudes.len();
    amplitudes
        .iter()
        .enumerate()
        .map(|(m, c)| phase(n, m, p) * c)
        .sum::<Complex64>()
        / (n as f64).sqrt()
}

/// Displacements `u_p(t)` as complex numbers; the imaginary parts vanish for real initial data.
pub fn evolve_complex(spec: &ChainSpec, coeffs: &ModalCoefficients, t: f64) -> Result<Vec<Complex64>> {
    check_coeffs(spec, coeffs)?;
    let scales = site_scales(spec)?;
    let (pos, _) = mode_state(spec, coeffs, t);
    Ok((0..spec.n())
        .map(|p| synthesize(&pos, p as i64) / scales[p])
        .collect())
}

pub fn evolve(spec: &ChainSpec, coeffs: &ModalCoefficients, t: f64) -> Result<Vec<f64>> {
    Ok(evolve_complex(spec, coeffs, t)?.iter().map(|z| z.re).collect())
}

/// Velocities `du_p/dt` at time `t`.
pub fn evolve_velocity(spec: &ChainSpec, coeffs: &ModalCoefficients, t: f64) -> Result<Vec<f64>> {
    check_coeffs(spec, coeffs)?;
    let scales = site_scales(spec)?;
    let (_, vel) = mode_state(spec, coeffs, t);
    Ok((0..spec.n())
        .map(|p| synthesize(&vel, p as i64).re / scales[p])
        .collect())
}

/// The modal formula at any integer site, including those outside `0..N`.
pub fn displacement_at(spec: &ChainSpec, coeffs: &ModalCoefficients, p: i64, t: f64) -> Result<Complex64> {
    check_coeffs(spec, coeffs)?;
    let scale = spec.grading_power(-p)?;
    let (pos, _) = mode_state(spec, coeffs, t);
    Ok(synthesize(&pos, p) * scale)
}

/// Energy summed over particles and springs.
pub fn total_energy(spec: &ChainSpec, u: &[f64], u_dot: &[f64]) -> Result<f64> {
    hamiltonian(spec, u, u_dot)
}

/// Energy as `m0/2 (ydot . ydot + y . L y)` in symmetrized coordinates.
pub fn quadratic_form_energy(spec: &ChainSpec, u: &[f64], u_dot: &[f64]) -> Result<f64> {
    check_len(spec, u.len())?;
    check_len(spec, u_dot.len())?;
    let scales = site_scales(spec)?;
    let y: Vec<f64> = u.iter().zip(&scales).map(|(u, s)| u * s).collect();
    let ly = apply_dynamic_matrix(spec, &y)?;
    let kinetic: f64 = u_dot.iter().zip(&scales).map(|(v, s)| (v * s).powi(2)).sum();
    let potential: f64 = y.iter().zip(&ly).map(|(a, b)| a * b).sum();
    Ok(0.5 * spec.m0() * (kinetic + potential))
}

/// Frequency grid for Fourier synthesis: `samples` points spaced `2 pi / window`,
/// evaluated at `omega + i epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FftConfig {
    pub epsilon: f64,
    pub window: f64,
    pub samples: usize,
}

/// Smallest `epsilon * window / 2` accepted; the response decays by `e^-14 ~ 1e-6` over half a window.
pub const MIN_DECAY_EXPONENT: f64 = 14.0;

/// Required grid extent in units of the Debye frequency.
pub const MIN_EXTENT: f64 = 8.0;

impl FftConfig {
    /// `epsilon = Omega_D / 100`, `window = 50 / epsilon`, 16384 samples (extent about `10 Omega_D`).
    pub fn for_spec(spec: &ChainSpec) -> Self {
        let epsilon = band_edges(spec).upper / 100.0;
        Self {
            epsilon,
            window: 50.0 / epsilon,
            samples: 16384,
        }
    }

    pub fn d_omega(&self) -> f64 {
        2.0 * PI / self.window
    }

    pub fn omega_max(&self) -> f64 {
        0.5 * self.samples as f64 * self.d_omega()
    }

    pub fn dt(&self) -> f64 {
        self.window / self.samples as f64
    }

    fn validate(&self, spec: &ChainSpec) -> Result<()> {
        positive("epsilon", self.epsilon)?;
        positive("window", self.window)?;
        if self.samples < 2 || !self.samples.is_multiple_of(2) {
            return Err(ChainError::InvalidParameter {
                field: "samples",
                reason: format!("must be even and at least 2, got {}", self.samples),
            });
        }
        let needed = MIN_EXTENT * band_edges(spec).upper;
        if self.omega_max() < needed {
            return Err(ChainError::InvalidParameter {
                field: "samples",
                reason: format!("grid reaches {:.6e}, need at least {needed:.6e}", self.omega_max()),
            });
        }
        if 0.5 * self.epsilon * self.window < MIN_DECAY_EXPONENT {
            return Err(ChainError::Aliasing {
                window: self.window,
                decay: self.epsilon.recip(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSignal {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSignal {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_{t<0} |g| / max_t |g|`.
    pub fn causality_ratio(&self) -> f64 {
        let before = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t < 0.0)
            .fold(0.0, |m: f64, (_, v)| m.max(v.abs()));
        before / self.max_abs()
    }
}

/// Time-domain Green's function `G_pq(t) = (1/2pi) int G_pq(omega + i eps) e^{-i omega t} d omega`
/// on `t in [-window/2, window/2)`.
///
/// The `-1/(omega + i eps)^2` high-frequency tail of the diagonal is removed
/// before the transform and added back through its exact transform
/// `Theta(t) t e^{-eps t}`, so truncating the grid costs only `O(omega_max^-3)`.
pub fn greens_time_domain(spec: &ChainSpec, p: usize, q: usize, cfg: &FftConfig) -> Result<TimeSignal> {
    cfg.validate(spec)?;
    let m = cfg.samples;
    let d_omega = cfg.d_omega();
    let d = p.abs_diff(q);
    let diagonal = d == 0;
    let remainder = |omega: f64| {
        let z = Complex64::new(omega, cfg.epsilon);
        let g = greens_at_complex(spec, z, d);
        if diagonal {
            g + (z * z).inv()
        } else {
            g
        }
    };

    let mut buffer = vec![Complex64::new(0.0, 0.0); m];
    let half = (m / 2) as i64;
    for j in -half..half {
        let omega = j as f64 * d_omega;
        // G(-omega + i eps) = conj G(omega + i eps)
        let value = if j >= 0 { remainder(omega) } else { remainder(-omega).conj() };
        buffer[j.rem_euclid(m as i64) as usize] = value;
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buffer);

    let dt = cfg.dt();
    let mut times = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    for n in -half..half {
        let t = n as f64 * dt;
        let mut g = buffer[n.rem_euclid(m as i64) as usize].re * d_omega / (2.0 * PI);
        if diagonal && t > 0.0 {
            g += t * (-cfg.epsilon * t).exp();
        }
        times.push(t);
        values.push(g);
    }
    Ok(TimeSignal { times, values })
}
