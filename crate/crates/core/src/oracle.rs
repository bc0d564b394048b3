//! Brute-force references for the closed forms.
//!
//! Nothing here uses the residue formula: the Green's function comes either
//! from the finite spectral sum over the `N` Bloch modes or from a dense LU
//! inverse, and the equations of motion come from differentiating the energy
//! numerically.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chain::{build_matrices, dispersion, dynamic_matrix, hamiltonian, ChainSpec, DENSE_LIMIT};
use crate::error::{non_negative, ChainError, Result};

/// Condition estimate above which a dense resolvent is reported as singular.
pub const CONDITION_LIMIT: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub epsilon: f64,
    pub max_n: usize,
}

impl OracleConfig {
    /// `epsilon = 1e-6 Omega_D`, dense limit 4096.
    pub fn for_spec(spec: &ChainSpec) -> Self {
        Self {
            epsilon: 1e-6 * spec.band_edges().upper,
            max_n: DENSE_LIMIT,
        }
    }

    /// Damping for in-band comparisons with the `N -> infinity` closed form:
    /// `3 (Omega_D - Omega_0) / N`, enough for neighbouring resonances to overlap.
    pub fn band_comparison_epsilon(spec: &ChainSpec) -> f64 {
        3.0 * spec.band_edges().width() / spec.n() as f64
    }
}

/// Exact finite-`N` value `(1/N) sum_m e^{i k_m (p-q)} / (omega_m^2 - (omega + i eps)^2)`.
///
/// `epsilon = 0` is accepted for frequencies off the discrete spectrum.
pub fn greens_spectral_sum(
    spec: &ChainSpec,
    omega: f64,
    epsilon: f64,
    p: usize,
    q: usize,
) -> Result<Complex64> {
    let n = spec.n();
    let z2 = Complex64::new(omega, epsilon).powi(2);
    let spectrum = dispersion(spec);
    let shift = (p as i64 - q as i64).rem_euclid(n as i64) as usize;
    let mut total = Complex64::new(0.0, 0.0);
    for (m, &lambda) in spectrum.eigenvalues.iter().enumerate() {
        let denom = lambda - z2;
        if denom == Complex64::new(0.0, 0.0) {
            return Err(ChainError::NearSingular {
                condition: f64::INFINITY,
            });
        }
        let phase = 2.0 * std::f64::consts::PI * ((m * shift) % n) as f64 / n as f64;
        total += Complex64::from_polar(1.0, phase) / denom;
    }
    Ok(total / n as f64)
}

/// Whole spectral-sum matrix; `O(N^2)` entries from `N` distinct shifts.
pub fn greens_spectral_matrix(spec: &ChainSpec, omega: f64, epsilon: f64) -> Result<DMatrix<Complex64>> {
    let n = spec.n();
    let by_shift = (0..n)
        .map(|s| greens_spectral_sum(spec, omega, epsilon, s, 0))
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_fn(n, n, |p, q| by_shift[(p + n - q) % n]))
}

fn check_size(n: usize, max_n: usize) -> Result<()> {
    if n > max_n {
        return Err(ChainError::TooLarge { n, max: max_n });
    }
    Ok(())
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverts `a`, refusing when the 1-norm condition estimate exceeds [`CONDITION_LIMIT`].
fn guarded_inverse(a: DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let norm = one_norm(&a);
    let inv = a.try_inverse().ok_or(ChainError::NearSingular {
        condition: f64::INFINITY,
    })?;
    let condition = norm * one_norm(&inv);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(ChainError::NearSingular { condition });
    }
    Ok(inv)
}

fn shifted(m: &DMatrix<f64>, omega: f64, epsilon: f64) -> DMatrix<Complex64> {
    let z2 = Complex64::new(omega, epsilon).powi(2);
    let mut a = m.map(Complex64::from);
    for i in 0..a.nrows() {
        a[(i, i)] -= z2;
    }
    a
}

/// Dense `(L - (omega + i eps)^2)^-1`.
pub fn greens_dense_inverse(
    spec: &ChainSpec,
    omega: f64,
    epsilon: f64,
    config: &OracleConfig,
) -> Result<DMatrix<Complex64>> {
    check_size(spec.n(), config.max_n)?;
    non_negative("epsilon", epsilon)?;
    guarded_inverse(shifted(&dynamic_matrix(spec), omega, epsilon))
}

/// Dense `(Lambda^-1 K - (omega + i eps)^2)^-1` for the true displacements.
pub fn greens_true_dense(
    spec: &ChainSpec,
    omega: f64,
    epsilon: f64,
    config: &OracleConfig,
) -> Result<DMatrix<Complex64>> {
    check_size(spec.n(), config.max_n)?;
    non_negative("epsilon", epsilon)?;
    let mats = build_matrices(spec)?;
    let lambda_inv = DMatrix::from_diagonal(&mats.lambda_diag.map(f64::recip));
    let dynamic = lambda_inv * &mats.k_mat;
    guarded_inverse(shifted(&dynamic, omega, epsilon))
}

/// Stiffness matrix recovered from the energy alone:
/// `m0 K_pq = H(e_p + e_q) - H(e_p) - H(e_q)` for the static energy.
pub fn stiffness_from_hamiltonian(spec: &ChainSpec) -> Result<DMatrix<f64>> {
    let n = spec.n();
    let zero = vec![0.0; n];
    let unit = |p: usize| {
        let mut u = vec![0.0; n];
        u[p] = 1.0;
        u
    };
    let single: Vec<f64> = (0..n)
        .map(|p| hamiltonian(spec, &unit(p), &zero))
        .collect::<Result<_>>()?;
    let mut k = DMatrix::zeros(n, n);
    for p in 0..n {
        k[(p, p)] = 2.0 * single[p] / spec.m0();
        for q in (p + 1)..n {
            let mut u = unit(p);
            u[q] = 1.0;
            let cross = (hamiltonian(spec, &u, &zero)? - single[p] - single[q]) / spec.m0();
            k[(p, q)] = cross;
            k[(q, p)] = cross;
        }
    }
    Ok(k)
}

#[derive(Debug, Clone)]
pub struct ForceReport {
    /// Accelerations from the matrix form, `-Lambda^-1 K u`.
    pub matrix_force: Vec<f64>,
    /// Accelerations from `-dH/du_p / (m0 xi^2p)` by finite differences.
    pub gradient_force: Vec<f64>,
    /// max |difference| / max |matrix_force|.
    pub rel_error: f64,
}

/// Central-difference step, relative to the displacement scale.
const FD_STEP: f64 = 1e-6;

/// Compares the matrix equation of motion against a numerical gradient of the
/// energy (central differences with one Richardson refinement).
pub fn hamiltonian_force_check(spec: &ChainSpec, u: &[f64], tol: f64) -> Result<ForceReport> {
    let n = spec.n();
    if u.len() != n {
        return Err(ChainError::DimensionMismatch {
            expected: n,
            got: u.len(),
        });
    }
    let mats = build_matrices(spec)?;
    let ku = &mats.k_mat * DVector::from_column_slice(u);
    let matrix_force: Vec<f64> = (0..n).map(|p| -ku[p] / mats.lambda_diag[p]).collect();

    let zero = vec![0.0; n];
    let scale = u.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    let energy = |v: &[f64]| hamiltonian(spec, v, &zero);
    let mut gradient_force = Vec::with_capacity(n);
    let mut probe = u.to_vec();
    for p in 0..n {
        let mut central = |h: f64| -> Result<f64> {
            probe[p] = u[p] + h;
            let plus = energy(&probe)?;
            probe[p] = u[p] - h;
            let minus = energy(&probe)?;
            probe[p] = u[p];
            Ok((plus - minus) / (2.0 * h))
        };
        let h = FD_STEP * scale;
        let coarse = central(h)?;
        let fine = central(0.5 * h)?;
        let grad = (4.0 * fine - coarse) / 3.0;
        gradient_force.push(-grad / (spec.m0() * mats.lambda_diag[p]));
    }

    let reference = matrix_force.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let diff = matrix_force
        .iter()
        .zip(&gradient_force)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let rel_error = if reference > 0.0 { diff / reference } else { diff };
    if rel_error > tol {
        return Err(ChainError::VerificationFailed {
            check: "hamiltonian force",
            deviation: rel_error,
            tol,
        });
    }
    Ok(ForceReport {
        matrix_force,
        gradient_force,
        rel_error,
    })
}
