//! The exponentially graded chain: parameters, the mass, stiffness and
//! symmetrized dynamic matrices, and the exact Bloch spectrum.
//!
//! Particle `p` carries mass `m0 * xi^(2p)` and is tied to particle `p + 1`
//! by a spring `m0 * xi^(2p) * omega0^2`. Indices wrap periodically in the
//! symmetrized coordinates `y_p = xi^p u_p`, which turns the whole problem
//! into a circulant one.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{positive, ChainError, Result};

/// Largest exponent we allow in `xi^e` before calling it an overflow.
pub(crate) const MAX_LN_SCALE: f64 = 700.0;

/// Upper limit on dense eigen-solves and inversions.
pub const DENSE_LIMIT: usize = 4096;

/// Default relative tolerance for spectrum comparisons.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// Default tolerance for Bloch-vector orthonormality.
pub const ORTHONORMALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChainSpec")]
pub struct ChainSpec {
    n: usize,
    xi: f64,
    omega0: f64,
    m0: f64,
}

#[derive(Deserialize)]
struct RawChainSpec {
    n: usize,
    xi: f64,
    omega0: f64,
    #[serde(default = "unit_mass")]
    m0: f64,
}

fn unit_mass() -> f64 {
    1.0
}

impl TryFrom<RawChainSpec> for ChainSpec {
    type Error = ChainError;

    fn try_from(raw: RawChainSpec) -> Result<Self> {
        ChainSpec::new(raw.n, raw.xi, raw.omega0, raw.m0)
    }
}

impl ChainSpec {
    pub fn new(n: usize, xi: f64, omega0: f64, m0: f64) -> Result<Self> {
        if n < 2 {
            return Err(ChainError::InvalidParameter {
                field: "n",
                reason: format!("need at least 2 particles, got {n}"),
            });
        }
        Ok(Self {
            n,
            xi: positive("xi", xi)?,
            omega0: positive("omega0", omega0)?,
            m0: positive("m0", m0)?,
        })
    }

    /// Chain with unit base mass.
    pub fn unit_mass(n: usize, xi: f64, omega0: f64) -> Result<Self> {
        Self::new(n, xi, omega0, 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    /// Same grading and stiffness, different particle count.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.xi, self.omega0, self.m0)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.xi == 1.0
    }

    pub fn band_edges(&self) -> BandEdges {
        band_edges(self)
    }

    /// `k_m = 2 pi m / N`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.n as f64
    }

    /// `lambda_m = omega_m^2` for Bloch index `m`.
    pub fn eigenvalue(&self, m: usize) -> f64 {
        dispersion_lambda(self.xi, self.omega0, self.wavenumber(m))
    }

    /// `omega0^2 / xi^2`, the common prefactor of the dynamic matrix.
    pub(crate) fn coupling_scale(&self) -> f64 {
        (self.omega0 / self.xi).powi(2)
    }

    /// `xi^e`, refusing results outside the floating range.
    pub(crate) fn grading_power(&self, exponent: i64) -> Result<f64> {
        if (exponent as f64 * self.xi.ln()).abs() > MAX_LN_SCALE {
            return Err(ChainError::GradingOverflow { exponent });
        }
        Ok(self.xi.powf(exponent as f64))
    }
}

/// Continuous dispersion `lambda(k) = (omega0/xi)^2 [(xi - cos k)^2 + sin^2 k]`.
pub fn dispersion_lambda(xi: f64, omega0: f64, k: f64) -> f64 {
    let (s, c) = k.sin_cos();
    (omega0 / xi).powi(2) * ((xi - c).powi(2) + s * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandEdges {
    /// Lowest eigenfrequency `(omega0/xi)|1 - xi|`.
    pub lower: f64,
    /// Debye frequency `(omega0/xi)(1 + xi)`.
    pub upper: f64,
}

impl BandEdges {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// `Omega_D^2 - Omega_0^2`, which equals `4 omega0^2 / xi`.
    pub fn squared_span(&self) -> f64 {
        self.upper * self.upper - self.lower * self.lower
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.lower && omega <= self.upper
    }
}

pub fn band_edges(spec: &ChainSpec) -> BandEdges {
    let scale = spec.omega0 / spec.xi;
    BandEdges {
        lower: scale * (1.0 - spec.xi).abs(),
        upper: scale * (1.0 + spec.xi),
    }
}

/// Mass matrix diagonal, stiffness matrix and the symmetrized dynamic matrix.
#[derive(Debug, Clone)]
pub struct ChainMatrices {
    /// Diagonal of the dimensionless mass matrix, `xi^(2p)`.
    pub lambda_diag: DVector<f64>,
    pub k_mat: DMatrix<f64>,
    pub l_mat: DMatrix<f64>,
}

impl ChainMatrices {
    pub fn lambda_mat(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.lambda_diag)
    }

    /// `Lambda^-1 K`, the (non-symmetric) dynamic matrix of the true displacements.
    pub fn true_dynamic_matrix(&self) -> DMatrix<f64> {
        let mut d = self.k_mat.clone();
        for (p, mut row) in d.row_iter_mut().enumerate() {
            row /= self.lambda_diag[p];
        }
        d
    }
}

/// Symmetric dynamic matrix `L` with periodic wrap of the neighbour indices.
///
/// For `N = 2` both neighbours of a site are the same particle, so the two
/// couplings add up on the off-diagonal.
pub fn dynamic_matrix(spec: &ChainSpec) -> DMatrix<f64> {
    let n = spec.n;
    let c = spec.coupling_scale();
    let mut l = DMatrix::zeros(n, n);
    for p in 0..n {
        l[(p, p)] += c * (1.0 + spec.xi * spec.xi);
        l[(p, (p + 1) % n)] -= c * spec.xi;
        l[(p, (p + n - 1) % n)] -= c * spec.xi;
    }
    l
}

/// Builds `Lambda`, `K` and `L`.
///
/// `K` is reconstructed as `Lambda^(1/2) L Lambda^(1/2)`, so its wrap entries
/// `K_{N-1,0}` and `K_{0,N-1}` carry the factor `xi^(N-1)`.
pub fn build_matrices(spec: &ChainSpec) -> Result<ChainMatrices> {
    let n = spec.n;
    let top = spec.grading_power(2 * (n as i64 - 1))?;
    debug_assert!(top.is_finite());
    let half: Vec<f64> = (0..n).map(|p| spec.xi.powi(p as i32)).collect();
    let l_mat = dynamic_matrix(spec);
    let k_mat = DMatrix::from_fn(n, n, |p, q| half[p] * l_mat[(p, q)] * half[q]);
    let lambda_diag = DVector::from_iterator(n, half.iter().map(|s| s * s));
    Ok(ChainMatrices {
        lambda_diag,
        k_mat,
        l_mat,
    })
}

/// `L y` without forming the matrix.
pub fn apply_dynamic_matrix(spec: &ChainSpec, y: &[f64]) -> Result<Vec<f64>> {
    let n = spec.n;
    if y.len() != n {
        return Err(ChainError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let c = spec.coupling_scale();
    let diag = c * (1.0 + spec.xi * spec.xi);
    let off = c * spec.xi;
    Ok((0..n)
        .map(|p| diag * y[p] - off * (y[(p + 1) % n] + y[(p + n - 1) % n]))
        .collect())
}

/// Bloch spectrum in mode order (`m = 0..N-1`), not sorted by frequency.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub wavenumbers: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub frequencies: Vec<f64>,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Normalized Bloch vector `v_p = e^{i k_m p} / sqrt(N)`.
    pub fn eigenvector(&self, m: usize) -> DVector<Complex64> {
        bloch_vector(self.len(), m)
    }

    /// All Bloch vectors as columns.
    pub fn eigenvector_matrix(&self) -> DMatrix<Complex64> {
        bloch_matrix(self.len())
    }
}

pub fn dispersion(spec: &ChainSpec) -> SpectrumResult {
    let wavenumbers: Vec<f64> = (0..spec.n).map(|m| spec.wavenumber(m)).collect();
    let eigenvalues: Vec<f64> = wavenumbers
        .iter()
        .map(|&k| dispersion_lambda(spec.xi, spec.omega0, k))
        .collect();
    let frequencies = eigenvalues.iter().map(|l| l.sqrt()).collect();
    SpectrumResult {
        wavenumbers,
        eigenvalues,
        frequencies,
    }
}

pub fn bloch_vector(n: usize, m: usize) -> DVector<Complex64> {
    let norm = (n as f64).sqrt().recip();
    DVector::from_fn(n, |p, _| {
        // reduce m*p mod n first so large products keep full phase accuracy
        let phase = 2.0 * PI * ((m * p) % n) as f64 / n as f64;
        Complex64::from_polar(norm, phase)
    })
}

pub fn bloch_matrix(n: usize) -> DMatrix<Complex64> {
    let norm = (n as f64).sqrt().recip();
    DMatrix::from_fn(n, n, |p, m| {
        let phase = 2.0 * PI * ((m * p) % n) as f64 / n as f64;
        Complex64::from_polar(norm, phase)
    })
}

/// How the spectrum of `Lambda^-1 K` was compared with that of `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMethod {
    /// General (non-symmetric) eigen-solve of `Lambda^-1 K`.
    Eigenvalues,
    /// Entrywise check of `Lambda^(1/2) (Lambda^-1 K) Lambda^(-1/2) = L`,
    /// used once the grading spread makes the eigen-solve unreliable.
    Transform,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimilarityCheck {
    pub method: SimilarityMethod,
    /// Deviation relative to `Omega_D^2`.
    pub deviation: f64,
}

/// Outcome of comparing the analytic spectrum with dense eigen-solves.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub n: usize,
    /// max |analytic - dense| over sorted eigenvalues of `L`, divided by `Omega_D^2`.
    pub max_rel_deviation: f64,
    pub max_abs_deviation: f64,
    /// `None` when `xi^(2(N-1))` does not fit in a double.
    pub similarity: Option<SimilarityCheck>,
}

/// Largest `xi^(N-1)` (or its inverse) for which the unbalanced
/// non-symmetric eigen-solve still resolves the spectrum.
const EIGEN_SPREAD_LIMIT: f64 = 1e9;

/// Checks the analytic eigenvalues against a dense symmetric eigen-solve of
/// `L` and checks that `Lambda^-1 K` carries the same spectrum.
pub fn verify_spectrum(spec: &ChainSpec, tol: f64) -> Result<SpectrumReport> {
    if spec.n > DENSE_LIMIT {
        return Err(ChainError::TooLarge {
            n: spec.n,
            max: DENSE_LIMIT,
        });
    }
    let scale = band_edges(spec).upper.powi(2);
    let analytic = dispersion(spec).sorted_eigenvalues();

    let mut dense: Vec<f64> = dynamic_matrix(spec)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    dense.sort_by(f64::total_cmp);
    let max_abs_deviation = max_abs_diff(&analytic, &dense);
    let max_rel_deviation = max_abs_deviation / scale;

    let similarity = match build_matrices(spec) {
        Ok(mats) => Some(similarity_check(spec, &mats, &analytic, scale)),
        Err(ChainError::GradingOverflow { .. }) => None,
        Err(e) => return Err(e),
    };

    let report = SpectrumReport {
        n: spec.n,
        max_rel_deviation,
        max_abs_deviation,
        similarity,
    };
    if report.max_rel_deviation > tol {
        return Err(ChainError::VerificationFailed {
            check: "spectrum of L",
            deviation: report.max_rel_deviation,
            tol,
        });
    }
    if let Some(sim) = report.similarity {
        if sim.deviation > tol {
            return Err(ChainError::VerificationFailed {
                check: "spectrum of Lambda^-1 K",
                deviation: sim.deviation,
                tol,
            });
        }
    }
    Ok(report)
}

fn similarity_check(
    spec: &ChainSpec,
    mats: &ChainMatrices,
    analytic: &[f64],
    scale: f64,
) -> SimilarityCheck {
    let n = spec.n;
    let dynamic = mats.true_dynamic_matrix();
    let spread = (spec.xi.ln().abs() * (n - 1) as f64).exp();
    if spread <= EIGEN_SPREAD_LIMIT {
        // Same spectrum either way; the Schur iteration copes better when the
        // large wrap entry sits in the upper triangle.
        let oriented = if spec.xi >= 1.0 {
            dynamic
        } else {
            dynamic.transpose()
        };
        let eig = oriented.complex_eigenvalues();
        let mut re: Vec<f64> = eig.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        let imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        return SimilarityCheck {
            method: SimilarityMethod::Eigenvalues,
            deviation: max_abs_diff(analytic, &re).max(imag) / scale,
        };
    }
    let half: Vec<f64> = mats.lambda_diag.iter().map(|x| x.sqrt()).collect();
    let mut worst = 0.0_f64;
    for p in 0..n {
        for q in 0..n {
            let back = half[p] * dynamic[(p, q)] / half[q];
            worst = worst.max((back - mats.l_mat[(p, q)]).abs());
        }
    }
    SimilarityCheck {
        method: SimilarityMethod::Transform,
        deviation: worst / scale,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Total energy in the original displacements,
/// `H = m0/2 sum_p xi^(2p) [ udot_p^2 + omega0^2 (u_p - u_{p+1})^2 ]`.
///
/// The neighbour of the last particle is `u_N = xi^-N u_0`, the continuation
/// implied by periodic `y_p = xi^p u_p`.
pub fn hamiltonian(spec: &ChainSpec, u: &[f64], u_dot: &[f64]) -> Result<f64> {
    let n = spec.n;
    for v in [u, u_dot] {
        if v.len() != n {
            return Err(ChainError::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    // Work with xi^p u_p to keep every factor bounded.
    let wrap = spec.grading_power(-(n as i64))?;
    let w2 = spec.omega0 * spec.omega0;
    let mut total = 0.0;
    let mut scale = 1.0;
    for p in 0..n {
        let next = if p + 1 < n { u[p + 1] } else { wrap * u[0] };
        let stretch = u[p] - next;
        total += scale * scale * (u_dot[p] * u_dot[p] + w2 * stretch * stretch);
        scale *= spec.xi;
    }
    Ok(0.5 * spec.m0 * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(n: usize, xi: f64, omega0: f64) -> ChainSpec {
        ChainSpec::unit_mass(n, xi, omega0).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ChainSpec::unit_mass(1, 2.0, 1.0).is_err());
        assert!(ChainSpec::unit_mass(4, 0.0, 1.0).is_err());
        assert!(ChainSpec::unit_mass(4, -1.0, 1.0).is_err());
        assert!(ChainSpec::unit_mass(4, 2.0, 0.0).is_err());
        assert!(ChainSpec::new(4, 2.0, 1.0, -3.0).is_err());
        assert!(ChainSpec::unit_mass(4, f64::NAN, 1.0).is_err());
        match ChainSpec::unit_mass(4, 2.0, -1.0) {
            Err(ChainError::InvalidParameter { field, .. }) => assert_eq!(field, "omega0"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn homogeneous_matrix() {
        let l = dynamic_matrix(&spec(3, 1.0, 1.0));
        for p in 0..3 {
            assert_eq!(l[(p, p)], 2.0);
            assert_eq!(l[(p, (p + 1) % 3)], -1.0);
            assert_eq!(l[(p, (p + 2) % 3)], -1.0);
        }
    }

    #[test]
    fn graded_matrix_entries() {
        let l = dynamic_matrix(&spec(3, 2.0, 1.0));
        for p in 0..3 {
            assert_relative_eq!(l[(p, p)], 1.25, epsilon = 1e-15);
            assert_relative_eq!(l[(p, (p + 1) % 3)], -0.5, epsilon = 1e-15);
            assert_relative_eq!(l[(p, (p + 2) % 3)], -0.5, epsilon = 1e-15);
        }
        let l = dynamic_matrix(&spec(4, 0.5, 2.0));
        assert_relative_eq!(l[(0, 0)], 20.0, epsilon = 1e-13);
        assert_eq!(l, l.transpose());
    }

    #[test]
    fn two_particle_wrap_doubles_coupling() {
        let l = dynamic_matrix(&spec(2, 2.0, 1.0));
        assert_eq!(l[(0, 0)], 1.25);
        assert_eq!(l[(0, 1)], -1.0);
        assert_eq!(l[(1, 0)], -1.0);
    }

    #[test]
    fn stiffness_reconstruction() {
        let s = spec(7, 1.7, 1.3);
        let m = build_matrices(&s).unwrap();
        let inv_half = m.lambda_diag.map(|x| x.sqrt().recip());
        for p in 0..7 {
            for q in 0..7 {
                let back = inv_half[p] * m.k_mat[(p, q)] * inv_half[q];
                assert_relative_eq!(back, m.l_mat[(p, q)], max_relative = 1e-15, epsilon = 1e-300);
            }
        }
        // interior K rows agree with the unwrapped stiffness expression
        let w2 = s.omega0 * s.omega0;
        for p in 1..6 {
            let x2p = s.xi.powi(2 * p as i32);
            assert_relative_eq!(m.k_mat[(p, p)], x2p * w2 * (1.0 + s.xi.powi(-2)), max_relative = 1e-14);
            assert_relative_eq!(m.k_mat[(p, p + 1)], -x2p * w2, max_relative = 1e-14);
            assert_relative_eq!(m.k_mat[(p, p - 1)], -x2p * w2 / (s.xi * s.xi), max_relative = 1e-14);
        }
        let d = m.true_dynamic_matrix();
        assert!((&d - d.transpose()).abs().max() > 1e-3);
    }

    #[test]
    fn build_matrices_guards_overflow() {
        let s = spec(2000, 2.0, 1.0);
        assert!(matches!(
            build_matrices(&s),
            Err(ChainError::GradingOverflow { .. })
        ));
    }

    #[test]
    fn band_edge_examples() {
        let e = band_edges(&spec(8, 1.0, 1.0));
        assert_eq!((e.lower, e.upper), (0.0, 2.0));
        let e = band_edges(&spec(8, 2.0, 1.0));
        assert_relative_eq!(e.lower, 0.5);
        assert_relative_eq!(e.upper, 1.5);
        let e = band_edges(&spec(8, 10.0, 1.0));
        assert_relative_eq!(e.lower, 0.9, epsilon = 1e-15);
        assert_relative_eq!(e.upper, 1.1, epsilon = 1e-15);
        assert_relative_eq!(e.width(), 0.2, epsilon = 1e-15);
        assert_relative_eq!(e.squared_span(), 4.0 / 10.0, epsilon = 1e-15);
    }

    #[test]
    fn dense_band_edges_match_at_n128() {
        let s = spec(128, 2.0, 1.0);
        let mut ev: Vec<f64> = dynamic_matrix(&s).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert_relative_eq!(ev[0].sqrt(), 0.5, epsilon = 1e-10);
        assert_relative_eq!(ev[127].sqrt(), 1.5, epsilon = 1e-3);
    }

    #[test]
    fn dispersion_examples() {
        let r = dispersion(&spec(2, 2.0, 1.0));
        assert_relative_eq!(r.eigenvalues[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(r.eigenvalues[1], 2.25, epsilon = 1e-15);
        assert_relative_eq!(r.frequencies[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.frequencies[1], 1.5, epsilon = 1e-15);

        let r = dispersion(&spec(4, 1.0, 1.0));
        let expected = [0.0, 2.0, 4.0, 2.0];
        for (got, want) in r.eigenvalues.iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-14);
        }
        for n in [2, 3, 17, 64] {
            let r = dispersion(&spec(n, 1.0, 1.3));
            assert_eq!(r.eigenvalues[0], 0.0);
        }
    }

    #[test]
    fn bloch_vectors_are_orthonormal_and_complete() {
        for n in [2, 5, 16] {
            let v = bloch_matrix(n);
            let id = DMatrix::<Complex64>::identity(n, n);
            let gram = v.adjoint() * &v;
            let comp = &v * v.adjoint();
            assert!((gram - &id).iter().all(|z| z.norm() < ORTHONORMALITY_TOL));
            assert!((comp - &id).iter().all(|z| z.norm() < ORTHONORMALITY_TOL));
        }
    }

    #[test]
    fn bloch_vectors_diagonalize_l() {
        let s = spec(9, 0.7, 1.1);
        let l = dynamic_matrix(&s).map(|x| Complex64::new(x, 0.0));
        let r = dispersion(&s);
        for m in 0..9 {
            let v = r.eigenvector(m);
            let lv = &l * &v;
            let resid = (lv - v * Complex64::from(r.eigenvalues[m])).norm();
            assert!(resid < 1e-13, "m = {m}: {resid}");
        }
    }

    #[test]
    fn verify_spectrum_examples() {
        let r = verify_spectrum(&spec(64, 2.0, 1.0), 1e-10).unwrap();
        assert_eq!(r.similarity.unwrap().method, SimilarityMethod::Transform);
        let r = verify_spectrum(&spec(2, 1.0, 1.0), 1e-12).unwrap();
        assert!(r.max_abs_deviation < 1e-12);
        let mut ev = dispersion(&spec(2, 1.0, 1.0)).sorted_eigenvalues();
        ev.dedup();
        assert_eq!(ev, vec![0.0, 4.0]);
        verify_spectrum(&spec(128, 0.3, 1.0), 1e-9).unwrap();
        for (n, xi) in [(8, 2.0), (8, 0.3), (28, 2.0), (128, 0.9), (18, 3.0)] {
            let r = verify_spectrum(&spec(n, xi, 1.0), 1e-9).unwrap();
            let sim = r.similarity.unwrap();
            assert_eq!(sim.method, SimilarityMethod::Eigenvalues, "n={n} xi={xi}");
            assert!(sim.deviation < 1e-9);
        }
        let r = verify_spectrum(&spec(600, 2.0, 1.0), 1e-9);
        assert!(r.map(|r| r.similarity.is_none()).unwrap_or(false));
    }

    #[test]
    fn verify_spectrum_guards_size() {
        assert!(matches!(
            verify_spectrum(&spec(DENSE_LIMIT + 1, 2.0, 1.0), 1e-9),
            Err(ChainError::TooLarge { .. })
        ));
    }

    #[test]
    fn limiting_cases() {
        for xi in [10.0, 100.0, 1000.0] {
            let s = spec(512, xi, 1.0);
            let f = dispersion(&s).frequencies;
            let width = f.iter().copied().fold(f64::MIN, f64::max)
                - f.iter().copied().fold(f64::MAX, f64::min);
            assert!(width >= 0.0 && width <= 2.0 / xi * (1.0 + 1e-12));
            assert_relative_eq!(width, 2.0 / xi, max_relative = 1e-4);
        }
        for xi in [0.1, 0.01] {
            let e = band_edges(&spec(8, xi, 1.0));
            assert_relative_eq!(e.width(), 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn hamiltonian_matches_quadratic_form() {
        let s = spec(6, 1.4, 0.8);
        let u = [0.3, -0.2, 0.5, 0.1, -0.7, 0.25];
        let zero = [0.0; 6];
        let h = hamiltonian(&s, &u, &zero).unwrap();
        let y: Vec<f64> = u.iter().enumerate().map(|(p, x)| s.xi.powi(p as i32) * x).collect();
        let ly = apply_dynamic_matrix(&s, &y).unwrap();
        let quad: f64 = y.iter().zip(&ly).map(|(a, b)| a * b).sum();
        assert_relative_eq!(h, 0.5 * quad, max_relative = 1e-12);
    }
}
