//! Reference computations shared by the integration tests. Nothing here
//! calls into the library's solvers; only parameters are read from it.

#![allow(dead_code)]

use graded_chain::ChainSpec;
use num_complex::Complex64;

/// `m_p u_p'' = -dV/du_p` straight from the spring energy
/// `V = m0/2 omega0^2 sum_p xi^(2p) (u_p - u_{p+1})^2` with `u_N = xi^-N u_0`.
pub fn accelerations(spec: &ChainSpec, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let xi = spec.xi();
    let w2 = spec.omega0().powi(2);
    let wrap = xi.powi(-(n as i32));
    let stiff = |p: usize| w2 * xi.powi(2 * p as i32);
    let mut force = vec![0.0; n];
    for p in 0..n {
        let next = if p + 1 < n { u[p + 1] } else { wrap * u[0] };
        let tension = stiff(p) * (u[p] - next);
        force[p] -= tension;
        if p + 1 < n {
            force[p + 1] += tension;
        } else {
            force[0] += wrap * tension;
        }
    }
    (0..n).map(|p| force[p] / xi.powi(2 * p as i32)).collect()
}

/// Classical fourth-order Runge-Kutta; returns `(u, v)` at every `record`-th step.
pub fn rk4(spec: &ChainSpec, u0: &[f64], v0: &[f64], dt: f64, steps: usize, record: usize) -> Vec<(f64, Vec<f64>, Vec<f64>)> {
    let axpy = |a: &[f64], s: f64, b: &[f64]| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
    let mut u = u0.to_vec();
    let mut v = v0.to_vec();
    let mut out = vec![(0.0, u.clone(), v.clone())];
    for step in 1..=steps {
        let k1u = v.clone();
        let k1v = accelerations(spec, &u);
        let u2 = axpy(&u, 0.5 * dt, &k1u);
        let k2u = axpy(&v, 0.5 * dt, &k1v);
        let k2v = accelerations(spec, &u2);
        let u3 = axpy(&u, 0.5 * dt, &k2u);
        let k3u = axpy(&v, 0.5 * dt, &k2v);
        let k3v = accelerations(spec, &u3);
        let u4 = axpy(&u, dt, &k3u);
        let k4u = axpy(&v, dt, &k3v);
        let k4v = accelerations(spec, &u4);
        for i in 0..u.len() {
            u[i] += dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        if step % record == 0 {
            out.push((step as f64 * dt, u.clone(), v.clone()));
        }
    }
    out
}

/// Finite-ring resolvent `(L - z^2)^-1` at index distance `0 <= d <= N`, as the
/// image sum `sum_j g(|d + j N|)` of the infinite-chain residue form, summed in
/// closed form. Needs the root `|w| < 1`, i.e. `z` off the real band.
pub fn ring_by_images(spec: &ChainSpec, z: Complex64, d: usize) -> Complex64 {
    let xi = spec.xi();
    let w2 = spec.omega0().powi(2);
    let a = Complex64::from((1.0 + xi * xi) / (2.0 * xi)) - z * z * xi / (2.0 * w2);
    let mut s = (a * a - 1.0).sqrt();
    let mut w = a - s;
    if w.norm() > 1.0 {
        s = -s;
        w = a - s;
    }
    // sum_j w^|d + jN| = (w^d + w^(N-d)) / (1 - w^N) for 0 <= d <= N
    let n = spec.n() as u32;
    let d = d as u32;
    let images = (w.powu(d) + w.powu(n - d)) / (1.0 - w.powu(n));
    images * xi / (2.0 * w2) / s
}

/// Plain spectral sum over the Bloch modes, written out independently.
pub fn ring_by_modes(spec: &ChainSpec, z: Complex64, d: usize) -> Complex64 {
    let n = spec.n();
    let xi = spec.xi();
    let w2 = spec.omega0().powi(2);
    (0..n)
        .map(|m| {
            let k = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
            let lambda = w2 / (xi * xi) * (1.0 + xi * xi - 2.0 * xi * k.cos());
            Complex64::from_polar(1.0, k * d as f64) / (lambda - z * z)
        })
        .sum::<Complex64>()
        / n as f64
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
