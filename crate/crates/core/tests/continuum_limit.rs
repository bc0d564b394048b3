use std::f64::consts::PI;

use graded_chain::chain::apply_dynamic_matrix;
use graded_chain::continuum::{
    continuum_greens, continuum_greens_in, graded_residual, helmholtz_residual, FdGrid, ResidualReport,
};
use graded_chain::oracle::greens_spectral_sum;
use graded_chain::{ContinuumMode, ContinuumSpec};

fn order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

/// Max over sites of `|(L y)_p + Omega^2 (y'' - beta^2 y)(x_p)|` for a smooth periodic `y`.
fn operator_error(c: &ContinuumSpec, n: usize) -> f64 {
    let h = c.length() / n as f64;
    let k = 2.0 * PI * 3.0 / c.length();
    let y: Vec<f64> = (0..n).map(|p| (k * p as f64 * h).sin()).collect();
    let ly = apply_dynamic_matrix(&c.chain(n).unwrap(), &y).unwrap();
    let w2 = c.big_omega().powi(2);
    let b2 = c.beta().powi(2);
    (0..n)
        .map(|p| (ly[p] - w2 * (k * k + b2) * y[p]).abs())
        .fold(0.0, f64::max)
}

#[test]
fn lattice_operator_approaches_klein_gordon() {
    // The leading error is the overall factor 1/xi = e^{-beta h}, first order in h;
    // without grading the three-point stencil is second order.
    let graded = ContinuumSpec::new(1.0, 1.5, 1.0, 1.0).unwrap();
    let flat = ContinuumSpec::new(1.0, 0.0, 1.0, 1.0).unwrap();
    for n in [64, 128, 256] {
        let g = order(operator_error(&graded, n), operator_error(&graded, 2 * n), 2.0);
        assert!((0.9..1.3).contains(&g), "graded order {g}");
        let f = order(operator_error(&flat, n), operator_error(&flat, 2 * n), 2.0);
        assert!((1.9..2.2).contains(&f), "ungraded order {f}");
    }
}

#[test]
fn periodic_ring_converges_to_periodic_line() {
    let c = ContinuumSpec::new(1.0, 2.0, 1.0, 1.0).unwrap();
    let omega = 1.0;
    let x = 0.375;
    let exact = continuum_greens_in(&c, omega, x, ContinuumMode::Periodic { images: 50 })
        .unwrap()
        .re;
    let mut errors = Vec::new();
    for n in [64usize, 128, 256, 512] {
        let h = 1.0 / n as f64;
        let chain = c.chain(n).unwrap();
        let d = (x / h).round() as usize;
        let ring = greens_spectral_sum(&chain, omega, 0.0, 0, d).unwrap().re / h;
        errors.push((ring - exact).abs());
    }
    for pair in errors.windows(2) {
        assert!(order(pair[0], pair[1], 2.0) >= 0.9, "{errors:?}");
    }
}

#[test]
fn finite_difference_residual_is_second_order() {
    let c = ContinuumSpec::new(1.0, 1.0, 1.0, 1.0).unwrap();
    for omega in [0.5, 2.0] {
        let coarse = FdGrid {
            spacing: 1.0 / 256.0,
            extent: 0.5,
            skip: 4,
        };
        let fine = FdGrid {
            spacing: 1.0 / 512.0,
            skip: 8,
            ..coarse
        };
        let a = helmholtz_residual(&c, omega, &coarse).unwrap();
        let b = helmholtz_residual(&c, omega, &fine).unwrap();
        assert!(order(a.max_residual, b.max_residual, 2.0) > 1.8);
        assert!(order(a.jump_error, b.jump_error, 2.0) > 1.8);
        let ta = graded_residual(&c, omega, &coarse).unwrap();
        let tb = graded_residual(&c, omega, &fine).unwrap();
        assert!(order(ta.max_residual, tb.max_residual, 2.0) > 1.8);
    }
}

#[test]
fn residual_check_rejects_a_wrong_function() {
    // the other line's Green's function decays at the wrong rate for this operator
    let c = ContinuumSpec::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let other = ContinuumSpec::new(1.0, 1.3, 1.0, 1.0).unwrap();
    let grid = FdGrid::for_spec(&c);
    let good = helmholtz_residual(&c, 0.5, &grid).unwrap();
    assert!(good.verify(2.0, 1e-5).is_ok());

    let s = grid.spacing;
    let g = |x: f64| continuum_greens(&other, 0.5, x).unwrap().re;
    let q = 0.25 - 1.0;
    let worst = (4..1024)
        .map(|i| {
            let x = i as f64 * s;
            ((g(x + s) - 2.0 * g(x) + g(x - s)) / (s * s) + q * g(x)).abs()
        })
        .fold(0.0, f64::max);
    let bad = ResidualReport {
        max_residual: worst,
        ..good
    };
    assert!(bad.verify(2.0, 1e-5).is_err());
}
