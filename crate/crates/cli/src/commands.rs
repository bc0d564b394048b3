use std::f64::consts::PI;

use graded_chain::continuum::{
    classify as classify_line, continuum_greens_in, continuum_mode_density, density_convergence,
    dispersion_convergence, greens_convergence, ConvergenceStudy,
};
use graded_chain::density::{homogeneous_density, mode_density_from_greens, sample_curve, QuadConfig};
use graded_chain::greens::{greens_at_complex, greens_damped, greens_ring};
use graded_chain::oracle::{greens_spectral_sum, hamiltonian_force_check, OracleConfig};
use graded_chain::timedomain::{displacement_at, evolve_velocity};
use graded_chain::{
    dispersion, evolve, fit_modal_coefficients, greens_closed_form, normalization_integral, total_energy,
    verify_spectrum, ChainError, ChainSpec, ContinuumMode, DiscretizationLadder, FrequencyQuery,
    IndexDistance, InitialConditions, Regime,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::config::{
    ContinuumArgs, DensityArgs, EvolveArgs, GreensArgs, LineMode, Preset, RunConfig, SpectrumArgs, VerifyArgs,
};
use crate::output::{Cell, Report};
use crate::CliError;

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    use crate::config::Command::*;
    match &config.command {
        Spectrum(a) => spectrum(a),
        Greens(a) => greens(a),
        Density(a) => density(a),
        Continuum(a) => continuum(a),
        Evolve(a) => evolve_run(a, config.seed),
        Verify(a) => verify(a, config.seed),
    }
}

fn chain_metadata(report: &mut Report, spec: &ChainSpec) {
    let edges = spec.band_edges();
    report.meta("n", spec.n());
    report.meta("xi", spec.xi());
    report.meta("omega0", spec.omega0());
    report.meta("m0", spec.m0());
    report.meta("band_lower", edges.lower);
    report.meta("band_upper", edges.upper);
}

fn check_tol(field: &'static str, tol: f64) -> Result<f64, CliError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(CliError::invalid(field, format!("must be finite and > 0, got {tol}")))
    }
}

fn spectrum(a: &SpectrumArgs) -> Result<Report, CliError> {
    let spec = a.chain.spec()?;
    let s = dispersion(&spec);
    let mut report = Report::new(["m", "k", "omega"]);
    chain_metadata(&mut report, &spec);
    for m in 0..spec.n() {
        report.push(vec![m.into(), s.wavenumbers[m].into(), s.frequencies[m].into()]);
    }
    let lo = s.frequencies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.frequencies.iter().copied().fold(0.0, f64::max);
    report.summarize("omega_min", lo);
    report.summarize("omega_max", hi);
    Ok(report)
}

/// `8 (Omega_D - Omega_0) / N`: damps the ring's image terms to about `1e-6`.
fn ring_damping(spec: &ChainSpec) -> f64 {
    8.0 * spec.band_edges().width() / spec.n() as f64
}

/// `|w|^(N-d)`, the size of the image terms separating the finite ring from
/// the infinite chain at `omega + i epsilon`.
fn ring_correction(spec: &ChainSpec, omega: f64, epsilon: f64, d: usize) -> f64 {
    let z = Complex64::new(omega, epsilon);
    let w = (greens_at_complex(spec, z, 1) / greens_at_complex(spec, z, 0)).norm();
    ((spec.n() - d) as f64 * w.ln()).exp()
}

/// Damping and tolerance for comparing one row with the finite-ring spectral sum.
///
/// Undamped where the ring correction is negligible; otherwise both sides
/// are evaluated at `omega + i epsilon` with [`ring_damping`]. `None` when
/// neither makes the correction small, as just below the band of a short ring.
fn oracle_setting(spec: &ChainSpec, a: &GreensArgs, omega: f64, regime: Regime, d: usize) -> Option<(f64, f64)> {
    if regime != Regime::InBand && ring_correction(spec, omega, 0.0, d) < 0.1 * a.tol {
        return Some((0.0, a.tol));
    }
    let eps = ring_damping(spec);
    (ring_correction(spec, omega, eps, d) < 0.1 * a.band_tol).then_some((eps, a.band_tol))
}

fn greens(a: &GreensArgs) -> Result<Report, CliError> {
    let spec = a.chain.spec()?;
    let n = spec.n();
    for (field, idx) in [("p", a.p), ("q", a.q)] {
        if idx >= n {
            return Err(CliError::invalid(field, format!("site index must be below N = {n}, got {idx}")));
        }
    }
    check_tol("tol", a.tol)?;
    check_tol("band_tol", a.band_tol)?;
    let grid = a.grid.points()?;
    let d = IndexDistance::MinimumImage.distance(n, a.p, a.q);
    let true_factor = spec.xi().powf(a.q as f64 - a.p as f64);
    if a.true_displacement && !(true_factor.is_finite() && true_factor > 0.0) {
        return Err(CliError::invalid(
            "true_displacement",
            format!("xi^(q-p) = {true_factor} is outside the floating-point range"),
        ));
    }

    let mut columns = vec!["omega", "regime", "re_g", "im_g"];
    if a.true_displacement {
        columns.extend(["re_g_true", "im_g_true"]);
    }
    if a.verify {
        columns.extend(["oracle_epsilon", "re_oracle", "im_oracle", "deviation", "check"]);
    }
    let mut report = Report::new(columns);
    chain_metadata(&mut report, &spec);
    report.meta("p", a.p);
    report.meta("q", a.q);
    report.meta("distance", d);
    if a.verify {
        report.meta("oracle", "finite-ring spectral sum");
    }

    let (mut max_dev, mut singular, mut unchecked) = (0.0_f64, 0usize, 0usize);
    let mut worst: Option<(f64, f64, f64)> = None;
    for &omega in &grid {
        let query = FrequencyQuery::new(omega)?;
        let eval = match greens_closed_form(&spec, &query, 0, d) {
            Ok(e) => e,
            Err(ChainError::BandEdgeSingularity { .. }) => {
                singular += 1;
                let mut row = vec![omega.into(), "singular".into(), Cell::Empty, Cell::Empty];
                if a.true_displacement {
                    row.extend([Cell::Empty, Cell::Empty]);
                }
                if a.verify {
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, "singular".into()]);
                }
                report.push(row);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let g = eval.value;
        let mut row = vec![omega.into(), eval.regime.regime.label().into(), g.re.into(), g.im.into()];
        if a.true_displacement {
            row.extend([(g.re * true_factor).into(), (g.im * true_factor).into()]);
        }
        if a.verify {
            let Some((eps, tol)) = oracle_setting(&spec, a, omega, eval.regime.regime, d) else {
                unchecked += 1;
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, "unchecked".into()]);
                report.push(row);
                continue;
            };
            let oracle = greens_spectral_sum(&spec, omega, eps, a.p, a.q)?;
            let (reference, diag) = if eps == 0.0 {
                (g, greens_closed_form(&spec, &query, 0, 0)?.value)
            } else {
                (greens_damped(&spec, omega, eps, 0, d)?, greens_damped(&spec, omega, eps, 0, 0)?)
            };
            let deviation = (reference - oracle).norm() / diag.norm();
            max_dev = max_dev.max(deviation);
            let status = if deviation > tol {
                if worst.is_none_or(|w: (f64, f64, f64)| deviation > w.1) {
                    worst = Some((omega, deviation, tol));
                }
                "fail"
            } else {
                "pass"
            };
            row.extend([eps.into(), oracle.re.into(), oracle.im.into(), deviation.into(), status.into()]);
        }
        report.push(row);
    }
    report.summarize("rows", grid.len());
    report.summarize("singular_rows", singular);
    if a.verify {
        report.summarize("unchecked_rows", unchecked);
        report.summarize("max_deviation", max_dev);
        if let Some((omega, dev, tol)) = worst {
            report.fail(format!("greens: deviation {dev:e} at omega = {omega} exceeds tolerance {tol:e}"));
        }
    }
    Ok(report)
}

fn density(a: &DensityArgs) -> Result<Report, CliError> {
    let spec = a.chain.spec()?;
    check_tol("tol", a.tol)?;
    let curve = sample_curve(&spec, a.count, a.margin)?;
    let homogeneous = spec.is_homogeneous();
    let mut columns = vec!["omega", "rho", "rho_greens"];
    if homogeneous {
        columns.push("rho_homogeneous");
    }
    let mut report = Report::new(columns);
    chain_metadata(&mut report, &spec);
    report.meta("margin", a.margin);
    for (&omega, &rho) in curve.omegas.iter().zip(&curve.rho) {
        let mut row = vec![omega.into(), rho.into(), mode_density_from_greens(&spec, omega, 0.0)?.into()];
        if homogeneous {
            row.push(homogeneous_density(spec.n(), curve.band.upper, omega).into());
        }
        report.push(row);
    }
    let norm = normalization_integral(&spec, &QuadConfig::default())?;
    let deviation = (norm.value - spec.n() as f64).abs();
    report.summarize("integral", norm.value);
    report.summarize("deviation", deviation);
    report.summarize("error_estimate", norm.error_estimate);
    report.summarize("evaluations", norm.evaluations);
    if deviation > a.tol {
        report.fail(format!(
            "density: normalization deviation {deviation:e} exceeds tolerance {:e}",
            a.tol
        ));
    }
    Ok(report)
}

const CONTINUUM_COLUMNS: [&str; 14] = [
    "section",
    "quantity",
    "n",
    "h",
    "discrete",
    "continuum",
    "error",
    "observed_order",
    "omega",
    "x",
    "regime",
    "re_g",
    "im_g",
    "rho",
];

fn study_rows(report: &mut Report, section: &str, study: &ConvergenceStudy, omega: Option<f64>) {
    for r in &study.rows {
        let mut row = vec![
            section.into(),
            study.quantity.as_str().into(),
            r.n.into(),
            r.h.into(),
            r.discrete.into(),
            r.continuum.into(),
            r.error.into(),
            r.observed_order.into(),
            omega.into(),
        ];
        row.resize(CONTINUUM_COLUMNS.len(), Cell::Empty);
        report.push(row);
    }
}

fn continuum(a: &ContinuumArgs) -> Result<Report, CliError> {
    let cspec = a.spec()?;
    if !(a.min_order.is_finite()) {
        return Err(CliError::invalid("min_order", "must be finite"));
    }
    let mode = match a.mode {
        LineMode::Infinite => ContinuumMode::Infinite,
        LineMode::Periodic => ContinuumMode::Periodic { images: a.images },
    };
    let edge = cspec.lower_edge();
    let omegas = if a.omegas.is_empty() {
        vec![if edge > 0.0 { 0.5 * edge } else { cspec.big_omega() }]
    } else {
        a.omegas.clone()
    };
    let ladder = DiscretizationLadder::powers_of_two(cspec, a.n_start, a.rungs)?;

    let mut report = Report::new(CONTINUUM_COLUMNS);
    report.meta("length", cspec.length());
    report.meta("beta", cspec.beta());
    report.meta("big_omega", cspec.big_omega());
    report.meta("rho0", cspec.rho0());
    report.meta("lower_edge", edge);
    report.meta("mode", if a.mode == LineMode::Infinite { "infinite" } else { "periodic" });

    let mut gated = vec![dispersion_convergence(&ladder, a.mode_index)?];
    study_rows(&mut report, "dispersion", &gated[0], None);
    for &omega in &omegas {
        let study = greens_convergence(&ladder, omega, a.x, mode)?;
        study_rows(&mut report, "greens", &study, Some(omega));
        gated.push(study);
    }
    let density_omega = edge + cspec.big_omega();
    let dens = density_convergence(&ladder, density_omega)?;
    study_rows(&mut report, "density", &dens, Some(density_omega));

    let omega = omegas[0];
    let regime = classify_line(&cspec, omega)?.label();
    let x_max = a.sample_max.unwrap_or(0.5 * cspec.length());
    if !(x_max.is_finite() && x_max >= 0.0) {
        return Err(CliError::invalid("sample_max", format!("must be finite and >= 0, got {x_max}")));
    }
    if a.samples < 2 {
        return Err(CliError::invalid("samples", format!("need at least 2, got {}", a.samples)));
    }
    let steps = (a.samples - 1) as f64;
    for i in 0..a.samples {
        let x = x_max * i as f64 / steps;
        let g = continuum_greens_in(&cspec, omega, x, mode)?;
        let mut row = vec![Cell::from("greens_line"), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty];
        row.extend([Cell::Empty, Cell::Empty, Cell::Empty, omega.into(), x.into(), regime.into()]);
        row.extend([g.re.into(), g.im.into(), Cell::Empty]);
        report.push(row);
    }
    // Density samples above the edge, which is itself singular when beta > 0.
    let span = 4.0 * cspec.big_omega();
    for i in 1..=a.samples {
        let omega = edge + span * i as f64 / a.samples as f64;
        let rho = continuum_mode_density(&cspec, omega)?;
        let mut row = vec![Cell::from("density_line"), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty];
        row.extend([Cell::Empty, Cell::Empty, Cell::Empty, omega.into(), Cell::Empty, "i".into()]);
        row.extend([Cell::Empty, Cell::Empty, rho.into()]);
        report.push(row);
    }

    let min_order = gated
        .iter()
        .filter_map(ConvergenceStudy::min_order)
        .fold(f64::INFINITY, f64::min);
    if min_order.is_finite() {
        report.summarize("min_observed_order", min_order);
        if min_order < a.min_order {
            report.fail(format!(
                "continuum: observed order {min_order:.4} is below the required {}",
                a.min_order
            ));
        }
    }
    if let Some(order) = dens.min_order() {
        report.summarize("density_min_observed_order", order);
    }
    Ok(report)
}

#[derive(Deserialize)]
struct InitialFile {
    u0: Vec<f64>,
    #[serde(default)]
    v0: Option<Vec<f64>>,
}

fn initial_conditions(a: &EvolveArgs, spec: &ChainSpec, seed: u64) -> Result<InitialConditions, CliError> {
    if !a.amplitude.is_finite() {
        return Err(CliError::invalid("amplitude", "must be finite"));
    }
    let ic = if let Some(path) = &a.initial {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid("initial", format!("cannot read {}: {e}", path.display())))?;
        let file: InitialFile = serde_json::from_str(&text)
            .map_err(|e| CliError::invalid("initial", format!("{}: {e}", path.display())))?;
        let v0 = file.v0.unwrap_or_else(|| vec![0.0; file.u0.len()]);
        InitialConditions::new(file.u0, v0)?
    } else {
        match a.preset {
            Preset::SingleMode => InitialConditions::standing_mode(spec, a.mode_index, a.amplitude)?,
            Preset::Pulse => InitialConditions::pulse(spec, a.site, a.amplitude)?,
            Preset::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let amp = a.amplitude.abs();
                let mut draw = || (0..spec.n()).map(|_| amp * rng.gen_range(-1.0..=1.0)).collect::<Vec<f64>>();
                let u0 = draw();
                let v0 = draw();
                InitialConditions::new(u0, v0)?
            }
        }
    };
    if ic.len() != spec.n() {
        return Err(CliError::invalid(
            "initial",
            format!("expected {} displacements, got {}", spec.n(), ic.len()),
        ));
    }
    Ok(ic)
}

/// Ten periods of the slowest oscillating mode.
fn default_t_max(spec: &ChainSpec) -> f64 {
    let floor = 1e-9 * spec.band_edges().upper;
    let slowest = dispersion(spec)
        .frequencies
        .into_iter()
        .filter(|&w| w > floor)
        .fold(f64::INFINITY, f64::min);
    if slowest.is_finite() {
        20.0 * PI / slowest
    } else {
        1.0
    }
}

fn evolve_run(a: &EvolveArgs, seed: u64) -> Result<Report, CliError> {
    let spec = a.chain.spec()?;
    check_tol("tol", a.tol)?;
    let ic = initial_conditions(a, &spec, seed)?;
    let t_max = a.t_max.unwrap_or_else(|| default_t_max(&spec));
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(CliError::invalid("t_max", format!("must be finite and > 0, got {t_max}")));
    }
    if a.steps == 0 {
        return Err(CliError::invalid("steps", "need at least one step"));
    }
    let coeffs = fit_modal_coefficients(&spec, &ic)?;
    let n = spec.n();

    let mut columns = vec!["t".to_string()];
    columns.extend((0..n).map(|p| format!("u_{p}")));
    columns.push("energy".into());
    let mut report = Report::new(columns);
    chain_metadata(&mut report, &spec);
    report.meta("t_max", t_max);
    report.meta("steps", a.steps);

    let e0 = total_energy(&spec, &ic.u0, &ic.v0)?;
    let mut drift = 0.0_f64;
    for i in 0..=a.steps {
        let t = t_max * i as f64 / a.steps as f64;
        let u = evolve(&spec, &coeffs, t)?;
        let v = evolve_velocity(&spec, &coeffs, t)?;
        let e = total_energy(&spec, &u, &v)?;
        drift = drift.max(if e0 > 0.0 { (e - e0).abs() / e0 } else { (e - e0).abs() });
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(u.into_iter().map(Cell::from));
        row.push(e.into());
        report.push(row);
    }
    report.summarize("energy_initial", e0);
    report.summarize("energy_drift", drift);
    report.summarize("translation_velocity", coeffs.drift.map(|c| c.re));

    // u_{p+N}(t) = xi^-N u_p(t) from the modal solution continued past the ring.
    let wrap = spec.xi().powf(-(n as f64));
    if wrap.is_finite() && wrap > 0.0 {
        let mut worst = 0.0_f64;
        for t in [0.0, 0.5 * t_max, t_max] {
            for p in [0, n / 2, n - 1] {
                let inside = displacement_at(&spec, &coeffs, p as i64, t)?;
                let outside = displacement_at(&spec, &coeffs, (p + n) as i64, t)?;
                let expected = inside * wrap;
                let scale = expected.norm().max(outside.norm()).max(f64::MIN_POSITIVE);
                worst = worst.max((outside - expected).norm() / scale);
            }
        }
        report.summarize("scaling_relation_deviation", worst);
    } else {
        report.summarize("scaling_relation_deviation", "skipped: xi^-N out of range");
    }
    if drift > a.tol {
        report.fail(format!("evolve: energy drift {drift:e} exceeds tolerance {:e}", a.tol));
    }
    Ok(report)
}

/// Tolerance for the finite-difference force comparison, which is limited by
/// the difference step rather than by the model.
const FORCE_TOL: f64 = 1e-6;
const FORCE_MASS_SPREAD: f64 = 1e3;

fn verify(a: &VerifyArgs, seed: u64) -> Result<Report, CliError> {
    let spec = a.chain.spec()?;
    let tol = check_tol("tol", a.tol)?;
    let n = spec.n();
    let edges = spec.band_edges();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks: Vec<(String, f64, f64)> = Vec::new();

    let s = verify_spectrum(&spec, f64::INFINITY)?;
    checks.push(("spectrum".into(), s.max_rel_deviation, tol));
    if let Some(sim) = s.similarity {
        checks.push(("spectrum_similarity".into(), sim.deviation, tol));
    }

    let mut probes = vec![("greens_above_band", 1.5 * edges.upper, 0.0)];
    if edges.lower > 0.0 {
        probes.insert(0, ("greens_below_band", 0.5 * edges.lower, 0.0));
    }
    probes.push((
        "greens_in_band",
        0.5 * (edges.lower + edges.upper),
        OracleConfig::band_comparison_epsilon(&spec),
    ));
    for (name, omega, eps) in probes {
        let diag = greens_ring(&spec, omega, eps, 0, 0)?.norm();
        let mut worst = 0.0_f64;
        for q in 0..n.min(8) {
            let ring = greens_ring(&spec, omega, eps, 0, q)?;
            let sum = greens_spectral_sum(&spec, omega, eps, 0, q)?;
            worst = worst.max((ring - sum).norm() / diag);
        }
        checks.push((name.into(), worst, tol));
    }

    let norm = normalization_integral(&spec, &QuadConfig::default())?;
    checks.push((
        "density_normalization".into(),
        (norm.value - n as f64).abs() / n as f64,
        1e-10,
    ));

    // Random state drawn in the scaled coordinates y_p = xi^p u_p, where every
    // site carries comparable weight.
    let scales: Vec<f64> = (0..n).map(|p| spec.xi().powi(p as i32)).collect();
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(ChainError::GradingOverflow { exponent: n as i64 - 1 }.into());
    }
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let y_dot: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let u: Vec<f64> = y.iter().zip(&scales).map(|(y, s)| y / s).collect();
    let v: Vec<f64> = y_dot.iter().zip(&scales).map(|(y, s)| y / s).collect();

    // Finite differences of the energy lose the light sites once the masses
    // spread over more than FORCE_MASS_SPREAD, so the force check runs on the
    // longest chain of the same grading that stays within it.
    let per_site = 2.0 * spec.xi().ln().abs();
    let force_n = if per_site == 0.0 {
        n
    } else {
        n.min(1 + (FORCE_MASS_SPREAD.ln() / per_site).floor() as usize)
    };
    if force_n >= 2 {
        let small = spec.with_n(force_n)?;
        let probe: Vec<f64> = (0..force_n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let force = match hamiltonian_force_check(&small, &probe, FORCE_TOL) {
            Ok(r) => r.rel_error,
            Err(ChainError::VerificationFailed { deviation, .. }) => deviation,
            Err(e) => return Err(e.into()),
        };
        let name = if force_n == n {
            "hamiltonian_force".to_string()
        } else {
            format!("hamiltonian_force_n{force_n}")
        };
        checks.push((name, force, FORCE_TOL));
    }

    let ic = InitialConditions::new(u, v)?;
    let coeffs = fit_modal_coefficients(&spec, &ic)?;
    let back = evolve(&spec, &coeffs, 0.0)?;
    let y_scale = y.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let round_trip = back
        .iter()
        .zip(&y)
        .zip(&scales)
        .fold(0.0_f64, |m, ((b, y), s)| m.max((b * s - y).abs()))
        / y_scale;
    checks.push(("modal_round_trip".into(), round_trip, tol));

    let t = default_t_max(&spec);
    let e0 = total_energy(&spec, &ic.u0, &ic.v0)?;
    let e1 = total_energy(&spec, &evolve(&spec, &coeffs, t)?, &evolve_velocity(&spec, &coeffs, t)?)?;
    checks.push(("energy_conservation".into(), (e1 - e0).abs() / e0, tol));

    let mut report = Report::new(["check", "deviation", "tol", "status"]);
    chain_metadata(&mut report, &spec);
    report.meta("seed", seed as i64);
    let mut failed = Vec::new();
    for (name, dev, tol) in &checks {
        let ok = *dev <= *tol;
        if !ok {
            failed.push(name.clone());
        }
        report.push(vec![
            name.as_str().into(),
            (*dev).into(),
            (*tol).into(),
            if ok { "pass" } else { "fail" }.into(),
        ]);
    }
    report.summarize("checks", checks.len());
    report.summarize("failed", failed.len());
    if !failed.is_empty() {
        report.fail(format!("verify: failed checks: {}", failed.join(", ")));
    }
    Ok(report)
}
