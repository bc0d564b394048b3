use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use graded_chain::{ChainSpec, ContinuumSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn one() -> f64 {
    1.0
}

/// Everything needed to reproduce a run; also the `config` object of JSON output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub seed: u64,
    /// Read from configuration files but never echoed, so the same run
    /// written to different places produces identical bytes.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Bloch spectrum (m, k_m, omega_m).
    Spectrum(SpectrumArgs),
    /// Green's function sweep over a frequency grid.
    Greens(GreensArgs),
    /// Mode density samples and normalization.
    Density(DensityArgs),
    /// Continuum-limit convergence study and line samples.
    Continuum(ContinuumArgs),
    /// Free motion from initial conditions.
    Evolve(EvolveArgs),
    /// Battery of oracle checks for one chain.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Greens(_) => "greens",
            Command::Density(_) => "density",
            Command::Continuum(_) => "continuum",
            Command::Evolve(_) => "evolve",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ChainArgs {
    /// Number of particles.
    #[arg(long)]
    pub n: usize,
    /// Grading parameter.
    #[arg(long)]
    pub xi: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub omega0: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub m0: f64,
}

impl ChainArgs {
    pub fn spec(&self) -> Result<ChainSpec, CliError> {
        Ok(ChainSpec::new(self.n, self.xi, self.omega0, self.m0)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(long = "omega-min")]
    #[serde(rename = "omega_min")]
    pub min: f64,
    #[arg(long = "omega-max")]
    #[serde(rename = "omega_max")]
    pub max: f64,
    #[arg(long, default_value_t = 101)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Linear)]
    pub spacing: Spacing,
}

impl GridArgs {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if self.count == 0 {
            return Err(CliError::invalid("count", "grid needs at least one point"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min < 0.0 || self.max < self.min {
            return Err(CliError::invalid(
                "omega-min",
                format!("need 0 <= omega-min <= omega-max, got {} and {}", self.min, self.max),
            ));
        }
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let steps = (self.count - 1) as f64;
        Ok(match self.spacing {
            Spacing::Linear => (0..self.count)
                .map(|i| self.min + (self.max - self.min) * i as f64 / steps)
                .collect(),
            Spacing::Log => {
                if self.min <= 0.0 {
                    return Err(CliError::invalid("omega-min", "log spacing needs omega-min > 0"));
                }
                let ratio = (self.max / self.min).ln();
                (0..self.count)
                    .map(|i| self.min * (ratio * i as f64 / steps).exp())
                    .collect()
            }
        })
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GreensArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub p: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub q: usize,
    /// Add the true-displacement columns.
    #[arg(long)]
    #[serde(default)]
    pub true_displacement: bool,
    /// Compare against the finite-ring spectral sum.
    #[arg(long)]
    #[serde(default)]
    pub verify: bool,
    /// Largest accepted deviation where the comparison is undamped, relative to |G_pp|.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Largest accepted deviation for rows compared at omega + i epsilon with
    /// epsilon = 8 (Omega_D - Omega_0) / N: in the band and close to its edges.
    #[arg(long, default_value_t = 1e-5)]
    pub band_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value_t = 201)]
    pub count: usize,
    /// Distance of the first and last sample from the band edges, as a fraction of the band width.
    #[arg(long, default_value_t = 1e-6)]
    pub margin: f64,
    /// Largest accepted |integral - N|.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LineMode {
    Infinite,
    Periodic,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ContinuumArgs {
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub big_omega: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub rho0: f64,
    /// Particles on the coarsest rung; each further rung doubles it.
    #[arg(long, default_value_t = 64)]
    pub n_start: usize,
    #[arg(long, default_value_t = 4)]
    pub rungs: usize,
    /// Frequencies for the Green's function study (repeatable).
    #[arg(long = "omega")]
    #[serde(default)]
    pub omegas: Vec<f64>,
    /// Separation for the Green's function study; must be a site of every rung.
    #[arg(long, default_value_t = 0.125)]
    pub x: f64,
    /// Mode index for the dispersion study.
    #[arg(long, default_value_t = 1)]
    pub mode_index: i64,
    #[arg(long, value_enum, default_value_t = LineMode::Infinite)]
    pub mode: LineMode,
    /// Images on each side in periodic mode.
    #[arg(long, default_value_t = 50)]
    pub images: usize,
    /// Number of line samples between 0 and `--sample-max`.
    #[arg(long, default_value_t = 41)]
    pub samples: usize,
    #[arg(long)]
    pub sample_max: Option<f64>,
    /// Smallest accepted observed order of convergence.
    #[arg(long, default_value_t = 0.9)]
    pub min_order: f64,
}

impl ContinuumArgs {
    pub fn spec(&self) -> Result<ContinuumSpec, CliError> {
        Ok(ContinuumSpec::new(self.length, self.beta, self.big_omega, self.rho0)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Standing wave of mode `--mode-index` released from rest.
    SingleMode,
    /// One displaced particle at `--site`.
    Pulse,
    /// Uniform random displacements and velocities in [-amplitude, amplitude].
    Random,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = Preset::SingleMode)]
    pub preset: Preset,
    /// JSON file with `u0` and `v0` arrays; overrides the preset.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub mode_index: usize,
    #[arg(long, default_value_t = 0)]
    pub site: usize,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// End time; defaults to ten periods of the slowest oscillating mode.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Largest accepted relative energy drift.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    /// Tolerance for the spectrum and the Green's function checks.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}
