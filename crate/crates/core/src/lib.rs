//! Lattice dynamics of the exponentially graded linear chain.
//!
//! Masses `m0 xi^(2p)` and springs `m0 xi^(2p) omega0^2` along a periodic
//! chain. The crate covers the dynamic matrices and Bloch spectrum
//! ([`chain`]), the closed-form frequency-domain Green's function in all
//! three frequency regimes ([`greens`]), brute-force references used to
//! check it ([`oracle`]), the vibrational mode density ([`density`]),
//! time-domain motion ([`timedomain`]) and the continuum limit, a graded
//! elastic line whose transformed field obeys a Klein-Gordon equation
//! ([`continuum`]).

pub mod chain;
pub mod continuum;
pub mod density;
pub mod error;
pub mod greens;
pub mod oracle;
pub mod timedomain;

pub use chain::{band_edges, build_matrices, dispersion, verify_spectrum, BandEdges, ChainSpec};
pub use continuum::{continuum_dispersion, continuum_greens, ContinuumMode, ContinuumSpec, DiscretizationLadder};
pub use density::{mode_density, normalization_integral, ModeDensityCurve};
pub use error::{ChainError, Result};
pub use greens::{
    greens_closed_form, greens_matrix, greens_true, FrequencyQuery, GreensEvaluation, GreensKind,
    IndexDistance, Regime, RegimeTag,
};
pub use timedomain::{
    evolve, fit_modal_coefficients, greens_time_domain, total_energy, FftConfig, InitialConditions,
    ModalCoefficients, TimeSignal,
};
