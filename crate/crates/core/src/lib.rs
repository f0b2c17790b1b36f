//! `mazerlab`: a two-level atom with quantized center-of-mass motion crossing a
//! single-mode cavity (the mazer).
//!
//! The crate contains
//!
//! - [`model`]: parameters, dressed-state algebra and the per-sector 2×2 blocks,
//! - [`claimed`]: the published closed-form off-resonant solution, evaluated
//!   literally so it can be tested,
//! - [`coupled`]: the correct dynamics, as an 8-amplitude stationary matching
//!   solver and a Strang-split Crank–Nicolson wave-packet propagator,
//! - [`verifier`]: residual checks, detuning sweeps, basis audits and oracle
//!   cross-checks,
//! - [`observables`]: atomic inversion aggregated over photon sectors,
//! - [`runner`]: JSON scenario configs, sweeps and CSV/JSON/SVG output.
//!
//! Units are ħ = 1, 2M = 1 with λ as the energy scale (γ² = λ).

pub mod claimed;
pub mod coupled;
pub mod error;
pub mod model;
pub mod observables;
pub mod runner;
pub mod verifier;
pub mod wave;

pub use error::{MazerError, Result};
pub use model::{
    claimed_wavenumbers, dressed_angle, dressed_rotate, dressed_unrotate, make_params, sector_hamiltonian,
    true_wavenumbers, Basis, CavityRegion, Channel, ModeFunction, ModelParams, PhotonDistribution, PhotonSector,
};
