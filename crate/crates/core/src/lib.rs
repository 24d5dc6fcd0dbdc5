//! Tomography of single-photon polarization-path states.
//!
//! A photon travelling through two paths `|0⟩`, `|1⟩` with polarization `|H⟩`, `|V⟩`
//! carries two qubits. This crate models the density matrix of such a photon, the
//! one-path and two-path Stokes parameters that fully determine it, the optical bench
//! that measures them (tap-off Stokes measurers, a phase-tunable interferometer and
//! output Stokes measurers), Monte-Carlo photon counting on that bench, and the
//! estimators that turn counts back into a physical density matrix.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command-line
//! driver live in the `polpath` crate.
//!
//! Basis ordering is global: `{|H,0⟩, |H,1⟩, |V,0⟩, |V,1⟩}`, i.e. index
//! `2·polarization + path`.
#![no_std]
// index loops read closest to the matrix formulas; `!(x > y)` comparisons are NaN guards
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod experiment;
pub mod linalg;
pub mod nelder_mead;
pub mod optics;
pub mod qstate;
pub mod stokes;
pub mod tomography;

pub use error::{Error, Result};
pub use experiment::{CountData, Detector, ExperimentConfig, PlateKind, PlateSetting, Run};
pub use optics::OpticalUnitary;
pub use qstate::{DensityMatrix, PolarizationState, ValidityReport};
pub use stokes::{OnePathStokes, StokesSet, TwoPathStokes};
pub use tomography::{MleParams, ReconstructionResult, StokesEstimate};

pub use num_complex::Complex64;
