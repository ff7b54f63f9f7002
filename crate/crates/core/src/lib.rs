//! Simulation and fitting of Zeeman polaritons: a thermal spin-7/2 ensemble
//! magnetically coupled to the Fabry–Pérot modes of the slab that hosts it.
//!
//! The crate is organized bottom-up:
//!
//! * [`spin_ladder`]: Zeeman levels and Boltzmann populations.
//! * [`magnetic_response`]: susceptibility χ(ω), per-transition couplings and μ_r(ω).
//! * [`cavity_optics`]: transfer-matrix slab spectra, Fabry–Pérot diagnostics, bulk dispersion.
//! * [`polariton_analysis`]: peak finding, vacuum Rabi splitting, anticrossing maps.
//! * [`vrs_fitting`]: least-squares fit of the coupling to splitting-versus-temperature data.
//! * [`dicke_reference`]: exact diagonalization of the Dicke model and its Hopfield limit.
//!
//! Internally frequencies are angular (rad/s) except where a type documents
//! hertz; the CLI converts to GHz at its boundary.

pub mod cavity_optics;
pub mod constants;
pub mod dicke_reference;
pub mod error;
pub mod magnetic_response;
pub mod polariton_analysis;
pub mod spin_ladder;
pub mod vrs_fitting;

pub use error::{Error, Result};
