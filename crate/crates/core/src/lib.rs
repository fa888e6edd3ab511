//! Spin dynamics of one- and two-spin-1/2 systems under swept-frequency
//! (chirped) RF pulses.
//!
//! The crate is organised bottom-up:
//!
//! * [`pulse`]: generalised chirps, saltires and amplitude calibration.
//! * [`algebra`]: operator bases, structure constants, generator matrices.
//! * [`integrator`]: adaptive Dormand-Prince solver and a matrix-exponential oracle.
//! * [`lvn`]: Liouville-von Neumann coefficient dynamics and gradient ensembles.
//! * [`weinorman`]: factorized single-spin propagators.
//! * [`experiments`]: zero-quantum filter, PSYCHE, composite refocusing, CHORUS.
//! * [`io`]: configuration and CSV/JSON/SVG output.

pub mod algebra;
pub mod checks;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod io;
pub mod lvn;
pub mod pulse;
pub mod weinorman;

pub use error::{Error, Result};
pub use num_complex::Complex64;
