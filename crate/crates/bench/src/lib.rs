//! Fixtures shared by the benchmarks.

use std::f64::consts::TAU;

use chirpdyn::algebra::{Drive, GradientContext, SpinSystem};
use chirpdyn::experiments::{chorus::ChorusParams, composite::CompositeParams, psyche};
use chirpdyn::pulse::PulseSequence;
use chirpdyn::Complex64;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Composite refocusing element and a spin 40 kHz off resonance.
pub fn composite() -> (PulseSequence, f64) {
    (CompositeParams::reference().sequence().expect("reference is valid"), TAU * 4e4)
}

/// Uncorrected CHORUS element and a spin 60 kHz off resonance.
pub fn chorus() -> (PulseSequence, f64) {
    (ChorusParams::reference().sequence().expect("reference is valid"), TAU * 6e4)
}

/// 20 degree saltire on the reference spin pair with a small gradient ensemble.
pub fn psyche(slices: usize) -> (SpinSystem, Drive, GradientContext) {
    let saltire = psyche::reference_saltire(20.0).expect("reference is valid");
    (
        psyche::reference_system(),
        Drive::Saltire(saltire),
        GradientContext::for_sweep(saltire.delta_f_sweep, slices),
    )
}
