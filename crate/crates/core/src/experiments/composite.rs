//! Three-chirp refocusing sequence (1-2-1 duration pattern, equal amplitudes).

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{rf_from_adiabaticity, ChirpParams, PulseSequence, DEFAULT_SMOOTHING};
use crate::weinorman::{propagate_bloch, BlochTrajectory, WnOptions};

/// Per-pulse parameter arrays of a three-chirp sequence. Frequencies in Hz,
/// amplitudes in rad/s, times in s, phases in rad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeParams {
    pub omega1: [f64; 3],
    pub delta_f_sweep: [f64; 3],
    pub tau_p: [f64; 3],
    pub phi0: [f64; 3],
    pub delta_t: [f64; 3],
    pub delta_f: [f64; 3],
    pub n: u32,
    pub t_end: f64,
}

impl CompositeParams {
    /// 200 kHz sweeps of 1, 2 and 1 ms, all at the amplitude that gives the
    /// first pulse Q = 5, centred at 0.5, 2.0 and 3.5 ms.
    pub fn reference() -> Self {
        let (_, omega1) = rf_from_adiabaticity(2e5, 5.0, 1e-3).expect("positive inputs");
        CompositeParams {
            omega1: [omega1; 3],
            delta_f_sweep: [2e5; 3],
            tau_p: [1e-3, 2e-3, 1e-3],
            phi0: [0.0; 3],
            delta_t: [0.5e-3, 2.0e-3, 3.5e-3],
            delta_f: [0.0; 3],
            n: DEFAULT_SMOOTHING,
            t_end: 4e-3,
        }
    }

    pub fn pulses(&self) -> Vec<ChirpParams> {
        (0..3)
            .map(|i| ChirpParams {
                omega1: self.omega1[i],
                delta_f_sweep: self.delta_f_sweep[i],
                tau_p: self.tau_p[i],
                phi0: self.phi0[i],
                delta_t: self.delta_t[i],
                delta_f: self.delta_f[i],
                n: self.n,
            })
            .collect()
    }

    pub fn sequence(&self) -> Result<PulseSequence> {
        PulseSequence::with_span(self.pulses(), (0.0, self.t_end))
    }
}

/// Bloch trajectories of a refocusing run, one per offset.
#[derive(Debug, Clone)]
pub struct CompositeResult {
    /// Offsets in Hz.
    pub offsets: Vec<f64>,
    pub trajectories: Vec<BlochTrajectory>,
}

impl CompositeResult {
    pub fn endpoints(&self) -> Vec<[Complex64; 3]> {
        self.trajectories
            .iter()
            .filter_map(|t| t.last().map(|(c, _)| c))
            .collect()
    }

    pub fn end_phases(&self) -> Vec<f64> {
        self.trajectories
            .iter()
            .filter_map(|t| t.last().map(|(_, p)| p))
            .collect()
    }
}

/// Runs the sequence for every offset in `offsets_hz` from Bloch vector `c0`.
pub fn composite_refocus(
    params: &CompositeParams,
    offsets_hz: &[f64],
    c0: [Complex64; 3],
    opts: &WnOptions,
) -> Result<CompositeResult> {
    if offsets_hz.is_empty() {
        return Err(Error::domain("offset grid is empty"));
    }
    let seq = params.sequence()?;
    let trajectories = offsets_hz
        .par_iter()
        .map(|&f| propagate_bloch(&seq, TAU * f, c0, opts))
        .collect::<Result<_>>()?;
    Ok(CompositeResult {
        offsets: offsets_hz.to_vec(),
        trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let p = CompositeParams::reference();
        assert!((p.omega1[0] - 79267.0).abs() < 1.0);
        assert_eq!(p.delta_t, [0.0005, 0.0020, 0.0035]);
        let seq = p.sequence().unwrap();
        assert_eq!(seq.t_span, (0.0, 0.004));
    }
}
