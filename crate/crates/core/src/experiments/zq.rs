//! Zero-quantum suppression by a chirp applied under a field gradient.

use num_complex::Complex64;
use rayon::prelude::*;

use super::ScanResult;
use crate::algebra::{Drive, GradientContext, SpinSystem};
use crate::error::Result;
use crate::lvn::{self, simulate_ensemble, simulate_two_spin, tau_for_xi, unit, SimOptions, Samples};
use crate::pulse::{rf_from_adiabaticity, ChirpParams, PulseSequence};

/// Index of `P⁻Q⁺`, the initial zero-quantum term.
pub const ZQ_INITIAL: usize = 2;
/// Index of `P⁺Q⁻`, the observed zero-quantum term.
pub const ZQ_OBSERVED: usize = 3;

/// Adiabaticity of the filter chirp.
pub const FILTER_Q: f64 = 5.0;

/// Inversion chirp of duration `tau_p` at adiabaticity `q`, on `[0, tau_p]`.
pub fn filter_pulse(delta_f_sweep: f64, tau_p: f64, q: f64) -> Result<ChirpParams> {
    let (_, omega1) = rf_from_adiabaticity(delta_f_sweep, q, tau_p)?;
    let p = ChirpParams::centred(omega1, delta_f_sweep, tau_p);
    p.validate()?;
    Ok(p)
}

fn filter_sequence(p: &ChirpParams) -> Result<PulseSequence> {
    PulseSequence::with_span(vec![*p], (0.0, p.tau_p))
}

/// `|g4(tau_p)|` of the ensemble mean (gradient on) and of a single
/// unshifted spin pair (gradient off).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZqPoint {
    pub tau_p: f64,
    pub with_gradient: f64,
    pub without_gradient: f64,
}

/// Runs the filter once with and once without the gradient.
pub fn zq_point(
    system: SpinSystem,
    pulse: &ChirpParams,
    gradient: &GradientContext,
    opts: &SimOptions,
) -> Result<ZqPoint> {
    let drive = Drive::Sequence(filter_sequence(pulse)?);
    let g0 = unit(15, ZQ_INITIAL);
    let opts = opts.clone().samples(Samples::Uniform(2));
    let on = simulate_ensemble(system, &drive, &g0, gradient, &opts)?;
    let off = simulate_two_spin(system, &drive, &g0, Some(0.0), &opts)?;
    let off_g4 = off.last().map_or(Complex64::new(0.0, 0.0), |s| s[ZQ_OBSERVED]);
    Ok(ZqPoint {
        tau_p: pulse.tau_p,
        with_gradient: on.final_mean(ZQ_OBSERVED).norm(),
        without_gradient: off_g4.norm(),
    })
}

/// Filter output against xi, realised by changing the chirp duration at
/// the sweep width and adiabaticity of `base`. The gradient span follows
/// `gradient`.
pub fn zq_filter_scan(
    system: SpinSystem,
    base: &ChirpParams,
    gradient: &GradientContext,
    xi_grid: &[f64],
    opts: &SimOptions,
) -> Result<ScanResult> {
    let q = adiabaticity(base);
    let mut scan = ScanResult::new("xi", xi_grid.to_vec())?;
    let points: Vec<ZqPoint> = xi_grid
        .par_iter()
        .map(|&xi| {
            let tau = tau_for_xi(system, base.delta_f_sweep, xi)?;
            let p = filter_pulse(base.delta_f_sweep, tau, q)?.with_smoothing(base.n);
            zq_point(system, &p, gradient, opts)
        })
        .collect::<Result<_>>()?;
    scan.push_dense("tau_p", points.iter().map(|p| p.tau_p).collect())?;
    scan.push_dense("g4_gradient", points.iter().map(|p| p.with_gradient).collect())?;
    scan.push_dense("g4_no_gradient", points.iter().map(|p| p.without_gradient).collect())?;
    Ok(scan)
}

/// Adiabaticity factor implied by a chirp's amplitude, sweep and duration.
pub fn adiabaticity(p: &ChirpParams) -> f64 {
    let rf = p.omega1 / std::f64::consts::TAU;
    rf * rf * std::f64::consts::TAU * p.tau_p / p.delta_f_sweep
}

/// Full ensemble run for trajectory output.
pub fn zq_ensemble(
    system: SpinSystem,
    pulse: &ChirpParams,
    gradient: &GradientContext,
    opts: &SimOptions,
) -> Result<lvn::EnsembleResult> {
    let drive = Drive::Sequence(filter_sequence(pulse)?);
    simulate_ensemble(system, &drive, &unit(15, ZQ_INITIAL), gradient, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adiabaticity_roundtrip() {
        let p = filter_pulse(1e4, 0.018, 5.0).unwrap();
        assert!((adiabaticity(&p) - 5.0).abs() < 1e-12);
    }
}
