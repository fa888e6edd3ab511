//! Low-flip-angle saltire under a gradient (PSYCHE element).

use std::f64::consts::TAU;

use rayon::prelude::*;

use super::ScanResult;
use crate::algebra::{Drive, GradientContext, SpinSystem};
use crate::error::{Error, Result};
use crate::integrator::Tolerances;
use crate::lvn::{simulate_ensemble, tau_for_xi, unit, EnsembleResult, SimOptions, Samples};
use crate::pulse::{saltire_rf_from_flip, Saltire, DEFAULT_SMOOTHING};

/// Index of `P⁺/√2`, the only term fed into the element.
pub const PSYCHE_INITIAL: usize = 6;
/// Index of `P⁻/√2`, the desired single-quantum output.
pub const DESIRED: usize = 5;
/// Indices of the unwanted single-quantum outputs `Q⁻/√2`, `√2P⁻Qz`, `√2PzQ⁻`.
pub const ARTEFACTS: [usize; 3] = [7, 9, 11];
/// Zero- and double-quantum indices.
pub const ZQ_DQ: [usize; 7] = [0, 1, 2, 3, 4, 13, 14];

/// Saltire with amplitude set for flip angle `alpha_deg`.
pub fn psyche_pulse(alpha_deg: f64, delta_f_sweep: f64, tau_p: f64, n: u32) -> Result<Saltire> {
    let rf = saltire_rf_from_flip(alpha_deg, delta_f_sweep, tau_p)?;
    Saltire::new(TAU * rf, delta_f_sweep, tau_p, n)
}

/// Ensemble trajectories of all 15 coefficients starting from `P⁺` alone.
pub fn psyche_element(
    system: SpinSystem,
    saltire: &Saltire,
    gradient: &GradientContext,
    opts: &SimOptions,
) -> Result<EnsembleResult> {
    simulate_ensemble(
        system,
        &Drive::Saltire(*saltire),
        &unit(15, PSYCHE_INITIAL),
        gradient,
        opts,
    )
}

/// Ensemble-mean endpoint magnitudes of the desired term and the three artefacts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsycheEndpoint {
    pub g6: f64,
    pub g8: f64,
    pub g10: f64,
    pub g12: f64,
}

impl PsycheEndpoint {
    pub fn from_ensemble(e: &EnsembleResult) -> Self {
        PsycheEndpoint {
            g6: e.final_mean(DESIRED).norm(),
            g8: e.final_mean(ARTEFACTS[0]).norm(),
            g10: e.final_mean(ARTEFACTS[1]).norm(),
            g12: e.final_mean(ARTEFACTS[2]).norm(),
        }
    }

    /// Signal-to-artefact ratio `3 g6 / |(g8, g10, g12)|`.
    pub fn lambda(&self) -> Option<f64> {
        let a = (self.g8 * self.g8 + self.g10 * self.g10 + self.g12 * self.g12).sqrt();
        (a > 0.0).then(|| 3.0 * self.g6 / a)
    }

    /// [`lambda`](Self::lambda) plus `ln g6`; undefined when `g6` vanishes.
    pub fn lambda_penalized(&self) -> Option<f64> {
        if self.g6 <= 0.0 {
            return None;
        }
        self.lambda().map(|l| l + self.g6.ln())
    }
}

fn endpoint(
    system: SpinSystem,
    saltire: &Saltire,
    gradient: &GradientContext,
    opts: &SimOptions,
) -> Result<PsycheEndpoint> {
    let opts = opts.clone().samples(Samples::Uniform(2));
    let e = psyche_element(system, saltire, gradient, &opts)?;
    Ok(PsycheEndpoint::from_ensemble(&e))
}

/// Endpoint magnitudes and both lambda variants against flip angle (degrees).
pub fn psyche_flip_scan(
    system: SpinSystem,
    base: &Saltire,
    gradient: &GradientContext,
    alpha_grid_deg: &[f64],
    opts: &SimOptions,
) -> Result<ScanResult> {
    if let Some(a) = alpha_grid_deg.iter().find(|a| !(**a > 0.0 && **a <= 90.0)) {
        return Err(Error::domain(format!("flip angle {a} deg outside (0, 90]")));
    }
    let mut scan = ScanResult::new("alpha_deg", alpha_grid_deg.to_vec())?;
    let points: Vec<PsycheEndpoint> = alpha_grid_deg
        .par_iter()
        .map(|&alpha| {
            let s = psyche_pulse(alpha, base.delta_f_sweep, base.tau_p, base.n)?;
            endpoint(system, &s, gradient, opts)
        })
        .collect::<Result<_>>()?;
    push_endpoints(&mut scan, &points, "")?;
    scan.push("lambda", points.iter().map(PsycheEndpoint::lambda).collect())?;
    scan.push(
        "lambda_penalized",
        points.iter().map(PsycheEndpoint::lambda_penalized).collect(),
    )?;
    Ok(scan)
}

fn push_endpoints(scan: &mut ScanResult, points: &[PsycheEndpoint], suffix: &str) -> Result<()> {
    scan.push_dense(format!("g6{suffix}"), points.iter().map(|p| p.g6).collect())?;
    scan.push_dense(format!("g8{suffix}"), points.iter().map(|p| p.g8).collect())?;
    scan.push_dense(format!("g10{suffix}"), points.iter().map(|p| p.g10).collect())?;
    scan.push_dense(format!("g12{suffix}"), points.iter().map(|p| p.g12).collect())
}

/// Endpoint magnitudes against xi with and without the gradient. xi is
/// realised by changing the saltire duration; the flip angle of `base` is kept.
pub fn psyche_xi_scan(
    system: SpinSystem,
    base: &Saltire,
    gradient: &GradientContext,
    xi_grid: &[f64],
    opts: &SimOptions,
) -> Result<ScanResult> {
    if xi_grid.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::domain("xi grid values must be positive"));
    }
    let alpha = flip_angle_deg(base);
    let off = GradientContext {
        n_slices: 1,
        half_span: 0.0,
    };
    let mut scan = ScanResult::new("xi", xi_grid.to_vec())?;
    let taus: Vec<f64> = xi_grid
        .iter()
        .map(|&xi| tau_for_xi(system, base.delta_f_sweep, xi))
        .collect::<Result<_>>()?;
    let pairs: Vec<(PsycheEndpoint, PsycheEndpoint)> = taus
        .par_iter()
        .map(|&tau| {
            let s = psyche_pulse(alpha, base.delta_f_sweep, tau, base.n)?;
            Ok((
                endpoint(system, &s, gradient, opts)?,
                endpoint(system, &s, &off, opts)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (on, off): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    scan.push_dense("tau_p", taus)?;
    push_endpoints(&mut scan, &on, "_gradient")?;
    push_endpoints(&mut scan, &off, "_no_gradient")?;
    Ok(scan)
}

/// Flip angle (degrees) that a saltire's amplitude corresponds to.
pub fn flip_angle_deg(s: &Saltire) -> f64 {
    let rf = s.omega1 / TAU;
    rf * 360.0 / (2.0 * s.delta_f_sweep / s.tau_p).sqrt()
}

/// Default element: 30 ms, 10 kHz sweep.
pub fn reference_saltire(alpha_deg: f64) -> Result<Saltire> {
    psyche_pulse(alpha_deg, 1e4, 0.03, DEFAULT_SMOOTHING)
}

/// Two protons 200 Hz apart placed symmetrically about the carrier, J = 10 Hz.
pub fn reference_system() -> SpinSystem {
    SpinSystem::coupled(TAU * 100.0, -TAU * 100.0, 10.0)
}

/// Slices needed for the 30 ms reference element. Neighbouring slices must
/// differ in accumulated phase by well under a turn or the slice mean does
/// not converge; endpoints are stable to four digits from about 500 up.
pub const CONVERGED_SLICES: usize = 600;

/// Gradient spread over the reference sweep, resolved with [`CONVERGED_SLICES`].
pub fn reference_gradient() -> GradientContext {
    GradientContext::for_sweep(1e4, CONVERGED_SLICES)
}

/// Tolerances that reproduce the tight-tolerance endpoints to four digits at
/// half the cost.
pub fn scan_options() -> SimOptions {
    SimOptions::with_tol(Tolerances::new(1e-6, 1e-8))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_angle_roundtrip() {
        let s = reference_saltire(17.5).unwrap();
        assert!((flip_angle_deg(&s) - 17.5).abs() < 1e-12);
    }

    #[test]
    fn lambda_definitions() {
        let p = PsycheEndpoint {
            g6: 0.5,
            g8: 0.1,
            g10: 0.2,
            g12: 0.2,
        };
        assert!((p.lambda().unwrap() - 5.0).abs() < 1e-12);
        assert!((p.lambda_penalized().unwrap() - (5.0 + 0.5f64.ln())).abs() < 1e-12);
        let zero = PsycheEndpoint { g6: 0.0, ..p };
        assert_eq!(zero.lambda_penalized(), None);
    }

    #[test]
    fn alpha_grid_is_checked() {
        let s = reference_saltire(10.0).unwrap();
        let g = GradientContext::for_sweep(1e4, 2);
        let r = psyche_flip_scan(reference_system(), &s, &g, &[0.0, 10.0], &SimOptions::default());
        assert!(r.is_err());
    }
}
