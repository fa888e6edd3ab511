//! Three-chirp broadband excitation (90-180-180) with offset-independent phase.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optimize::{Minimum, NelderMead};
use super::{circular_mean, circular_variance, GridResult, ScanResult};
use crate::error::{Error, Result};
use crate::pulse::{omega1_for_flip, ChirpParams, PulseSequence, DEFAULT_SMOOTHING};
use crate::weinorman::{propagate_bloch, transverse_phase, WnOptions};
use crate::lvn::Samples;

/// Durations of the three pulses. Only `tau1` and `tau3` are free:
/// `tau2 = tau1/2 + tau3`, pulses 1 and 2 are contiguous and pulse 3
/// follows pulse 2 after a gap of `tau1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChorusTiming {
    tau1: f64,
    tau3: f64,
}

impl ChorusTiming {
    pub fn new(tau1: f64, tau3: f64) -> Result<Self> {
        if !(tau1 > 0.0 && tau3 > 0.0 && tau1.is_finite() && tau3.is_finite()) {
            return Err(Error::config(
                "tau_p",
                format!("pulse durations must be positive (got {tau1}, {tau3})"),
            ));
        }
        Ok(ChorusTiming { tau1, tau3 })
    }

    /// Accepts three explicit durations and checks `tau2 = tau1/2 + tau3`.
    pub fn from_durations(tau: [f64; 3]) -> Result<Self> {
        let t = Self::new(tau[0], tau[2])?;
        if (tau[1] - t.tau2()).abs() > 1e-9 * t.tau2() {
            return Err(Error::config(
                "tau_p",
                format!(
                    "timing constraint tau2 = tau1/2 + tau3 violated: tau2 = {} but tau1/2 + tau3 = {}",
                    tau[1],
                    t.tau2()
                ),
            ));
        }
        Ok(t)
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau1 / 2.0 + self.tau3
    }

    pub fn tau3(&self) -> f64 {
        self.tau3
    }

    /// Delay between the end of pulse 2 and the start of pulse 3.
    pub fn gap(&self) -> f64 {
        self.tau1 / 2.0
    }

    pub fn total(&self) -> f64 {
        2.0 * (self.tau1 + self.tau3)
    }

    pub fn durations(&self) -> [f64; 3] {
        [self.tau1, self.tau2(), self.tau3]
    }

    /// Pulse centres measured from the start of the sequence.
    pub fn centres(&self) -> [f64; 3] {
        let tau2 = self.tau2();
        [
            self.tau1 / 2.0,
            self.tau1 + tau2 / 2.0,
            self.tau1 + tau2 + self.gap() + self.tau3 / 2.0,
        ]
    }
}

/// Full parameter set. `delta_f_sweep` in Hz, `omega1` in rad/s, `phi0`
/// in rad, `delta_f` in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChorusParams {
    pub timing: ChorusTiming,
    pub delta_f_sweep: f64,
    pub omega1: [f64; 3],
    pub phi0: [f64; 3],
    pub delta_f: [f64; 3],
    pub n: u32,
}

/// Adiabaticity of the two refocusing pulses.
pub const REFOCUS_Q: f64 = 5.0;

impl ChorusParams {
    /// Amplitudes calibrated for a 90 degree first pulse and Q = 5 refocusing pulses.
    pub fn calibrated(timing: ChorusTiming, delta_f_sweep: f64) -> Result<Self> {
        let [t1, t2, t3] = timing.durations();
        Ok(ChorusParams {
            timing,
            delta_f_sweep,
            omega1: [
                omega1_for_flip(FRAC_PI_2, delta_f_sweep, t1, REFOCUS_Q)?,
                omega1_for_flip(std::f64::consts::PI, delta_f_sweep, t2, REFOCUS_Q)?,
                omega1_for_flip(std::f64::consts::PI, delta_f_sweep, t3, REFOCUS_Q)?,
            ],
            phi0: [0.0; 3],
            delta_f: [0.0; 3],
            n: DEFAULT_SMOOTHING,
        })
    }

    /// 0.5 ms and 1 ms outer pulses sweeping 300 kHz, uncorrected.
    pub fn reference() -> Self {
        let timing = ChorusTiming::new(0.5e-3, 1e-3).expect("positive durations");
        Self::calibrated(timing, 3e5).expect("valid reference parameters")
    }

    /// The reference set with a published phase and frequency correction.
    pub fn reference_corrected() -> Self {
        Self::reference().with_correction([-0.0668, 0.1878, -0.1404], -200.0)
    }

    /// Copy with the three pulse phases and the first pulse's offset replaced.
    pub fn with_correction(&self, phi0: [f64; 3], delta_f1: f64) -> Self {
        let mut p = self.clone();
        p.phi0 = phi0;
        p.delta_f[0] = delta_f1;
        p
    }

    pub fn pulses(&self) -> Vec<ChirpParams> {
        let tau = self.timing.durations();
        let centre = self.timing.centres();
        (0..3)
            .map(|i| ChirpParams {
                omega1: self.omega1[i],
                delta_f_sweep: self.delta_f_sweep,
                tau_p: tau[i],
                phi0: self.phi0[i],
                delta_t: centre[i],
                delta_f: self.delta_f[i],
                n: self.n,
            })
            .collect()
    }

    /// The waveform over `[0, total]`.
    pub fn sequence(&self) -> Result<PulseSequence> {
        PulseSequence::with_span(self.pulses(), (0.0, self.timing.total()))
    }
}

const Z: [Complex64; 3] = [
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
];

fn endpoints(seq: &PulseSequence, offsets_hz: &[f64], opts: &WnOptions) -> Result<Vec<[Complex64; 3]>> {
    let opts = opts.clone().samples(Samples::Uniform(2));
    offsets_hz
        .par_iter()
        .map(|&f| {
            let b = propagate_bloch(seq, TAU * f, Z, &opts)?;
            Ok(b.last().map(|(c, _)| c).unwrap_or(Z))
        })
        .collect()
}

/// Final Bloch vector and phase against offset (Hz), starting from `z`.
pub fn chorus_profile(params: &ChorusParams, offsets_hz: &[f64], opts: &WnOptions) -> Result<ScanResult> {
    let seq = params.sequence()?;
    let ends = endpoints(&seq, offsets_hz, opts)?;
    let mut scan = ScanResult::new("offset_hz", offsets_hz.to_vec())?;
    for (k, name) in ["c1", "c2", "c3"].iter().enumerate() {
        scan.push_dense(*name, ends.iter().map(|c| c[k].re).collect())?;
    }
    scan.push_dense("phase", ends.iter().map(transverse_phase).collect())?;
    Ok(scan)
}

/// Circular variance of the final phase over `offsets_hz`.
pub fn phase_objective(params: &ChorusParams, offsets_hz: &[f64], opts: &WnOptions) -> Result<f64> {
    let seq = params.sequence()?;
    let ends = endpoints(&seq, offsets_hz, opts)?;
    let phases: Vec<f64> = ends.iter().map(transverse_phase).collect();
    Ok(circular_variance(&phases))
}

/// Outcome of [`chorus_phase_optimize`] or [`chorus_correction`].
#[derive(Debug, Clone)]
pub struct ChorusOptimization {
    pub start: ChorusParams,
    pub optimized: ChorusParams,
    pub minimum: Minimum,
    /// Objective at `start` and at `optimized` on the reporting grid.
    pub variance_before: f64,
    pub variance_after: f64,
    /// Set when the simplex hit its iteration limit before converging.
    pub not_converged: bool,
}

/// Minimises the phase variance over the three pulse phases and the first
/// pulse's frequency offset, starting from `params`.
pub fn chorus_phase_optimize(
    params: &ChorusParams,
    offsets_hz: &[f64],
    opts: &WnOptions,
    simplex: &NelderMead,
) -> Result<ChorusOptimization> {
    if offsets_hz.is_empty() {
        return Err(Error::domain("offset grid is empty"));
    }
    params.sequence()?;
    let x0 = [params.phi0[0], params.phi0[1], params.phi0[2], params.delta_f[0]];
    let build = |x: &[f64]| params.with_correction([x[0], x[1], x[2]], x[3]);
    let objective = |x: &[f64]| phase_objective(&build(x), offsets_hz, opts).unwrap_or(f64::INFINITY);
    let minimum = simplex.minimize(objective, &x0);
    let optimized = build(&minimum.x);
    Ok(ChorusOptimization {
        start: params.clone(),
        variance_before: minimum.f_start,
        variance_after: minimum.f,
        not_converged: !minimum.converged,
        optimized,
        minimum,
    })
}

/// Circular mean of the final phase over `offsets_hz`.
pub fn mean_phase(params: &ChorusParams, offsets_hz: &[f64], opts: &WnOptions) -> Result<f64> {
    let seq = params.sequence()?;
    let ends = endpoints(&seq, offsets_hz, opts)?;
    let phases: Vec<f64> = ends.iter().map(transverse_phase).collect();
    Ok(circular_mean(&phases))
}

/// Adds a common offset to all three pulse phases so that the mean final
/// phase lands on `target` (rad). A common phase shift rotates the whole
/// sequence about z, so the phase variance is unchanged.
pub fn align_phase(
    params: &ChorusParams,
    offsets_hz: &[f64],
    opts: &WnOptions,
    target: f64,
) -> Result<ChorusParams> {
    let shift = super::wrap(target - mean_phase(params, offsets_hz, opts)?);
    let mut p = params.clone();
    for phi in &mut p.phi0 {
        *phi = super::wrap(*phi + shift);
    }
    Ok(p)
}

/// How [`chorus_correction`] searches.
#[derive(Debug, Clone)]
pub struct CorrectionSearch {
    /// Offsets (Hz) at which the objective is evaluated during the search.
    pub offsets_hz: Vec<f64>,
    pub opts: WnOptions,
    pub simplex: NelderMead,
    /// Mean final phase imposed after the search (rad); `pi/2` puts the
    /// magnetization on +y.
    pub target_phase: Option<f64>,
}

impl CorrectionSearch {
    /// `points` offsets over the central `fraction` of the sweep, tolerances
    /// loosened to `1e-5`, simplex stopped at a value spread of `1e-8` or 200
    /// iterations, magnetization aligned with +y.
    pub fn coarse(params: &ChorusParams, fraction: f64, points: usize) -> Self {
        let mut simplex = default_simplex();
        simplex.max_iter = 200;
        simplex.f_tol = 1e-8;
        CorrectionSearch {
            offsets_hz: super::central_band(params.delta_f_sweep, fraction, points),
            opts: WnOptions::with_tol(crate::integrator::Tolerances::new(1e-5, 1e-7)),
            simplex,
            target_phase: Some(FRAC_PI_2),
        }
    }
}

/// Phase correction: simplex search as configured by `search`, optional
/// alignment of the mean phase, then before/after variance on `offsets_hz`
/// at `opts`.
pub fn chorus_correction(
    params: &ChorusParams,
    offsets_hz: &[f64],
    opts: &WnOptions,
    search: &CorrectionSearch,
) -> Result<ChorusOptimization> {
    if offsets_hz.is_empty() {
        return Err(Error::domain("offset grid is empty"));
    }
    let found = chorus_phase_optimize(params, &search.offsets_hz, &search.opts, &search.simplex)?;
    let optimized = match search.target_phase {
        Some(target) => align_phase(&found.optimized, offsets_hz, opts, target)?,
        None => found.optimized,
    };
    Ok(ChorusOptimization {
        start: params.clone(),
        variance_before: phase_objective(params, offsets_hz, opts)?,
        variance_after: phase_objective(&optimized, offsets_hz, opts)?,
        not_converged: found.not_converged,
        optimized,
        minimum: found.minimum,
    })
}

/// Default simplex: 0.1 rad phase steps, 100 Hz frequency step.
pub fn default_simplex() -> NelderMead {
    NelderMead::new(vec![0.1, 0.1, 0.1, 100.0])
}

/// Final `c2` over offset (Hz, columns) and joint amplitude scale (rows).
pub fn b1_map(
    params: &ChorusParams,
    offsets_hz: &[f64],
    scales: &[f64],
    opts: &WnOptions,
) -> Result<GridResult> {
    if offsets_hz.is_empty() || scales.is_empty() {
        return Err(Error::domain("B1 map needs non-empty offset and scale grids"));
    }
    let seq = params.sequence()?;
    let opts = opts.clone().samples(Samples::Uniform(2));
    let cells: Vec<(usize, usize)> = (0..scales.len())
        .flat_map(|r| (0..offsets_hz.len()).map(move |c| (r, c)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(r, c)| {
            let b = propagate_bloch(&seq.scaled(scales[r]), TAU * offsets_hz[c], Z, &opts)?;
            Ok(b.last().map_or(0.0, |(v, _)| v[1].re))
        })
        .collect::<Result<_>>()?;
    Ok(GridResult {
        x_name: "offset_hz".into(),
        x: offsets_hz.to_vec(),
        y_name: "b1_scale".into(),
        y: scales.to_vec(),
        value_name: "c2".into(),
        values: values.chunks(offsets_hz.len()).map(<[f64]>::to_vec).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parameters() {
        let p = ChorusParams::reference();
        let expect = [40787.0, 86832.0, 97081.0];
        for (a, b) in p.omega1.iter().zip(expect) {
            assert!((a - b).abs() < 1.0, "{a} vs {b}");
        }
        let t = p.timing;
        assert_eq!(t.durations(), [0.0005, 0.00125, 0.001]);
        let c = t.centres();
        for (a, b) in c.iter().zip([0.00025, 0.001125, 0.0025]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((t.total() - 0.003).abs() < 1e-15);
    }

    #[test]
    fn common_phase_shift_rotates_about_z() {
        let p = ChorusParams::reference();
        let offs = [-20e3, 0.0, 35e3];
        let opts = WnOptions::with_tol(crate::integrator::Tolerances::new(1e-9, 1e-11));
        let before = chorus_profile(&p, &offs, &opts).unwrap();
        let aligned = align_phase(&p, &offs, &opts, 1.0).unwrap();
        assert!((mean_phase(&aligned, &offs, &opts).unwrap() - 1.0).abs() < 1e-6);
        let after = chorus_profile(&aligned, &offs, &opts).unwrap();
        let shift = aligned.phi0[0] - p.phi0[0];
        let c3a = before.values("c3").unwrap();
        let c3b = after.values("c3").unwrap();
        for (i, (pa, pb)) in before.values("phase").unwrap().iter().zip(after.values("phase").unwrap()).enumerate() {
            assert!(super::super::wrap(pb - pa - shift).abs() < 1e-6);
            assert!((c3a[i] - c3b[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn timing_constraint() {
        assert!(ChorusTiming::from_durations([0.5e-3, 1.25e-3, 1e-3]).is_ok());
        let err = ChorusTiming::from_durations([0.5e-3, 1.2e-3, 1e-3]).unwrap_err();
        assert!(err.to_string().contains("tau2 = tau1/2 + tau3"));
        assert!(ChorusTiming::new(0.0, 1e-3).is_err());
    }

    #[test]
    fn last_pulse_ends_with_sequence() {
        let p = ChorusParams::reference();
        let pulses = p.pulses();
        assert!((pulses[2].end() - p.timing.total()).abs() < 1e-15);
        assert!((pulses[0].end() - pulses[1].start()).abs() < 1e-15);
        assert!((pulses[2].start() - pulses[1].end() - p.timing.gap()).abs() < 1e-15);
    }
}
