//! Generalised chirped pulses.
//!
//! A chirp is described by six parameters (amplitude, sweep width,
//! duration, phase, time offset, frequency offset) plus the order of its
//! super-Gaussian envelope. Pulse sequences are the pointwise sum of their
//! members, so delays are expressed through the time offsets alone.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default super-Gaussian order.
pub const DEFAULT_SMOOTHING: u32 = 40;

/// One generalised chirped pulse. Frequencies are in Hz, `omega1` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpParams {
    pub omega1: f64,
    pub delta_f_sweep: f64,
    pub tau_p: f64,
    pub phi0: f64,
    pub delta_t: f64,
    pub delta_f: f64,
    pub n: u32,
}

impl ChirpParams {
    /// Centred chirp occupying `[0, tau_p]` with zero phase and frequency offset.
    pub fn centred(omega1: f64, delta_f_sweep: f64, tau_p: f64) -> Self {
        ChirpParams {
            omega1,
            delta_f_sweep,
            tau_p,
            phi0: 0.0,
            delta_t: tau_p / 2.0,
            delta_f: 0.0,
            n: DEFAULT_SMOOTHING,
        }
    }

    pub fn with_smoothing(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_p > 0.0 && self.tau_p.is_finite()) {
            return Err(Error::domain(format!("tau_p must be positive, got {}", self.tau_p)));
        }
        if !(self.delta_f_sweep >= 0.0 && self.delta_f_sweep.is_finite()) {
            return Err(Error::domain(format!(
                "sweep width must be non-negative, got {}",
                self.delta_f_sweep
            )));
        }
        if !(self.omega1 >= 0.0 && self.omega1.is_finite()) {
            return Err(Error::domain(format!("omega1 must be non-negative, got {}", self.omega1)));
        }
        if self.n < 2 || self.n % 2 != 0 {
            return Err(Error::domain(format!(
                "smoothing order must be an even integer >= 2, got {}",
                self.n
            )));
        }
        if !(self.phi0.is_finite() && self.delta_t.is_finite() && self.delta_f.is_finite()) {
            return Err(Error::domain("phase and offsets must be finite"));
        }
        Ok(())
    }

    /// Phase of the chirp at time `t` (rad), without the envelope.
    pub fn phase(&self, t: f64) -> f64 {
        let dt = t - self.delta_t;
        self.phi0 + PI * self.delta_f_sweep * dt * dt / self.tau_p - TAU * self.delta_f * dt
    }

    /// Complex amplitude of this pulse alone (rad/s).
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let amp = self.omega1 * envelope(self, t);
        if amp == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(amp, self.phase(t))
    }

    /// End of the nominal support, `delta_t + tau_p / 2`.
    pub fn end(&self) -> f64 {
        self.delta_t + self.tau_p / 2.0
    }

    pub fn start(&self) -> f64 {
        self.delta_t - self.tau_p / 2.0
    }
}

/// Super-Gaussian time envelope, `exp(-2^(n+2) ((t - dt)/tau)^n)`.
pub fn envelope(p: &ChirpParams, t: f64) -> f64 {
    let x = (t - p.delta_t) / p.tau_p;
    // (2x)^n * 4 avoids overflowing 2^(n+2) for large n
    let y = (2.0 * x).powi(p.n as i32);
    (-4.0 * y).exp()
}

/// An ordered set of chirps evaluated as a single continuous waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub pulses: Vec<ChirpParams>,
    pub t_span: (f64, f64),
}

impl PulseSequence {
    /// Builds a sequence with the default span `[0, max end * (1 + 1e-3)]`.
    pub fn new(pulses: Vec<ChirpParams>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::domain("a pulse sequence needs at least one pulse"));
        }
        let end = pulses.iter().map(ChirpParams::end).fold(f64::MIN, f64::max);
        Self::with_span(pulses, (0.0, end * (1.0 + 1e-3)))
    }

    pub fn with_span(pulses: Vec<ChirpParams>, t_span: (f64, f64)) -> Result<Self> {
        for p in &pulses {
            p.validate()?;
        }
        if !(t_span.1 > t_span.0) {
            return Err(Error::domain(format!(
                "empty time span [{}, {}]",
                t_span.0, t_span.1
            )));
        }
        Ok(PulseSequence { pulses, t_span })
    }

    pub fn single(p: ChirpParams) -> Result<Self> {
        Self::new(vec![p])
    }

    /// Pointwise sum of all member pulses (rad/s).
    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.pulses.iter().map(|p| p.evaluate(t)).sum()
    }

    /// Sum of member amplitudes; an upper bound on `|evaluate(t)|`.
    pub fn peak_bound(&self) -> f64 {
        self.pulses.iter().map(|p| p.omega1).sum()
    }

    /// Copy with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.pulses {
            p.omega1 *= factor;
        }
        out
    }

    pub fn duration(&self) -> f64 {
        self.t_span.1 - self.t_span.0
    }

    /// Uniformly sampled copy of the waveform.
    pub fn sample(&self, density: Sampling) -> Result<SampledWaveform> {
        let (t0, t1) = self.t_span;
        let count = match density {
            Sampling::Count(n) => {
                if n < 2 {
                    return Err(Error::domain("at least two samples are required"));
                }
                n
            }
            Sampling::Step(dt) => {
                if !(dt > 0.0) {
                    return Err(Error::domain("sampling step must be positive"));
                }
                ((t1 - t0) / dt).ceil() as usize + 1
            }
        };
        let times = linspace(t0, t1, count);
        let (cx, cy) = times
            .iter()
            .map(|&t| {
                let s = self.evaluate(t);
                (s.re, s.im)
            })
            .unzip();
        Ok(SampledWaveform { times, cx, cy })
    }
}

/// Requested sampling density for [`PulseSequence::sample`].
#[derive(Debug, Clone, Copy)]
pub enum Sampling {
    Count(usize),
    Step(f64),
}

/// Cartesian samples of a waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub times: Vec<f64>,
    pub cx: Vec<f64>,
    pub cy: Vec<f64>,
}

impl SampledWaveform {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn amplitude(&self) -> Vec<f64> {
        self.cx.iter().zip(&self.cy).map(|(x, y)| x.hypot(*y)).collect()
    }

    /// Wrapped phase in (-pi, pi].
    pub fn phase(&self) -> Vec<f64> {
        self.cx.iter().zip(&self.cy).map(|(x, y)| y.atan2(*x)).collect()
    }

    /// Instantaneous frequency (Hz) from the unwrapped phase by central differences.
    pub fn instantaneous_frequency(&self) -> Vec<f64> {
        let phase = unwrap_phase(&self.phase());
        let n = phase.len();
        (0..n)
            .map(|i| {
                let (a, b) = match i {
                    0 => (0, 1.min(n - 1)),
                    _ if i == n - 1 => (n - 2, n - 1),
                    _ => (i - 1, i + 1),
                };
                if a == b {
                    0.0
                } else {
                    (phase[b] - phase[a]) / (self.times[b] - self.times[a]) / TAU
                }
            })
            .collect()
    }
}

/// Cumulative nearest-branch phase unwrapping.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phase {
        if let Some(q) = prev {
            let jump = p - q;
            offset -= TAU * (jump / TAU).round();
        }
        out.push(p + offset);
        prev = Some(p);
    }
    out
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
                .collect()
        }
    }
}

/// Amplitude-modulated double sweep: the average of two counter-sweeping chirps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saltire {
    pub omega1: f64,
    pub delta_f_sweep: f64,
    pub tau_p: f64,
    pub n: u32,
}

impl Saltire {
    pub fn new(omega1: f64, delta_f_sweep: f64, tau_p: f64, n: u32) -> Result<Self> {
        let s = Saltire {
            omega1,
            delta_f_sweep,
            tau_p,
            n,
        };
        s.as_chirp(1.0).validate()?;
        Ok(s)
    }

    /// Real waveform value (rad/s).
    pub fn evaluate(&self, t: f64) -> f64 {
        let c = self.as_chirp(1.0);
        let dt = t - self.tau_p / 2.0;
        self.omega1
            * envelope(&c, t)
            * (PI * self.delta_f_sweep * dt * dt / self.tau_p).cos()
    }

    /// One of the two constituent chirps; `direction` is +1 or -1.
    pub fn as_chirp(&self, direction: f64) -> ChirpParams {
        ChirpParams {
            omega1: self.omega1,
            delta_f_sweep: self.delta_f_sweep * direction.signum(),
            tau_p: self.tau_p,
            phi0: 0.0,
            delta_t: self.tau_p / 2.0,
            delta_f: 0.0,
            n: self.n,
        }
    }

    /// The two counter-sweeping chirps at half amplitude; their sum equals the saltire.
    ///
    /// The down-sweep carries a negative `delta_f_sweep`, so it is not a valid
    /// standalone [`ChirpParams`] and is only evaluated directly.
    pub fn components(&self) -> [ChirpParams; 2] {
        let mut up = self.as_chirp(1.0);
        let mut down = self.as_chirp(-1.0);
        up.omega1 *= 0.5;
        down.omega1 *= 0.5;
        [up, down]
    }
}

/// Peak RF amplitude of an adiabatic chirp: returns `(rf_max [Hz], omega1 [rad/s])`.
pub fn rf_from_adiabaticity(delta_f_sweep: f64, q: f64, tau_p: f64) -> Result<(f64, f64)> {
    if !(delta_f_sweep > 0.0 && q > 0.0 && tau_p > 0.0) {
        return Err(Error::domain(format!(
            "sweep width, Q and duration must be positive (got {delta_f_sweep}, {q}, {tau_p})"
        )));
    }
    let rf_max = (delta_f_sweep * q / (TAU * tau_p)).sqrt();
    Ok((rf_max, TAU * rf_max))
}

/// Adiabaticity factor that yields flip angle `alpha` (rad) for a chirp.
pub fn q_from_flip(alpha: f64) -> Result<f64> {
    if !(0.0..PI).contains(&alpha) {
        return Err(Error::domain(format!(
            "flip angle must lie in [0, pi) for a finite Q, got {alpha}"
        )));
    }
    Ok(2.0 / PI * (2.0 / (alpha.cos() + 1.0)).ln())
}

/// Peak RF amplitude (Hz) of a saltire with flip angle `alpha_deg`.
pub fn saltire_rf_from_flip(alpha_deg: f64, delta_f_sweep: f64, tau_p: f64) -> Result<f64> {
    if !(alpha_deg >= 0.0 && delta_f_sweep > 0.0 && tau_p > 0.0) {
        return Err(Error::domain("saltire calibration needs positive inputs"));
    }
    Ok(alpha_deg / 360.0 * (2.0 * delta_f_sweep / tau_p).sqrt())
}

/// Chirp amplitude (rad/s) for flip angle `alpha` (rad), capped at Q = `q_cap`.
pub fn omega1_for_flip(alpha: f64, delta_f_sweep: f64, tau_p: f64, q_cap: f64) -> Result<f64> {
    let q = if alpha >= PI { q_cap } else { q_from_flip(alpha)?.min(q_cap) };
    Ok(rf_from_adiabaticity(delta_f_sweep, q, tau_p)?.1)
}
