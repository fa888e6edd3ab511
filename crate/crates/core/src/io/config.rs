//! TOML run configuration.
//!
//! User-facing units are Hz for offsets, sweep widths and frequency shifts,
//! seconds for times and degrees (or radians, with a `_rad` key) for angles.
//! Everything is converted to the library's internal units in [`load_config_str`]
//! and nowhere else.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{GradientContext, SpinSystem};
use crate::error::{Error, Result};
use crate::experiments::chorus::{ChorusParams, ChorusTiming};
use crate::experiments::composite::CompositeParams;
use crate::integrator::Tolerances;
use crate::pulse::{
    omega1_for_flip, rf_from_adiabaticity, saltire_rf_from_flip, ChirpParams, PulseSequence,
    Saltire, DEFAULT_SMOOTHING,
};

/// Adiabaticity cap applied when a chirp amplitude is given as a flip angle.
pub const FLIP_Q_CAP: f64 = 5.0;

/// Configuration file as written by the user.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<RawSpin>,
    #[serde(default, rename = "pulse", skip_serializing_if = "Vec::is_empty")]
    pub pulses: Vec<RawPulse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<RawSequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saltire: Option<RawSaltire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chorus: Option<RawChorus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient: Option<RawGradient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<RawState>,
    #[serde(default)]
    pub scan: RawScan,
    #[serde(default)]
    pub integrator: RawIntegrator,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpin {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_p_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_q_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_hz: Option<f64>,
}

/// One chirp. The amplitude is given by exactly one of `omega1` (rad/s),
/// `rf_hz`, `q` (adiabaticity) or `flip_deg`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPulse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_f_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSequence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSaltire {
    pub flip_deg: Option<f64>,
    pub sweep_hz: Option<f64>,
    pub tau_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
}

/// CHORUS timing and corrections. `tau2`, when given, must satisfy
/// `tau2 = tau1/2 + tau3`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChorus {
    pub tau1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau2: Option<f64>,
    pub tau3: Option<f64>,
    pub sweep_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega1: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0_rad: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0_deg: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_f_hz: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
}

/// Initial state: a 1-based basis index for coefficient runs or a Bloch
/// vector for single-spin runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGradient {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_slices: Option<usize>,
    /// Half width of the offset spread in Hz; defaults to half the sweep width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_span_hz: Option<f64>,
    #[serde(default = "yes")]
    pub enabled: bool,
}

fn yes() -> bool {
    true
}

/// Either an explicit list or `{ start, stop, n }` (inclusive, uniform).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, n: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScan {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets_hz: Option<RawGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<RawGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_deg: Option<RawGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1_scale: Option<RawGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawIntegrator {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

/// Saltire together with the flip angle it was calibrated for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaltireSpec {
    pub saltire: Saltire,
    pub flip_deg: f64,
}

/// Grids requested by the `[scan]` block, already in internal units except
/// offsets, which the experiment drivers take in Hz.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanSpec {
    pub offsets_hz: Option<Vec<f64>>,
    pub band_fraction: Option<f64>,
    pub xi: Option<Vec<f64>>,
    pub alpha_deg: Option<Vec<f64>>,
    pub b1_scale: Option<Vec<f64>>,
    pub optimize_points: Option<usize>,
}

/// Validated, unit-normalized configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub spin: Option<SpinSystem>,
    pub pulses: Vec<ChirpParams>,
    pub t_span: Option<(f64, f64)>,
    pub saltire: Option<SaltireSpec>,
    pub chorus: Option<ChorusParams>,
    pub gradient: Option<GradientContext>,
    /// 0-based basis index of the initial coefficient vector.
    pub initial_index: Option<usize>,
    pub initial_bloch: Option<[f64; 3]>,
    pub scan: ScanSpec,
    pub tol: Tolerances,
    pub svg: bool,
    pub samples: usize,
    /// The file as parsed, echoed into JSON summaries.
    pub raw: RawConfig,
}

impl RunConfig {
    /// The `[[pulse]]` blocks as one sequence.
    pub fn sequence(&self) -> Result<PulseSequence> {
        if self.pulses.is_empty() {
            return Err(Error::config("pulse", "at least one [[pulse]] block is required"));
        }
        match self.t_span {
            Some(span) => PulseSequence::with_span(self.pulses.clone(), span),
            None => PulseSequence::new(self.pulses.clone()),
        }
    }

    /// Three `[[pulse]]` blocks read as a composite refocusing element.
    pub fn composite(&self) -> Result<CompositeParams> {
        if self.pulses.len() != 3 {
            return Err(Error::config(
                "pulse",
                format!("composite refocusing needs 3 pulses, got {}", self.pulses.len()),
            ));
        }
        let n = self.pulses[0].n;
        if self.pulses.iter().any(|p| p.n != n) {
            return Err(Error::config("pulse.n", "all three pulses must share one smoothing order"));
        }
        let col = |f: fn(&ChirpParams) -> f64| [f(&self.pulses[0]), f(&self.pulses[1]), f(&self.pulses[2])];
        let t_end = match self.t_span {
            Some((_, t1)) => t1,
            None => self.sequence()?.t_span.1,
        };
        Ok(CompositeParams {
            omega1: col(|p| p.omega1),
            delta_f_sweep: col(|p| p.delta_f_sweep),
            tau_p: col(|p| p.tau_p),
            phi0: col(|p| p.phi0),
            delta_t: col(|p| p.delta_t),
            delta_f: col(|p| p.delta_f),
            n,
            t_end,
        })
    }

    pub fn require_spin(&self) -> Result<SpinSystem> {
        self.spin.ok_or_else(|| Error::config("spin", "a [spin] block is required"))
    }

    pub fn require_saltire(&self) -> Result<SaltireSpec> {
        self.saltire.ok_or_else(|| Error::config("saltire", "a [saltire] block is required"))
    }

    pub fn require_chorus(&self) -> Result<ChorusParams> {
        self.chorus.clone().ok_or_else(|| Error::config("chorus", "a [chorus] block is required"))
    }

    pub fn require_gradient(&self) -> Result<GradientContext> {
        self.gradient.ok_or_else(|| Error::config("gradient", "a [gradient] block is required"))
    }

    pub fn require_offsets(&self) -> Result<Vec<f64>> {
        self.scan
            .offsets_hz
            .clone()
            .ok_or_else(|| Error::config("scan.offsets_hz", "an offset grid is required"))
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    load_config_str(&text)
}

/// Parses and validates configuration text.
pub fn load_config_str(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0);
        Error::Parse {
            line,
            message: e.message().to_string(),
        }
    })?;
    normalize(raw)
}

fn positive(field: &str, v: Option<f64>) -> Result<f64> {
    match v {
        None => Err(Error::config(field, "missing")),
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(Error::config(field, format!("must be positive, got {x}"))),
    }
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(field, "must be finite"))
    }
}

fn angle(field: &str, deg: Option<f64>, rad: Option<f64>) -> Result<f64> {
    match (deg, rad) {
        (Some(_), Some(_)) => Err(Error::config(field, "give either degrees or radians, not both")),
        (Some(d), None) => finite(field, d.to_radians()),
        (None, Some(r)) => finite(field, r),
        (None, None) => Ok(0.0),
    }
}

fn grid(field: &str, g: &Option<RawGrid>) -> Result<Option<Vec<f64>>> {
    let Some(g) = g else { return Ok(None) };
    let values = match *g {
        RawGrid::List(ref v) => v.clone(),
        RawGrid::Range { start, stop, n } => {
            if n < 2 {
                return Err(Error::config(field, "a range needs n >= 2"));
            }
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| if i + 1 == n { stop } else { start + step * i as f64 }).collect()
        }
    };
    if values.is_empty() {
        return Err(Error::config(field, "grid is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config(field, "grid values must be finite"));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config(field, "grid must be strictly increasing"));
    }
    Ok(Some(values))
}

fn pulse(i: usize, p: &RawPulse) -> Result<ChirpParams> {
    let f = |name: &str| format!("pulse[{i}].{name}");
    let sweep = positive(&f("sweep_hz"), p.sweep_hz)?;
    let tau = positive(&f("tau_p"), p.tau_p)?;
    let given = [p.omega1.is_some(), p.rf_hz.is_some(), p.q.is_some(), p.flip_deg.is_some()];
    let omega1 = match given.iter().filter(|&&b| b).count() {
        0 => return Err(Error::config(f("omega1"), "missing (give omega1, rf_hz, q or flip_deg)")),
        1 => {
            if let Some(w) = p.omega1 {
                finite(&f("omega1"), w)?
            } else if let Some(rf) = p.rf_hz {
                TAU * finite(&f("rf_hz"), rf)?
            } else if let Some(q) = p.q {
                rf_from_adiabaticity(sweep, positive(&f("q"), Some(q))?, tau)?.1
            } else {
                let deg = positive(&f("flip_deg"), p.flip_deg)?;
                omega1_for_flip(deg.to_radians(), sweep, tau, FLIP_Q_CAP)?
            }
        }
        _ => {
            return Err(Error::config(
                f("omega1"),
                "omega1, rf_hz, q and flip_deg are mutually exclusive",
            ))
        }
    };
    let chirp = ChirpParams {
        omega1,
        delta_f_sweep: sweep,
        tau_p: tau,
        phi0: angle(&f("phi0"), p.phi0_deg, p.phi0_rad)?,
        delta_t: finite(&f("delta_t"), p.delta_t.unwrap_or(tau / 2.0))?,
        delta_f: finite(&f("delta_f_hz"), p.delta_f_hz.unwrap_or(0.0))?,
        n: p.n.unwrap_or(DEFAULT_SMOOTHING),
    };
    chirp.validate().map_err(|e| Error::config(f("*"), e.to_string()))?;
    Ok(chirp)
}

fn spin(s: &RawSpin) -> Result<SpinSystem> {
    match (s.offset_hz, s.offset_p_hz, s.offset_q_hz, s.j_hz) {
        (Some(o), None, None, None) => Ok(SpinSystem::single(TAU * finite("spin.offset_hz", o)?)),
        (None, Some(p), Some(q), Some(j)) => Ok(SpinSystem::coupled(
            TAU * finite("spin.offset_p_hz", p)?,
            TAU * finite("spin.offset_q_hz", q)?,
            finite("spin.j_hz", j)?,
        )),
        (None, Some(_), Some(_), None) => Err(Error::config("spin.j_hz", "missing")),
        (None, Some(_), None, _) => Err(Error::config("spin.offset_q_hz", "missing")),
        (None, None, Some(_), _) => Err(Error::config("spin.offset_p_hz", "missing")),
        (None, None, None, _) => Err(Error::config("spin.offset_hz", "missing")),
        _ => Err(Error::config(
            "spin",
            "give offset_hz for one spin or offset_p_hz, offset_q_hz and j_hz for two",
        )),
    }
}

fn chorus(c: &RawChorus) -> Result<ChorusParams> {
    let tau1 = positive("chorus.tau1", c.tau1)?;
    let tau3 = positive("chorus.tau3", c.tau3)?;
    let timing = match c.tau2 {
        Some(tau2) => ChorusTiming::from_durations([tau1, tau2, tau3]),
        None => ChorusTiming::new(tau1, tau3),
    }
    .map_err(|e| match e {
        Error::Config { message, .. } => Error::config("chorus.tau2", message),
        other => other,
    })?;
    let sweep = positive("chorus.sweep_hz", c.sweep_hz)?;
    let mut params = ChorusParams::calibrated(timing, sweep)?;
    if let Some(w) = c.omega1 {
        for (i, x) in w.iter().enumerate() {
            positive(&format!("chorus.omega1[{i}]"), Some(*x))?;
        }
        params.omega1 = w;
    }
    params.phi0 = match (c.phi0_deg, c.phi0_rad) {
        (Some(_), Some(_)) => {
            return Err(Error::config("chorus.phi0", "give either degrees or radians, not both"))
        }
        (Some(d), None) => d.map(f64::to_radians),
        (None, Some(r)) => r,
        (None, None) => [0.0; 3],
    };
    if params.phi0.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("chorus.phi0", "must be finite"));
    }
    params.delta_f = c.delta_f_hz.unwrap_or([0.0; 3]);
    if params.delta_f.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("chorus.delta_f_hz", "must be finite"));
    }
    params.n = c.n.unwrap_or(DEFAULT_SMOOTHING);
    if params.n < 2 || params.n % 2 != 0 {
        return Err(Error::config("chorus.n", "must be an even integer >= 2"));
    }
    Ok(params)
}

fn normalize(raw: RawConfig) -> Result<RunConfig> {
    let spin = raw.spin.as_ref().map(spin).transpose()?;
    let pulses = raw
        .pulses
        .iter()
        .enumerate()
        .map(|(i, p)| pulse(i, p))
        .collect::<Result<Vec<_>>>()?;
    let t_span = match &raw.sequence {
        None => None,
        Some(s) => {
            let t0 = finite("sequence.t_start", s.t_start.unwrap_or(0.0))?;
            let t1 = match s.t_end {
                Some(t) => finite("sequence.t_end", t)?,
                None => pulses.iter().map(ChirpParams::end).fold(t0, f64::max),
            };
            if !(t1 > t0) {
                return Err(Error::config("sequence.t_end", "must exceed t_start"));
            }
            Some((t0, t1))
        }
    };
    let saltire = match &raw.saltire {
        None => None,
        Some(s) => {
            let flip = positive("saltire.flip_deg", s.flip_deg)?;
            let sweep = positive("saltire.sweep_hz", s.sweep_hz)?;
            let tau = positive("saltire.tau_p", s.tau_p)?;
            let rf = saltire_rf_from_flip(flip, sweep, tau)?;
            let saltire = Saltire::new(TAU * rf, sweep, tau, s.n.unwrap_or(DEFAULT_SMOOTHING))
                .map_err(|e| Error::config("saltire.n", e.to_string()))?;
            Some(SaltireSpec {
                saltire,
                flip_deg: flip,
            })
        }
    };
    let chorus = raw.chorus.as_ref().map(chorus).transpose()?;
    let gradient = match &raw.gradient {
        Some(g) if g.enabled => {
            let n_slices = g.n_slices.unwrap_or(GradientContext::DEFAULT_SLICES);
            if n_slices == 0 {
                return Err(Error::config("gradient.n_slices", "must be at least 1"));
            }
            let half_span = match g.half_span_hz {
                Some(h) => TAU * positive("gradient.half_span_hz", Some(h))?,
                None => {
                    let sweep = saltire
                        .map(|s| s.saltire.delta_f_sweep)
                        .or_else(|| pulses.first().map(|p| p.delta_f_sweep))
                        .ok_or_else(|| {
                            Error::config(
                                "gradient.half_span_hz",
                                "missing, and no pulse to take a sweep width from",
                            )
                        })?;
                    GradientContext::for_sweep(sweep, n_slices).half_span
                }
            };
            Some(GradientContext {
                n_slices,
                half_span,
            })
        }
        _ => None,
    };
    let (initial_index, initial_bloch) = match &raw.state {
        None => (None, None),
        Some(RawState { index: Some(_), bloch: Some(_) }) => {
            return Err(Error::config("state", "give either index or bloch, not both"))
        }
        Some(RawState { index: Some(0), .. }) => {
            return Err(Error::config("state.index", "indices start at 1"))
        }
        Some(st) => {
            if let Some(b) = st.bloch {
                if b.iter().any(|v| !v.is_finite()) || b.iter().all(|v| *v == 0.0) {
                    return Err(Error::config("state.bloch", "must be a finite nonzero vector"));
                }
            }
            (st.index.map(|i| i - 1), st.bloch)
        }
    };
    let band_fraction = match raw.scan.band_fraction {
        Some(f) if !(f > 0.0 && f <= 1.0) => {
            return Err(Error::config("scan.band_fraction", "must lie in (0, 1]"))
        }
        f => f,
    };
    let scan = ScanSpec {
        offsets_hz: grid("scan.offsets_hz", &raw.scan.offsets_hz)?,
        band_fraction,
        xi: grid("scan.xi", &raw.scan.xi)?,
        alpha_deg: grid("scan.alpha_deg", &raw.scan.alpha_deg)?,
        b1_scale: grid("scan.b1_scale", &raw.scan.b1_scale)?,
        optimize_points: match raw.scan.optimize_points {
            Some(n) if n < 3 => return Err(Error::config("scan.optimize_points", "must be at least 3")),
            n => n,
        },
    };
    let defaults = Tolerances::default();
    let tol = Tolerances::new(
        positive("integrator.rtol", Some(raw.integrator.rtol.unwrap_or(defaults.rtol)))?,
        positive("integrator.atol", Some(raw.integrator.atol.unwrap_or(defaults.atol)))?,
    );
    let samples = raw.output.samples.unwrap_or(201);
    if samples < 2 {
        return Err(Error::config("output.samples", "must be at least 2"));
    }
    Ok(RunConfig {
        scenario: raw.scenario.clone(),
        spin,
        pulses,
        t_span,
        saltire,
        chorus,
        gradient,
        initial_index,
        initial_bloch,
        scan,
        tol,
        svg: raw.output.svg.unwrap_or(true),
        samples,
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const COMPOSITE: &str = r#"
scenario = "composite"

[sequence]
t_end = 4e-3

[[pulse]]
q = 5.0
sweep_hz = 2e5
tau_p = 1e-3
delta_t = 0.5e-3

[[pulse]]
omega1 = 79267.0
sweep_hz = 2e5
tau_p = 2e-3
delta_t = 2.0e-3

[[pulse]]
rf_hz = 12615.6
sweep_hz = 2e5
tau_p = 1e-3
delta_t = 3.5e-3
"#;

    #[test]
    fn composite_block_reads_back() {
        let cfg = load_config_str(COMPOSITE).unwrap();
        let c = cfg.composite().unwrap();
        assert_eq!(c.tau_p, [1e-3, 2e-3, 1e-3]);
        assert_eq!(c.delta_t, [0.5e-3, 2.0e-3, 3.5e-3]);
        assert_eq!(c.t_end, 4e-3);
        for w in c.omega1 {
            assert!((w - 79267.0).abs() < 1.0, "{w}");
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = load_config_str("scenario = \"x\"\n\n[spin]\noffset_hz = 1.0\nbogus = 2\n").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 5, "{message}");
                assert!(message.contains("bogus"), "{message}");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn missing_tau_is_named() {
        let err = load_config_str("[[pulse]]\nq = 5.0\nsweep_hz = 1e5\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "pulse[0].tau_p"), "{err}");
    }

    #[test]
    fn chorus_constraint_is_cited() {
        let text = "[chorus]\ntau1 = 5e-4\ntau2 = 2e-3\ntau3 = 1e-3\nsweep_hz = 3e5\n";
        let err = load_config_str(text).unwrap_err();
        assert!(err.to_string().contains("tau2 = tau1/2 + tau3"), "{err}");
        let ok = "[chorus]\ntau1 = 5e-4\ntau2 = 1.25e-3\ntau3 = 1e-3\nsweep_hz = 3e5\n";
        assert_eq!(load_config_str(ok).unwrap().chorus.unwrap(), ChorusParams::reference());
    }

    #[test]
    fn units_convert_once() {
        let cfg = load_config_str(
            "[spin]\noffset_p_hz = 100.0\noffset_q_hz = -100.0\nj_hz = 10.0\n\n[scan]\noffsets_hz = { start = -1.0, stop = 1.0, n = 5 }\n",
        )
        .unwrap();
        assert_eq!(cfg.spin, Some(SpinSystem::coupled(TAU * 100.0, -TAU * 100.0, 10.0)));
        assert_eq!(cfg.scan.offsets_hz.unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn amplitude_must_be_unique() {
        let err = load_config_str("[[pulse]]\nq = 5.0\nrf_hz = 1.0\nsweep_hz = 1e5\ntau_p = 1e-3\n").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }
}
