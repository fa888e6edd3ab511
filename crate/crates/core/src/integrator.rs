//! Explicit ODE solvers over complex state vectors.
//!
//! [`integrate_adaptive`] is an embedded Dormand-Prince 5(4) pair with PI
//! step-size control and fourth-order dense output. [`integrate_expm_oracle`]
//! is an independent piecewise-constant propagator used to validate it.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::CMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative and absolute error tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

impl Tolerances {
    pub const fn new(rtol: f64, atol: f64) -> Self {
        Tolerances { rtol, atol }
    }
}

/// Settings for the adaptive solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub tol: Tolerances,
    pub max_steps: usize,
    /// Initial step; estimated from the right-hand side when `None`.
    pub h0: Option<f64>,
    /// Largest allowed step; the span length when `None`.
    pub h_max: Option<f64>,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            tol: Tolerances::default(),
            max_steps: 10_000_000,
            h0: None,
            h_max: None,
        }
    }
}

impl AdaptiveOptions {
    pub fn with_tol(tol: Tolerances) -> Self {
        AdaptiveOptions {
            tol,
            ..Default::default()
        }
    }

    pub fn h_max(mut self, h_max: f64) -> Self {
        self.h_max = Some(h_max);
        self
    }
}

/// Initial-value problem `y' = f(t, y)` on `t_span`.
pub struct OdeProblem<F> {
    pub rhs: F,
    pub y0: Vec<Complex64>,
    pub t_span: (f64, f64),
    /// Output times; every accepted step is recorded when `None`.
    pub sample_times: Option<Vec<f64>>,
}

impl<F> OdeProblem<F>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    pub fn new(rhs: F, y0: Vec<Complex64>, t_span: (f64, f64)) -> Self {
        OdeProblem {
            rhs,
            y0,
            t_span,
            sample_times: None,
        }
    }

    pub fn sampled_at(mut self, times: Vec<f64>) -> Self {
        self.sample_times = Some(times);
        self
    }

    fn validate(&self) -> Result<()> {
        let (t0, t1) = self.t_span;
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::domain(format!("invalid time span [{t0}, {t1}]")));
        }
        if self.y0.iter().any(|y| !y.re.is_finite() || !y.im.is_finite()) {
            return Err(Error::domain("initial state is not finite"));
        }
        Ok(())
    }
}

/// Work counters for one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
}

impl std::ops::AddAssign for Stats {
    fn add_assign(&mut self, rhs: Self) {
        self.steps_accepted += rhs.steps_accepted;
        self.steps_rejected += rhs.steps_rejected;
        self.rhs_evals += rhs.rhs_evals;
    }
}

/// Sampled solution of an ODE.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub stats: Stats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&[Complex64]> {
        self.states.last().map(Vec::as_slice)
    }

    /// Time series of component `k`.
    pub fn component(&self, k: usize) -> Vec<Complex64> {
        self.states.iter().map(|s| s[k]).collect()
    }
}

/// Outcome of [`integrate_adaptive_until`].
#[derive(Debug, Clone)]
pub struct Run {
    pub trajectory: Trajectory,
    /// Time at which the stop predicate fired, if it did.
    pub stopped_at: Option<f64>,
    pub final_t: f64,
    pub final_state: Vec<Complex64>,
}

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// step-size controller
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// Integrates `problem` to the end of its span.
pub fn integrate_adaptive<F>(problem: OdeProblem<F>, opts: &AdaptiveOptions) -> Result<Trajectory>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    integrate_adaptive_until(problem, opts, |_, _| false).map(|run| run.trajectory)
}

/// Like [`integrate_adaptive`], but stops after the first accepted step at
/// which `stop(t, y)` returns true. Samples up to that time are recorded.
pub fn integrate_adaptive_until<F, S>(
    mut problem: OdeProblem<F>,
    opts: &AdaptiveOptions,
    mut stop: S,
) -> Result<Run>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    S: FnMut(f64, &[Complex64]) -> bool,
{
    problem.validate()?;
    let Tolerances { rtol, atol } = opts.tol;
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(Error::domain("tolerances must be positive"));
    }
    let (t0, t1) = problem.t_span;
    let span = t1 - t0;
    let h_max = opts.h_max.unwrap_or(span).min(span);
    let h_min = 1e-14 * span;

    let samples = match problem.sample_times.take() {
        Some(times) => Some(normalize_samples(times, t0, t1)?),
        None => None,
    };
    let mut next_sample = 0usize;

    let n = problem.y0.len();
    let f = &mut problem.rhs;
    let mut stats = Stats::default();
    let mut traj = Trajectory::default();

    let mut t = t0;
    let mut y = problem.y0.clone();
    let mut k1 = vec![ZERO; n];
    f(t, &y, &mut k1);
    stats.rhs_evals += 1;

    let record = |traj: &mut Trajectory, t: f64, y: &[Complex64]| {
        traj.times.push(t);
        traj.states.push(y.to_vec());
    };

    match &samples {
        None => record(&mut traj, t, &y),
        Some(s) => {
            while next_sample < s.len() && s[next_sample] <= t0 {
                record(&mut traj, s[next_sample], &y);
                next_sample += 1;
            }
        }
    }

    if n == 0 {
        traj.stats = stats;
        if let Some(s) = &samples {
            for &ts in &s[next_sample..] {
                record(&mut traj, ts, &y);
            }
        } else {
            record(&mut traj, t1, &y);
        }
        return Ok(Run {
            trajectory: traj,
            stopped_at: None,
            final_t: t1,
            final_state: y,
        });
    }

    let mut h = match opts.h0 {
        Some(h0) => h0.min(h_max),
        None => {
            let h = initial_step(f, t, &y, &k1, rtol, atol, h_max);
            stats.rhs_evals += 1;
            h
        }
    };

    let mut k2 = vec![ZERO; n];
    let mut k3 = vec![ZERO; n];
    let mut k4 = vec![ZERO; n];
    let mut k5 = vec![ZERO; n];
    let mut k6 = vec![ZERO; n];
    let mut k7 = vec![ZERO; n];
    let mut ytmp = vec![ZERO; n];
    let mut ynew = vec![ZERO; n];
    let mut fac_old = 1e-4f64;
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        if t >= t1 {
            break;
        }
        if steps >= opts.max_steps {
            return Err(Error::MaxStepsExceeded { t, steps });
        }
        if h < h_min {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let last = t + h >= t1 || t1 - (t + h) < h_min;
        if last {
            h = t1 - t;
        }
        steps += 1;

        for i in 0..n {
            ytmp[i] = y[i] + k1[i] * (h * A21);
        }
        f(t + C2 * h, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        f(t + C3 * h, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        f(t + C4 * h, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        f(t + C5 * h, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] = y[i]
                + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        f(t + h, &ytmp, &mut k6);
        for i in 0..n {
            ynew[i] = y[i]
                + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        f(t + h, &ynew, &mut k7);
        stats.rhs_evals += 6;

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                * h;
            let sk = atol + rtol * y[i].norm().max(ynew[i].norm());
            err = err.max(e.norm() / sk);
        }
        if !err.is_finite() {
            stats.steps_rejected += 1;
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(0.2 - BETA * 0.75);
        let mut fac = fac11 / fac_old.powf(BETA);
        fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let mut h_new = h / fac;

        if err <= 1.0 {
            fac_old = err.max(1e-4);
            stats.steps_accepted += 1;
            let t_new = if last { t1 } else { t + h };

            if let Some(s) = &samples {
                if next_sample < s.len() && s[next_sample] <= t_new {
                    let dense = DenseStep::new(&y, &ynew, &k1, &k3, &k4, &k5, &k6, &k7, h);
                    while next_sample < s.len() && s[next_sample] <= t_new {
                        let ts = s[next_sample];
                        let theta = ((ts - t) / h).clamp(0.0, 1.0);
                        if ts == t_new {
                            record(&mut traj, ts, &ynew);
                        } else {
                            traj.times.push(ts);
                            traj.states.push(dense.eval(theta));
                        }
                        next_sample += 1;
                    }
                }
            } else {
                record(&mut traj, t_new, &ynew);
            }

            std::mem::swap(&mut k1, &mut k7);
            std::mem::swap(&mut y, &mut ynew);
            t = t_new;

            if stop(t, &y) && t < t1 {
                traj.stats = stats;
                return Ok(Run {
                    trajectory: traj,
                    stopped_at: Some(t),
                    final_t: t,
                    final_state: y,
                });
            }

            h_new = h_new.min(h_max);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            stats.steps_rejected += 1;
            h_new = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
            h = h_new;
        }
    }

    traj.stats = stats;
    Ok(Run {
        trajectory: traj,
        stopped_at: None,
        final_t: t,
        final_state: y,
    })
}

struct DenseStep {
    r1: Vec<Complex64>,
    r2: Vec<Complex64>,
    r3: Vec<Complex64>,
    r4: Vec<Complex64>,
    r5: Vec<Complex64>,
}

impl DenseStep {
    #[allow(clippy::too_many_arguments)]
    fn new(
        y: &[Complex64],
        ynew: &[Complex64],
        k1: &[Complex64],
        k3: &[Complex64],
        k4: &[Complex64],
        k5: &[Complex64],
        k6: &[Complex64],
        k7: &[Complex64],
        h: f64,
    ) -> Self {
        let n = y.len();
        let mut d = DenseStep {
            r1: y.to_vec(),
            r2: vec![ZERO; n],
            r3: vec![ZERO; n],
            r4: vec![ZERO; n],
            r5: vec![ZERO; n],
        };
        for i in 0..n {
            let dy = ynew[i] - y[i];
            let bspl = k1[i] * h - dy;
            d.r2[i] = dy;
            d.r3[i] = bspl;
            d.r4[i] = dy - k7[i] * h - bspl;
            d.r5[i] =
                (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
        }
        d
    }

    fn eval(&self, theta: f64) -> Vec<Complex64> {
        let theta1 = 1.0 - theta;
        (0..self.r1.len())
            .map(|i| {
                self.r1[i]
                    + (self.r2[i]
                        + (self.r3[i] + (self.r4[i] + self.r5[i] * theta1) * theta) * theta1)
                        * theta
            })
            .collect()
    }
}

fn normalize_samples(mut times: Vec<f64>, t0: f64, t1: f64) -> Result<Vec<f64>> {
    if times.iter().any(|t| !t.is_finite() || *t < t0 || *t > t1) {
        return Err(Error::domain("sample times must lie inside the time span"));
    }
    times.push(t0);
    times.push(t1);
    times.sort_by(f64::total_cmp);
    times.dedup();
    Ok(times)
}

fn rms_scaled(v: &[Complex64], scale: &[f64]) -> f64 {
    let n = v.len().max(1) as f64;
    (v.iter().zip(scale).map(|(x, s)| (x.norm() / s).powi(2)).sum::<f64>() / n).sqrt()
}

fn initial_step<F>(
    f: &mut F,
    t: f64,
    y: &[Complex64],
    f0: &[Complex64],
    rtol: f64,
    atol: f64,
    h_max: f64,
) -> f64
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let sk: Vec<f64> = y.iter().map(|v| atol + rtol * v.norm()).collect();
    let dnf = rms_scaled(f0, &sk);
    let dny = rms_scaled(y, &sk);
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6 * h_max
    } else {
        0.01 * dny / dnf
    };
    h = h.min(h_max);
    let y1: Vec<Complex64> = y.iter().zip(f0).map(|(a, b)| a + b * h).collect();
    let mut f1 = vec![ZERO; y.len()];
    f(t + h, &y1, &mut f1);
    let diff: Vec<Complex64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let der2 = rms_scaled(&diff, &sk) / h;
    let der12 = der2.max(dnf);
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6 * h_max)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(h_max)
}

/// Classical fixed-step fourth-order Runge-Kutta; returns the final state and work counters.
pub fn integrate_rk4<F>(
    mut f: F,
    y0: &[Complex64],
    t_span: (f64, f64),
    n_steps: usize,
) -> (Vec<Complex64>, Stats)
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y0.len();
    let h = (t_span.1 - t_span.0) / n_steps as f64;
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
    let mut tmp = vec![ZERO; n];
    for s in 0..n_steps {
        let t = t_span.0 + h * s as f64;
        f(t, &y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        f(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    let stats = Stats {
        steps_accepted: n_steps,
        steps_rejected: 0,
        rhs_evals: 4 * n_steps,
    };
    (y, stats)
}

/// Piecewise-constant propagation `y <- exp(-i Gamma(t_mid) dt) y` over
/// `n_steps` uniform steps; returns the final state.
pub fn integrate_expm_oracle<G>(
    gamma_fn: G,
    y0: &[Complex64],
    t_span: (f64, f64),
    n_steps: usize,
) -> Vec<Complex64>
where
    G: Fn(f64) -> CMatrix,
{
    let traj = expm_oracle_samples(gamma_fn, y0, t_span, n_steps, n_steps);
    traj.states.last().cloned().unwrap_or_else(|| y0.to_vec())
}

/// Same propagation as [`integrate_expm_oracle`], recording the state every
/// `record_every` steps (and at both ends).
pub fn expm_oracle_samples<G>(
    gamma_fn: G,
    y0: &[Complex64],
    t_span: (f64, f64),
    n_steps: usize,
    record_every: usize,
) -> Trajectory
where
    G: Fn(f64) -> CMatrix,
{
    assert!(n_steps >= 1, "the oracle needs at least one step");
    let record_every = record_every.max(1);
    let dt = (t_span.1 - t_span.0) / n_steps as f64;
    let mut y = DVector::from_column_slice(y0);
    let mut traj = Trajectory {
        times: vec![t_span.0],
        states: vec![y0.to_vec()],
        stats: Stats::default(),
    };
    let scale = Complex64::new(0.0, -dt);
    for s in 0..n_steps {
        let t_mid = t_span.0 + dt * (s as f64 + 0.5);
        let step = (gamma_fn(t_mid) * scale).exp();
        y = step * y;
        if (s + 1) % record_every == 0 || s + 1 == n_steps {
            traj.times.push(if s + 1 == n_steps {
                t_span.1
            } else {
                t_span.0 + dt * (s + 1) as f64
            });
            traj.states.push(y.as_slice().to_vec());
        }
    }
    traj.stats.steps_accepted = n_steps;
    traj
}

/// Richardson extrapolation for a second-order method: `(4 fine - coarse) / 3`,
/// where `fine` used twice as many steps as `coarse`.
pub fn richardson(coarse: &[Complex64], fine: &[Complex64]) -> Vec<Complex64> {
    coarse
        .iter()
        .zip(fine)
        .map(|(c, f)| (f * 4.0 - c) / 3.0)
        .collect()
}

/// Largest componentwise modulus of `a - b`.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_rhs_is_constant() {
        let y0 = vec![c(1.0, 2.0), c(-3.0, 0.5)];
        let p = OdeProblem::new(|_, _: &[Complex64], out: &mut [Complex64]| out.fill(ZERO), y0.clone(), (0.0, 1.0));
        let tr = integrate_adaptive(p, &AdaptiveOptions::default()).unwrap();
        for s in &tr.states {
            assert_eq!(s, &y0);
        }
        assert_eq!(*tr.times.last().unwrap(), 1.0);
    }

    #[test]
    fn free_rotation_matches_analytic() {
        let omega = TAU * 1000.0;
        let p = OdeProblem::new(
            move |_, y: &[Complex64], out: &mut [Complex64]| out[0] = c(0.0, -omega) * y[0],
            vec![c(1.0, 0.0)],
            (0.0, 1e-3),
        );
        let tr = integrate_adaptive(p, &AdaptiveOptions::default()).unwrap();
        let end = tr.last().unwrap()[0];
        // e^{-i 2 pi} = 1
        assert!((end - c(1.0, 0.0)).norm() < 1e-8, "{end}");
    }

    #[test]
    fn dense_output_hits_sample_times() {
        let omega = 3.0;
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let p = OdeProblem::new(
            move |_, y: &[Complex64], out: &mut [Complex64]| out[0] = c(0.0, -omega) * y[0],
            vec![c(1.0, 0.0)],
            (0.0, 2.0),
        )
        .sampled_at(times.clone());
        let tr = integrate_adaptive(p, &AdaptiveOptions::default()).unwrap();
        assert_eq!(tr.times, times);
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let exact = Complex64::from_polar(1.0, -omega * t);
            assert!((s[0] - exact).norm() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn samples_outside_span_rejected() {
        let p = OdeProblem::new(|_, _: &[Complex64], o: &mut [Complex64]| o.fill(ZERO), vec![ZERO], (0.0, 1.0))
            .sampled_at(vec![2.0]);
        assert!(integrate_adaptive(p, &AdaptiveOptions::default()).is_err());
    }

    #[test]
    fn singular_rhs_underflows() {
        // y' = 1/(0.5 - t)^2 blows up at t = 0.5
        let p = OdeProblem::new(
            |t, _: &[Complex64], o: &mut [Complex64]| o[0] = c(1.0 / (0.5 - t).powi(2), 0.0),
            vec![ZERO],
            (0.0, 1.0),
        );
        let err = integrate_adaptive(p, &AdaptiveOptions::default()).unwrap_err();
        assert!(
            matches!(err, Error::StepSizeUnderflow { .. } | Error::MaxStepsExceeded { .. }),
            "{err}"
        );
    }

    #[test]
    fn max_steps_reported() {
        let p = OdeProblem::new(
            |_, y: &[Complex64], o: &mut [Complex64]| o[0] = c(0.0, -1e4) * y[0],
            vec![c(1.0, 0.0)],
            (0.0, 1.0),
        );
        let opts = AdaptiveOptions {
            max_steps: 10,
            ..Default::default()
        };
        assert!(matches!(
            integrate_adaptive(p, &opts),
            Err(Error::MaxStepsExceeded { .. })
        ));
    }

    #[test]
    fn stop_predicate_halts() {
        let p = OdeProblem::new(
            |_, _: &[Complex64], o: &mut [Complex64]| o[0] = c(1.0, 0.0),
            vec![ZERO],
            (0.0, 10.0),
        );
        let run = integrate_adaptive_until(p, &AdaptiveOptions::default().h_max(0.1), |_, y| y[0].re > 3.0).unwrap();
        let t = run.stopped_at.unwrap();
        assert!(t > 3.0 && t < 3.2);
        assert!((run.final_state[0].re - t).abs() < 1e-12);
    }

    #[test]
    fn rk4_and_oracle_agree_on_rotation() {
        let omega = 5.0;
        let f = move |_: f64, y: &[Complex64], o: &mut [Complex64]| o[0] = c(0.0, -omega) * y[0];
        let (y, stats) = integrate_rk4(f, &[c(1.0, 0.0)], (0.0, 1.0), 2000);
        assert_eq!(stats.rhs_evals, 8000);
        let exact = Complex64::from_polar(1.0, -omega);
        assert!((y[0] - exact).norm() < 1e-10);
        let g = integrate_expm_oracle(|_| CMatrix::from_element(1, 1, c(omega, 0.0)), &[c(1.0, 0.0)], (0.0, 1.0), 3);
        assert!((g[0] - exact).norm() < 1e-12);
    }

    #[test]
    fn oracle_preserves_norm_for_hermitian_generator() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(1.0, 0.0), c(0.5, 0.2), ZERO, c(0.5, -0.2), c(-2.0, 0.0), c(0.0, 1.0), ZERO, c(0.0, -1.0), c(0.3, 0.0)],
        );
        let y0 = [c(0.6, 0.0), c(0.0, 0.8), ZERO];
        let y = integrate_expm_oracle(|_| m.clone(), &y0, (0.0, 7.0), 50);
        assert!((l2_norm(&y) - 1.0).abs() < 1e-13);
    }
}
