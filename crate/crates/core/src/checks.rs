//! Consistency checks between independent routes to the same dynamics.
//!
//! These back the `selftest` command and the cross-engine tests: the
//! structure-table generator against the hand-written matrices, and the
//! Wei-Norman, coefficient (LvN) and piecewise-exponential solutions of the
//! same single-spin problem against each other.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{
    apply_generator, explicit, generator_matrix, scenario_coefficients, Drive, ScenarioKind,
    SpinSystem,
};
use crate::error::{Error, Result};
use crate::integrator::{
    expm_oracle_samples, integrate_rk4, max_abs_diff, richardson, Stats, Tolerances,
};
use crate::lvn::{
    cartesian_to_ladder, ladder_to_cartesian, simulate_single_spin, single_spin_table,
    two_spin_table, SimOptions, Samples,
};
use crate::pulse::{ChirpParams, PulseSequence};
use crate::weinorman::{propagate_bloch, WnOptions};

/// Parameter draws `(offset_p, offset_q, J, Re beta, Im beta)` in rad/s
/// (J in Hz), uniform over `[-1000, 1000]` and `[0, 20]`.
///
/// Entries are kept at this scale because the single-spin offset is stored as
/// `Omega / sqrt(2)` and multiplied back by `sqrt(2)`, which costs one ulp of
/// the entry; at 1e5 rad/s that alone is 1.5e-11.
pub const GENERATOR_DRAWS: [[f64; 5]; 5] = [
    [412.83, -877.25, 7.3, 310.0, -45.5],
    [-640.1, 512.0, 12.9, -150.25, 220.0],
    [0.0, 61.75, 0.0, 0.0, 0.0],
    [987.65, 980.01, 14.1, 314.159, 271.828],
    [-3.5, -271.8, 3.25, -0.125, -900.5],
];

/// Largest entrywise difference between the table-generated and the
/// explicit generators over `draws`: `(single spin, two spin)`.
pub fn generator_fidelity(draws: &[[f64; 5]]) -> Result<(f64, f64)> {
    let mut worst = (0.0_f64, 0.0_f64);
    for &d in draws {
        let drive = Drive::Sequence(constant_drive(Complex64::new(d[3], d[4]))?);
        // both routes see the value the drive actually produces
        let beta = drive.beta(0.0);
        let g1 = scenario_coefficients(ScenarioKind::SingleChirp, SpinSystem::single(d[0]), drive.clone(), None)?
            .at(0.0);
        let a1 = generator_matrix(single_spin_table(), &g1);
        worst.0 = worst.0.max(max_entry_diff(&a1, &explicit::single_spin(d[0], beta)));

        let system = SpinSystem::coupled(d[0], d[1], d[2]);
        let g2 = scenario_coefficients(ScenarioKind::TwoSpinChirp, system, drive, None)?.at(0.0);
        let a2 = generator_matrix(two_spin_table(), &g2);
        worst.1 = worst.1.max(max_entry_diff(&a2, &explicit::two_spin(d[0], d[1], d[2], beta)));
    }
    Ok(worst)
}

// A chirp with no sweep and no envelope roll-off at its centre gives a
// constant complex amplitude at t = delta_t.
fn constant_drive(beta: Complex64) -> Result<PulseSequence> {
    let s = beta * 2.0;
    let p = ChirpParams {
        omega1: s.norm(),
        delta_f_sweep: 0.0,
        tau_p: 1.0,
        phi0: s.arg(),
        delta_t: 0.0,
        delta_f: 0.0,
        n: 2,
    };
    let seq = PulseSequence::with_span(vec![p], (-0.5, 0.5))?;
    debug_assert!((seq.evaluate(0.0) - s).norm() <= 1e-9 * s.norm().max(1.0));
    Ok(seq)
}

fn max_entry_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Pairwise disagreement of the three single-spin routes at one offset,
/// as the largest Cartesian component difference over the sample times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossEngine {
    /// Offset in rad/s.
    pub offset: f64,
    pub wn_vs_lvn: f64,
    pub wn_vs_oracle: f64,
    pub lvn_vs_oracle: f64,
    /// Richardson correction size, a proxy for the oracle's own error.
    pub oracle_correction: f64,
}

impl CrossEngine {
    pub fn worst(&self) -> f64 {
        self.wn_vs_lvn.max(self.wn_vs_oracle).max(self.lvn_vs_oracle)
    }
}

/// Runs `seq` at `offset` (rad/s) from Bloch vector `c0` through the
/// Wei-Norman engine, the LvN engine and the exponential oracle, comparing
/// them at `samples` uniform times. The oracle takes `oracle_steps` midpoint
/// steps (rounded up to a multiple of `samples - 1`) and is Richardson
/// extrapolated against half as many.
pub fn cross_engine(
    seq: &PulseSequence,
    offset: f64,
    c0: [Complex64; 3],
    samples: usize,
    oracle_steps: usize,
    tol: Tolerances,
) -> Result<CrossEngine> {
    let samples = samples.max(2);
    let intervals = samples - 1;
    let per = oracle_steps.div_ceil(intervals).max(1).next_multiple_of(2);
    let wn = propagate_bloch(seq, offset, c0, &WnOptions::with_tol(tol).samples(Samples::Uniform(samples)))?;
    let g0 = cartesian_to_ladder(&c0);
    let opts = SimOptions::with_tol(tol).samples(Samples::Uniform(samples)).span(seq.t_span);
    let lvn = simulate_single_spin(offset, seq, &g0, &opts)?;
    let gamma = |t: f64| explicit::single_spin(offset, seq.evaluate(t) * 0.5);
    let coarse = expm_oracle_samples(gamma, &g0, seq.t_span, intervals * per / 2, per / 2);
    let fine = expm_oracle_samples(gamma, &g0, seq.t_span, intervals * per, per);
    let mut out = CrossEngine {
        offset,
        wn_vs_lvn: 0.0,
        wn_vs_oracle: 0.0,
        lvn_vs_oracle: 0.0,
        oracle_correction: 0.0,
    };
    for k in 0..samples {
        let oracle = richardson(&coarse.states[k], &fine.states[k]);
        out.oracle_correction = out.oracle_correction.max(diff(
            &ladder_to_cartesian(&oracle),
            &ladder_to_cartesian(&fine.states[k]),
        ));
        let o = ladder_to_cartesian(&oracle);
        let l = ladder_to_cartesian(&lvn.states[k]);
        let w = wn.c[k];
        out.wn_vs_lvn = out.wn_vs_lvn.max(diff(&w, &l));
        out.wn_vs_oracle = out.wn_vs_oracle.max(diff(&w, &o));
        out.lvn_vs_oracle = out.lvn_vs_oracle.max(diff(&l, &o));
    }
    Ok(out)
}

/// Work needed by the adaptive solver and by fixed-step RK4 to reach the
/// same final-state error against the exponential oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptivity {
    /// Loosest tolerance of the ladder that met the target.
    pub tol: Tolerances,
    pub adaptive_error: f64,
    pub adaptive: Stats,
    pub rk4_error: f64,
    pub rk4: Stats,
}

/// Relative tolerances tried, loosest first; `atol = rtol / 100`.
pub const RTOL_LADDER: [f64; 5] = [1e-6, 1e-7, 1e-8, 1e-9, 1e-10];

/// Single-spin LvN run of `seq` at `offset` (rad/s) from `c0`. The adaptive
/// solver runs at the loosest ladder tolerance whose final error is within
/// `target`; RK4 then gets the fewest steps (to within 1%) that match that
/// error. Errors are measured against a Richardson-extrapolated oracle with
/// `oracle_steps` steps.
pub fn adaptivity(
    seq: &PulseSequence,
    offset: f64,
    c0: [Complex64; 3],
    target: f64,
    oracle_steps: usize,
) -> Result<Adaptivity> {
    let g0 = cartesian_to_ladder(&c0);
    let gamma = |t: f64| explicit::single_spin(offset, seq.evaluate(t) * 0.5);
    let half = oracle_steps.div_ceil(2);
    let coarse = expm_oracle_samples(gamma, &g0, seq.t_span, half, half);
    let fine = expm_oracle_samples(gamma, &g0, seq.t_span, 2 * half, 2 * half);
    let reference = richardson(coarse.last().unwrap_or(&g0), fine.last().unwrap_or(&g0));

    let mut found = None;
    for rtol in RTOL_LADDER {
        let tol = Tolerances::new(rtol, rtol * 1e-2);
        let opts = SimOptions::with_tol(tol).samples(Samples::Uniform(2)).span(seq.t_span);
        let run = simulate_single_spin(offset, seq, &g0, &opts)?;
        let err = max_abs_diff(run.last().unwrap_or(&g0), &reference);
        if err <= target {
            found = Some((tol, err, run.stats));
            break;
        }
    }
    let Some((tol, adaptive_error, adaptive)) = found else {
        return Err(Error::domain("no ladder tolerance met the oracle target"));
    };

    let h = scenario_coefficients(
        ScenarioKind::SingleChirp,
        SpinSystem::single(offset),
        Drive::Sequence(seq.clone()),
        None,
    )?;
    let table = single_spin_table();
    let rk4 = |n: usize| {
        let mut gamma = vec![Complex64::new(0.0, 0.0); 3];
        let (y, stats) = integrate_rk4(
            |t, g, out| {
                h.fill(t, &mut gamma);
                apply_generator(table, &gamma, g, out);
            },
            &g0,
            seq.t_span,
            n,
        );
        (max_abs_diff(&y, &reference), stats)
    };
    // small step counts are inaccurate or unstable, so grow until the error
    // is matched, then bisect down
    let mut hi = 64;
    let mut best = rk4(hi);
    while !(best.0 <= adaptive_error) {
        hi *= 2;
        if hi > 1 << 22 {
            return Err(Error::domain("RK4 did not reach the adaptive error"));
        }
        best = rk4(hi);
    }
    let mut lo = hi / 2;
    while hi - lo > hi / 100 {
        let mid = (lo + hi) / 2;
        let r = rk4(mid);
        if r.0 <= adaptive_error {
            hi = mid;
            best = r;
        } else {
            lo = mid;
        }
    }
    Ok(Adaptivity {
        tol,
        adaptive_error,
        adaptive,
        rk4_error: best.0,
        rk4: best.1,
    })
}

fn diff(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_drive_is_constant() {
        let beta = Complex64::new(-3.0, 4.0);
        let seq = constant_drive(beta).unwrap();
        assert!((seq.evaluate(0.0) * 0.5 - beta).norm() < 1e-12);
    }

    #[test]
    fn generators_match_explicit_forms() {
        let (one, two) = generator_fidelity(&GENERATOR_DRAWS).unwrap();
        assert!(one < 1e-12, "{one}");
        assert!(two < 1e-12, "{two}");
    }

    #[test]
    fn large_parameters_agree_to_an_ulp() {
        let big = [[98765.4, 98000.1, 141.0, 31415.9, 27182.8], [-40210.0, 512.0, 12.9, -1500.25, 2200.0]];
        let (one, two) = generator_fidelity(&big).unwrap();
        let ulp = 2.0 * f64::EPSILON * 2e5;
        assert!(one <= ulp && two <= ulp, "{one} {two}");
    }
}
