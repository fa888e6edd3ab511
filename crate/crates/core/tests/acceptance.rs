//! End-to-end acceptance run. Prints one PASS/FAIL line per check and exits
//! non-zero if any check fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use chirpdyn::algebra::{Drive, GradientContext};
use chirpdyn::checks::{adaptivity, cross_engine, generator_fidelity, GENERATOR_DRAWS};
use chirpdyn::experiments::chorus::{
    b1_map, chorus_correction, chorus_profile, ChorusParams, CorrectionSearch,
};
use chirpdyn::experiments::composite::{composite_refocus, CompositeParams};
use chirpdyn::experiments::psyche::{self, PsycheEndpoint};
use chirpdyn::experiments::{central_band, circular_std, phase_spread, zq};
use chirpdyn::integrator::Tolerances;
use chirpdyn::io::{emit_svg, Heatmap, Plot};
use chirpdyn::lvn::{
    self, cartesian_to_ladder, simulate_ensemble, simulate_single_spin, simulate_two_spin, unit,
    SimOptions,
};
use chirpdyn::pulse::{linspace, rf_from_adiabaticity, PulseSequence};
use chirpdyn::weinorman::{solve_propagator, unitarity_defect, WnOptions};
use chirpdyn::{Complex64, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const Y: [Complex64; 3] = [ZERO, ONE, ZERO];
const Z: [Complex64; 3] = [ZERO, ZERO, ONE];

fn amplitude_calibration() -> Result<Outcome> {
    let composite = rf_from_adiabaticity(2e5, 5.0, 1e-3)?.1;
    let chorus = ChorusParams::reference().omega1;
    let expected = [79267.0, 40787.0, 86832.0, 97081.0];
    let got = [composite, chorus[0], chorus[1], chorus[2]];
    let worst = expected.iter().zip(&got).map(|(e, g)| (e - g).abs()).fold(0.0, f64::max);
    outcome(worst < 1.0, format!("omega1 = {got:.1?} rad/s, worst deviation {worst:.3} rad/s"))
}

fn generator_matrices() -> Result<Outcome> {
    let (one, two) = generator_fidelity(&GENERATOR_DRAWS)?;
    outcome(
        one < 1e-12 && two < 1e-12,
        format!("max entry difference 3x3 {one:.2e}, 15x15 {two:.2e}"),
    )
}

fn engines_agree() -> Result<Outcome> {
    let tol = Tolerances::new(1e-10, 1e-12);
    let cases = [
        ("composite", CompositeParams::reference().sequence()?, Y, 8e4),
        ("chorus", ChorusParams::reference().sequence()?, Z, 1.2e5),
    ];
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for (name, seq, c0, span) in cases {
        let mut w = 0.0_f64;
        for f in linspace(-span, span, 5) {
            w = w.max(cross_engine(&seq, TAU * f, c0, 101, 160_000, tol)?.worst());
        }
        parts.push(format!("{name} {w:.2e}"));
        worst = worst.max(w);
    }
    outcome(worst < 1e-6, format!("worst pairwise difference: {}", parts.join(", ")))
}

// Explicit Runge-Kutta steps lose a little amplitude on every oscillation, so
// purity drift grows like rtol times the step count. The long single-spin
// sequences need about 1e-11 to stay under 1e-8.
const REGRESSION_TOL: Tolerances = Tolerances::new(1e-11, 1e-13);

fn conservation() -> Result<Outcome> {
    let opts = SimOptions::with_tol(REGRESSION_TOL);
    let mut drift = 0.0_f64;
    let mut default_drift = 0.0_f64;
    let mut track = |d: (f64, f64)| drift = drift.max(d.0).max(d.1);

    let composite = CompositeParams::reference().sequence()?;
    let chorus = ChorusParams::reference().sequence()?;
    for seq in [&composite, &chorus] {
        for f in [-6e4, 0.0, 3e4] {
            for c0 in [Y, Z] {
                let g0 = cartesian_to_ladder(&c0);
                let t = simulate_single_spin(TAU * f, seq, &g0, &opts)?;
                track(lvn::purity_drift(lvn::single_spin_basis(), &t));
                let t = simulate_single_spin(TAU * f, seq, &g0, &SimOptions::default())?;
                let d = lvn::purity_drift(lvn::single_spin_basis(), &t);
                default_drift = default_drift.max(d.0).max(d.1);
            }
        }
    }

    let system = psyche::reference_system();
    let basis = lvn::two_spin_basis();
    let filter = zq::filter_pulse(1e4, 0.018, zq::FILTER_Q)?;
    let filter = Drive::Sequence(PulseSequence::with_span(vec![filter], (0.0, filter.tau_p))?);
    let t = simulate_two_spin(system, &filter, &unit(15, zq::ZQ_INITIAL), None, &opts)?;
    track(lvn::purity_drift(basis, &t));
    let e = simulate_ensemble(system, &filter, &unit(15, zq::ZQ_INITIAL), &GradientContext::for_sweep(1e4, 8), &opts)?;
    for s in &e.slices {
        track(lvn::purity_drift(basis, s));
    }
    let saltire = Drive::Saltire(psyche::reference_saltire(20.0)?);
    let e = simulate_ensemble(system, &saltire, &unit(15, psyche::PSYCHE_INITIAL), &GradientContext::for_sweep(1e4, 8), &opts)?;
    for s in &e.slices {
        track(lvn::purity_drift(basis, s));
    }

    let mut defect = 0.0_f64;
    for seq in [&composite, &chorus] {
        for f in [-6e4, 0.0, 3e4] {
            let sol = solve_propagator(seq, TAU * f, &WnOptions::default())?;
            defect = sol.propagators().iter().map(unitarity_defect).fold(defect, f64::max);
        }
    }
    outcome(
        drift < 1e-8 && defect < 1e-8,
        format!(
            "purity drift {drift:.2e} at rtol {:.0e} ({default_drift:.2e} at default rtol), |UU^dagger - I| {defect:.2e}",
            REGRESSION_TOL.rtol
        ),
    )
}

fn zero_quantum_filter() -> Result<Outcome> {
    let pulse = zq::filter_pulse(1e4, 0.018, zq::FILTER_Q)?;
    let gradient = GradientContext::for_sweep(1e4, 50);
    let p = zq::zq_point(psyche::reference_system(), &pulse, &gradient, &SimOptions::default())?;
    let ratio = p.without_gradient / p.with_gradient;
    outcome(
        (0.01..=0.05).contains(&p.with_gradient) && ratio >= 5.0,
        format!(
            "|g4| with gradient {:.4}, without {:.4}, ratio {ratio:.1}",
            p.with_gradient, p.without_gradient
        ),
    )
}

fn composite_refocusing() -> Result<Outcome> {
    let offsets = linspace(-8e4, 8e4, 9);
    let r = composite_refocus(&CompositeParams::reference(), &offsets, Y, &WnOptions::default())?;
    let min_c2 = r.endpoints().iter().map(|c| c[1].re.abs()).fold(f64::INFINITY, f64::min);
    let spread = phase_spread(&r.end_phases()).to_degrees();
    outcome(
        min_c2 >= 0.99 && spread < 5.0,
        format!("min |c2| {min_c2:.4} (need >= 0.99), phase spread {spread:.2} deg (need < 5)"),
    )
}

fn psyche_flip_angle() -> Result<Outcome> {
    let alphas: Vec<f64> = (0..23).map(|i| 5.0 + 2.5 * i as f64).collect();
    let scan = psyche::psyche_flip_scan(
        psyche::reference_system(),
        &psyche::reference_saltire(20.0)?,
        &psyche::reference_gradient(),
        &alphas,
        &psyche::scan_options(),
    )?;
    let lambda = scan.values("lambda").unwrap_or_default();
    let penalized = scan.values("lambda_penalized").unwrap_or_default();
    let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0);
    let best = alphas[argmax(&penalized)];
    let peak = argmax(&lambda);
    let decreasing = lambda[peak..].windows(2).all(|w| w[1] < w[0]);
    outcome(
        (17.0..=23.0).contains(&best) && alphas[peak] <= 25.0 && decreasing,
        format!(
            "penalized lambda peaks at {best} deg, lambda peaks at {} deg and {} after",
            alphas[peak],
            if decreasing { "decreases strictly" } else { "does not decrease strictly" }
        ),
    )
}

fn psyche_suppression() -> Result<Outcome> {
    let e = psyche::psyche_element(
        psyche::reference_system(),
        &psyche::reference_saltire(15.0)?,
        &psyche::reference_gradient(),
        &psyche::scan_options().samples(lvn::Samples::Uniform(2)),
    )?;
    let g6 = PsycheEndpoint::from_ensemble(&e).g6;
    let worst = psyche::ZQ_DQ
        .iter()
        .map(|&k| (k, e.final_mean(k).norm() / g6))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0));
    outcome(
        worst.1 < 0.2,
        format!("|g6| {g6:.4e}, largest ZQ/DQ ratio {:.4} (g{})", worst.1, worst.0 + 1),
    )
}

fn chorus_correction_run() -> Result<(Outcome, ChorusParams)> {
    let params = ChorusParams::reference();
    let offsets = central_band(params.delta_f_sweep, 0.8, 201);
    let opts = WnOptions::default();
    let r = chorus_correction(&params, &offsets, &opts, &CorrectionSearch::coarse(&params, 0.8, 21))?;
    let after = chorus_profile(&r.optimized, &offsets, &opts)?;
    let std = circular_std(&after.values("phase").unwrap_or_default()).to_degrees();
    let min_c2 = after.values("c2").unwrap_or_default().into_iter().fold(f64::INFINITY, f64::min);
    let ratio = r.variance_before / r.variance_after;
    let o = outcome(
        ratio >= 10.0 && std < 3.0 && min_c2 > 0.95,
        format!("variance {:.2e} -> {:.2e} ({ratio:.1}x), std {std:.2} deg, min c2 {min_c2:.4}", r.variance_before, r.variance_after),
    )?;
    Ok((o, r.optimized))
}

fn b1_robustness(corrected: &ChorusParams) -> Result<Outcome> {
    let offsets = central_band(corrected.delta_f_sweep, 1.0, 201);
    let scales = linspace(0.5, 1.5, 41);
    let grid = b1_map(corrected, &offsets, &scales, &WnOptions::default())?;
    let centre = offsets.len() / 2;
    let plateau: Vec<f64> = scales
        .iter()
        .zip(&grid.values)
        .filter(|(s, _)| (0.9 - 1e-9..=1.3 + 1e-9).contains(*s))
        .map(|(_, row)| row[centre])
        .collect();
    let lowest = plateau.iter().copied().fold(f64::INFINITY, f64::min);
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("b1.svg");
    emit_svg(&Plot::Heatmap(Heatmap::from_grid("c2", &grid)), &path)?;
    let cells = std::fs::read_to_string(&path)?.matches("<rect").count();
    outcome(
        lowest > 0.9 && plateau.len() == 17 && cells >= offsets.len() * scales.len(),
        format!("min c2 at centre over scale 0.9..1.3: {lowest:.4}; heatmap with {cells} cells"),
    )
}

fn integrator_adaptivity() -> Result<Outcome> {
    let seq = ChorusParams::reference().sequence()?;
    let a = adaptivity(&seq, 0.0, Z, 1e-6, 160_000)?;
    outcome(
        a.adaptive_error <= 1e-6 && a.adaptive.rhs_evals < a.rk4.rhs_evals,
        format!(
            "adaptive (rtol {:.0e}) error {:.2e} with {} rhs evals; RK4 error {:.2e} with {}",
            a.tol.rtol, a.adaptive_error, a.adaptive.rhs_evals, a.rk4_error, a.rk4.rhs_evals
        ),
    )
}

fn report(name: &str, r: Result<Outcome>, started: Instant, all: &mut bool) {
    let secs = started.elapsed().as_secs_f64();
    match r {
        Ok(o) => {
            *all &= o.pass;
            println!("{} {name}: {} [{secs:.1} s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        }
        Err(e) => {
            *all = false;
            println!("FAIL {name}: error {e} [{secs:.1} s]");
        }
    }
}

fn main() -> ExitCode {
    let mut all = true;
    let checks: [(&str, fn() -> Result<Outcome>); 8] = [
        ("amplitude calibration", amplitude_calibration),
        ("generator matrices", generator_matrices),
        ("cross-engine agreement", engines_agree),
        ("purity and unitarity", conservation),
        ("zero-quantum suppression", zero_quantum_filter),
        ("composite refocusing", composite_refocusing),
        ("PSYCHE flip angle", psyche_flip_angle),
        ("PSYCHE suppression", psyche_suppression),
    ];
    for (name, check) in checks {
        let t = Instant::now();
        report(name, check(), t, &mut all);
    }

    let t = Instant::now();
    let corrected = match chorus_correction_run() {
        Ok((o, p)) => {
            report("CHORUS phase correction", Ok(o), t, &mut all);
            Some(p)
        }
        Err(e) => {
            report("CHORUS phase correction", Err(e), t, &mut all);
            None
        }
    };
    let t = Instant::now();
    let b1 = match &corrected {
        Some(p) => b1_robustness(p),
        None => Err(chirpdyn::Error::Domain("no corrected CHORUS parameters".into())),
    };
    report("B1 robustness", b1, t, &mut all);

    let t = Instant::now();
    report("integrator adaptivity", integrator_adaptivity(), t, &mut all);

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
