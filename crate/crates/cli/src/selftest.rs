use std::f64::consts::TAU;

use chirpdyn::checks::{cross_engine, generator_fidelity, GENERATOR_DRAWS};
use chirpdyn::experiments::{chorus::ChorusParams, composite::CompositeParams};
use chirpdyn::integrator::Tolerances;
use chirpdyn::{Complex64, Result};

const GENERATOR_TOL: f64 = 1e-12;
const ENGINE_TOL: f64 = 1e-6;
const ORACLE_STEPS: usize = 160_000;

fn report(name: &str, value: f64, limit: f64) -> bool {
    let ok = value < limit;
    println!("{} {name}: {value:.3e} (limit {limit:.0e})", if ok { "PASS" } else { "FAIL" });
    ok
}

/// Runs the consistency checks and prints one line per check.
pub fn run() -> Result<bool> {
    let mut ok = true;
    let (one, two) = generator_fidelity(&GENERATOR_DRAWS)?;
    ok &= report("generator 3x3", one, GENERATOR_TOL);
    ok &= report("generator 15x15", two, GENERATOR_TOL);

    let tol = Tolerances::new(1e-10, 1e-12);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let cases = [
        ("composite", CompositeParams::reference().sequence()?, [zero, one, zero], 8e4),
        ("chorus", ChorusParams::reference().sequence()?, [zero, zero, one], 1.2e5),
    ];
    for (name, seq, c0, span) in cases {
        for k in -2..=2 {
            let f = span * k as f64 / 2.0;
            let r = cross_engine(&seq, TAU * f, c0, 101, ORACLE_STEPS, tol)?;
            ok &= report(&format!("{name} engines at {f:+.0} Hz"), r.worst(), ENGINE_TOL);
        }
    }
    Ok(ok)
}
