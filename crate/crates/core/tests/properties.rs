use std::f64::consts::{PI, TAU};

use chirpdyn::algebra::{explicit, SpinSystem};
use chirpdyn::experiments::{circular_variance, psyche, wrap};
use chirpdyn::integrator::{l2_norm, Trajectory, Tolerances};
use chirpdyn::io::Table;
use chirpdyn::lvn::{
    cartesian_to_ladder, ladder_to_cartesian, mean_trajectory, simulate_single_spin,
    single_spin_basis, single_spin_table, two_spin_basis, two_spin_table, SimOptions, Samples,
};
use chirpdyn::pulse::{ChirpParams, PulseSequence};
use chirpdyn::weinorman::{propagate_bloch, solve_propagator, transverse_phase, unitarity_defect, WnOptions};
use chirpdyn::Complex64;
use proptest::prelude::*;

fn chirp_strategy() -> impl Strategy<Value = ChirpParams> {
    (1e3..1e5f64, 1e4..3e5f64, 2e-4..2e-3f64, -PI..PI).prop_map(|(omega1, sweep, tau, phi0)| {
        let mut p = ChirpParams::centred(omega1, sweep, tau);
        p.phi0 = phi0;
        p
    })
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lvn_conserves_the_coefficient_norm(p in chirp_strategy(), f in -1e5..1e5f64, theta in 0.0..PI, phi in -PI..PI) {
        let seq = PulseSequence::single(p).unwrap();
        let c0 = [c(theta.sin() * phi.cos()), c(theta.sin() * phi.sin()), c(theta.cos())];
        let g0 = cartesian_to_ladder(&c0);
        let tol = Tolerances::default();
        let t = simulate_single_spin(TAU * f, &seq, &g0, &SimOptions::with_tol(tol).samples(Samples::Uniform(11))).unwrap();
        let n0 = l2_norm(&g0);
        for s in &t.states {
            prop_assert!((l2_norm(s) - n0).abs() < 10.0 * tol.rtol);
        }
    }

    #[test]
    fn wei_norman_propagators_stay_unitary(p in chirp_strategy(), f in -1e5..1e5f64) {
        let seq = PulseSequence::single(p).unwrap();
        let sol = solve_propagator(&seq, TAU * f, &WnOptions::default().samples(Samples::Uniform(11))).unwrap();
        for u in sol.propagators() {
            prop_assert!(unitarity_defect(&u) < 1e-8);
        }
    }

    #[test]
    fn common_phase_shift_rotates_the_result_about_z(p in chirp_strategy(), f in -1e5..1e5f64, delta in -PI..PI) {
        let z = [c(0.0), c(0.0), c(1.0)];
        let opts = WnOptions::default().samples(Samples::Uniform(2));
        let a = propagate_bloch(&PulseSequence::single(p).unwrap(), TAU * f, z, &opts).unwrap();
        let mut q = p;
        q.phi0 += delta;
        let b = propagate_bloch(&PulseSequence::single(q).unwrap(), TAU * f, z, &opts).unwrap();
        let (ca, _) = a.last().unwrap();
        let (cb, _) = b.last().unwrap();
        prop_assert!((ca[2].re - cb[2].re).abs() < 1e-6);
        let transverse = ca[0].re.hypot(ca[1].re);
        if transverse > 1e-2 {
            let shift = wrap(transverse_phase(&cb) - transverse_phase(&ca) - delta);
            prop_assert!(shift.abs() * transverse < 1e-5, "shift {shift}");
        }
    }

    #[test]
    fn slice_mean_ignores_slice_order(
        values in prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 6), 2..12),
        seed in any::<u64>(),
    ) {
        let slices: Vec<Trajectory> = values
            .iter()
            .map(|v| Trajectory {
                times: vec![0.0, 1.0],
                states: vec![
                    vec![Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])],
                    vec![Complex64::new(v[4], v[5]), Complex64::new(v[1], v[0])],
                ],
                stats: Default::default(),
            })
            .collect();
        let mut shuffled = slices.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed.rotate_left(i as u32) % (i as u64 + 1)) as usize);
        }
        prop_assert_eq!(mean_trajectory(&slices).states, mean_trajectory(&shuffled).states);
    }

    #[test]
    fn physical_generators_are_hermitian(
        op in -1e5..1e5f64, oq in -1e5..1e5f64, j in 0.0..50.0f64, re in -1e5..1e5f64, im in -1e5..1e5f64,
    ) {
        let beta = Complex64::new(re, im);
        for m in [explicit::single_spin(op, beta), explicit::two_spin(op, oq, j, beta)] {
            let d = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(d <= 1e-9 * (op.abs() + oq.abs() + beta.norm()));
        }
    }

    #[test]
    fn ladder_and_cartesian_roundtrip(x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64) {
        let v = [c(x), c(y), c(z)];
        let back = ladder_to_cartesian(&cartesian_to_ladder(&v));
        for k in 0..3 {
            prop_assert!((back[k] - v[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn wrap_lands_in_the_principal_range(a in -1e3..1e3f64) {
        let w = wrap(a);
        prop_assert!(w > -PI && w <= PI);
        prop_assert!(((a - w) / TAU - ((a - w) / TAU).round()).abs() < 1e-9);
    }

    #[test]
    fn circular_variance_ignores_a_common_shift(
        phases in prop::collection::vec(-PI..PI, 1..40),
        shift in -10.0..10.0f64,
    ) {
        let moved: Vec<f64> = phases.iter().map(|p| p + shift).collect();
        prop_assert!((circular_variance(&phases) - circular_variance(&moved)).abs() < 1e-12);
    }

    #[test]
    fn saltire_flip_calibration_roundtrip(alpha in 1.0..90.0f64, sweep in 1e3..1e5f64, tau in 1e-3..0.1f64) {
        let s = psyche::psyche_pulse(alpha, sweep, tau, 40).unwrap();
        prop_assert!((psyche::flip_angle_deg(&s) - alpha).abs() < 1e-9 * alpha);
    }

    #[test]
    fn csv_keeps_twelve_significant_digits(rows in prop::collection::vec(prop::collection::vec(-1e12..1e12f64, 3), 1..20)) {
        let mut t = Table::new(vec!["a".into(), "b".into(), "c".into()]);
        for r in &rows {
            t.push_row(r.clone()).unwrap();
        }
        let back = Table::parse(&t.to_csv_string()).unwrap();
        prop_assert_eq!(&back.columns, &t.columns);
        for (r, s) in rows.iter().zip(&back.rows) {
            for (x, y) in r.iter().zip(s) {
                prop_assert!((x - y).abs() <= 5e-12 * x.abs());
            }
        }
    }
}

#[test]
fn structure_tables_are_antisymmetric() {
    for (table, n) in [(single_spin_table(), single_spin_basis().len()), (two_spin_table(), two_spin_basis().len())] {
        for i in 0..n {
            for j in 0..n {
                let mut a: Vec<_> = table.terms(i, j).to_vec();
                let mut b: Vec<_> = table.terms(j, i).iter().map(|&(k, l)| (k, -l)).collect();
                a.sort_by_key(|t| t.0);
                b.sort_by_key(|t| t.0);
                assert_eq!(a, b, "[{i}, {j}]");
            }
        }
    }
}

#[test]
fn coupled_system_reports_its_offset_difference() {
    let s = SpinSystem::coupled(TAU * 100.0, -TAU * 100.0, 10.0);
    assert!((s.offset_difference().abs() - TAU * 200.0).abs() < 1e-9);
}
