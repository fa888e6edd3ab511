//! Liouville-von Neumann dynamics in coefficient space.
//!
//! The density matrix is expanded over a closed basis, `rho = sum g_j X_j`,
//! and the coefficients obey `g' = -i Gamma(t) g`. Single-spin problems use
//! the `{sigma-, sqrt(2) sigma_z, sigma+}` basis, coupled pairs the
//! 15-element product-operator basis.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{
    apply_generator, build_single_spin_basis, build_two_spin_basis, explicit, frobenius_purity,
    purity, scenario_coefficients, structure_constants, BasisSet, Drive, GradientContext,
    HamiltonianCoefficients, ScenarioKind, SpinSystem, StructureTable,
};
use crate::error::{Error, Result};
use crate::integrator::{
    integrate_adaptive, AdaptiveOptions, OdeProblem, Stats, Tolerances, Trajectory,
};
use crate::pulse::{linspace, ChirpParams, PulseSequence};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

struct Algebra {
    basis: BasisSet,
    table: StructureTable,
}

fn single_algebra() -> &'static Algebra {
    static CELL: OnceLock<Algebra> = OnceLock::new();
    CELL.get_or_init(|| {
        let basis = build_single_spin_basis();
        let table = structure_constants(&basis).expect("single-spin basis is closed");
        Algebra { basis, table }
    })
}

fn two_spin_algebra() -> &'static Algebra {
    static CELL: OnceLock<Algebra> = OnceLock::new();
    CELL.get_or_init(|| {
        let basis = build_two_spin_basis();
        let table = structure_constants(&basis).expect("two-spin basis is closed");
        Algebra { basis, table }
    })
}

pub fn single_spin_basis() -> &'static BasisSet {
    &single_algebra().basis
}

pub fn two_spin_basis() -> &'static BasisSet {
    &two_spin_algebra().basis
}

pub fn single_spin_table() -> &'static StructureTable {
    &single_algebra().table
}

pub fn two_spin_table() -> &'static StructureTable {
    &two_spin_algebra().table
}

/// Output sampling of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    /// Every accepted solver step.
    Steps,
    /// `n` uniformly spaced times including both ends.
    Uniform(usize),
    Times(Vec<f64>),
}

/// Solver tolerances and output sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub tol: Tolerances,
    pub samples: Samples,
    /// Overrides the drive's own time span.
    pub t_span: Option<(f64, f64)>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            tol: Tolerances::default(),
            samples: Samples::Uniform(201),
            t_span: None,
        }
    }
}

impl SimOptions {
    pub fn with_tol(tol: Tolerances) -> Self {
        SimOptions {
            tol,
            ..Default::default()
        }
    }

    pub fn samples(mut self, samples: Samples) -> Self {
        self.samples = samples;
        self
    }

    pub fn span(mut self, t_span: (f64, f64)) -> Self {
        self.t_span = Some(t_span);
        self
    }

    pub(crate) fn sample_times(&self, t_span: (f64, f64)) -> Option<Vec<f64>> {
        match &self.samples {
            Samples::Steps => None,
            Samples::Uniform(n) => Some(linspace(t_span.0, t_span.1, (*n).max(2))),
            Samples::Times(t) => Some(t.clone()),
        }
    }
}

/// Natural time span and largest safe solver step of a drive.
pub(crate) fn drive_span(drive: &Drive) -> ((f64, f64), f64) {
    match drive {
        Drive::Sequence(seq) => {
            let shortest = seq
                .pulses
                .iter()
                .map(|p| p.tau_p)
                .fold(f64::INFINITY, f64::min);
            (seq.t_span, shortest / 10.0)
        }
        Drive::Saltire(s) => ((0.0, s.tau_p), s.tau_p / 10.0),
    }
}

fn solve_linear(
    h: &HamiltonianCoefficients,
    table: &StructureTable,
    g0: &[Complex64],
    opts: &SimOptions,
) -> Result<Trajectory> {
    if g0.len() != h.len() {
        return Err(Error::domain(format!(
            "initial coefficient vector has length {}, expected {}",
            g0.len(),
            h.len()
        )));
    }
    let (natural, h_max) = drive_span(h.drive());
    let t_span = opts.t_span.unwrap_or(natural);
    let mut gamma = vec![ZERO; h.len()];
    let rhs = move |t: f64, g: &[Complex64], out: &mut [Complex64]| {
        h.fill(t, &mut gamma);
        apply_generator(table, &gamma, g, out);
    };
    let mut problem = OdeProblem::new(rhs, g0.to_vec(), t_span);
    problem.sample_times = opts.sample_times(t_span);
    integrate_adaptive(problem, &AdaptiveOptions::with_tol(opts.tol).h_max(h_max))
}

/// Coefficients of `(sigma-, sqrt(2) sigma_z, sigma+)` for one spin at
/// offset `offset` (rad/s) driven by `seq`.
pub fn simulate_single_spin(
    offset: f64,
    seq: &PulseSequence,
    g0: &[Complex64],
    opts: &SimOptions,
) -> Result<Trajectory> {
    let h = scenario_coefficients(
        ScenarioKind::SingleChirp,
        SpinSystem::single(offset),
        Drive::Sequence(seq.clone()),
        None,
    )?;
    solve_linear(&h, single_spin_table(), g0, opts)
}

/// Fifteen two-spin coefficients under an arbitrary drive, optionally with a
/// gradient-induced offset added to both spins.
pub fn simulate_two_spin(
    system: SpinSystem,
    drive: &Drive,
    g0: &[Complex64],
    gradient_offset: Option<f64>,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let kind = match (drive, gradient_offset) {
        (Drive::Saltire(_), _) => ScenarioKind::Psyche,
        (Drive::Sequence(_), Some(_)) => ScenarioKind::ZqFilter,
        (Drive::Sequence(_), None) => ScenarioKind::TwoSpinChirp,
    };
    let h = scenario_coefficients(kind, system, drive.clone(), gradient_offset.or(Some(0.0)))?;
    solve_linear(&h, two_spin_table(), g0, opts)
}

/// Two-spin dynamics driven by the explicitly written generator matrix
/// instead of the structure table; used to cross-check the automatic route.
pub fn simulate_two_spin_explicit(
    system: SpinSystem,
    seq: &PulseSequence,
    g0: &[Complex64],
    opts: &SimOptions,
) -> Result<Trajectory> {
    let SpinSystem::Coupled {
        offset_p,
        offset_q,
        j_hz,
    } = system
    else {
        return Err(Error::domain("explicit two-spin generator needs a coupled system"));
    };
    if g0.len() != 15 {
        return Err(Error::domain("two-spin initial state must have 15 entries"));
    }
    let drive = Drive::Sequence(seq.clone());
    let (natural, h_max) = drive_span(&drive);
    let t_span = opts.t_span.unwrap_or(natural);
    let rhs = move |t: f64, g: &[Complex64], out: &mut [Complex64]| {
        let m = explicit::two_spin(offset_p, offset_q, j_hz, drive.beta(t));
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (c, gc) in g.iter().enumerate() {
                acc += m[(r, c)] * gc;
            }
            *o = Complex64::new(acc.im, -acc.re);
        }
    };
    let mut problem = OdeProblem::new(rhs, g0.to_vec(), t_span);
    problem.sample_times = opts.sample_times(t_span);
    integrate_adaptive(problem, &AdaptiveOptions::with_tol(opts.tol).h_max(h_max))
}

/// Per-slice trajectories and their equally weighted mean.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub slice_offsets: Vec<f64>,
    pub slices: Vec<Trajectory>,
    pub ensemble_mean: Trajectory,
}

impl EnsembleResult {
    /// Mean of coefficient `k` (0-based) at the final time.
    pub fn final_mean(&self, k: usize) -> Complex64 {
        self.ensemble_mean.states.last().map(|s| s[k]).unwrap_or(ZERO)
    }

    pub fn stats(&self) -> Stats {
        let mut total = Stats::default();
        for s in &self.slices {
            total += s.stats;
        }
        total
    }
}

/// One two-spin simulation per gradient slice, run in parallel.
pub fn simulate_ensemble(
    system: SpinSystem,
    drive: &Drive,
    g0: &[Complex64],
    gradient: &GradientContext,
    opts: &SimOptions,
) -> Result<EnsembleResult> {
    if gradient.n_slices == 0 {
        return Err(Error::domain("gradient ensemble needs at least one slice"));
    }
    let mut opts = opts.clone();
    if opts.samples == Samples::Steps {
        // slices need a shared time grid for averaging
        opts.samples = Samples::Uniform(2);
    }
    let offsets = gradient.slice_offsets();
    let slices: Vec<Trajectory> = offsets
        .par_iter()
        .map(|&og| simulate_two_spin(system, drive, g0, Some(og), &opts))
        .collect::<Result<_>>()?;
    let ensemble_mean = mean_trajectory(&slices);
    Ok(EnsembleResult {
        slice_offsets: offsets,
        slices,
        ensemble_mean,
    })
}

/// Pointwise mean over trajectories sharing a time grid. Values are summed
/// in sorted order so the result does not depend on the order of slices.
pub fn mean_trajectory(slices: &[Trajectory]) -> Trajectory {
    let Some(first) = slices.first() else {
        return Trajectory::default();
    };
    let n = slices.len() as f64;
    let dim = first.states.first().map_or(0, Vec::len);
    let mut states = Vec::with_capacity(first.len());
    let mut buf = Vec::with_capacity(slices.len());
    for ti in 0..first.len() {
        let mut row = Vec::with_capacity(dim);
        for k in 0..dim {
            buf.clear();
            buf.extend(slices.iter().map(|s| s.states[ti][k]));
            row.push(sorted_pairwise_sum(&mut buf) / n);
        }
        states.push(row);
    }
    let mut stats = Stats::default();
    for s in slices {
        stats += s.stats;
    }
    Trajectory {
        times: first.times.clone(),
        states,
        stats,
    }
}

fn sorted_pairwise_sum(values: &mut [Complex64]) -> Complex64 {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pairwise(values)
}

fn pairwise(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => ZERO,
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise(a) + pairwise(b)
        }
    }
}

/// `sqrt(theta / R)` with `theta = |Delta / (2 pi J)|` and `R = dF / tau_p`.
///
/// `Delta` is the offset difference in rad/s and `J` is in Hz, so `theta`
/// is the offset difference in Hz divided by `J`.
pub fn xi(system: SpinSystem, pulse: &ChirpParams) -> Result<f64> {
    let SpinSystem::Coupled { j_hz, .. } = system else {
        return Err(Error::domain("xi is defined for a coupled spin pair"));
    };
    if j_hz == 0.0 {
        return Err(Error::domain("xi is undefined for J = 0"));
    }
    if !(pulse.delta_f_sweep > 0.0) {
        return Err(Error::domain("xi needs a nonzero sweep rate"));
    }
    let theta = (system.offset_difference() / (TAU * j_hz)).abs();
    let rate = pulse.delta_f_sweep / pulse.tau_p;
    Ok((theta / rate).sqrt())
}

/// Pulse duration that realises `xi` for the given system and sweep width.
pub fn tau_for_xi(system: SpinSystem, delta_f_sweep: f64, xi: f64) -> Result<f64> {
    let SpinSystem::Coupled { j_hz, .. } = system else {
        return Err(Error::domain("xi is defined for a coupled spin pair"));
    };
    if j_hz == 0.0 {
        return Err(Error::domain("xi is undefined for J = 0"));
    }
    let theta = (system.offset_difference() / (TAU * j_hz)).abs();
    if theta == 0.0 {
        return Err(Error::domain("xi grid is degenerate for equal offsets"));
    }
    Ok(xi * xi * delta_f_sweep / theta)
}

/// Largest drift of `tr(rho^2)` and `tr(rho^dagger rho)` along a trajectory.
pub fn purity_drift(basis: &BasisSet, traj: &Trajectory) -> (f64, f64) {
    let Some(first) = traj.states.first() else {
        return (0.0, 0.0);
    };
    let rho0 = basis.reconstruct(first);
    let (p0, f0) = (purity(&rho0), frobenius_purity(&rho0));
    traj.states.iter().fold((0.0f64, 0.0f64), |(dp, df), s| {
        let rho = basis.reconstruct(s);
        (
            dp.max((purity(&rho) - p0).norm()),
            df.max((frobenius_purity(&rho) - f0).abs()),
        )
    })
}

/// Unit vector `e_k` of length `n`.
pub fn unit(n: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; n];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Converts single-spin ladder coefficients to Cartesian `(c_x, c_y, c_z)`.
pub fn ladder_to_cartesian(g: &[Complex64]) -> [Complex64; 3] {
    let i = Complex64::new(0.0, 1.0);
    [g[0] + g[2], i * (g[2] - g[0]), g[1] * std::f64::consts::SQRT_2]
}

/// Inverse of [`ladder_to_cartesian`].
pub fn cartesian_to_ladder(c: &[Complex64; 3]) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    vec![
        (c[0] + i * c[1]) * 0.5,
        c[2] * std::f64::consts::FRAC_1_SQRT_2,
        (c[0] - i * c[1]) * 0.5,
    ]
}
