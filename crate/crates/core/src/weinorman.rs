//! Wei-Norman factorisation of the single-spin propagator,
//! `U = exp(g1 sx) exp(g2 sy) exp(g3 sz)`, with `s` the spin-1/2 operators.
//!
//! The exponents obey a nonlinear ODE that is regular while `cosh g2` stays
//! away from zero. The solver restarts the factorisation from `g = 0`
//! whenever it approaches that region and composes the segment propagators.

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;

use crate::algebra::{spin_half, BasisSet, OperatorMatrix, StructureTable};
use crate::error::{Error, Result};
use crate::integrator::{
    integrate_adaptive_until, AdaptiveOptions, OdeProblem, Stats, Tolerances, Trajectory,
};
use crate::lvn::{drive_span, Samples};
use crate::algebra::Drive;
use crate::pulse::PulseSequence;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub type Propagator = Matrix2<Complex64>;
pub type Rotation = Matrix3<Complex64>;

/// `|cosh g2|` below which the exponent equations are treated as singular.
pub const SINGULAR_COSH: f64 = 1e-8;

/// The Cartesian basis `{sx, sy, sz}`.
pub fn cartesian_basis() -> BasisSet {
    let [x, y, z] = spin_half();
    BasisSet::new(vec![
        OperatorMatrix::new("sx", x),
        OperatorMatrix::new("sy", y),
        OperatorMatrix::new("sz", z),
    ])
    .expect("spin-1/2 matrices form a basis")
}

/// `exp(g X_j) X_i exp(-g X_j)` as `(index, coefficient)` pairs over the basis.
///
/// Commuting pairs return `X_i` unchanged. Otherwise the double commutator
/// must return to `X_i` with unit weight, which gives the closed form
/// `X_i cosh g + [X_j, X_i] sinh g`.
pub fn bch_conjugate(
    g: Complex64,
    j: usize,
    i: usize,
    table: &StructureTable,
) -> Result<Vec<(usize, Complex64)>> {
    let (k, lambda) = match table.terms(j, i) {
        [] => return Ok(vec![(i, ONE)]),
        [one] => *one,
        _ => {
            return Err(Error::domain(format!(
                "[X{j}, X{i}] is not a single basis element"
            )))
        }
    };
    match table.get(j, k) {
        Some((back, mu)) if back == i && (lambda * mu - ONE).norm() < 1e-12 => {
            Ok(vec![(i, g.cosh()), (k, lambda * g.sinh())])
        }
        _ => Err(Error::domain(format!(
            "conjugation of X{i} by X{j} does not close in two terms"
        ))),
    }
}

/// The matrix mapping `g'` to the Hamiltonian coefficients, `Xi g' = -i gamma`.
pub fn xi_matrix(g1: Complex64, g2: Complex64) -> Rotation {
    let (c1, s1) = (g1.cosh(), g1.sinh());
    let (c2, s2) = (g2.cosh(), g2.sinh());
    Matrix3::new(
        ONE, ZERO, I * s2,
        ZERO, c1, -I * s1 * c2,
        ZERO, I * s1, c1 * c2,
    )
}

/// Closed-form inverse of [`xi_matrix`]; fails where `cosh g2` vanishes.
pub fn xi_matrix_inverse(g1: Complex64, g2: Complex64) -> Result<Rotation> {
    let (c1, s1) = (g1.cosh(), g1.sinh());
    let c2 = g2.cosh();
    if c2.norm() < SINGULAR_COSH {
        return Err(Error::FactorizationSingularity { t: f64::NAN });
    }
    let t2 = g2.tanh();
    Ok(Matrix3::new(
        ONE, -t2 * s1, -I * t2 * c1,
        ZERO, c1, I * s1,
        ZERO, -I * s1 / c2, c1 / c2,
    ))
}

/// Right-hand side of the exponent equations for `gamma = (Cx, Cy, Omega)`.
pub fn wn_rhs(g: &[Complex64; 3], gamma: [Complex64; 3]) -> Result<[Complex64; 3]> {
    if g[1].cosh().norm() < SINGULAR_COSH {
        return Err(Error::FactorizationSingularity { t: f64::NAN });
    }
    Ok(wn_rhs_unchecked(g, gamma))
}

fn wn_rhs_unchecked(g: &[Complex64; 3], gamma: [Complex64; 3]) -> [Complex64; 3] {
    let [cx, cy, om] = gamma;
    let (c1, s1) = (g[0].cosh(), g[0].sinh());
    let c2 = g[1].cosh();
    let t2 = g[1].tanh();
    [
        -I * cx + t2 * (-om * c1 + I * cy * s1),
        om * s1 - I * cy * c1,
        -(cy * s1 + I * om * c1) / c2,
    ]
}

/// `-i Xi^{-1} gamma`, evaluated through the matrix inverse.
pub fn wn_rhs_via_xi(g: &[Complex64; 3], gamma: [Complex64; 3]) -> Result<[Complex64; 3]> {
    let inv = xi_matrix_inverse(g[0], g[1])?;
    let v = inv * nalgebra::Vector3::new(gamma[0], gamma[1], gamma[2]) * (-I);
    Ok([v[0], v[1], v[2]])
}

fn axis_exp(g: Complex64, pauli: [[Complex64; 2]; 2]) -> Propagator {
    let (c, s) = ((g * 0.5).cosh(), (g * 0.5).sinh());
    Matrix2::new(
        c + s * pauli[0][0],
        s * pauli[0][1],
        s * pauli[1][0],
        c + s * pauli[1][1],
    )
}

/// `exp(g1 sx) exp(g2 sy) exp(g3 sz)` as a 2x2 matrix.
pub fn propagator(g: &[Complex64; 3]) -> Propagator {
    let px = [[ZERO, ONE], [ONE, ZERO]];
    let py = [[ZERO, -I], [I, ZERO]];
    let pz = [[ONE, ZERO], [ZERO, -ONE]];
    axis_exp(g[0], px) * axis_exp(g[1], py) * axis_exp(g[2], pz)
}

/// Matrix taking Bloch coefficients `c(0)` to `c(t)` under [`propagator`].
pub fn gamma_rotation(g: &[Complex64; 3]) -> Rotation {
    let (c1, s1) = (g[0].cosh(), g[0].sinh());
    let (c2, s2) = (g[1].cosh(), g[1].sinh());
    let (c3, s3) = (g[2].cosh(), g[2].sinh());
    Matrix3::new(
        c2 * c3,
        -I * c2 * s3,
        I * s2,
        -s1 * s2 * c3 + I * c1 * s3,
        c1 * c3 + I * s1 * s2 * s3,
        -I * s1 * c2,
        -I * c1 * s2 * c3 - s1 * s3,
        I * s1 * c3 - c1 * s2 * s3,
        c1 * c2,
    )
}

/// `|| U U^dagger - I ||` in the Frobenius norm.
pub fn unitarity_defect(u: &Propagator) -> f64 {
    (u * u.adjoint() - Propagator::identity()).norm()
}

/// Restart and tolerance settings for the exponent solver.
#[derive(Debug, Clone, PartialEq)]
pub struct WnOptions {
    pub tol: Tolerances,
    pub samples: Samples,
    /// Restart once `|cosh g2|` drops below this value.
    pub restart_cosh: f64,
    /// Restart once any `|g_i|` exceeds this value.
    pub g_max: f64,
    pub max_restarts: usize,
}

impl Default for WnOptions {
    fn default() -> Self {
        WnOptions {
            tol: Tolerances::default(),
            samples: Samples::Uniform(201),
            restart_cosh: 0.25,
            g_max: 20.0,
            max_restarts: 1_000_000,
        }
    }
}

impl WnOptions {
    pub fn with_tol(tol: Tolerances) -> Self {
        WnOptions {
            tol,
            ..Default::default()
        }
    }

    pub fn samples(mut self, samples: Samples) -> Self {
        self.samples = samples;
        self
    }
}

/// One factorisation segment; its exponents start from zero at `t_start`.
#[derive(Debug, Clone)]
pub struct WnSegment {
    pub t_start: f64,
    /// Product of all earlier segment propagators.
    pub prefix: Propagator,
    /// Product of all earlier segment rotations.
    pub prefix_rotation: Rotation,
    pub trajectory: Trajectory,
}

/// Exponent trajectories of every segment, in time order.
#[derive(Debug, Clone)]
pub struct WnSolution {
    pub segments: Vec<WnSegment>,
    pub stats: Stats,
}

impl WnSolution {
    pub fn restarts(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    fn points(&self) -> impl Iterator<Item = (f64, [Complex64; 3], &WnSegment)> {
        self.segments.iter().flat_map(|seg| {
            seg.trajectory
                .times
                .iter()
                .zip(&seg.trajectory.states)
                .map(move |(&t, s)| (t, [s[0], s[1], s[2]], seg))
        })
    }

    pub fn times(&self) -> Vec<f64> {
        self.points().map(|(t, _, _)| t).collect()
    }

    /// Exponents as written: they restart from zero in each segment.
    pub fn coefficients(&self) -> Trajectory {
        let (times, states) = self.points().map(|(t, g, _)| (t, g.to_vec())).unzip();
        Trajectory {
            times,
            states,
            stats: self.stats,
        }
    }

    /// Full propagator `U(t)` at every sample time.
    pub fn propagators(&self) -> Vec<Propagator> {
        self.points()
            .map(|(_, g, seg)| propagator(&g) * seg.prefix)
            .collect()
    }

    /// Full Bloch rotation at every sample time.
    pub fn rotations(&self) -> Vec<Rotation> {
        self.points()
            .map(|(_, g, seg)| gamma_rotation(&g) * seg.prefix_rotation)
            .collect()
    }

    pub fn final_propagator(&self) -> Propagator {
        self.propagators().last().copied().unwrap_or_else(Propagator::identity)
    }
}

fn wn_gamma(seq: &PulseSequence, offset: f64, t: f64) -> [Complex64; 3] {
    let s = seq.evaluate(t);
    [Complex64::from(s.re), Complex64::from(s.im), Complex64::from(offset)]
}

/// Integrates the exponent equations for one spin at `offset` (rad/s),
/// restarting the factorisation as needed.
pub fn solve_propagator(seq: &PulseSequence, offset: f64, opts: &WnOptions) -> Result<WnSolution> {
    let drive = Drive::Sequence(seq.clone());
    let ((t0, t1), h_max) = drive_span(&drive);
    let requested: Option<Vec<f64>> = match &opts.samples {
        Samples::Steps => None,
        Samples::Uniform(n) => Some(crate::pulse::linspace(t0, t1, (*n).max(2))),
        Samples::Times(t) => Some(t.clone()),
    };
    let adaptive = AdaptiveOptions::with_tol(opts.tol).h_max(h_max);
    let (restart_cosh, g_max) = (opts.restart_cosh, opts.g_max);

    let mut segments = Vec::new();
    let mut stats = Stats::default();
    let mut prefix = Propagator::identity();
    let mut prefix_rotation = Rotation::identity();
    let mut t_start = t0;
    loop {
        if segments.len() > opts.max_restarts {
            return Err(Error::FactorizationSingularity { t: t_start });
        }
        let rhs = |t: f64, g: &[Complex64], out: &mut [Complex64]| {
            let d = wn_rhs_unchecked(&[g[0], g[1], g[2]], wn_gamma(seq, offset, t));
            out.copy_from_slice(&d);
        };
        let mut problem = OdeProblem::new(rhs, vec![ZERO; 3], (t_start, t1));
        problem.sample_times = requested.as_ref().map(|s| {
            s.iter()
                .copied()
                .filter(|&t| t > t_start && t <= t1)
                .collect()
        });
        let stop = |_t: f64, g: &[Complex64]| {
            g[1].cosh().norm() < restart_cosh || g.iter().any(|x| x.norm() > g_max)
        };
        let run = integrate_adaptive_until(problem, &adaptive, stop)?;
        stats += run.trajectory.stats;
        let mut trajectory = run.trajectory;
        if !segments.is_empty() && !trajectory.is_empty() {
            // the segment start duplicates the previous segment's last point
            trajectory.times.remove(0);
            trajectory.states.remove(0);
        }
        if run.final_state[1].cosh().norm() < SINGULAR_COSH {
            return Err(Error::FactorizationSingularity { t: run.final_t });
        }
        let g_end = [run.final_state[0], run.final_state[1], run.final_state[2]];
        let seg = WnSegment {
            t_start,
            prefix,
            prefix_rotation,
            trajectory,
        };
        segments.push(seg);
        match run.stopped_at {
            None => break,
            Some(t) => {
                prefix = propagator(&g_end) * prefix;
                prefix_rotation = gamma_rotation(&g_end) * prefix_rotation;
                t_start = t;
            }
        }
    }
    Ok(WnSolution { segments, stats })
}

/// Bloch coefficients `c(t)` with their transverse phase.
#[derive(Debug, Clone, Default)]
pub struct BlochTrajectory {
    pub times: Vec<f64>,
    pub c: Vec<[Complex64; 3]>,
    /// `atan2(c2, c1)` on the real parts, in `(-pi, pi]`.
    pub phase: Vec<f64>,
    pub stats: Stats,
}

impl BlochTrajectory {
    pub fn last(&self) -> Option<([Complex64; 3], f64)> {
        Some((*self.c.last()?, *self.phase.last()?))
    }
}

pub fn transverse_phase(c: &[Complex64; 3]) -> f64 {
    c[1].re.atan2(c[0].re)
}

/// `c(t) = Gamma(t) c(0)` for one spin at `offset` (rad/s).
pub fn propagate_bloch(
    seq: &PulseSequence,
    offset: f64,
    c0: [Complex64; 3],
    opts: &WnOptions,
) -> Result<BlochTrajectory> {
    let sol = solve_propagator(seq, offset, opts)?;
    let v0 = nalgebra::Vector3::new(c0[0], c0[1], c0[2]);
    let c: Vec<[Complex64; 3]> = sol
        .rotations()
        .into_iter()
        .map(|r| {
            let v = r * v0;
            [v[0], v[1], v[2]]
        })
        .collect();
    Ok(BlochTrajectory {
        times: sol.times(),
        phase: c.iter().map(transverse_phase).collect(),
        c,
        stats: sol.stats,
    })
}
