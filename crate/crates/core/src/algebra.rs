//! Operator bases, commutator structure constants and the coefficient
//! generator matrix that turns the Liouville-von Neumann equation into a
//! linear ODE over basis coefficients.
//!
//! Spin operators are the spin-1/2 matrices (half the Pauli matrices) and
//! ladder operators are `sigma± = sigma_x ± i sigma_y`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{PulseSequence, Saltire};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance for resolving commutators against the basis.
pub const CLOSURE_TOL: f64 = 1e-10;

/// A labelled square operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub label: String,
    pub data: CMatrix,
}

impl OperatorMatrix {
    pub fn new(label: impl Into<String>, data: CMatrix) -> Self {
        assert!(data.is_square(), "operator must be square");
        assert!(data.nrows().is_power_of_two(), "dimension must be a power of two");
        OperatorMatrix {
            label: label.into(),
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }
}

/// Spin-1/2 operators `(sx, sy, sz)`.
pub fn spin_half() -> [CMatrix; 3] {
    let h = Complex64::new(0.5, 0.0);
    let sx = CMatrix::from_row_slice(2, 2, &[ZERO, h, h, ZERO]);
    let sy = CMatrix::from_row_slice(2, 2, &[ZERO, -I * 0.5, I * 0.5, ZERO]);
    let sz = CMatrix::from_row_slice(2, 2, &[h, ZERO, ZERO, -h]);
    [sx, sy, sz]
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Ordered operator basis closed under pairwise commutation.
#[derive(Debug, Clone)]
pub struct BasisSet {
    elements: Vec<OperatorMatrix>,
    dim: usize,
}

impl BasisSet {
    pub fn new(elements: Vec<OperatorMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(OperatorMatrix::dim)
            .ok_or_else(|| Error::domain("empty basis"))?;
        if elements.iter().any(|e| e.dim() != dim) {
            return Err(Error::domain("basis elements differ in dimension"));
        }
        Ok(BasisSet { elements, dim })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[OperatorMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> Vec<&str> {
        self.elements.iter().map(|e| e.label.as_str()).collect()
    }

    /// Projects `m` onto the basis; returns the coefficients and the norm of the remainder.
    pub fn decompose(&self, m: &CMatrix) -> (Vec<Complex64>, f64) {
        let coeffs: Vec<Complex64> = self
            .elements
            .iter()
            .map(|e| frobenius_inner(&e.data, m) / frobenius_inner(&e.data, &e.data))
            .collect();
        let rebuilt = self.reconstruct(&coeffs);
        let residual = (m - rebuilt).norm();
        (coeffs, residual)
    }

    /// `sum_j g_j X_j`.
    pub fn reconstruct(&self, g: &[Complex64]) -> CMatrix {
        assert_eq!(g.len(), self.len(), "coefficient vector length mismatch");
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (gj, e) in g.iter().zip(&self.elements) {
            out += &e.data * *gj;
        }
        out
    }
}

/// `{sigma-, sqrt(2) sigma_z, sigma+}`.
pub fn build_single_spin_basis() -> BasisSet {
    let [sx, sy, sz] = spin_half();
    let minus = &sx - &sy * I;
    let plus = &sx + &sy * I;
    BasisSet::new(vec![
        OperatorMatrix::new("σ⁻", minus),
        OperatorMatrix::new("√2σz", sz * Complex64::from(SQRT_2)),
        OperatorMatrix::new("σ⁺", plus),
    ])
    .expect("static basis")
}

/// The 15-element two-spin product-operator basis: five zero-quantum,
/// eight single-quantum and two double-quantum terms, in that order.
pub fn build_two_spin_basis() -> BasisSet {
    let [sx, sy, sz] = spin_half();
    let id = CMatrix::identity(2, 2);
    let (px, py, pz) = (kron(&sx, &id), kron(&sy, &id), kron(&sz, &id));
    let (qx, qy, qz) = (kron(&id, &sx), kron(&id, &sy), kron(&id, &sz));
    let pm = &px - &py * I;
    let pp = &px + &py * I;
    let qm = &qx - &qy * I;
    let qp = &qx + &qy * I;
    let r2 = Complex64::from(SQRT_2);
    let ir2 = Complex64::from(FRAC_1_SQRT_2);
    let two = Complex64::from(2.0);
    let elements = vec![
        OperatorMatrix::new("Pz", pz.clone()),
        OperatorMatrix::new("Qz", qz.clone()),
        OperatorMatrix::new("P⁻Q⁺", &pm * &qp),
        OperatorMatrix::new("P⁺Q⁻", &pp * &qm),
        OperatorMatrix::new("2PzQz", &pz * &qz * two),
        OperatorMatrix::new("P⁻/√2", &pm * ir2),
        OperatorMatrix::new("P⁺/√2", &pp * ir2),
        OperatorMatrix::new("Q⁻/√2", &qm * ir2),
        OperatorMatrix::new("Q⁺/√2", &qp * ir2),
        OperatorMatrix::new("√2P⁻Qz", &pm * &qz * r2),
        OperatorMatrix::new("√2P⁺Qz", &pp * &qz * r2),
        OperatorMatrix::new("√2PzQ⁻", &pz * &qm * r2),
        OperatorMatrix::new("√2PzQ⁺", &pz * &qp * r2),
        OperatorMatrix::new("P⁻Q⁻", &pm * &qm),
        OperatorMatrix::new("P⁺Q⁺", &pp * &qp),
    ];
    BasisSet::new(elements).expect("static basis")
}

/// Coherence order of each two-spin basis element (ZQ = 0, SQ = ±1, DQ = ±2).
pub const TWO_SPIN_COHERENCE_ORDER: [i8; 15] = [0, 0, 0, 0, 0, -1, 1, -1, 1, -1, 1, -1, 1, -2, 2];

/// One nonzero term `lambda X_k` of the commutator `[X_i, X_j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub lambda: Complex64,
}

/// Commutation table of a closed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTable {
    n: usize,
    table: Vec<Vec<(usize, Complex64)>>,
    entries: Vec<StructureEntry>,
}

impl StructureTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `Some((k, lambda))` when `[X_i, X_j] = lambda X_k` is a single basis
    /// element; `None` if the pair commutes or the commutator has several terms.
    pub fn get(&self, i: usize, j: usize) -> Option<(usize, Complex64)> {
        match self.terms(i, j) {
            [one] => Some(*one),
            _ => None,
        }
    }

    /// Expansion of `[X_i, X_j]` over the basis; empty if the pair commutes.
    pub fn terms(&self, i: usize, j: usize) -> &[(usize, Complex64)] {
        &self.table[i * self.n + j]
    }

    pub fn entries(&self) -> &[StructureEntry] {
        &self.entries
    }
}

/// Expands every ordered commutator of `basis` over the basis itself.
pub fn structure_constants(basis: &BasisSet) -> Result<StructureTable> {
    let n = basis.len();
    let mut table = vec![Vec::new(); n * n];
    let mut entries = Vec::new();
    let els = basis.elements();
    for i in 0..n {
        for j in 0..n {
            let c = commutator(&els[i].data, &els[j].data);
            if c.norm() < CLOSURE_TOL {
                continue;
            }
            let (coeffs, residual) = basis.decompose(&c);
            if residual > CLOSURE_TOL {
                return Err(Error::ClosureViolation { i, j, residual });
            }
            for (k, lambda) in coeffs.into_iter().enumerate() {
                let lambda = Complex64::new(snap(lambda.re), snap(lambda.im));
                if lambda.norm() > CLOSURE_TOL {
                    table[i * n + j].push((k, lambda));
                    entries.push(StructureEntry { i, j, k, lambda });
                }
            }
        }
    }
    Ok(StructureTable { n, table, entries })
}

/// Rounds a projected structure constant onto the nearest multiple of 1/2
/// or of 1/sqrt(2) when it lies within round-off of one; spin-1/2 product
/// bases only produce such values.
fn snap(x: f64) -> f64 {
    let half = (x * 2.0).round() / 2.0;
    if (x - half).abs() < 1e-12 {
        return half;
    }
    let root = (x * SQRT_2).round() * FRAC_1_SQRT_2;
    if (x - root).abs() < 1e-12 {
        return root;
    }
    x
}

/// `Gamma_mn = sum_i gamma_i lambda^m_in` with `[X_i, X_n] = sum_m lambda^m_in X_m`.
pub fn generator_matrix(table: &StructureTable, gamma: &[Complex64]) -> CMatrix {
    assert_eq!(gamma.len(), table.len(), "gamma length must match the basis");
    let mut out = CMatrix::zeros(table.len(), table.len());
    for e in table.entries() {
        out[(e.k, e.j)] += gamma[e.i] * e.lambda;
    }
    out
}

/// Writes `-i Gamma g` into `out` without forming `Gamma`.
pub fn apply_generator(
    table: &StructureTable,
    gamma: &[Complex64],
    g: &[Complex64],
    out: &mut [Complex64],
) {
    out.iter_mut().for_each(|x| *x = ZERO);
    for e in table.entries() {
        let gi = gamma[e.i];
        if gi != ZERO {
            out[e.k] += gi * e.lambda * g[e.j];
        }
    }
    for x in out.iter_mut() {
        *x *= -I;
    }
}

/// Spin offsets in rad/s and scalar coupling in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpinSystem {
    Single { offset: f64 },
    Coupled { offset_p: f64, offset_q: f64, j_hz: f64 },
}

impl SpinSystem {
    pub fn single(offset: f64) -> Self {
        SpinSystem::Single { offset }
    }

    pub fn coupled(offset_p: f64, offset_q: f64, j_hz: f64) -> Self {
        SpinSystem::Coupled {
            offset_p,
            offset_q,
            j_hz,
        }
    }

    /// `Omega_P - Omega_Q` (rad/s); zero for a single spin.
    pub fn offset_difference(&self) -> f64 {
        match *self {
            SpinSystem::Single { .. } => 0.0,
            SpinSystem::Coupled {
                offset_p, offset_q, ..
            } => offset_p - offset_q,
        }
    }
}

/// Uniform spread of gradient-induced offsets across the sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientContext {
    pub n_slices: usize,
    /// Symmetric range `[-half_span, +half_span]` of `Omega_g(z)` in rad/s.
    pub half_span: f64,
}

impl GradientContext {
    pub const DEFAULT_SLICES: usize = 50;

    /// Range `[-pi dF, +pi dF]` for sweep width `delta_f_sweep` (Hz).
    pub fn for_sweep(delta_f_sweep: f64, n_slices: usize) -> Self {
        GradientContext {
            n_slices,
            half_span: PI * delta_f_sweep,
        }
    }

    /// Slice offsets at the centres of `n_slices` equal cells spanning the range.
    pub fn slice_offsets(&self) -> Vec<f64> {
        let n = self.n_slices;
        let width = 2.0 * self.half_span / n as f64;
        (0..n)
            .map(|s| -self.half_span + width * (s as f64 + 0.5))
            .collect()
    }
}

/// Which Hamiltonian is being simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleChirp,
    TwoSpinChirp,
    ZqFilter,
    Psyche,
}

impl ScenarioKind {
    pub fn needs_gradient(self) -> bool {
        matches!(self, ScenarioKind::ZqFilter | ScenarioKind::Psyche)
    }
}

/// The RF drive: a complex chirp sequence or a real saltire.
#[derive(Debug, Clone, PartialEq)]
pub enum Drive {
    Sequence(PulseSequence),
    Saltire(Saltire),
}

impl Drive {
    /// `beta(t)`, half of the complex waveform value.
    pub fn beta(&self, t: f64) -> Complex64 {
        match self {
            Drive::Sequence(seq) => seq.evaluate(t) * 0.5,
            Drive::Saltire(s) => Complex64::new(0.5 * s.evaluate(t), 0.0),
        }
    }
}

/// Time-dependent Hamiltonian coefficients over a basis.
#[derive(Debug, Clone)]
pub struct HamiltonianCoefficients {
    kind: ScenarioKind,
    system: SpinSystem,
    drive: Drive,
    gradient_offset: f64,
}

impl HamiltonianCoefficients {
    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        match self.kind {
            ScenarioKind::SingleChirp => 3,
            _ => 15,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn drive(&self) -> &Drive {
        &self.drive
    }

    pub fn at(&self, t: f64) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.len()];
        self.fill(t, &mut out);
        out
    }

    /// Writes gamma(t) into `out` (length 3 or 15, basis order).
    pub fn fill(&self, t: f64, out: &mut [Complex64]) {
        let beta = self.drive.beta(t);
        match self.system {
            SpinSystem::Single { offset } => {
                out[0] = beta;
                out[1] = Complex64::from(offset * FRAC_1_SQRT_2);
                out[2] = beta.conj();
            }
            SpinSystem::Coupled {
                offset_p,
                offset_q,
                j_hz,
            } => {
                let og = self.gradient_offset;
                let pj = Complex64::from(PI * j_hz);
                let b = beta * SQRT_2;
                out[0] = Complex64::from(offset_p + og);
                out[1] = Complex64::from(offset_q + og);
                out[2] = pj;
                out[3] = pj;
                out[4] = pj;
                let (b_minus, b_plus) = match self.kind {
                    // real drive in every single-quantum slot
                    ScenarioKind::Psyche => (Complex64::from(b.re), Complex64::from(b.re)),
                    _ => (b, b.conj()),
                };
                out[5] = b_minus;
                out[6] = b_plus;
                out[7] = b_minus;
                out[8] = b_plus;
                for x in &mut out[9..15] {
                    *x = ZERO;
                }
            }
        }
    }
}

/// Builds the Hamiltonian coefficient function for a scenario.
pub fn scenario_coefficients(
    kind: ScenarioKind,
    system: SpinSystem,
    drive: Drive,
    gradient_offset: Option<f64>,
) -> Result<HamiltonianCoefficients> {
    match (kind, system) {
        (ScenarioKind::SingleChirp, SpinSystem::Single { .. }) => {}
        (ScenarioKind::SingleChirp, _) => {
            return Err(Error::domain("single_chirp needs a single-spin system"))
        }
        (_, SpinSystem::Single { .. }) => {
            return Err(Error::domain("two-spin scenarios need a coupled spin system"))
        }
        _ => {}
    }
    if kind.needs_gradient() && gradient_offset.is_none() {
        return Err(Error::domain(format!("{kind:?} requires a gradient slice offset")));
    }
    if kind == ScenarioKind::Psyche && !matches!(drive, Drive::Saltire(_)) {
        return Err(Error::domain("the PSYCHE element is driven by a saltire pulse"));
    }
    Ok(HamiltonianCoefficients {
        kind,
        system,
        drive,
        gradient_offset: if kind.needs_gradient() {
            gradient_offset.unwrap_or(0.0)
        } else {
            0.0
        },
    })
}

/// `rho = sum_j g_j X_j`.
pub fn reconstruct_density(basis: &BasisSet, g: &[Complex64]) -> OperatorMatrix {
    OperatorMatrix::new("ρ", basis.reconstruct(g))
}

/// `tr(rho^2)`.
pub fn purity(rho: &CMatrix) -> Complex64 {
    (rho * rho).trace()
}

/// `tr(rho^dagger rho)`, the squared Frobenius norm.
pub fn frobenius_purity(rho: &CMatrix) -> f64 {
    rho.norm_squared()
}

/// Explicit generator matrices, written out term by term.
pub mod explicit {
    use super::*;

    /// Single-spin generator in terms of offset `omega` (rad/s) and `beta`.
    pub fn single_spin(omega: f64, beta: Complex64) -> CMatrix {
        let b = beta * SQRT_2;
        let w = Complex64::from(omega);
        CMatrix::from_row_slice(
            3,
            3,
            &[-w, b, ZERO, b.conj(), ZERO, -b, ZERO, -b.conj(), w],
        )
    }

    /// Two-spin generator written in the published row layout with symbols
    /// `J = pi J`, `B`, `S = sum of offsets`, `D = difference of offsets`.
    ///
    /// The published layout carries the drive as its conjugate, so `B` is
    /// bound to `sqrt(2) beta*` here; for a real drive the binding is moot.
    pub fn two_spin(offset_p: f64, offset_q: f64, j_hz: f64, beta: Complex64) -> CMatrix {
        let j = Complex64::from(PI * j_hz);
        let b = beta.conj() * SQRT_2;
        let bs = b.conj();
        let s = Complex64::from(offset_p + offset_q);
        let d = Complex64::from(offset_p - offset_q);
        let o1 = Complex64::from(offset_p);
        let o2 = Complex64::from(offset_q);
        let z = ZERO;
        #[rustfmt::skip]
        let rows: [[Complex64; 15]; 15] = [
            [ z,  z,  j, -j,  z,  b, -bs, z,  z,  z,  z,  z,  z,  z,  z],
            [ z,  z, -j,  j,  z,  z,  z,  b, -bs, z,  z,  z,  z,  z,  z],
            [ j, -j, -d,  z,  z,  z,  z,  z,  z, -b,  z,  z,  bs, z,  z],
            [-j,  j,  z,  d,  z,  z,  z,  z,  z,  z,  bs, -b, z,  z,  z],
            [ z,  z,  z,  z,  z,  z,  z,  z,  z,  b, -bs, b, -bs, z,  z],
            [ bs, z,  z,  z,  z, -o1, z,  z,  z, -j,  z,  j,  z,  z,  z],
            [-b,  z,  z,  z,  z,  z,  o1, z,  z,  z,  j,  z, -j,  z,  z],
            [ z,  bs, z,  z,  z,  z,  z, -o2, z,  j,  z, -j,  z,  z,  z],
            [ z, -b,  z,  z,  z,  z,  z,  z,  o2, z, -j,  z,  j,  z,  z],
            [ z,  z, -bs, z,  bs, -j, z,  j,  z, -o1, z,  z,  z,  b,  z],
            [ z,  z,  z,  b, -b,  z,  j,  z, -j,  z,  o1, z,  z,  z, -bs],
            [ z,  z,  z, -bs, bs, j,  z, -j,  z,  z,  z, -o2, z,  b,  z],
            [ z,  z,  b,  z, -b,  z, -j,  z,  j,  z,  z,  z,  o2, z, -bs],
            [ z,  z,  z,  z,  z,  z,  z,  z,  z,  bs, z,  bs, z, -s,  z],
            [ z,  z,  z,  z,  z,  z,  z,  z,  z,  z, -b,  z, -b,  z,  s],
        ];
        CMatrix::from_fn(15, 15, |r, c| rows[r][c])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_spin_commutators() {
        let b = build_single_spin_basis();
        let t = structure_constants(&b).unwrap();
        let r2 = c(SQRT_2, 0.0);
        // [s-, r2 sz] = r2 s-
        assert_eq!(t.get(0, 1).map(|(k, _)| k), Some(0));
        assert!((t.get(0, 1).unwrap().1 - r2).norm() < 1e-14);
        // [s-, s+] = -2 sz = -r2 (r2 sz)
        let (k, l) = t.get(0, 2).unwrap();
        assert_eq!(k, 1);
        assert!((l + r2).norm() < 1e-14);
        // [r2 sz, s+] = r2 s+
        let (k, l) = t.get(1, 2).unwrap();
        assert_eq!(k, 2);
        assert!((l - r2).norm() < 1e-14);
        for i in 0..3 {
            assert!(t.get(i, i).is_none());
        }
        for e in b.elements() {
            assert!(e.data.trace().norm() < 1e-15);
        }
    }

    #[test]
    fn two_spin_basis_shape() {
        let b = build_two_spin_basis();
        assert_eq!(b.len(), 15);
        assert_eq!(b.dim(), 4);
        let pmqp = &b.elements()[2].data;
        let ppqm = &b.elements()[3].data;
        assert!((pmqp.adjoint() - ppqm).norm() < 1e-15);
        for e in b.elements() {
            assert!((e.data.norm() - 1.0).abs() < 1e-14, "{} not unit norm", e.label);
        }
    }

    #[test]
    fn closure_violation_detected() {
        let [sx, sy, _] = spin_half();
        let basis = BasisSet::new(vec![
            OperatorMatrix::new("sx", sx),
            OperatorMatrix::new("sy", sy),
        ])
        .unwrap();
        assert!(matches!(
            structure_constants(&basis),
            Err(Error::ClosureViolation { .. })
        ));
    }

    #[test]
    fn identity_component_is_a_violation() {
        // sx and (sx + identity) commute only up to the identity direction;
        // a basis whose commutator lands on the identity must be rejected
        let [sx, sy, sz] = spin_half();
        let shifted = &sz + CMatrix::identity(2, 2) * c(0.5, 0.0);
        let basis = BasisSet::new(vec![
            OperatorMatrix::new("sx", sx.clone()),
            OperatorMatrix::new("sy", sy),
            OperatorMatrix::new("sz+1/2", shifted),
        ])
        .unwrap();
        assert!(structure_constants(&basis).is_err());
    }

    #[test]
    fn zero_gamma_gives_zero_generator() {
        let t = structure_constants(&build_two_spin_basis()).unwrap();
        let g = generator_matrix(&t, &[ZERO; 15]);
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn apply_generator_matches_matrix() {
        let t = structure_constants(&build_two_spin_basis()).unwrap();
        let gamma: Vec<Complex64> = (0..15).map(|i| c(i as f64 * 0.7 - 3.0, (i % 4) as f64)).collect();
        let g: Vec<Complex64> = (0..15).map(|i| c((i * i) as f64 * 0.1, -(i as f64))).collect();
        let m = generator_matrix(&t, &gamma);
        let mut out = vec![ZERO; 15];
        apply_generator(&t, &gamma, &g, &mut out);
        for r in 0..15 {
            let direct: Complex64 = (0..15).map(|k| m[(r, k)] * g[k]).sum::<Complex64>() * -I;
            assert!((direct - out[r]).norm() < 1e-12);
        }
    }

    #[test]
    fn gradient_slices_symmetric() {
        let ctx = GradientContext::for_sweep(10_000.0, 50);
        let s = ctx.slice_offsets();
        assert_eq!(s.len(), 50);
        for i in 0..25 {
            assert!((s[i] + s[49 - i]).abs() < 1e-9);
        }
        assert!(s.iter().all(|x| x.abs() < ctx.half_span));
        assert_eq!(GradientContext::for_sweep(1.0, 1).slice_offsets(), vec![0.0]);
    }

    #[test]
    fn scenario_requirements() {
        let seq = PulseSequence::single(crate::pulse::ChirpParams::centred(1.0, 1e4, 0.01)).unwrap();
        let sys = SpinSystem::coupled(1.0, -1.0, 10.0);
        assert!(scenario_coefficients(ScenarioKind::ZqFilter, sys, Drive::Sequence(seq.clone()), None).is_err());
        assert!(scenario_coefficients(ScenarioKind::SingleChirp, sys, Drive::Sequence(seq.clone()), None).is_err());
        assert!(scenario_coefficients(ScenarioKind::Psyche, sys, Drive::Sequence(seq.clone()), Some(0.0)).is_err());
        let h = scenario_coefficients(ScenarioKind::TwoSpinChirp, sys, Drive::Sequence(seq), None).unwrap();
        let g = h.at(0.004);
        assert!(g[9..].iter().all(|x| *x == ZERO));
    }

    #[test]
    fn zq_gradient_shifts_both_offsets() {
        let seq = PulseSequence::single(crate::pulse::ChirpParams::centred(1.0, 1e4, 0.01)).unwrap();
        let sys = SpinSystem::coupled(100.0, -50.0, 10.0);
        let h = scenario_coefficients(ScenarioKind::ZqFilter, sys, Drive::Sequence(seq), Some(7.0)).unwrap();
        let g = h.at(0.001);
        assert_eq!(g[0], c(107.0, 0.0));
        assert_eq!(g[1], c(-43.0, 0.0));
        assert_eq!(g[2], c(PI * 10.0, 0.0));
    }

    #[test]
    fn psyche_without_rf_has_only_offsets_and_coupling() {
        let s = Saltire::new(0.0, 1e4, 0.03, 40).unwrap();
        let sys = SpinSystem::coupled(100.0, -100.0, 10.0);
        let h = scenario_coefficients(ScenarioKind::Psyche, sys, Drive::Saltire(s), Some(3.0)).unwrap();
        for t in [0.0, 0.01, 0.015, 0.029] {
            let g = h.at(t);
            assert!(g[..5].iter().all(|x| *x != ZERO));
            assert!(g[5..].iter().all(|x| *x == ZERO));
        }
    }

    #[test]
    fn reconstruct_basis_vector() {
        let b = build_single_spin_basis();
        let rho = reconstruct_density(&b, &[ONE, ZERO, ZERO]);
        assert_eq!(rho.data, b.elements()[0].data);
        let zero = reconstruct_density(&b, &[ZERO; 3]);
        assert_eq!(zero.data.norm(), 0.0);
    }

    #[test]
    fn structure_table_is_deterministic() {
        let a = structure_constants(&build_two_spin_basis()).unwrap();
        let b = structure_constants(&build_two_spin_basis()).unwrap();
        assert_eq!(a, b);
    }
}
