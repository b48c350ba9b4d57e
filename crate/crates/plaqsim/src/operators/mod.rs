//! Hamiltonian and plaquette operator construction.
//!
//! Two independent routes to the plaquette operator exist on purpose. The
//! matrix-element formula in [`plaquette_matrix_element`] performs the
//! angular-momentum alignment sums analytically through Wigner 6-j symbols;
//! [`links`] composes four explicit link operators in the full
//! `|j, m, m'>` basis and serves as its brute-force cross-check.
//!
//! At truncation 1/2 the operator is completed on the unphysical sector
//! (gauge-variant completion): the three active registers flip with a
//! coefficient set only by the neighbor-link sector, which never mixes
//! physical and unphysical states and reduces the gate cost to a
//! projector-controlled `XXX`.

pub mod links;

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::angular::{dim, wigner_6j, HalfInt};
use crate::error::{Error, Result};
use crate::lattice::{enumerate_basis, BasisState, LatticeSpec, RegisterKind};

/// Dense operator over a qubit register space, with the generating lattice
/// ordering when one exists.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    matrix: DMatrix<Complex64>,
    qubits: usize,
    spec: Option<LatticeSpec>,
}

impl OperatorMatrix {
    pub fn new(matrix: DMatrix<Complex64>, qubits: usize, spec: Option<LatticeSpec>) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << qubits);
        debug_assert_eq!(matrix.ncols(), 1 << qubits);
        OperatorMatrix {
            matrix,
            qubits,
            spec,
        }
    }

    pub fn from_real(matrix: DMatrix<f64>, qubits: usize, spec: Option<LatticeSpec>) -> Self {
        let complex = matrix.map(|x| Complex64::new(x, 0.0));
        OperatorMatrix::new(complex, qubits, spec)
    }

    pub fn zeros(qubits: usize, spec: Option<LatticeSpec>) -> Self {
        let dim = 1 << qubits;
        OperatorMatrix::new(DMatrix::zeros(dim, dim), qubits, spec)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn spec(&self) -> Option<&LatticeSpec> {
        self.spec.as_ref()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        for i in 0..n {
            for k in i..n {
                if (self.matrix[(i, k)] - self.matrix[(k, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn max_imag(&self) -> f64 {
        self.matrix
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    /// Real part, for real-symmetric operators.
    pub fn real(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }

    /// Largest entry of `[A, B]` in absolute value.
    pub fn commutator_max(&self, other: &OperatorMatrix) -> f64 {
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        (ab - ba).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Restriction to a subset of basis indices (row and column).
    pub fn restrict(&self, indices: &[usize]) -> DMatrix<Complex64> {
        let n = indices.len();
        DMatrix::from_fn(n, n, |r, c| self.matrix[(indices[r], indices[c])])
    }

    /// Plain-text sparse triplets `row col value`, row-major, real entries.
    pub fn write_sparse_triplets<W: Write>(&self, out: &mut W) -> Result<()> {
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                let z = self.matrix[(r, c)];
                if z.norm() > 0.0 {
                    if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
                        return Err(Error::DimensionMismatch(
                            "sparse triplet export requires a real operator".into(),
                        ));
                    }
                    writeln!(out, "{} {} {:?}", r, c, z.re)?;
                }
            }
        }
        Ok(())
    }
}

/// Single Pauli or projector factor on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliFactor {
    I,
    X,
    Y,
    Z,
    /// (I + Z)/2, projects onto |0>.
    Proj0,
    /// (I - Z)/2, projects onto |1>.
    Proj1,
}

impl PauliFactor {
    fn matrix(self) -> DMatrix<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let entries = match self {
            PauliFactor::I => [one, z, z, one],
            PauliFactor::X => [z, one, one, z],
            PauliFactor::Y => [z, -i, i, z],
            PauliFactor::Z => [one, z, z, -one],
            PauliFactor::Proj0 => [one, z, z, z],
            PauliFactor::Proj1 => [z, z, z, one],
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }
}

/// Weighted product of single-qubit factors; identity on unlisted qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub factors: Vec<(usize, PauliFactor)>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, factors: Vec<(usize, PauliFactor)>) -> Self {
        PauliTerm {
            coefficient,
            factors,
        }
    }

    /// Dense matrix on `qubits` qubits, qubit 0 most significant.
    pub fn dense(&self, qubits: usize) -> DMatrix<Complex64> {
        let mut per_qubit = vec![PauliFactor::I; qubits];
        for &(q, f) in &self.factors {
            per_qubit[q] = f;
        }
        let mut acc = DMatrix::from_element(1, 1, Complex64::new(self.coefficient, 0.0));
        for f in per_qubit {
            acc = acc.kronecker(&f.matrix());
        }
        acc
    }

    /// Expand projector factors into I/Z combinations, yielding pure Pauli
    /// strings.
    pub fn expand_projectors(&self) -> Vec<PauliTerm> {
        let mut terms = vec![PauliTerm::new(self.coefficient, Vec::new())];
        for &(q, f) in &self.factors {
            match f {
                PauliFactor::Proj0 | PauliFactor::Proj1 => {
                    let z_sign = if f == PauliFactor::Proj0 { 1.0 } else { -1.0 };
                    let mut next = Vec::with_capacity(terms.len() * 2);
                    for t in &terms {
                        let mut id_branch = t.clone();
                        id_branch.coefficient *= 0.5;
                        id_branch.factors.push((q, PauliFactor::I));
                        let mut z_branch = t.clone();
                        z_branch.coefficient *= 0.5 * z_sign;
                        z_branch.factors.push((q, PauliFactor::Z));
                        next.push(id_branch);
                        next.push(z_branch);
                    }
                    terms = next;
                }
                other => {
                    for t in &mut terms {
                        t.factors.push((q, other));
                    }
                }
            }
        }
        terms
    }
}

/// Rotation coefficients multiplying the Z-rotation angle per unit time.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaVector {
    values: Vec<f64>,
}

impl BetaVector {
    pub fn new(values: Vec<f64>) -> Self {
        BetaVector { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sign matrix mapping rotation coefficients to neighbor-sector matrix
/// elements for the five-register circuit. Row order: neighbor sectors
/// (0,0), (0,1/2), (1/2,0), (1/2,1/2); column order: the four rotations.
/// Rotation 1 flips sign with the left neighbor, rotation 2 with both,
/// rotation 3 with the right neighbor, rotation 4 with neither.
pub fn sector_sign_matrix() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for (row, (a, b)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
        let parities = [a, a ^ b, b, 0];
        for (col, p) in parities.into_iter().enumerate() {
            m[(row, col)] = if p == 0 { 1.0 } else { -1.0 };
        }
    }
    m
}

/// First and fourth rows and columns of [`sector_sign_matrix`]: the sector
/// structure that survives when the two neighbor registers coincide.
pub fn reduced_sector_sign_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0])
}

/// Solve `M beta = v` for the rotation coefficients.
pub fn solve_beta(sector_values: &[f64], sector_matrix: &DMatrix<f64>) -> Result<BetaVector> {
    if sector_matrix.nrows() != sector_values.len() || !sector_matrix.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "sector matrix is {}x{} for {} sector values",
            sector_matrix.nrows(),
            sector_matrix.ncols(),
            sector_values.len()
        )));
    }
    let rhs = nalgebra::DVector::from_column_slice(sector_values);
    let lu = sector_matrix.clone().lu();
    let solution = lu.solve(&rhs).ok_or(Error::SingularMatrix)?;
    Ok(BetaVector::new(solution.iter().copied().collect()))
}

/// All twelve angular momenta entering one plaquette matrix element. The
/// four neighbor links are spectators; the plaquette's own top/bottom links
/// and the two rungs change by half a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaquetteTransition {
    pub left_top: HalfInt,
    pub left_bottom: HalfInt,
    pub right_top: HalfInt,
    pub right_bottom: HalfInt,
    pub active_top_from: HalfInt,
    pub active_top_to: HalfInt,
    pub active_bottom_from: HalfInt,
    pub active_bottom_to: HalfInt,
    pub left_rung_from: HalfInt,
    pub left_rung_to: HalfInt,
    pub right_rung_from: HalfInt,
    pub right_rung_to: HalfInt,
}

impl PlaquetteTransition {
    /// Transition with identified top and bottom chains.
    pub fn identified(
        left: HalfInt,
        right: HalfInt,
        active_from: HalfInt,
        active_to: HalfInt,
        left_rung_from: HalfInt,
        left_rung_to: HalfInt,
        right_rung_from: HalfInt,
        right_rung_to: HalfInt,
    ) -> Self {
        PlaquetteTransition {
            left_top: left,
            left_bottom: left,
            right_top: right,
            right_bottom: right,
            active_top_from: active_from,
            active_top_to: active_to,
            active_bottom_from: active_from,
            active_bottom_to: active_to,
            left_rung_from,
            left_rung_to,
            right_rung_from,
            right_rung_to,
        }
    }

    /// Reverse of this transition (initial and final swapped).
    pub fn reversed(&self) -> Self {
        PlaquetteTransition {
            left_top: self.left_top,
            left_bottom: self.left_bottom,
            right_top: self.right_top,
            right_bottom: self.right_bottom,
            active_top_from: self.active_top_to,
            active_top_to: self.active_top_from,
            active_bottom_from: self.active_bottom_to,
            active_bottom_to: self.active_bottom_from,
            left_rung_from: self.left_rung_to,
            left_rung_to: self.left_rung_from,
            right_rung_from: self.right_rung_to,
            right_rung_to: self.right_rung_from,
        }
    }
}

fn half_step(from: HalfInt, to: HalfInt) -> bool {
    (from.twice() - to.twice()).abs() == 1
}

/// Plaquette matrix element between gauge-invariant configurations: the
/// dimension factors, the alignment phase, and four 6-j symbols. Valid for
/// arbitrary truncation; returns 0 whenever a selection rule fails.
pub fn plaquette_matrix_element(t: &PlaquetteTransition) -> f64 {
    // The plaquette sources half a unit of angular momentum on each of its
    // four links.
    if !half_step(t.active_top_from, t.active_top_to)
        || !half_step(t.active_bottom_from, t.active_bottom_to)
        || !half_step(t.left_rung_from, t.left_rung_to)
        || !half_step(t.right_rung_from, t.right_rung_to)
    {
        return 0.0;
    }
    let magnitudes = [
        t.left_top,
        t.left_bottom,
        t.right_top,
        t.right_bottom,
        t.active_top_from,
        t.active_top_to,
        t.active_bottom_from,
        t.active_bottom_to,
        t.left_rung_from,
        t.left_rung_to,
        t.right_rung_from,
        t.right_rung_to,
    ];
    if magnitudes.iter().any(|j| j.is_negative()) {
        return 0.0;
    }

    let half = HalfInt::HALF;
    let symbols = wigner_6j(
        t.left_top,
        t.active_top_from,
        t.left_rung_from,
        half,
        t.left_rung_to,
        t.active_top_to,
    ) * wigner_6j(
        t.left_bottom,
        t.active_bottom_from,
        t.left_rung_from,
        half,
        t.left_rung_to,
        t.active_bottom_to,
    ) * wigner_6j(
        t.right_top,
        t.active_top_from,
        t.right_rung_from,
        half,
        t.right_rung_to,
        t.active_top_to,
    ) * wigner_6j(
        t.right_bottom,
        t.active_bottom_from,
        t.right_rung_from,
        half,
        t.right_rung_to,
        t.active_bottom_to,
    );
    if symbols == 0.0 {
        return 0.0;
    }

    let dims = (dim(t.active_top_from)
        * dim(t.active_top_to)
        * dim(t.active_bottom_from)
        * dim(t.active_bottom_to)
        * dim(t.left_rung_from)
        * dim(t.left_rung_to)
        * dim(t.right_rung_from)
        * dim(t.right_rung_to)) as f64;

    // Alignment phase. The last term is the relative step direction of the
    // two chains: without it the formula disagrees in sign with the
    // explicit link-operator composition whenever the top and bottom links
    // step oppositely (only possible for independent chains; identified
    // chains never see it). Pinned against `links::compose_plaquette_element`
    // and a by-hand contraction of one opposite-step element.
    let relative_step = (t.active_top_to.twice() - t.active_top_from.twice())
        - (t.active_bottom_to.twice() - t.active_bottom_from.twice());
    let phase_twice = t.left_top.twice()
        + t.left_bottom.twice()
        + t.right_top.twice()
        + t.right_bottom.twice()
        + 2 * (t.active_top_to.twice() + t.active_bottom_to.twice()
            - t.left_rung_from.twice()
            - t.right_rung_from.twice())
        + relative_step;
    debug_assert_eq!(phase_twice % 2, 0, "phase exponent must be an integer");
    let phase = if (phase_twice / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };

    dims.sqrt() * phase * symbols
}

/// Matrix element of the identified-chain plaquette operator for the
/// neighbor sector `(left, right)` at truncation 1/2, i.e. the coefficient
/// the gauge-variant completion assigns to the whole sector.
pub fn gvc_sector_coefficient(left: HalfInt, right: HalfInt) -> f64 {
    // Canonical physical representative: central link 1/2 -> 0 with the
    // rungs following the triangle rule on each side.
    let rung_with = |neighbor: HalfInt, active: HalfInt| {
        if neighbor == active {
            HalfInt::ZERO
        } else {
            HalfInt::HALF
        }
    };
    let from = HalfInt::HALF;
    let to = HalfInt::ZERO;
    plaquette_matrix_element(&PlaquetteTransition::identified(
        left,
        right,
        from,
        to,
        rung_with(left, from),
        rung_with(left, to),
        rung_with(right, from),
        rung_with(right, to),
    ))
}

/// The five-register plaquette operator at truncation 1/2 with the
/// gauge-variant completion, on qubits `(j_l, q_l, j_a, q_r, j_r)`. Every
/// basis state maps to its three-middle-register flip with the neighbor
/// sector coefficient.
pub fn gvc_plaquette_operator_5q() -> OperatorMatrix {
    let mut m = DMatrix::zeros(32, 32);
    for idx in 0..32usize {
        let bit = |q: usize| (idx >> (4 - q)) & 1;
        let left = HalfInt::from_twice(bit(0) as i32);
        let right = HalfInt::from_twice(bit(4) as i32);
        let flipped = idx ^ 0b01110;
        m[(flipped, idx)] = Complex64::new(gvc_sector_coefficient(left, right), 0.0);
    }
    OperatorMatrix::new(m, 5, None)
}

/// Full-register plaquette operator for plaquette `p` of the lattice.
///
/// At truncation 1/2 on the identified layout this applies the gauge-variant
/// completion (sector-controlled flips of the three active registers). For
/// larger truncations the matrix holds the raw gauge-invariant elements,
/// with no completion on the unphysical sector.
pub fn build_plaquette_operator(spec: &LatticeSpec, p: usize) -> Result<OperatorMatrix> {
    spec.check_size_bound()?;
    if !spec.identify_top_bottom {
        return Err(Error::InvalidLattice(
            "plaquette operators are built on the identified layout; \
             use the link-composition oracle for separate chains"
                .into(),
        ));
    }
    if spec.num_plaquettes % 2 != 0 {
        return Err(Error::InvalidLattice(
            "plaquette strings must have an even number of plaquettes".into(),
        ));
    }
    let regs = spec.plaquette_registers(p)?;
    let qubits = spec.total_qubits();
    let mut m: DMatrix<Complex64> = DMatrix::zeros(1 << qubits, 1 << qubits);

    if spec.truncation == HalfInt::HALF {
        let flip_mask = register_flip_mask(spec, &regs);
        for idx in 0..(1usize << qubits) {
            let state = BasisState::from_device_index(spec, idx);
            let left = state.value(regs.left_control);
            let right = state.value(regs.right_control);
            let coeff = gvc_sector_coefficient(left, right);
            m[(idx ^ flip_mask, idx)] = Complex64::new(coeff, 0.0);
        }
    } else {
        for (from, to, value) in plaquette_sparse_triplets(spec, p)? {
            m[(to, from)] = Complex64::new(value, 0.0);
        }
    }
    Ok(OperatorMatrix::new(m, qubits, Some(spec.clone())))
}

fn register_flip_mask(spec: &LatticeSpec, regs: &crate::lattice::PlaquetteRegisters) -> usize {
    let n = spec.register_count();
    let mut mask = 0usize;
    for r in [regs.left_rung, regs.top_link, regs.right_rung] {
        mask |= 1 << (n - 1 - r);
    }
    mask
}

/// Nonzero plaquette elements `(from_index, to_index, value)` generated from
/// the matrix-element formula, without assembling the dense embedding.
pub fn plaquette_sparse_triplets(
    spec: &LatticeSpec,
    p: usize,
) -> Result<Vec<(usize, usize, f64)>> {
    if !spec.identify_top_bottom {
        return Err(Error::InvalidLattice(
            "sparse plaquette elements are generated on the identified layout".into(),
        ));
    }
    let regs = spec.plaquette_registers(p)?;
    let basis = enumerate_basis(spec)?;
    let mut triplets = Vec::new();
    let steps = [-1, 1];
    for state in &basis {
        let left = state.value(regs.left_control);
        let right = state.value(regs.right_control);
        let a_from = state.value(regs.top_link);
        let ql_from = state.value(regs.left_rung);
        let qr_from = state.value(regs.right_rung);
        for da in steps {
            let a_to = HalfInt::from_twice(a_from.twice() + da);
            if a_to.is_negative() || a_to.twice() > spec.truncation.twice() {
                continue;
            }
            for dql in steps {
                let ql_to = HalfInt::from_twice(ql_from.twice() + dql);
                if ql_to.is_negative() || ql_to.twice() > spec.truncation.twice() {
                    continue;
                }
                for dqr in steps {
                    let qr_to = HalfInt::from_twice(qr_from.twice() + dqr);
                    if qr_to.is_negative() || qr_to.twice() > spec.truncation.twice() {
                        continue;
                    }
                    let value = plaquette_matrix_element(&PlaquetteTransition::identified(
                        left, right, a_from, a_to, ql_from, ql_to, qr_from, qr_to,
                    ));
                    if value == 0.0 {
                        continue;
                    }
                    let mut values = state.values().to_vec();
                    values[regs.top_link] = a_to;
                    values[regs.left_rung] = ql_to;
                    values[regs.right_rung] = qr_to;
                    let to = BasisState::new(values).device_index(spec);
                    triplets.push((state.device_index(spec), to, value));
                }
            }
        }
    }
    Ok(triplets)
}

/// Decompose a five-register truncation-1/2 plaquette operator into its four
/// projector-sandwiched `XXX` terms. Fails if the operator is not of that
/// form (e.g. a different truncation).
pub fn gvc_pauli_decomposition(op: &OperatorMatrix) -> Result<Vec<PauliTerm>> {
    if op.dim() != 32 {
        return Err(Error::UnsupportedTruncation(
            "the projector decomposition applies to the five-register truncation-1/2 operator"
                .into(),
        ));
    }
    let sector = |a: usize, b: usize| {
        let idx = (a << 4) | b;
        op.matrix()[(idx ^ 0b01110, idx)].re
    };
    let projector = |bit: usize| {
        if bit == 0 {
            PauliFactor::Proj0
        } else {
            PauliFactor::Proj1
        }
    };
    let mut terms = Vec::with_capacity(4);
    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        terms.push(PauliTerm::new(
            sector(a, b),
            vec![
                (0, projector(a)),
                (1, PauliFactor::X),
                (2, PauliFactor::X),
                (3, PauliFactor::X),
                (4, projector(b)),
            ],
        ));
    }
    let mut reconstructed: DMatrix<Complex64> = DMatrix::zeros(32, 32);
    for t in &terms {
        reconstructed += t.dense(5);
    }
    let max_diff = (reconstructed - op.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if max_diff > 1e-12 {
        return Err(Error::DimensionMismatch(format!(
            "operator is not a sector-controlled XXX flip (residual {max_diff:.2e})"
        )));
    }
    Ok(terms)
}

/// Electric Hamiltonian at truncation 1/2: `(g^2/2) * (3/4)` per excited
/// link register, with identified top-link registers counting twice.
pub fn build_electric_hamiltonian(spec: &LatticeSpec, g_squared: f64) -> Result<OperatorMatrix> {
    spec.check_size_bound()?;
    if spec.truncation != HalfInt::HALF {
        return Err(Error::UnsupportedTruncation(
            "the qubit electric Hamiltonian is defined at truncation 1/2".into(),
        ));
    }
    let weights: Vec<f64> = (0..spec.register_count())
        .map(|r| match spec.register_kind(r) {
            RegisterKind::TopLink(_) if spec.identify_top_bottom => 2.0,
            _ => 1.0,
        })
        .collect();
    Ok(diagonal_excitation_operator(spec, g_squared, &weights))
}

/// Electric energy observable of a single plaquette: the Casimir weights of
/// its own links only (top link twice, plus the two adjacent rungs).
pub fn electric_observable(spec: &LatticeSpec, p: usize, g_squared: f64) -> Result<OperatorMatrix> {
    spec.check_size_bound()?;
    if spec.truncation != HalfInt::HALF || !spec.identify_top_bottom {
        return Err(Error::UnsupportedTruncation(
            "the electric observable is defined on the identified truncation-1/2 layout".into(),
        ));
    }
    let regs = spec.plaquette_registers(p)?;
    let mut weights = vec![0.0; spec.register_count()];
    weights[regs.top_link] = 2.0;
    weights[regs.left_rung] = 1.0;
    weights[regs.right_rung] = 1.0;
    Ok(diagonal_excitation_operator(spec, g_squared, &weights))
}

/// Electric observable of the first plaquette (the operator whose diagonal
/// weights the measured probabilities in the energy curves).
pub fn electric_observable_plaquette1(spec: &LatticeSpec, g_squared: f64) -> Result<OperatorMatrix> {
    electric_observable(spec, 0, g_squared)
}

fn diagonal_excitation_operator(
    spec: &LatticeSpec,
    g_squared: f64,
    weights: &[f64],
) -> OperatorMatrix {
    let qubits = spec.total_qubits();
    let dim = 1usize << qubits;
    let n = spec.register_count();
    let mut m: DMatrix<Complex64> = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let mut w = 0.0;
        for (r, weight) in weights.iter().enumerate() {
            if (idx >> (n - 1 - r)) & 1 == 1 {
                w += weight;
            }
        }
        m[(idx, idx)] = Complex64::new(0.5 * g_squared * 0.75 * w, 0.0);
    }
    OperatorMatrix::new(m, qubits, Some(spec.clone()))
}

/// Full Hamiltonian `H_E - (1/2g^2) sum_p (box_p + box_p^dagger)`.
pub fn build_full_hamiltonian(spec: &LatticeSpec, g_squared: f64) -> Result<OperatorMatrix> {
    let electric = build_electric_hamiltonian(spec, g_squared)?;
    let mut h = electric.matrix().clone();
    let scale = Complex64::new(-1.0 / (2.0 * g_squared), 0.0);
    for p in 0..spec.num_plaquettes {
        let plaq = build_plaquette_operator(spec, p)?;
        h += (plaq.matrix() + plaq.matrix().adjoint()) * scale;
    }
    Ok(OperatorMatrix::new(h, spec.total_qubits(), Some(spec.clone())))
}

/// The magnetic part alone: `-(1/2g^2) sum_p (box_p + box_p^dagger)` for one
/// plaquette, used as a Trotter factor.
pub fn magnetic_hamiltonian_term(
    spec: &LatticeSpec,
    p: usize,
    g_squared: f64,
) -> Result<OperatorMatrix> {
    let plaq = build_plaquette_operator(spec, p)?;
    let scale = Complex64::new(-1.0 / (2.0 * g_squared), 0.0);
    let m = (plaq.matrix() + plaq.matrix().adjoint()) * scale;
    Ok(OperatorMatrix::new(m, spec.total_qubits(), Some(spec.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::physical_indices;
    use approx::assert_abs_diff_eq;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    /// The four nonzero transitions of the truncation-1/2 plaquette operator
    /// between physical five-register states, with their values.
    fn golden_transitions() -> Vec<(PlaquetteTransition, f64)> {
        let z = HalfInt::ZERO;
        let half = HalfInt::HALF;
        vec![
            // <00000| box |0 1/2 1/2 1/2 0> = 1
            (
                PlaquetteTransition::identified(z, z, half, z, half, z, half, z),
                1.0,
            ),
            // <0 0 0 1/2 1/2| box |0 1/2 1/2 0 1/2> = 1/2
            (
                PlaquetteTransition::identified(z, half, half, z, half, z, z, half),
                0.5,
            ),
            // <1/2 1/2 0 0 0| box |1/2 0 1/2 1/2 0> = 1/2
            (
                PlaquetteTransition::identified(half, z, half, z, z, half, half, z),
                0.5,
            ),
            // <1/2 0 1/2 0 1/2| box |1/2 1/2 0 1/2 1/2> = 1/4
            (
                PlaquetteTransition::identified(half, half, z, half, half, z, half, z),
                0.25,
            ),
        ]
    }

    #[test]
    fn matrix_elements_match_the_golden_table() {
        for (t, expected) in golden_transitions() {
            assert_abs_diff_eq!(plaquette_matrix_element(&t), expected, epsilon = 1e-12);
            assert_abs_diff_eq!(
                plaquette_matrix_element(&t.reversed()),
                expected,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn element_is_symmetric_under_reversal() {
        for tl in 0..=2 {
            for tr in 0..=2 {
                for taf in 0..=2 {
                    for tat in 0..=2 {
                        for tqs in 0..=1 {
                            let t = PlaquetteTransition::identified(
                                h(tl),
                                h(tr),
                                h(taf),
                                h(tat),
                                h(tqs),
                                h(tqs + 1),
                                h(tqs + 1),
                                h(tqs),
                            );
                            assert_abs_diff_eq!(
                                plaquette_matrix_element(&t),
                                plaquette_matrix_element(&t.reversed()),
                                epsilon = 1e-12
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sector_coefficients() {
        let z = HalfInt::ZERO;
        let half = HalfInt::HALF;
        assert_abs_diff_eq!(gvc_sector_coefficient(z, z), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gvc_sector_coefficient(z, half), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(gvc_sector_coefficient(half, z), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(gvc_sector_coefficient(half, half), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn beta_solves_the_sector_system() {
        let values = [1.0, 0.5, 0.5, 0.25];
        let beta = solve_beta(&values, &sector_sign_matrix()).unwrap();
        let expected = [3.0 / 16.0, 1.0 / 16.0, 3.0 / 16.0, 9.0 / 16.0];
        for (got, want) in beta.values().iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
        // Round trip M * beta = v.
        let m = sector_sign_matrix();
        let b = nalgebra::DVector::from_column_slice(beta.values());
        let back = m * b;
        for (got, want) in back.iter().zip(values) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn uniform_sectors_collapse_to_the_uncontrolled_rotation() {
        let beta = solve_beta(&[1.0, 1.0, 1.0, 1.0], &sector_sign_matrix()).unwrap();
        let expected = [0.0, 0.0, 0.0, 1.0];
        for (got, want) in beta.values().iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn reduced_beta_for_two_plaquettes() {
        let beta = solve_beta(&[1.0, 0.25], &reduced_sector_sign_matrix()).unwrap();
        assert_abs_diff_eq!(beta.values()[0], 3.0 / 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(beta.values()[1], 5.0 / 8.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_sector_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            solve_beta(&[1.0, 0.25], &m),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn five_register_gvc_has_24_unphysical_couplings() {
        let op = gvc_plaquette_operator_5q();
        // Physical five-register states: the two flanking vertices obey the
        // triangle rule.
        let physical: Vec<usize> = (0..32usize)
            .filter(|idx| {
                let bit = |q: usize| h(((idx >> (4 - q)) & 1) as i32);
                crate::angular::triangle_ok(bit(0), bit(2), bit(1))
                    && crate::angular::triangle_ok(bit(2), bit(4), bit(3))
            })
            .collect();
        assert_eq!(physical.len(), 8);
        let mut phys_couplings = 0;
        let mut unphys_couplings = 0;
        let mut mixed = 0;
        for r in 0..32 {
            for c in 0..32 {
                if op.matrix()[(r, c)].norm() > 0.0 {
                    match (physical.contains(&r), physical.contains(&c)) {
                        (true, true) => phys_couplings += 1,
                        (false, false) => unphys_couplings += 1,
                        _ => mixed += 1,
                    }
                }
            }
        }
        assert_eq!(phys_couplings, 8);
        assert_eq!(unphys_couplings, 24);
        assert_eq!(mixed, 0);
    }

    #[test]
    fn gvc_decomposition_recovers_the_projector_form() {
        let op = gvc_plaquette_operator_5q();
        let terms = gvc_pauli_decomposition(&op).unwrap();
        assert_eq!(terms.len(), 4);
        for (term, want) in terms.iter().zip([1.0, 0.5, 0.5, 0.25]) {
            assert_abs_diff_eq!(term.coefficient, want, epsilon = 1e-12);
        }
        // Expanding projectors gives I/Z (x) XXX (x) I/Z strings whose
        // coefficients are the rotation coefficients rearranged.
        let mut expanded = Vec::new();
        for t in &terms {
            expanded.extend(t.expand_projectors());
        }
        let mut dense: DMatrix<Complex64> = DMatrix::zeros(32, 32);
        for t in &expanded {
            dense += t.dense(5);
        }
        let diff = (dense - op.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn gvc_decomposition_rejects_other_operators() {
        let spec = LatticeSpec::two_plaquette_half();
        let op = build_plaquette_operator(&spec, 1).unwrap();
        assert!(gvc_pauli_decomposition(&op).is_err());
    }

    #[test]
    fn two_plaquette_operator_is_the_reduced_four_qubit_form() {
        let spec = LatticeSpec::two_plaquette_half();
        let op = build_plaquette_operator(&spec, 1).unwrap();
        assert!(op.is_hermitian(1e-12));
        // Pi0 (x) XXX + 1/4 Pi1 (x) XXX on (j_l, q_l, j_a, q_r).
        let mut expected: DMatrix<Complex64> = DMatrix::zeros(16, 16);
        expected += PauliTerm::new(
            1.0,
            vec![
                (0, PauliFactor::Proj0),
                (1, PauliFactor::X),
                (2, PauliFactor::X),
                (3, PauliFactor::X),
            ],
        )
        .dense(4);
        expected += PauliTerm::new(
            0.25,
            vec![
                (0, PauliFactor::Proj1),
                (1, PauliFactor::X),
                (2, PauliFactor::X),
                (3, PauliFactor::X),
            ],
        )
        .dense(4);
        let diff = (expected - op.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn electric_hamiltonian_diagonal_matches_the_supplemental_pattern() {
        let spec = LatticeSpec::two_plaquette_half();
        let g2 = 0.2;
        let he = build_electric_hamiltonian(&spec, g2).unwrap();
        let weights = [0, 1, 2, 3, 1, 2, 3, 4, 2, 3, 4, 5, 3, 4, 5, 6];
        for (i, w) in weights.iter().enumerate() {
            assert_abs_diff_eq!(
                he.matrix()[(i, i)].re,
                0.5 * g2 * 0.75 * f64::from(*w),
                epsilon = 1e-14
            );
        }
        // Vacuum expectation vanishes.
        assert_eq!(he.matrix()[(0, 0)].re, 0.0);
        // 12 nonzero diagonal entries over unphysical states.
        let phys = physical_indices(&spec).unwrap();
        let nonzero_unphys = (0..16)
            .filter(|i| he.matrix()[(*i, *i)].norm() > 0.0 && !phys.contains(i))
            .count();
        assert_eq!(nonzero_unphys, 12);
    }

    #[test]
    fn first_plaquette_observable_matches_the_supplemental_diagonal() {
        let spec = LatticeSpec::two_plaquette_half();
        let g2 = 0.2;
        let obs = electric_observable_plaquette1(&spec, g2).unwrap();
        let listed = [
            0.0,
            0.75,
            0.0,
            0.75,
            0.75,
            1.5,
            0.75,
            1.5,
            1.5,
            2.25,
            1.5,
            2.25,
            2.25,
            3.0,
            2.25,
            3.0,
        ];
        for (i, v) in listed.iter().enumerate() {
            assert_abs_diff_eq!(obs.matrix()[(i, i)].re, 0.5 * g2 * v, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(obs.matrix()[(15, 15)].re, 0.5 * g2 * 3.0, epsilon = 1e-14);
    }

    #[test]
    fn every_built_operator_commutes_with_the_projector() {
        let spec = LatticeSpec::two_plaquette_half();
        let projector = crate::lattice::physical_projector(&spec).unwrap();
        for op in [
            build_plaquette_operator(&spec, 0).unwrap(),
            build_plaquette_operator(&spec, 1).unwrap(),
            build_electric_hamiltonian(&spec, 0.2).unwrap(),
            build_full_hamiltonian(&spec, 0.2).unwrap(),
        ] {
            assert!(op.commutator_max(&projector) < 1e-12);
        }
        let spec1 = LatticeSpec::new(2, HalfInt::ONE, true, true).unwrap();
        let projector1 = crate::lattice::physical_projector(&spec1).unwrap();
        let plaq = build_plaquette_operator(&spec1, 1).unwrap();
        assert!(plaq.commutator_max(&projector1) < 1e-12);
    }

    #[test]
    fn truncation_one_operator_matches_its_sparse_elements() {
        let spec = LatticeSpec::new(2, HalfInt::ONE, true, true).unwrap();
        let op = build_plaquette_operator(&spec, 1).unwrap();
        assert!(op.is_hermitian(1e-12));
        let triplets = plaquette_sparse_triplets(&spec, 1).unwrap();
        assert!(!triplets.is_empty());
        let mut rebuilt: DMatrix<Complex64> = DMatrix::zeros(256, 256);
        for (from, to, v) in &triplets {
            rebuilt[(*to, *from)] = Complex64::new(*v, 0.0);
        }
        let diff = (rebuilt - op.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_eq!(diff, 0.0);
        // Embedded register values beyond the truncation have no action.
        let basis = enumerate_basis(&spec).unwrap();
        let valid: std::collections::HashSet<usize> =
            basis.iter().map(|s| s.device_index(&spec)).collect();
        for idx in 0..256usize {
            if !valid.contains(&idx) {
                for k in 0..256 {
                    assert_eq!(op.matrix()[(k, idx)], Complex64::default());
                    assert_eq!(op.matrix()[(idx, k)], Complex64::default());
                }
            }
        }
    }

    #[test]
    fn sparse_triplet_export_round_trips() {
        let spec = LatticeSpec::two_plaquette_half();
        let op = build_plaquette_operator(&spec, 0).unwrap();
        let mut buf = Vec::new();
        op.write_sparse_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut recovered: DMatrix<Complex64> = DMatrix::zeros(16, 16);
        for line in text.lines() {
            let mut it = line.split_whitespace();
            let r: usize = it.next().unwrap().parse().unwrap();
            let c: usize = it.next().unwrap().parse().unwrap();
            let v: f64 = it.next().unwrap().parse().unwrap();
            recovered[(r, c)] = Complex64::new(v, 0.0);
        }
        let diff = (recovered - op.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_eq!(diff, 0.0);
    }
}
