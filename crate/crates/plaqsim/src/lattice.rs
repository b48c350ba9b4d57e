//! Plaquette-string register layout, basis enumeration under a link
//! truncation, and the Gauss-law physical-subspace test.
//!
//! The lattice is a periodic ladder of `L` plaquettes: a top chain of
//! `j`-type links, a bottom chain, and `L` vertical `q`-type rungs. Rung `i`
//! couples links `j_i` and `j_{i+1}` at vertex `i`. When the top and bottom
//! chains are identified (valid for evolution from the strong-coupling
//! vacuum at truncation 1/2), one `j` register per plaquette remains and the
//! register order is `[j_1, q_1, j_2, q_2, ...]` with `j_1` most
//! significant. Without identification the order is
//! `[jt_1, jb_1, q_1, jt_2, ...]`.

use serde::{Deserialize, Serialize};

use crate::angular::{dim, triangle_ok, HalfInt};
use crate::error::{Error, Result};

/// Default bound on the embedded (qubit) Hilbert-space dimension.
pub const DEFAULT_SIZE_BOUND: usize = 1 << 16;

/// Geometry and truncation of a periodic plaquette string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub num_plaquettes: usize,
    /// Maximum link angular momentum retained per register.
    #[serde(
        serialize_with = "crate::config::serialize_half_int",
        deserialize_with = "crate::config::deserialize_half_int"
    )]
    pub truncation: HalfInt,
    pub periodic: bool,
    /// Identify top and bottom `j` chains (one `j` register per plaquette).
    /// Valid for truncation-1/2 evolution from the vacuum, where flux
    /// conservation keeps the chains equal; on by default.
    #[serde(default = "default_identify")]
    pub identify_top_bottom: bool,
    /// Bound on the embedded Hilbert-space dimension.
    #[serde(default = "default_size_bound")]
    pub size_bound: usize,
}

fn default_size_bound() -> usize {
    DEFAULT_SIZE_BOUND
}

fn default_identify() -> bool {
    true
}

/// Which kind of link a register encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegisterKind {
    /// Top-chain link of plaquette `i` (bottom too, when identified).
    TopLink(usize),
    /// Bottom-chain link of plaquette `i`.
    BottomLink(usize),
    /// Rung between plaquettes `i` and `i+1`.
    Rung(usize),
}

impl LatticeSpec {
    pub fn new(
        num_plaquettes: usize,
        truncation: HalfInt,
        periodic: bool,
        identify_top_bottom: bool,
    ) -> Result<Self> {
        let spec = LatticeSpec {
            num_plaquettes,
            truncation,
            periodic,
            identify_top_bottom,
            size_bound: DEFAULT_SIZE_BOUND,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The standard two-plaquette configuration: PBC, truncation 1/2,
    /// identified chains. Registers `[j_l, q_l, j_a, q_r]`.
    pub fn two_plaquette_half() -> Self {
        LatticeSpec::new(2, HalfInt::HALF, true, true).expect("static spec is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_plaquettes == 0 {
            return Err(Error::InvalidLattice(
                "at least one plaquette is required".into(),
            ));
        }
        if !self.periodic {
            return Err(Error::InvalidLattice(
                "open boundary conditions are not supported".into(),
            ));
        }
        if self.truncation.twice() < 1 {
            return Err(Error::UnsupportedTruncation(format!(
                "truncation {} must be at least 1/2",
                self.truncation
            )));
        }
        Ok(())
    }

    pub fn register_count(&self) -> usize {
        if self.identify_top_bottom {
            2 * self.num_plaquettes
        } else {
            3 * self.num_plaquettes
        }
    }

    pub fn register_kind(&self, r: usize) -> RegisterKind {
        if self.identify_top_bottom {
            let plaq = r / 2;
            if r % 2 == 0 {
                RegisterKind::TopLink(plaq)
            } else {
                RegisterKind::Rung(plaq)
            }
        } else {
            let plaq = r / 3;
            match r % 3 {
                0 => RegisterKind::TopLink(plaq),
                1 => RegisterKind::BottomLink(plaq),
                _ => RegisterKind::Rung(plaq),
            }
        }
    }

    /// Qubits per register: `ceil(log2(2 * truncation + 1))`.
    pub fn qubits_per_register(&self) -> usize {
        let states = dim(self.truncation);
        usize::BITS as usize - (states - 1).leading_zeros() as usize
    }

    pub fn total_qubits(&self) -> usize {
        self.register_count() * self.qubits_per_register()
    }

    /// Dimension of the qubit-embedded Hilbert space.
    pub fn embedded_dim(&self) -> usize {
        1 << self.total_qubits()
    }

    /// Number of valid register configurations (before qubit embedding).
    pub fn register_dim(&self) -> usize {
        dim(self.truncation).pow(self.register_count() as u32)
    }

    pub fn check_size_bound(&self) -> Result<()> {
        let total = self.total_qubits();
        if total >= usize::BITS as usize || (1usize << total) > self.size_bound {
            return Err(Error::SizeBound {
                dim: 1usize.checked_shl(total as u32).unwrap_or(usize::MAX),
                bound: self.size_bound,
            });
        }
        Ok(())
    }

    /// Register indices `(left_rung, top_link, right_rung)` acted on by the
    /// plaquette operator `p` (0-based), plus its `(left, right)` neighbor
    /// top-link control registers. Identified layout only.
    pub fn plaquette_registers(&self, p: usize) -> Result<PlaquetteRegisters> {
        if !self.identify_top_bottom {
            return Err(Error::InvalidLattice(
                "plaquette register map is defined on the identified layout".into(),
            ));
        }
        let l = self.num_plaquettes;
        if p >= l {
            return Err(Error::InvalidLattice(format!(
                "plaquette index {p} out of range for {l} plaquettes"
            )));
        }
        let left = (p + l - 1) % l;
        let right = (p + 1) % l;
        Ok(PlaquetteRegisters {
            left_rung: 2 * left + 1,
            top_link: 2 * p,
            right_rung: 2 * p + 1,
            left_control: 2 * left,
            right_control: 2 * right,
        })
    }
}

/// Register footprint of one plaquette operator on the identified layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaquetteRegisters {
    pub left_rung: usize,
    pub top_link: usize,
    pub right_rung: usize,
    pub left_control: usize,
    pub right_control: usize,
}

/// One register-value configuration of the plaquette string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisState {
    values: Vec<HalfInt>,
}

impl BasisState {
    pub fn new(values: Vec<HalfInt>) -> Self {
        BasisState { values }
    }

    pub fn values(&self) -> &[HalfInt] {
        &self.values
    }

    pub fn value(&self, register: usize) -> HalfInt {
        self.values[register]
    }

    /// Computational-basis index with register 0 most significant and each
    /// register contributing `qubits_per_register` bits holding `2j`.
    pub fn device_index(&self, spec: &LatticeSpec) -> usize {
        let bits = spec.qubits_per_register();
        let mut idx = 0usize;
        for v in &self.values {
            idx = (idx << bits) | v.twice() as usize;
        }
        idx
    }

    /// Inverse of [`BasisState::device_index`]. Values beyond the truncation
    /// (possible in the qubit embedding for truncations above 1/2) are kept
    /// as-is; [`is_physical`] classifies them unphysical.
    pub fn from_device_index(spec: &LatticeSpec, index: usize) -> Self {
        let bits = spec.qubits_per_register();
        let mask = (1usize << bits) - 1;
        let n = spec.register_count();
        let mut values = vec![HalfInt::ZERO; n];
        for r in 0..n {
            let shift = bits * (n - 1 - r);
            values[r] = HalfInt::from_twice(((index >> shift) & mask) as i32);
        }
        BasisState { values }
    }

    pub fn bitstring(&self, spec: &LatticeSpec) -> String {
        let idx = self.device_index(spec);
        let width = spec.total_qubits();
        format!("{idx:0width$b}")
    }
}

/// All register configurations with every value at most the truncation, in
/// device-index order.
pub fn enumerate_basis(spec: &LatticeSpec) -> Result<Vec<BasisState>> {
    spec.check_size_bound()?;
    let n = spec.register_count();
    let per_register: Vec<HalfInt> = HalfInt::range_inclusive(spec.truncation).collect();
    let mut states = Vec::with_capacity(per_register.len().pow(n as u32));
    let mut current = vec![HalfInt::ZERO; n];
    fill(&per_register, &mut current, 0, &mut states);
    Ok(states)
}

fn fill(
    choices: &[HalfInt],
    current: &mut Vec<HalfInt>,
    register: usize,
    out: &mut Vec<BasisState>,
) {
    if register == current.len() {
        out.push(BasisState::new(current.clone()));
        return;
    }
    for &v in choices {
        current[register] = v;
        fill(choices, current, register + 1, out);
    }
}

/// Gauss-law test: every vertex triad of link values must satisfy the
/// triangle rule. Values beyond the truncation are unphysical by definition.
pub fn is_physical(state: &BasisState, spec: &LatticeSpec) -> bool {
    if state
        .values()
        .iter()
        .any(|v| v.twice() > spec.truncation.twice() || v.is_negative())
    {
        return false;
    }
    let l = spec.num_plaquettes;
    if spec.identify_top_bottom {
        for i in 0..l {
            let j_here = state.value(2 * i);
            let j_next = state.value(2 * ((i + 1) % l));
            let q = state.value(2 * i + 1);
            if !triangle_ok(j_here, j_next, q) {
                return false;
            }
        }
    } else {
        for i in 0..l {
            let jt_here = state.value(3 * i);
            let jb_here = state.value(3 * i + 1);
            let q = state.value(3 * i + 2);
            let jt_next = state.value(3 * ((i + 1) % l));
            let jb_next = state.value(3 * ((i + 1) % l) + 1);
            if !triangle_ok(jt_here, jt_next, q) || !triangle_ok(jb_here, jb_next, q) {
                return false;
            }
        }
    }
    true
}

/// Device-basis indices of the physical (gauge-invariant) states, ascending.
pub fn physical_indices(spec: &LatticeSpec) -> Result<Vec<usize>> {
    let states = enumerate_basis(spec)?;
    Ok(states
        .iter()
        .filter(|s| is_physical(s, spec))
        .map(|s| s.device_index(spec))
        .collect())
}

/// Diagonal 0/1 projector onto the physical subspace, over the embedded
/// qubit space. Its trace is the physical-state count.
pub fn physical_projector(spec: &LatticeSpec) -> Result<crate::operators::OperatorMatrix> {
    spec.check_size_bound()?;
    let qubits = spec.total_qubits();
    let dim = 1usize << qubits;
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    for idx in physical_indices(spec)? {
        m[(idx, idx)] = num_complex::Complex64::new(1.0, 0.0);
    }
    Ok(crate::operators::OperatorMatrix::new(m, qubits, Some(spec.clone())))
}
