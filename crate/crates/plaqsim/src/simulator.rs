//! Noiseless statevector and noisy density-operator simulation of circuits,
//! with measurement sampling, two-qubit depolarizing noise after each CNOT,
//! and readout confusion.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{gate_matrix, Circuit, Gate};
use crate::error::{Error, Result};

/// Widths up to this evolve the exact density operator; beyond it, noisy
/// runs fall back to trajectory sampling.
pub const DENSITY_WIDTH_LIMIT: usize = 10;

/// Complex amplitudes over the computational basis, qubit 0 most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    width: usize,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// The basis state `|index>`.
    pub fn basis(width: usize, index: usize) -> Self {
        let dim = 1usize << width;
        assert!(index < dim);
        let mut amplitudes = DVector::from_element(dim, Complex64::default());
        amplitudes[index] = Complex64::new(1.0, 0.0);
        StateVector { width, amplitudes }
    }

    pub fn zero_state(width: usize) -> Self {
        StateVector::basis(width, 0)
    }

    pub fn from_amplitudes(width: usize, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << width {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for width {width}",
                amplitudes.len()
            )));
        }
        Ok(StateVector { width, amplitudes })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn bit(&self, qubit: usize) -> usize {
        self.width - 1 - qubit
    }

    /// Apply one gate in place.
    pub fn apply_gate(&mut self, gate: &Gate) {
        match *gate {
            Gate::H(q) => {
                let b = self.bit(q);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mask = 1usize << b;
                for idx in 0..self.amplitudes.len() {
                    if idx & mask == 0 {
                        let lo = self.amplitudes[idx];
                        let hi = self.amplitudes[idx | mask];
                        self.amplitudes[idx] = (lo + hi) * s;
                        self.amplitudes[idx | mask] = (lo - hi) * s;
                    }
                }
            }
            Gate::X(q) => {
                let mask = 1usize << self.bit(q);
                for idx in 0..self.amplitudes.len() {
                    if idx & mask == 0 {
                        self.amplitudes.swap_rows(idx, idx | mask);
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let cmask = 1usize << self.bit(control);
                let tmask = 1usize << self.bit(target);
                for idx in 0..self.amplitudes.len() {
                    if idx & cmask != 0 && idx & tmask == 0 {
                        self.amplitudes.swap_rows(idx, idx | tmask);
                    }
                }
            }
            Gate::Rz { qubit, angle } => {
                let mask = 1usize << self.bit(qubit);
                let neg = Complex64::from_polar(1.0, -angle / 2.0);
                let pos = Complex64::from_polar(1.0, angle / 2.0);
                for idx in 0..self.amplitudes.len() {
                    self.amplitudes[idx] *= if idx & mask == 0 { neg } else { pos };
                }
            }
        }
    }

    /// Apply a whole circuit, including its tracked global phase.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.width() != self.width {
            return Err(Error::WidthMismatch {
                circuit: circuit.width(),
                state: self.width,
            });
        }
        for gate in circuit.gates() {
            self.apply_gate(gate);
        }
        let phase = Complex64::from_polar(1.0, circuit.global_phase());
        for idx in 0..self.amplitudes.len() {
            self.amplitudes[idx] *= phase;
        }
        Ok(())
    }
}

/// Readout confusion: independent per-qubit asymmetric flips, or a full
/// column-stochastic matrix over the register space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Readout {
    /// `(p01, p10)` per qubit: probability to read 1 given 0, and 0 given 1.
    PerQubit(Vec<(f64, f64)>),
    /// Full confusion matrix, column `j` = outcome distribution for true
    /// state `j` (stored row-major).
    Full { dim: usize, entries: Vec<f64> },
}

impl Readout {
    pub fn uniform_flip(width: usize, p: f64) -> Self {
        Readout::PerQubit(vec![(p, p); width])
    }

    pub fn ideal(width: usize) -> Self {
        Readout::PerQubit(vec![(0.0, 0.0); width])
    }
}

/// Noise model: two-qubit depolarizing after every CNOT plus readout
/// confusion at measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub cnot_depolarizing: f64,
    pub readout: Readout,
}

impl NoiseModel {
    pub fn ideal(width: usize) -> Self {
        NoiseModel {
            cnot_depolarizing: 0.0,
            readout: Readout::ideal(width),
        }
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.cnot_depolarizing) {
            return Err(Error::InvalidNoise(format!(
                "depolarizing probability {} outside [0, 1]",
                self.cnot_depolarizing
            )));
        }
        match &self.readout {
            Readout::PerQubit(flips) => {
                if flips.len() != width {
                    return Err(Error::InvalidNoise(format!(
                        "{} per-qubit readout entries for width {width}",
                        flips.len()
                    )));
                }
                for &(p01, p10) in flips {
                    if !(0.0..=1.0).contains(&p01) || !(0.0..=1.0).contains(&p10) {
                        return Err(Error::InvalidNoise(
                            "readout flip probabilities must lie in [0, 1]".into(),
                        ));
                    }
                }
            }
            Readout::Full { dim, entries } => {
                if *dim != 1 << width || entries.len() != dim * dim {
                    return Err(Error::InvalidNoise(format!(
                        "confusion matrix dimension {dim} does not match width {width}"
                    )));
                }
                for col in 0..*dim {
                    let sum: f64 = (0..*dim).map(|row| entries[row * dim + col]).sum();
                    if (sum - 1.0).abs() > 1e-9 || entries.iter().any(|&e| e < 0.0) {
                        return Err(Error::InvalidNoise(
                            "confusion matrix columns must be stochastic".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Dense confusion matrix over the register space.
    pub fn confusion_matrix(&self, width: usize) -> DMatrix<f64> {
        let dim = 1usize << width;
        match &self.readout {
            Readout::Full { dim: d, entries } => {
                DMatrix::from_fn(*d, *d, |r, c| entries[r * d + c])
            }
            Readout::PerQubit(flips) => DMatrix::from_fn(dim, dim, |measured, truth| {
                let mut p = 1.0;
                for (q, &(p01, p10)) in flips.iter().enumerate() {
                    let bit = width - 1 - q;
                    let t = (truth >> bit) & 1;
                    let m = (measured >> bit) & 1;
                    p *= match (t, m) {
                        (0, 0) => 1.0 - p01,
                        (0, 1) => p01,
                        (1, 0) => p10,
                        (1, 1) => 1.0 - p10,
                        _ => unreachable!(),
                    };
                }
                p
            }),
        }
    }
}

/// Measurement outcome histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    pub width: usize,
    pub shots: u64,
    pub counts: BTreeMap<usize, u64>,
}

impl CountsTable {
    pub fn probabilities(&self) -> Vec<f64> {
        let mut p = vec![0.0; 1 << self.width];
        for (&idx, &n) in &self.counts {
            p[idx] = n as f64 / self.shots as f64;
        }
        p
    }

    /// Two-column text: bitstring and count.
    pub fn write_text<W: Write>(&self, out: &mut W) -> Result<()> {
        for (&idx, &n) in &self.counts {
            writeln!(out, "{idx:0width$b} {n}", width = self.width)?;
        }
        Ok(())
    }

    pub fn from_text(width: usize, text: &str) -> Result<CountsTable> {
        let mut counts = BTreeMap::new();
        let mut shots = 0u64;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let bits = it.next().ok_or_else(|| Error::Parse("missing bitstring".into()))?;
            let n: u64 = it
                .next()
                .ok_or_else(|| Error::Parse("missing count".into()))?
                .parse()
                .map_err(|_| Error::Parse("bad count".into()))?;
            let idx = usize::from_str_radix(bits, 2)
                .map_err(|_| Error::Parse(format!("bad bitstring {bits:?}")))?;
            if bits.len() != width || idx >= (1 << width) {
                return Err(Error::Parse(format!("bitstring {bits:?} has wrong width")));
            }
            counts.insert(idx, n);
            shots += n;
        }
        Ok(CountsTable {
            width,
            shots,
            counts,
        })
    }
}

/// Noiseless gate-by-gate statevector evolution.
pub fn run_noiseless(circuit: &Circuit, initial: &StateVector) -> Result<StateVector> {
    let mut state = initial.clone();
    state.apply_circuit(circuit)?;
    debug_assert!((state.norm() - 1.0).abs() < 1e-12);
    Ok(state)
}

/// Exact density operator of the noisy circuit: unitary gates conjugate
/// `rho`, and each CNOT is followed by the two-qubit depolarizing channel
/// `rho -> (1 - eps) rho + eps (I/4 (x) tr_pair rho)` on its qubit pair.
pub struct DensityMatrix {
    width: usize,
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn pure(state: &StateVector) -> Self {
        let amp = state.amplitudes();
        let rho = amp * amp.adjoint();
        DensityMatrix {
            width: state.width(),
            rho,
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).sum()
    }

    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re.max(0.0)).collect()
    }

    pub fn apply_unitary_gate(&mut self, gate: &Gate) {
        let u = gate_matrix(gate, self.width);
        self.rho = &u * &self.rho * u.adjoint();
    }

    /// Two-qubit depolarizing channel on `(q1, q2)` with strength `eps`.
    pub fn depolarize_pair(&mut self, q1: usize, q2: usize, eps: f64) {
        if eps == 0.0 {
            return;
        }
        let dim = self.rho.nrows();
        let b1 = self.width - 1 - q1;
        let b2 = self.width - 1 - q2;
        let pair_mask = (1usize << b1) | (1usize << b2);
        // sigma = tr_pair(rho), embedded back as I/4 (x) sigma: the element
        // ((p_r, rest_r), (p_c, rest_c)) of the mixed part is
        // delta(p_r, p_c)/4 * sum_p rho[(p, rest_r), (p, rest_c)].
        let mut mixed = DMatrix::from_element(dim, dim, Complex64::default());
        for r in 0..dim {
            let rest_r = r & !pair_mask;
            for c in 0..dim {
                if (r & pair_mask) != (c & pair_mask) {
                    continue;
                }
                let rest_c = c & !pair_mask;
                let mut acc = Complex64::default();
                for p in 0..4usize {
                    let bits = (((p >> 1) & 1) << b1) | ((p & 1) << b2);
                    acc += self.rho[(rest_r | bits, rest_c | bits)];
                }
                mixed[(r, c)] = acc * 0.25;
            }
        }
        self.rho = &self.rho * Complex64::new(1.0 - eps, 0.0)
            + mixed * Complex64::new(eps, 0.0);
    }
}

/// Exact outcome distribution of the noisy circuit: density-operator
/// evolution followed by the readout confusion map.
pub fn run_noisy_probabilities(
    circuit: &Circuit,
    initial: &StateVector,
    noise: &NoiseModel,
) -> Result<Vec<f64>> {
    if circuit.width() != initial.width() {
        return Err(Error::WidthMismatch {
            circuit: circuit.width(),
            state: initial.width(),
        });
    }
    noise.validate(circuit.width())?;
    if circuit.width() > DENSITY_WIDTH_LIMIT {
        return Err(Error::SizeBound {
            dim: 1 << circuit.width(),
            bound: 1 << DENSITY_WIDTH_LIMIT,
        });
    }
    let mut rho = DensityMatrix::pure(initial);
    for gate in circuit.gates() {
        rho.apply_unitary_gate(gate);
        if let Gate::Cnot { control, target } = gate {
            rho.depolarize_pair(*control, *target, noise.cnot_depolarizing);
        }
        debug_assert!((rho.trace() - 1.0).abs() < 1e-10);
    }
    let p = DVector::from_vec(rho.diagonal_probabilities());
    let confused = noise.confusion_matrix(circuit.width()) * p;
    Ok(confused.iter().copied().collect())
}

/// How a noisy run is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMethod {
    /// Exact channel on the density operator, then multinomial sampling.
    DensityMatrix,
    /// Per-shot statevector trajectories with sampled Pauli kicks.
    Trajectories,
}

/// Sample measurement outcomes of the noisy circuit. Density-operator
/// evolution up to [`DENSITY_WIDTH_LIMIT`] qubits, trajectories beyond.
pub fn run_noisy(
    circuit: &Circuit,
    initial: &StateVector,
    noise: &NoiseModel,
    shots: u64,
    rng_seed: u64,
) -> Result<CountsTable> {
    let method = if circuit.width() <= DENSITY_WIDTH_LIMIT {
        SimMethod::DensityMatrix
    } else {
        SimMethod::Trajectories
    };
    run_noisy_with_method(circuit, initial, noise, shots, rng_seed, method)
}

pub fn run_noisy_with_method(
    circuit: &Circuit,
    initial: &StateVector,
    noise: &NoiseModel,
    shots: u64,
    rng_seed: u64,
    method: SimMethod,
) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    match method {
        SimMethod::DensityMatrix => {
            let probs = run_noisy_probabilities(circuit, initial, noise)?;
            Ok(sample_counts(circuit.width(), &probs, shots, &mut rng))
        }
        SimMethod::Trajectories => run_trajectories(circuit, initial, noise, shots, &mut rng),
    }
}

/// Multinomial sampling from an outcome distribution.
pub fn sample_counts(
    width: usize,
    probabilities: &[f64],
    shots: u64,
    rng: &mut ChaCha8Rng,
) -> CountsTable {
    let mut cumulative = Vec::with_capacity(probabilities.len());
    let mut acc = 0.0;
    for &p in probabilities {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    let total = acc;
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for _ in 0..shots {
        let x: f64 = rng.random::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c < x).min(probabilities.len() - 1);
        *counts.entry(idx).or_insert(0) += 1;
    }
    CountsTable {
        width,
        shots,
        counts,
    }
}

fn run_trajectories(
    circuit: &Circuit,
    initial: &StateVector,
    noise: &NoiseModel,
    shots: u64,
    rng: &mut ChaCha8Rng,
) -> Result<CountsTable> {
    noise.validate(circuit.width())?;
    if circuit.width() != initial.width() {
        return Err(Error::WidthMismatch {
            circuit: circuit.width(),
            state: initial.width(),
        });
    }
    let width = circuit.width();
    let confusion = match &noise.readout {
        Readout::Full { .. } => Some(noise.confusion_matrix(width)),
        Readout::PerQubit(_) => None,
    };
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for _ in 0..shots {
        let mut state = initial.clone();
        for gate in circuit.gates() {
            state.apply_gate(gate);
            if let Gate::Cnot { control, target } = gate {
                if rng.random::<f64>() < noise.cnot_depolarizing {
                    // Uniform two-qubit Pauli kick (identity included).
                    for &q in &[*control, *target] {
                        match rng.random_range(0..4u8) {
                            0 => {}
                            1 => state.apply_gate(&Gate::X(q)),
                            2 => {
                                // Y = i X Z as a statevector map; the global
                                // factor is irrelevant for sampling.
                                state.apply_gate(&Gate::Rz {
                                    qubit: q,
                                    angle: std::f64::consts::PI,
                                });
                                state.apply_gate(&Gate::X(q));
                            }
                            _ => state.apply_gate(&Gate::Rz {
                                qubit: q,
                                angle: std::f64::consts::PI,
                            }),
                        }
                    }
                }
            }
        }
        let probs = state.probabilities();
        let mut outcome = {
            let x: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = probs.len() - 1;
            for (i, &p) in probs.iter().enumerate() {
                acc += p;
                if x < acc {
                    pick = i;
                    break;
                }
            }
            pick
        };
        outcome = match (&noise.readout, &confusion) {
            (Readout::PerQubit(flips), _) => {
                let mut o = outcome;
                for (q, &(p01, p10)) in flips.iter().enumerate() {
                    let bit = width - 1 - q;
                    let value = (o >> bit) & 1;
                    let flip_p = if value == 0 { p01 } else { p10 };
                    if rng.random::<f64>() < flip_p {
                        o ^= 1 << bit;
                    }
                }
                o
            }
            (Readout::Full { .. }, Some(c)) => {
                let x: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = c.nrows() - 1;
                for row in 0..c.nrows() {
                    acc += c[(row, outcome)];
                    if x < acc {
                        pick = row;
                        break;
                    }
                }
                pick
            }
            _ => outcome,
        };
        *counts.entry(outcome).or_insert(0) += 1;
    }
    Ok(CountsTable {
        width,
        shots,
        counts,
    })
}

/// Expectation of a diagonal observable against an outcome distribution,
/// with the multinomial standard error when a shot count is given.
pub fn expectation_diagonal(
    probabilities: &[f64],
    weights: &[f64],
    shots: Option<u64>,
) -> Result<(f64, f64)> {
    if probabilities.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities vs {} weights",
            probabilities.len(),
            weights.len()
        )));
    }
    let value: f64 = probabilities.iter().zip(weights).map(|(p, w)| p * w).sum();
    let second: f64 = probabilities
        .iter()
        .zip(weights)
        .map(|(p, w)| p * w * w)
        .sum();
    let stderr = match shots {
        Some(n) if n > 0 => ((second - value * value).max(0.0) / n as f64).sqrt(),
        _ => 0.0,
    };
    Ok((value, stderr))
}

/// Expectation of a diagonal operator from measured counts.
pub fn expectation(
    counts: &CountsTable,
    observable: &crate::operators::OperatorMatrix,
) -> Result<(f64, f64)> {
    let weights = diagonal_weights(observable)?;
    expectation_diagonal(&counts.probabilities(), &weights, Some(counts.shots))
}

/// Diagonal of an operator, failing when off-diagonal entries exist.
pub fn diagonal_weights(observable: &crate::operators::OperatorMatrix) -> Result<Vec<f64>> {
    let m = observable.matrix();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r != c && m[(r, c)].norm() > 1e-14 {
                return Err(Error::DimensionMismatch(
                    "counts-based expectation needs a diagonal observable".into(),
                ));
            }
        }
    }
    Ok((0..m.nrows()).map(|i| m[(i, i)].re).collect())
}
