//! Gate-level circuit representation and synthesis of the time-evolution
//! circuits at link truncation 1/2.
//!
//! The plaquette exponential is synthesized by rotating the three active
//! registers into the X basis, accumulating their joint parity with a CNOT
//! ladder, and applying Z rotations whose angles are the sector-resolved
//! rotation coefficients; the neighbor registers enter only through CNOTs
//! that fold their value into the rotation axis. Composed unitaries are
//! required to match the matrix exponential of the generating operator —
//! that equality, not the diagram, fixes every sign convention.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::angular::HalfInt;
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, RegisterKind};
use crate::operators::BetaVector;

/// One gate. Qubit 0 is the most significant bit of the basis index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Cnot { control: usize, target: usize },
    /// `Rz(theta) = diag(exp(-i theta/2), exp(+i theta/2))`.
    Rz { qubit: usize, angle: f64 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) => vec![q],
            Gate::Rz { qubit, .. } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    fn inverse(&self) -> Gate {
        match *self {
            Gate::Rz { qubit, angle } => Gate::Rz {
                qubit,
                angle: -angle,
            },
            other => other,
        }
    }
}

/// Bookkeeping carried by a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CircuitMetadata {
    pub trotter_steps: Option<usize>,
    pub plaquette: Option<usize>,
    /// Noise-scaling factor (1 = bare circuit).
    pub r_scale: u32,
}

/// An ordered list of gates on `width` qubits plus a tracked global phase:
/// the circuit unitary is `exp(i global_phase) * product(gates)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
    global_phase: f64,
    pub metadata: CircuitMetadata,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            gates: Vec::new(),
            global_phase: 0.0,
            metadata: CircuitMetadata {
                r_scale: 1,
                ..CircuitMetadata::default()
            },
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    pub fn push(&mut self, gate: Gate) {
        debug_assert!(gate.qubits().iter().all(|&q| q < self.width));
        debug_assert!({
            let qs = gate.qubits();
            qs.len() == 1 || qs[0] != qs[1]
        });
        self.gates.push(gate);
    }

    pub fn add_global_phase(&mut self, phase: f64) {
        self.global_phase += phase;
    }

    /// Append all gates (and phase) of `other`.
    pub fn extend(&mut self, other: &Circuit) {
        debug_assert_eq!(self.width, other.width);
        self.gates.extend_from_slice(&other.gates);
        self.global_phase += other.global_phase;
    }

    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }

    /// Reversed gate order with inverted gates: the inverse circuit.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            width: self.width,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            global_phase: -self.global_phase,
            metadata: self.metadata,
        }
    }

    /// Dense unitary by multiplying full-space gate matrices, including the
    /// tracked global phase. Independent of the statevector simulator.
    pub fn unitary(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.width;
        let mut u = DMatrix::identity(dim, dim);
        for gate in &self.gates {
            u = gate_matrix(gate, self.width) * u;
        }
        u * Complex64::from_polar(1.0, self.global_phase)
    }
}

/// Full-space matrix of one gate, qubit 0 most significant.
pub fn gate_matrix(gate: &Gate, width: usize) -> DMatrix<Complex64> {
    let dim = 1usize << width;
    let mut m = DMatrix::from_element(dim, dim, Complex64::default());
    match *gate {
        Gate::H(q) => {
            let bit = width - 1 - q;
            let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            for idx in 0..dim {
                let flipped = idx ^ (1 << bit);
                let sign = if idx & (1 << bit) == 0 {
                    s
                } else {
                    -s
                };
                m[(idx, idx)] += sign;
                m[(flipped, idx)] += s;
            }
        }
        Gate::X(q) => {
            let bit = width - 1 - q;
            for idx in 0..dim {
                m[(idx ^ (1 << bit), idx)] = Complex64::new(1.0, 0.0);
            }
        }
        Gate::Cnot { control, target } => {
            let cbit = width - 1 - control;
            let tbit = width - 1 - target;
            for idx in 0..dim {
                let out = if idx & (1 << cbit) != 0 {
                    idx ^ (1 << tbit)
                } else {
                    idx
                };
                m[(out, idx)] = Complex64::new(1.0, 0.0);
            }
        }
        Gate::Rz { qubit, angle } => {
            let bit = width - 1 - qubit;
            for idx in 0..dim {
                let half = if idx & (1 << bit) == 0 {
                    -angle / 2.0
                } else {
                    angle / 2.0
                };
                m[(idx, idx)] = Complex64::from_polar(1.0, half);
            }
        }
    }
    m
}

/// `exp(-i Z theta)` as a gate: an `Rz(2 theta)`.
fn z_exponential(qubit: usize, theta: f64) -> Gate {
    Gate::Rz {
        qubit,
        angle: 2.0 * theta,
    }
}

/// Core of the controlled plaquette exponential on four qubits: rotate the
/// three active qubits into the X basis, run a parity ladder, rotate by the
/// uncontrolled coefficient, fold the control in with a CNOT sandwich, and
/// mirror. `actives` are ordered so the parity flows `a2 -> a1 -> a0`.
fn plaquette_block_4q(
    circuit: &mut Circuit,
    control: usize,
    actives: [usize; 3],
    beta_tilde: &BetaVector,
    t: f64,
) {
    let [a0, a1, a2] = actives;
    let b = beta_tilde.values();
    for q in actives {
        circuit.push(Gate::H(q));
    }
    circuit.push(Gate::Cnot {
        control: a2,
        target: a1,
    });
    circuit.push(Gate::Cnot {
        control: a1,
        target: a0,
    });
    circuit.push(z_exponential(a0, b[1] * t));
    circuit.push(Gate::Cnot {
        control: a0,
        target: control,
    });
    circuit.push(z_exponential(control, b[0] * t));
    circuit.push(Gate::Cnot {
        control: a0,
        target: control,
    });
    circuit.push(Gate::Cnot {
        control: a1,
        target: a0,
    });
    circuit.push(Gate::Cnot {
        control: a2,
        target: a1,
    });
    for q in actives {
        circuit.push(Gate::H(q));
    }
}

/// Five-qubit plaquette evolution `exp(-i box t)` on registers
/// `(j_l, q_l, j_a, q_r, j_r) = (0..5)`, with independent left and right
/// neighbor controls. `beta` holds the four rotation coefficients.
pub fn build_plaquette_circuit_5q(beta: &BetaVector, t: f64) -> Result<Circuit> {
    if beta.len() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "five-qubit plaquette circuit needs 4 rotation coefficients, got {}",
            beta.len()
        )));
    }
    let b = beta.values();
    let mut c = Circuit::new(5);
    for q in [1, 2, 3] {
        c.push(Gate::H(q));
    }
    // First half: parity of (q_l, j_a, q_r) plus the left neighbor.
    c.push(Gate::Cnot {
        control: 0,
        target: 1,
    });
    c.push(Gate::Cnot {
        control: 1,
        target: 2,
    });
    c.push(Gate::Cnot {
        control: 2,
        target: 3,
    });
    c.push(z_exponential(3, b[0] * t));
    c.push(Gate::Cnot {
        control: 3,
        target: 4,
    });
    c.push(z_exponential(4, b[1] * t));
    c.push(Gate::Cnot {
        control: 3,
        target: 4,
    });
    c.push(Gate::Cnot {
        control: 2,
        target: 3,
    });
    c.push(Gate::Cnot {
        control: 1,
        target: 2,
    });
    c.push(Gate::Cnot {
        control: 0,
        target: 1,
    });
    // Second half: bare parity, right neighbor folded into the last rotation.
    c.push(Gate::Cnot {
        control: 1,
        target: 2,
    });
    c.push(Gate::Cnot {
        control: 2,
        target: 3,
    });
    c.push(z_exponential(3, b[3] * t));
    c.push(Gate::Cnot {
        control: 3,
        target: 4,
    });
    c.push(z_exponential(4, b[2] * t));
    c.push(Gate::Cnot {
        control: 3,
        target: 4,
    });
    c.push(Gate::Cnot {
        control: 2,
        target: 3,
    });
    c.push(Gate::Cnot {
        control: 1,
        target: 2,
    });
    for q in [1, 2, 3] {
        c.push(Gate::H(q));
    }
    Ok(c)
}

/// Four-qubit plaquette evolution for the two-plaquette ring, second
/// plaquette: actives `(q_l, j_a, q_r) = (1, 2, 3)` controlled by
/// `j_l = 0`. `beta_tilde` holds the two reduced rotation coefficients.
pub fn build_plaquette_circuit_2p(beta_tilde: &BetaVector, t: f64) -> Result<Circuit> {
    if beta_tilde.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "four-qubit plaquette circuit needs 2 rotation coefficients, got {}",
            beta_tilde.len()
        )));
    }
    let mut c = Circuit::new(4);
    c.metadata.plaquette = Some(1);
    plaquette_block_4q(&mut c, 0, [1, 2, 3], beta_tilde, t);
    Ok(c)
}

/// Four-qubit plaquette evolution for the first plaquette of the
/// two-plaquette ring: actives `(j_l, q_l, q_r) = (0, 1, 3)` controlled by
/// `j_a = 2`.
pub fn build_plaquette_circuit_2p_first(beta_tilde: &BetaVector, t: f64) -> Result<Circuit> {
    if beta_tilde.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "four-qubit plaquette circuit needs 2 rotation coefficients, got {}",
            beta_tilde.len()
        )));
    }
    let mut c = Circuit::new(4);
    c.metadata.plaquette = Some(0);
    plaquette_block_4q(&mut c, 2, [0, 1, 3], beta_tilde, t);
    Ok(c)
}

/// Diagonal electric evolution `exp(-i H_E t)`: one Z rotation per register,
/// with identified top links weighted twice. The constant diagonal offset
/// goes into the tracked global phase.
pub fn build_electric_circuit(g_squared: f64, t: f64, spec: &LatticeSpec) -> Result<Circuit> {
    if spec.truncation != HalfInt::HALF {
        return Err(Error::UnsupportedTruncation(
            "electric circuits are synthesized at truncation 1/2".into(),
        ));
    }
    let mut c = Circuit::new(spec.total_qubits());
    for r in 0..spec.register_count() {
        let weight = match spec.register_kind(r) {
            RegisterKind::TopLink(_) if spec.identify_top_bottom => 2.0,
            _ => 1.0,
        };
        let coeff = 0.5 * g_squared * 0.75 * weight;
        c.push(Gate::Rz {
            qubit: r,
            angle: -coeff * t,
        });
        c.add_global_phase(-coeff * t / 2.0);
    }
    Ok(c)
}

/// The reduced rotation coefficients for the two-plaquette ring, from the
/// sector values of the plaquette operator.
pub fn beta_tilde_two_plaquette() -> BetaVector {
    let sectors = [
        crate::operators::gvc_sector_coefficient(HalfInt::ZERO, HalfInt::ZERO),
        crate::operators::gvc_sector_coefficient(HalfInt::HALF, HalfInt::HALF),
    ];
    crate::operators::solve_beta(&sectors, &crate::operators::reduced_sector_sign_matrix())
        .expect("reduced sector matrix is invertible")
}

/// The four rotation coefficients for the five-register plaquette circuit.
pub fn beta_five_register() -> BetaVector {
    let z = HalfInt::ZERO;
    let h = HalfInt::HALF;
    let sectors = [
        crate::operators::gvc_sector_coefficient(z, z),
        crate::operators::gvc_sector_coefficient(z, h),
        crate::operators::gvc_sector_coefficient(h, z),
        crate::operators::gvc_sector_coefficient(h, h),
    ];
    crate::operators::solve_beta(&sectors, &crate::operators::sector_sign_matrix())
        .expect("sector matrix is invertible")
}

/// One first-order Trotter step ordered as: every plaquette in turn, then
/// the electric rotations. The plaquette Hamiltonian term is
/// `-(1/g^2) box`, so the plaquette blocks run at effective time `-dt/g^2`.
fn trotter_step(spec: &LatticeSpec, g_squared: f64, dt: f64) -> Result<Circuit> {
    let mut c = Circuit::new(spec.total_qubits());
    let tau = -dt / g_squared;
    if spec.num_plaquettes == 2 {
        let beta_tilde = beta_tilde_two_plaquette();
        c.extend(&build_plaquette_circuit_2p_first(&beta_tilde, tau)?);
        c.extend(&build_plaquette_circuit_2p(&beta_tilde, tau)?);
    } else {
        let beta = beta_five_register();
        for p in 0..spec.num_plaquettes {
            let regs = spec.plaquette_registers(p)?;
            let block = build_plaquette_circuit_5q(&beta, tau)?;
            let map = [
                regs.left_control,
                regs.left_rung,
                regs.top_link,
                regs.right_rung,
                regs.right_control,
            ];
            for gate in block.gates() {
                let remapped = match *gate {
                    Gate::H(q) => Gate::H(map[q]),
                    Gate::X(q) => Gate::X(map[q]),
                    Gate::Rz { qubit, angle } => Gate::Rz {
                        qubit: map[qubit],
                        angle,
                    },
                    Gate::Cnot { control, target } => Gate::Cnot {
                        control: map[control],
                        target: map[target],
                    },
                };
                c.push(remapped);
            }
        }
    }
    c.extend(&build_electric_circuit(g_squared, dt, spec)?);
    Ok(c)
}

/// `n_steps` first-order Trotter steps of total time `t` for the full
/// Hamiltonian on the identified truncation-1/2 lattice.
pub fn build_trotter_circuit(
    spec: &LatticeSpec,
    g_squared: f64,
    t: f64,
    n_steps: usize,
) -> Result<Circuit> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if spec.truncation != HalfInt::HALF || !spec.identify_top_bottom {
        return Err(Error::UnsupportedTruncation(
            "circuits are synthesized on the identified truncation-1/2 layout".into(),
        ));
    }
    if spec.num_plaquettes % 2 != 0 {
        return Err(Error::InvalidLattice(
            "plaquette strings must have an even number of plaquettes".into(),
        ));
    }
    let step = trotter_step(spec, g_squared, t / n_steps as f64)?;
    let mut c = Circuit::new(spec.total_qubits());
    for _ in 0..n_steps {
        c.extend(&step);
    }
    c.metadata.trotter_steps = Some(n_steps);
    Ok(c)
}

/// Noise scaling by identity CNOT pairs. `r = 1` returns the circuit
/// unchanged; `r = 2` inserts, for each mirrored CNOT pair (consecutive
/// occurrences on the same qubit pair), an adjacent CNOT-CNOT identity next
/// to either the first or the second occurrence, chosen by the seeded RNG.
/// The unitary is unchanged; the CNOT count triples on the chosen side.
pub fn insert_cnot_pairs(circuit: &Circuit, r: u32, rng_seed: u64) -> Result<Circuit> {
    match r {
        1 => {
            let mut c = circuit.clone();
            c.metadata.r_scale = 1;
            Ok(c)
        }
        2 => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            // Pair up consecutive occurrences of each (control, target).
            let mut pending: std::collections::HashMap<(usize, usize), usize> =
                std::collections::HashMap::new();
            let mut insertions: Vec<usize> = Vec::new();
            for (i, gate) in circuit.gates.iter().enumerate() {
                if let Gate::Cnot { control, target } = gate {
                    let key = (*control, *target);
                    match pending.remove(&key) {
                        None => {
                            pending.insert(key, i);
                        }
                        Some(first) => {
                            let pick_first = rng.random_bool(0.5);
                            insertions.push(if pick_first { first } else { i });
                        }
                    }
                }
            }
            if !pending.is_empty() {
                return Err(Error::InvalidArgument(
                    "circuit has unpaired CNOTs; noise scaling needs mirrored halves".into(),
                ));
            }
            insertions.sort_unstable();
            let mut gates = Vec::with_capacity(circuit.gates.len() + 2 * insertions.len());
            let mut at = insertions.into_iter().peekable();
            for (i, gate) in circuit.gates.iter().enumerate() {
                gates.push(*gate);
                while at.peek() == Some(&i) {
                    at.next();
                    gates.push(*gate);
                    gates.push(*gate);
                }
            }
            let mut c = Circuit {
                width: circuit.width,
                gates,
                global_phase: circuit.global_phase,
                metadata: circuit.metadata,
            };
            c.metadata.r_scale = 2;
            Ok(c)
        }
        other => Err(Error::UnsupportedNoiseScale(other)),
    }
}

/// Line-oriented text form: `# key value` headers, one gate per line.
/// Angles print with enough digits to round-trip bit-exactly.
pub fn to_text(circuit: &Circuit) -> String {
    let mut out = String::new();
    out.push_str(&format!("# width {}\n", circuit.width));
    out.push_str(&format!("# global_phase {:?}\n", circuit.global_phase));
    out.push_str(&format!("# r_scale {}\n", circuit.metadata.r_scale));
    if let Some(n) = circuit.metadata.trotter_steps {
        out.push_str(&format!("# trotter_steps {n}\n"));
    }
    if let Some(p) = circuit.metadata.plaquette {
        out.push_str(&format!("# plaquette {p}\n"));
    }
    for gate in &circuit.gates {
        match *gate {
            Gate::H(q) => out.push_str(&format!("H {q}\n")),
            Gate::X(q) => out.push_str(&format!("X {q}\n")),
            Gate::Cnot { control, target } => out.push_str(&format!("CNOT {control} {target}\n")),
            Gate::Rz { qubit, angle } => out.push_str(&format!("RZ {qubit} {angle:?}\n")),
        }
    }
    out
}

/// Parse the text form produced by [`to_text`].
pub fn from_text(text: &str) -> Result<Circuit> {
    let mut width: Option<usize> = None;
    let mut global_phase = 0.0;
    let mut metadata = CircuitMetadata {
        r_scale: 1,
        ..CircuitMetadata::default()
    };
    let mut gates = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap();
        if head == "#" {
            let key = tokens.next().ok_or_else(|| bad("missing header key"))?;
            let value = tokens.next().ok_or_else(|| bad("missing header value"))?;
            match key {
                "width" => width = Some(value.parse().map_err(|_| bad("bad width"))?),
                "global_phase" => {
                    global_phase = value.parse().map_err(|_| bad("bad global phase"))?
                }
                "r_scale" => {
                    metadata.r_scale = value.parse().map_err(|_| bad("bad r_scale"))?
                }
                "trotter_steps" => {
                    metadata.trotter_steps =
                        Some(value.parse().map_err(|_| bad("bad trotter_steps"))?)
                }
                "plaquette" => {
                    metadata.plaquette = Some(value.parse().map_err(|_| bad("bad plaquette"))?)
                }
                _ => return Err(bad("unknown header")),
            }
            continue;
        }
        let qubit = |tokens: &mut std::str::SplitWhitespace| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| bad("missing qubit"))?
                .parse()
                .map_err(|_| bad("bad qubit index"))
        };
        let gate = match head {
            "H" => Gate::H(qubit(&mut tokens)?),
            "X" => Gate::X(qubit(&mut tokens)?),
            "CNOT" => Gate::Cnot {
                control: qubit(&mut tokens)?,
                target: qubit(&mut tokens)?,
            },
            "RZ" => Gate::Rz {
                qubit: qubit(&mut tokens)?,
                angle: tokens
                    .next()
                    .ok_or_else(|| bad("missing angle"))?
                    .parse()
                    .map_err(|_| bad("bad angle"))?,
            },
            _ => return Err(bad("unknown gate")),
        };
        gates.push(gate);
    }
    let width = width.ok_or_else(|| Error::Parse("missing `# width` header".into()))?;
    for g in &gates {
        if g.qubits().iter().any(|&q| q >= width) {
            return Err(Error::Parse("gate qubit out of range".into()));
        }
    }
    Ok(Circuit {
        width,
        gates,
        global_phase,
        metadata,
    })
}
