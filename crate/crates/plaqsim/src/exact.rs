//! Dense linear-algebra reference: eigendecomposition, exact and Trotterized
//! matrix-exponential evolution. Everything here goes through spectral
//! reconstruction of real-symmetric matrices, which is exact and stable at
//! desk-scale dimensions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::physical_indices;
use crate::operators::OperatorMatrix;

/// Symmetry tolerance accepted on input matrices.
const SYMMETRY_TOL: f64 = 1e-10;

/// Spectrum and ground-state data of a lattice Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Full-space eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Full-space ground state (real, since H is real symmetric).
    pub ground_state: DVector<f64>,
    /// Ground-state energy divided by the plaquette count.
    pub energy_density_per_plaquette: f64,
    /// First excitation gap within the physical sector.
    pub gap: f64,
    /// Eigenvalues of the physical-sector block, ascending.
    pub physical_eigenvalues: Vec<f64>,
}

fn real_symmetric(op: &OperatorMatrix) -> Result<DMatrix<f64>> {
    if op.max_imag() > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(format!(
            "imaginary parts up to {:.2e}",
            op.max_imag()
        )));
    }
    let m = op.real();
    let asym = (&m - m.transpose())
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(format!("asymmetry {asym:.2e}")));
    }
    Ok(m)
}

fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Diagonalize a real-symmetric Hamiltonian. The gap is computed within the
/// physical sector (the projected block), not over the full completion.
pub fn diagonalize(h: &OperatorMatrix) -> Result<SpectrumResult> {
    let m = real_symmetric(h)?;
    let (values, vectors) = sorted_eigen(&m);
    let ground_state = DVector::from_column_slice(vectors.column(0).as_slice());

    let num_plaquettes = h.spec().map_or(1, |s| s.num_plaquettes);
    let energy_density = values[0] / num_plaquettes as f64;

    let physical_eigenvalues = match h.spec() {
        Some(spec) => {
            let idx = physical_indices(spec)?;
            let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
            sorted_eigen(&block).0
        }
        None => values.clone(),
    };
    let gap = if physical_eigenvalues.len() > 1 {
        physical_eigenvalues[1] - physical_eigenvalues[0]
    } else {
        0.0
    };

    Ok(SpectrumResult {
        eigenvalues: values,
        ground_state,
        energy_density_per_plaquette: energy_density,
        gap,
        physical_eigenvalues,
    })
}

/// Cached spectral decomposition of a Hamiltonian, for repeated evolution.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Propagator {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        let m = real_symmetric(h)?;
        let (eigenvalues, eigenvectors) = sorted_eigen(&m);
        Ok(Propagator {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `exp(-i H t) psi` by spectral reconstruction.
    pub fn evolve(&self, state: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let n = self.dim();
        // Project onto eigenbasis, phase, reconstruct.
        let mut coeffs = vec![Complex64::default(); n];
        for k in 0..n {
            let mut acc = Complex64::default();
            for r in 0..n {
                acc += Complex64::new(self.eigenvectors[(r, k)], 0.0) * state[r];
            }
            coeffs[k] = acc * Complex64::from_polar(1.0, -self.eigenvalues[k] * t);
        }
        DVector::from_fn(n, |r, _| {
            let mut acc = Complex64::default();
            for k in 0..n {
                acc += Complex64::new(self.eigenvectors[(r, k)], 0.0) * coeffs[k];
            }
            acc
        })
    }

    /// `exp(-i H t)` as a dense unitary.
    pub fn evolution_operator(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, Complex64::default());
        for k in 0..n {
            let phase = Complex64::from_polar(1.0, -self.eigenvalues[k] * t);
            for r in 0..n {
                let vr = self.eigenvectors[(r, k)];
                if vr == 0.0 {
                    continue;
                }
                for c in 0..n {
                    m[(r, c)] += phase * vr * self.eigenvectors[(c, k)];
                }
            }
        }
        m
    }

    /// Reconstruction residual `max |H - V diag(w) V^T|`, a self-check.
    pub fn reconstruction_error(&self, h: &OperatorMatrix) -> f64 {
        let n = self.dim();
        let mut max = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.eigenvectors[(r, k)] * self.eigenvalues[k]
                        * self.eigenvectors[(c, k)];
                }
                max = max.max((acc - h.matrix()[(r, c)].re).abs());
            }
        }
        max
    }
}

/// `exp(-i H t) initial` through a fresh eigendecomposition.
pub fn evolve_exact(
    h: &OperatorMatrix,
    initial: &DVector<Complex64>,
    t: f64,
) -> Result<DVector<Complex64>> {
    if initial.len() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state length {} vs operator dimension {}",
            initial.len(),
            h.dim()
        )));
    }
    Ok(Propagator::new(h)?.evolve(initial, t))
}

/// Largest entry of `sum(parts) - total`, for validating a Trotter split.
pub fn parts_sum_mismatch(parts: &[OperatorMatrix], total: &OperatorMatrix) -> f64 {
    let mut acc = total.matrix().clone();
    for p in parts {
        acc -= p.matrix();
    }
    acc.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// First-order Trotter evolution with exact factor exponentials:
/// `[prod_k exp(-i H_k t/n)]^n initial`, factors applied in slice order
/// within each step.
pub fn evolve_trotter_matrix(
    parts: &[OperatorMatrix],
    initial: &DVector<Complex64>,
    t: f64,
    n_steps: usize,
) -> Result<DVector<Complex64>> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    let propagators: Vec<Propagator> = parts
        .iter()
        .map(Propagator::new)
        .collect::<Result<Vec<_>>>()?;
    let dt = t / n_steps as f64;
    let mut state = initial.clone();
    for _ in 0..n_steps {
        for p in &propagators {
            state = p.evolve(&state, dt);
        }
    }
    Ok(state)
}

/// Expectation of a real-symmetric observable in a complex state.
pub fn expectation_value(obs: &OperatorMatrix, state: &DVector<Complex64>) -> f64 {
    let mut acc = Complex64::default();
    for r in 0..obs.dim() {
        let mut row = Complex64::default();
        for c in 0..obs.dim() {
            row += obs.matrix()[(r, c)] * state[c];
        }
        acc += state[r].conj() * row;
    }
    acc.re
}
