//! Three-stage error mitigation: constrained readout-calibration inversion,
//! linear zero-noise extrapolation in the CNOT count, and gauge-invariant
//! post-selection with renormalization.
//!
//! Stage order is fixed: calibrate, extrapolate, post-select, renormalize.
//! The survival probability (total weight left in the physical subspace) is
//! the diagnostic of each run; its decorrelated floor is the physical
//! dimension over the embedded dimension.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::simulator::{run_noisy, sample_counts, CountsTable, NoiseModel, StateVector};

/// Column-stochastic readout calibration matrix with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationMatrix {
    matrix: DMatrix<f64>,
    pub shots_per_state: u64,
}

impl CalibrationMatrix {
    pub fn identity(dim: usize) -> Self {
        CalibrationMatrix {
            matrix: DMatrix::identity(dim, dim),
            shots_per_state: 0,
        }
    }

    pub fn from_matrix(matrix: DMatrix<f64>, shots_per_state: u64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(
                "calibration matrix must be square".into(),
            ));
        }
        for c in 0..matrix.ncols() {
            let sum: f64 = matrix.column(c).iter().sum();
            if (sum - 1.0).abs() > 1e-9 || matrix.column(c).iter().any(|&e| e < 0.0) {
                return Err(Error::InvalidNoise(
                    "calibration matrix columns must be stochastic".into(),
                ));
            }
        }
        Ok(CalibrationMatrix {
            matrix,
            shots_per_state,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Empirical calibration: prepare every computational basis state with X
/// gates, measure through the noise model, and record each outcome
/// distribution as a column.
pub fn build_calibration(
    width: usize,
    noise: &NoiseModel,
    shots_per_state: u64,
    rng_seed: u64,
) -> Result<CalibrationMatrix> {
    let dim = 1usize << width;
    let mut matrix = DMatrix::zeros(dim, dim);
    for prepared in 0..dim {
        let mut circuit = Circuit::new(width);
        for q in 0..width {
            if (prepared >> (width - 1 - q)) & 1 == 1 {
                circuit.push(Gate::X(q));
            }
        }
        let counts = run_noisy(
            &circuit,
            &StateVector::zero_state(width),
            noise,
            shots_per_state,
            rng_seed.wrapping_add(prepared as u64),
        )?;
        for (outcome, p) in counts.probabilities().into_iter().enumerate() {
            matrix[(outcome, prepared)] = p;
        }
    }
    CalibrationMatrix::from_matrix(matrix, shots_per_state)
}

const SOLVER_TOL: f64 = 1e-10;

/// Constrained inversion of the calibration map: the probability vector on
/// the simplex minimizing `|C p - observed|_2`, by an active-set method on
/// the equality-constrained normal equations.
pub fn constrained_invert(cal: &CalibrationMatrix, observed: &[f64]) -> Result<Vec<f64>> {
    let n = cal.dim();
    if observed.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "observed vector length {} vs calibration dimension {n}",
            observed.len()
        )));
    }
    let c = cal.matrix();
    let q = DVector::from_column_slice(observed);
    let gram = c.transpose() * c;
    let rhs = c.transpose() * &q;

    // Active set = indices pinned at zero.
    let mut active = vec![false; n];
    let max_iterations = 20 * n + 40;

    for _ in 0..max_iterations {
        // Solve the KKT system on the free set:
        //   2 * gram_SS * p_S + mu * 1 = 2 * rhs_S,  sum(p_S) = 1.
        let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        let k = free.len();
        let mut kkt = DMatrix::zeros(k + 1, k + 1);
        let mut b = DVector::zeros(k + 1);
        for (r, &i) in free.iter().enumerate() {
            for (cidx, &j) in free.iter().enumerate() {
                kkt[(r, cidx)] = 2.0 * gram[(i, j)];
            }
            kkt[(r, k)] = 1.0;
            kkt[(k, r)] = 1.0;
            b[r] = 2.0 * rhs[i];
        }
        b[k] = 1.0;
        let solution = kkt
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::NonConvergence("singular KKT system".into()))?;
        let mut p = DVector::zeros(n);
        for (r, &i) in free.iter().enumerate() {
            p[i] = solution[r];
        }
        let mu = solution[k];

        // Pin the most negative free component, if any.
        let mut worst: Option<(usize, f64)> = None;
        for &i in &free {
            if p[i] < -SOLVER_TOL {
                if worst.map_or(true, |(_, v)| p[i] < v) {
                    worst = Some((i, p[i]));
                }
            }
        }
        if let Some((i, _)) = worst {
            active[i] = true;
            continue;
        }

        // Dual feasibility of the pinned components: release the most
        // negative multiplier.
        let gradient = 2.0 * (&gram * &p - &rhs);
        let mut release: Option<(usize, f64)> = None;
        for i in 0..n {
            if active[i] {
                let g = gradient[i] + mu;
                if g < -SOLVER_TOL && release.map_or(true, |(_, v)| g < v) {
                    release = Some((i, g));
                }
            }
        }
        match release {
            Some((i, _)) => active[i] = false,
            None => {
                // Optimal: clean up round-off and renormalize exactly.
                let mut out: Vec<f64> = p.iter().map(|&x| x.max(0.0)).collect();
                let sum: f64 = out.iter().sum();
                if sum <= 0.0 {
                    return Err(Error::NonConvergence("degenerate solution".into()));
                }
                for x in &mut out {
                    *x /= sum;
                }
                return Ok(out);
            }
        }
    }
    Err(Error::NonConvergence(format!(
        "active-set solver exceeded {max_iterations} iterations"
    )))
}

/// Componentwise linear extrapolation to zero CNOT noise from the scale-1
/// and scale-2 distributions, clipped to the simplex and renormalized.
pub fn zero_noise_extrapolate(p_r1: &[f64], p_r2: &[f64]) -> Result<Vec<f64>> {
    Ok(zero_noise_extrapolate_detailed(p_r1, p_r2)?.0)
}

/// As [`zero_noise_extrapolate`], also returning the probability mass
/// clipped away before renormalization.
pub fn zero_noise_extrapolate_detailed(p_r1: &[f64], p_r2: &[f64]) -> Result<(Vec<f64>, f64)> {
    if p_r1.len() != p_r2.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} components",
            p_r1.len(),
            p_r2.len()
        )));
    }
    let raw: Vec<f64> = p_r1
        .iter()
        .zip(p_r2)
        .map(|(a, b)| 2.0 * a - b)
        .collect();
    let clipped_mass: f64 = raw.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    let mut out: Vec<f64> = raw.into_iter().map(|x| x.max(0.0)).collect();
    let sum: f64 = out.iter().sum();
    if sum <= 0.0 {
        return Err(Error::NonConvergence(
            "extrapolation clipped away all probability".into(),
        ));
    }
    for x in &mut out {
        *x /= sum;
    }
    Ok((out, clipped_mass))
}

/// Restrict to the physical index set and renormalize. Returns the
/// renormalized physical distribution (ordered as `physical`) and the
/// survival probability.
pub fn post_select(p: &[f64], physical: &[usize]) -> Result<(Vec<f64>, f64)> {
    for &i in physical {
        if i >= p.len() {
            return Err(Error::DimensionMismatch(format!(
                "physical index {i} out of range for {} outcomes",
                p.len()
            )));
        }
    }
    let survival: f64 = physical.iter().map(|&i| p[i]).sum();
    if survival <= 0.0 {
        return Err(Error::ZeroSurvival);
    }
    let restricted: Vec<f64> = physical.iter().map(|&i| p[i] / survival).collect();
    Ok((restricted, survival))
}

/// Whether the zero-noise extrapolation acts on the probability components
/// or on the final observable value (alternate mode, for comparison).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationMode {
    #[default]
    Probabilities,
    Observable,
}

/// Per-stage observable values of one mitigated grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageObservables {
    pub raw: Vec<(u32, f64)>,
    pub calibrated: Vec<(u32, f64)>,
    pub extrapolated: f64,
    pub mitigated: f64,
}

/// Bootstrap standard errors per stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct StageUncertainties {
    pub raw: f64,
    pub mitigated: f64,
    pub survival: f64,
    /// Probability mass clipped by the extrapolation (simplex repair).
    pub clipped_mass: f64,
}

/// The full record of one `(t, n_trot)` cell through the pipeline, in stage
/// order: raw, calibrated, extrapolated, post-selected.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigationRecord {
    pub t: f64,
    pub n_trot: usize,
    pub raw: Vec<(u32, Vec<f64>)>,
    pub calibrated: Vec<(u32, Vec<f64>)>,
    pub extrapolated: Vec<f64>,
    pub post_selected: Vec<f64>,
    pub survival: f64,
    pub observables: StageObservables,
    pub uncertainties: StageUncertainties,
}

/// Pipeline controls.
#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub mode: ExtrapolationMode,
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: ExtrapolationMode::Probabilities,
            bootstrap_resamples: 200,
            seed: 0,
        }
    }
}

fn observable_on(probabilities: &[f64], weights: &[f64]) -> f64 {
    probabilities
        .iter()
        .zip(weights)
        .map(|(p, w)| p * w)
        .sum()
}

struct PipelinePass {
    calibrated: Vec<(u32, Vec<f64>)>,
    extrapolated: Vec<f64>,
    post_selected: Vec<f64>,
    survival: f64,
    extrapolated_value: f64,
    mitigated_value: f64,
    clipped_mass: f64,
}

fn pipeline_pass(
    probs_by_r: &[(u32, Vec<f64>)],
    calibration: &CalibrationMatrix,
    physical: &[usize],
    weights: &[f64],
    mode: ExtrapolationMode,
) -> Result<PipelinePass> {
    // Stage 1: calibration inversion.
    let mut calibrated = Vec::with_capacity(probs_by_r.len());
    for (r, probs) in probs_by_r {
        calibrated.push((*r, constrained_invert(calibration, probs)?));
    }

    // Stage 2: zero-noise extrapolation.
    let find = |r: u32| calibrated.iter().find(|(rr, _)| *rr == r).map(|(_, p)| p);
    let (extrapolated, clipped_mass) = match (find(1), find(2)) {
        (Some(p1), Some(p2)) => zero_noise_extrapolate_detailed(p1, p2)?,
        (Some(p1), None) => (p1.clone(), 0.0),
        _ => {
            return Err(Error::InvalidArgument(
                "pipeline needs the unscaled (r = 1) distribution".into(),
            ))
        }
    };

    // Stage 3: post-selection and renormalization.
    let (post_selected, survival) = post_select(&extrapolated, physical)?;
    let physical_weights: Vec<f64> = physical.iter().map(|&i| weights[i]).collect();
    let extrapolated_value = observable_on(&extrapolated, weights);
    let mitigated_value = match mode {
        ExtrapolationMode::Probabilities => observable_on(&post_selected, &physical_weights),
        ExtrapolationMode::Observable => {
            // Alternate mode: post-select each calibrated distribution and
            // extrapolate the observable values instead.
            let value_of = |p: &Vec<f64>| -> Result<f64> {
                let (ps, _) = post_select(p, physical)?;
                Ok(observable_on(&ps, &physical_weights))
            };
            match (find(1), find(2)) {
                (Some(p1), Some(p2)) => 2.0 * value_of(p1)? - value_of(p2)?,
                (Some(p1), None) => value_of(p1)?,
                _ => unreachable!("checked above"),
            }
        }
    };
    Ok(PipelinePass {
        calibrated,
        extrapolated,
        post_selected,
        survival,
        extrapolated_value,
        mitigated_value,
        clipped_mass,
    })
}

/// Run the full pipeline on the measured counts of one grid cell, with
/// bootstrap-resampled uncertainties.
pub fn run_pipeline(
    t: f64,
    n_trot: usize,
    counts_by_r: &[(u32, CountsTable)],
    calibration: &CalibrationMatrix,
    physical: &[usize],
    weights: &[f64],
    cfg: &PipelineConfig,
) -> Result<MitigationRecord> {
    if counts_by_r.is_empty() {
        return Err(Error::InvalidArgument("no counts provided".into()));
    }
    let width = counts_by_r[0].1.width;
    let raw: Vec<(u32, Vec<f64>)> = counts_by_r
        .iter()
        .map(|(r, c)| (*r, c.probabilities()))
        .collect();
    let pass = pipeline_pass(&raw, calibration, physical, weights, cfg.mode)?;

    let raw_observables: Vec<(u32, f64)> = raw
        .iter()
        .map(|(r, p)| (*r, observable_on(p, weights)))
        .collect();
    let calibrated_observables: Vec<(u32, f64)> = pass
        .calibrated
        .iter()
        .map(|(r, p)| (*r, observable_on(p, weights)))
        .collect();

    // Bootstrap: resample every r's counts, rerun all stages.
    let mut raw_samples = Vec::with_capacity(cfg.bootstrap_resamples);
    let mut mitigated_samples = Vec::with_capacity(cfg.bootstrap_resamples);
    let mut survival_samples = Vec::with_capacity(cfg.bootstrap_resamples);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.bootstrap_resamples {
        let resampled: Vec<(u32, Vec<f64>)> = counts_by_r
            .iter()
            .map(|(r, c)| {
                let counts = sample_counts(width, &c.probabilities(), c.shots, &mut rng);
                (*r, counts.probabilities())
            })
            .collect();
        match pipeline_pass(&resampled, calibration, physical, weights, cfg.mode) {
            Ok(p) => {
                raw_samples.push(observable_on(&resampled[0].1, weights));
                mitigated_samples.push(p.mitigated_value);
                survival_samples.push(p.survival);
            }
            Err(Error::ZeroSurvival) => continue,
            Err(e) => return Err(e),
        }
    }

    let uncertainties = StageUncertainties {
        raw: std_dev(&raw_samples),
        mitigated: std_dev(&mitigated_samples),
        survival: std_dev(&survival_samples),
        clipped_mass: pass.clipped_mass,
    };

    Ok(MitigationRecord {
        t,
        n_trot,
        raw,
        calibrated: pass.calibrated,
        extrapolated: pass.extrapolated,
        post_selected: pass.post_selected,
        survival: pass.survival,
        observables: StageObservables {
            raw: raw_observables,
            calibrated: calibrated_observables,
            extrapolated: pass.extrapolated_value,
            mitigated: pass.mitigated_value,
        },
        uncertainties,
    })
}

fn std_dev(samples: &[f64]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
        / (samples.len() - 1) as f64;
    var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::simulator::Readout;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ideal_calibration_is_the_identity() {
        let noise = NoiseModel::ideal(3);
        let cal = build_calibration(3, &noise, 128, 7).unwrap();
        let diff = (cal.matrix() - DMatrix::<f64>::identity(8, 8))
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max);
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn per_qubit_flips_build_a_tensor_product_structure() {
        let p = 0.05;
        let noise = NoiseModel {
            cnot_depolarizing: 0.0,
            readout: Readout::uniform_flip(2, p),
        };
        let shots = 200_000u64;
        let cal = build_calibration(2, &noise, shots, 3).unwrap();
        // Analytic tensor-product confusion.
        let expected = noise.confusion_matrix(2);
        // Five-sigma multinomial tolerance.
        let tol = 5.0 * (0.25 / shots as f64).sqrt();
        for r in 0..4 {
            for c in 0..4 {
                assert_abs_diff_eq!(cal.matrix()[(r, c)], expected[(r, c)], epsilon = tol);
            }
        }
        // Columns stochastic by construction.
        for c in 0..4 {
            assert_abs_diff_eq!(cal.matrix().column(c).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_calibration_returns_the_input() {
        let cal = CalibrationMatrix::identity(8);
        let observed = vec![0.5, 0.25, 0.125, 0.0625, 0.0625, 0.0, 0.0, 0.0];
        let p = constrained_invert(&cal, &observed).unwrap();
        for (a, b) in p.iter().zip(&observed) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn inversion_recovers_forward_synthesized_vectors() {
        let noise = NoiseModel {
            cnot_depolarizing: 0.0,
            readout: Readout::uniform_flip(4, 0.03),
        };
        let cal = CalibrationMatrix::from_matrix(noise.confusion_matrix(4), 0).unwrap();
        let truth: Vec<f64> = (0..16).map(|i| (i + 1) as f64 / 136.0).collect();
        let observed = cal.matrix() * DVector::from_column_slice(&truth);
        let recovered =
            constrained_invert(&cal, observed.as_slice()).unwrap();
        for (a, b) in recovered.iter().zip(&truth) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn inversion_stays_on_the_simplex() {
        // An observed vector outside the image of the simplex: the
        // unconstrained inverse has negative entries.
        let noise = NoiseModel {
            cnot_depolarizing: 0.0,
            readout: Readout::uniform_flip(2, 0.1),
        };
        let cal = CalibrationMatrix::from_matrix(noise.confusion_matrix(2), 0).unwrap();
        let observed = vec![0.97, 0.0, 0.0, 0.03];
        let unconstrained = cal
            .matrix()
            .clone()
            .lu()
            .solve(&DVector::from_column_slice(&observed))
            .unwrap();
        assert!(unconstrained.iter().any(|&x| x < 0.0));
        let p = constrained_invert(&cal, &observed).unwrap();
        assert!(p.iter().all(|&x| x >= 0.0));
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        // Optimality spot-check: no sampled simplex point beats the
        // active-set solution.
        let residual_of = |v: &[f64]| {
            (cal.matrix() * DVector::from_column_slice(v)
                - DVector::from_column_slice(&observed))
            .norm()
        };
        let best = residual_of(&p);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40);
        for _ in 0..2000 {
            let mut candidate: Vec<f64> = (0..4).map(|_| -rng.random::<f64>().ln()).collect();
            let sum: f64 = candidate.iter().sum();
            candidate.iter_mut().for_each(|x| *x /= sum);
            assert!(residual_of(&candidate) + 1e-9 >= best);
        }
    }

    #[test]
    fn inversion_is_idempotent_on_feasible_solutions() {
        let noise = NoiseModel {
            cnot_depolarizing: 0.0,
            readout: Readout::uniform_flip(3, 0.04),
        };
        let cal = CalibrationMatrix::from_matrix(noise.confusion_matrix(3), 0).unwrap();
        let observed = vec![0.4, 0.1, 0.1, 0.05, 0.05, 0.1, 0.1, 0.1];
        let once = constrained_invert(&cal, &observed).unwrap();
        let forward = cal.matrix() * DVector::from_column_slice(&once);
        let twice = constrained_invert(&cal, forward.as_slice()).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn extrapolation_formula_and_edge_cases() {
        let p = vec![0.5, 0.3, 0.2];
        let same = zero_noise_extrapolate(&p, &p).unwrap();
        for (a, b) in same.iter().zip(&p) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        // Componentwise 2*0.5 - 0.4 = 0.6 before renormalization.
        let (out, clipped) =
            zero_noise_extrapolate_detailed(&[0.5, 0.5], &[0.4, 0.6]).unwrap();
        assert_eq!(clipped, 0.0);
        assert_abs_diff_eq!(out[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], 0.4, epsilon = 1e-15);
        assert!(zero_noise_extrapolate(&[0.5], &[0.1, 0.9]).is_err());
    }

    #[test]
    fn extrapolation_clips_and_renormalizes() {
        let (out, clipped) =
            zero_noise_extrapolate_detailed(&[0.1, 0.9], &[0.3, 0.7]).unwrap();
        // Raw components: -0.1 and 1.1; clipped to 0 and 1.1, renormalized.
        assert_abs_diff_eq!(clipped, 0.1, epsilon = 1e-15);
        assert_eq!(out[0], 0.0);
        assert_abs_diff_eq!(out[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn post_selection_basics() {
        let physical = vec![0usize, 7, 10, 13];
        // Fully physical distribution is unchanged.
        let mut p = vec![0.0; 16];
        p[0] = 0.5;
        p[7] = 0.25;
        p[10] = 0.125;
        p[13] = 0.125;
        let (ps, survival) = post_select(&p, &physical).unwrap();
        assert_eq!(survival, 1.0);
        assert_eq!(ps, vec![0.5, 0.25, 0.125, 0.125]);
        // Uniform distribution: survival is exactly the decorrelated floor.
        let uniform = vec![1.0 / 16.0; 16];
        let (_, survival) = post_select(&uniform, &physical).unwrap();
        assert_eq!(survival, 0.25);
        // All mass on an unphysical state: flagged.
        let mut bad = vec![0.0; 16];
        bad[15] = 1.0;
        assert!(matches!(
            post_select(&bad, &physical),
            Err(Error::ZeroSurvival)
        ));
    }

    #[test]
    fn survival_is_monotone_in_the_depolarizing_strength() {
        let spec = LatticeSpec::two_plaquette_half();
        let circuit = crate::circuit::build_trotter_circuit(&spec, 0.2, 0.3, 2).unwrap();
        let physical = crate::lattice::physical_indices(&spec).unwrap();
        let mut previous = f64::INFINITY;
        for eps in [0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2] {
            let noise = NoiseModel {
                cnot_depolarizing: eps,
                readout: Readout::ideal(4),
            };
            let probs = crate::simulator::run_noisy_probabilities(
                &circuit,
                &StateVector::zero_state(4),
                &noise,
            )
            .unwrap();
            let (_, survival) = post_select(&probs, &physical).unwrap();
            assert!(survival <= previous + 1e-12, "eps = {eps}");
            previous = survival;
        }
    }

    #[test]
    fn extrapolation_beats_both_scales_on_nearly_the_whole_grid() {
        // With exact outcome distributions (no sampling), the extrapolated
        // electric energy is closer to the noiseless truth than either
        // noise scale's value at >= 90% of the time grid.
        let spec = LatticeSpec::two_plaquette_half();
        let g2 = 0.2;
        let noise = NoiseModel {
            cnot_depolarizing: 0.01,
            readout: Readout::ideal(4),
        };
        let obs = crate::operators::electric_observable_plaquette1(&spec, g2).unwrap();
        let weights = crate::simulator::diagonal_weights(&obs).unwrap();
        let mut wins = 0usize;
        let mut total = 0usize;
        for k in 0..8 {
            let t = 0.02 + 0.05 * k as f64;
            let circuit = crate::circuit::build_trotter_circuit(&spec, g2, t, 1).unwrap();
            let truth_probs =
                crate::simulator::run_noiseless(&circuit, &StateVector::zero_state(4))
                    .unwrap()
                    .probabilities();
            let value = |p: &[f64]| -> f64 { p.iter().zip(&weights).map(|(a, w)| a * w).sum() };
            let truth = value(&truth_probs);
            let p1 = crate::simulator::run_noisy_probabilities(
                &circuit,
                &StateVector::zero_state(4),
                &noise,
            )
            .unwrap();
            let r2 = crate::circuit::insert_cnot_pairs(&circuit, 2, 77 + k as u64).unwrap();
            let p2 = crate::simulator::run_noisy_probabilities(
                &r2,
                &StateVector::zero_state(4),
                &noise,
            )
            .unwrap();
            let extrapolated = zero_noise_extrapolate(&p1, &p2).unwrap();
            let err0 = (value(&extrapolated) - truth).abs();
            let err1 = (value(&p1) - truth).abs();
            let err2 = (value(&p2) - truth).abs();
            total += 1;
            if err0 < err1 && err0 < err2 {
                wins += 1;
            }
        }
        assert!(
            wins * 10 >= total * 9,
            "extrapolation won at only {wins}/{total} grid points"
        );
    }

    #[test]
    fn pipeline_on_noiseless_counts_reproduces_noiseless_values() {
        let spec = LatticeSpec::two_plaquette_half();
        let g2 = 0.2;
        let t = 0.27;
        let circuit = crate::circuit::build_trotter_circuit(&spec, g2, t, 1).unwrap();
        let state =
            crate::simulator::run_noiseless(&circuit, &StateVector::zero_state(4)).unwrap();
        let truth_probs = state.probabilities();
        let obs = crate::operators::electric_observable_plaquette1(&spec, g2).unwrap();
        let weights = crate::simulator::diagonal_weights(&obs).unwrap();
        let truth = observable_on(&truth_probs, &weights);

        let noise = NoiseModel::ideal(4);
        let shots = 400_000u64;
        let counts = run_noisy(&circuit, &StateVector::zero_state(4), &noise, shots, 21).unwrap();
        let r2_circuit = crate::circuit::insert_cnot_pairs(&circuit, 2, 5).unwrap();
        let counts2 =
            run_noisy(&r2_circuit, &StateVector::zero_state(4), &noise, shots, 22).unwrap();
        let physical = crate::lattice::physical_indices(&spec).unwrap();
        let cal = CalibrationMatrix::identity(16);
        let record = run_pipeline(
            t,
            1,
            &[(1, counts), (2, counts2)],
            &cal,
            &physical,
            &weights,
            &PipelineConfig {
                bootstrap_resamples: 50,
                seed: 17,
                ..PipelineConfig::default()
            },
        )
        .unwrap();
        // Mitigated value agrees with the noiseless truth to a few standard
        // errors; survival is 1 up to sampling.
        let tol = 6.0 * (record.uncertainties.mitigated + 1e-4);
        assert_abs_diff_eq!(record.observables.mitigated, truth, epsilon = tol);
        assert!(record.survival > 0.999);
    }

    #[test]
    fn record_keeps_the_stage_order() {
        // The record fields mirror the pipeline stages; spot-check that the
        // stages differ where they should on a noisy input.
        let spec = LatticeSpec::two_plaquette_half();
        let g2 = 0.2;
        let circuit = crate::circuit::build_trotter_circuit(&spec, g2, 0.22, 1).unwrap();
        let noise = NoiseModel {
            cnot_depolarizing: 0.02,
            readout: Readout::uniform_flip(4, 0.02),
        };
        let counts =
            run_noisy(&circuit, &StateVector::zero_state(4), &noise, 8192, 31).unwrap();
        let r2 = crate::circuit::insert_cnot_pairs(&circuit, 2, 8).unwrap();
        let counts2 = run_noisy(&r2, &StateVector::zero_state(4), &noise, 8192, 32).unwrap();
        let cal = build_calibration(4, &noise, 8192, 33).unwrap();
        let physical = crate::lattice::physical_indices(&spec).unwrap();
        let obs = crate::operators::electric_observable_plaquette1(&spec, g2).unwrap();
        let weights = crate::simulator::diagonal_weights(&obs).unwrap();
        let record = run_pipeline(
            0.22,
            1,
            &[(1, counts), (2, counts2)],
            &cal,
            &physical,
            &weights,
            &PipelineConfig {
                bootstrap_resamples: 50,
                seed: 3,
                ..PipelineConfig::default()
            },
        )
        .unwrap();
        assert_eq!(record.raw.len(), 2);
        assert_eq!(record.calibrated.len(), 2);
        assert_eq!(record.extrapolated.len(), 16);
        assert_eq!(record.post_selected.len(), 4);
        assert!(record.survival > 0.0 && record.survival <= 1.0);
        assert!(record.uncertainties.mitigated > 0.0);
        // Calibrated distributions stay on the simplex.
        for (_, p) in &record.calibrated {
            assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        }
    }
}
