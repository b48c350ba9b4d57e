//! End-to-end experiment runners behind the CLI: spectrum study, noiseless
//! and noisy Trotter evolution with the mitigation pipeline, and calibration
//! export. All outputs are plain delimited text plus a JSON manifest;
//! identical config and seed give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{build_trotter_circuit, insert_cnot_pairs};
use crate::config::{derive_seed, ExperimentConfig};
use crate::error::{Error, Result};
use crate::exact::{diagonalize, evolve_trotter_matrix, expectation_value, Propagator};
use crate::lattice::physical_indices;
use crate::mitigation::{build_calibration, post_select, run_pipeline, PipelineConfig};
use crate::operators::{
    build_electric_hamiltonian, build_full_hamiltonian, electric_observable_plaquette1,
    magnetic_hamiltonian_term, OperatorMatrix,
};
use crate::simulator::{
    diagonal_weights, expectation_diagonal, run_noiseless, run_noisy_with_method, StateVector,
};

/// Fixed-width float format used in every data file.
fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(contents.as_bytes())?;
    Ok(path)
}

/// Golden spectrum values for the standard two-plaquette run.
#[derive(Debug, Clone, Serialize)]
pub struct GoldenCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn golden(name: &str, expected: f64, actual: f64, tolerance: f64) -> GoldenCheck {
    GoldenCheck {
        name: name.to_string(),
        expected,
        actual,
        tolerance,
        passed: (expected - actual).abs() <= tolerance,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub g_squared: f64,
    pub energy_density_per_plaquette: f64,
    pub gap: f64,
    pub ground_state_amplitudes: Vec<(usize, f64)>,
    pub golden_checks: Vec<GoldenCheck>,
    pub files: Vec<PathBuf>,
}

/// Exact-diagonalization study: spectrum, ground state, and (for the
/// standard two-plaquette lattice at `g^2 = 0.2`) the golden-value checks.
pub fn run_spectrum(config: &ExperimentConfig, out_dir: &Path) -> Result<SpectrumReport> {
    config.validate()?;
    let spec = &config.lattice;
    let delim = config.outputs.delimiter()?;
    let h = build_full_hamiltonian(spec, config.g_squared)?;
    let result = diagonalize(&h)?;
    let physical = physical_indices(spec)?;

    let amplitudes: Vec<(usize, f64)> = physical
        .iter()
        .map(|&i| (i, result.ground_state[i]))
        .collect();

    let mut golden_checks = Vec::new();
    let is_standard = spec == &crate::lattice::LatticeSpec::two_plaquette_half()
        && (config.g_squared - 0.2).abs() < 1e-12;
    if is_standard {
        let sign = if result.ground_state[0] < 0.0 { -1.0 } else { 1.0 };
        golden_checks.push(golden(
            "energy_density_per_plaquette",
            -3.5658,
            result.energy_density_per_plaquette,
            5e-4,
        ));
        golden_checks.push(golden("gap", 7.4139, result.gap, 5e-4));
        golden_checks.push(golden(
            "ground_state_vacuum",
            0.6943,
            sign * result.ground_state[0],
            1e-3,
        ));
        golden_checks.push(golden(
            "ground_state_winding",
            0.1666,
            sign * result.ground_state[0b1010],
            1e-3,
        ));
        golden_checks.push(golden(
            "ground_state_single_loop",
            0.4951,
            sign * result.ground_state[0b0111],
            1e-3,
        ));
    }

    let mut files = Vec::new();
    let mut text = format!("quantity{delim}value\n");
    text.push_str(&format!(
        "energy_density_per_plaquette{delim}{}\n",
        fmt(result.energy_density_per_plaquette)
    ));
    text.push_str(&format!("gap{delim}{}\n", fmt(result.gap)));
    for (k, e) in result.eigenvalues.iter().enumerate() {
        text.push_str(&format!("eigenvalue_{k}{delim}{}\n", fmt(*e)));
    }
    for (i, a) in &amplitudes {
        text.push_str(&format!("ground_state_amplitude_{i}{delim}{}\n", fmt(*a)));
    }
    files.push(write_file(out_dir, &data_name("spectrum", delim), &text)?);

    if let Some(sweep) = &config.g_squared_sweep {
        let mut text = format!("g_squared{delim}energy_density{delim}gap\n");
        for &g2 in sweep {
            if g2 <= 0.0 {
                return Err(Error::Config("sweep couplings must be positive".into()));
            }
            let h = build_full_hamiltonian(spec, g2)?;
            let r = diagonalize(&h)?;
            text.push_str(&format!(
                "{}{delim}{}{delim}{}\n",
                fmt(g2),
                fmt(r.energy_density_per_plaquette),
                fmt(r.gap)
            ));
        }
        files.push(write_file(out_dir, &data_name("spectrum_sweep", delim), &text)?);
    }

    let report = SpectrumReport {
        g_squared: config.g_squared,
        energy_density_per_plaquette: result.energy_density_per_plaquette,
        gap: result.gap,
        ground_state_amplitudes: amplitudes,
        golden_checks,
        files,
    };
    if config.outputs.manifest {
        write_manifest(config, out_dir, "spectrum", &report.golden_checks, &[])?;
    }
    Ok(report)
}

fn data_name(stem: &str, delim: char) -> String {
    if delim == ',' {
        format!("{stem}.csv")
    } else {
        format!("{stem}.tsv")
    }
}

/// One evolution grid cell, fully processed.
#[derive(Debug, Clone)]
pub struct CellOutput {
    pub t_index: usize,
    pub t: f64,
    pub n_trot: usize,
    pub noiseless_value: f64,
    /// Raw-stage survival and electric energy per noise scale.
    pub raw: Vec<(u32, f64, f64, f64)>,
    pub record: Option<crate::mitigation::MitigationRecord>,
}

#[derive(Debug)]
pub struct EvolutionReport {
    pub cells: Vec<CellOutput>,
    pub failed: Vec<(f64, usize, String)>,
    pub files: Vec<PathBuf>,
}

/// Full evolution study: exact and Trotterized reference curves, noiseless
/// circuit values, noisy sampling per noise scale, and the mitigation
/// pipeline per grid cell. Cell failures are recorded, not fatal.
pub fn run_evolution(config: &ExperimentConfig, out_dir: &Path) -> Result<EvolutionReport> {
    config.validate()?;
    let spec = &config.lattice;
    let delim = config.outputs.delimiter()?;
    let g2 = config.g_squared;
    let width = spec.total_qubits();

    let h = build_full_hamiltonian(spec, g2)?;
    let observable = electric_observable_plaquette1(spec, g2)?;
    let weights = diagonal_weights(&observable)?;
    let physical = physical_indices(spec)?;
    let noise = config.noise.build(width)?;

    let vacuum_amplitudes = {
        let mut v = DVector::from_element(h.dim(), Complex64::default());
        v[0] = Complex64::new(1.0, 0.0);
        v
    };

    // Exact reference curve.
    let propagator = Propagator::new(&h)?;
    let mut exact_text = format!("t{delim}electric_energy\n");
    for &t in &config.time_grid {
        let state = propagator.evolve(&vacuum_amplitudes, t);
        let value = expectation_value(&observable, &state);
        exact_text.push_str(&format!("{}{delim}{}\n", fmt(t), fmt(value)));
    }

    // Trotterized reference curves from exact factor exponentials.
    let parts: Vec<OperatorMatrix> = (0..spec.num_plaquettes)
        .map(|p| magnetic_hamiltonian_term(spec, p, g2))
        .chain([build_electric_hamiltonian(spec, g2)])
        .collect::<Result<Vec<_>>>()?;
    let mismatch = crate::exact::parts_sum_mismatch(&parts, &h);
    if mismatch > 1e-10 {
        eprintln!("warning: Trotter parts deviate from the Hamiltonian by {mismatch:.2e}");
    }
    let mut trotter_text = format!("t{delim}n_trot{delim}electric_energy\n");
    for &n in &config.n_trot_values {
        for &t in &config.time_grid {
            let state = evolve_trotter_matrix(&parts, &vacuum_amplitudes, t, n)?;
            let value = expectation_value(&observable, &state);
            trotter_text.push_str(&format!(
                "{}{delim}{n}{delim}{}\n",
                fmt(t),
                fmt(value)
            ));
        }
    }

    // Calibration matrix shared by the whole run.
    let calibration = build_calibration(
        width,
        &noise,
        config.calibration_shots,
        derive_seed(config.seed, "calibration", &[]),
    )?;

    // Grid cells in parallel; seeds are derived per cell, so the schedule
    // does not affect the data.
    let grid: Vec<(usize, usize)> = (0..config.time_grid.len())
        .flat_map(|ti| config.n_trot_values.iter().map(move |&n| (ti, n)))
        .collect();
    let cell_results: Vec<(usize, usize, Result<CellOutput>)> = grid
        .par_iter()
        .map(|&(ti, n_trot)| {
            let t = config.time_grid[ti];
            let out = run_cell(
                config, spec, g2, t, ti, n_trot, &noise, &calibration, &physical, &weights,
            );
            (ti, n_trot, out)
        })
        .collect();

    let mut cells = Vec::new();
    let mut failed = Vec::new();
    for (ti, n_trot, result) in cell_results {
        match result {
            Ok(cell) => cells.push(cell),
            Err(e) => failed.push((config.time_grid[ti], n_trot, e.to_string())),
        }
    }
    cells.sort_by_key(|c| (c.t_index, c.n_trot));

    // Main evolution table, one row per stage.
    let mut evo = format!(
        "t{delim}n_trot{delim}r{delim}stage{delim}survival{delim}electric_energy{delim}stderr\n"
    );
    for cell in &cells {
        evo.push_str(&format!(
            "{}{delim}{}{delim}0{delim}noiseless{delim}{}{delim}{}{delim}{}\n",
            fmt(cell.t),
            cell.n_trot,
            fmt(1.0),
            fmt(cell.noiseless_value),
            fmt(0.0)
        ));
        for (r, survival, value, stderr) in &cell.raw {
            evo.push_str(&format!(
                "{}{delim}{}{delim}{r}{delim}raw{delim}{}{delim}{}{delim}{}\n",
                fmt(cell.t),
                cell.n_trot,
                fmt(*survival),
                fmt(*value),
                fmt(*stderr)
            ));
        }
        if let Some(record) = &cell.record {
            for ((r, value), (_, probs)) in
                record.observables.calibrated.iter().zip(&record.calibrated)
            {
                let survival = post_select(probs, &physical)
                    .map(|(_, s)| s)
                    .unwrap_or(0.0);
                evo.push_str(&format!(
                    "{}{delim}{}{delim}{r}{delim}calibrated{delim}{}{delim}{}{delim}{}\n",
                    fmt(cell.t),
                    cell.n_trot,
                    fmt(survival),
                    fmt(*value),
                    fmt(0.0)
                ));
            }
            evo.push_str(&format!(
                "{}{delim}{}{delim}0{delim}extrapolated{delim}{}{delim}{}{delim}{}\n",
                fmt(cell.t),
                cell.n_trot,
                fmt(record.survival),
                fmt(record.observables.extrapolated),
                fmt(0.0)
            ));
            evo.push_str(&format!(
                "{}{delim}{}{delim}0{delim}mitigated{delim}{}{delim}{}{delim}{}\n",
                fmt(cell.t),
                cell.n_trot,
                fmt(record.survival),
                fmt(record.observables.mitigated),
                fmt(record.uncertainties.mitigated)
            ));
        }
    }

    // Summary: mitigated vs noiseless.
    let mut summary = format!(
        "t{delim}n_trot{delim}noiseless{delim}raw_r1{delim}mitigated{delim}abs_err_raw{delim}abs_err_mitigated{delim}stderr_mitigated\n"
    );
    for cell in &cells {
        let raw1 = cell
            .raw
            .iter()
            .find(|(r, ..)| *r == 1)
            .map(|(_, _, v, _)| *v)
            .unwrap_or(f64::NAN);
        if let Some(record) = &cell.record {
            summary.push_str(&format!(
                "{}{delim}{}{delim}{}{delim}{}{delim}{}{delim}{}{delim}{}{delim}{}\n",
                fmt(cell.t),
                cell.n_trot,
                fmt(cell.noiseless_value),
                fmt(raw1),
                fmt(record.observables.mitigated),
                fmt((raw1 - cell.noiseless_value).abs()),
                fmt((record.observables.mitigated - cell.noiseless_value).abs()),
                fmt(record.uncertainties.mitigated)
            ));
        }
    }

    let mut files = vec![
        write_file(out_dir, &data_name("exact_curve", delim), &exact_text)?,
        write_file(out_dir, &data_name("trotter_matrix", delim), &trotter_text)?,
        write_file(out_dir, &data_name("evolution", delim), &evo)?,
        write_file(out_dir, &data_name("summary", delim), &summary)?,
    ];
    if config.outputs.manifest {
        files.push(write_manifest(config, out_dir, "evolve", &[], &failed)?);
    }

    Ok(EvolutionReport {
        cells,
        failed,
        files,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    config: &ExperimentConfig,
    spec: &crate::lattice::LatticeSpec,
    g2: f64,
    t: f64,
    t_index: usize,
    n_trot: usize,
    noise: &crate::simulator::NoiseModel,
    calibration: &crate::mitigation::CalibrationMatrix,
    physical: &[usize],
    weights: &[f64],
) -> Result<CellOutput> {
    let width = spec.total_qubits();
    let circuit = build_trotter_circuit(spec, g2, t, n_trot)?;
    let initial = StateVector::zero_state(width);

    let noiseless_probs = run_noiseless(&circuit, &initial)?.probabilities();
    let (noiseless_value, _) = expectation_diagonal(&noiseless_probs, weights, None)?;

    let mut raw = Vec::new();
    let mut counts_by_r = Vec::new();
    for &r in &config.r_values {
        let scaled = insert_cnot_pairs(
            &circuit,
            r,
            derive_seed(config.seed, "cnot-pairs", &[t_index as u64, n_trot as u64, r as u64]),
        )?;
        let counts = run_noisy_with_method(
            &scaled,
            &initial,
            noise,
            config.shots,
            derive_seed(config.seed, "shots", &[t_index as u64, n_trot as u64, r as u64]),
            config.sim_method,
        )?;
        let probs = counts.probabilities();
        let (value, stderr) = expectation_diagonal(&probs, weights, Some(config.shots))?;
        let survival = post_select(&probs, physical)
            .map(|(_, s)| s)
            .unwrap_or(0.0);
        raw.push((r, survival, value, stderr));
        counts_by_r.push((r, counts));
    }

    let record = run_pipeline(
        t,
        n_trot,
        &counts_by_r,
        calibration,
        physical,
        weights,
        &PipelineConfig {
            mode: config.extrapolation_mode,
            bootstrap_resamples: config.bootstrap_resamples,
            seed: derive_seed(config.seed, "bootstrap", &[t_index as u64, n_trot as u64]),
        },
    )?;

    Ok(CellOutput {
        t_index,
        t,
        n_trot,
        noiseless_value,
        raw,
        record: Some(record),
    })
}

/// Build and export the readout calibration matrix for the configured noise.
pub fn run_calibrate(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let delim = config.outputs.delimiter()?;
    let width = config.lattice.total_qubits();
    let noise = config.noise.build(width)?;
    let calibration = build_calibration(
        width,
        &noise,
        config.calibration_shots,
        derive_seed(config.seed, "calibration", &[]),
    )?;
    let m = calibration.matrix();
    let mut text = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt(m[(r, c)])).collect();
        text.push_str(&row.join(&delim.to_string()));
        text.push('\n');
    }
    let mut files = vec![write_file(out_dir, &data_name("calibration", delim), &text)?];
    if config.outputs.manifest {
        files.push(write_manifest(config, out_dir, "calibrate", &[], &[])?);
    }
    Ok(files)
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    crate_version: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    golden_checks: &'a [GoldenCheck],
    failed_cells: Vec<FailedCell<'a>>,
}

#[derive(Serialize)]
struct FailedCell<'a> {
    t: f64,
    n_trot: usize,
    error: &'a str,
}

fn write_manifest(
    config: &ExperimentConfig,
    out_dir: &Path,
    command: &str,
    golden_checks: &[GoldenCheck],
    failed: &[(f64, usize, String)],
) -> Result<PathBuf> {
    let manifest = Manifest {
        command,
        crate_version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        config,
        golden_checks,
        failed_cells: failed
            .iter()
            .map(|(t, n, e)| FailedCell {
                t: *t,
                n_trot: *n,
                error: e,
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest: {e}")))?;
    write_file(out_dir, "manifest.json", &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "plaqsim-runner-{tag}-{}",
            std::process::id()
        ));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    fn small_config() -> ExperimentConfig {
        let mut config = ExperimentConfig::standard();
        config.time_grid = vec![0.12, 0.27];
        config.n_trot_values = vec![1];
        config.shots = 512;
        config.calibration_shots = 512;
        config.bootstrap_resamples = 20;
        config
    }

    #[test]
    fn spectrum_runner_reports_golden_values() {
        let dir = temp_dir("spectrum");
        let mut config = small_config();
        config.g_squared_sweep = Some(vec![0.2, 0.5, 1.0, 5.0, 100.0]);
        let report = run_spectrum(&config, &dir).unwrap();
        assert!(report.golden_checks.iter().all(|c| c.passed));
        // Strong coupling: energy density approaches zero from below.
        let h = build_full_hamiltonian(&config.lattice, 1e6).unwrap();
        let r = diagonalize(&h).unwrap();
        assert!(r.energy_density_per_plaquette.abs() < 1e-5);
        let gs = &r.ground_state;
        assert!(gs[0].abs() > 0.999);
        // Sweep data is monotone in the coupling.
        let sweep = fs::read_to_string(dir.join("spectrum_sweep.csv")).unwrap();
        let densities: Vec<f64> = sweep
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        for pair in densities.windows(2) {
            assert!(pair[0] < pair[1]);
        }
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn evolution_runner_emits_consistent_files() {
        let dir = temp_dir("evolve");
        let config = small_config();
        let report = run_evolution(&config, &dir).unwrap();
        assert!(report.failed.is_empty());
        assert_eq!(report.cells.len(), 2);
        for name in ["exact_curve.csv", "trotter_matrix.csv", "evolution.csv", "summary.csv", "manifest.json"] {
            assert!(dir.join(name).exists(), "{name} missing");
        }
        let evo = fs::read_to_string(dir.join("evolution.csv")).unwrap();
        assert!(evo.lines().any(|l| l.contains("noiseless")));
        assert!(evo.lines().any(|l| l.contains("mitigated")));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn zero_noise_evolution_matches_noiseless_within_sampling() {
        let dir = temp_dir("zero-noise");
        let mut config = small_config();
        config.noise = crate::config::NoiseConfig::ideal();
        config.shots = 60_000;
        let report = run_evolution(&config, &dir).unwrap();
        for cell in &report.cells {
            let record = cell.record.as_ref().unwrap();
            assert!(record.survival > 0.999);
            let tol = 6.0 * (record.uncertainties.mitigated + 1e-3);
            assert!(
                (record.observables.mitigated - cell.noiseless_value).abs() < tol,
                "mitigated {} vs noiseless {}",
                record.observables.mitigated,
                cell.noiseless_value
            );
        }
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn calibrate_runner_writes_a_stochastic_matrix() {
        let dir = temp_dir("calibrate");
        let config = small_config();
        run_calibrate(&config, &dir).unwrap();
        let text = fs::read_to_string(dir.join("calibration.csv")).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 16);
        for c in 0..16 {
            let col_sum: f64 = rows.iter().map(|r| r[c]).sum();
            assert!((col_sum - 1.0).abs() < 1e-9);
        }
        fs::remove_dir_all(&dir).unwrap();
    }
}
