//! Frozen electric-energy curves of the first plaquette on the
//! two-plaquette ring at g^2 = 0.2, starting from the vacuum.
//!
//! The values were produced by the spectral-evolution module once its
//! internal checks (energy conservation, unitarity, physical-subspace
//! preservation, Trotter convergence) all held, then frozen here. The
//! gate-level circuit route must land on the same numbers independently.

use nalgebra::DVector;
use num_complex::Complex64;
use plaqsim::circuit::build_trotter_circuit;
use plaqsim::exact::{evolve_trotter_matrix, expectation_value, Propagator};
use plaqsim::lattice::LatticeSpec;
use plaqsim::operators::{
    build_electric_hamiltonian, build_full_hamiltonian, electric_observable_plaquette1,
    magnetic_hamiltonian_term, OperatorMatrix,
};
use plaqsim::simulator::{diagonal_weights, run_noiseless, StateVector};

const TIME_GRID: [f64; 8] = [0.02, 0.07, 0.12, 0.17, 0.22, 0.27, 0.32, 0.37];

/// Exact time evolution (the thick reference curve).
const EXACT: [f64; 8] = [
    0.004469135937,
    0.050637533038,
    0.125735485756,
    0.193035088479,
    0.220299978195,
    0.195913010323,
    0.134486649782,
    0.069142861561,
];

/// One, two, and three Trotter steps (dashed, dot-dashed, thin lines).
const TROTTER_1: [f64; 8] = [
    0.004469185502,
    0.050702100214,
    0.127154493694,
    0.202438261386,
    0.254002722845,
    0.276802212930,
    0.277144396708,
    0.260147886023,
];
const TROTTER_2: [f64; 8] = [
    0.004470898362,
    0.050903558843,
    0.128035726346,
    0.202094230777,
    0.244066178346,
    0.243214178677,
    0.209770809648,
    0.166509377735,
];
const TROTTER_3: [f64; 8] = [
    0.004470696560,
    0.050865951867,
    0.127599944425,
    0.199860510225,
    0.236850130362,
    0.226345921570,
    0.179219503841,
    0.122194040451,
];

fn setup() -> (LatticeSpec, OperatorMatrix, Vec<OperatorMatrix>, OperatorMatrix) {
    let spec = LatticeSpec::two_plaquette_half();
    let g2 = 0.2;
    let h = build_full_hamiltonian(&spec, g2).unwrap();
    let parts = vec![
        magnetic_hamiltonian_term(&spec, 0, g2).unwrap(),
        magnetic_hamiltonian_term(&spec, 1, g2).unwrap(),
        build_electric_hamiltonian(&spec, g2).unwrap(),
    ];
    let observable = electric_observable_plaquette1(&spec, g2).unwrap();
    (spec, h, parts, observable)
}

fn vacuum() -> DVector<Complex64> {
    let mut v = DVector::from_element(16, Complex64::default());
    v[0] = Complex64::new(1.0, 0.0);
    v
}

#[test]
fn exact_curve_matches_the_frozen_values() {
    let (_, h, _, observable) = setup();
    let propagator = Propagator::new(&h).unwrap();
    for (&t, &want) in TIME_GRID.iter().zip(&EXACT) {
        let state = propagator.evolve(&vacuum(), t);
        let value = expectation_value(&observable, &state);
        assert!((value - want).abs() < 1e-9, "t = {t}: {value} vs {want}");
    }
}

#[test]
fn trotterized_curves_match_the_frozen_values() {
    let (_, _, parts, observable) = setup();
    for (n, golden) in [(1usize, &TROTTER_1), (2, &TROTTER_2), (3, &TROTTER_3)] {
        for (&t, &want) in TIME_GRID.iter().zip(golden) {
            let state = evolve_trotter_matrix(&parts, &vacuum(), t, n).unwrap();
            let value = expectation_value(&observable, &state);
            assert!(
                (value - want).abs() < 1e-9,
                "n = {n}, t = {t}: {value} vs {want}"
            );
        }
    }
}

#[test]
fn circuit_route_reproduces_the_matrix_route() {
    // Gate-level noiseless simulation against the frozen matrix-route
    // values, for every grid point and step count.
    let (spec, _, _, observable) = setup();
    let weights = diagonal_weights(&observable).unwrap();
    for (n, golden) in [(1usize, &TROTTER_1), (2, &TROTTER_2), (3, &TROTTER_3)] {
        for (&t, &want) in TIME_GRID.iter().zip(golden) {
            let circuit = build_trotter_circuit(&spec, 0.2, t, n).unwrap();
            let state = run_noiseless(&circuit, &StateVector::zero_state(4)).unwrap();
            let value: f64 = state
                .probabilities()
                .iter()
                .zip(&weights)
                .map(|(p, w)| p * w)
                .sum();
            assert!(
                (value - want).abs() < 1e-10,
                "n = {n}, t = {t}: {value} vs {want}"
            );
        }
    }
}

#[test]
fn trotter_error_shrinks_with_more_steps() {
    // At the latest grid time the step-count sequence closes in on the
    // exact value monotonically.
    let exact = EXACT[7];
    let errs = [
        (TROTTER_1[7] - exact).abs(),
        (TROTTER_2[7] - exact).abs(),
        (TROTTER_3[7] - exact).abs(),
    ];
    assert!(errs[0] > errs[1] && errs[1] > errs[2]);
}
