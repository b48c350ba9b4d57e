//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass/fail line. `cargo test --test acceptance -- --nocapture`
//! shows the lines; the `verify` subcommand prints the same ones.

use plaqsim::verify;

fn run(check: verify::CheckResult) {
    println!("{}", check.line());
    assert!(check.passed, "{}", check.line());
}

#[test]
fn criterion_01_matrix_element_table() {
    run(verify::criterion_1_matrix_element_table());
}

#[test]
fn criterion_02_oracle_equivalence() {
    run(verify::criterion_2_oracle_equivalence());
}

#[test]
fn criterion_03_full_hamiltonian() {
    run(verify::criterion_3_full_hamiltonian());
}

#[test]
fn criterion_04_spectrum() {
    run(verify::criterion_4_spectrum());
}

#[test]
fn criterion_05_circuit_fidelity() {
    run(verify::criterion_5_circuit_fidelity());
}

#[test]
fn criterion_06_trotter_convergence() {
    run(verify::criterion_6_trotter_convergence());
}

#[test]
fn criterion_07_gauge_invariance() {
    run(verify::criterion_7_gauge_invariance());
}

#[test]
fn criterion_08_mitigation_efficacy() {
    run(verify::criterion_8_mitigation_efficacy());
}

#[test]
fn criterion_09_decorrelation_floor() {
    run(verify::criterion_9_decorrelation_floor());
}

#[test]
fn criterion_10_determinism() {
    run(verify::criterion_10_determinism());
}
