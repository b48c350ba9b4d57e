//! Circuit synthesis for the plaquette and electric exponentials: gate
//! listings, unitary fidelity against the matrix exponential, text
//! serialization, and CNOT-pair insertion for noise scaling.
//!
//! ```bash
//! cargo run --release -p plaqsim --example circuits
//! ```

use plaqsim::circuit::{
    beta_five_register, beta_tilde_two_plaquette, build_plaquette_circuit_2p,
    build_plaquette_circuit_5q, build_trotter_circuit, insert_cnot_pairs, to_text,
};
use plaqsim::exact::Propagator;
use plaqsim::lattice::LatticeSpec;
use plaqsim::operators::{build_plaquette_operator, gvc_plaquette_operator_5q};

fn unitary_deviation(
    circuit: &plaqsim::circuit::Circuit,
    reference: &nalgebra::DMatrix<num_complex::Complex64>,
) -> f64 {
    (circuit.unitary() - reference)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn main() -> plaqsim::Result<()> {
    let t = 0.37;

    // Five-register plaquette evolution with independent neighbors.
    let beta = beta_five_register();
    let c5 = build_plaquette_circuit_5q(&beta, t)?;
    let prop5 = Propagator::new(&gvc_plaquette_operator_5q())?;
    println!(
        "five-qubit plaquette circuit: {} gates, {} CNOTs, |U - expm| = {:.2e}",
        c5.gates().len(),
        c5.cnot_count(),
        unitary_deviation(&c5, &prop5.evolution_operator(t))
    );

    // Reduced two-plaquette form.
    let spec = LatticeSpec::two_plaquette_half();
    let beta_tilde = beta_tilde_two_plaquette();
    let c4 = build_plaquette_circuit_2p(&beta_tilde, t)?;
    let prop4 = Propagator::new(&build_plaquette_operator(&spec, 1)?)?;
    println!(
        "four-qubit plaquette circuit: {} gates, {} CNOTs, |U - expm| = {:.2e}",
        c4.gates().len(),
        c4.cnot_count(),
        unitary_deviation(&c4, &prop4.evolution_operator(t))
    );
    println!("\nserialized four-qubit circuit:\n{}", to_text(&c4));

    // A full Trotter step and its noise-scaled variant.
    let step = build_trotter_circuit(&spec, 0.2, t, 1)?;
    let scaled = insert_cnot_pairs(&step, 2, 42)?;
    println!(
        "one Trotter step: {} CNOTs; noise scale r = 2: {} CNOTs, unitary unchanged to {:.2e}",
        step.cnot_count(),
        scaled.cnot_count(),
        (step.unitary() - scaled.unitary())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    );
    Ok(())
}
