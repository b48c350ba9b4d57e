//! Exact diagonalization of the two-plaquette Hamiltonian: energy density,
//! the physical-sector gap, and the ground-state structure.
//!
//! ```bash
//! cargo run --release -p plaqsim --example spectrum
//! ```

use plaqsim::exact::diagonalize;
use plaqsim::lattice::{physical_indices, BasisState, LatticeSpec};
use plaqsim::operators::build_full_hamiltonian;

fn main() -> plaqsim::Result<()> {
    let spec = LatticeSpec::two_plaquette_half();
    let g2 = 0.2;
    let h = build_full_hamiltonian(&spec, g2)?;
    println!("Hamiltonian on {} qubits at g^2 = {g2}", spec.total_qubits());
    println!("hermitian: {}", h.is_hermitian(1e-12));

    let result = diagonalize(&h)?;
    println!("\nground-state energy:          {:.6}", result.eigenvalues[0]);
    println!("energy density per plaquette: {:.6}", result.energy_density_per_plaquette);
    println!("physical-sector gap:          {:.6}", result.gap);
    println!(
        "physical-sector eigenvalues:  {:?}",
        result
            .physical_eigenvalues
            .iter()
            .map(|e| (e * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );

    println!("\nground-state amplitudes over the physical subspace:");
    let sign = if result.ground_state[0] < 0.0 { -1.0 } else { 1.0 };
    for idx in physical_indices(&spec)? {
        let state = BasisState::from_device_index(&spec, idx);
        let labels: Vec<String> = state.values().iter().map(|v| v.to_string()).collect();
        println!(
            "  |{}>  (j_l q_l j_a q_r = {})  amplitude {:+.4}",
            state.bitstring(&spec),
            labels.join(" "),
            sign * result.ground_state[idx]
        );
    }

    // Strong coupling freezes the gauge field into the vacuum.
    let strong = diagonalize(&build_full_hamiltonian(&spec, 1e6)?)?;
    println!(
        "\nstrong coupling (g^2 = 1e6): density {:.2e}, vacuum overlap {:.6}",
        strong.energy_density_per_plaquette,
        strong.ground_state[0].abs()
    );
    Ok(())
}
