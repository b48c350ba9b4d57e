//! Electric-energy evolution curves of the first plaquette on the
//! two-plaquette ring: exact evolution against one, two, and three Trotter
//! steps, and the same values from gate-level circuit simulation.
//!
//! ```bash
//! cargo run --release -p plaqsim --example evolution_curves
//! ```

use nalgebra::DVector;
use num_complex::Complex64;
use plaqsim::circuit::build_trotter_circuit;
use plaqsim::exact::{evolve_trotter_matrix, expectation_value, Propagator};
use plaqsim::lattice::LatticeSpec;
use plaqsim::operators::{
    build_electric_hamiltonian, build_full_hamiltonian, electric_observable_plaquette1,
    magnetic_hamiltonian_term,
};
use plaqsim::simulator::{run_noiseless, StateVector};

fn main() -> plaqsim::Result<()> {
    let spec = LatticeSpec::two_plaquette_half();
    let g2 = 0.2;
    let h = build_full_hamiltonian(&spec, g2)?;
    let observable = electric_observable_plaquette1(&spec, g2)?;
    let propagator = Propagator::new(&h)?;
    let parts = vec![
        magnetic_hamiltonian_term(&spec, 0, g2)?,
        magnetic_hamiltonian_term(&spec, 1, g2)?,
        build_electric_hamiltonian(&spec, g2)?,
    ];

    let mut vacuum = DVector::from_element(16, Complex64::default());
    vacuum[0] = Complex64::new(1.0, 0.0);

    println!("# first-plaquette electric energy, g^2 = {g2}");
    println!(
        "{:>6} {:>18} {:>18} {:>18} {:>18} {:>14}",
        "t", "exact", "n_trot=1", "n_trot=2", "n_trot=3", "circuit(n=1)"
    );
    for k in 0..=8 {
        let t = 0.02 + 0.05 * k as f64;
        if t > 0.42 {
            break;
        }
        let exact_state = propagator.evolve(&vacuum, t);
        let exact = expectation_value(&observable, &exact_state);
        let mut row = format!("{t:6.2} {exact:18.12}");
        for n in [1usize, 2, 3] {
            let state = evolve_trotter_matrix(&parts, &vacuum, t, n)?;
            row.push_str(&format!(" {:18.12}", expectation_value(&observable, &state)));
        }
        // Same single-step value through the gate-level simulator.
        let circuit = build_trotter_circuit(&spec, g2, t, 1)?;
        let final_state = run_noiseless(&circuit, &StateVector::zero_state(4))?;
        let probs = final_state.probabilities();
        let weights = plaqsim::simulator::diagonal_weights(&observable)?;
        let circuit_value: f64 = probs.iter().zip(&weights).map(|(p, w)| p * w).sum();
        row.push_str(&format!(" {circuit_value:14.12}"));
        println!("{row}");
    }
    Ok(())
}
