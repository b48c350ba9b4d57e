//! Plaquette matrix elements at truncation 1/2: the nonzero transitions
//! between physical five-register configurations, the neighbor-sector
//! coefficients of the gauge-variant completion, and the rotation
//! coefficients they induce. One element is cross-checked against the
//! brute-force link-operator composition.
//!
//! ```bash
//! cargo run --release -p plaqsim --example matrix_elements
//! ```

use plaqsim::angular::{triangle_ok, HalfInt};
use plaqsim::circuit::{beta_five_register, beta_tilde_two_plaquette};
use plaqsim::lattice::{BasisState, LatticeSpec};
use plaqsim::operators::links::compose_plaquette_element;
use plaqsim::operators::{gvc_sector_coefficient, plaquette_matrix_element, PlaquetteTransition};

fn main() -> plaqsim::Result<()> {
    let z = HalfInt::ZERO;
    let h = HalfInt::HALF;

    println!("nonzero plaquette matrix elements <j_l q_l j_a q_r j_r| box |...>:");
    let states: Vec<[HalfInt; 5]> = (0..32u32)
        .map(|idx| {
            let bit = |q: u32| HalfInt::from_twice(((idx >> (4 - q)) & 1) as i32);
            [bit(0), bit(1), bit(2), bit(3), bit(4)]
        })
        .filter(|v| triangle_ok(v[0], v[2], v[1]) && triangle_ok(v[2], v[4], v[3]))
        .collect();
    for f in &states {
        for i in &states {
            if f[0] != i[0] || f[4] != i[4] {
                continue;
            }
            let value = plaquette_matrix_element(&PlaquetteTransition::identified(
                i[0], i[4], i[2], f[2], i[1], f[1], i[3], f[3],
            ));
            if value.abs() > 1e-14 {
                let fmt = |s: &[HalfInt; 5]| {
                    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
                };
                println!("  <{}| box |{}> = {value}", fmt(f), fmt(i));
            }
        }
    }

    println!("\nneighbor-sector coefficients of the completion:");
    for (l, r) in [(z, z), (z, h), (h, z), (h, h)] {
        println!("  (j_l, j_r) = ({l}, {r}) -> {}", gvc_sector_coefficient(l, r));
    }

    println!("\nrotation coefficients:");
    println!("  five-register circuit: {:?}", beta_five_register().values());
    println!("  two-plaquette circuit: {:?}", beta_tilde_two_plaquette().values());

    // Cross-check one element against the explicit link-operator product on
    // the two-plaquette ring.
    let spec = LatticeSpec::two_plaquette_half();
    let vacuum = BasisState::from_device_index(&spec, 0);
    let excited = BasisState::from_device_index(&spec, 0b0111);
    let oracle = compose_plaquette_element(&spec, 1, &vacuum, &excited)?;
    println!("\nlink-composition cross-check: <0000| box_2 |0111> = {oracle}");
    Ok(())
}
