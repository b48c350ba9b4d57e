//! Qubit-mapped simulation of one-dimensional SU(2) lattice gauge theory.
//!
//! A periodic string of plaquettes is encoded on qubit registers carrying
//! the total angular momentum of each link; the alignment quantum numbers
//! are removed analytically by the local gauge symmetry. The crate builds
//! the resulting Hamiltonians exactly from angular-momentum algebra,
//! synthesizes the gate-level time-evolution circuits at link truncation
//! 1/2, simulates them with and without noise, and runs the full
//! error-mitigation pipeline: readout-calibration inversion, zero-noise
//! extrapolation in the CNOT count, and gauge-invariant post-selection.
//!
//! Module map:
//!
//! * [`angular`] — exact Clebsch-Gordan coefficients and Wigner 6-j symbols.
//! * [`lattice`] — register layout, basis enumeration, Gauss-law test.
//! * [`operators`] — plaquette and electric Hamiltonians; the link-operator
//!   composition oracle lives in [`operators::links`].
//! * [`circuit`] — gate IR and circuit synthesis, Trotter composition,
//!   CNOT-pair insertion for noise scaling.
//! * [`simulator`] — statevector and density-operator simulation with
//!   depolarizing and readout noise.
//! * [`mitigation`] — calibration, constrained inversion, extrapolation,
//!   post-selection.
//! * [`exact`] — dense diagonalization and matrix-exponential evolution.
//! * [`config`], [`runner`] — declarative experiment configs and the
//!   end-to-end runners behind the CLI.
//! * [`verify`] — the acceptance checks exposed to the `verify` subcommand.

pub mod angular;
pub mod circuit;
pub mod config;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod mitigation;
pub mod operators;
pub mod runner;
pub mod simulator;
pub mod verify;

pub use error::{Error, Result};
