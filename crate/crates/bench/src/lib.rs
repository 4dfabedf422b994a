//! Shared fixtures for the criterion benches.

use qgibbs::hamiltonian::{build_ising, eigendecompose, shift_positive, Boundary, ShiftPolicy, DEFAULT_DENSE_LIMIT};
use qgibbs::{EigenSystem, LocalHamiltonian};

/// Shifted periodic transverse-field Ising chain at the critical field.
pub fn critical_chain(n: usize) -> LocalHamiltonian {
    let h = build_ising(n, 1.0, 1.0, Boundary::Periodic, DEFAULT_DENSE_LIMIT).expect("valid chain");
    shift_positive(&h, ShiftPolicy::ExactGround).expect("shiftable")
}

pub fn critical_chain_eigen(n: usize) -> (LocalHamiltonian, EigenSystem) {
    let h = critical_chain(n);
    let eig = eigendecompose(&h).expect("dense");
    (h, eig)
}
