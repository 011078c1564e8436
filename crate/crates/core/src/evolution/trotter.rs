//! Second-order (symmetric) Trotter-Suzuki statevector stepping.
//!
//! Each Pauli-string exponential is applied through the pairing
//! `P |b> = c(b) |b ^ x_mask>`, so one step is a sequence of in-place
//! two-element rotations; no matrices are ever built.

use crate::hamiltonian::{Hamiltonian, PauliTerm};
use crate::states::StateVector;
use num_complex::Complex64;

/// Apply `exp(-i theta P)` in place.
fn apply_pauli_exp(term: &PauliTerm, theta: f64, amps: &mut [Complex64]) {
    let x_mask = term.x_mask();
    let (cos_t, sin_t) = (theta.cos(), theta.sin());
    if x_mask == 0 {
        // diagonal: amp *= exp(-i theta c(b)), c(b) = +-1
        let zy = term.zy_mask();
        let plus = Complex64::new(cos_t, -sin_t);
        let minus = Complex64::new(cos_t, sin_t);
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= if (b & zy).count_ones() & 1 == 0 {
                plus
            } else {
                minus
            };
        }
        return;
    }
    let high = 1usize << (usize::BITS - 1 - x_mask.leading_zeros()) as usize;
    let dim = amps.len();
    let mut idx = 0usize;
    while idx < dim {
        if idx & high == 0 {
            let partner = idx ^ x_mask;
            let (_, phase) = term.apply_basis(idx);
            // P|idx> = phase |partner>, P|partner> = conj(phase) |idx>
            let a = amps[idx];
            let b = amps[partner];
            let i_sin = Complex64::new(0.0, sin_t);
            amps[idx] = a * cos_t - i_sin * phase.conj() * b;
            amps[partner] = b * cos_t - i_sin * phase * a;
        }
        idx += 1;
    }
}

/// One symmetric step of size `dt`: half-steps over the terms in order, then
/// in reverse order.
pub fn trotter_step_2nd_inplace(h: &Hamiltonian, dt: f64, amps: &mut [Complex64]) {
    for term in &h.terms {
        apply_pauli_exp(term, 0.5 * term.coefficient * dt, amps);
    }
    for term in h.terms.iter().rev() {
        apply_pauli_exp(term, 0.5 * term.coefficient * dt, amps);
    }
}

pub fn trotter_step_2nd(h: &Hamiltonian, dt: f64, psi: &StateVector) -> StateVector {
    let mut out = psi.clone();
    trotter_step_2nd_inplace(h, dt, out.amplitudes_mut());
    out
}
