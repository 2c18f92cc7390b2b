//! Entangled-pair creation from an empty size-2 block away from `θ = π/4`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fullspace::VAC;
use crate::hamiltonians::{
    pair_block_hamiltonian, psi_plus_vector, vacuum_pair_vector, ModelParams,
};
use crate::propagator::evolve;
use crate::trajectory::RngStream;

/// `|λ|` below which no pair is ever created.
pub const LAMBDA_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub success: bool,
    /// Evolution time `π/(3|λ|)`.
    pub time: f64,
    /// Probability of finding two particles in the block.
    pub probability: f64,
    /// Post-measurement block state (9 amplitudes, index `3·s₁ + s₂`).
    pub state: Vec<Complex64>,
    /// `|⟨ψ+|state⟩|²`; 0 on failure.
    pub fidelity_psi_plus: f64,
}

fn evolved_vacuum(params: &ModelParams, t: f64) -> Result<Vec<Complex64>> {
    let h = pair_block_hamiltonian(params);
    evolve(&h, t, &vacuum_pair_vector())
}

/// `|⟨ψ+|e^{−itH}|00⟩|²` under the projected block Hamiltonian.
pub fn pair_transition_probability(params: &ModelParams, t: f64) -> Result<f64> {
    let psi = evolved_vacuum(params, t)?;
    let plus = psi_plus_vector();
    Ok(plus
        .iter()
        .zip(&psi)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .norm_sqr())
}

/// The published closed form `(8/9) sin²(3tλ/2)`.
pub fn published_pair_probability(params: &ModelParams, t: f64) -> f64 {
    8.0 / 9.0 * (1.5 * t * params.lambda()).sin().powi(2)
}

fn is_two_particle(index: usize) -> bool {
    index / 3 != VAC && index % 3 != VAC
}

/// Evolves the empty block for `π/(3|λ|)` and measures the particle number.
pub fn create_pair(params: &ModelParams, rng: &mut RngStream) -> Result<PairResult> {
    let lambda = params.lambda();
    if lambda.abs() < LAMBDA_TOL {
        return Err(Error::InvalidParameter(format!(
            "λ = {lambda} creates no pairs"
        )));
    }
    let time = PI / (3.0 * lambda.abs());
    let psi = evolved_vacuum(params, time)?;
    let probability: f64 = psi
        .iter()
        .enumerate()
        .filter(|(i, _)| is_two_particle(*i))
        .map(|(_, z)| z.norm_sqr())
        .sum();
    let success = rng.uniform() < probability;
    let keep = |i: usize| is_two_particle(i) == success;
    let mut state: Vec<Complex64> = psi
        .iter()
        .enumerate()
        .map(|(i, z)| {
            if keep(i) {
                *z
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    state.iter_mut().for_each(|z| *z /= norm);
    let fidelity_psi_plus = if success {
        psi_plus_vector()
            .iter()
            .zip(&state)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    } else {
        0.0
    };
    Ok(PairResult {
        success,
        time,
        probability,
        state,
        fidelity_psi_plus,
    })
}
