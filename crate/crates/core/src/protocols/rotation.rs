//! Single-qubit rotations of a qubit pinned on one site by a site-local
//! magnetic field.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::chain::SiteIndex;
use crate::error::Result;
use crate::hamiltonians::{gellmann_reduce, magnetic_to_gellmann, Vacuum};
use crate::propagator::Propagator;

/// `exp(−i·duration·H')` where `H'` is the traceless qubit Hamiltonian left
/// by the fields `fields` (one per site) on `site`. The dropped scalar only
/// contributes a global phase.
pub fn single_qubit_rotation(
    fields: &[[f64; 3]],
    site: SiteIndex,
    duration: f64,
    vacuum: Vacuum,
) -> Result<DMatrix<Complex64>> {
    let coeffs = magnetic_to_gellmann(fields, vacuum);
    let reduced = gellmann_reduce(&coeffs, site)?;
    Ok(Propagator::global().unitary(&reduced.hamiltonian, duration))
}
