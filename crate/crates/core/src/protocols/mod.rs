//! Measurement-driven protocols: state transfer, the `W(φ)` gate, the
//! parity measurement, pair creation and single-qubit rotations.
//!
//! Every protocol runs in the ideal Zeno limit by default. In
//! [`ExecutionMode::Physical`] the confining boundary is instead measured
//! stroboscopically, so the qubit can leak out of its block; a leak ends the
//! run with [`crate::Error::Leak`].

pub mod gate;
pub mod pair;
pub mod parity;
pub mod rotation;
pub mod transfer;

use serde::{Deserialize, Serialize};

use crate::chain::SiteIndex;
use crate::error::{Error, Result};
use crate::trajectory::{
    measure_position, Generator, MeasurementSpec, Outcome, RngStream, WalkerState,
};

pub use gate::{apply_w, two_qubit_gate, w_matrix, GateConfig, GateResult, DEFAULT_GATE_CAP};
pub use pair::{create_pair, pair_transition_probability, published_pair_probability, PairResult};
pub use parity::{
    inconclusive_pmf, kraus_completeness_tail, parity_kraus, parity_measurement, ParityKraus,
    ParityResult, DEFAULT_PARITY_CAP,
};
pub use rotation::single_qubit_rotation;
pub use transfer::{
    asymptotic_time_per_site, exact_mean_transfer_time, expected_transfer_time, failure_pmf,
    geometric_time_per_site, optimal_swap_interval, transfer_compress, transfer_imaging,
    transfer_swap_scheme, CompressConfig, CompressRun, TransferResult,
};

/// How "continuous" measurement is realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ExecutionMode {
    /// Exact Zeno limit: effective Hamiltonians and ideal projections.
    #[default]
    Ideal,
    /// Boundary measured every `1/f_meas`.
    Physical { f_meas: f64 },
}

impl ExecutionMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExecutionMode::Ideal => Ok(()),
            ExecutionMode::Physical { f_meas } if f_meas > 0.0 && f_meas.is_finite() => Ok(()),
            ExecutionMode::Physical { f_meas } => Err(Error::InvalidParameter(format!(
                "measurement frequency must be positive, got {f_meas}"
            ))),
        }
    }
}

/// Which neighbours of a block are guarded by stroboscopic measurement in
/// physical mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Guards {
    pub left: bool,
    pub right: bool,
}

/// Evolves `state` (a block of `m` sites) for `duration`.
///
/// Ideal mode applies `block_generator` (size `m`). Physical mode widens the
/// block by the guarded neighbours, applies `region_generator(size)` on the
/// widened region and measures the guards every `1/f_meas`; finding the
/// qubit on a guard is a leak.
pub(crate) fn confined_evolve<S: WalkerState + Reframe>(
    state: &S,
    block_generator: &Generator,
    region_generator: impl FnOnce(usize) -> Result<Generator>,
    guards: Guards,
    duration: f64,
    mode: ExecutionMode,
    rng: &mut RngStream,
) -> Result<S> {
    let mut s = state.clone();
    if duration <= 0.0 {
        return Ok(s);
    }
    match mode {
        ExecutionMode::Ideal => {
            s.evolve(block_generator, duration)?;
            Ok(s)
        }
        ExecutionMode::Physical { f_meas } => {
            let m = s.size();
            let offset = s.block_offset().get();
            let left = guards.left && offset > 1;
            let region_offset = SiteIndex::new(if left { offset - 1 } else { offset })?;
            let region_size = m + usize::from(left) + usize::from(guards.right);
            let mut guard_sites = Vec::new();
            if left {
                guard_sites.push(region_offset);
            }
            if guards.right {
                guard_sites.push(SiteIndex::new(offset + m)?);
            }
            let spec = MeasurementSpec::ideal(guard_sites);
            let region = region_generator(region_size)?;
            let steps = (duration * f_meas).ceil().max(1.0) as usize;
            let dt = duration / steps as f64;
            let mut wide = s.reframed_to(region_offset, region_size);
            for _ in 0..steps {
                wide.evolve(&region, dt)?;
                let (rec, next) = measure_position(&wide, &spec, rng)?;
                if let Outcome::Site(site) = rec.actual {
                    return Err(Error::Leak(site.get()));
                }
                wide = next;
            }
            Ok(wide.reframed_to(state.block_offset(), m))
        }
    }
}

/// States whose position register can be moved to another block frame.
pub(crate) trait Reframe {
    fn reframed_to(&self, offset: SiteIndex, size: usize) -> Self;
}

impl Reframe for crate::chain::PositionWavefunction {
    fn reframed_to(&self, offset: SiteIndex, size: usize) -> Self {
        self.reframed(offset, size)
    }
}

impl Reframe for crate::chain::TwoQubitBlockState {
    fn reframed_to(&self, offset: SiteIndex, size: usize) -> Self {
        self.reframed(offset, size)
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}
