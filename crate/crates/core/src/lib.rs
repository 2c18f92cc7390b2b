//! Measurement-driven quantum computation on a spin-1 chain: block dynamics,
//! repeat-until-success protocols, and a full-chain reference simulator.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod error;
pub mod fullspace;
pub mod hamiltonians;
pub mod oracle;
pub mod propagator;
pub mod protocols;
pub mod trajectory;

pub use chain::{
    Block, BlockConfig, PairAmplitudes, Parity, PositionWavefunction, QubitState, SiteIndex,
    TwoQubitBlockState,
};
pub use error::{Error, Result};
pub use hamiltonians::{HermitianOperator, ModelParams, Vacuum};
pub use protocols::ExecutionMode;
pub use trajectory::{RngStream, TrajectoryLog};
