//! Stroboscopic measurement on the full chain compared with the projected
//! (Zeno-limit) dynamics.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{embed_pair, embed_qubit, extract_pair, subspace, trace_distance, FullChainState};
use crate::chain::{
    PairAmplitudes, PositionWavefunction, QubitState, SiteIndex, TwoQubitBlockState,
};
use crate::error::{Error, Result};
use crate::fullspace::{self, VAC};
use crate::hamiltonians::{
    conditional_hamiltonians, psi_plus_vector, uls_full_hamiltonian, HermitianOperator, ModelParams,
};
use crate::propagator::Propagator;
use crate::trajectory::{Generator, WalkerState};

/// Post-selected stroboscopic evolution: `steps` rounds of `U(τ)` followed
/// by projection onto the basis states in `indices` and renormalization.
/// Returns the final state and the probability discarded at each round.
fn strobe(
    h: &HermitianOperator,
    initial: &FullChainState,
    indices: &[usize],
    tau: f64,
    steps: usize,
) -> Result<(FullChainState, Vec<f64>)> {
    let u = Propagator::global().unitary(h, tau);
    let d = indices.len();
    let m = u.select_rows(indices).select_columns(indices);
    let mut v = DVector::from_iterator(d, indices.iter().map(|&i| initial.amplitudes()[i]));
    let kept: f64 = v.norm_squared();
    if (kept - 1.0).abs() > crate::chain::NORM_TOL {
        return Err(Error::NotNormalized(kept));
    }
    let mut discarded = Vec::with_capacity(steps);
    for _ in 0..steps {
        v = &m * &v;
        let p = v.norm_squared();
        if !(p > 0.0) {
            return Err(Error::NotNormalized(p));
        }
        discarded.push(1.0 - p);
        v /= Complex64::new(p.sqrt(), 0.0);
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); initial.amplitudes().len()];
    for (&i, z) in indices.iter().zip(v.iter()) {
        amps[i] = *z;
    }
    Ok((FullChainState::from_raw(initial.n(), amps), discarded))
}

fn step_count(duration: f64, f: f64) -> Result<usize> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "measurement frequency must be positive, got {f}"
        )));
    }
    if !(duration > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    Ok(((duration * f).round() as usize).max(1))
}

/// Chain with a set of sites continuously measured empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZenoScenario {
    pub params: ModelParams,
    pub initial: FullChainState,
    /// Sites held in the vacuum.
    pub measured: Vec<usize>,
    pub duration: f64,
    /// Region A is sites `1..=region`; errors are measured on its state.
    pub region: usize,
}

impl ZenoScenario {
    /// `n = 6`, site 3 measured: a qubit on site 2 next to the measured
    /// site and a second one on site 4 across it.
    pub fn block_split() -> Result<Self> {
        let n = 6;
        let mut amps = vec![Complex64::new(0.0, 0.0); fullspace::dim(n)];
        let spin = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        for (lvl, a) in spin.iter().enumerate() {
            amps[fullspace::index_of(&[VAC, lvl, VAC, 0, VAC, VAC])] = *a;
        }
        Ok(Self {
            params: ModelParams::uls(),
            initial: FullChainState::new(n, amps)?,
            measured: vec![3],
            duration: 1.0,
            region: 2,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZenoRun {
    pub f: f64,
    pub steps: usize,
    /// Trace distance between the region-A states of the stroboscopic and
    /// projected evolutions.
    pub error: f64,
    /// Probability discarded by post-selection at each step.
    pub discarded: Vec<f64>,
    /// Product of kept probabilities.
    pub survival: f64,
}

/// Runs `scenario` with measurements at frequency `f`.
pub fn zeno_convergence(scenario: &ZenoScenario, f: f64) -> Result<ZenoRun> {
    let n = scenario.initial.n();
    let steps = step_count(scenario.duration, f)?;
    let h = uls_full_hamiltonian(n, &scenario.params)?;
    let measured = &scenario.measured;
    let keep = |i: usize| measured.iter().all(|&s| fullspace::level(i, n, s) == VAC);
    let indices = subspace(n, keep);
    let (strobed, discarded) = strobe(
        &h,
        &scenario.initial,
        &indices,
        scenario.duration / steps as f64,
        steps,
    )?;
    let effective = scenario
        .initial
        .evolve(&h.projected(keep), scenario.duration)?;
    let error = trace_distance(
        &strobed.reduced_prefix(scenario.region),
        &effective.reduced_prefix(scenario.region),
    );
    let survival = discarded.iter().map(|p| 1.0 - p).product();
    Ok(ZenoRun {
        f,
        steps,
        error,
        discarded,
        survival,
    })
}

/// Probability that a qubit starting on `start` is ever found on the
/// measured `boundary` during `steps` measurements at frequency `f`.
pub fn boundary_leak_probability(
    n: usize,
    boundary: usize,
    start: usize,
    f: f64,
    steps: usize,
) -> Result<f64> {
    SiteIndex::within(boundary, n)?;
    let origin = SiteIndex::within(start, n)?;
    if start == boundary {
        return Err(Error::InvalidParameter(
            "walker starts on the measured site".into(),
        ));
    }
    let psi = PositionWavefunction::localized(1, origin, 1)?;
    let initial = embed_qubit(&psi, QubitState::up(), n)?;
    let h = uls_full_hamiltonian(n, &ModelParams::uls())?;
    let indices = subspace(n, |i| fullspace::level(i, n, boundary) == VAC);
    let (_, discarded) = strobe(
        &h,
        &initial,
        &indices,
        1.0 / step_count(1.0, f)? as f64,
        steps,
    )?;
    Ok(1.0 - discarded.iter().map(|p| 1.0 - p).product::<f64>())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitEffectiveReport {
    pub f: f64,
    pub steps: usize,
    /// `1 − |⟨effective|full⟩|²`.
    pub infidelity: f64,
    /// `|⟨S⟩(t) − ⟨S⟩(0)|` of the post-selected full-chain state; nonzero
    /// at finite `f` because the two sectors leak at different rates.
    pub parity_drift: f64,
    pub survival: f64,
}

/// Fixed qubit on site 1 (measured occupied), free qubit on site 3 of a
/// four-site chain whose site 4 is measured empty. Compares the full chain
/// with `S⊗Ĝ+ + A⊗Ĝ−` on the block of sites 2..3.
pub fn verify_two_qubit_effective(
    pair: &PairAmplitudes,
    t: f64,
    f: f64,
) -> Result<TwoQubitEffectiveReport> {
    let n = 4;
    let fixed = SiteIndex::new(1)?;
    let offset = SiteIndex::new(2)?;
    let steps = step_count(t, f)?;
    let start = TwoQubitBlockState::from_pair_at(*pair, 2, offset, 2)?;
    let initial = embed_pair(&start, fixed, n)?;

    let h = uls_full_hamiltonian(n, &ModelParams::uls())?;
    let indices = subspace(n, |i| {
        fullspace::level(i, n, 1) != VAC && fullspace::level(i, n, 4) == VAC
    });
    let (full, discarded) = strobe(&h, &initial, &indices, t / steps as f64, steps)?;

    let (plus, minus) = conditional_hamiltonians(2)?;
    let mut effective = start.clone();
    effective.evolve(&Generator::Conditional { plus, minus }, t)?;
    let infidelity = 1.0 - embed_pair(&effective, fixed, n)?.fidelity(&full);

    let (s0, _) = start.parity_components()?;
    let (s1, _) = extract_pair(&full, fixed, offset, 2)?.parity_components()?;
    Ok(TwoQubitEffectiveReport {
        f,
        steps,
        infidelity,
        parity_drift: (s1 - s0).abs(),
        survival: discarded.iter().map(|p| 1.0 - p).product(),
    })
}

/// `|⟨0ψ+0|e^{−itH_P}|0000⟩|²` on four sites with sites 1 and 4 held
/// empty, `H_P` the full Hamiltonian projected on that subspace.
pub fn pair_probability_full_chain(params: &ModelParams, t: f64) -> Result<f64> {
    let n = 4;
    let h = uls_full_hamiltonian(n, params)?;
    let keep = |i: usize| fullspace::level(i, n, 1) == VAC && fullspace::level(i, n, 4) == VAC;
    let evolved = FullChainState::vacuum(n)?.evolve(&h.projected(keep), t)?;
    let plus = psi_plus_vector();
    let overlap: Complex64 = (0..9)
        .map(|j| {
            plus[j].conj() * evolved.amplitudes()[fullspace::index_of(&[VAC, j / 3, j % 3, VAC])]
        })
        .sum();
    Ok(overlap.norm_sqr())
}
