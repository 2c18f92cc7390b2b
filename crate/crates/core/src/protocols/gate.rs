//! Repeat-until-success `W(φ) = S + e^{iφ}A` between a fixed qubit and a
//! free qubit on the neighbouring size-2 block.
//!
//! The free qubit starts on in-block site 2 (next-to-nearest neighbour of
//! the fixed qubit). Switch-on: propagate for `t*`, measure, repeat until it
//! is found on site 1. Interacting: pin it on site 1, where only the triplet
//! picks up the `2J` shift. Switch-off: propagate for `t*`, measure, and
//! repeat the interacting correction until it is found on site 2.

use std::f64::consts::TAU;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{PairAmplitudes, SiteIndex, TwoQubitBlockState};
use crate::error::{Error, Result};
use crate::hamiltonians::conditional_hamiltonians;
use crate::propagator::{transition_amplitudes, ROOT_RESIDUAL_TOL};
use crate::trajectory::{
    measure_position, EventKind, Generator, LogHeader, MeasurementSpec, Outcome, RngStream,
    TrajectoryEvent, TrajectoryLog, RNG_ALGORITHM,
};

use super::{confined_evolve, wrap_phase, ExecutionMode, Guards};

/// Attempts allowed in each repeat-until-success loop.
pub const DEFAULT_GATE_CAP: usize = 50;

/// Energy gap between triplet and singlet with the free qubit pinned next
/// to the fixed one, `(Ĝ+)₁₁ − (Ĝ−)₁₁`.
const PINNED_SPLITTING: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub t_star: f64,
    pub cap: usize,
    pub mode: ExecutionMode,
}

impl GateConfig {
    pub fn new(t_star: f64) -> Self {
        Self {
            t_star,
            cap: DEFAULT_GATE_CAP,
            mode: ExecutionMode::Ideal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    /// Pair state after the free qubit is back on site 2, normalized.
    pub final_state: PairAmplitudes,
    /// Every relative phase applied, in order.
    pub applied_phase_history: Vec<f64>,
    pub switch_on_attempts: usize,
    pub switch_off_attempts: usize,
    /// Total position measurements.
    pub iterations: usize,
    /// Phase still owed on exit, wrapped to `(−π, π]`.
    pub residual_phase: f64,
    pub log: TrajectoryLog,
}

/// `W(φ)` in the product basis `↑↑, ↑↓, ↓↑, ↓↓`.
pub fn w_matrix(phi: f64) -> Matrix4<Complex64> {
    let e = Complex64::from_polar(1.0, phi);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let d = (one + e) * 0.5;
    let o = (one - e) * 0.5;
    Matrix4::new(
        one, zero, zero, zero, //
        zero, d, o, zero, //
        zero, o, d, zero, //
        zero, zero, zero, one,
    )
}

/// `W(φ)ψ` by direct matrix application.
pub fn apply_w(phi: f64, pair: &PairAmplitudes) -> PairAmplitudes {
    let v = w_matrix(phi) * nalgebra::Vector4::from_column_slice(pair);
    [v[0], v[1], v[2], v[3]]
}

/// `|⟨a|b⟩|²` for normalized pair states.
pub fn pair_fidelity(a: &PairAmplitudes, b: &PairAmplitudes) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm_sqr()
}

/// Relative phases `φ_{r k}(t)` for `r = 1, 2`, or an error when `t` does
/// not act unitarily on the pair.
fn unitary_phases(t: f64, k: usize) -> Result<[f64; 2]> {
    let amps = transition_amplitudes(2, t, k)?;
    let mut out = [0.0; 2];
    for (r, a) in amps.iter().enumerate() {
        let g = a.g.ok_or(Error::NonUnitaryTime(t))?;
        if (g.norm() - 1.0).abs() > ROOT_RESIDUAL_TOL {
            return Err(Error::NonUnitaryTime(t));
        }
        out[r] = g.arg();
    }
    Ok(out)
}

fn outcome_index(rec: Outcome, offset: usize) -> usize {
    match rec {
        Outcome::Site(s) => s.get() - offset + 1,
        Outcome::Out => unreachable!("both block sites are measured"),
    }
}

/// Runs the gate protocol on `psi` (fixed qubit first).
pub fn two_qubit_gate(
    phi: f64,
    psi: &PairAmplitudes,
    cfg: &GateConfig,
    rng: &mut RngStream,
) -> Result<GateResult> {
    cfg.mode.validate()?;
    if cfg.cap == 0 {
        return Err(Error::InvalidParameter(
            "iteration cap must be positive".into(),
        ));
    }
    let t_star = cfg.t_star;
    let from2 = unitary_phases(t_star, 2)?;
    let from1 = unitary_phases(t_star, 1)?;
    let phi21 = from1[1];

    // fixed qubit on site 1, block on sites 2..3
    let offset = 2usize;
    let block_offset = SiteIndex::new(offset)?;
    let (gp2, gm2) = conditional_hamiltonians(2)?;
    let free = Generator::Conditional {
        plus: gp2,
        minus: gm2,
    };
    let (gp1, gm1) = conditional_hamiltonians(1)?;
    let pinned = Generator::Conditional {
        plus: gp1,
        minus: gm1,
    };
    let region = |size: usize| -> Result<Generator> {
        let (plus, minus) = conditional_hamiltonians(size)?;
        Ok(Generator::Conditional { plus, minus })
    };
    let right_only = Guards {
        left: false,
        right: true,
    };
    let spec = MeasurementSpec::ideal([block_offset, SiteIndex::new(offset + 1)?]);

    let mut log = TrajectoryLog::new(LogHeader {
        seed: rng.seed(),
        stream: rng.stream(),
        algorithm: RNG_ALGORITHM.to_string(),
        f_meas: match cfg.mode {
            ExecutionMode::Physical { f_meas } => Some(f_meas),
            ExecutionMode::Ideal => None,
        },
        schedule_digest: String::new(),
    });
    let mut clock = 0.0;
    let mut theta = phi;
    let mut history = Vec::new();
    let mut state = TwoQubitBlockState::from_pair_at(*psi, 2, block_offset, 2)?;
    log.push(TrajectoryEvent::phase_update(clock, theta))?;

    let mut on_attempts = 0;
    loop {
        if on_attempts == cfg.cap {
            return Err(Error::IterationCap {
                protocol: "gate switch-on",
                cap: cfg.cap,
            });
        }
        on_attempts += 1;
        state = confined_evolve(&state, &free, region, right_only, t_star, cfg.mode, rng)?;
        clock += t_star;
        log.push(TrajectoryEvent::evolve(clock))?;
        let (rec, next) = measure_position(&state, &spec, rng)?;
        state = next;
        let k = outcome_index(rec.actual, offset);
        let applied = from2[k - 1];
        history.push(applied);
        theta -= applied;
        log.push(TrajectoryEvent::measure(clock, &spec, rec).with_phase(theta))?;
        if k == 1 {
            break;
        }
    }

    let mut off_attempts = 0;
    loop {
        if off_attempts == cfg.cap {
            return Err(Error::IterationCap {
                protocol: "gate switch-off",
                cap: cfg.cap,
            });
        }
        off_attempts += 1;
        let owed = (theta - phi21).rem_euclid(TAU);
        let t_int = owed / PINNED_SPLITTING;
        let pinned_state = state.reframed(block_offset, 1);
        let pinned_state = confined_evolve(
            &pinned_state,
            &pinned,
            region,
            right_only,
            t_int,
            cfg.mode,
            rng,
        )?;
        state = pinned_state.reframed(block_offset, 2);
        clock += t_int;
        history.push(owed);
        theta -= owed;
        log.push(TrajectoryEvent::phase_update(clock, theta))?;

        state = confined_evolve(&state, &free, region, right_only, t_star, cfg.mode, rng)?;
        clock += t_star;
        log.push(TrajectoryEvent::evolve(clock))?;
        let (rec, next) = measure_position(&state, &spec, rng)?;
        state = next;
        let k = outcome_index(rec.actual, offset);
        let applied = from1[k - 1];
        history.push(applied);
        theta -= applied;
        debug_assert!(wrap_phase(theta - (phi21 - applied)).abs() < 1e-9);
        log.push(TrajectoryEvent::measure(clock, &spec, rec).with_phase(theta))?;
        if k == 2 {
            break;
        }
    }

    let mut out = state.pair_at(2);
    let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    out.iter_mut().for_each(|z| *z /= norm);
    debug_assert!(log.events().iter().any(|e| e.kind == EventKind::Measure));
    Ok(GateResult {
        final_state: out,
        applied_phase_history: history,
        switch_on_attempts: on_attempts,
        switch_off_attempts: off_attempts,
        iterations: on_attempts + off_attempts,
        residual_phase: wrap_phase(theta),
        log,
    })
}
