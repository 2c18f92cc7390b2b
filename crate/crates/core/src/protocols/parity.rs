//! Repeat-until-success parity measurement.
//!
//! Measuring after `t1` (where `f−_{12} = 0`) can only find the free qubit
//! on site 1 in the triplet sector; measuring after `t2` (where
//! `f+_{12} = 0`) only in the singlet sector. Finding it on site 2 is
//! inconclusive and the two stages alternate.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{pair_parity_components, PairAmplitudes, Parity, SiteIndex, TwoQubitBlockState};
use crate::error::{Error, Result};
use crate::hamiltonians::conditional_hamiltonians;
use crate::propagator::{find_parity_times, transition_amplitudes, ParityTimes};
use crate::trajectory::{
    measure_position, Generator, LogHeader, MeasurementSpec, Outcome, RngStream, TrajectoryEvent,
    TrajectoryLog, RNG_ALGORITHM,
};

use super::{confined_evolve, ExecutionMode, Guards};

/// Rounds (one `t1` and one `t2` measurement each) before giving up.
pub const DEFAULT_PARITY_CAP: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityResult {
    pub outcome: Parity,
    /// Inconclusive rounds before the conclusive one.
    pub inconclusive_count: usize,
    /// Pair state after the conclusive measurement, normalized.
    pub final_state: PairAmplitudes,
    pub log: TrajectoryLog,
}

fn projectors() -> (Matrix4<Complex64>, Matrix4<Complex64>) {
    let one = Complex64::new(1.0, 0.0);
    let h = Complex64::new(0.5, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let s = Matrix4::new(one, z, z, z, z, h, h, z, z, h, h, z, z, z, z, one);
    (s, Matrix4::identity() - s)
}

/// Single-round Kraus operators on the pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParityKraus {
    /// `f+_{12}(t1) S`.
    pub k_s: Matrix4<Complex64>,
    /// `f−_{12}(t2) f−_{22}(t1) A`.
    pub k_a: Matrix4<Complex64>,
    /// `f+_{22}(t2) f+_{22}(t1) S + f−_{22}(t2) f−_{22}(t1) A`.
    pub k_star: Matrix4<Complex64>,
}

/// Builds the round operators from the spectral amplitudes at `times`.
pub fn parity_kraus(times: ParityTimes) -> Result<ParityKraus> {
    let a1 = transition_amplitudes(2, times.t1, 2)?;
    let a2 = transition_amplitudes(2, times.t2, 2)?;
    let (s, a) = projectors();
    let k1_1 = s * a1[0].f_plus + a * a1[0].f_minus;
    let k2_1 = s * a1[1].f_plus + a * a1[1].f_minus;
    let k1_2 = s * a2[0].f_plus + a * a2[0].f_minus;
    let k2_2 = s * a2[1].f_plus + a * a2[1].f_minus;
    Ok(ParityKraus {
        k_s: k1_1,
        k_a: k1_2 * k2_1,
        k_star: k2_2 * k2_1,
    })
}

/// `max |1 − Σ_{x∈{S,A}, n≤N} K_{x,n}† K_{x,n}|` with `K_{x,n} = K_x K_⋆ⁿ`.
pub fn kraus_completeness_tail(kraus: &ParityKraus, max_rounds: usize) -> f64 {
    let mut sum = Matrix4::<Complex64>::zeros();
    let mut star_pow = Matrix4::<Complex64>::identity();
    for _ in 0..=max_rounds {
        let ks = kraus.k_s * star_pow;
        let ka = kraus.k_a * star_pow;
        sum += ks.adjoint() * ks + ka.adjoint() * ka;
        star_pow = kraus.k_star * star_pow;
    }
    (Matrix4::identity() - sum)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `p(x, n)`: probability of conclusive outcome `x` after exactly `n`
/// inconclusive rounds, for parity weights `(⟨S⟩, ⟨A⟩)`.
pub fn inconclusive_pmf(kraus: &ParityKraus, n: usize, x: Parity, sym: f64, antisym: f64) -> f64 {
    let (s_s, _) = sector_scalars(&kraus.k_s);
    let (_, a_a) = sector_scalars(&kraus.k_a);
    let (star_s, star_a) = sector_scalars(&kraus.k_star);
    match x {
        Parity::Symmetric => s_s.norm_sqr() * star_s.norm_sqr().powi(n as i32) * sym,
        Parity::Antisymmetric => a_a.norm_sqr() * star_a.norm_sqr().powi(n as i32) * antisym,
    }
}

/// `(c_S, c_A)` of an operator of the form `c_S S + c_A A`.
pub fn sector_scalars(m: &Matrix4<Complex64>) -> (Complex64, Complex64) {
    (m[(0, 0)], m[(1, 1)] - m[(1, 2)])
}

/// Runs the protocol on `psi` (fixed qubit first).
pub fn parity_measurement(
    psi: &PairAmplitudes,
    cap: usize,
    mode: ExecutionMode,
    rng: &mut RngStream,
) -> Result<ParityResult> {
    mode.validate()?;
    let total: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (total - 1.0).abs() > crate::chain::NORM_TOL {
        return Err(Error::NotNormalized(total));
    }
    let times = find_parity_times()?;
    let offset = 2usize;
    let block_offset = SiteIndex::new(offset)?;
    let (plus, minus) = conditional_hamiltonians(2)?;
    let free = Generator::Conditional { plus, minus };
    let region = |size: usize| -> Result<Generator> {
        let (plus, minus) = conditional_hamiltonians(size)?;
        Ok(Generator::Conditional { plus, minus })
    };
    let guards = Guards {
        left: false,
        right: true,
    };
    let spec = MeasurementSpec::ideal([block_offset, SiteIndex::new(offset + 1)?]);
    let mut log = TrajectoryLog::new(LogHeader {
        seed: rng.seed(),
        stream: rng.stream(),
        algorithm: RNG_ALGORITHM.to_string(),
        f_meas: match mode {
            ExecutionMode::Physical { f_meas } => Some(f_meas),
            ExecutionMode::Ideal => None,
        },
        schedule_digest: String::new(),
    });
    let mut clock = 0.0;
    let mut state = TwoQubitBlockState::from_pair_at(*psi, 2, block_offset, 2)?;
    for round in 0..cap {
        for (stage, t) in [
            (Parity::Symmetric, times.t1),
            (Parity::Antisymmetric, times.t2),
        ] {
            state = confined_evolve(&state, &free, region, guards, t, mode, rng)?;
            clock += t;
            log.push(TrajectoryEvent::evolve(clock))?;
            let (rec, next) = measure_position(&state, &spec, rng)?;
            state = next;
            log.push(TrajectoryEvent::measure(clock, &spec, rec))?;
            if rec.actual == Outcome::Site(block_offset) {
                let mut out = state.pair_at(1);
                let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                out.iter_mut().for_each(|z| *z /= norm);
                return Ok(ParityResult {
                    outcome: stage,
                    inconclusive_count: round,
                    final_state: out,
                    log,
                });
            }
        }
    }
    Err(Error::IterationCap {
        protocol: "parity measurement",
        cap,
    })
}

/// `(⟨S⟩, ⟨A⟩)` of `psi`; convenience for comparing ensemble frequencies.
pub fn parity_weights(psi: &PairAmplitudes) -> (f64, f64) {
    pair_parity_components(psi)
}
