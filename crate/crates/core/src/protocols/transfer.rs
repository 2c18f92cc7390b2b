//! Single-qubit transfer along the chain: swap concatenation on a size-2
//! block, imaging of a freely spreading walker, and compression by a moving
//! boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{PositionWavefunction, SiteIndex};
use crate::error::{Error, Result};
use crate::hamiltonians::block_walk_hamiltonian;
use crate::propagator::{scan_roots, walk_decomposition, Propagator};
use crate::trajectory::{measure_position, Generator, MeasurementSpec, Outcome, RngStream};

use super::{confined_evolve, ExecutionMode, Guards};

/// Attempts allowed per transferred site before a swap run is abandoned.
const SWAP_ATTEMPT_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    /// Units of `1/J`.
    pub total_time: f64,
    /// Failed swaps (scheme 1) or boundary hits (scheme 3).
    pub failures: u64,
    pub sites_advanced: usize,
    /// Sites per unit time. For compression this is `d⟨L̂⟩/dt`.
    pub mean_speed: f64,
    pub completed: bool,
}

fn check_interval(dt: f64) -> Result<()> {
    if dt > 0.0 && dt < PI {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "swap interval must lie in (0, π), got {dt}"
        )))
    }
}

/// Swap failure probability `p = cos²(Δt)`.
pub fn swap_failure_probability(dt: f64) -> f64 {
    dt.cos().powi(2)
}

/// `Δt (1 + n) / (1 − p)²`, the mean transfer time as published for scheme 1.
///
/// Kept verbatim; see [`exact_mean_transfer_time`] for the mean of the
/// simulated process.
pub fn expected_transfer_time(n: usize, dt: f64) -> Result<f64> {
    check_interval(dt)?;
    if n < 1 {
        return Err(Error::InvalidParameter(
            "transfer distance must be at least 1".into(),
        ));
    }
    let p = swap_failure_probability(dt);
    Ok(dt * (1 + n) as f64 / (1.0 - p).powi(2))
}

/// `n Δt / (1 − p)`: each of the `n` hops takes a geometric number of
/// attempts with success probability `1 − p`.
pub fn exact_mean_transfer_time(n: usize, dt: f64) -> Result<f64> {
    check_interval(dt)?;
    Ok(n as f64 * dt / (1.0 - swap_failure_probability(dt)))
}

/// `Δt csc⁴ Δt`, the published large-`n` time per site.
pub fn asymptotic_time_per_site(dt: f64) -> f64 {
    dt / dt.sin().powi(4)
}

/// `Δt csc² Δt`, the large-`n` time per site of the simulated process.
pub fn geometric_time_per_site(dt: f64) -> f64 {
    dt / dt.sin().powi(2)
}

/// Minimizer of [`asymptotic_time_per_site`], the root of `tan Δt = 4Δt`
/// in `(0, π/2)`.
pub fn optimal_swap_interval() -> f64 {
    let roots = scan_roots(|x| x.sin() - 4.0 * x * x.cos(), 0.5, 1.57, 1e-3);
    roots[0]
}

/// Probability of `q` failures before the `n`-th success with per-attempt
/// failure probability `cos²Δt`: `C(n+q−1, q) p^q (1−p)^n`.
pub fn failure_pmf(q: u64, n: usize, dt: f64) -> f64 {
    let p = swap_failure_probability(dt);
    if n == 0 {
        return if q == 0 { 1.0 } else { 0.0 };
    }
    let mut log_c = 0.0;
    for i in 1..=q {
        log_c += ((n as f64 - 1.0 + i as f64) / i as f64).ln();
    }
    let log_p = if q == 0 { 0.0 } else { q as f64 * p.ln() };
    (log_c + log_p + n as f64 * (1.0 - p).ln()).exp()
}

fn walk(size: usize) -> Result<Generator> {
    Ok(Generator::Single(block_walk_hamiltonian(size)?))
}

/// Scheme 1: the qubit hops through a size-2 block whose position
/// measurement every `dt` either confirms the hop (block shifts by one) or
/// finds the qubit at the start (retry).
pub fn transfer_swap_scheme(
    n: usize,
    dt: f64,
    mode: ExecutionMode,
    rng: &mut RngStream,
) -> Result<TransferResult> {
    check_interval(dt)?;
    mode.validate()?;
    let block = walk(2)?;
    let mut left = 1usize;
    let mut failures = 0u64;
    let mut attempts = 0u64;
    while left <= n {
        let offset = SiteIndex::new(left)?;
        let state = PositionWavefunction::localized(2, offset, 1)?;
        let evolved = confined_evolve(
            &state,
            &block,
            walk,
            Guards {
                left: true,
                right: true,
            },
            dt,
            mode,
            rng,
        )?;
        let spec = MeasurementSpec::ideal([offset, SiteIndex::new(left + 1)?]);
        let (rec, _) = measure_position(&evolved, &spec, rng)?;
        attempts += 1;
        if rec.actual == Outcome::Site(SiteIndex::new(left + 1)?) {
            left += 1;
        } else {
            failures += 1;
        }
        if attempts > SWAP_ATTEMPT_CAP * n as u64 {
            return Err(Error::IterationCap {
                protocol: "swap transfer",
                cap: (SWAP_ATTEMPT_CAP * n as u64) as usize,
            });
        }
    }
    let total_time = attempts as f64 * dt;
    Ok(TransferResult {
        total_time,
        failures,
        sites_advanced: n,
        mean_speed: n as f64 / total_time,
        completed: true,
    })
}

/// Scheme 2: the walker spreads freely in a block of `block_size` sites for
/// `big_dt`, is imaged, and the left boundary is moved next to it. Stops
/// once the qubit is seen at or beyond site `n + 1` or after
/// `max_rounds`.
pub fn transfer_imaging(
    n: usize,
    big_dt: f64,
    block_size: usize,
    max_rounds: usize,
    rng: &mut RngStream,
) -> Result<TransferResult> {
    if !(big_dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "imaging interval must be positive, got {big_dt}"
        )));
    }
    if block_size < 2 {
        return Err(Error::InvalidParameter(
            "imaging block needs at least 2 sites".into(),
        ));
    }
    if (block_size as f64) < 2.0 * big_dt + 10.0 {
        log::warn!(
            "block of {block_size} sites is not much larger than 2ΔT = {}",
            2.0 * big_dt
        );
    }
    let h = block_walk_hamiltonian(block_size)?;
    let sites: Vec<usize> = (1..=block_size).collect();
    let mut position = 1usize;
    let mut rounds = 0usize;
    while position < n + 1 && rounds < max_rounds {
        let offset = SiteIndex::new(position)?;
        let mut psi = vec![Complex64::new(0.0, 0.0); block_size];
        psi[0] = Complex64::new(1.0, 0.0);
        let evolved = Propagator::global().evolve(&h, big_dt, &psi)?;
        let state = PositionWavefunction::new(evolved, offset)?;
        let spec = MeasurementSpec::ideal(
            sites
                .iter()
                .map(|&k| SiteIndex::new(position + k - 1).expect("positive")),
        );
        let (rec, _) = measure_position(&state, &spec, rng)?;
        match rec.actual {
            Outcome::Site(s) => position = s.get(),
            Outcome::Out => unreachable!("every block site is imaged"),
        }
        rounds += 1;
    }
    let total_time = rounds as f64 * big_dt;
    let advanced = position - 1;
    Ok(TransferResult {
        total_time,
        failures: 0,
        sites_advanced: advanced,
        mean_speed: if total_time > 0.0 {
            advanced as f64 / total_time
        } else {
            0.0
        },
        completed: position > n,
    })
}

/// Parameters of the compression scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressConfig {
    /// Chain length; the block's right end stays at site `n`.
    pub n: usize,
    /// Boundary shift rate `f = 1/Δt`; 0 means free propagation.
    pub f: f64,
    /// Pause after the boundary finds the qubit, units of `1/J`.
    pub halt_after_hit: f64,
    /// Total evolution time; the speed is the slope of `⟨L̂⟩` over its
    /// second half.
    pub horizon: f64,
}

impl CompressConfig {
    /// Defaults: halt `4/f`, horizon 40, chain long enough to avoid the
    /// right wall.
    pub fn new(f: f64) -> Self {
        let horizon = 40.0;
        Self {
            n: (2.5 * horizon + 40.0) as usize,
            f,
            halt_after_hit: if f > 0.0 { 4.0 / f } else { 0.0 },
            horizon,
        }
    }
}

/// One compression trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressRun {
    pub result: TransferResult,
    /// `(t, p(t, k))` snapshots, `k` absolute, when requested.
    pub profile: Vec<(f64, Vec<f64>)>,
}

fn mean_position(psi: &[Complex64]) -> f64 {
    psi.iter()
        .enumerate()
        .map(|(i, z)| (i + 1) as f64 * z.norm_sqr())
        .sum()
}

/// Scheme 3: the block initially spans the whole chain with the qubit on
/// site 1. Every `Δt = 1/f` the left boundary tries to advance by measuring
/// its next site. "Out" moves it; "in" localizes the qubit there, keeps the
/// boundary where it was and suspends shifting for `halt_after_hit`.
///
/// `record_every` stores the density profile every that many steps.
pub fn transfer_compress(
    cfg: &CompressConfig,
    record_every: Option<usize>,
    rng: &mut RngStream,
) -> Result<CompressRun> {
    if !(cfg.f >= 0.0) || !cfg.f.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "shift rate must be non-negative, got {}",
            cfg.f
        )));
    }
    if !(cfg.horizon > 0.0) || !(cfg.halt_after_hit >= 0.0) {
        return Err(Error::InvalidParameter(
            "horizon must be positive and halt non-negative".into(),
        ));
    }
    if cfg.n < 2 {
        return Err(Error::InvalidParameter(
            "compression needs at least 2 sites".into(),
        ));
    }
    let n = cfg.n;
    let prop = Propagator::global();
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    psi[0] = Complex64::new(1.0, 0.0);
    let mut profile = Vec::new();

    if cfg.f == 0.0 {
        let h = block_walk_hamiltonian(n)?;
        let half = prop.evolve(&h, cfg.horizon / 2.0, &psi)?;
        let full = prop.evolve(&h, cfg.horizon, &psi)?;
        if let Some(every) = record_every {
            let frames = every.max(1);
            for i in 0..=frames {
                let t = cfg.horizon * i as f64 / frames as f64;
                let p = prop.evolve(&h, t, &psi)?;
                profile.push((t, p.iter().map(|z| z.norm_sqr()).collect()));
            }
        }
        let speed = (mean_position(&full) - mean_position(&half)) / (cfg.horizon / 2.0);
        return Ok(CompressRun {
            result: TransferResult {
                total_time: cfg.horizon,
                failures: 0,
                sites_advanced: 0,
                mean_speed: speed,
                completed: true,
            },
            profile,
        });
    }

    let dt = 1.0 / cfg.f;
    let steps = (cfg.horizon / dt).round().max(2.0) as usize;
    let halt_steps = (cfg.halt_after_hit / dt).round() as usize;
    let mut l = 0usize; // leftmost block site, 0-based
    let mut halt = 0usize;
    let mut hits = 0u64;
    let mut l_half = None;
    for step in 0..steps {
        let evolved = walk_decomposition(n - l)?.evolve(dt, &psi[l..])?;
        psi[l..].copy_from_slice(&evolved);
        if step + 1 == steps / 2 {
            l_half = Some(mean_position(&psi));
        }
        if let Some(every) = record_every {
            if step % every.max(1) == 0 {
                profile.push((
                    (step + 1) as f64 * dt,
                    psi.iter().map(|z| z.norm_sqr()).collect(),
                ));
            }
        }
        if halt > 0 {
            halt -= 1;
            continue;
        }
        if l + 1 >= n {
            continue;
        }
        let p_in = psi[l].norm_sqr();
        if rng.uniform() < p_in {
            psi.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            psi[l] = Complex64::new(1.0, 0.0);
            halt = halt_steps;
            hits += 1;
        } else {
            psi[l] = Complex64::new(0.0, 0.0);
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|z| *z /= norm);
            l += 1;
        }
    }
    let total_time = steps as f64 * dt;
    let l_end = mean_position(&psi);
    let l_mid = l_half.expect("at least two steps");
    let half_time = total_time - (steps / 2) as f64 * dt;
    Ok(CompressRun {
        result: TransferResult {
            total_time,
            failures: hits,
            sites_advanced: l,
            mean_speed: (l_end - l_mid) / half_time,
            completed: true,
        },
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn deterministic_swap_at_quarter_period() {
        let t = expected_transfer_time(10, FRAC_PI_2).unwrap();
        assert!((t - FRAC_PI_2 * 11.0).abs() < 1e-12);
        let mut rng = RngStream::new(0, 0);
        let r = transfer_swap_scheme(20, FRAC_PI_2, ExecutionMode::Ideal, &mut rng).unwrap();
        assert_eq!(r.failures, 0);
        assert!((r.mean_speed - 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn published_mean_for_hundred_sites() {
        let t = expected_transfer_time(100, 1.39).unwrap();
        assert!((t - 149.9).abs() < 0.1, "{t}");
        assert!(expected_transfer_time(5, 0.0).is_err());
        assert!(expected_transfer_time(5, PI).is_err());
    }

    #[test]
    fn optimum_of_csc4() {
        let x = optimal_swap_interval();
        assert!((x - 1.39).abs() < 1e-2);
        let h = 1e-4;
        assert!(asymptotic_time_per_site(x) < asymptotic_time_per_site(x + h));
        assert!(asymptotic_time_per_site(x) < asymptotic_time_per_site(x - h));
    }

    #[test]
    fn failure_pmf_normalizes() {
        let total: f64 = (0..2000).map(|q| failure_pmf(q, 50, 1.39)).sum();
        assert!((total - 1.0).abs() < 1e-10);
        let mean: f64 = (0..2000).map(|q| q as f64 * failure_pmf(q, 50, 1.39)).sum();
        let p = swap_failure_probability(1.39);
        assert!((mean - 50.0 * p / (1.0 - p)).abs() < 1e-8);
    }

    #[test]
    fn compress_free_limit_matches_walk() {
        let cfg = CompressConfig::new(0.0);
        let run = transfer_compress(&cfg, None, &mut RngStream::new(0, 0)).unwrap();
        assert!(
            (run.result.mean_speed - 1.6975).abs() < 2e-3,
            "{}",
            run.result.mean_speed
        );
    }

    #[test]
    fn imaging_freezes_for_tiny_intervals() {
        let mut rng = RngStream::new(5, 0);
        let r = transfer_imaging(50, 1e-3, 20, 2000, &mut rng).unwrap();
        assert!(r.mean_speed < 0.1);
        assert!(!r.completed);
    }
}
