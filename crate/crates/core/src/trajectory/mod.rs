//! Measurement-driven stochastic evolution: Born sampling, collapse,
//! stroboscopic schedules and reproducible random streams.

mod log;

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chain::{norm_sqr, PositionWavefunction, SiteIndex, TwoQubitBlockState};
use crate::error::{Error, Result};
use crate::hamiltonians::HermitianOperator;
use crate::propagator::Propagator;

pub use log::{EventKind, LogHeader, TrajectoryEvent, TrajectoryLog};

/// Sampling weights may drift this far from 1 before being renormalized.
pub const WEIGHT_DRIFT_TOL: f64 = 1e-9;

/// Stroboscopic frequency standing in for continuous measurement.
pub const DEFAULT_F_MEAS: f64 = 50.0;

/// Name of the generator behind [`RngStream`], recorded in log headers.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Seeded random stream; one per trajectory.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Index drawn with probability proportional to `weights`
    /// (inverse CDF). Zero-weight entries are never returned.
    pub fn sample_index(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "no outcome has positive probability");
        if (total - 1.0).abs() > WEIGHT_DRIFT_TOL {
            ::log::debug!("renormalizing outcome weights summing to {total}");
        }
        let u = self.uniform() * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            last = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
        last
    }
}

/// Runs `trials` independent trajectories, trial `i` on stream `i` of
/// `seed`. Output order follows the trial index.
pub fn run_ensemble<T, F>(seed: u64, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream, usize) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i as u64);
            f(&mut rng, i)
        })
        .collect()
}

/// Which sites are projected and how reliable the detector is.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSpec {
    pub sites: BTreeSet<SiteIndex>,
    #[serde(default)]
    pub false_negative_rate: f64,
    #[serde(default = "one")]
    pub concatenation_count: u32,
}

fn one() -> u32 {
    1
}

impl MeasurementSpec {
    pub fn new(
        sites: impl IntoIterator<Item = SiteIndex>,
        false_negative_rate: f64,
        concatenation_count: u32,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&false_negative_rate) {
            return Err(Error::InvalidParameter(format!(
                "false-negative rate {false_negative_rate} outside [0, 1]"
            )));
        }
        if concatenation_count < 1 {
            return Err(Error::InvalidParameter(
                "concatenation count must be at least 1".into(),
            ));
        }
        Ok(Self {
            sites: sites.into_iter().collect(),
            false_negative_rate,
            concatenation_count,
        })
    }

    /// Perfect detector on `sites`.
    pub fn ideal(sites: impl IntoIterator<Item = SiteIndex>) -> Self {
        Self {
            sites: sites.into_iter().collect(),
            false_negative_rate: 0.0,
            concatenation_count: 1,
        }
    }

    /// A repeated measurement misses only if every repetition misses.
    pub fn effective_miss_rate(&self) -> f64 {
        self.false_negative_rate
            .powi(self.concatenation_count as i32)
    }
}

/// Result of projecting "is the qubit on one of these sites".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// Found on this (absolute) site.
    Site(SiteIndex),
    /// None of the measured sites holds the qubit.
    Out,
}

/// What happened and what the detector said.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub actual: Outcome,
    pub reported: Outcome,
}

/// Time-independent generator of a schedule segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Same Hamiltonian in every parity sector.
    Single(HermitianOperator),
    /// `Ĝ+` on the triplet sector, `Ĝ−` on the singlet.
    Conditional {
        plus: HermitianOperator,
        minus: HermitianOperator,
    },
}

impl Generator {
    fn dimension(&self) -> usize {
        match self {
            Generator::Single(h) => h.dimension(),
            Generator::Conditional { plus, .. } => plus.dimension(),
        }
    }
}

/// State of a walker confined to one block.
pub trait WalkerState: Clone {
    fn block_offset(&self) -> SiteIndex;
    fn size(&self) -> usize;
    /// Born weight of each in-block site.
    fn site_weights(&self) -> Vec<f64>;
    /// Zeroes every in-block site rejected by `keep` and renormalizes.
    fn project(&mut self, keep: &dyn Fn(usize) -> bool) -> Result<()>;
    fn evolve(&mut self, generator: &Generator, dt: f64) -> Result<()>;
    fn norm_sqr(&self) -> f64;
}

fn renormalize(vs: &mut [&mut Vec<Complex64>]) -> Result<()> {
    let n2: f64 = vs.iter().map(|v| norm_sqr(v)).sum();
    if !(n2 > 0.0) {
        return Err(Error::NotNormalized(n2));
    }
    let s = 1.0 / n2.sqrt();
    for v in vs.iter_mut() {
        for z in v.iter_mut() {
            *z *= s;
        }
    }
    Ok(())
}

fn zero_rejected(v: &mut [Complex64], keep: &dyn Fn(usize) -> bool) {
    for (i, z) in v.iter_mut().enumerate() {
        if !keep(i + 1) {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}

impl WalkerState for PositionWavefunction {
    fn block_offset(&self) -> SiteIndex {
        PositionWavefunction::block_offset(self)
    }
    fn size(&self) -> usize {
        PositionWavefunction::size(self)
    }
    fn site_weights(&self) -> Vec<f64> {
        self.probabilities()
    }
    fn project(&mut self, keep: &dyn Fn(usize) -> bool) -> Result<()> {
        let mut v = self.amplitudes().to_vec();
        zero_rejected(&mut v, keep);
        renormalize(&mut [&mut v])?;
        *self = PositionWavefunction::from_raw(v, self.block_offset());
        Ok(())
    }
    fn evolve(&mut self, generator: &Generator, dt: f64) -> Result<()> {
        let h = match generator {
            Generator::Single(h) => h,
            Generator::Conditional { .. } => {
                return Err(Error::Schedule(
                    "conditional generator applied to a single walker".into(),
                ))
            }
        };
        let v = Propagator::global().evolve(h, dt, self.amplitudes())?;
        *self = PositionWavefunction::from_raw(v, self.block_offset());
        Ok(())
    }
    fn norm_sqr(&self) -> f64 {
        PositionWavefunction::norm_sqr(self)
    }
}

impl WalkerState for TwoQubitBlockState {
    fn block_offset(&self) -> SiteIndex {
        TwoQubitBlockState::block_offset(self)
    }
    fn size(&self) -> usize {
        TwoQubitBlockState::size(self)
    }
    fn site_weights(&self) -> Vec<f64> {
        self.position_probabilities()
    }
    fn project(&mut self, keep: &dyn Fn(usize) -> bool) -> Result<()> {
        let [mut a, mut b, mut c] = self.sym_amp().clone();
        let mut s = self.antisym_amp().to_vec();
        for v in [&mut a, &mut b, &mut c, &mut s] {
            zero_rejected(v, keep);
        }
        renormalize(&mut [&mut a, &mut b, &mut c, &mut s])?;
        *self = TwoQubitBlockState::from_sectors_raw([a, b, c], s, self.block_offset());
        Ok(())
    }
    fn evolve(&mut self, generator: &Generator, dt: f64) -> Result<()> {
        let p = Propagator::global();
        let (plus, minus) = match generator {
            Generator::Single(h) => (h, h),
            Generator::Conditional { plus, minus } => (plus, minus),
        };
        let sym = self.sym_amp();
        let new_sym = [
            p.evolve(plus, dt, &sym[0])?,
            p.evolve(plus, dt, &sym[1])?,
            p.evolve(plus, dt, &sym[2])?,
        ];
        let new_anti = p.evolve(minus, dt, self.antisym_amp())?;
        *self = TwoQubitBlockState::from_sectors_raw(new_sym, new_anti, self.block_offset());
        Ok(())
    }
    fn norm_sqr(&self) -> f64 {
        TwoQubitBlockState::norm_sqr(self)
    }
}

/// Projective position measurement on the sites of `spec` that lie inside
/// the walker's block. Sites outside the block are certainly empty.
///
/// With probability [`MeasurementSpec::effective_miss_rate`] an occupied
/// site is reported as `Out`; the state still collapses on the actual
/// outcome.
pub fn measure_position<S: WalkerState>(
    state: &S,
    spec: &MeasurementSpec,
    rng: &mut RngStream,
) -> Result<(MeasurementRecord, S)> {
    let offset = state.block_offset().get();
    let size = state.size();
    let inside: Vec<usize> = spec
        .sites
        .iter()
        .map(|s| s.get())
        .filter(|&s| s >= offset && s < offset + size)
        .map(|s| s - offset + 1)
        .collect();
    let weights = state.site_weights();
    let mut outcome_weights: Vec<f64> = inside.iter().map(|&k| weights[k - 1]).collect();
    let total: f64 = weights.iter().sum();
    let found: f64 = outcome_weights.iter().sum();
    outcome_weights.push((total - found).max(0.0));
    let pick = rng.sample_index(&outcome_weights);
    let mut next = state.clone();
    let actual = if pick < inside.len() {
        let k = inside[pick];
        next.project(&|i| i == k)?;
        Outcome::Site(SiteIndex::new(offset + k - 1)?)
    } else {
        next.project(&|i| !inside.contains(&i))?;
        Outcome::Out
    };
    let miss = spec.effective_miss_rate();
    let reported = match actual {
        Outcome::Site(_) if miss > 0.0 && rng.bernoulli(miss) => Outcome::Out,
        other => other,
    };
    Ok((MeasurementRecord { actual, reported }, next))
}

/// Evolve for `dt`, then measure.
pub fn zeno_step<S: WalkerState>(
    state: &S,
    generator: &Generator,
    dt: f64,
    spec: &MeasurementSpec,
    rng: &mut RngStream,
) -> Result<(S, MeasurementRecord)> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {dt}"
        )));
    }
    let mut s = state.clone();
    s.evolve(generator, dt)?;
    let (rec, next) = measure_position(&s, spec, rng)?;
    Ok((next, rec))
}

/// One piece of a piecewise-constant schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub generator: Generator,
    pub duration: f64,
    /// Measured at the end of the segment, or every `measure_every`.
    #[serde(default)]
    pub measurement: Option<MeasurementSpec>,
    #[serde(default)]
    pub measure_every: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub segments: Vec<Segment>,
    /// Standard deviation of Gaussian noise added to each evolution
    /// interval; 0 disables it.
    #[serde(default)]
    pub jitter_sigma: f64,
}

impl Schedule {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self {
            segments,
            jitter_sigma: 0.0,
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("schedule serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Frequency of the first stroboscopic segment, if any.
    pub fn f_meas(&self) -> Option<f64> {
        self.segments.iter().find_map(|s| {
            s.measure_every
                .filter(|_| s.measurement.is_some())
                .map(|dt| 1.0 / dt)
        })
    }

    fn validate(&self, dimension: usize) -> Result<()> {
        if !(self.jitter_sigma >= 0.0) {
            return Err(Error::Schedule("jitter must be non-negative".into()));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.duration > 0.0) || !seg.duration.is_finite() {
                return Err(Error::Schedule(format!(
                    "segment {i}: duration must be positive"
                )));
            }
            if seg.generator.dimension() != dimension {
                return Err(Error::Schedule(format!(
                    "segment {i}: generator dimension {} does not match block size {dimension}",
                    seg.generator.dimension()
                )));
            }
            if let Generator::Conditional { plus, minus } = &seg.generator {
                if plus.dimension() != minus.dimension() {
                    return Err(Error::Schedule(format!(
                        "segment {i}: Ĝ± dimensions differ"
                    )));
                }
            }
            if let Some(dt) = seg.measure_every {
                if !(dt > 0.0) {
                    return Err(Error::Schedule(format!(
                        "segment {i}: measurement period must be positive"
                    )));
                }
                if seg.measurement.is_none() {
                    return Err(Error::Schedule(format!(
                        "segment {i}: period given without sites"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Executes `schedule` from `initial`, logging every evolution and
/// measurement.
pub fn run_schedule<S: WalkerState>(
    schedule: &Schedule,
    initial: S,
    rng: &mut RngStream,
) -> Result<(S, TrajectoryLog)> {
    schedule.validate(initial.size())?;
    let mut log = TrajectoryLog::new(LogHeader {
        seed: rng.seed(),
        stream: rng.stream(),
        algorithm: RNG_ALGORITHM.to_string(),
        f_meas: schedule.f_meas(),
        schedule_digest: schedule.digest(),
    });
    let mut state = initial;
    let mut clock = 0.0;
    for seg in &schedule.segments {
        let steps = match (&seg.measurement, seg.measure_every) {
            (Some(_), Some(dt)) => ((seg.duration / dt).round() as usize).max(1),
            _ => 1,
        };
        let base = seg.duration / steps as f64;
        for _ in 0..steps {
            let dt = if schedule.jitter_sigma > 0.0 {
                (base + schedule.jitter_sigma * rng.standard_normal()).max(0.0)
            } else {
                base
            };
            if dt > 0.0 {
                state.evolve(&seg.generator, dt)?;
            }
            clock += dt;
            log.push(TrajectoryEvent::evolve(clock))?;
            if let Some(spec) = &seg.measurement {
                let (rec, next) = measure_position(&state, spec, rng)?;
                state = next;
                log.push(TrajectoryEvent::measure(clock, spec, rec))?;
            }
        }
    }
    Ok((state, log))
}
