//! Chain sites, block configurations and the qubit/position states that live
//! inside a block.
//!
//! Spin-1 levels are ordered `(↑, ↓, 0)` everywhere in the crate. A qubit is
//! encoded in `{↑, ↓}`; `0` is the vacuum. Sites are 1-based.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on squared norms of states.
pub const NORM_TOL: f64 = 1e-12;

/// A 1-based position along the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct SiteIndex(usize);

impl SiteIndex {
    pub fn new(index: usize) -> Result<Self> {
        if index == 0 {
            return Err(Error::SiteOutOfRange { site: 0, len: 0 });
        }
        Ok(Self(index))
    }

    /// Site index validated against a chain of length `n`.
    pub fn within(index: usize, n: usize) -> Result<Self> {
        if index == 0 || index > n {
            return Err(Error::SiteOutOfRange {
                site: index,
                len: n,
            });
        }
        Ok(Self(index))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for SiteIndex {
    type Error = Error;
    fn try_from(value: usize) -> Result<Self> {
        Self::new(value)
    }
}

impl From<SiteIndex> for usize {
    fn from(value: SiteIndex) -> usize {
        value.0
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A maximal run of unmeasured sites `[left, right]`, inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub left: SiteIndex,
    pub right: SiteIndex,
}

impl Block {
    pub fn len(&self) -> usize {
        self.right.get() - self.left.get() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: SiteIndex) -> bool {
        self.left <= site && site <= self.right
    }
}

#[derive(Deserialize)]
struct BlockConfigRepr {
    chain_length: usize,
    measured_sites: Vec<usize>,
    #[serde(default)]
    blocks: Option<Vec<Block>>,
}

/// Which sites are continuously measured, and the blocks this induces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BlockConfigRepr")]
pub struct BlockConfig {
    chain_length: usize,
    measured_sites: BTreeSet<SiteIndex>,
    blocks: Vec<Block>,
}

impl TryFrom<BlockConfigRepr> for BlockConfig {
    type Error = Error;
    fn try_from(repr: BlockConfigRepr) -> Result<Self> {
        let cfg = make_block_config(repr.chain_length, repr.measured_sites)?;
        if let Some(blocks) = repr.blocks {
            if blocks != cfg.blocks {
                return Err(Error::InvalidParameter(
                    "stored blocks disagree with measured sites".into(),
                ));
            }
        }
        Ok(cfg)
    }
}

/// Builds the block partition for a chain of `n` sites with the given sites
/// continuously measured.
pub fn make_block_config(
    n: usize,
    measured: impl IntoIterator<Item = usize>,
) -> Result<BlockConfig> {
    if n < 1 {
        return Err(Error::EmptyChain(n));
    }
    let measured_sites = measured
        .into_iter()
        .map(|s| SiteIndex::within(s, n))
        .collect::<Result<BTreeSet<_>>>()?;
    let blocks = derive_blocks(n, &measured_sites);
    Ok(BlockConfig {
        chain_length: n,
        measured_sites,
        blocks,
    })
}

fn derive_blocks(n: usize, measured: &BTreeSet<SiteIndex>) -> Vec<Block> {
    let mut blocks = Vec::new();
    let mut start = None;
    for site in 1..=n {
        let is_measured = measured.contains(&SiteIndex(site));
        match (start, is_measured) {
            (None, false) => start = Some(site),
            (Some(l), true) => {
                blocks.push(Block {
                    left: SiteIndex(l),
                    right: SiteIndex(site - 1),
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(l) = start {
        blocks.push(Block {
            left: SiteIndex(l),
            right: SiteIndex(n),
        });
    }
    blocks
}

impl BlockConfig {
    pub fn chain_length(&self) -> usize {
        self.chain_length
    }

    pub fn measured_sites(&self) -> &BTreeSet<SiteIndex> {
        &self.measured_sites
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_measured(&self, site: SiteIndex) -> bool {
        self.measured_sites.contains(&site)
    }

    pub fn block_containing(&self, site: SiteIndex) -> Option<Block> {
        self.blocks.iter().copied().find(|b| b.contains(site))
    }

    /// Starts (`add = true`) or stops measuring `site`. Returns a new
    /// configuration; `self` is untouched.
    pub fn shift_boundary(&self, site: usize, add: bool) -> Result<BlockConfig> {
        let site = SiteIndex::within(site, self.chain_length)?;
        let mut measured = self.measured_sites.clone();
        if add {
            measured.insert(site);
        } else {
            measured.remove(&site);
        }
        let blocks = derive_blocks(self.chain_length, &measured);
        Ok(BlockConfig {
            chain_length: self.chain_length,
            measured_sites: measured,
            blocks,
        })
    }
}

pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn reframe(v: &[Complex64], from: SiteIndex, to: SiteIndex, size: usize) -> Vec<Complex64> {
    (0..size)
        .map(|i| {
            let abs = to.get() + i;
            abs.checked_sub(from.get())
                .and_then(|j| v.get(j).copied())
                .unwrap_or(Complex64::new(0.0, 0.0))
        })
        .collect()
}

fn check_norm(n2: f64) -> Result<()> {
    if (n2 - 1.0).abs() > NORM_TOL {
        Err(Error::NotNormalized(n2))
    } else {
        Ok(())
    }
}

/// Single-qubit state `α|↑⟩ + β|↓⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QubitRepr", into = "QubitRepr")]
pub struct QubitState {
    up: Complex64,
    down: Complex64,
}

#[derive(Serialize, Deserialize)]
struct QubitRepr {
    amplitudes: [Complex64; 2],
}

impl TryFrom<QubitRepr> for QubitState {
    type Error = Error;
    fn try_from(r: QubitRepr) -> Result<Self> {
        Self::new(r.amplitudes[0], r.amplitudes[1])
    }
}

impl From<QubitState> for QubitRepr {
    fn from(q: QubitState) -> Self {
        QubitRepr {
            amplitudes: [q.up, q.down],
        }
    }
}

impl QubitState {
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        check_norm(up.norm_sqr() + down.norm_sqr())?;
        Ok(Self { up, down })
    }

    pub fn up() -> Self {
        Self {
            up: Complex64::new(1.0, 0.0),
            down: Complex64::new(0.0, 0.0),
        }
    }

    pub fn down() -> Self {
        Self {
            up: Complex64::new(0.0, 0.0),
            down: Complex64::new(1.0, 0.0),
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.up, self.down]
    }
}

/// Amplitudes of a single qubit's position over the sites of one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PositionRepr")]
pub struct PositionWavefunction {
    amplitudes: Vec<Complex64>,
    block_offset: SiteIndex,
}

#[derive(Deserialize)]
struct PositionRepr {
    amplitudes: Vec<Complex64>,
    block_offset: SiteIndex,
}

impl TryFrom<PositionRepr> for PositionWavefunction {
    type Error = Error;
    fn try_from(r: PositionRepr) -> Result<Self> {
        Self::new(r.amplitudes, r.block_offset)
    }
}

impl PositionWavefunction {
    pub fn new(amplitudes: Vec<Complex64>, block_offset: SiteIndex) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyBlock);
        }
        check_norm(norm_sqr(&amplitudes))?;
        Ok(Self {
            amplitudes,
            block_offset,
        })
    }

    /// Qubit sitting on in-block site `k` (1-based) of a block of `size` sites.
    pub fn localized(size: usize, block_offset: SiteIndex, k: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyBlock);
        }
        if k == 0 || k > size {
            return Err(Error::SiteOutOfRange { site: k, len: size });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); size];
        amplitudes[k - 1] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            block_offset,
        })
    }

    /// Skips the norm check. Callers renormalize before handing the state out.
    pub(crate) fn from_raw(amplitudes: Vec<Complex64>, block_offset: SiteIndex) -> Self {
        Self {
            amplitudes,
            block_offset,
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn block_offset(&self) -> SiteIndex {
        self.block_offset
    }

    /// Same amplitudes on the block `[offset, offset + size)`; sites outside
    /// the new block are dropped, new sites start empty.
    pub(crate) fn reframed(&self, offset: SiteIndex, size: usize) -> Self {
        Self::from_raw(
            reframe(&self.amplitudes, self.block_offset, offset, size),
            offset,
        )
    }

    pub fn size(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨L̂⟩` in absolute chain coordinates.
    pub fn mean_position(&self) -> f64 {
        let offset = self.block_offset.get() as f64;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| (offset + i as f64) * a.norm_sqr())
            .sum()
    }
}

/// Parity sector of a two-qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    /// Triplet (symmetric) sector.
    #[serde(rename = "S")]
    Symmetric,
    /// Singlet (antisymmetric) sector.
    #[serde(rename = "A")]
    Antisymmetric,
}

/// Two-qubit product basis order used for 4-vectors: `↑↑, ↑↓, ↓↑, ↓↓`,
/// fixed qubit first, free qubit second.
pub type PairAmplitudes = [Complex64; 4];

/// Joint state of a fixed qubit at the block boundary and a free qubit moving
/// inside the block. Stored per parity sector: three triplet components
/// (`|↑↑⟩`, `(|↑↓⟩+|↓↑⟩)/√2`, `|↓↓⟩`) and the singlet, each a vector over
/// the free qubit's in-block position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TwoQubitRepr")]
pub struct TwoQubitBlockState {
    sym_amp: [Vec<Complex64>; 3],
    antisym_amp: Vec<Complex64>,
    block_offset: SiteIndex,
}

#[derive(Deserialize)]
struct TwoQubitRepr {
    sym_amp: [Vec<Complex64>; 3],
    antisym_amp: Vec<Complex64>,
    block_offset: SiteIndex,
}

impl TryFrom<TwoQubitRepr> for TwoQubitBlockState {
    type Error = Error;
    fn try_from(r: TwoQubitRepr) -> Result<Self> {
        let size = r.antisym_amp.len();
        if size == 0 {
            return Err(Error::EmptyBlock);
        }
        for v in &r.sym_amp {
            if v.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    got: v.len(),
                });
            }
        }
        let s = Self {
            sym_amp: r.sym_amp,
            antisym_amp: r.antisym_amp,
            block_offset: r.block_offset,
        };
        check_norm(s.norm_sqr())?;
        Ok(s)
    }
}

pub(crate) fn pair_to_sectors(pair: &PairAmplitudes) -> ([Complex64; 3], Complex64) {
    let t0 = (pair[1] + pair[2]) * FRAC_1_SQRT_2;
    let s = (pair[1] - pair[2]) * FRAC_1_SQRT_2;
    ([pair[0], t0, pair[3]], s)
}

pub(crate) fn sectors_to_pair(t: [Complex64; 3], s: Complex64) -> PairAmplitudes {
    [
        t[0],
        (t[1] + s) * FRAC_1_SQRT_2,
        (t[1] - s) * FRAC_1_SQRT_2,
        t[2],
    ]
}

impl TwoQubitBlockState {
    /// Product state `|pair⟩ ⊗ |k⟩` with the free qubit on in-block site `k`.
    pub fn from_pair_at(
        pair: PairAmplitudes,
        size: usize,
        block_offset: SiteIndex,
        k: usize,
    ) -> Result<Self> {
        let position = PositionWavefunction::localized(size, block_offset, k)?;
        Self::from_product(pair, &position)
    }

    /// `|pair⟩ ⊗ |position⟩`.
    pub fn from_product(pair: PairAmplitudes, position: &PositionWavefunction) -> Result<Self> {
        check_norm(pair.iter().map(|a| a.norm_sqr()).sum())?;
        let (t, s) = pair_to_sectors(&pair);
        let pos = position.amplitudes();
        Ok(Self {
            sym_amp: [
                pos.iter().map(|p| t[0] * p).collect(),
                pos.iter().map(|p| t[1] * p).collect(),
                pos.iter().map(|p| t[2] * p).collect(),
            ],
            antisym_amp: pos.iter().map(|p| s * p).collect(),
            block_offset: position.block_offset(),
        })
    }

    /// Builds from product-basis amplitudes, one 4-vector per in-block position.
    pub fn from_product_rows(rows: &[PairAmplitudes], block_offset: SiteIndex) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyBlock);
        }
        let mut sym_amp: [Vec<Complex64>; 3] = Default::default();
        let mut antisym_amp = Vec::with_capacity(rows.len());
        for row in rows {
            let (t, s) = pair_to_sectors(row);
            for (dst, v) in sym_amp.iter_mut().zip(t) {
                dst.push(v);
            }
            antisym_amp.push(s);
        }
        let state = Self {
            sym_amp,
            antisym_amp,
            block_offset,
        };
        check_norm(state.norm_sqr())?;
        Ok(state)
    }

    pub(crate) fn from_sectors_raw(
        sym_amp: [Vec<Complex64>; 3],
        antisym_amp: Vec<Complex64>,
        block_offset: SiteIndex,
    ) -> Self {
        Self {
            sym_amp,
            antisym_amp,
            block_offset,
        }
    }

    /// Same amplitudes on the block `[offset, offset + size)`; see
    /// [`PositionWavefunction::reframed`].
    pub(crate) fn reframed(&self, offset: SiteIndex, size: usize) -> Self {
        let f = |v: &Vec<Complex64>| reframe(v, self.block_offset, offset, size);
        Self {
            sym_amp: [
                f(&self.sym_amp[0]),
                f(&self.sym_amp[1]),
                f(&self.sym_amp[2]),
            ],
            antisym_amp: f(&self.antisym_amp),
            block_offset: offset,
        }
    }

    pub fn sym_amp(&self) -> &[Vec<Complex64>; 3] {
        &self.sym_amp
    }

    pub fn antisym_amp(&self) -> &[Complex64] {
        &self.antisym_amp
    }

    pub fn block_offset(&self) -> SiteIndex {
        self.block_offset
    }

    pub fn size(&self) -> usize {
        self.antisym_amp.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sym_amp.iter().map(|v| norm_sqr(v)).sum::<f64>() + norm_sqr(&self.antisym_amp)
    }

    /// Probability of finding the free qubit at each in-block site.
    pub fn position_probabilities(&self) -> Vec<f64> {
        (0..self.size())
            .map(|i| {
                self.sym_amp.iter().map(|v| v[i].norm_sqr()).sum::<f64>()
                    + self.antisym_amp[i].norm_sqr()
            })
            .collect()
    }

    /// Product-basis amplitudes (`↑↑, ↑↓, ↓↑, ↓↓`) at in-block site `k`,
    /// not renormalized.
    pub fn pair_at(&self, k: usize) -> PairAmplitudes {
        let i = k - 1;
        sectors_to_pair(
            [self.sym_amp[0][i], self.sym_amp[1][i], self.sym_amp[2][i]],
            self.antisym_amp[i],
        )
    }

    /// Product-basis amplitudes for every in-block position.
    pub fn to_product_rows(&self) -> Vec<PairAmplitudes> {
        (1..=self.size()).map(|k| self.pair_at(k)).collect()
    }

    /// `(⟨S⟩, ⟨A⟩)`: weight of the triplet and singlet sectors.
    pub fn parity_components(&self) -> Result<(f64, f64)> {
        let n2 = self.norm_sqr();
        check_norm(n2)?;
        let a = norm_sqr(&self.antisym_amp);
        let s = self.sym_amp.iter().map(|v| norm_sqr(v)).sum::<f64>();
        Ok((s, a))
    }
}

/// `(⟨S⟩, ⟨A⟩)` of a bare two-qubit state.
pub fn pair_parity_components(pair: &PairAmplitudes) -> (f64, f64) {
    let (t, s) = pair_to_sectors(pair);
    (t.iter().map(|a| a.norm_sqr()).sum(), s.norm_sqr())
}

/// Convenience constructors for common two-qubit states.
pub mod pairs {
    use super::PairAmplitudes;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    const Z: Complex64 = Complex64::new(0.0, 0.0);
    const O: Complex64 = Complex64::new(1.0, 0.0);
    const H: Complex64 = Complex64::new(FRAC_1_SQRT_2, 0.0);

    pub fn up_up() -> PairAmplitudes {
        [O, Z, Z, Z]
    }
    pub fn up_down() -> PairAmplitudes {
        [Z, O, Z, Z]
    }
    pub fn down_up() -> PairAmplitudes {
        [Z, Z, O, Z]
    }
    pub fn down_down() -> PairAmplitudes {
        [Z, Z, Z, O]
    }
    pub fn singlet() -> PairAmplitudes {
        [Z, H, -H, Z]
    }
    pub fn triplet_zero() -> PairAmplitudes {
        [Z, H, H, Z]
    }
}
