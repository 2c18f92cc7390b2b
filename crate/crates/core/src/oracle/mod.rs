//! Brute-force simulator on the full `3^n` chain space, used to validate the
//! effective block dynamics. Dense matrices throughout; `n ≤ 8`.

mod identities;
mod report;
mod zeno;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{
    norm_sqr, PairAmplitudes, PositionWavefunction, QubitState, SiteIndex, TwoQubitBlockState,
    NORM_TOL,
};
use crate::error::{Error, Result};
use crate::fullspace::{self, DOWN, UP, VAC};
use crate::hamiltonians::{HermitianOperator, ORACLE_SITE_CAP};
use crate::propagator::Propagator;

pub use identities::{
    number_operator_commutators, single_qubit_sector_residual, verify_block_decoupling,
    verify_projected_swap, DecouplingReport, NumberCommutators, ProjectedSwapReport,
};
pub use report::{run_oracle_suite, OracleCheck, OracleReport, OracleSuiteConfig};
pub use zeno::{
    boundary_leak_probability, pair_probability_full_chain, verify_two_qubit_effective,
    zeno_convergence, TwoQubitEffectiveReport, ZenoRun, ZenoScenario,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pure state of the whole chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullChainState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

fn check_chain(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyChain(n));
    }
    if n > ORACLE_SITE_CAP {
        return Err(Error::ChainTooLarge {
            n,
            cap: ORACLE_SITE_CAP,
        });
    }
    Ok(())
}

impl FullChainState {
    pub fn new(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_chain(n)?;
        if amplitudes.len() != fullspace::dim(n) {
            return Err(Error::DimensionMismatch {
                expected: fullspace::dim(n),
                got: amplitudes.len(),
            });
        }
        let total = norm_sqr(&amplitudes);
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { n, amplitudes })
    }

    pub(crate) fn from_raw(n: usize, amplitudes: Vec<Complex64>) -> Self {
        Self { n, amplitudes }
    }

    /// Product configuration, `levels[0]` on site 1.
    pub fn basis(levels: &[usize]) -> Result<Self> {
        let n = levels.len();
        check_chain(n)?;
        if let Some(&bad) = levels.iter().find(|&&l| l > VAC) {
            return Err(Error::InvalidParameter(format!(
                "spin level {bad} out of range"
            )));
        }
        let mut amplitudes = vec![ZERO; fullspace::dim(n)];
        amplitudes[fullspace::index_of(levels)] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    /// Every site in `|0⟩`.
    pub fn vacuum(n: usize) -> Result<Self> {
        Self::basis(&vec![VAC; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &Self) -> f64 {
        self.overlap(other).norm_sqr()
    }

    pub fn evolve(&self, h: &HermitianOperator, t: f64) -> Result<Self> {
        let amplitudes = Propagator::global().evolve(h, t, &self.amplitudes)?;
        Ok(Self {
            n: self.n,
            amplitudes,
        })
    }

    /// Probabilities of `(↑, ↓, 0)` on `site`.
    pub fn level_probabilities(&self, site: usize) -> [f64; 3] {
        let mut p = [0.0; 3];
        for (i, a) in self.amplitudes.iter().enumerate() {
            p[fullspace::level(i, self.n, site)] += a.norm_sqr();
        }
        p
    }

    /// Reduced density operator of sites `1..=m`.
    pub fn reduced_prefix(&self, m: usize) -> DMatrix<Complex64> {
        let rows = fullspace::dim(m);
        let cols = fullspace::dim(self.n - m);
        let psi = DMatrix::from_row_slice(rows, cols, &self.amplitudes);
        &psi * psi.adjoint()
    }
}

/// Indices of the basis states satisfying `keep`, in ascending order.
pub(crate) fn subspace(n: usize, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    (0..fullspace::dim(n)).filter(|&i| keep(i)).collect()
}

/// `1 − tr ρ²`.
pub fn linear_entropy(rho: &DMatrix<Complex64>) -> f64 {
    1.0 - (rho * rho).trace().re
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DMatrix<Complex64>, sigma: &DMatrix<Complex64>) -> f64 {
    let diff = rho - sigma;
    let eig = nalgebra::SymmetricEigen::new(diff);
    eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>() / 2.0
}

fn block_site(offset: SiteIndex, k: usize, n: usize) -> Result<usize> {
    let site = offset.get() + k;
    if site > n {
        return Err(Error::SiteOutOfRange { site, len: n });
    }
    Ok(site)
}

/// Embeds a single qubit with amplitudes `rows[k] = (↑, ↓)` on site
/// `offset + k`; every other site is vacuum.
pub fn embed_walker(
    rows: &[[Complex64; 2]],
    offset: SiteIndex,
    n: usize,
) -> Result<FullChainState> {
    check_chain(n)?;
    let mut amplitudes = vec![ZERO; fullspace::dim(n)];
    let mut levels = vec![VAC; n];
    for (k, row) in rows.iter().enumerate() {
        let site = block_site(offset, k, n)?;
        for (lvl, a) in [(UP, row[0]), (DOWN, row[1])] {
            levels[site - 1] = lvl;
            amplitudes[fullspace::index_of(&levels)] = a;
        }
        levels[site - 1] = VAC;
    }
    FullChainState::new(n, amplitudes)
}

/// `|spin⟩ ⊗ |ψ⟩` in the chain.
pub fn embed_qubit(
    psi: &PositionWavefunction,
    spin: QubitState,
    n: usize,
) -> Result<FullChainState> {
    let [u, d] = spin.amplitudes();
    let rows: Vec<[Complex64; 2]> = psi.amplitudes().iter().map(|p| [u * p, d * p]).collect();
    embed_walker(&rows, psi.block_offset(), n)
}

/// Inverse of [`embed_walker`]; fails when weight lies outside the one-qubit
/// block sector.
pub fn extract_walker(
    state: &FullChainState,
    offset: SiteIndex,
    size: usize,
) -> Result<Vec<[Complex64; 2]>> {
    let n = state.n;
    let mut levels = vec![VAC; n];
    let mut rows = Vec::with_capacity(size);
    for k in 0..size {
        let site = block_site(offset, k, n)?;
        let mut row = [ZERO; 2];
        for (slot, lvl) in [UP, DOWN].into_iter().enumerate() {
            levels[site - 1] = lvl;
            row[slot] = state.amplitudes[fullspace::index_of(&levels)];
        }
        levels[site - 1] = VAC;
        rows.push(row);
    }
    let inside: f64 = rows.iter().flatten().map(|a| a.norm_sqr()).sum();
    if (inside - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(inside));
    }
    Ok(rows)
}

fn pair_sites(fixed: SiteIndex, offset: SiteIndex, size: usize, n: usize) -> Result<Vec<usize>> {
    let sites = (0..size)
        .map(|k| block_site(offset, k, n))
        .collect::<Result<Vec<_>>>()?;
    if fixed.get() > n {
        return Err(Error::SiteOutOfRange {
            site: fixed.get(),
            len: n,
        });
    }
    if sites.contains(&fixed.get()) {
        return Err(Error::InvalidParameter(format!(
            "fixed qubit site {} lies inside the block",
            fixed.get()
        )));
    }
    Ok(sites)
}

/// Embeds a fixed qubit on `fixed` and a free qubit in the block of `state`.
pub fn embed_pair(
    state: &TwoQubitBlockState,
    fixed: SiteIndex,
    n: usize,
) -> Result<FullChainState> {
    check_chain(n)?;
    let sites = pair_sites(fixed, state.block_offset(), state.size(), n)?;
    let mut amplitudes = vec![ZERO; fullspace::dim(n)];
    let mut levels = vec![VAC; n];
    for (row, site) in state.to_product_rows().iter().zip(sites) {
        for (j, a) in row.iter().enumerate() {
            levels[fixed.get() - 1] = j / 2;
            levels[site - 1] = j % 2;
            amplitudes[fullspace::index_of(&levels)] = *a;
        }
        levels[site - 1] = VAC;
    }
    FullChainState::new(n, amplitudes)
}

/// Inverse of [`embed_pair`].
pub fn extract_pair(
    state: &FullChainState,
    fixed: SiteIndex,
    offset: SiteIndex,
    size: usize,
) -> Result<TwoQubitBlockState> {
    let n = state.n;
    let sites = pair_sites(fixed, offset, size, n)?;
    let mut levels = vec![VAC; n];
    let mut rows: Vec<PairAmplitudes> = Vec::with_capacity(size);
    for site in sites {
        let mut row = [ZERO; 4];
        for (j, slot) in row.iter_mut().enumerate() {
            levels[fixed.get() - 1] = j / 2;
            levels[site - 1] = j % 2;
            *slot = state.amplitudes[fullspace::index_of(&levels)];
        }
        levels[site - 1] = VAC;
        rows.push(row);
    }
    TwoQubitBlockState::from_product_rows(&rows, offset)
}
