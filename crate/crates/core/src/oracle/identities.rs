//! Exact operator identities on the full chain.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{embed_qubit, linear_entropy, subspace, FullChainState};
use crate::chain::{PositionWavefunction, QubitState, SiteIndex};
use crate::error::{Error, Result};
use crate::fullspace::{self, DOWN, UP, VAC};
use crate::hamiltonians::{
    block_walk_hamiltonian, swap_two_site, uls_bond, uls_full_hamiltonian, HermitianOperator,
    ModelParams,
};
use crate::propagator::Propagator;
use crate::trajectory::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectedSwapReport {
    /// Max entry of `P₀ᵏ W_ij P₀ᵏ − (case formula)` over all `i < j`, `k`.
    pub max_residual: f64,
    /// Max `|tr(P₀ᵏ W_ij P₀ᵏ) − 3^{n−2}|`.
    pub max_trace_residual: f64,
    pub cases: usize,
}

fn vacuum_mask(n: usize, site: usize) -> Vec<bool> {
    (0..fullspace::dim(n))
        .map(|i| fullspace::level(i, n, site) == VAC)
        .collect()
}

fn diagonal(mask: &[bool]) -> DMatrix<Complex64> {
    let d = mask.len();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j && mask[i] {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Checks the two cases of the projected swap on every site triple:
/// `P₀ᵏ W_ij P₀ᵏ = W_ij ⊗ |0⟩_k⟨0|` for `k ∉ {i, j}` and
/// `P₀ⁱ W_ij P₀ⁱ = |0⟩_i⟨0| ⊗ |0⟩_j⟨0|`.
pub fn verify_projected_swap(n: usize) -> Result<ProjectedSwapReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "projected swap needs at least two sites".into(),
        ));
    }
    if n > 5 {
        return Err(Error::ChainTooLarge { n, cap: 5 });
    }
    let d = fullspace::dim(n);
    let swap = swap_two_site();
    let mut report = ProjectedSwapReport {
        max_residual: 0.0,
        max_trace_residual: 0.0,
        cases: 0,
    };
    let expected_trace = fullspace::dim(n - 2) as f64;
    for i in 1..=n {
        for j in i + 1..=n {
            let mut w = DMatrix::zeros(d, d);
            fullspace::add_two_site(&mut w, n, i, j, &swap);
            for k in 1..=n {
                let p = diagonal(&vacuum_mask(n, k));
                let lhs = &p * &w * &p;
                let rhs = if k == i || k == j {
                    let both: Vec<bool> = vacuum_mask(n, i)
                        .iter()
                        .zip(vacuum_mask(n, j))
                        .map(|(a, b)| *a && b)
                        .collect();
                    diagonal(&both)
                } else {
                    &w * &p
                };
                report.max_residual = report.max_residual.max(max_abs(&(&lhs - &rhs)));
                report.max_trace_residual = report
                    .max_trace_residual
                    .max((lhs.trace().re - expected_trace).abs());
                report.cases += 1;
            }
        }
    }
    Ok(report)
}

/// `max_ab |[H, O]_ab|` for the level counters and the magnetization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumberCommutators {
    pub up: f64,
    pub down: f64,
    pub vacuum: f64,
    /// `N_↑ − N_↓`, conserved for every `θ`.
    pub magnetization: f64,
}

impl NumberCommutators {
    /// Largest of the three level-counter commutators.
    pub fn max_level(&self) -> f64 {
        self.up.max(self.down).max(self.vacuum)
    }
}

fn diagonal_commutator(h: &HermitianOperator, diag: &[f64]) -> f64 {
    let d = diag.len();
    let mut worst = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            worst = worst.max((h.entry(a, b) * (diag[b] - diag[a])).norm());
        }
    }
    worst
}

/// Commutators of the full Hamiltonian with `N_↑`, `N_↓`, `N_0` and
/// `N_↑ − N_↓`. The level counters commute only at `θ = π/4`; elsewhere
/// pair creation changes `N_0` by two.
pub fn number_operator_commutators(n: usize, params: &ModelParams) -> Result<NumberCommutators> {
    let h = uls_full_hamiltonian(n, params)?;
    let d = fullspace::dim(n);
    let count = |lvl: usize| -> Vec<f64> {
        (0..d)
            .map(|i| {
                (1..=n)
                    .filter(|&s| fullspace::level(i, n, s) == lvl)
                    .count() as f64
            })
            .collect()
    };
    let (up, down, vac) = (count(UP), count(DOWN), count(VAC));
    let mag: Vec<f64> = up.iter().zip(&down).map(|(u, d)| u - d).collect();
    Ok(NumberCommutators {
        up: diagonal_commutator(&h, &up),
        down: diagonal_commutator(&h, &down),
        vacuum: diagonal_commutator(&h, &vac),
        magnetization: diagonal_commutator(&h, &mag),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    /// Max entry of `U_P(t) − U_A(t) ⊗ U_B(t)` on the subspace with site `k`
    /// empty.
    pub factorization_residual: f64,
    /// Linear entropy of region A after evolving a product state under the
    /// projected Hamiltonian.
    pub cross_influence: f64,
    /// Same quantity without the projection.
    pub unprojected_cross_influence: f64,
}

/// Bonds of a region of `len` sites plus an optional one-site term on
/// `edge` (region-local index).
fn region_hamiltonian(
    len: usize,
    params: &ModelParams,
    edge: Option<(usize, DMatrix<Complex64>)>,
) -> Result<HermitianOperator> {
    if len == 0 {
        return Ok(HermitianOperator::zeros(1));
    }
    let mut m = uls_full_hamiltonian(len, params)?.matrix().clone();
    if let Some((site, op)) = edge {
        fullspace::add_one_site(&mut m, len, site, &op);
    }
    HermitianOperator::new(m)
}

fn random_state(dim: usize, rng: &mut RngStream) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.standard_normal(), rng.standard_normal()))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Checks that measuring site `k` empty splits the chain into two regions
/// evolving independently.
pub fn verify_block_decoupling(
    n: usize,
    k: usize,
    t: f64,
    params: &ModelParams,
) -> Result<DecouplingReport> {
    let h = uls_full_hamiltonian(n, params)?;
    SiteIndex::within(k, n)?;
    let keep = |i: usize| fullspace::level(i, n, k) == VAC;
    let indices = subspace(n, keep);
    let prop = Propagator::global();
    let u_sub = prop.unitary(&h.compressed(&indices), t);

    // the bond touching site k, with site k held empty
    let bond = uls_bond(params);
    let left_edge = DMatrix::from_fn(3, 3, |a, b| bond[(3 * a + VAC, 3 * b + VAC)]);
    let right_edge = DMatrix::from_fn(3, 3, |a, b| bond[(3 * VAC + a, 3 * VAC + b)]);
    let (len_a, len_b) = (k - 1, n - k);
    let h_a = region_hamiltonian(len_a, params, (len_a > 0).then_some((len_a, left_edge)))?;
    let h_b = region_hamiltonian(len_b, params, (len_b > 0).then_some((1, right_edge)))?;
    let u_ab = prop.unitary(&h_a, t).kronecker(&prop.unitary(&h_b, t));
    let factorization_residual = max_abs(&(&u_sub - &u_ab));

    let mut rng = RngStream::new(0x5eed, 0);
    let psi_a = random_state(fullspace::dim(len_a), &mut rng);
    let psi_b = random_state(fullspace::dim(len_b), &mut rng);
    let mut amps = vec![Complex64::new(0.0, 0.0); fullspace::dim(n)];
    for (&idx, pos) in indices.iter().zip(0..) {
        amps[idx] = psi_a[pos / psi_b.len()] * psi_b[pos % psi_b.len()];
    }
    let initial = FullChainState::new(n, amps)?;
    let projected = initial.evolve(&h.projected(keep), t)?;
    let free = initial.evolve(&h, t)?;
    Ok(DecouplingReport {
        factorization_residual,
        cross_influence: linear_entropy(&projected.reduced_prefix(len_a)),
        unprojected_cross_influence: linear_entropy(&free.reduced_prefix(len_a)),
    })
}

/// One qubit on an unmeasured open chain at `θ = π/4`: max amplitude
/// difference between full evolution and the walk `X̂ + |1⟩⟨1| + |n⟩⟨n|`,
/// after removing the global phase. Exact because the one-qubit sector is
/// closed. The end-site terms appear because an open end lacks the vacuum
/// bond a measured boundary provides.
pub fn single_qubit_sector_residual(n: usize, t: f64) -> Result<f64> {
    let spin = QubitState::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8))?;
    let start = PositionWavefunction::localized(n, SiteIndex::new(1)?, 1)?;
    let full =
        embed_qubit(&start, spin, n)?.evolve(&uls_full_hamiltonian(n, &ModelParams::uls())?, t)?;
    let mut walk = block_walk_hamiltonian(n)?.matrix().clone();
    walk[(0, 0)] += 1.0;
    walk[(n - 1, n - 1)] += 1.0;
    let walked =
        Propagator::global().evolve(&HermitianOperator::new(walk)?, t, start.amplitudes())?;
    let effective = embed_qubit(
        &PositionWavefunction::new(walked, SiteIndex::new(1)?)?,
        spin,
        n,
    )?;
    let ov = effective.overlap(&full);
    let phase = ov / ov.norm();
    Ok(full
        .amplitudes()
        .iter()
        .zip(effective.amplitudes())
        .map(|(a, b)| (a - b * phase).norm())
        .fold(0.0, f64::max))
}
