//! Exact evolution by dense eigendecomposition, the conditional transition
//! amplitudes `f±` and their ratio `g`, and the special times of a size-2
//! block.

pub mod bessel;

use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::sync::{Arc, LazyLock, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{block_walk_hamiltonian, conditional_hamiltonians, HermitianOperator};

pub use bessel::{bessel_j_sequence, default_terms, free_walk_position_mean};

/// Grid step for root scans.
pub const SCAN_STEP: f64 = 1e-3;
/// Bisection stops once the bracket is this narrow.
pub const BISECT_TOL: f64 = 1e-12;
/// Residual every returned root must meet.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;
/// Distance from a zero of `sin √2t` inside which the closed form for
/// `|g21|` is not evaluated.
pub const CSC_GUARD: f64 = 1e-6;

const CACHE_LIMIT: usize = 4096;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    /// Same vectors when `H` is real symmetric; enables real arithmetic.
    real_vectors: Option<DMatrix<f64>>,
}

impl SpectralDecomposition {
    pub fn new(h: &HermitianOperator) -> Self {
        let d = h.dimension();
        if h.is_real() {
            let eig = SymmetricEigen::new(h.matrix().map(|z| z.re));
            let vals = eig.eigenvalues.as_slice();
            let order = ascending(vals);
            let real = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
            return Self {
                eigenvalues: order.iter().map(|&i| vals[i]).collect(),
                eigenvectors: real.map(|x| Complex64::new(x, 0.0)),
                real_vectors: Some(real),
            };
        }
        let eig = SymmetricEigen::new(h.matrix().clone());
        let vals = eig.eigenvalues.as_slice();
        let order = ascending(vals);
        Self {
            eigenvalues: order.iter().map(|&i| vals[i]).collect(),
            eigenvectors: DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]),
            real_vectors: None,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |VΛV† − H|`.
    pub fn reconstruction_error(&self, h: &HermitianOperator) -> f64 {
        let v = &self.eigenvectors;
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dimension(),
            self.eigenvalues.iter().map(|&e| Complex64::new(e, 0.0)),
        ));
        (v * lam * v.adjoint() - h.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `max |V†V − 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        (v.adjoint() * v - DMatrix::identity(self.dimension(), self.dimension()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `e^{−itH}` as a dense matrix.
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (c, &e) in self.eigenvalues.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -e * t);
            scaled.column_mut(c).scale_mut_complex(ph);
        }
        scaled * v.adjoint()
    }

    /// `e^{−itH} ψ`.
    pub fn evolve(&self, t: f64, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let d = self.dimension();
        if psi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: psi.len(),
            });
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; d];
        if let Some(v) = &self.real_vectors {
            // columns: Re ψ, Im ψ
            let parts = DMatrix::from_fn(d, 2, |i, k| if k == 0 { psi[i].re } else { psi[i].im });
            let mut coeffs = v.tr_mul(&parts);
            for (j, &e) in self.eigenvalues.iter().enumerate() {
                let c = Complex64::new(coeffs[(j, 0)], coeffs[(j, 1)])
                    * Complex64::from_polar(1.0, -e * t);
                coeffs[(j, 0)] = c.re;
                coeffs[(j, 1)] = c.im;
            }
            let back = v * coeffs;
            for (i, o) in out.iter_mut().enumerate() {
                *o = Complex64::new(back[(i, 0)], back[(i, 1)]);
            }
            return Ok(out);
        }
        let v = &self.eigenvectors;
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let col = v.column(j);
            let acc = col
                .iter()
                .zip(psi)
                .fold(zero, |acc, (a, p)| acc + a.conj() * p);
            let c = acc * Complex64::from_polar(1.0, -e * t);
            for (o, a) in out.iter_mut().zip(col.iter()) {
                *o += a * c;
            }
        }
        Ok(out)
    }
}

fn ascending(vals: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    order
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, s: Complex64);
}

impl<S> ScaleComplex for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, s: Complex64) {
        for z in self.iter_mut() {
            *z *= s;
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct OperatorKey(usize, Vec<(u64, u64)>);

impl OperatorKey {
    fn of(h: &HermitianOperator) -> Self {
        OperatorKey(
            h.dimension(),
            h.matrix()
                .iter()
                .map(|z| (z.re.to_bits(), z.im.to_bits()))
                .collect(),
        )
    }
}

/// Decomposition cache keyed by the exact operator entries.
///
/// Read-mostly; concurrent inserts of the same key produce equal values,
/// so results do not depend on interleaving.
#[derive(Default)]
pub struct Propagator {
    cache: RwLock<HashMap<OperatorKey, Arc<SpectralDecomposition>>>,
}

static GLOBAL: LazyLock<Propagator> = LazyLock::new(Propagator::default);

impl Propagator {
    pub fn global() -> &'static Propagator {
        &GLOBAL
    }

    pub fn decomposition(&self, h: &HermitianOperator) -> Arc<SpectralDecomposition> {
        let key = OperatorKey::of(h);
        if let Some(d) = self.cache.read().expect("cache poisoned").get(&key) {
            return Arc::clone(d);
        }
        let dec = Arc::new(SpectralDecomposition::new(h));
        let mut guard = self.cache.write().expect("cache poisoned");
        if guard.len() >= CACHE_LIMIT {
            guard.clear();
        }
        Arc::clone(guard.entry(key).or_insert(dec))
    }

    pub fn evolve(
        &self,
        h: &HermitianOperator,
        t: f64,
        psi: &[Complex64],
    ) -> Result<Vec<Complex64>> {
        self.decomposition(h).evolve(t, psi)
    }

    pub fn unitary(&self, h: &HermitianOperator, t: f64) -> DMatrix<Complex64> {
        self.decomposition(h).unitary(t)
    }
}

/// Decomposition of the walk Hamiltonian on `size` sites, cached by size.
pub fn walk_decomposition(size: usize) -> Result<Arc<SpectralDecomposition>> {
    static WALKS: LazyLock<RwLock<HashMap<usize, Arc<SpectralDecomposition>>>> =
        LazyLock::new(Default::default);
    if let Some(d) = WALKS.read().expect("cache poisoned").get(&size) {
        return Ok(Arc::clone(d));
    }
    let dec = Arc::new(SpectralDecomposition::new(&block_walk_hamiltonian(size)?));
    Ok(Arc::clone(
        WALKS
            .write()
            .expect("cache poisoned")
            .entry(size)
            .or_insert(dec),
    ))
}

/// `e^{−itH} ψ` through the process-wide decomposition cache.
pub fn evolve(h: &HermitianOperator, t: f64, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    Propagator::global().evolve(h, t, psi)
}

/// Conditional amplitudes `f±_{rk}(t) = ⟨r|e^{−itĜ±}|k⟩` and their ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePair {
    pub f_plus: Complex64,
    pub f_minus: Complex64,
    /// `f−/f+`; absent when `f+ = 0`.
    pub g: Option<Complex64>,
    /// `arg g` in `(−π, π]`.
    pub phase: Option<f64>,
}

impl AmplitudePair {
    pub fn new(f_plus: Complex64, f_minus: Complex64) -> Self {
        let g = (f_plus != Complex64::new(0.0, 0.0)).then(|| f_minus / f_plus);
        Self {
            f_plus,
            f_minus,
            g,
            phase: g.map(|g| g.arg()),
        }
    }

    /// Born probability of this outcome for parity weights `(⟨S⟩, ⟨A⟩)`.
    pub fn probability(&self, sym: f64, antisym: f64) -> f64 {
        self.f_plus.norm_sqr() * sym + self.f_minus.norm_sqr() * antisym
    }
}

/// `(U+(t), U−(t))` on a block of `size` sites.
pub fn conditional_unitaries(
    size: usize,
    t: f64,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let (gp, gm) = conditional_hamiltonians(size)?;
    let p = Propagator::global();
    Ok((p.unitary(&gp, t), p.unitary(&gm, t)))
}

/// `f±_{rk}(t)` for every outcome `r` (index `r − 1`).
pub fn transition_amplitudes(size: usize, t: f64, k: usize) -> Result<Vec<AmplitudePair>> {
    if k < 1 || k > size {
        return Err(Error::SiteOutOfRange { site: k, len: size });
    }
    let (up, um) = conditional_unitaries(size, t)?;
    Ok((0..size)
        .map(|r| AmplitudePair::new(up[(r, k - 1)], um[(r, k - 1)]))
        .collect())
}

/// Closed forms of `(|g11|, |g21|)` on a size-2 block:
/// `2|cos t|/√(3 + cos 2√2t)` and `√2|sin t / sin √2t|`.
///
/// Within [`CSC_GUARD`] of a nonzero root of `sin √2t` the second form
/// diverges and `Singular(t)` is returned.
pub fn g_magnitude_closed_form(t: f64) -> Result<(f64, f64)> {
    if t == 0.0 {
        return Ok((1.0, 1.0));
    }
    let g11 = 2.0 * t.cos().abs() / (3.0 + (2.0 * SQRT_2 * t).cos()).sqrt();
    let m = (SQRT_2 * t / std::f64::consts::PI).round();
    if m != 0.0 && (t - m * std::f64::consts::PI / SQRT_2).abs() < CSC_GUARD {
        return Err(Error::Singular(t));
    }
    let g21 = SQRT_2 * (t.sin() / (SQRT_2 * t).sin()).abs();
    Ok((g11, g21))
}

/// `(|g11|, |g21|)` from the spectral amplitudes of a size-2 block.
pub fn g_magnitudes_spectral(t: f64) -> Result<(Option<f64>, Option<f64>)> {
    let col = transition_amplitudes(2, t, 1)?;
    Ok((col[0].g.map(|g| g.norm()), col[1].g.map(|g| g.norm())))
}

/// All bracketed roots of `f` on `(lo, hi]`, scanning with `step` and
/// bisecting to [`BISECT_TOL`].
pub fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let n = ((hi - lo) / step).ceil() as usize;
    let mut a = lo + step;
    let mut fa = f(a);
    for i in 2..=n {
        let b = (lo + i as f64 * step).min(hi);
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let (mut x0, mut x1, mut f0) = (a, b, fa);
            while x1 - x0 > BISECT_TOL {
                let mid = 0.5 * (x0 + x1);
                let fm = f(mid);
                if fm == 0.0 {
                    x0 = mid;
                    x1 = mid;
                    break;
                }
                if fm.signum() == f0.signum() {
                    x0 = mid;
                    f0 = fm;
                } else {
                    x1 = mid;
                }
            }
            roots.push(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// A switch time at which every outcome acts unitarily on the pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryTime {
    pub t: f64,
    /// `(φ_{1k}, φ_{2k})`.
    pub phases: [f64; 2],
    /// `(p(1|k), p(2|k))`, parity independent.
    pub probabilities: [f64; 2],
}

/// Times `0 < t* ≤ t_max` with `|g_{1k}(t*)| = |g_{2k}(t*)| = 1` on a
/// size-2 block, ascending.
pub fn find_unitary_times(k: usize, t_max: f64) -> Result<Vec<UnitaryTime>> {
    if !(k == 1 || k == 2) {
        return Err(Error::SiteOutOfRange { site: k, len: 2 });
    }
    let other = 3 - k;
    let off = |t: f64| -> f64 {
        let a = transition_amplitudes(2, t, k).expect("k validated");
        let pair = a[other - 1];
        pair.f_minus.norm_sqr() - pair.f_plus.norm_sqr()
    };
    let mut out = Vec::new();
    for t in scan_roots(off, 0.0, t_max, SCAN_STEP) {
        let a = transition_amplitudes(2, t, k)?;
        let mut phases = [0.0; 2];
        for (r, pair) in a.iter().enumerate() {
            let g = pair.g.ok_or(Error::NonUnitaryTime(t))?;
            if (g.norm() - 1.0).abs() > ROOT_RESIDUAL_TOL {
                return Err(Error::NonUnitaryTime(t));
            }
            phases[r] = g.arg();
        }
        out.push(UnitaryTime {
            t,
            phases,
            probabilities: [a[0].f_plus.norm_sqr(), a[1].f_plus.norm_sqr()],
        });
    }
    Ok(out)
}

/// Parity-measurement times on a size-2 block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityTimes {
    /// First zero of `f−_{12}`.
    pub t1: f64,
    /// First zero of `f+_{12}`.
    pub t2: f64,
}

fn first_offdiag_zero(g: &HermitianOperator) -> Result<f64> {
    // e^{i tr(G) t/2} ⟨1|e^{−itG}|2⟩ is purely imaginary for a real 2×2 G
    let half_trace = g.matrix().trace().re / 2.0;
    let p = Propagator::global();
    let signed = |t: f64| {
        let u = p.unitary(g, t);
        (u[(0, 1)] * Complex64::from_polar(1.0, half_trace * t)).im
    };
    let roots = scan_roots(signed, 0.0, 20.0, SCAN_STEP);
    let t = *roots
        .first()
        .ok_or_else(|| Error::InvalidParameter("no off-diagonal zero below t = 20".into()))?;
    if p.unitary(g, t)[(0, 1)].norm() > ROOT_RESIDUAL_TOL {
        return Err(Error::NonUnitaryTime(t));
    }
    Ok(t)
}

/// Located once per process; the search is deterministic.
pub fn find_parity_times() -> Result<ParityTimes> {
    static TIMES: OnceLock<ParityTimes> = OnceLock::new();
    if let Some(t) = TIMES.get() {
        return Ok(*t);
    }
    let times = locate_parity_times()?;
    Ok(*TIMES.get_or_init(|| times))
}

fn locate_parity_times() -> Result<ParityTimes> {
    let (gp, gm) = conditional_hamiltonians(2)?;
    let t1 = first_offdiag_zero(&gm)?;
    let t2 = first_offdiag_zero(&gp)?;
    let p = Propagator::global();
    if p.unitary(&gp, t1)[(0, 1)].norm() < ROOT_RESIDUAL_TOL
        || p.unitary(&gm, t2)[(0, 1)].norm() < ROOT_RESIDUAL_TOL
    {
        return Err(Error::InvalidParameter("parity times coincide".into()));
    }
    Ok(ParityTimes { t1, t2 })
}

/// `⟨L⟩` after evolving `|1⟩` for `t` under the walk on `m` sites.
pub fn walk_position_mean_by_evolution(t: f64, m: usize) -> Result<f64> {
    let p = walk_profile(m, t, 1)?;
    Ok(p.iter().enumerate().map(|(i, q)| (i + 1) as f64 * q).sum())
}

/// `p(t, r) = |⟨r|e^{−itX̂}|k⟩|²` over a block of `size` sites.
pub fn walk_profile(size: usize, t: f64, k: usize) -> Result<Vec<f64>> {
    if k < 1 || k > size {
        return Err(Error::SiteOutOfRange { site: k, len: size });
    }
    let h = block_walk_hamiltonian(size)?;
    let mut psi = vec![Complex64::new(0.0, 0.0); size];
    psi[k - 1] = Complex64::new(1.0, 0.0);
    Ok(evolve(&h, t, &psi)?.iter().map(|z| z.norm_sqr()).collect())
}
