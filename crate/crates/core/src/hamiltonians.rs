//! Hamiltonians: the block walk, the parity-conditioned walks of a free qubit
//! next to a fixed one, the bilinear-biquadratic spin-1 chain, the projected
//! pair-creation block, and single-site perturbations reduced to the qubit.
//!
//! Energies are in units of the swap coupling `J` (`J = 1`) unless a
//! [`ModelParams`] says otherwise. Constant energy offsets are dropped from
//! the effective operators and kept in the full-chain one.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::SiteIndex;
use crate::error::{Error, Result};
use crate::fullspace;

/// Hermiticity tolerance for every constructed operator.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest chain the dense full-space builder accepts (`3^8 = 6561`).
pub const ORACLE_SITE_CAP: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct HermitianOperator {
    matrix: DMatrix<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    dimension: usize,
    entries: Vec<Vec<Complex64>>,
}

impl TryFrom<OperatorRepr> for HermitianOperator {
    type Error = Error;
    fn try_from(r: OperatorRepr) -> Result<Self> {
        if r.entries.len() != r.dimension {
            return Err(Error::DimensionMismatch {
                expected: r.dimension,
                got: r.entries.len(),
            });
        }
        for row in &r.entries {
            if row.len() != r.dimension {
                return Err(Error::DimensionMismatch {
                    expected: r.dimension,
                    got: row.len(),
                });
            }
        }
        let m = DMatrix::from_fn(r.dimension, r.dimension, |i, j| r.entries[i][j]);
        Self::new(m)
    }
}

impl From<HermitianOperator> for OperatorRepr {
    fn from(h: HermitianOperator) -> Self {
        let d = h.dimension();
        OperatorRepr {
            dimension: d,
            entries: (0..d)
                .map(|i| (0..d).map(|j| h.matrix[(i, j)]).collect())
                .collect(),
        }
    }
}

impl HermitianOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { matrix })
    }

    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(matrix.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn zeros(dimension: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dimension, dimension),
        }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    /// `PHP` for the coordinate projector onto `keep` (other rows and
    /// columns zeroed, dimension unchanged).
    pub fn projected(&self, keep: impl Fn(usize) -> bool) -> Self {
        let d = self.dimension();
        let mask: Vec<bool> = (0..d).map(&keep).collect();
        let matrix = DMatrix::from_fn(d, d, |i, j| {
            if mask[i] && mask[j] {
                self.matrix[(i, j)]
            } else {
                ZERO
            }
        });
        Self { matrix }
    }

    /// Restriction to the listed basis indices, in the listed order.
    pub fn compressed(&self, indices: &[usize]) -> Self {
        let d = indices.len();
        let matrix = DMatrix::from_fn(d, d, |i, j| self.matrix[(indices[i], indices[j])]);
        Self { matrix }
    }

    pub fn shifted(&self, c: f64) -> Self {
        let mut matrix = self.matrix.clone();
        for i in 0..self.dimension() {
            matrix[(i, i)] += c;
        }
        Self { matrix }
    }

    /// `H - c·1` with `c` chosen so that the trace vanishes.
    pub fn traceless(&self) -> (Self, f64) {
        let d = self.dimension() as f64;
        let c = self.matrix.trace().re / d;
        (self.shifted(-c), c)
    }
}

pub(crate) fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Parameters of the bilinear-biquadratic chain
/// `J̃ Σ (cos θ S·S + sin θ (S·S)²)`.
///
/// The swap coupling `J = J̃/√2` is stored; `J̃` and the pair-creation
/// energy `λ = 3√2 J̃ sin(π/4 − θ)` are recomputed on every read.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "ParamsRepr", into = "ParamsRepr")]
pub struct ModelParams {
    coupling: f64,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    coupling: f64,
    theta: f64,
    #[serde(default, skip_deserializing)]
    j_tilde: f64,
    #[serde(default, skip_deserializing)]
    lambda: f64,
}

impl From<ParamsRepr> for ModelParams {
    fn from(r: ParamsRepr) -> Self {
        Self {
            coupling: r.coupling,
            theta: r.theta,
        }
    }
}

impl From<ModelParams> for ParamsRepr {
    fn from(p: ModelParams) -> Self {
        ParamsRepr {
            coupling: p.coupling,
            theta: p.theta,
            j_tilde: p.j_tilde(),
            lambda: p.lambda(),
        }
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::uls()
    }
}

impl ModelParams {
    pub fn new(coupling: f64, theta: f64) -> Self {
        Self { coupling, theta }
    }

    /// The pure-swap point `θ = π/4` with `J = 1`.
    pub fn uls() -> Self {
        Self::new(1.0, FRAC_PI_4)
    }

    pub fn with_theta(theta: f64) -> Self {
        Self::new(1.0, theta)
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn j_tilde(&self) -> f64 {
        SQRT_2 * self.coupling
    }

    pub fn lambda(&self) -> f64 {
        3.0 * SQRT_2 * self.j_tilde() * (FRAC_PI_4 - self.theta).sin()
    }

    /// Coefficient of the swap terms, `J̃ cos θ` (equals `J` at `θ = π/4`).
    pub fn swap_coefficient(&self) -> f64 {
        self.j_tilde() * self.theta.cos()
    }

    /// Constant energy per bond, `J̃ sin θ`.
    pub fn bond_constant(&self) -> f64 {
        self.j_tilde() * self.theta.sin()
    }
}

/// Nearest-neighbour hopping on `size` sites, `J = 1`, zero diagonal.
pub fn block_walk_hamiltonian(size: usize) -> Result<HermitianOperator> {
    if size < 1 {
        return Err(Error::EmptyBlock);
    }
    let m = DMatrix::from_fn(
        size,
        size,
        |i, j| if i.abs_diff(j) == 1 { ONE } else { ZERO },
    );
    Ok(HermitianOperator { matrix: m })
}

/// `(Ĝ+, Ĝ−)` for a free qubit in a block of `size` sites whose in-block
/// site 1 touches the fixed qubit: `Ĝ− = X̂`, `Ĝ+ = X̂ + 2|1⟩⟨1|`.
pub fn conditional_hamiltonians(size: usize) -> Result<(HermitianOperator, HermitianOperator)> {
    let minus = block_walk_hamiltonian(size)?;
    let mut plus = minus.clone();
    plus.matrix[(0, 0)] += 2.0;
    Ok((plus, minus))
}

/// Spin-1 matrices `(S_x, S_y, S_z)` in the `(↑, ↓, 0)` basis.
pub fn spin_matrices() -> [[[Complex64; 3]; 3]; 3] {
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let ir = I * FRAC_1_SQRT_2;
    let sx = [[ZERO, ZERO, r], [ZERO, ZERO, r], [r, r, ZERO]];
    // ⟨↑|S_y|0⟩ = -i/√2, ⟨0|S_y|↓⟩ = -i/√2
    let sy = [[ZERO, ZERO, -ir], [ZERO, ZERO, ir], [ir, -ir, ZERO]];
    let sz = [[ONE, ZERO, ZERO], [ZERO, -ONE, ZERO], [ZERO, ZERO, ZERO]];
    [sx, sy, sz]
}

/// The eight Gell-Mann matrices (index 0 holds `λ¹`) in the `(↑, ↓, 0)`
/// basis, i.e. with the qubit levels in the leading 2×2 block.
pub fn gell_mann_matrices() -> [[[Complex64; 3]; 3]; 8] {
    let z = ZERO;
    let o = ONE;
    let s3 = 1.0 / 3f64.sqrt();
    [
        [[z, o, z], [o, z, z], [z, z, z]],
        [[z, -I, z], [I, z, z], [z, z, z]],
        [[o, z, z], [z, -o, z], [z, z, z]],
        [[z, z, o], [z, z, z], [o, z, z]],
        [[z, z, -I], [z, z, z], [I, z, z]],
        [[z, z, z], [z, z, o], [z, o, z]],
        [[z, z, z], [z, z, -I], [z, I, z]],
        [[o * s3, z, z], [z, o * s3, z], [z, z, o * (-2.0 * s3)]],
    ]
}

fn mat3(a: &[[Complex64; 3]; 3]) -> DMatrix<Complex64> {
    DMatrix::from_fn(3, 3, |i, j| a[i][j])
}

/// Two-site `S_i·S_j` as a 9×9 matrix, row index `3·s_i + s_j`.
pub fn spin_dot_spin() -> DMatrix<Complex64> {
    let s = spin_matrices();
    let mut out = DMatrix::zeros(9, 9);
    for comp in &s {
        let m = mat3(comp);
        out += m.kronecker(&m);
    }
    out
}

/// Two-site swap `W` (9×9).
pub fn swap_two_site() -> DMatrix<Complex64> {
    DMatrix::from_fn(9, 9, |r, c| {
        let (a, b) = (c / 3, c % 3);
        if r == 3 * b + a {
            ONE
        } else {
            ZERO
        }
    })
}

/// `|χ⟩ = (|↑↓⟩ + |↓↑⟩ − |00⟩)/√3`, the two-site spin singlet.
pub fn chi_vector() -> [Complex64; 9] {
    let mut v = [ZERO; 9];
    let c = 1.0 / 3f64.sqrt();
    v[1] = Complex64::new(c, 0.0); // ↑↓
    v[3] = Complex64::new(c, 0.0); // ↓↑
    v[8] = Complex64::new(-c, 0.0); // 00
    v
}

/// `|ψ+⟩ = (|↑↓⟩ + |↓↑⟩)/√2` on two sites.
pub fn psi_plus_vector() -> [Complex64; 9] {
    let mut v = [ZERO; 9];
    v[1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    v[3] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    v
}

/// `|00⟩` on two sites.
pub fn vacuum_pair_vector() -> [Complex64; 9] {
    let mut v = [ZERO; 9];
    v[8] = ONE;
    v
}

fn outer9(v: &[Complex64; 9]) -> DMatrix<Complex64> {
    DMatrix::from_fn(9, 9, |i, j| v[i] * v[j].conj())
}

fn vacuum_projector_on(site: usize) -> DMatrix<Complex64> {
    // site 0 = left factor, 1 = right factor of a 9-dim two-site space
    DMatrix::from_fn(9, 9, |r, c| {
        let level = if site == 0 { r / 3 } else { r % 3 };
        if r == c && level == 2 {
            ONE
        } else {
            ZERO
        }
    })
}

/// One bond of the bilinear-biquadratic chain, `J̃(cos θ S·S + sin θ (S·S)²)`.
pub fn uls_bond(params: &ModelParams) -> DMatrix<Complex64> {
    let ss = spin_dot_spin();
    let ss2 = &ss * &ss;
    (ss * Complex64::new(params.theta.cos(), 0.0) + ss2 * Complex64::new(params.theta.sin(), 0.0))
        * Complex64::new(params.j_tilde(), 0.0)
}

/// Full `3^n`-dimensional chain Hamiltonian built from spin-1 operators with
/// open boundaries. Constant terms are kept.
pub fn uls_full_hamiltonian(n: usize, params: &ModelParams) -> Result<HermitianOperator> {
    if n < 1 {
        return Err(Error::EmptyChain(n));
    }
    if n > ORACLE_SITE_CAP {
        return Err(Error::ChainTooLarge {
            n,
            cap: ORACLE_SITE_CAP,
        });
    }
    let bond = uls_bond(params);
    let mut h = DMatrix::zeros(fullspace::dim(n), fullspace::dim(n));
    for i in 1..n {
        fullspace::add_two_site(&mut h, n, i, i + 1, &bond);
    }
    HermitianOperator::new(h)
}

/// Zeno-projected Hamiltonian of an empty two-site block whose neighbours are
/// held in the vacuum, acting on the 9-dim space of the two block sites
/// (basis index `3·s_1 + s_2`, levels `(↑, ↓, 0)`), constants dropped.
///
/// Projecting the three bonds that touch the block gives
/// `J̃cos θ (P₀⊗1 + W + 1⊗P₀) − λ(χχ† + (P₀⊗1 + 1⊗P₀)/3)`.
pub fn pair_block_hamiltonian(params: &ModelParams) -> HermitianOperator {
    let p0_left = vacuum_projector_on(0);
    let p0_right = vacuum_projector_on(1);
    let boundary = &p0_left + &p0_right;
    let w = swap_two_site();
    let chi = outer9(&chi_vector());
    let swap_part = (&boundary + &w) * Complex64::new(params.swap_coefficient(), 0.0);
    let chi_part =
        (chi + boundary * Complex64::new(1.0 / 3.0, 0.0)) * Complex64::new(params.lambda(), 0.0);
    HermitianOperator {
        matrix: swap_part - chi_part,
    }
}

/// Which spin level plays the vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vacuum {
    /// `|0⟩` is the vacuum; the qubit is `{↑, ↓}`.
    Zero,
    /// `|↓⟩` is the vacuum; the qubit is `{↑, 0}`.
    Down,
}

/// Qubit Hamiltonian obtained by pinning the qubit on one site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedQubitHamiltonian {
    /// `Σ_{μ=1..3} c^μ σ^μ`.
    pub hamiltonian: HermitianOperator,
    /// Energy of the identity part dropped from `hamiltonian` (from `λ⁸`).
    pub scalar_rate: f64,
}

/// Reduces per-site Gell-Mann coefficients to the effective qubit
/// Hamiltonian seen when the qubit is pinned on `outcome_site`.
///
/// Computed as the qubit-level block of `Σ_μ c^μ λ^μ` on that site; all
/// other sites sit in the vacuum and only add constants.
pub fn gellmann_reduce(
    coeffs: &[[f64; 8]],
    outcome_site: SiteIndex,
) -> Result<ReducedQubitHamiltonian> {
    let k = outcome_site.get();
    let c = coeffs.get(k - 1).ok_or(Error::SiteOutOfRange {
        site: k,
        len: coeffs.len(),
    })?;
    let gm = gell_mann_matrices();
    let mut site_op = DMatrix::<Complex64>::zeros(3, 3);
    for (mu, lam) in gm.iter().enumerate() {
        site_op += mat3(lam) * Complex64::new(c[mu], 0.0);
    }
    let block = site_op.view((0, 0), (2, 2)).into_owned();
    let op = HermitianOperator::new(block)?;
    let (traceless, scalar) = op.traceless();
    Ok(ReducedQubitHamiltonian {
        hamiltonian: traceless,
        scalar_rate: scalar,
    })
}

/// Decomposes the site-local Zeeman term `B_k·S_k` onto Gell-Mann matrices,
/// in the level ordering (qubit level 1, qubit level 2, vacuum) fixed by
/// `vacuum`.
pub fn magnetic_to_gellmann(fields: &[[f64; 3]], vacuum: Vacuum) -> Vec<[f64; 8]> {
    let s = spin_matrices().map(|m| mat3(&m));
    // columns: new basis vectors expressed in (↑, ↓, 0)
    let order: [usize; 3] = match vacuum {
        Vacuum::Zero => [0, 1, 2],
        Vacuum::Down => [0, 2, 1],
    };
    let perm = DMatrix::from_fn(3, 3, |i, j| if order[j] == i { ONE } else { ZERO });
    let gm = gell_mann_matrices().map(|m| mat3(&m));
    fields
        .iter()
        .map(|b| {
            let zeeman = &s[0] * Complex64::new(b[0], 0.0)
                + &s[1] * Complex64::new(b[1], 0.0)
                + &s[2] * Complex64::new(b[2], 0.0);
            let local = perm.adjoint() * zeeman * &perm;
            let mut c = [0.0; 8];
            for (mu, lam) in gm.iter().enumerate() {
                c[mu] = (&local * lam).trace().re / 2.0;
            }
            c
        })
        .collect()
}
