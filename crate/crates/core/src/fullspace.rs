//! Index arithmetic for the `3^n` product space of a spin-1 chain.
//!
//! Lexicographic ordering with site 1 most significant. Levels are
//! `0 = ↑`, `1 = ↓`, `2 = 0` (vacuum).

use nalgebra::DMatrix;
use num_complex::Complex64;

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const VAC: usize = 2;

pub fn dim(n: usize) -> usize {
    3usize.pow(n as u32)
}

/// Stride of 1-based `site` in a chain of `n` sites.
pub fn stride(n: usize, site: usize) -> usize {
    3usize.pow((n - site) as u32)
}

pub fn level(index: usize, n: usize, site: usize) -> usize {
    (index / stride(n, site)) % 3
}

pub fn with_level(index: usize, n: usize, site: usize, lvl: usize) -> usize {
    let s = stride(n, site);
    index - level(index, n, site) * s + lvl * s
}

/// Index of a product configuration (`levels[0]` is site 1).
pub fn index_of(levels: &[usize]) -> usize {
    levels.iter().fold(0, |acc, &l| acc * 3 + l)
}

/// `h += op` where `op` (9×9, row `3·s_i + s_j`) acts on sites `i`, `j`.
pub fn add_two_site(
    h: &mut DMatrix<Complex64>,
    n: usize,
    i: usize,
    j: usize,
    op: &DMatrix<Complex64>,
) {
    let d = dim(n);
    for col in 0..d {
        let (a, b) = (level(col, n, i), level(col, n, j));
        let local_col = 3 * a + b;
        for local_row in 0..9 {
            let v = op[(local_row, local_col)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = with_level(with_level(col, n, i, local_row / 3), n, j, local_row % 3);
            h[(row, col)] += v;
        }
    }
}

/// `h += op` where `op` (3×3) acts on `site`.
pub fn add_one_site(h: &mut DMatrix<Complex64>, n: usize, site: usize, op: &DMatrix<Complex64>) {
    let d = dim(n);
    for col in 0..d {
        let a = level(col, n, site);
        for b in 0..3 {
            let v = op[(b, a)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            h[(with_level(col, n, site, b), col)] += v;
        }
    }
}

/// Number of sites of `index` holding a qubit level (not vacuum).
pub fn occupation(index: usize, n: usize) -> usize {
    (1..=n).filter(|&s| level(index, n, s) != VAC).count()
}
