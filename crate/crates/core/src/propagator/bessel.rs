//! Integer-order Bessel functions of the first kind and the free-walk
//! position mean they give for a half-infinite chain.

use crate::error::{Error, Result};

/// `J_0(z) … J_{n_max}(z)` for real `z`, by Miller's downward recurrence
/// normalized with `J_0 + 2 Σ_k J_{2k} = 1`.
pub fn bessel_j_sequence(n_max: usize, z: f64) -> Vec<f64> {
    if z == 0.0 {
        let mut out = vec![0.0; n_max + 1];
        out[0] = 1.0;
        return out;
    }
    let sign = z.signum();
    let x = z.abs();
    let big = n_max.max(x.ceil() as usize);
    // start well past both n_max and the turning point x
    let mut m = big + 20 + (40.0 * big as f64).sqrt() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut vals = vec![0.0; m + 2];
    vals[m] = 1e-30;
    for k in (1..=m).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = vals[0];
    for k in (2..=m).step_by(2) {
        norm += 2.0 * vals[k];
    }
    let mut out: Vec<f64> = vals[..=n_max].iter().map(|v| v / norm).collect();
    if sign < 0.0 {
        // J_n(−z) = (−1)^n J_n(z)
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// Number of terms after which the free-walk sum at time `t` is converged
/// far below double precision.
pub fn default_terms(t: f64) -> usize {
    let z = 2.0 * t.abs();
    (z + 12.0 * z.cbrt() + 40.0).ceil() as usize
}

/// `⟨L⟩ = Σ_x x (x J_x(2t)/t)²` for a walker released at site 1 of a
/// half-infinite chain with `J = 1`.
///
/// `terms` sites are summed; the missing probability `1 − Σ_x p_x` must be
/// below `1e-12`.
pub fn free_walk_position_mean(t: f64, terms: usize) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be positive, got {t}"
        )));
    }
    let j = bessel_j_sequence(terms + 1, 2.0 * t);
    let mut total = 0.0;
    let mut mean = 0.0;
    for (x, jx) in j.iter().enumerate().take(terms + 1).skip(1) {
        let amp = x as f64 * jx / t;
        let p = amp * amp;
        total += p;
        mean += x as f64 * p;
    }
    let tail = (1.0 - total).abs();
    if tail > 1e-12 {
        return Err(Error::InsufficientTerms { t, terms, tail });
    }
    Ok(mean)
}
