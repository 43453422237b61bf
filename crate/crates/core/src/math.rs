//! Thin wrappers so the float code reads naturally without `std`.

pub(crate) use libm::{exp, expm1, fabs as abs, log as ln, log1p, pow, sqrt};

pub(crate) use core::f64::consts::E;

/// Euler–Mascheroni constant, 22 significant digits.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.5772156649015328606065;

#[inline]
pub(crate) fn powi(x: f64, n: u32) -> f64 {
    let mut base = x;
    let mut e = n;
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// `e^z - 1 - z`, accurate for small `|z|`.
pub(crate) fn exp_minus_linear(z: f64) -> f64 {
    if abs(z) > 0.5 {
        return expm1(z) - z;
    }
    let mut term = z * z / 2.0;
    let mut sum = term;
    let mut k = 2.0;
    while abs(term) > 1e-18 * abs(sum) {
        k += 1.0;
        term *= z / k;
        sum += term;
    }
    sum
}

/// Pascal triangle rows `0..=n` as `f64`.
pub(crate) fn pascal(n: usize) -> alloc::vec::Vec<alloc::vec::Vec<f64>> {
    let mut rows = alloc::vec::Vec::with_capacity(n + 1);
    rows.push(alloc::vec![1.0]);
    for m in 1..=n {
        let prev: &alloc::vec::Vec<f64> = &rows[m - 1];
        let mut row = alloc::vec![1.0; m + 1];
        for k in 1..m {
            row[k] = prev[k - 1] + prev[k];
        }
        rows.push(row);
    }
    rows
}
