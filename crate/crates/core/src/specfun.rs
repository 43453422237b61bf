//! Special functions and combinatorial primitives.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::math::{abs, exp, ln, log1p, sqrt, E, EULER_GAMMA};
use crate::summation::CompensatedSum;

/// Largest `|x|` accepted by [`ein`] and by [`ei`] for positive arguments.
pub const EIN_RANGE: f64 = 30.0;

const EIN_MAX_TERMS: usize = 200;

/// Modified exponential integral `Ein(x) = ∫_0^x (1 - e^{-t}) dt / t`.
///
/// For `x ≤ 4` the defining series `Σ (-1)^{k+1} x^k / (k·k!)` is summed with
/// compensation. For larger positive `x` that series loses digits to
/// cancellation, so the positive-term form `e^{-x} Σ H_n x^n / n!` is used.
pub fn ein(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("Ein of a non-finite argument"));
    }
    if abs(x) > EIN_RANGE {
        return Err(Error::Range(format!("Ein({x}) outside |x| <= {EIN_RANGE}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x <= 4.0 {
        Ok(ein_series(x))
    } else {
        Ok(ein_harmonic(x))
    }
}

fn ein_series(x: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    // power = (-1)^{k+1} x^k / k!
    let mut power = x;
    for k in 1..=EIN_MAX_TERMS {
        let term = power / k as f64;
        acc.add(term);
        if abs(term) < 1e-17 * abs(acc.value()) {
            break;
        }
        power *= -x / (k + 1) as f64;
    }
    acc.value()
}

fn ein_harmonic(x: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut weight = 1.0; // x^n / n!
    let mut h = 0.0;
    for n in 1..=EIN_MAX_TERMS {
        weight *= x / n as f64;
        h += 1.0 / n as f64;
        let term = h * weight;
        acc.add(term);
        if (n as f64) > x && term < 1e-17 * acc.value() {
            break;
        }
    }
    exp(-x) * acc.value()
}

/// Exponential integral `Ei(x)`, principal value for `x > 0`.
///
/// Uses `Ei(x) = γ + ln|x| - Ein(-x)` except for `x < -1`, where that
/// difference cancels to a result of size `e^{x}`; there `Ei(x) = -E1(-x)`
/// with `E1` from its continued fraction.
pub fn ei(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("Ei of a non-finite argument"));
    }
    if x == 0.0 {
        return Err(Error::BranchPoint);
    }
    if x > EIN_RANGE {
        return Err(Error::Range(format!("Ei({x}) outside x <= {EIN_RANGE}")));
    }
    if x < -1.0 {
        return Ok(-e1_continued_fraction(-x));
    }
    Ok(EULER_GAMMA + ln(abs(x)) - ein(-x)?)
}

/// `E1(z)` for `z ≥ 1` by the modified Lentz method.
fn e1_continued_fraction(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let delta = c * d;
        h *= delta;
        if abs(delta - 1.0) < 1e-16 {
            break;
        }
    }
    h * exp(-z)
}

/// Principal branch `W₀(y)` of the Lambert W function.
///
/// Halley iteration seeded by the branch-point series for `y` near `-1/e`,
/// by `ln(1+y)` for moderate `y` and by the asymptotic form for large `y`.
pub fn lambert_w0(y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(domain("Lambert W of a non-finite argument"));
    }
    let branch = -1.0 / E;
    if y < branch - 4.0 * f64::EPSILON * abs(branch) {
        return Err(domain(format!("Lambert W0({y}) below -1/e")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y <= branch {
        return Ok(-1.0);
    }
    let p2 = 2.0 * (E * y + 1.0);
    let mut w = if p2 < 0.25 {
        let p = sqrt(p2.max(0.0));
        let series = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0
            + p * (-43.0 / 540.0 + p * (769.0 / 17280.0 + p * (-221.0 / 8505.0))))));
        if p < 1e-3 {
            return Ok(series);
        }
        series
    } else if y < 3.0 {
        log1p(y) * (1.0 - 0.25 * log1p(y) / (1.0 + log1p(y)))
    } else {
        let l1 = ln(y);
        let l2 = ln(l1);
        l1 - l2 + l2 / l1
    };
    for _ in 0..64 {
        let ew = exp(w);
        let r = w * ew - y;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * r / (2.0 * wp1);
        let step = r / denom;
        w -= step;
        if abs(step) <= 1e-16 * (1.0 + abs(w)) {
            break;
        }
    }
    Ok(w)
}

/// Guard on the arguments of [`stirling2`].
pub const STIRLING_MAX: u32 = 64;

/// Stirling number of the second kind `S(n, k)`, exact.
pub fn stirling2(n: u32, k: u32) -> Result<BigUint> {
    if n > STIRLING_MAX || k > STIRLING_MAX {
        return Err(Error::Range(format!("S({n},{k}) beyond n,k <= {STIRLING_MAX}")));
    }
    if k > n {
        return Ok(BigUint::zero());
    }
    let (n, k) = (n as usize, k as usize);
    let mut row = vec![BigUint::zero(); k + 1];
    row[0] = BigUint::one();
    for m in 1..=n {
        for j in (1..=k.min(m)).rev() {
            row[j] = &row[j] * BigUint::from(j) + &row[j - 1];
        }
        row[0] = BigUint::zero();
    }
    Ok(row[k].clone())
}

/// Scalars the Bell recurrence can run on: `f64` or exact rationals.
pub trait BellScalar: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

impl BellScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl BellScalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

/// Value of one partial exponential Bell polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct BellEvaluation<T> {
    pub n: usize,
    pub k: usize,
    pub value: T,
}

/// Table `t[n][k] = B_{n,k}(x_1, x_2, …)` for `0 ≤ k ≤ n ≤ n_max`.
///
/// `x[0]` holds `x_1`. Entries that would need `x_i` beyond the slice are
/// computed with those `x_i` taken as zero, so callers must pass at least
/// `n_max` values when they need the full triangle.
pub fn bell_table<T: BellScalar>(n_max: usize, x: &[T]) -> Vec<Vec<T>> {
    // Pascal rows in T keep the rational path exact.
    let mut binom: Vec<Vec<T>> = Vec::with_capacity(n_max + 1);
    binom.push(vec![T::one()]);
    for m in 1..=n_max {
        let prev = &binom[m - 1];
        let mut row = vec![T::one(); m + 1];
        for j in 1..m {
            row[j] = prev[j - 1].add(&prev[j]);
        }
        binom.push(row);
    }

    let mut table: Vec<Vec<T>> = Vec::with_capacity(n_max + 1);
    table.push(vec![T::one()]);
    for n in 1..=n_max {
        let mut row = vec![T::zero(); n + 1];
        for k in 1..=n {
            let mut acc = T::zero();
            for i in 1..=(n - k + 1) {
                let Some(xi) = x.get(i - 1) else { break };
                let prev = &table[n - i];
                if k > prev.len() {
                    continue;
                }
                let term = binom[n - 1][i - 1].mul(xi).mul(&prev[k - 1]);
                acc = acc.add(&term);
            }
            row[k] = acc;
        }
        table.push(row);
    }
    table
}

/// Partial exponential Bell polynomial `B_{n,k}(x_1, …, x_{n-k+1})`.
pub fn bell_partial<T: BellScalar>(n: usize, k: usize, x: &[T]) -> Result<BellEvaluation<T>> {
    if n == 0 || k == 0 {
        return Err(Error::Argument(format!("B_{{{n},{k}}} needs n, k >= 1")));
    }
    if k > n {
        return Ok(BellEvaluation { n, k, value: T::zero() });
    }
    if x.len() < n - k + 1 {
        return Err(Error::Argument(format!(
            "B_{{{n},{k}}} needs {} arguments, got {}",
            n - k + 1,
            x.len()
        )));
    }
    let table = bell_table(n, &x[..n - k + 1]);
    Ok(BellEvaluation { n, k, value: table[n][k].clone() })
}

/// Exact binomial coefficient.
pub fn binomial_exact(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Lossy conversion of a rational to the nearest double.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorialDirection {
    Rising,
    Falling,
}

/// `[x]_{k↑}` or `[x]_{k↓}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorialKind {
    pub direction: FactorialDirection,
    pub order: u32,
}

impl FactorialKind {
    pub const fn rising(order: u32) -> Self {
        Self { direction: FactorialDirection::Rising, order }
    }
    pub const fn falling(order: u32) -> Self {
        Self { direction: FactorialDirection::Falling, order }
    }
}

/// Product form of the rising or falling factorial.
pub fn factorial_poly(x: f64, kind: FactorialKind) -> f64 {
    let step = match kind.direction {
        FactorialDirection::Rising => 1.0,
        FactorialDirection::Falling => -1.0,
    };
    let mut acc = 1.0;
    let mut factor = x;
    for _ in 0..kind.order {
        acc *= factor;
        factor += step;
    }
    acc
}

/// Harmonic number `H_n`, summed from the smallest term up. `H_0 = 0`.
pub fn harmonic(n: u64) -> f64 {
    let mut acc = 0.0;
    for k in (1..=n).rev() {
        acc += 1.0 / k as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        abs(a - b) / abs(b).max(1e-300)
    }

    // Reference values from 30-digit quadrature.
    const EIN_1: f64 = 0.796_599_599_297_053_1;
    const EIN_M1: f64 = -1.317_902_151_454_403_9;
    const EIN_5: f64 = 2.187_801_872_926_908_6;
    const EIN_30: f64 = 3.978_413_046_563_691_3;
    const EIN_M30: f64 = -368_973_209_403.295_78;
    const EI_M1: f64 = -0.219_383_934_395_520_27;
    const EI_07: f64 = 1.064_907_194_624_290_4;
    const EI_M20: f64 = -9.835_525_290_649_882e-11;

    #[test]
    fn ein_reference_values() {
        assert_eq!(ein(0.0).unwrap(), 0.0);
        for (x, want) in [(1.0, EIN_1), (-1.0, EIN_M1), (5.0, EIN_5), (30.0, EIN_30), (-30.0, EIN_M30)] {
            let got = ein(x).unwrap();
            assert!(rel(got, want) < 1e-13, "Ein({x}) = {got}, want {want}");
        }
        assert!(matches!(ein(31.0), Err(Error::Range(_))));
        assert!(matches!(ein(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn ei_reference_values() {
        assert!(rel(ei(-1.0).unwrap(), EI_M1) < 1e-13);
        assert!(rel(ei(0.7).unwrap(), EI_07) < 1e-13);
        assert!(rel(ei(-20.0).unwrap(), EI_M20) < 1e-12);
        assert_eq!(ei(0.0), Err(Error::BranchPoint));
    }

    #[test]
    fn ei_negative_and_decreasing_below_zero() {
        let mut prev = ei(-25.0).unwrap();
        let mut x = -25.0;
        while x < -0.05 {
            x += 0.05;
            let v = ei(x).unwrap();
            assert!(v < 0.0 && v < prev, "Ei not decreasing at {x}");
            prev = v;
        }
    }

    #[test]
    fn lambert_reference_values() {
        assert_eq!(lambert_w0(-1.0 / E).unwrap(), -1.0);
        assert_eq!(lambert_w0(-exp(-1.0)).unwrap(), -1.0);
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!(rel(lambert_w0(1.0).unwrap(), 0.567_143_290_409_783_9) < 1e-14);
        assert!(rel(lambert_w0(-0.3).unwrap(), -0.489_402_227_180_214_9) < 1e-13);
        assert!(rel(lambert_w0(-2.0 * exp(-2.0)).unwrap(), -0.406_375_739_959_959_9) < 1e-13);
        let w = lambert_w0(0.5).unwrap();
        assert!(abs(w * exp(w) - 0.5) <= 1e-13);
        assert!(lambert_w0(-0.4).is_err());
    }

    #[test]
    fn stirling_small_table() {
        assert_eq!(stirling2(5, 2).unwrap(), BigUint::from(15u8));
        assert_eq!(stirling2(7, 7).unwrap(), BigUint::one());
        assert_eq!(stirling2(4, 0).unwrap(), BigUint::zero());
        assert_eq!(stirling2(0, 0).unwrap(), BigUint::one());
        assert_eq!(stirling2(10, 3).unwrap(), BigUint::from(9330u32));
        assert!(matches!(stirling2(65, 3), Err(Error::Range(_))));
    }

    #[test]
    fn bell_edge_cases() {
        let x = [2.0, 3.0, 5.0, 7.0];
        assert_eq!(bell_partial(4, 1, &x).unwrap().value, 7.0);
        assert_eq!(bell_partial(4, 4, &x).unwrap().value, 16.0);
        assert_eq!(bell_partial(3, 5, &x).unwrap().value, 0.0);
        assert!(bell_partial(0, 1, &x).is_err());
        assert!(bell_partial(4, 1, &x[..2]).is_err());
        // B_{4,2} = 4 x1 x3 + 3 x2^2
        assert_eq!(bell_partial(4, 2, &x).unwrap().value, 4.0 * 2.0 * 5.0 + 3.0 * 9.0);
    }

    #[test]
    fn factorials_and_harmonics() {
        assert_eq!(factorial_poly(5.0, FactorialKind::falling(2)), 20.0);
        assert_eq!(factorial_poly(-3.0, FactorialKind::falling(0)), 1.0);
        assert!(rel(factorial_poly(3.5, FactorialKind::rising(3)), 86.625) < 1e-13);
        assert_eq!(harmonic(1), 1.0);
        assert!(rel(harmonic(3), 11.0 / 6.0) < 1e-15);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_exact(10, 3), BigUint::from(120u8));
        assert_eq!(binomial_exact(3, 5), BigUint::zero());
    }

    proptest! {
        #[test]
        fn lambert_round_trip(y in -0.36787944117144f64..10.0) {
            let w = lambert_w0(y).unwrap();
            prop_assert!(abs(w * exp(w) - y) <= 1e-12 * y.abs().max(1.0));
        }

        #[test]
        fn ei_matches_ein_relation(x in -5.0f64..5.0) {
            prop_assume!(abs(x) > 1e-6);
            let direct = EULER_GAMMA + ln(abs(x)) - ein(-x).unwrap();
            prop_assert!(abs(ei(x).unwrap() - direct) <= 1e-11);
        }
    }
}
