//! Explicit expansions of `U_λ`, `A`, `G` and `D` through exponential
//! integrals.
//!
//! None of the outer sums converge in floating point: the terms shrink for a
//! while and then grow again through cancellation. Each sum is therefore cut
//! at the first local minimum of its increments. Alongside every value the
//! sum of absolute values cancelled into it is carried, which gives a
//! rounding estimate; the interval of `s` on which the result is trustworthy
//! is fixed from that estimate and a comparison with quadrature when a
//! solution is built.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::math::{abs, exp, ln, pascal, powi};
use crate::specfun::{ei, ein, factorial_poly, FactorialKind};
use crate::summation::CompensatedSum;

/// Largest number of outer terms accepted.
pub const MAX_EXPLICIT_TERMS: usize = 40;

/// Default number of outer terms.
pub const DEFAULT_EXPLICIT_TERMS: usize = 30;

/// An outer sum cut where its increments stop decreasing. Past that point
/// they are rounding noise from the cancelling inner sums, and the smallest
/// of them is not a stable place to stop.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitSum {
    pub value: f64,
    /// Number of outer terms in `value`.
    pub terms: usize,
    pub min_increment: f64,
    /// The last increment kept is below `1e-9 · max(1, |value|)`.
    pub converged: bool,
    /// Rounding error estimate: machine epsilon times the summed magnitude
    /// of everything cancelled into the kept increments.
    pub rounding: f64,
    pub partial_sums: Vec<f64>,
}

impl ExplicitSum {
    fn from_increments(incs: &[Tracked], first: usize) -> Self {
        let mags: Vec<f64> = incs.iter().map(|x| x.mag).collect();
        let incs: Vec<f64> = incs.iter().map(|x| x.value).collect();
        let mut acc = CompensatedSum::new();
        let mut partial_sums = Vec::with_capacity(incs.len());
        for &x in &incs {
            acc.add(x);
            partial_sums.push(acc.value());
        }
        let n = incs.len();
        let mut best = first.min(n - 1);
        // Climb an initial rise, then descend to the first local minimum.
        while best + 1 < n && abs(incs[best + 1]) >= abs(incs[best]) && abs(incs[best]) > 0.0 {
            best += 1;
        }
        while best + 1 < n && abs(incs[best + 1]) < abs(incs[best]) {
            best += 1;
        }
        let value = partial_sums[best];
        let min_increment = abs(incs[best]);
        let rounding = f64::EPSILON * mags[..=best].iter().sum::<f64>();
        Self {
            value,
            terms: best + 1,
            min_increment,
            converged: min_increment <= 1e-9 * abs(value).max(1.0),
            rounding,
            partial_sums,
        }
    }
}

/// A computed value with the sum of absolute values that went into it.
#[derive(Debug, Clone, Copy, Default)]
struct Tracked {
    value: f64,
    mag: f64,
}

impl Tracked {
    fn exact(value: f64) -> Self {
        Self { value, mag: abs(value) }
    }

    fn scale(self, f: f64) -> Self {
        Self { value: self.value * f, mag: self.mag * abs(f) }
    }

    fn sub(self, o: Self) -> Self {
        Self { value: self.value - o.value, mag: self.mag + o.mag }
    }
}

#[derive(Default)]
struct TrackedSum {
    acc: CompensatedSum,
    mag: f64,
}

impl TrackedSum {
    fn add(&mut self, x: Tracked) {
        self.acc.add(x.value);
        self.mag += x.mag;
    }

    fn total(&self) -> Tracked {
        Tracked { value: self.acc.value(), mag: self.mag }
    }
}

fn check_terms(n: usize) -> Result<()> {
    if n == 0 || n > MAX_EXPLICIT_TERMS {
        return Err(Error::Argument(format!("term count must be in 1..={MAX_EXPLICIT_TERMS}, got {n}")));
    }
    Ok(())
}

fn falling(m: usize, i: usize) -> f64 {
    factorial_poly(m as f64, FactorialKind::falling(i as u32))
}

/// `∫_0^s e^{λjx} (1 + e^λ x)^m dx`.
fn poly_exp_integral(lambda: f64, j: usize, m: usize, s: f64) -> Tracked {
    let b = exp(lambda);
    if j == 0 {
        let d = b * (m + 1) as f64;
        return Tracked::exact(powi(1.0 + b * s, (m + 1) as u32) / d).sub(Tracked::exact(1.0 / d));
    }
    let a = lambda * j as f64;
    let antiderivative = |x: f64| {
        let mut acc = TrackedSum::default();
        let mut sign = 1.0;
        for i in 0..=m {
            acc.add(Tracked::exact(
                sign * falling(m, i) * powi(b, i as u32) * powi(1.0 + b * x, (m - i) as u32) / powi(a, (i + 1) as u32),
            ));
            sign = -sign;
        }
        acc.total().scale(exp(a * x))
    };
    antiderivative(s).sub(antiderivative(0.0))
}

/// `U_λ(s) = e^λ Σ_k (-1)^k Σ_j C(k,j)(-1)^{k-j} ∫_0^s e^{λjx}(1 + e^λ x)^{k-j} dx`,
/// `0 < λ ≤ 1`. At `λ = 1` this is `U` itself.
pub fn u_lambda_explicit(lambda: f64, s: f64, terms: usize) -> Result<ExplicitSum> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda <= 1.0) {
        return Err(domain(format!("needs 0 < lambda <= 1, got {lambda}")));
    }
    if !(0.0..1.0).contains(&s) {
        return Err(domain(format!("needs 0 <= s < 1, got {s}")));
    }
    check_terms(terms)?;
    let binom = pascal(terms);
    let el = exp(lambda);
    let mut incs = Vec::with_capacity(terms + 1);
    for k in 0..=terms {
        let mut acc = TrackedSum::default();
        for j in 0..=k {
            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(poly_exp_integral(lambda, j, k - j, s).scale(sign * binom[k][j]));
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        incs.push(acc.total().scale(sign * el));
    }
    Ok(ExplicitSum::from_increments(&incs, 1))
}

/// `A = (λ - 1) U_λ`, `0 < λ < 1`.
pub fn a_explicit_ei(lambda: f64, s: f64, terms: usize) -> Result<ExplicitSum> {
    if !(lambda < 1.0) {
        return Err(domain(format!("A needs lambda < 1, got {lambda}")));
    }
    let mut out = u_lambda_explicit(lambda, s, terms)?;
    let f = lambda - 1.0;
    out.value *= f;
    out.min_increment *= abs(f);
    out.rounding *= abs(f);
    for p in &mut out.partial_sums {
        *p *= f;
    }
    Ok(out)
}

/// Antiderivative of `e^{cy} / y^{k+1}` on `y < 0`.
fn e_antiderivative(k: usize, c: f64, y: f64) -> Result<Tracked> {
    if c == 0.0 {
        return Ok(Tracked::exact(if k == 0 { ln(abs(y)) } else { powi(y, k as u32).recip() / -(k as f64) }));
    }
    let eic = ei(c * y)?;
    if k == 0 {
        return Ok(Tracked::exact(eic));
    }
    let mut acc = TrackedSum::default();
    let ecy = exp(c * y);
    let mut kfact = 1.0;
    for l in 1..=k {
        acc.add(Tracked::exact(-powi(c, (l - 1) as u32) * ecy / (falling(k, l) * powi(y, (k + 1 - l) as u32))));
        kfact *= l as f64;
    }
    acc.add(Tracked::exact(powi(c, k as u32) * eic / kfact));
    Ok(acc.total())
}

fn check_g_args(lambda: f64, s: f64, terms: usize) -> Result<()> {
    super::subcritical::require_subcritical(lambda)?;
    if s == 1.0 {
        return Err(Error::BranchPoint);
    }
    if !(0.0..1.0).contains(&s) {
        return Err(domain(format!("needs 0 <= s < 1, got {s}")));
    }
    check_terms(terms)
}

/// `λ^{-k} Σ_j C(k,j)(-1)^{k-j} [E(k, λj, s-1) - E(k, λj, -1)]`, `k = 0..=n`.
fn method2_inner(lambda: f64, s: f64, n: usize, binom: &[Vec<f64>]) -> Result<Vec<Tracked>> {
    let mut inner = vec![Tracked::default(); n + 1];
    for (k, slot) in inner.iter_mut().enumerate() {
        let mut acc = TrackedSum::default();
        for j in 0..=k {
            let c = lambda * j as f64;
            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            let e = e_antiderivative(k, c, s - 1.0)?.sub(e_antiderivative(k, c, -1.0)?);
            acc.add(e.scale(sign * binom[k][j]));
        }
        *slot = acc.total().scale(powi(lambda, k as u32).recip());
    }
    Ok(inner)
}

/// `G(s) = Σ_n r^n Σ_k C(n,k)(-1)^{n-k} λ^{-k} Σ_j C(k,j)(-1)^{k-j} ∫_0^s e^{λj(x-1)}/(x-1)^{k+1} dx`
/// with `r = λ/(1-λ)`.
pub fn g_explicit_method2(lambda: f64, s: f64, terms: usize) -> Result<ExplicitSum> {
    check_g_args(lambda, s, terms)?;
    let binom = pascal(terms);
    let inner = method2_inner(lambda, s, terms, &binom)?;
    let r = lambda / (1.0 - lambda);
    let mut incs = Vec::with_capacity(terms);
    for n in 1..=terms {
        let mut acc = TrackedSum::default();
        for k in 0..=n {
            let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(inner[k].scale(sign * binom[n][k]));
        }
        incs.push(acc.total().scale(powi(r, n as u32)));
    }
    Ok(ExplicitSum::from_increments(&incs, 0))
}

/// First term of [`g_explicit_method2`].
pub fn g_method2_first_term(lambda: f64, s: f64) -> Result<f64> {
    check_g_args(lambda, s, 1)?;
    let binom = pascal(1);
    let inner = method2_inner(lambda, s, 1, &binom)?;
    Ok(lambda / (1.0 - lambda) * (inner[1].value - inner[0].value))
}

/// The same first term in closed form: `F(s) - F(0)` with
/// `F(x) = (e^{λ(x-1)} - 1)/(1-λ) · (-1/(x-1)) - (λ/(1-λ)) Ein(λ(1-x))`.
pub fn ein_closed_form_n1(lambda: f64, s: f64) -> Result<f64> {
    check_g_args(lambda, s, 1)?;
    let f = |x: f64| -> Result<f64> {
        let y = x - 1.0;
        Ok(crate::math::expm1(lambda * y) / (1.0 - lambda) * (-1.0 / y) - lambda / (1.0 - lambda) * ein(-lambda * y)?)
    };
    Ok(f(s)? - f(0.0)?)
}

/// `D(s) = Σ_n Σ_k C(n,k)(-1)^{n-k} ∫_0^s e^{λk(x-1)}/(x-1)^{n+1} dx`, with
/// `B = ((1-s)e^D)^{1-λ}`.
pub fn d_explicit_method1(lambda: f64, s: f64, terms: usize) -> Result<ExplicitSum> {
    check_g_args(lambda, s, terms)?;
    let binom = pascal(terms);
    let mut incs = Vec::with_capacity(terms);
    for n in 1..=terms {
        let mut acc = TrackedSum::default();
        for k in 0..=n {
            let c = lambda * k as f64;
            let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
            let e = e_antiderivative(n, c, s - 1.0)?.sub(e_antiderivative(n, c, -1.0)?);
            acc.add(e.scale(sign * binom[n][k]));
        }
        incs.push(acc.total());
    }
    Ok(ExplicitSum::from_increments(&incs, 0))
}

/// `G` from both expansions.
#[derive(Debug, Clone, PartialEq)]
pub struct GExplicit {
    /// `G = (1-λ)D - λ ln(1-s)` from the `D` expansion.
    pub method1: f64,
    pub d: ExplicitSum,
    pub method2: ExplicitSum,
}

pub fn g_explicit_ei(lambda: f64, s: f64, terms: usize) -> Result<GExplicit> {
    let d = d_explicit_method1(lambda, s, terms)?;
    let method2 = g_explicit_method2(lambda, s, terms)?;
    let method1 = g_from_d(lambda, s, d.value);
    Ok(GExplicit { method1, d, method2 })
}

pub(crate) fn g_from_d(lambda: f64, s: f64, d: f64) -> f64 {
    (1.0 - lambda) * d - lambda * crate::math::log1p(-s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{integrate, quadrature_integral, IntegralKind, Tolerance};
    use crate::math::log1p;

    fn g_quad(lambda: f64, s: f64) -> f64 {
        quadrature_integral(IntegralKind::A, lambda, s).unwrap() - log1p(-s)
    }

    #[test]
    fn zero_at_zero() {
        assert_eq!(u_lambda_explicit(0.5, 0.0, 20).unwrap().value, 0.0);
        assert_eq!(g_explicit_method2(0.5, 0.0, 20).unwrap().value, 0.0);
        assert_eq!(d_explicit_method1(0.5, 0.0, 20).unwrap().value, 0.0);
    }

    #[test]
    fn argument_checks() {
        assert!(u_lambda_explicit(0.5, 0.2, 41).is_err());
        assert!(u_lambda_explicit(1.5, 0.2, 10).is_err());
        assert!(matches!(g_explicit_method2(0.5, 1.0, 10), Err(Error::BranchPoint)));
        assert!(a_explicit_ei(1.0, 0.2, 10).is_err());
    }

    #[test]
    fn antiderivative_is_consistent() {
        let tol = Tolerance { abs: 1e-14, rel: 1e-12 };
        for (k, c) in [(0, 0.5), (1, 0.5), (3, 1.0), (2, 0.0)] {
            let (a, b) = (-1.0, -0.3);
            let want = integrate(|y| exp(c * y) / powi(y, k as u32 + 1), a, b, tol).unwrap().value;
            let got = e_antiderivative(k, c, b).unwrap().sub(e_antiderivative(k, c, a).unwrap());
            assert!((got.value - want).abs() < 1e-11 * want.abs().max(1.0), "k={k} c={c}");
        }
    }

    #[test]
    fn u_and_a_near_zero() {
        for lambda in [1.0 / 3.0, 0.5, 1.0] {
            let want = quadrature_integral(IntegralKind::U, lambda, 0.1).unwrap();
            let got = u_lambda_explicit(lambda, 0.1, 30).unwrap();
            assert!((got.value - want).abs() < 1e-7, "lambda={lambda}");
        }
        let want = quadrature_integral(IntegralKind::A, 0.5, 0.1).unwrap();
        assert!((a_explicit_ei(0.5, 0.1, 30).unwrap().value - want).abs() < 1e-7);
    }

    #[test]
    fn first_term_closed_form() {
        for s in [0.1, 0.5, 0.9] {
            let a = g_method2_first_term(0.5, s).unwrap();
            let b = ein_closed_form_n1(0.5, s).unwrap();
            assert!((a - b).abs() < 1e-12, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn g_methods_against_quadrature() {
        for s in [0.1, 0.5] {
            let want = g_quad(1.0 / 3.0, s);
            let g = g_explicit_ei(1.0 / 3.0, s, 30).unwrap();
            assert!((g.method2.value - want).abs() < 1e-8, "s={s}");
            assert!((g.method1 - want).abs() < 1e-6, "s={s}");
        }
    }
}
