//! Subcritical constructions (`0 < λ < 1`): derivative recurrences at 0 and
//! 1, the reciprocal-series route through `A`, and the `G` expansion about 1.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use num_bigint::BigInt;

use crate::extended::Fixed;
use crate::math::{abs, exp, pascal, powi};
use crate::series::{Center, TaylorExpansion};
use crate::summation::{wynn_epsilon, Accelerated, CompensatedSum};

use super::{PmfKind, PmfTable};

/// Accuracy the `G(1)` summation must reach for the expansion to count as converged.
pub const G1_TOLERANCE: f64 = 1e-9;

pub(crate) fn require_subcritical(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda < 1.0) {
        return Err(domain(format!("needs 0 < lambda < 1, got {lambda}")));
    }
    Ok(())
}

/// The fixed point `z₀ > 1` of `h`, where `B` is singular. The `B` series
/// about 0 has radius `z₀` and the `G` series about 1 has radius `z₀ - 1`.
pub fn second_fixed_point(lambda: f64) -> Result<f64> {
    require_subcritical(lambda)?;
    let g = |z: f64| exp(lambda * (z - 1.0)) - z;
    // h(z) - z is smallest at z* = 1 - ln(λ)/λ and grows past it.
    let mut lo = 1.0 - crate::math::ln(lambda) / lambda;
    let mut hi = 2.0 * lo;
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `e^x` in fixed point from its Taylor series (`|x| ≤ 1`).
fn fixed_exp(x: &Fixed) -> Fixed {
    let mut term = Fixed::one();
    let mut sum = Fixed::one();
    let mut k = 1u64;
    loop {
        term = (&term * x).div_int(k);
        if term.is_zero() {
            return sum;
        }
        sum = &sum + &term;
        k += 1;
    }
}

/// Taylor coefficients `B^{(n)}(0)/n!` from
/// `B^{(n+1)} = B^{(n)}{(λ+n-1)e^λ - nλ} - Σ_{k=2}^n C(n,k) B^{(n+1-k)} λ^k`,
/// divided through by `(n+1)!`. The recurrence cancels about one factor of
/// `z₀` per step, so it runs in fixed point.
fn b_coefficients_at0(lambda: f64, order: usize) -> Vec<Fixed> {
    let l = Fixed::from_f64(lambda);
    let el = fixed_exp(&l);
    let one = Fixed::one();
    // λ^k / k!
    let mut w = vec![one.clone()];
    for k in 1..=order {
        let next = (&w[k - 1] * &l).div_int(k as u64);
        w.push(next);
    }
    let mut c = vec![Fixed::zero(); order + 1];
    c[0] = one.clone();
    c[1] = &(&l - &one) * &el;
    for n in 1..order {
        let factor = &(&(&l + &Fixed::from_integer(n as i64 - 1)) * &el) - &l.mul_int(&BigInt::from(n));
        let mut acc = &c[n] * &factor;
        for k in 2..=n {
            acc = &acc - &(&c[n + 1 - k] * &w[k]).mul_int(&BigInt::from(n + 1 - k));
        }
        c[n + 1] = acc.div_int(n as u64 + 1);
    }
    c
}

/// `B^{(n)}(0)`, `n = 0..=order`.
pub fn b_derivs_at0(lambda: f64, order: usize) -> Result<TaylorExpansion> {
    require_subcritical(lambda)?;
    let order = order.max(1);
    let mut factorial = 1.0;
    let d = b_coefficients_at0(lambda, order)
        .iter()
        .enumerate()
        .map(|(n, c)| {
            if n > 0 {
                factorial *= n as f64;
            }
            c.to_f64() * factorial
        })
        .collect();
    TaylorExpansion::new(Center::Zero, d)
}

/// `p` with `1 + p(x) = e^{λx} - x e^λ`: `p_1 = λ - e^λ`, `p_n = λ^n`.
pub fn p_derivs(lambda: f64, order: usize) -> TaylorExpansion {
    let order = order.max(1);
    let mut d = vec![0.0; order + 1];
    d[1] = lambda - exp(lambda);
    for (n, v) in d.iter_mut().enumerate().skip(2) {
        *v = powi(lambda, n as u32);
    }
    TaylorExpansion::new(Center::Zero, d).expect("finite")
}

/// `U_λ = ∫_0^s dx / (h(x) - x)` about 0: `U_λ^{(n)}(0) = e^λ a_{n-1}` with
/// `(1 + p)(1 + a) = 1`. `A = (λ - 1) U_λ`.
pub fn u_lambda_at0(lambda: f64, order: usize) -> Result<TaylorExpansion> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda <= 1.0) {
        return Err(domain(format!("needs 0 < lambda <= 1, got {lambda}")));
    }
    let order = order.max(2);
    let a = p_derivs(lambda, order - 1).reciprocal_unit()?;
    let mut integrand = a.derivs().to_vec();
    integrand[0] = 1.0;
    let integrand = TaylorExpansion::new(Center::Zero, integrand)?.scale(exp(lambda))?;
    Ok(integrand.integrate_from_center())
}

/// `A^{(n)}(0) = (λ-1)e^λ a_{n-1}`.
pub fn a_derivs_at0(lambda: f64, order: usize) -> Result<TaylorExpansion> {
    require_subcritical(lambda)?;
    u_lambda_at0(lambda, order)?.scale(lambda - 1.0)
}

/// Limit conditional law `f_n = -B^{(n)}(0) / n!`, `n = 1..=order`.
pub fn lcl_pmf(lambda: f64, order: usize) -> Result<PmfTable> {
    require_subcritical(lambda)?;
    let coeffs = b_coefficients_at0(lambda, order.max(1));
    let mut entries = Vec::with_capacity(order);
    for (n, c) in coeffs.iter().enumerate().skip(1) {
        let f = -c.to_f64();
        if f < 0.0 {
            return Err(Error::Numerical(format!("negative LCL mass f_{n} = {f:e}")));
        }
        entries.push((n, f));
    }
    Ok(PmfTable { kind: PmfKind::Lcl, lambda, entries })
}

/// `g^{(n)}(1) = (λ/(1-λ)) λ^n / (n+1)` and `b` with `1/(1 - g) = 1 + b`,
/// `b_n = Σ_{k=1}^n C(n,k) g^{(k)}(1) b_{n-k}`, `b_0 = 1` (stored as 0).
pub fn g_b_at1(lambda: f64, order: usize) -> Result<(TaylorExpansion, TaylorExpansion)> {
    require_subcritical(lambda)?;
    let order = order.max(1);
    let r = lambda / (1.0 - lambda);
    let mut g = vec![0.0; order + 1];
    for (n, v) in g.iter_mut().enumerate().skip(1) {
        *v = r * powi(lambda, n as u32) / (n + 1) as f64;
    }
    let binom = pascal(order);
    let mut b = vec![0.0; order + 1];
    b[0] = 1.0;
    for n in 1..=order {
        // All terms are positive.
        b[n] = (1..=n).map(|k| binom[n][k] * g[k] * b[n - k]).sum();
    }
    b[0] = 0.0;
    Ok((TaylorExpansion::new(Center::One, g)?, TaylorExpansion::new(Center::One, b)?))
}

/// `G(s) = log(B(s)/(1-s))` expanded about 1:
/// `G(s) = G(1) + Σ c_n (s-1)^n`, `c_n = b_n / (n·n!)`.
///
/// The coefficients are held in 1024-bit fixed point and every evaluation
/// goes through the epsilon algorithm on fixed-point partial sums, so the
/// expansion stays usable at `s = 0` when its radius `z₀ - 1` is below 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GSeries {
    lambda: f64,
    /// `c_1..c_N` (index 0 unused).
    coeffs: Vec<Fixed>,
    g1: Accelerated,
    b: TaylorExpansion,
}

impl GSeries {
    pub fn new(lambda: f64, order: usize) -> Result<Self> {
        require_subcritical(lambda)?;
        let order = order.max(2);
        // β_n = b_n / n! obeys β_n = Σ_k γ_k β_{n-k}, γ_k = g^{(k)}(1) / k!.
        let lam = Fixed::from_f64(lambda);
        let r = lam
            .checked_div(&(&Fixed::one() - &lam))
            .ok_or_else(|| domain("lambda = 1"))?;
        let mut gamma = vec![Fixed::zero(); order + 1];
        let mut lam_pow_over_fact = Fixed::one(); // λ^k / (k+1)!
        for (k, gk) in gamma.iter_mut().enumerate().skip(1) {
            lam_pow_over_fact = (&lam_pow_over_fact * &lam).div_int((k + 1) as u64);
            *gk = &r * &lam_pow_over_fact;
        }
        let mut beta = vec![Fixed::zero(); order + 1];
        beta[0] = Fixed::one();
        for n in 1..=order {
            let mut acc = Fixed::zero();
            for k in 1..=n {
                acc = &acc + &(&gamma[k] * &beta[n - k]);
            }
            beta[n] = acc;
        }
        let mut coeffs = vec![Fixed::zero(); order + 1];
        let mut b = vec![0.0; order + 1];
        let mut fact = 1.0;
        for n in 1..=order {
            coeffs[n] = beta[n].div_int(n as u64);
            fact *= n as f64;
            b[n] = beta[n].to_f64() * fact;
        }
        let b = TaylorExpansion::new(Center::One, b)?;
        // G(1) = -Σ c_n (-1)^n, the value that makes G(0) = 0.
        let minus_one = Fixed::from_integer(-1);
        let mut g1 = wynn_epsilon(&fixed_partial_sums(&coeffs, &minus_one));
        g1.value = -g1.value;
        Ok(Self { lambda, coeffs, g1, b })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `b_1..b_N` about 1.
    pub fn b(&self) -> &TaylorExpansion {
        &self.b
    }

    /// `G(1)`.
    pub fn g1(&self) -> f64 {
        self.g1.value
    }

    /// Error estimate of the `G(1)` summation; since `G(0) = G(1) - Σ c_n (-1)^{n-1}`
    /// this is also the size of the `G(0)` residual.
    pub fn g0_residual(&self) -> f64 {
        self.g1.error
    }

    pub fn converged(&self) -> bool {
        self.g1.error <= G1_TOLERANCE
    }

    /// `G^{(n)}(1) = b_n / n`, `G(1)` first.
    pub fn derivs_at1(&self) -> TaylorExpansion {
        let mut d: Vec<f64> = self.b.derivs().iter().enumerate().map(|(n, &b)| if n == 0 { 0.0 } else { b / n as f64 }).collect();
        d[0] = self.g1.value;
        TaylorExpansion::new(Center::One, d).expect("finite")
    }

    /// Plain partial sums of `Σ (-1)^{n-1} c_n`, i.e. the `G(1)` sequence.
    pub fn g1_partial_sums(&self) -> Vec<f64> {
        let minus_one = Fixed::from_integer(-1);
        fixed_partial_sums(&self.coeffs, &minus_one).iter().map(|p| -p.to_f64()).collect()
    }

    /// `G(s)` with its summation error estimate.
    pub fn eval(&self, s: f64) -> Accelerated {
        if s == 1.0 {
            return self.g1;
        }
        let x = Fixed::from_f64(s - 1.0);
        let acc = wynn_epsilon(&fixed_partial_sums(&self.coeffs, &x));
        Accelerated { value: self.g1.value + acc.value, error: acc.error + self.g1.error, column: acc.column }
    }

    /// `G'(s) = Σ n c_n (s-1)^{n-1}`.
    pub fn derivative(&self, s: f64) -> Accelerated {
        let x = Fixed::from_f64(s - 1.0);
        let mut pow = Fixed::one();
        let mut acc = Fixed::zero();
        let mut sums = Vec::with_capacity(self.order());
        for n in 1..=self.order() {
            acc = &acc + &(&self.coeffs[n].mul_int(&(n as u64).into()) * &pow);
            sums.push(acc.clone());
            pow = &pow * &x;
        }
        wynn_epsilon(&sums)
    }

    /// `B(s) = (1 - s) e^{G(s)}`, exactly 0 at `s = 1`.
    pub fn b_value(&self, s: f64) -> Accelerated {
        if s == 1.0 {
            return Accelerated { value: 0.0, error: 0.0, column: 0 };
        }
        let g = self.eval(s);
        let v = (1.0 - s) * exp(g.value);
        Accelerated { value: v, error: abs(v) * g.error, column: g.column }
    }
}

/// `Σ_{n≤m} c_n x^n` for `m = 1..N`.
fn fixed_partial_sums(coeffs: &[Fixed], x: &Fixed) -> Vec<Fixed> {
    let mut pow = Fixed::one();
    let mut acc = Fixed::zero();
    let mut out = Vec::with_capacity(coeffs.len().saturating_sub(1));
    for c in &coeffs[1..] {
        pow = &pow * x;
        acc = &acc + &(c * &pow);
        out.push(acc.clone());
    }
    out
}

/// `B^{(n)}(1)`: `B(1) = 0`, `B'(1) = -e^{G(1)}`, then
/// `B^{(n)}(1)(n-1)(1-λ) = Σ_{k=2}^n C(n,k) B^{(n+1-k)}(1) λ^k`.
pub fn b_derivs_at1(lambda: f64, order: usize) -> Result<TaylorExpansion> {
    let g = GSeries::new(lambda, order)?;
    b_derivs_at1_from(&g, order)
}

pub(crate) fn b_derivs_at1_from(g: &GSeries, order: usize) -> Result<TaylorExpansion> {
    let lambda = g.lambda();
    let order = order.max(1);
    let binom = pascal(order);
    let mut d = vec![0.0; order + 1];
    d[1] = -exp(g.g1());
    for n in 2..=order {
        let mut acc = CompensatedSum::new();
        for k in 2..=n {
            acc.add(binom[n][k] * d[n + 1 - k] * powi(lambda, k as u32));
        }
        d[n] = acc.value() / ((n - 1) as f64 * (1.0 - lambda));
    }
    TaylorExpansion::new(Center::One, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{quadrature_integral, IntegralKind};
    use crate::specfun::{bell_table, rational_to_f64};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rel(a: f64, b: f64) -> f64 {
        abs(a - b) / abs(b).max(1e-300)
    }

    #[test]
    fn singular_points() {
        for (lambda, want) in [(1.0 / 6.0, 18.5), (0.5, 3.51), (17.0 / 18.0, 1.1199)] {
            let z = second_fixed_point(lambda).unwrap();
            assert!((z - want).abs() < 0.01 * want, "lambda={lambda}: {z}");
            assert!((exp(lambda * (z - 1.0)) - z).abs() < 1e-12 * z);
        }
    }

    #[test]
    fn b_at_zero_low_orders() {
        for lambda in [1.0 / 6.0, 0.5, 17.0 / 18.0] {
            let b = b_derivs_at0(lambda, 10).unwrap();
            let el = exp(lambda);
            let b1 = (lambda - 1.0) * el;
            assert_eq!(b.d(0), 1.0);
            assert!(rel(b.d(1), b1) < 1e-15);
            assert!(rel(b.d(2), b1 * lambda * (el - 1.0)) < 1e-14);
            let b3 = b1 * lambda * ((1.0 + lambda) * el * el - (1.0 + 3.0 * lambda) * el + lambda);
            assert!(rel(b.d(3), b3) < 1e-13);
        }
        assert!(b_derivs_at0(1.0, 10).is_err());
    }

    #[test]
    fn a_series_low_orders() {
        let lambda = 0.5;
        let a = a_derivs_at0(lambda, 20).unwrap();
        let el = exp(lambda);
        assert_eq!(a.d(0), 0.0);
        assert!(rel(a.d(1), (lambda - 1.0) * el) < 1e-15);
        assert!(rel(a.d(2), (lambda - 1.0) * el * (el - lambda)) < 1e-15);
        assert_eq!(a.order(), 20);
        let u = u_lambda_at0(1.0, 10).unwrap();
        assert!(rel(u.d(1), crate::math::E) < 1e-15);
    }

    #[test]
    fn a_series_matches_quadrature() {
        let a = a_derivs_at0(0.5, 80).unwrap();
        let e = a.eval(0.5);
        let q = quadrature_integral(IntegralKind::A, 0.5, 0.5).unwrap();
        assert!(abs(e.value - q) < 1e-10);
    }

    #[test]
    fn lcl_first_masses() {
        let lambda = 0.5;
        let pmf = lcl_pmf(lambda, 80).unwrap();
        let f1 = (1.0 - lambda) * exp(lambda);
        assert!(rel(pmf.entries[0].1, f1) < 1e-15);
        assert!(rel(pmf.entries[1].1, lambda * (exp(lambda) - 1.0) * f1 / 2.0) < 1e-14);
        let total: f64 = pmf.entries.iter().map(|e| e.1).sum();
        assert!(total <= 1.0 + 1e-12 && 1.0 - total <= 1e-8);
    }

    #[test]
    fn lcl_masses_decay_geometrically() {
        // f_{n+1}/f_n → 1/z₀; f64 arithmetic loses every digit of f_n by n ≈ 23 at λ = 1/3.
        for lambda in [1.0 / 6.0, 1.0 / 3.0, 0.5, 17.0 / 18.0] {
            let pmf = lcl_pmf(lambda, 120).unwrap();
            let z0 = second_fixed_point(lambda).unwrap();
            let e = &pmf.entries;
            assert!(e.iter().all(|x| x.1 > 0.0), "λ={lambda}");
            let ratio = e[119].1 / e[118].1;
            assert!(abs(ratio * z0 - 1.0) < 0.05, "λ={lambda}: {}", ratio * z0);
        }
    }

    #[test]
    fn b_sequence_closed_forms_and_bell_form() {
        let lambda = 0.5;
        let r = lambda / (1.0 - lambda);
        let (g, b) = g_b_at1(lambda, 12).unwrap();
        assert_eq!(g.d(0), 0.0);
        assert!(rel(b.d(1), lambda * lambda / (2.0 * (1.0 - lambda))) < 1e-15);
        assert!(rel(b.d(2), lambda * lambda * r * (1.0 / 3.0 + 0.5 * r)) < 1e-15);
        assert!(rel(b.d(3), lambda.powi(3) * r * (0.25 + r + 0.75 * r * r)) < 1e-14);
        // b_n = λ^n Σ_k r^k k! B_{n,k}(g•), exact with λ = 1/2.
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let gdot: Vec<BigRational> = (1..=12).map(|m| q(1, m + 1)).collect();
        let table = bell_table(12, &gdot);
        for n in 1..=12usize {
            let mut sum = q(0, 1);
            let mut kfact = q(1, 1);
            for k in 1..=n {
                kfact *= BigRational::from_integer(BigInt::from(k));
                sum += &kfact * &table[n][k]; // r = 1
            }
            let want = rational_to_f64(&(sum * q(1, 1 << n)));
            assert!(rel(b.d(n), want) < 1e-14, "n={n}");
        }
    }

    #[test]
    fn g_series_constants() {
        let lambda = 0.5;
        let g = GSeries::new(lambda, 80).unwrap();
        assert!(g.converged());
        assert!(g.g0_residual() <= 1e-9);
        assert!(g.g1() > 0.0);
        let d = g.derivs_at1();
        assert!(rel(d.d(1), lambda * lambda / (2.0 * (1.0 - lambda))) < 1e-14);
        let g0 = g.eval(0.0).value;
        assert!(abs(g0) < 1e-12);
        let gp0 = g.derivative(0.0).value;
        assert!(abs(gp0 - (1.0 - exp(lambda) * (1.0 - lambda))) < 1e-10);
    }

    #[test]
    fn g1_partial_sums_bracket_the_limit() {
        let g = GSeries::new(0.5, 80).unwrap();
        let sums = g.g1_partial_sums();
        let limit = g.g1();
        for w in sums.windows(2).take(30) {
            let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            assert!(lo <= limit + 1e-15 && limit <= hi + 1e-15);
        }
    }

    #[test]
    fn b_at_one_recurrence() {
        let lambda = 0.5;
        let g = GSeries::new(lambda, 80).unwrap();
        let b = b_derivs_at1(lambda, 80).unwrap();
        assert_eq!(b.d(0), 0.0);
        assert!(b.d(1) < 0.0 && rel(b.d(1), -exp(g.g1())) < 1e-15);
        assert!(rel(b.d(2), b.d(1) * lambda * lambda / (1.0 - lambda)) < 1e-15);
        let via_g = g.b_value(0.9).value;
        assert!(abs(b.eval(0.9).value - via_g) < 1e-8);
    }

    #[test]
    fn b_via_g_boundary_values() {
        let g = GSeries::new(0.5, 80).unwrap();
        assert_eq!(g.b_value(1.0).value, 0.0);
        assert!(abs(g.b_value(0.0).value - 1.0) < 1e-9);
        let a = a_derivs_at0(0.5, 80).unwrap().eval(0.5).value;
        assert!(abs(g.b_value(0.5).value - exp(a)) < 1e-8);
    }

    #[test]
    fn g_series_beyond_radius() {
        // z0 - 1 ≈ 0.12 for λ = 17/18; s = 0 is far outside the disc.
        let lambda = 17.0 / 18.0;
        let g = GSeries::new(lambda, 80).unwrap();
        assert!(g.converged(), "residual {}", g.g0_residual());
        for s in [0.05, 0.5, 0.95] {
            let want = quadrature_integral(IntegralKind::A, lambda, s).unwrap() - crate::math::ln(1.0 - s);
            assert!(abs(g.eval(s).value - want) < 1e-9, "s={s}");
        }
    }
}
