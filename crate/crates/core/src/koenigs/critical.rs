//! Critical case `λ = 1`: `C` at 0, the invariant measure, and the
//! expansion of `U` around its pole at 1.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{domain, Error, Result};
use crate::math::{abs, exp, ln, pascal, pow, E};
use crate::series::{Center, TaylorExpansion};
use crate::specfun::binomial_exact;
use crate::summation::CompensatedSum;

use super::subcritical::u_lambda_at0;
use super::{PmfKind, PmfTable};

/// `C^{(n)}(0)`: `C(0) = 1`, `C'(0) = e`,
/// `C^{(n+1)} = C^{(n)}{(n+1)e - n} - Σ_{k=2}^n C(n,k) C^{(n+1-k)}`.
pub fn c_derivs_at0(order: usize) -> TaylorExpansion {
    let order = order.max(1);
    let binom = pascal(order);
    let mut d = vec![0.0; order + 1];
    d[0] = 1.0;
    d[1] = E;
    for n in 1..order {
        let nf = n as f64;
        let mut acc = CompensatedSum::new();
        acc.add(d[n] * ((nf + 1.0) * E - nf));
        for k in 2..=n {
            acc.add(-binom[n][k] * d[n + 1 - k]);
        }
        d[n + 1] = acc.value();
    }
    TaylorExpansion::new(Center::Zero, d).expect("finite")
}

/// `u_n = U^{(n)}(0) / n!` for `n = 1..=order`.
pub fn invariant_measure(order: usize) -> Result<PmfTable> {
    let u = u_lambda_at0(1.0, order.max(1))?;
    let coeffs = u.coefficients();
    let mut entries = Vec::with_capacity(order);
    for (n, &c) in coeffs.iter().enumerate().skip(1).take(order) {
        if !(c >= 0.0) {
            return Err(Error::Numerical(format!("invariant measure u_{n} = {c:e} is negative")));
        }
        entries.push((n, c));
    }
    Ok(PmfTable { kind: PmfKind::InvariantMeasure, lambda: 1.0, entries })
}

/// `φ_k = 1/((k+1)(k+2))`, the derivatives at 1 of `φ` in
/// `e^{s-1} - s = (s-1)²/2 · (1 + 2φ(s))`.
pub fn phi(k: usize) -> f64 {
    1.0 / ((k + 1) as f64 * (k + 2) as f64)
}

/// `c_n`, the derivatives at 1 of `1/(1 + 2φ)`, exactly.
pub fn c_exact(order: usize) -> Vec<BigRational> {
    let mut c = Vec::with_capacity(order + 1);
    c.push(BigRational::from_integer(BigInt::from(1)));
    for n in 1..=order {
        let mut acc = BigRational::from_integer(BigInt::from(0));
        for k in 1..=n {
            let w = BigRational::new(
                BigInt::from(binomial_exact(n as u32, k as u32)),
                BigInt::from((k + 1) * (k + 2)),
            );
            acc += w * &c[n - k];
        }
        c.push(acc * BigRational::from_integer(BigInt::from(-2)));
    }
    c
}

/// `U` and `C` near the pole at 1, built from
/// `U(s) = 2/(1-s) - (2/3)ln(1-s) + (s-1)/18 + Σ_{k≥3} 2c_k (s-1)^{k-1}/(k!(k-1))`
/// minus its value at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalNear1 {
    /// `c_0..c_N`.
    c: Vec<f64>,
    /// Tail coefficients `2c_k/(k!(k-1))` of `(s-1)^{k-1}`, `k ≥ 3`.
    tail: Vec<f64>,
    offset: f64,
}

impl CriticalNear1 {
    pub fn new(order: usize) -> Self {
        let order = order.max(3);
        let binom = pascal(order);
        let mut c = vec![0.0; order + 1];
        c[0] = 1.0;
        for n in 1..=order {
            let mut acc = CompensatedSum::new();
            for k in 1..=n {
                acc.add(binom[n][k] * c[n - k] * phi(k));
            }
            c[n] = -2.0 * acc.value();
        }
        let mut tail = Vec::with_capacity(order - 2);
        let mut fact = 2.0;
        for (k, &ck) in c.iter().enumerate().skip(3) {
            fact *= k as f64;
            tail.push(2.0 * ck / (fact * (k - 1) as f64));
        }
        let mut out = Self { c, tail, offset: 0.0 };
        out.offset = out.unnormalised(0.0);
        out
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    fn unnormalised(&self, s: f64) -> f64 {
        let y = s - 1.0;
        let mut acc = CompensatedSum::new();
        acc.add(-2.0 / y);
        acc.add(-(2.0 / 3.0) * ln(-y));
        acc.add(y / 18.0);
        let mut yk = y;
        for t in &self.tail {
            yk *= y;
            acc.add(t * yk);
        }
        acc.value()
    }

    /// Size of the last tail term at `s`, relative to the value.
    pub fn tail_estimate(&self, s: f64) -> f64 {
        let y = s - 1.0;
        let n = self.tail.len();
        abs(self.tail[n - 1] * pow(y, (n + 1) as f64)) / abs(self.u(s)).max(1.0)
    }

    /// `U(s)`, `U(0) = 0`.
    pub fn u(&self, s: f64) -> f64 {
        self.unnormalised(s) - self.offset
    }

    /// `C(s) = e^{U(s)}`, `C(0) = 1`.
    pub fn c_value(&self, s: f64) -> f64 {
        exp(self.u(s))
    }
}

/// `(U(s), C(s))` by the expansion about 1, `0 ≤ s < 1`.
pub fn u_c_near1_critical(s: f64, order: usize) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&s) {
        return Err(domain(format!("needs 0 <= s < 1, got {s}")));
    }
    let near = CriticalNear1::new(order);
    let u = near.u(s);
    Ok((u, exp(u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{quadrature_integral, IntegralKind};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn c_at_zero() {
        let c = c_derivs_at0(10);
        assert_eq!(c.d(0), 1.0);
        assert_eq!(c.d(1), E);
        assert!((c.d(2) - E * (2.0 * E - 1.0)).abs() < 1e-14);
        let u = u_lambda_at0(1.0, 10).unwrap();
        assert!((c.d(2) - (u.d(1) * u.d(1) + u.d(2))).abs() < 1e-13);
        let via_exp = u.exp_series().unwrap();
        for n in 0..=10 {
            assert!((via_exp.d(n) - c.d(n)).abs() <= 1e-11 * c.d(n).abs(), "n={n}");
        }
    }

    #[test]
    fn measure_first_entries() {
        let m = invariant_measure(50).unwrap();
        assert_eq!(m.entries.len(), 50);
        assert_eq!(m.entries[0].0, 1);
        assert!((m.entries[0].1 - E).abs() < 1e-15);
        assert!((m.entries[1].1 - E * (E - 1.0) / 2.0).abs() < 1e-14);
        assert!(m.entries.iter().all(|e| e.1 > 0.0));
    }

    #[test]
    fn phi_and_c_values() {
        assert_eq!(phi(1), 1.0 / 6.0);
        assert_eq!(phi(2), 1.0 / 12.0);
        let c = c_exact(3);
        assert_eq!(c[1], q(-1, 3));
        assert_eq!(c[2], q(1, 18));
        assert_eq!(c[3], q(1, 90));
        let near = CriticalNear1::new(10);
        for n in 0..=3 {
            assert!((near.c()[n] - crate::specfun::rational_to_f64(&c[n])).abs() < 1e-16);
        }
    }

    #[test]
    fn reciprocal_identity() {
        // (1 + 2φ) · Σ c_n y^n/n! = 1 on the derivative level.
        let near = CriticalNear1::new(20);
        let binom = pascal(20);
        for n in 1..=20 {
            let s: f64 = near.c()[n] + (1..=n).map(|k| 2.0 * binom[n][k] * phi(k) * near.c()[n - k]).sum::<f64>();
            assert!(s.abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn matches_quadrature() {
        assert_eq!(u_c_near1_critical(0.0, 80).unwrap(), (0.0, 1.0));
        for s in [0.1, 0.5, 0.7, 0.95, 0.999] {
            let (u, c) = u_c_near1_critical(s, 80).unwrap();
            let want = quadrature_integral(IntegralKind::U, 1.0, s).unwrap();
            assert!((u - want).abs() < 1e-10 * want.max(1.0), "s={s}: {u} vs {want}");
            if want < 100.0 {
                assert!((c - exp(want)).abs() < 1e-9 * exp(want));
            }
        }
        assert!(u_c_near1_critical(1.0, 80).is_err());
    }
}
