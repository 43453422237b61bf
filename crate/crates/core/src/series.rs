//! Truncated Taylor expansions stored as derivative sequences.
//!
//! An expansion of order `N` about `c` holds `d_0, …, d_N` with
//! `d_n = f^{(n)}(c)`; the coefficient of `(s - c)^n` is `d_n / n!`. Every
//! recurrence of the model is stated on derivatives, so the monomial form
//! only appears inside evaluation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::extended::Fixed;
use crate::math::{abs, pascal};
use crate::specfun::bell_table;
use crate::summation::{partial_sums, wynn_epsilon, Accelerated, CompensatedSum};

/// Expansion point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Center {
    Zero,
    One,
}

impl Center {
    pub fn value(self) -> f64 {
        match self {
            Center::Zero => 0.0,
            Center::One => 1.0,
        }
    }
}

/// Value of a truncated series and a size estimate of what was left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// `|last term| / max(1, |value|)` for plain sums; the scaled
    /// epsilon-table spread for accelerated ones.
    pub tail_estimate: f64,
}

/// How [`TaylorExpansion::eval_with`] sums the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Summation {
    /// Plain compensated partial sum.
    Plain,
    /// Plain sum when the tail is negligible, Wynn epsilon in `f64` otherwise.
    #[default]
    Auto,
    /// Wynn epsilon on 1024-bit fixed-point partial sums.
    Extended,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorExpansion {
    center: Center,
    derivs: Vec<f64>,
}

impl TaylorExpansion {
    /// Order must be at least 1 and every entry finite.
    pub fn new(center: Center, derivs: Vec<f64>) -> Result<Self> {
        if derivs.len() < 2 {
            return Err(Error::Argument("expansion order must be at least 1".into()));
        }
        if let Some(i) = derivs.iter().position(|d| !d.is_finite()) {
            return Err(Error::Numerical(alloc::format!("derivative {i} is not finite")));
        }
        Ok(Self { center, derivs })
    }

    /// The constant function 1.
    pub fn unit(center: Center, order: usize) -> Self {
        let mut derivs = vec![0.0; order.max(1) + 1];
        derivs[0] = 1.0;
        Self { center, derivs }
    }

    /// The function `s - c`.
    pub fn variable(center: Center, order: usize) -> Self {
        let mut derivs = vec![0.0; order.max(1) + 1];
        derivs[1] = 1.0;
        Self { center, derivs }
    }

    pub fn center(&self) -> Center {
        self.center
    }

    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    /// `d_n`, or 0 beyond the truncation order.
    pub fn d(&self, n: usize) -> f64 {
        self.derivs.get(n).copied().unwrap_or(0.0)
    }

    /// Monomial coefficients `d_n / n!`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut inv = 1.0;
        self.derivs
            .iter()
            .enumerate()
            .map(|(n, &d)| {
                if n > 0 {
                    inv /= n as f64;
                }
                d * inv
            })
            .collect()
    }

    fn check_center(&self, other: &Self) -> Result<()> {
        if self.center != other.center {
            return Err(Error::CenterMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_center(other)?;
        let n = self.order().min(other.order());
        let derivs = (0..=n).map(|i| self.derivs[i] + other.derivs[i]).collect();
        Self::new(self.center, derivs)
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        Self::new(self.center, self.derivs.iter().map(|d| d * factor).collect())
    }

    /// Leibniz product, truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_center(other)?;
        let n = self.order().min(other.order());
        let binom = pascal(n);
        let derivs = (0..=n)
            .map(|m| {
                (0..=m)
                    .map(|k| binom[m][k] * self.derivs[k] * other.derivs[m - k])
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        Self::new(self.center, derivs)
    }

    /// For `p` with `p(c) = 0`, the deviation `a` with `(1 + p)(1 + a) = 1`.
    ///
    /// `a_n = -p_n - Σ_{k=1}^{n-1} C(n,k) p_k a_{n-k}`; `a_0 = 0` is stored.
    pub fn reciprocal_unit(&self) -> Result<Self> {
        if self.derivs[0] != 0.0 {
            return Err(Error::Argument("reciprocal_unit needs a zero constant term".into()));
        }
        let n = self.order();
        let binom = pascal(n);
        let p = &self.derivs;
        let mut a = vec![0.0; n + 1];
        for m in 1..=n {
            let mut acc = CompensatedSum::new();
            acc.add(-p[m]);
            for k in 1..m {
                acc.add(-binom[m][k] * p[k] * a[m - k]);
            }
            a[m] = acc.value();
        }
        Self::new(self.center, a)
    }

    /// `g^k` for `g(c) = 0`: `d_n = k! B_{n,k}(d_1, d_2, …)`.
    pub fn pow_egf(&self, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::Argument("pow_egf needs k >= 1".into()));
        }
        if self.derivs[0] != 0.0 {
            return Err(Error::Argument("pow_egf needs a zero constant term".into()));
        }
        let n = self.order();
        let table = bell_table(n, &self.derivs[1..]);
        let mut kfact = 1.0;
        for i in 2..=k {
            kfact *= i as f64;
        }
        let derivs = (0..=n)
            .map(|m| if k <= m { kfact * table[m][k] } else { 0.0 })
            .collect();
        Self::new(self.center, derivs)
    }

    /// `e^A` for `A(c) = 0`, by Faà di Bruno: `d_n = Σ_k B_{n,k}(A', A'', …)`.
    pub fn exp_series(&self) -> Result<Self> {
        if self.derivs[0] != 0.0 {
            return Err(Error::Argument("exp_series needs a zero constant term".into()));
        }
        let n = self.order();
        let table = bell_table(n, &self.derivs[1..]);
        let mut derivs = vec![0.0; n + 1];
        derivs[0] = 1.0;
        for m in 1..=n {
            derivs[m] = table[m][1..=m].iter().copied().collect::<CompensatedSum>().value();
        }
        Self::new(self.center, derivs)
    }

    /// Antiderivative vanishing at the center; the order grows by one.
    pub fn integrate_from_center(&self) -> Self {
        let mut derivs = Vec::with_capacity(self.derivs.len() + 1);
        derivs.push(0.0);
        derivs.extend_from_slice(&self.derivs);
        Self { center: self.center, derivs }
    }

    /// Derivative; an order-1 input is padded back to order 1 with a zero.
    pub fn derivative(&self) -> Self {
        let mut derivs = self.derivs[1..].to_vec();
        if derivs.len() < 2 {
            derivs.push(0.0);
        }
        Self { center: self.center, derivs }
    }

    /// Terms `d_n (s - c)^n / n!`.
    pub fn terms(&self, s: f64) -> Vec<f64> {
        let x = s - self.center.value();
        let mut w = 1.0;
        self.derivs
            .iter()
            .enumerate()
            .map(|(n, &d)| {
                if n > 0 {
                    w *= x / n as f64;
                }
                if d == 0.0 { 0.0 } else { d * w }
            })
            .collect()
    }

    /// Plain compensated evaluation.
    pub fn eval(&self, s: f64) -> Evaluation {
        let terms = self.terms(s);
        let value = terms.iter().copied().collect::<CompensatedSum>().value();
        let last = abs(*terms.last().unwrap_or(&0.0));
        Evaluation { value, tail_estimate: last / abs(value).max(1.0) }
    }

    /// Wynn-epsilon evaluation on `f64` partial sums.
    pub fn eval_accelerated(&self, s: f64) -> Accelerated {
        wynn_epsilon(&partial_sums(&self.terms(s)))
    }

    /// Wynn-epsilon evaluation on fixed-point partial sums.
    pub fn eval_extended(&self, s: f64) -> Accelerated {
        let mut acc = Fixed::zero();
        let sums: Vec<Fixed> = self
            .terms(s)
            .into_iter()
            .map(|t| {
                acc = &acc + &Fixed::from_f64(t);
                acc.clone()
            })
            .collect();
        wynn_epsilon(&sums)
    }

    pub fn eval_with(&self, s: f64, mode: Summation) -> Evaluation {
        let plain = self.eval(s);
        let acc = match mode {
            Summation::Plain => return plain,
            Summation::Auto if plain.tail_estimate < 1e-16 => return plain,
            Summation::Auto => self.eval_accelerated(s),
            Summation::Extended => self.eval_extended(s),
        };
        Evaluation { value: acc.value, tail_estimate: acc.error / abs(acc.value).max(1.0) }
    }
}
