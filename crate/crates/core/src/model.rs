//! The branching model: reproduction pgf `h`, generator `f`, criticality.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{domain, Result};
use crate::math::{abs, exp, expm1, powi};
use crate::series::{Center, TaylorExpansion};
use crate::specfun::lambert_w0;

/// Particles live `Exp(K)` and leave `Poisson(λ)` offspring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchingModel {
    lambda: f64,
    k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriticalityKind {
    Subcritical,
    Critical,
    Supercritical,
}

/// Regime and ultimate extinction probability `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criticality {
    pub tag: CriticalityKind,
    pub q: f64,
}

/// Distance from 1 below which the supercritical bisection stops looking.
pub const TRIVIAL_ROOT_GAP: f64 = 1e-9;

impl BranchingModel {
    pub fn new(lambda: f64, k: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(domain(format!("lambda must be positive and finite, got {lambda}")));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(domain(format!("K must be positive and finite, got {k}")));
        }
        Ok(Self { lambda, k })
    }

    /// Model with `K = 1`.
    pub fn with_lambda(lambda: f64) -> Result<Self> {
        Self::new(lambda, 1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `h(s) = e^{λ(s-1)}`.
    pub fn h_eval(&self, s: f64) -> f64 {
        exp(self.lambda * (s - 1.0))
    }

    /// Derivatives of `h` at 0 (`e^{-λ} λ^k`) or at 1 (`λ^k`).
    pub fn h_derivs(&self, center: Center, order: usize) -> TaylorExpansion {
        let base = match center {
            Center::Zero => exp(-self.lambda),
            Center::One => 1.0,
        };
        let derivs: Vec<f64> = (0..=order.max(1)).map(|k| base * powi(self.lambda, k as u32)).collect();
        TaylorExpansion::new(center, derivs).expect("finite derivatives")
    }

    /// `f(s) = K (h(s) - s)`. Near `s = 1` the difference is formed as
    /// `expm1(λ(s-1)) - (s-1)` to keep its relative accuracy.
    pub fn f_eval(&self, s: f64) -> f64 {
        self.f_offset(s - 1.0)
    }

    /// `f(1 + u)`.
    pub fn f_offset(&self, u: f64) -> f64 {
        self.k * (expm1(self.lambda * u) - u)
    }

    /// `f'(s) = K (λ h(s) - 1)`.
    pub fn f_prime(&self, s: f64) -> f64 {
        self.k * (self.lambda * self.h_eval(s) - 1.0)
    }

    /// Exponent rate of the mean: `f'(1) = K(λ - 1)`.
    pub fn malthus(&self) -> f64 {
        self.k * (self.lambda - 1.0)
    }

    /// `M(t) = e^{K(λ-1)t}`.
    pub fn mean(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain(format!("time must be nonnegative, got {t}")));
        }
        Ok(exp(self.malthus() * t))
    }

    /// Regime and extinction probability.
    ///
    /// For `λ > 1` the nontrivial root of `h(s) = s` is `-W₀(-λe^{-λ})/λ`; it
    /// is then polished by bisection of `h(s) - s` on `[0, 1 - ε]`.
    pub fn classify(&self) -> Criticality {
        let lambda = self.lambda;
        if lambda < 1.0 {
            return Criticality { tag: CriticalityKind::Subcritical, q: 1.0 };
        }
        if lambda == 1.0 {
            return Criticality { tag: CriticalityKind::Critical, q: 1.0 };
        }
        let seed = lambert_w0(-lambda * exp(-lambda)).map(|w| -w / lambda).unwrap_or(0.5 / lambda);
        let q = self.bisect_fixed_point(seed);
        Criticality { tag: CriticalityKind::Supercritical, q }
    }

    fn bisect_fixed_point(&self, seed: f64) -> f64 {
        // g(s) = h(s) - s is positive at 0 and negative just below 1.
        let g = |s: f64| self.h_eval(s) - s;
        let (mut lo, mut hi) = (0.0, 1.0 - TRIVIAL_ROOT_GAP);
        if seed > lo && seed < hi {
            // Bracket the seed tightly when the Lambert value is good.
            let w = 1e-12_f64.max(abs(seed) * 1e-12);
            let (a, b) = (seed - w, seed + w);
            if a > lo && b < hi && g(a) > 0.0 && g(b) < 0.0 {
                lo = a;
                hi = b;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (glo, ghi) = (abs(g(lo)), abs(g(hi)));
        if glo <= ghi { lo } else { hi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q_LAMBDA_2: f64 = 0.203_187_869_979_979_95;

    #[test]
    fn rejects_bad_parameters() {
        assert!(BranchingModel::new(0.0, 1.0).is_err());
        assert!(BranchingModel::new(0.5, -1.0).is_err());
        assert!(BranchingModel::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn pgf_and_generator_values() {
        let m = BranchingModel::new(0.5, 2.0).unwrap();
        assert_eq!(m.h_eval(1.0), 1.0);
        assert_eq!(m.f_eval(1.0), 0.0);
        assert!((m.f_prime(1.0) - 2.0 * (0.5 - 1.0)).abs() < 1e-15);
        let d0 = m.h_derivs(Center::Zero, 5);
        let d1 = m.h_derivs(Center::One, 5);
        for k in 0..=5 {
            assert!((d0.d(k) - exp(-0.5) * powi(0.5, k as u32)).abs() < 1e-16);
            assert_eq!(d1.d(k), powi(0.5, k as u32));
        }
    }

    #[test]
    fn classification() {
        let c = BranchingModel::with_lambda(1.0).unwrap().classify();
        assert_eq!(c, Criticality { tag: CriticalityKind::Critical, q: 1.0 });
        let c = BranchingModel::with_lambda(0.5).unwrap().classify();
        assert_eq!(c, Criticality { tag: CriticalityKind::Subcritical, q: 1.0 });
        let m = BranchingModel::with_lambda(2.0).unwrap();
        let c = m.classify();
        assert_eq!(c.tag, CriticalityKind::Supercritical);
        assert!((c.q - Q_LAMBDA_2).abs() < 1e-14);
        assert!((m.h_eval(c.q) - c.q).abs() <= 1e-13);
        assert!(c.q > 0.0 && c.q < 0.5);
        assert!(m.f_eval(c.q).abs() < 1e-13);
    }

    #[test]
    fn extinction_probability_decreases_with_lambda() {
        let qs: Vec<f64> = [1.1, 1.5, 2.0, 3.0]
            .iter()
            .map(|&l| BranchingModel::with_lambda(l).unwrap().classify().q)
            .collect();
        assert!(qs.windows(2).all(|w| w[1] <= w[0]));
        for (&l, &q) in [1.1, 1.5, 2.0, 3.0].iter().zip(&qs) {
            assert!(q > 0.0 && q < 1.0 / l);
        }
    }

    #[test]
    fn generator_sign_pattern() {
        let sup = BranchingModel::with_lambda(2.0).unwrap();
        let q = sup.classify().q;
        for i in 0..100 {
            let s = i as f64 / 100.0;
            if s < q - 1e-9 {
                assert!(sup.f_eval(s) > 0.0);
            } else if s > q + 1e-9 {
                assert!(sup.f_eval(s) < 0.0, "s={s}");
            }
        }
        for lambda in [0.5, 1.0] {
            let m = BranchingModel::with_lambda(lambda).unwrap();
            for i in 0..100 {
                assert!(m.f_eval(i as f64 / 100.0) > 0.0);
            }
        }
    }

    #[test]
    fn mean_values() {
        let m = BranchingModel::with_lambda(0.5).unwrap();
        assert_eq!(m.mean(0.0).unwrap(), 1.0);
        assert!((m.mean(2.0).unwrap() - exp(-1.0)).abs() < 1e-16);
        assert_eq!(BranchingModel::with_lambda(1.0).unwrap().mean(7.0).unwrap(), 1.0);
        assert!(m.mean(-1.0).is_err());
    }
}
