//! Supercritical case `λ > 1`: `log Q(s) = ∫_q^s f'(q) dx / f(x)` on `(q, 1)`.

use alloc::format;

use crate::error::{domain, Result};
use crate::math::{exp_minus_linear, expm1, ln};
use crate::model::{BranchingModel, CriticalityKind};
use crate::oracle::{integrate, QUADRATURE_TOLERANCE};

/// Extinction probability, or an error for `λ ≤ 1`.
pub fn extinction_point(lambda: f64) -> Result<f64> {
    let c = BranchingModel::with_lambda(lambda)?.classify();
    if c.tag != CriticalityKind::Supercritical {
        return Err(domain(format!("log Q needs lambda > 1, got {lambda}")));
    }
    Ok(c.q)
}

/// `∫_q^s [f'(q)/f(x) - 1/(x - q)] dx`. With `u = x - q` and `h(q) = q` the
/// integrand is `-q E₂(λu) / (u (q·expm1(λu) - u))`, `E₂(z) = e^z - 1 - z`,
/// which is finite at `u = 0`.
pub fn supercritical_logq_regular(lambda: f64, s: f64) -> Result<f64> {
    let q = extinction_point(lambda)?;
    check_range(q, s)?;
    let integrand = |x: f64| {
        let u = x - q;
        if u == 0.0 {
            return -q * lambda * lambda / (2.0 * (lambda * q - 1.0));
        }
        let gap = q * expm1(lambda * u) - u;
        -q * exp_minus_linear(lambda * u) / (u * gap)
    };
    Ok(integrate(integrand, q, s, QUADRATURE_TOLERANCE)?.value)
}

/// `log Q(s) = ln(s - q) + ∫_q^s [f'(q)/f(x) - 1/(x - q)] dx`, increasing on
/// `(q, 1)` with `log Q → -∞` at `q` and `+∞` at 1. Independent of `K`.
pub fn supercritical_logq(lambda: f64, s: f64) -> Result<f64> {
    let regular = supercritical_logq_regular(lambda, s)?;
    let q = extinction_point(lambda)?;
    Ok(ln(s - q) + regular)
}

fn check_range(q: f64, s: f64) -> Result<()> {
    if !(s > q && s < 1.0) {
        return Err(domain(format!("log Q needs q < s < 1 (q = {q}), got {s}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{quadrature_integral, IntegralKind};

    const LOGQ_2: [(f64, f64); 4] = [
        (0.3, -2.263_982_801_860_653_7),
        (0.6, -0.539_944_833_354_148_2),
        (0.9, 0.826_357_452_522_528_6),
        (0.99, 2.308_643_905_367_859_3),
    ];

    #[test]
    fn reference_values() {
        for (s, want) in LOGQ_2 {
            let got = supercritical_logq(2.0, s).unwrap();
            assert!((got - want).abs() <= 1e-10 * want.abs(), "s={s}: {got}");
        }
    }

    #[test]
    fn agrees_with_the_substituted_oracle() {
        let q = extinction_point(3.0).unwrap();
        for i in 1..10 {
            let s = q + (1.0 - q) * i as f64 / 10.0;
            let a = supercritical_logq(3.0, s).unwrap();
            let b = quadrature_integral(IntegralKind::LogQ, 3.0, s).unwrap();
            assert!((a - b).abs() < 1e-11 * a.abs().max(1.0));
        }
    }

    #[test]
    fn regular_part_vanishes_at_q_and_logq_increases() {
        let q = extinction_point(2.0).unwrap();
        assert!(supercritical_logq_regular(2.0, q + 1e-12).unwrap().abs() < 1e-11);
        let mut prev = f64::NEG_INFINITY;
        for i in 1..50 {
            let s = q + (1.0 - q) * i as f64 / 50.0;
            let v = supercritical_logq(2.0, s).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn domain() {
        assert!(supercritical_logq(0.5, 0.5).is_err());
        assert!(supercritical_logq(2.0, 0.1).is_err());
        assert!(supercritical_logq(2.0, 1.0).is_err());
    }
}
