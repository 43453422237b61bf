//! Ground truth that shares no code path with the series constructions:
//! adaptive quadrature of the defining integrals, an adaptive ODE solution
//! of the backward equation, and the functional-equation residuals.

mod ode;
pub mod quadrature;

use alloc::format;

pub use ode::{flow_derivative_at_one, solve_F, solve_flow, OdeSolution, MAX_STEPS, ODE_TOLERANCE};
pub use quadrature::{integrate, QuadratureResult, Tolerance};

use crate::error::{domain, Error, Result};
use crate::koenigs::{KoenigsKind, KoenigsSolution};
use crate::math::{abs, exp, expm1, ln};
use crate::model::{BranchingModel, CriticalityKind};

/// Which defining integral to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntegralKind {
    /// `A(s) = ∫_0^s (λ-1) dx / (h(x) - x)`, `λ < 1`.
    A,
    /// `U_λ(s) = ∫_0^s dx / (h(x) - x)`, `λ ≤ 1` (`U` itself at `λ = 1`).
    U,
    /// `log Q(s)`, `λ > 1`, `q < s < 1`, in the regularised form
    /// `ln(s - q) + ∫_q^s [f'(q)/f(x) - 1/(x - q)] dx`.
    LogQ,
}

/// Relative tolerance of the oracle integrals.
pub const QUADRATURE_TOLERANCE: Tolerance = Tolerance { abs: 1e-15, rel: 1e-13 };

/// `h(x) - x`, formed around `x = 1` where it vanishes.
fn gap(lambda: f64, x: f64) -> f64 {
    let u = x - 1.0;
    expm1(lambda * u) - u
}

/// The defining integral of `kind` at `s` by adaptive Gauss–Kronrod.
pub fn quadrature_integral(kind: IntegralKind, lambda: f64, s: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(domain(format!("lambda must be positive, got {lambda}")));
    }
    if !s.is_finite() {
        return Err(domain("s must be finite"));
    }
    match kind {
        IntegralKind::A | IntegralKind::U => {
            if kind == IntegralKind::A && lambda >= 1.0 {
                return Err(domain("A is defined for lambda < 1"));
            }
            if lambda > 1.0 {
                return Err(domain("U is defined for lambda <= 1"));
            }
            if !(0.0..1.0).contains(&s) {
                return Err(domain(format!("integral needs 0 <= s < 1, got {s}")));
            }
            let factor = if kind == IntegralKind::A { lambda - 1.0 } else { 1.0 };
            let r = integrate(|x| factor / gap(lambda, x), 0.0, s, QUADRATURE_TOLERANCE)?;
            Ok(r.value)
        }
        IntegralKind::LogQ => {
            let model = BranchingModel::with_lambda(lambda)?;
            let c = model.classify();
            if c.tag != CriticalityKind::Supercritical {
                return Err(domain("log Q is defined for lambda > 1"));
            }
            let q = c.q;
            if !(s > q && s < 1.0) {
                return Err(domain(format!("log Q needs q < s < 1 (q = {q}), got {s}")));
            }
            // x = q + u²; h(q + v) - (q + v) = h(q)·expm1(λv) - v + (h(q) - q).
            let hq = model.h_eval(q);
            let fpq = lambda * hq - 1.0;
            let integrand = |u: f64| {
                let v = u * u;
                if v == 0.0 {
                    return 0.0;
                }
                let fx = hq * expm1(lambda * v) - v + (hq - q);
                2.0 * u * (fpq / fx - 1.0 / v)
            };
            let upper = crate::math::sqrt(s - q);
            let r = integrate(integrand, 0.0, upper, QUADRATURE_TOLERANCE)?;
            Ok(ln(s - q) + r.value)
        }
    }
}

/// Largest functional-equation residual over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub worst_t: f64,
    pub worst_s: f64,
    pub evaluations: usize,
}

/// Schröder or Abel residual of `solution` along the flow of `model`:
///
/// * `B`: `|B(F(t,s)) - e^{K(λ-1)t} B(s)|`
/// * `A`: `|A(F(t,s)) - K(λ-1)t - A(s)|`
/// * `U`: `|U(F(t,s)) - Kt - U(s)|`
/// * `C`: `|C(F(t,s)) - e^{Kt} C(s)|`
/// * `logQ`: `|log Q(F(t,s)) - f'(q)t - log Q(s)|`
pub fn functional_residuals(
    model: &BranchingModel,
    solution: &KoenigsSolution,
    t_grid: &[f64],
    s_grid: &[f64],
) -> Result<ResidualReport> {
    if solution.lambda() != model.lambda() {
        return Err(Error::Argument(format!(
            "solution built for lambda = {} but model has {}",
            solution.lambda(),
            model.lambda()
        )));
    }
    let tag = model.classify().tag;
    let kind = solution.kind();
    let ok = match kind {
        KoenigsKind::A | KoenigsKind::B => tag == CriticalityKind::Subcritical,
        KoenigsKind::U | KoenigsKind::C => tag != CriticalityKind::Supercritical,
        KoenigsKind::LogQ => tag == CriticalityKind::Supercritical,
        KoenigsKind::G | KoenigsKind::D => false,
    };
    if !ok {
        return Err(Error::Argument(format!("no functional equation for {kind:?} in the {tag:?} regime")));
    }
    let kk = model.k();
    let fpq = model.f_prime(model.classify().q);
    let mut report = ResidualReport { max_residual: 0.0, worst_t: 0.0, worst_s: 0.0, evaluations: 0 };
    for &t in t_grid {
        for &s in s_grid {
            let flowed = solve_F(model, t, s)?.value;
            let at_s = solution.eval(s)?.value;
            let at_f = solution.eval(flowed)?.value;
            let expected = match kind {
                KoenigsKind::B => model.mean(t)? * at_s,
                KoenigsKind::A => model.malthus() * t + at_s,
                KoenigsKind::U => kk * t + at_s,
                KoenigsKind::C => exp(kk * t) * at_s,
                KoenigsKind::LogQ => fpq * t + at_s,
                KoenigsKind::G | KoenigsKind::D => unreachable!(),
            };
            let r = abs(at_f - expected);
            report.evaluations += 1;
            if r > report.max_residual || r.is_nan() {
                report.max_residual = r;
                report.worst_t = t;
                report.worst_s = s;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::E;

    // 30-digit quadrature of (λ-1)/(h(x)-x) on [0, 0.5] at λ = 1/2.
    const A_HALF_HALF: f64 = -0.597_985_483_785_899_6;
    // 50-digit Gauss-Legendre values of log Q at λ = 2.
    const LOGQ_2: [(f64, f64); 3] =
        [(0.3, -2.263_982_801_860_653_7), (0.6, -0.539_944_833_354_148_2), (0.9, 0.826_357_452_522_528_6)];

    #[test]
    fn a_at_zero_and_half() {
        assert_eq!(quadrature_integral(IntegralKind::A, 0.5, 0.0).unwrap(), 0.0);
        let a = quadrature_integral(IntegralKind::A, 0.5, 0.5).unwrap();
        assert!((a - A_HALF_HALF).abs() < 1e-13, "{a}");
    }

    #[test]
    fn log_q_reference_values() {
        for (s, want) in LOGQ_2 {
            let got = quadrature_integral(IntegralKind::LogQ, 2.0, s).unwrap();
            assert!((got - want).abs() < 1e-11, "logQ({s}) = {got}, want {want}");
        }
    }

    #[test]
    fn u_has_slope_e_at_zero() {
        let s = 1e-4;
        let u = quadrature_integral(IntegralKind::U, 1.0, s).unwrap();
        assert!((u / s - E).abs() < 1e-3);
    }

    #[test]
    fn domain_checks() {
        assert!(quadrature_integral(IntegralKind::A, 1.0, 0.5).is_err());
        assert!(quadrature_integral(IntegralKind::U, 0.5, 1.0).is_err());
        assert!(quadrature_integral(IntegralKind::LogQ, 0.5, 0.5).is_err());
        assert!(quadrature_integral(IntegralKind::LogQ, 2.0, 0.1).is_err());
    }
}
