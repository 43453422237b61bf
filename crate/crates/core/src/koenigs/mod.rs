//! Koenigs functions of the model and the distributions read off them.
//!
//! | kind | regime | function |
//! |------|--------|----------|
//! | `B`  | `λ < 1` | `B(F(t,s)) = M(t) B(s)`, `B(0) = 1`, `B(1) = 0` |
//! | `A`  | `λ < 1` | `A = log B` |
//! | `U`  | `λ ≤ 1` | `U_λ = A/(λ-1)`; at `λ = 1`, `U(F(t,s)) = Kt + U(s)` |
//! | `C`  | `λ = 1` | `C = e^U` |
//! | `G`  | `λ < 1` | `B = (1-s) e^G` |
//! | `D`  | `λ < 1` | `B = ((1-s) e^D)^{1-λ}` |
//! | `logQ` | `λ > 1` | `Q(F(t,s)) = e^{f'(q)t} Q(s)` on `(q, 1)` |
//!
//! None of them depend on `K`.

pub mod critical;
pub mod explicit;
pub mod subcritical;
pub mod supercritical;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::math::{abs, exp, log1p};
use crate::oracle::{quadrature_integral, IntegralKind};
use crate::series::{Summation, TaylorExpansion};

pub use critical::{c_derivs_at0, c_exact, invariant_measure, phi, u_c_near1_critical, CriticalNear1};
pub use explicit::{
    a_explicit_ei, d_explicit_method1, ein_closed_form_n1, g_explicit_ei, g_explicit_method2, g_method2_first_term,
    u_lambda_explicit, ExplicitSum, GExplicit, DEFAULT_EXPLICIT_TERMS, MAX_EXPLICIT_TERMS,
};
pub use subcritical::{
    a_derivs_at0, b_derivs_at0, b_derivs_at1, g_b_at1, lcl_pmf, second_fixed_point, u_lambda_at0, GSeries,
    G1_TOLERANCE,
};
pub use supercritical::{extinction_point, supercritical_logq, supercritical_logq_regular};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KoenigsKind {
    A,
    B,
    U,
    C,
    G,
    D,
    LogQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Derivative recurrence at 0.
    Recurrence0,
    /// Derivative recurrence at 1 seeded by `G(1)`.
    Recurrence1,
    /// Reciprocal series at 0 integrated to `A` or `U`, exponentiated for `B` and `C`.
    RecipSeries0,
    /// `G` expanded about 1.
    GForm1,
    /// Exponential-integral expansions.
    EiExplicit,
    /// Adaptive quadrature of the defining integral.
    Quadrature,
    /// Critical expansion about the pole at 1.
    ClosedForm1,
}

/// Interval of `s` on which a solution may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Validity {
    pub const fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: false }
    }

    pub const fn half_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: true }
    }

    pub fn contains(&self, s: f64) -> bool {
        let above = if self.lo_open { s > self.lo } else { s >= self.lo };
        let below = if self.hi_open { s < self.hi } else { s <= self.hi };
        above && below
    }
}

/// Value of a solution at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionValue {
    pub value: f64,
    pub tail_estimate: f64,
    /// Method that actually produced the value.
    pub method: Method,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PmfKind {
    Lcl,
    InvariantMeasure,
}

/// `(n, value)` rows of the limit conditional law or the invariant measure.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    pub kind: PmfKind,
    pub lambda: f64,
    pub entries: Vec<(usize, f64)>,
}

impl PmfTable {
    pub fn total(&self) -> f64 {
        crate::summation::compensated_sum(self.entries.iter().map(|e| e.1))
    }
}

/// Largest deviation from quadrature accepted inside an explicit expansion's validity interval.
pub const EXPLICIT_VALIDITY_TOLERANCE: f64 = 1e-6;

/// Spacing of the grid on which explicit expansions are validated.
pub const EXPLICIT_VALIDITY_STEP: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Series(TaylorExpansion),
    G(Box<GSeries>),
    Quadrature,
    Critical(CriticalNear1),
    Explicit { terms: usize },
    LogQ,
}

/// One construction of one Koenigs function at a fixed `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct KoenigsSolution {
    kind: KoenigsKind,
    method: Method,
    lambda: f64,
    validity: Validity,
    warnings: Vec<String>,
    summation: Summation,
    repr: Repr,
}

fn check_lambda(kind: KoenigsKind, lambda: f64) -> Result<()> {
    let ok = lambda.is_finite()
        && lambda > 0.0
        && match kind {
            KoenigsKind::A | KoenigsKind::B | KoenigsKind::G | KoenigsKind::D => lambda < 1.0,
            KoenigsKind::U => lambda <= 1.0,
            KoenigsKind::C => lambda == 1.0,
            KoenigsKind::LogQ => lambda > 1.0,
        };
    if ok {
        Ok(())
    } else {
        Err(domain(format!("{kind:?} is not defined at lambda = {lambda}")))
    }
}

impl KoenigsSolution {
    fn build(kind: KoenigsKind, method: Method, lambda: f64, validity: Validity, repr: Repr) -> Self {
        Self { kind, method, lambda, validity, warnings: Vec::new(), summation: Summation::Auto, repr }
    }

    /// `B` from its derivative recurrence at 0.
    pub fn b_recurrence0(lambda: f64, order: usize) -> Result<Self> {
        let b = b_derivs_at0(lambda, order)?;
        Ok(Self::build(KoenigsKind::B, Method::Recurrence0, lambda, Validity::closed(0.0, 1.0), Repr::Series(b)))
    }

    /// `A` (`λ < 1`) or `U` (`λ = 1`) from the reciprocal series at 0.
    pub fn a_series0(lambda: f64, order: usize) -> Result<Self> {
        let (kind, series) = if lambda == 1.0 {
            (KoenigsKind::U, u_lambda_at0(1.0, order)?)
        } else {
            (KoenigsKind::A, a_derivs_at0(lambda, order)?)
        };
        Ok(Self::build(kind, Method::RecipSeries0, lambda, Validity::half_open(0.0, 1.0), Repr::Series(series)))
    }

    /// `U_λ = A/(λ-1)` for `λ < 1`, `U` for `λ = 1`, from the reciprocal series at 0.
    pub fn u_series0(lambda: f64, order: usize) -> Result<Self> {
        check_lambda(KoenigsKind::U, lambda)?;
        let u = u_lambda_at0(lambda, order)?;
        Ok(Self::build(KoenigsKind::U, Method::RecipSeries0, lambda, Validity::half_open(0.0, 1.0), Repr::Series(u)))
    }

    /// `B = exp(A)` or `C = exp(U)` through the exponential of the series at 0.
    pub fn exp_series0(lambda: f64, order: usize) -> Result<Self> {
        let (kind, inner, validity) = if lambda == 1.0 {
            (KoenigsKind::C, u_lambda_at0(1.0, order)?, Validity::half_open(0.0, 1.0))
        } else {
            (KoenigsKind::B, a_derivs_at0(lambda, order)?, Validity::closed(0.0, 1.0))
        };
        let e = inner.exp_series()?;
        Ok(Self::build(kind, Method::RecipSeries0, lambda, validity, Repr::Series(e)))
    }

    /// `C` from its derivative recurrence at 0.
    pub fn c_recurrence0(order: usize) -> Self {
        Self::build(KoenigsKind::C, Method::Recurrence0, 1.0, Validity::half_open(0.0, 1.0), Repr::Series(c_derivs_at0(order)))
    }

    fn with_g_warning(mut self, g: &GSeries) -> Self {
        if !g.converged() {
            self.warnings.push(format!(
                "G(1) summation error {:.3e} exceeds {G1_TOLERANCE:e}",
                g.g0_residual()
            ));
        }
        self
    }

    /// `G` expanded about 1.
    pub fn g_series(lambda: f64, order: usize) -> Result<Self> {
        let g = GSeries::new(lambda, order)?;
        let out = Self::build(KoenigsKind::G, Method::GForm1, lambda, Validity::closed(0.0, 1.0), Repr::G(Box::new(g.clone())));
        Ok(out.with_g_warning(&g))
    }

    /// `B = (1-s) e^{G}`.
    pub fn b_via_g(lambda: f64, order: usize) -> Result<Self> {
        let g = GSeries::new(lambda, order)?;
        let out = Self::build(KoenigsKind::B, Method::GForm1, lambda, Validity::closed(0.0, 1.0), Repr::G(Box::new(g.clone())));
        Ok(out.with_g_warning(&g))
    }

    /// `A = G + log(1-s)` (kind `A`) or `U_λ = A/(λ-1)` (kind `U`) on `[0, 1)`.
    pub fn log_via_g(kind: KoenigsKind, lambda: f64, order: usize) -> Result<Self> {
        if !matches!(kind, KoenigsKind::A | KoenigsKind::U) {
            return Err(Error::Argument(format!("{kind:?} is not A or U")));
        }
        let g = GSeries::new(lambda, order)?;
        let out = Self::build(kind, Method::GForm1, lambda, Validity::half_open(0.0, 1.0), Repr::G(Box::new(g.clone())));
        Ok(out.with_g_warning(&g))
    }

    /// `B` from its derivative recurrence at 1. The series is trusted on the
    /// part of `[0, 1]` inside its disc of convergence.
    pub fn b_recurrence1(lambda: f64, order: usize) -> Result<Self> {
        let g = GSeries::new(lambda, order)?;
        let b = subcritical::b_derivs_at1_from(&g, order)?;
        let radius = second_fixed_point(lambda)? - 1.0;
        let lo = (1.0 - radius).max(0.0);
        let validity = Validity { lo, hi: 1.0, lo_open: lo > 0.0, hi_open: false };
        let out = Self::build(KoenigsKind::B, Method::Recurrence1, lambda, validity, Repr::Series(b));
        Ok(out.with_g_warning(&g))
    }

    /// The defining integral of `kind` by adaptive quadrature.
    pub fn quadrature(kind: KoenigsKind, lambda: f64) -> Result<Self> {
        check_lambda(kind, lambda)?;
        let validity = match kind {
            KoenigsKind::B => Validity::closed(0.0, 1.0),
            KoenigsKind::LogQ => {
                let q = extinction_point(lambda)?;
                Validity { lo: q, hi: 1.0, lo_open: true, hi_open: true }
            }
            _ => Validity::half_open(0.0, 1.0),
        };
        Ok(Self::build(kind, Method::Quadrature, lambda, validity, Repr::Quadrature))
    }

    /// `U` or `C` at `λ = 1` from the expansion about the pole at 1.
    pub fn critical_near1(kind: KoenigsKind, order: usize) -> Result<Self> {
        if !matches!(kind, KoenigsKind::U | KoenigsKind::C) {
            return Err(Error::Argument(format!("the critical expansion gives U or C, not {kind:?}")));
        }
        let near = CriticalNear1::new(order);
        Ok(Self::build(kind, Method::ClosedForm1, 1.0, Validity::half_open(0.0, 1.0), Repr::Critical(near)))
    }

    /// `A`, `U`, `G` or `D` from the exponential-integral expansions with
    /// `terms` outer terms. The validity interval is the longest prefix of
    /// a grid on `[0, 1)` on which both the expansion's own error estimate
    /// (last increment plus rounding) and its distance from quadrature stay
    /// within [`EXPLICIT_VALIDITY_TOLERANCE`].
    pub fn ei_explicit(kind: KoenigsKind, lambda: f64, terms: usize) -> Result<Self> {
        if matches!(kind, KoenigsKind::B | KoenigsKind::C | KoenigsKind::LogQ) {
            return Err(Error::Argument(format!("no exponential-integral expansion for {kind:?}")));
        }
        check_lambda(kind, lambda)?;
        let mut out =
            Self::build(kind, Method::EiExplicit, lambda, Validity::closed(0.0, 0.0), Repr::Explicit { terms });
        let steps = (1.0 / EXPLICIT_VALIDITY_STEP) as usize;
        let mut hi = 0.0;
        for i in 1..steps {
            let s = i as f64 * EXPLICIT_VALIDITY_STEP;
            let got = out.explicit_value(s, terms)?;
            let want = quadrature_value(kind, lambda, s)?;
            let estimate = got.min_increment + got.rounding;
            if !(estimate <= EXPLICIT_VALIDITY_TOLERANCE && abs(got.value - want) <= EXPLICIT_VALIDITY_TOLERANCE) {
                break;
            }
            hi = s;
        }
        out.validity = Validity::closed(0.0, hi);
        Ok(out)
    }

    /// `log Q` by quadrature of its regularised integral.
    pub fn log_q(lambda: f64) -> Result<Self> {
        check_lambda(KoenigsKind::LogQ, lambda)?;
        let q = extinction_point(lambda)?;
        let validity = Validity { lo: q, hi: 1.0, lo_open: true, hi_open: true };
        Ok(Self::build(KoenigsKind::LogQ, Method::Quadrature, lambda, validity, Repr::LogQ))
    }

    /// Select how series representations are summed.
    pub fn with_summation(mut self, summation: Summation) -> Self {
        self.summation = summation;
        self
    }

    pub fn kind(&self) -> KoenigsKind {
        self.kind
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn validity(&self) -> Validity {
        self.validity
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Underlying truncated expansion, if the representation is one.
    pub fn expansion(&self) -> Option<&TaylorExpansion> {
        match &self.repr {
            Repr::Series(x) => Some(x),
            _ => None,
        }
    }

    pub fn g_series_ref(&self) -> Option<&GSeries> {
        match &self.repr {
            Repr::G(g) => Some(g),
            _ => None,
        }
    }

    fn explicit_value(&self, s: f64, terms: usize) -> Result<ExplicitSum> {
        let lambda = self.lambda;
        match self.kind {
            KoenigsKind::A => a_explicit_ei(lambda, s, terms),
            KoenigsKind::U => u_lambda_explicit(lambda, s, terms),
            KoenigsKind::G => g_explicit_method2(lambda, s, terms),
            KoenigsKind::D => d_explicit_method1(lambda, s, terms),
            _ => unreachable!("checked at construction"),
        }
    }

    /// Value at `s`.
    pub fn eval(&self, s: f64) -> Result<SolutionValue> {
        if !s.is_finite() {
            return Err(domain("s must be finite"));
        }
        let plain = |value: f64, tail_estimate: f64| SolutionValue {
            value,
            tail_estimate,
            method: self.method,
            warning: self.warnings.first().cloned(),
        };
        if !self.validity.contains(s) {
            if self.method == Method::EiExplicit {
                let value = quadrature_value(self.kind, self.lambda, s)?;
                return Ok(SolutionValue {
                    value,
                    tail_estimate: 0.0,
                    method: Method::Quadrature,
                    warning: Some(format!(
                        "s = {s} outside the expansion's validity interval [0, {}]; used quadrature",
                        self.validity.hi
                    )),
                });
            }
            let v = self.validity;
            return Err(domain(format!(
                "{:?} by {:?} is valid on {}{}, {}{}; got s = {s}",
                self.kind,
                self.method,
                if v.lo_open { "(" } else { "[" },
                v.lo,
                v.hi,
                if v.hi_open { ")" } else { "]" },
            )));
        }
        match &self.repr {
            Repr::Series(x) => {
                let e = x.eval_with(s, self.summation);
                Ok(plain(e.value, e.tail_estimate))
            }
            Repr::G(g) => {
                let acc = if self.kind == KoenigsKind::B { g.b_value(s) } else { g.eval(s) };
                match self.kind {
                    KoenigsKind::A => Ok(plain(acc.value + log1p(-s), acc.error)),
                    KoenigsKind::U => {
                        let scale = self.lambda - 1.0;
                        Ok(plain((acc.value + log1p(-s)) / scale, acc.error / abs(scale)))
                    }
                    _ => Ok(plain(acc.value, acc.error / abs(acc.value).max(1.0))),
                }
            }
            Repr::Quadrature => Ok(plain(quadrature_value(self.kind, self.lambda, s)?, 0.0)),
            Repr::Critical(near) => {
                let u = near.u(s);
                let value = if self.kind == KoenigsKind::C { exp(u) } else { u };
                Ok(plain(value, near.tail_estimate(s)))
            }
            Repr::Explicit { terms } => {
                let e = self.explicit_value(s, *terms)?;
                Ok(plain(e.value, (e.min_increment + e.rounding) / abs(e.value).max(1.0)))
            }
            Repr::LogQ => Ok(plain(supercritical_logq(self.lambda, s)?, 0.0)),
        }
    }
}

/// `kind` at `s` from quadrature of its defining integral.
pub fn quadrature_value(kind: KoenigsKind, lambda: f64, s: f64) -> Result<f64> {
    check_lambda(kind, lambda)?;
    match kind {
        KoenigsKind::A => quadrature_integral(IntegralKind::A, lambda, s),
        KoenigsKind::U => quadrature_integral(IntegralKind::U, lambda, s),
        KoenigsKind::B => {
            if s == 1.0 {
                Ok(0.0)
            } else {
                Ok(exp(quadrature_integral(IntegralKind::A, lambda, s)?))
            }
        }
        KoenigsKind::C => Ok(exp(quadrature_integral(IntegralKind::U, lambda, s)?)),
        KoenigsKind::G => Ok(quadrature_integral(IntegralKind::A, lambda, s)? - log1p(-s)),
        KoenigsKind::D => {
            let g = quadrature_integral(IntegralKind::A, lambda, s)? - log1p(-s);
            Ok((g + lambda * log1p(-s)) / (1.0 - lambda))
        }
        KoenigsKind::LogQ => quadrature_integral(IntegralKind::LogQ, lambda, s),
    }
}
