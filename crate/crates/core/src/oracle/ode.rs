//! Dormand–Prince 5(4) integration of the backward Kolmogorov equation
//! `∂F/∂t = f(F)`, `F(0, s) = s`.

use alloc::format;

use crate::error::{domain, Error, Result};
use crate::math::{abs, pow};
use crate::model::BranchingModel;

/// Absolute and relative tolerance of every ODE solve.
pub const ODE_TOLERANCE: f64 = 1e-11;

/// Step budget before the solver gives up.
pub const MAX_STEPS: usize = 200_000;

// The equation is autonomous, so the node abscissae c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// `F(t, s0)` with step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSolution {
    pub model: BranchingModel,
    pub t: f64,
    pub s0: f64,
    pub value: f64,
    pub accepted: usize,
    pub rejected: usize,
    /// Largest accepted scaled local error (1.0 = exactly on tolerance).
    pub max_local_error: f64,
    /// The raw value left `[0, 1]` by more than `1e-12` and was clamped.
    pub clamped: bool,
}

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut inc = 0.0;
        for (c, k) in terms {
            inc += c * k[i];
        }
        *o += h * inc;
    }
    out
}

/// Integrates the autonomous system `y' = g(y)` from `y(0) = y0` to time
/// `t`, with one step-size controller shared by all components.
fn dopri5<const N: usize, G: Fn(&[f64; N]) -> [f64; N]>(
    g: G,
    y0: [f64; N],
    t: f64,
    atol: f64,
    rtol: f64,
) -> Result<([f64; N], usize, usize, f64)> {
    let mut y = y0;
    let mut time = 0.0;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut max_err: f64 = 0.0;
    if t == 0.0 {
        return Ok((y, 0, 0, 0.0));
    }
    let mut k1 = g(&y);
    let mut h = t.min(0.1);
    for i in 0..N {
        if k1[i] != 0.0 {
            h = h.min((0.01 * (atol + rtol * abs(y[i])) / abs(k1[i])).max(1e-6));
        }
    }
    while time < t {
        if accepted + rejected >= MAX_STEPS {
            return Err(Error::Solver { t: time, accepted, rejected });
        }
        let last = time + h >= t;
        if last {
            h = t - time;
        }
        let k2 = g(&combine(&y, h, &[(A21, &k1)]));
        let k3 = g(&combine(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = g(&combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = g(&combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = g(&combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = g(&y_new);
        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = abs(h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]));
            let sc = atol + rtol * abs(y[i]).max(abs(y_new[i]));
            err = err.max(e / sc);
            if !y_new[i].is_finite() {
                err = f64::NAN;
            }
        }
        if !err.is_finite() {
            h *= 0.25;
            rejected += 1;
            if h < 1e-14 * t {
                return Err(Error::Solver { t: time, accepted, rejected });
            }
            continue;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * pow(err, -0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            time = if last { t } else { time + h };
            y = y_new;
            k1 = k7;
            accepted += 1;
            max_err = max_err.max(err);
            h *= factor;
        } else {
            rejected += 1;
            h *= factor.min(1.0);
            if h < 1e-14 * t {
                return Err(Error::Solver { t: time, accepted, rejected });
            }
        }
    }
    Ok((y, accepted, rejected, max_err))
}

/// `F(t, s)` for any real starting point `s` (used for derivatives at 1).
pub fn solve_flow(model: &BranchingModel, t: f64, s: f64) -> Result<OdeSolution> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain(format!("time must be finite and nonnegative, got {t}")));
    }
    if !s.is_finite() {
        return Err(domain("starting point must be finite"));
    }
    let ([value], accepted, rejected, max_local_error) =
        dopri5(|y: &[f64; 1]| [model.f_eval(y[0])], [s], t, ODE_TOLERANCE, ODE_TOLERANCE)?;
    Ok(OdeSolution { model: *model, t, s0: s, value, accepted, rejected, max_local_error, clamped: false })
}

/// `F(t, s)` for `s ∈ [0, 1]`, the pgf of `X(t)` at `s`.
#[allow(non_snake_case)]
pub fn solve_F(model: &BranchingModel, t: f64, s: f64) -> Result<OdeSolution> {
    if !(0.0..=1.0).contains(&s) {
        return Err(domain(format!("pgf argument must lie in [0, 1], got {s}")));
    }
    let mut sol = solve_flow(model, t, s)?;
    if sol.value > 1.0 + 1e-12 || sol.value < -1e-12 {
        sol.clamped = true;
        sol.value = sol.value.clamp(0.0, 1.0);
    }
    Ok(sol)
}

/// `∂F/∂s (t, 1)` by central differences of the flow. The two trajectories
/// are integrated in the offset `w = F - 1`, so the relative tolerance
/// applies to the `O(h)` quantity that is differenced.
pub fn flow_derivative_at_one(model: &BranchingModel, t: f64, h: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain(format!("time must be finite and nonnegative, got {t}")));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(domain(format!("difference step must lie in (0, 1), got {h}")));
    }
    let ([up, down], ..) = dopri5(
        |w: &[f64; 2]| [model.f_offset(w[0]), model.f_offset(w[1])],
        [h, -h],
        t,
        ODE_TOLERANCE * h,
        ODE_TOLERANCE,
    )?;
    Ok((up - down) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;

    #[test]
    fn initial_condition_and_fixed_point() {
        let m = BranchingModel::with_lambda(0.5).unwrap();
        assert_eq!(solve_F(&m, 0.0, 0.3).unwrap().value, 0.3);
        for t in [0.5, 3.0, 10.0] {
            assert_eq!(solve_F(&m, t, 1.0).unwrap().value, 1.0);
        }
        assert!(solve_F(&m, 1.0, 1.2).is_err());
        assert!(solve_F(&m, -1.0, 0.5).is_err());
    }

    #[test]
    fn linear_equation_matches_closed_form() {
        // y' = 1 - y has y = 1 - (1 - s)e^{-t}.
        let ([y], ..) = dopri5(|y: &[f64; 1]| [1.0 - y[0]], [0.2], 2.0, ODE_TOLERANCE, ODE_TOLERANCE).unwrap();
        assert!((y - (1.0 - 0.8 * exp(-2.0))).abs() < 1e-11);
    }

    #[test]
    fn semigroup_property() {
        let m = BranchingModel::with_lambda(0.5).unwrap();
        for s in [0.0, 0.3, 0.9] {
            let whole = solve_F(&m, 1.2, s).unwrap().value;
            let inner = solve_F(&m, 0.7, s).unwrap().value;
            let outer = solve_F(&m, 0.5, inner).unwrap().value;
            assert!((whole - outer).abs() < 1e-9);
        }
    }

    #[test]
    fn monotone_in_s_and_t() {
        let m = BranchingModel::new(2.0, 1.0).unwrap();
        let mut prev = -1.0;
        for i in 0..=20 {
            let v = solve_F(&m, 1.0, i as f64 / 20.0).unwrap().value;
            assert!(v >= prev);
            prev = v;
        }
        let mut prev = -1.0;
        for t in [0.5, 1.0, 2.0, 5.0, 20.0] {
            let v = solve_F(&m, t, 0.0).unwrap().value;
            assert!(v >= prev);
            prev = v;
        }
        // F(t, 0) approaches q like e^{f'(q)t}, about 7e-6 at t = 20.
        assert!((prev - m.classify().q).abs() < 1e-4);
        assert!(prev < m.classify().q);
    }

    #[test]
    fn eigenvalue_is_the_mean() {
        let m = BranchingModel::new(0.5, 1.0).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let d = flow_derivative_at_one(&m, t, 1e-5).unwrap();
            assert!((d - m.mean(t).unwrap()).abs() < 1e-7, "t={t}: {d} vs {}", m.mean(t).unwrap());
        }
    }
}
