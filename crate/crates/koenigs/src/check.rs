//! Consistency suites with JSON reports.

use std::collections::BTreeMap;

use koenigs_core::koenigs::{extinction_point, quadrature_value, KoenigsKind, KoenigsSolution};
use koenigs_core::montecarlo::{SimConfig, DEFAULT_CAP};
use koenigs_core::oracle::{functional_residuals, solve_F};
use koenigs_core::series::Summation;
use koenigs_core::{BranchingModel, Error};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliResult;
use crate::eval::{solution, MethodArg};
use crate::params::Grid;
use crate::sim;

pub const CROSS_TOLERANCE: f64 = 1e-8;
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;
/// Largest accepted `|estimate - reference| / SE`.
pub const Z_TOLERANCE: f64 = 3.0;
/// Population cap used for supercritical runs unless one is given. A
/// replicate that reaches it dies out with probability `q^cap`.
pub const SUPERCRITICAL_CAP: u64 = 200;

pub const T_GRID: [f64; 3] = [0.5, 1.0, 2.0];
pub const S_GRID: Grid = Grid::new(0.0, 0.9, 0.1);
pub const CROSS_GRID: Grid = Grid::new(0.0, 0.95, 0.05);

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl CheckItem {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold, detail: None }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckReport {
    pub suite: String,
    pub parameters: BTreeMap<String, Value>,
    pub checks: Vec<CheckItem>,
    pub pass: bool,
}

impl CheckReport {
    fn new(suite: &str, parameters: BTreeMap<String, Value>, checks: Vec<CheckItem>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { suite: suite.into(), parameters, checks, pass }
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn params(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Sup-norm agreement of the four constructions of `B` on `grid`.
pub fn crossmethod(lambda: f64, order: usize, grid: Grid, summation: Summation) -> CliResult<CheckReport> {
    if !(lambda < 1.0) {
        return Err(Error::Domain("the cross-method suite compares constructions of B and needs lambda < 1".into()).into());
    }
    let points = grid.points();
    let methods = [MethodArg::Recurrence0, MethodArg::RecipSeries0, MethodArg::GForm1];
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for m in methods {
        let sol = solution(KoenigsKind::B, Some(m), lambda, order, summation)?;
        let vals = points.iter().map(|&s| sol.eval(s).map(|v| v.value)).collect::<Result<Vec<_>, _>>()?;
        columns.push((name_of(m), vals));
    }
    let quad = points.iter().map(|&s| quadrature_value(KoenigsKind::B, lambda, s)).collect::<Result<Vec<_>, _>>()?;
    columns.push(("quadrature".into(), quad));
    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut checks = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..columns.len() {
        for j in i + 1..columns.len() {
            let d = sup(&columns[i].1, &columns[j].1);
            worst = worst.max(d);
            checks.push(CheckItem::at_most(format!("{} vs {}", columns[i].0, columns[j].0), d, CROSS_TOLERANCE));
        }
    }
    checks.push(CheckItem::at_most("max pairwise", worst, CROSS_TOLERANCE));
    let p = params(&[
        ("lambda", json!(lambda)),
        ("order", json!(order)),
        ("grid", json!(grid.to_string())),
        ("precision", json!(precision_name(summation))),
    ]);
    Ok(CheckReport::new("crossmethod", p, checks))
}

fn name_of(m: MethodArg) -> String {
    use clap::ValueEnum;
    m.to_possible_value().unwrap().get_name().to_string()
}

pub fn precision_name(s: Summation) -> &'static str {
    match s {
        Summation::Extended => "extended",
        _ => "double",
    }
}

fn residual_item(
    name: &str,
    model: &BranchingModel,
    sol: &KoenigsSolution,
    s_points: &[f64],
) -> CliResult<CheckItem> {
    let r = functional_residuals(model, sol, &T_GRID, s_points)?;
    Ok(CheckItem::at_most(name, r.max_residual, RESIDUAL_TOLERANCE)
        .with_detail(json!({"worst_t": r.worst_t, "worst_s": r.worst_s, "evaluations": r.evaluations})))
}

/// `|B(F(t,s)) - e^{K(λ-1)t} B(s)|` for `λ < 1`, `|log Q(F) - f'(q)t - log Q(s)|` for `λ > 1`.
pub fn schroeder(lambda: f64, bigk: f64, order: usize, summation: Summation) -> CliResult<CheckReport> {
    let model = BranchingModel::new(lambda, bigk)?;
    let mut checks = Vec::new();
    let s_points;
    if lambda < 1.0 {
        s_points = S_GRID.points();
        for m in [MethodArg::Recurrence0, MethodArg::GForm1] {
            let sol = solution(KoenigsKind::B, Some(m), lambda, order, summation)?;
            checks.push(residual_item(&format!("B {}", name_of(m)), &model, &sol, &s_points)?);
        }
    } else if lambda > 1.0 {
        let q = extinction_point(lambda)?;
        s_points = (1..10).map(|i| q + (1.0 - q) * i as f64 / 10.0).collect();
        let sol = KoenigsSolution::log_q(lambda)?;
        checks.push(residual_item("logQ quadrature", &model, &sol, &s_points)?);
    } else {
        return Err(Error::Domain("the Schroeder form needs lambda != 1; use the abel suite".into()).into());
    }
    let p = params(&[
        ("lambda", json!(lambda)),
        ("bigk", json!(bigk)),
        ("order", json!(order)),
        ("t_grid", json!(T_GRID)),
        ("s_grid", json!(s_points)),
        ("precision", json!(precision_name(summation))),
    ]);
    Ok(CheckReport::new("schroeder", p, checks))
}

/// `|U(F(t,s)) - Kt - U(s)|` for `λ ≤ 1`.
pub fn abel(lambda: f64, bigk: f64, order: usize, summation: Summation) -> CliResult<CheckReport> {
    let model = BranchingModel::new(lambda, bigk)?;
    if lambda > 1.0 {
        return Err(Error::Domain("the Abel form needs lambda <= 1".into()).into());
    }
    let s_points = S_GRID.points();
    let mut methods = vec![MethodArg::RecipSeries0];
    if lambda == 1.0 {
        methods.insert(0, MethodArg::ClosedForm1);
    }
    let mut checks = Vec::new();
    for m in methods {
        let sol = solution(KoenigsKind::U, Some(m), lambda, order, summation)?;
        checks.push(residual_item(&format!("U {}", name_of(m)), &model, &sol, &s_points)?);
    }
    let p = params(&[
        ("lambda", json!(lambda)),
        ("bigk", json!(bigk)),
        ("order", json!(order)),
        ("t_grid", json!(T_GRID)),
        ("s_grid", json!(s_points)),
        ("precision", json!(precision_name(summation))),
    ]);
    Ok(CheckReport::new("abel", p, checks))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParams {
    pub lambda: f64,
    pub bigk: f64,
    pub t: f64,
    pub replicates: u64,
    pub seed: u64,
    /// `None` picks [`SUPERCRITICAL_CAP`] for `λ > 1` and the library default otherwise.
    pub cap: Option<u64>,
}

impl McParams {
    pub fn cap(&self) -> u64 {
        self.cap.unwrap_or(if self.lambda > 1.0 { SUPERCRITICAL_CAP } else { DEFAULT_CAP })
    }

    fn config(&self) -> CliResult<SimConfig> {
        let model = BranchingModel::new(self.lambda, self.bigk)?;
        Ok(SimConfig::new(model, self.t, self.replicates, self.seed).with_cap(self.cap()))
    }

    fn to_params(self) -> BTreeMap<String, Value> {
        params(&[
            ("lambda", json!(self.lambda)),
            ("bigk", json!(self.bigk)),
            ("t", json!(self.t)),
            ("replicates", json!(self.replicates)),
            ("seed", json!(self.seed)),
            ("cap", json!(self.cap())),
        ])
    }
}

fn z_item(name: &str, estimate: f64, se: f64, reference: f64) -> CheckItem {
    let diff = (estimate - reference).abs();
    let z = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    CheckItem::at_most(name, z, Z_TOLERANCE)
        .with_detail(json!({"estimate": estimate, "se": se, "reference": reference}))
}

/// Simulated extinction fraction and mean against the ODE and `M(t)`.
/// The mean is compared only when no replicate was truncated; in the
/// supercritical case the extinction fraction is also compared with `q`.
pub fn montecarlo(p: McParams) -> CliResult<CheckReport> {
    let config = p.config()?;
    let out = sim::simulate(&config)?;
    let cp = out.at_horizon();
    let model = config.model;
    let f0 = solve_F(&model, p.t, 0.0)?.value;
    let mut checks = vec![z_item("extinct_fraction vs F(t,0)", cp.extinct_fraction, cp.extinct_se, f0)];
    if p.lambda > 1.0 {
        checks.push(z_item("extinct_fraction vs q", cp.extinct_fraction, cp.extinct_se, model.classify().q));
    }
    if out.truncated == 0 {
        checks.push(z_item("mean vs M(t)", cp.mean_estimate, cp.mean_se, model.mean(p.t)?));
    }
    let mut params = p.to_params();
    params.insert("truncated".into(), json!(out.truncated));
    Ok(CheckReport::new("montecarlo", params, checks))
}

/// Conditional histogram at the horizon against `f_1 = (1-λ)e^λ` and
/// `f_2 = λ(e^λ-1) f_1/2`.
pub fn lcl(p: McParams) -> CliResult<CheckReport> {
    let config = p.config()?;
    let est = sim::lcl_estimate(&config)?;
    let l = p.lambda;
    let f1 = (1.0 - l) * l.exp();
    let f2 = l * l.exp_m1() * f1 / 2.0;
    let mut checks = Vec::new();
    for (n, reference) in [(1u64, f1), (2, f2)] {
        let (est_n, se) = est.get(n).unwrap_or((0.0, 0.0));
        checks.push(z_item(&format!("f{n}"), est_n, se, reference));
    }
    let mut params = p.to_params();
    params.insert("survivors".into(), json!(est.survivors));
    Ok(CheckReport::new("lcl", params, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossmethod_passes_at_one_half() {
        let r = crossmethod(0.5, 80, CROSS_GRID, Summation::Auto).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.checks.len(), 7);
        assert!(crossmethod(1.0, 80, CROSS_GRID, Summation::Auto).is_err());
    }

    #[test]
    fn abel_subcritical_too() {
        assert!(abel(0.5, 1.0, 80, Summation::Auto).unwrap().pass);
        assert!(abel(2.0, 1.0, 80, Summation::Auto).is_err());
        assert!(schroeder(1.0, 1.0, 80, Summation::Auto).is_err());
    }

    #[test]
    fn z_scores() {
        assert_eq!(z_item("x", 1.0, 0.0, 1.0).value, 0.0);
        assert!(!z_item("x", 1.0, 0.0, 2.0).pass);
        assert!(z_item("x", 1.0, 0.5, 2.0).pass);
    }
}
