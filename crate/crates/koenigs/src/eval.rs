//! Tabulation of the Koenigs functions, the pgf and the two distributions.

use clap::ValueEnum;
use koenigs_core::koenigs::{
    extinction_point, invariant_measure, lcl_pmf, KoenigsKind, KoenigsSolution, DEFAULT_EXPLICIT_TERMS,
};
use koenigs_core::oracle::{solve_F, ODE_TOLERANCE};
use koenigs_core::series::Summation;
use koenigs_core::{BranchingModel, Error};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::params::Grid;
use crate::table::{method_name, Axis, Row, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalKind {
    #[value(name = "B")]
    B,
    #[value(name = "A")]
    A,
    #[value(name = "C")]
    C,
    #[value(name = "U")]
    U,
    #[value(name = "G")]
    G,
    #[value(name = "F")]
    F,
    #[value(name = "lcl")]
    Lcl,
    #[value(name = "measure")]
    Measure,
    #[value(name = "logQ")]
    LogQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Recurrence0,
    Recurrence1,
    RecipSeries0,
    GForm1,
    EiExplicit,
    Quadrature,
    ClosedForm1,
}

/// Default s-grid.
pub const DEFAULT_GRID: Grid = Grid::new(0.0, 0.95, 0.05);

/// Default number of rows for `lcl` and `measure`.
pub const DEFAULT_PMF_ROWS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRequest {
    pub kind: EvalKind,
    pub method: Option<MethodArg>,
    pub lambda: f64,
    pub bigk: f64,
    pub order: usize,
    pub grid: Option<Grid>,
    /// Time for `F` along an s-grid.
    pub t: f64,
    /// Time grid for `F` at fixed `s`; takes precedence over `grid`.
    pub t_grid: Option<Grid>,
    /// Fixed `s` for `F` along a time grid.
    pub s: f64,
    pub n: usize,
    pub summation: Summation,
}

impl EvalRequest {
    pub fn new(kind: EvalKind, lambda: f64) -> Self {
        Self {
            kind,
            method: None,
            lambda,
            bigk: 1.0,
            order: koenigs_core::DEFAULT_ORDER,
            grid: None,
            t: 1.0,
            t_grid: None,
            s: 0.0,
            n: DEFAULT_PMF_ROWS,
            summation: Summation::Auto,
        }
    }
}

fn unsupported(kind: KoenigsKind, m: MethodArg) -> CliError {
    CliError::usage(format!("method {} is not available for {kind:?}", m.to_possible_value().unwrap().get_name()))
}

fn require(cond: bool, msg: &str) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg.into()).into())
    }
}

/// The construction of `kind` selected by `method`, or the default one.
pub fn solution(
    kind: KoenigsKind,
    method: Option<MethodArg>,
    lambda: f64,
    order: usize,
    summation: Summation,
) -> CliResult<KoenigsSolution> {
    use MethodArg as M;
    let terms = DEFAULT_EXPLICIT_TERMS;
    let sol = match kind {
        KoenigsKind::B => match method.unwrap_or(M::Recurrence0) {
            M::Recurrence0 => KoenigsSolution::b_recurrence0(lambda, order)?,
            M::RecipSeries0 => {
                require(lambda < 1.0, "B requires lambda < 1")?;
                KoenigsSolution::exp_series0(lambda, order)?
            }
            M::GForm1 => KoenigsSolution::b_via_g(lambda, order)?,
            M::Recurrence1 => KoenigsSolution::b_recurrence1(lambda, order)?,
            M::Quadrature => KoenigsSolution::quadrature(kind, lambda)?,
            m => return Err(unsupported(kind, m)),
        },
        KoenigsKind::A => {
            require(lambda < 1.0, "A requires lambda < 1")?;
            match method.unwrap_or(M::RecipSeries0) {
                M::RecipSeries0 => KoenigsSolution::a_series0(lambda, order)?,
                M::GForm1 => KoenigsSolution::log_via_g(kind, lambda, order)?,
                M::EiExplicit => KoenigsSolution::ei_explicit(kind, lambda, terms)?,
                M::Quadrature => KoenigsSolution::quadrature(kind, lambda)?,
                m => return Err(unsupported(kind, m)),
            }
        }
        KoenigsKind::U => {
            let default = if lambda == 1.0 { M::ClosedForm1 } else { M::RecipSeries0 };
            match method.unwrap_or(default) {
                M::RecipSeries0 => KoenigsSolution::u_series0(lambda, order)?,
                M::GForm1 => KoenigsSolution::log_via_g(kind, lambda, order)?,
                M::ClosedForm1 => {
                    require(lambda == 1.0, "the expansion about the pole needs lambda = 1")?;
                    KoenigsSolution::critical_near1(kind, order)?
                }
                M::EiExplicit => KoenigsSolution::ei_explicit(kind, lambda, terms)?,
                M::Quadrature => KoenigsSolution::quadrature(kind, lambda)?,
                m => return Err(unsupported(kind, m)),
            }
        }
        KoenigsKind::C => {
            require(lambda == 1.0, "C requires lambda = 1")?;
            match method.unwrap_or(M::ClosedForm1) {
                M::ClosedForm1 => KoenigsSolution::critical_near1(kind, order)?,
                M::Recurrence0 => KoenigsSolution::c_recurrence0(order),
                M::RecipSeries0 => KoenigsSolution::exp_series0(lambda, order)?,
                M::Quadrature => KoenigsSolution::quadrature(kind, lambda)?,
                m => return Err(unsupported(kind, m)),
            }
        }
        KoenigsKind::G => match method.unwrap_or(M::GForm1) {
            M::GForm1 => KoenigsSolution::g_series(lambda, order)?,
            M::EiExplicit => KoenigsSolution::ei_explicit(kind, lambda, terms)?,
            M::Quadrature => KoenigsSolution::quadrature(kind, lambda)?,
            m => return Err(unsupported(kind, m)),
        },
        KoenigsKind::LogQ => match method.unwrap_or(M::Quadrature) {
            M::Quadrature => KoenigsSolution::log_q(lambda)?,
            m => return Err(unsupported(kind, m)),
        },
        KoenigsKind::D => match method.unwrap_or(M::EiExplicit) {
            M::EiExplicit => KoenigsSolution::ei_explicit(kind, lambda, terms)?,
            M::Quadrature => KoenigsSolution::quadrature(kind, lambda)?,
            m => return Err(unsupported(kind, m)),
        },
    };
    Ok(sol.with_summation(summation))
}

/// `solution` on a list of points, evaluated in parallel, rows in input order.
pub fn tabulate(sol: &KoenigsSolution, points: &[f64]) -> CliResult<Table> {
    let values: Vec<_> = points.par_iter().map(|&s| sol.eval(s)).collect::<Result<_, _>>()?;
    let mut table = Table::new(Axis::S);
    for w in sol.warnings() {
        table.warn(w.clone());
    }
    for (&s, v) in points.iter().zip(values) {
        if let Some(w) = v.warning {
            table.warn(w);
        }
        table.rows.push(Row {
            x: s,
            value: v.value,
            method: method_name(v.method).into(),
            tail_estimate: v.tail_estimate,
        });
    }
    Ok(table)
}

/// Interior points `q + (1-q) i/20`, `i = 1..=19`, of the domain of `log Q`.
pub fn log_q_points(lambda: f64) -> CliResult<Vec<f64>> {
    let q = extinction_point(lambda)?;
    Ok((1..20).map(|i| q + (1.0 - q) * i as f64 / 20.0).collect())
}

fn koenigs_kind(kind: EvalKind) -> Option<KoenigsKind> {
    Some(match kind {
        EvalKind::B => KoenigsKind::B,
        EvalKind::A => KoenigsKind::A,
        EvalKind::C => KoenigsKind::C,
        EvalKind::U => KoenigsKind::U,
        EvalKind::G => KoenigsKind::G,
        EvalKind::LogQ => KoenigsKind::LogQ,
        EvalKind::F | EvalKind::Lcl | EvalKind::Measure => return None,
    })
}

pub fn eval(req: &EvalRequest) -> CliResult<Table> {
    if let Some(kind) = koenigs_kind(req.kind) {
        let sol = solution(kind, req.method, req.lambda, req.order, req.summation)?;
        let points = match (req.grid, kind) {
            (Some(g), _) => g.points(),
            (None, KoenigsKind::LogQ) => log_q_points(req.lambda)?,
            (None, _) => DEFAULT_GRID.points(),
        };
        return tabulate(&sol, &points);
    }
    match req.kind {
        EvalKind::F => eval_pgf(req),
        EvalKind::Lcl | EvalKind::Measure => eval_pmf(req),
        _ => unreachable!("handled above"),
    }
}

fn eval_pgf(req: &EvalRequest) -> CliResult<Table> {
    if req.method.is_some() {
        return Err(CliError::usage("F is always computed by the ODE solver; drop --method"));
    }
    let model = BranchingModel::new(req.lambda, req.bigk)?;
    let (axis, pairs): (Axis, Vec<(f64, f64)>) = match req.t_grid {
        Some(g) => (Axis::T, g.points().into_iter().map(|t| (t, req.s)).collect()),
        None => (Axis::S, req.grid.unwrap_or(DEFAULT_GRID).points().into_iter().map(|s| (req.t, s)).collect()),
    };
    let sols: Vec<_> = pairs.par_iter().map(|&(t, s)| solve_F(&model, t, s)).collect::<Result<_, _>>()?;
    let mut table = Table::new(axis);
    for (&(t, s), sol) in pairs.iter().zip(sols) {
        if sol.clamped {
            table.warn(format!("F({t}, {s}) left [0, 1] and was clamped"));
        }
        table.rows.push(Row {
            x: if axis == Axis::T { t } else { s },
            value: sol.value,
            method: "ode".into(),
            tail_estimate: sol.max_local_error * ODE_TOLERANCE,
        });
    }
    Ok(table)
}

fn eval_pmf(req: &EvalRequest) -> CliResult<Table> {
    if req.n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let (pmf, method) = match req.kind {
        EvalKind::Lcl => {
            if !matches!(req.method, None | Some(MethodArg::Recurrence0)) {
                return Err(CliError::usage("lcl is read off the recurrence at 0; use --method recurrence0"));
            }
            (lcl_pmf(req.lambda, req.n)?, "recurrence0")
        }
        _ => {
            if !matches!(req.method, None | Some(MethodArg::RecipSeries0)) {
                return Err(CliError::usage("measure is read off the series at 0; use --method recip-series0"));
            }
            (invariant_measure(req.n)?, "recip-series0")
        }
    };
    let mut table = Table::new(Axis::N);
    for (n, v) in pmf.entries {
        table.rows.push(Row { x: n as f64, value: v, method: method.into(), tail_estimate: 0.0 });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_default_grid_is_decreasing() {
        let t = eval(&EvalRequest::new(EvalKind::B, 0.5)).unwrap();
        assert_eq!(t.rows.len(), 20);
        assert!(t.values().windows(2).all(|w| w[1] < w[0]));
        assert!(t.rows.iter().all(|r| r.method == "recurrence0" && r.tail_estimate < 1e-10));
    }

    #[test]
    fn domain_errors() {
        let e = eval(&EvalRequest::new(EvalKind::B, 1.0)).unwrap_err();
        assert_eq!(e.exit_code(), crate::error::exit::USAGE);
        assert!(eval(&EvalRequest::new(EvalKind::C, 0.5)).is_err());
        assert!(eval(&EvalRequest::new(EvalKind::LogQ, 0.5)).is_err());
        let mut r = EvalRequest::new(EvalKind::G, 0.5);
        r.method = Some(MethodArg::ClosedForm1);
        assert!(matches!(eval(&r), Err(CliError::Usage(_))));
    }

    #[test]
    fn measure_starts_at_e() {
        let mut r = EvalRequest::new(EvalKind::Measure, 1.0);
        r.n = 10;
        let t = eval(&r).unwrap();
        assert_eq!(t.rows.len(), 10);
        assert_eq!(t.rows[0].x, 1.0);
        assert!((t.rows[0].value - std::f64::consts::E).abs() < 1e-14);
        assert!(t.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn pgf_along_time() {
        let mut r = EvalRequest::new(EvalKind::F, 0.5);
        r.t_grid = Some(Grid::new(0.0, 2.0, 0.5));
        let t = eval(&r).unwrap();
        assert_eq!(t.axis, Axis::T);
        assert_eq!(t.rows[0].value, 0.0);
        assert!(t.values().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn log_q_default_grid() {
        let t = eval(&EvalRequest::new(EvalKind::LogQ, 2.0)).unwrap();
        assert_eq!(t.rows.len(), 19);
        assert!(t.values().windows(2).all(|w| w[1] > w[0]));
    }
}
