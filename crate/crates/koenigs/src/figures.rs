//! Curve data for the seven figures, one CSV per curve plus `manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use koenigs_core::koenigs::{lcl_pmf, KoenigsKind};
use koenigs_core::series::Summation;
use koenigs_core::BranchingModel;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::check::precision_name;
use crate::error::{CliError, CliResult};
use crate::eval::{solution, tabulate, MethodArg};
use crate::params::{parse_lambda, Grid};
use crate::table::{Axis, Row, Table};

pub const FIGURES: std::ops::RangeInclusive<u8> = 1..=7;

const FIG1: [&str; 6] = ["1/3", "1/2", "2/3", "1", "2", "3"];
const FIG2: [&str; 3] = ["1/6", "5/6", "17/18"];
const SUBCRITICAL: [&str; 3] = ["1/3", "1/2", "2/3"];

/// `[0, 1]` for bounded curves.
const UNIT: Grid = Grid::new(0.0, 1.0, 0.01);
/// Curves that blow up at 1 stop here.
const BELOW_POLE: Grid = Grid::new(0.0, 0.99, 0.01);
/// Histogram length in figure 3.
pub const HISTOGRAM_BARS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// File stem, e.g. `fig2_B_lambda_17-18`.
    pub name: String,
    pub kind: String,
    pub lambda: String,
    pub table: Table,
    pub notes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub kind: String,
    pub lambda: String,
    pub method: String,
    pub rows: usize,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Parameters {
    pub figure: u8,
    pub lambdas: Vec<String>,
    pub bigk: f64,
    pub order: usize,
    pub s_grid: String,
    pub t_grid: Option<String>,
    pub seed: Option<u64>,
    pub precision: String,
}

/// Describes every file of one figure. Holds no timestamps, so it is
/// byte-identical across runs with the same parameters.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub tool: String,
    pub version: String,
    pub parameters: Parameters,
    pub files: Vec<FileEntry>,
    pub warnings: Vec<String>,
}

fn stem(fig: u8, kind: &str, lambda: &str) -> String {
    format!("fig{fig}_{kind}_lambda_{}", lambda.replace('/', "-"))
}

fn curve(fig: u8, kind: &str, lambda: &str, table: Table) -> Curve {
    Curve { name: stem(fig, kind, lambda), kind: kind.into(), lambda: lambda.into(), table, notes: BTreeMap::new() }
}

fn koenigs_curve(
    fig: u8,
    kind: KoenigsKind,
    method: MethodArg,
    lambda: &str,
    grid: Grid,
    order: usize,
    summation: Summation,
) -> CliResult<Curve> {
    let sol = solution(kind, Some(method), parse_lambda(lambda)?, order, summation)?;
    let table = tabulate(&sol, &grid.points())?;
    Ok(curve(fig, &format!("{kind:?}"), lambda, table))
}

fn h_curve(lambda: &str) -> CliResult<Curve> {
    let model = BranchingModel::with_lambda(parse_lambda(lambda)?)?;
    let mut table = Table::new(Axis::S);
    for s in UNIT.points() {
        table.rows.push(Row { x: s, value: model.h_eval(s), method: "closed-form".into(), tail_estimate: 0.0 });
    }
    Ok(curve(1, "h", lambda, table))
}

/// First [`HISTOGRAM_BARS`] masses of the limit conditional law. The notes
/// record the missing mass and the tail of the order-`order` series.
fn histogram(lambda: &str, order: usize) -> CliResult<Curve> {
    let l = parse_lambda(lambda)?;
    let pmf = lcl_pmf(l, order.max(HISTOGRAM_BARS))?;
    let mut table = Table::new(Axis::N);
    for &(n, v) in pmf.entries.iter().take(HISTOGRAM_BARS) {
        table.rows.push(Row { x: n as f64, value: v, method: "recurrence0".into(), tail_estimate: 0.0 });
    }
    let shown: f64 = pmf.entries.iter().take(HISTOGRAM_BARS).map(|e| e.1).sum();
    let tail: f64 = pmf.entries.iter().skip(HISTOGRAM_BARS).rev().map(|e| e.1).sum();
    let mut c = curve(3, "lcl", lambda, table);
    c.notes.insert("mass".into(), shown);
    c.notes.insert("deficit".into(), 1.0 - shown);
    c.notes.insert("series_tail".into(), tail);
    Ok(c)
}

/// `C = e^U` next to a `U` curve.
fn exp_curve(u: &Curve) -> Curve {
    let mut table = u.table.clone();
    for r in &mut table.rows {
        r.value = r.value.exp();
        r.tail_estimate *= r.value.max(1.0);
    }
    curve(7, "C", &u.lambda, table)
}

pub fn lambdas(fig: u8) -> Vec<&'static str> {
    match fig {
        1 => FIG1.to_vec(),
        2 => FIG2.to_vec(),
        7 => SUBCRITICAL.iter().copied().chain(["1"]).collect(),
        _ => SUBCRITICAL.to_vec(),
    }
}

fn s_grid(fig: u8) -> Grid {
    match fig {
        4 | 7 => BELOW_POLE,
        _ => UNIT,
    }
}

/// Curves of figure `fig`, in a fixed order.
pub fn curves(fig: u8, order: usize, summation: Summation) -> CliResult<Vec<Curve>> {
    use KoenigsKind as K;
    use MethodArg as M;
    if !FIGURES.contains(&fig) {
        return Err(CliError::usage(format!("figure must be 1..=7, got {fig}")));
    }
    let grid = s_grid(fig);
    let ls = lambdas(fig);
    let per_lambda: Vec<Vec<Curve>> = ls
        .par_iter()
        .map(|&l| -> CliResult<Vec<Curve>> {
            Ok(match fig {
                1 => vec![h_curve(l)?],
                2 => vec![koenigs_curve(2, K::B, M::Recurrence0, l, grid, order, summation)?],
                3 => vec![histogram(l, order)?],
                4 => vec![koenigs_curve(4, K::A, M::GForm1, l, grid, order, summation)?],
                5 => vec![koenigs_curve(5, K::B, M::GForm1, l, grid, order, summation)?],
                6 => vec![koenigs_curve(6, K::G, M::GForm1, l, grid, order, summation)?],
                _ => {
                    let method = if l == "1" { M::ClosedForm1 } else { M::GForm1 };
                    let u = koenigs_curve(7, K::U, method, l, grid, order, summation)?;
                    let c = exp_curve(&u);
                    vec![u, c]
                }
            })
        })
        .collect::<CliResult<_>>()?;
    Ok(per_lambda.into_iter().flatten().collect())
}

/// Writes the curves of `fig` and the manifest into `out`.
pub fn write_figure(fig: u8, out: &Path, order: usize, summation: Summation) -> CliResult<Manifest> {
    let curves = curves(fig, order, summation)?;
    fs::create_dir_all(out)?;
    let mut files = Vec::with_capacity(curves.len());
    let mut warnings = Vec::new();
    for c in &curves {
        let bytes = c.table.to_csv_bytes()?;
        let path = format!("{}.csv", c.name);
        fs::write(out.join(&path), &bytes)?;
        let mut methods: Vec<&str> = c.table.rows.iter().map(|r| r.method.as_str()).collect();
        methods.sort_unstable();
        methods.dedup();
        for w in &c.table.warnings {
            warnings.push(format!("{}: {w}", c.name));
        }
        files.push(FileEntry {
            path,
            sha256: hex::encode(Sha256::digest(&bytes)),
            kind: c.kind.clone(),
            lambda: c.lambda.clone(),
            method: methods.join("+"),
            rows: c.table.rows.len(),
            notes: c.notes.clone(),
            warnings: c.table.warnings.clone(),
        });
    }
    let manifest = Manifest {
        command: format!("koenigs figures {fig} --order {order}"),
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        parameters: Parameters {
            figure: fig,
            lambdas: lambdas(fig).iter().map(|s| s.to_string()).collect(),
            bigk: 1.0,
            order,
            s_grid: if fig == 3 { format!("n = 1..={HISTOGRAM_BARS}") } else { s_grid(fig).to_string() },
            t_grid: None,
            seed: None,
            precision: precision_name(summation).into(),
        },
        files,
        warnings,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(out.join("manifest.json"), text)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_two_near_linear() {
        let cs = curves(2, 80, Summation::Auto).unwrap();
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[0].name, "fig2_B_lambda_1-6");
        let sup = cs[0].table.rows.iter().map(|r| (r.value - (1.0 - r.x)).abs()).fold(0.0, f64::max);
        assert!(sup <= 0.05);
    }

    #[test]
    fn histograms_have_small_deficit() {
        for c in curves(3, 80, Summation::Auto).unwrap() {
            let deficit = c.notes["deficit"];
            assert!(deficit >= 0.0 && (deficit - c.notes["series_tail"]).abs() < 1e-12, "{:?}", c.notes);
        }
    }

    #[test]
    fn figure_seven_c_starts_at_one() {
        let cs = curves(7, 80, Summation::Auto).unwrap();
        assert_eq!(cs.len(), 8);
        for c in cs.iter().filter(|c| c.kind == "C") {
            let v = c.table.values();
            assert_eq!(v[0], 1.0);
            assert!(v.iter().all(|&x| x >= 1.0));
        }
    }

    #[test]
    fn bad_figure() {
        assert!(curves(8, 80, Summation::Auto).is_err());
    }
}
