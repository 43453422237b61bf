//! Parsing of `λ`, grids and the precision switch.

use koenigs_core::series::Summation;

use crate::error::{CliError, CliResult};

/// Largest integer that converts to `f64` exactly.
const EXACT_INT: u64 = 1 << 53;

/// Longest grid accepted on the command line.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// `"0.5"` or `"17/18"`. A fraction is read as two integers and divided
/// once, so it is the correctly rounded value of the rational.
pub fn parse_lambda(text: &str) -> CliResult<f64> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((n, d)) => {
            let n: u64 = n.trim().parse().map_err(|_| bad_number(text))?;
            let d: u64 = d.trim().parse().map_err(|_| bad_number(text))?;
            if d == 0 {
                return Err(CliError::usage(format!("zero denominator in {text:?}")));
            }
            if n > EXACT_INT || d > EXACT_INT {
                return Err(CliError::usage(format!("{text:?}: numerator and denominator must be at most 2^53")));
            }
            n as f64 / d as f64
        }
        None => text.parse::<f64>().map_err(|_| bad_number(text))?,
    };
    if !value.is_finite() {
        return Err(bad_number(text));
    }
    Ok(value)
}

fn bad_number(text: &str) -> CliError {
    CliError::usage(format!("cannot read {text:?} as a number or fraction n/d"))
}

/// Evenly spaced points `lo, lo + step, …` up to `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub const fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }

    /// Points are `lo + i·step` for integer `i`, so no drift accumulates;
    /// `hi` is included when it lies on the lattice up to rounding.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

impl std::str::FromStr for Grid {
    type Err = CliError;

    fn from_str(text: &str) -> CliResult<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, step] = parts[..] else {
            return Err(CliError::usage(format!("grid {text:?} is not lo:hi:step")));
        };
        let grid = Grid::new(parse_lambda(lo)?, parse_lambda(hi)?, parse_lambda(step)?);
        if !(grid.step > 0.0) || grid.hi < grid.lo {
            return Err(CliError::usage(format!("grid {text:?} needs step > 0 and hi >= lo")));
        }
        if grid.len() > MAX_GRID_POINTS {
            return Err(CliError::usage(format!("grid {text:?} has more than {MAX_GRID_POINTS} points")));
        }
        Ok(grid)
    }
}

/// Summation mode from `KOENIGS_PRECISION` (`double` or `extended`).
pub fn precision_from_env() -> CliResult<Summation> {
    match std::env::var("KOENIGS_PRECISION") {
        Err(std::env::VarError::NotPresent) => Ok(Summation::Auto),
        Ok(v) => parse_precision(&v),
        Err(e) => Err(CliError::usage(format!("KOENIGS_PRECISION: {e}"))),
    }
}

pub fn parse_precision(text: &str) -> CliResult<Summation> {
    match text.trim().to_ascii_lowercase().as_str() {
        "" | "double" => Ok(Summation::Auto),
        "extended" => Ok(Summation::Extended),
        other => Err(CliError::usage(format!("KOENIGS_PRECISION must be double or extended, got {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_round_once() {
        assert_eq!(parse_lambda("17/18").unwrap(), 17.0 / 18.0);
        assert_eq!(parse_lambda(" 1/3 ").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_lambda("0.5").unwrap(), 0.5);
        assert!(parse_lambda("1/0").is_err());
        assert!(parse_lambda("-1/2").is_err());
        assert!(parse_lambda("abc").is_err());
        assert!(parse_lambda("inf").is_err());
    }

    #[test]
    fn grid_points() {
        let g: Grid = "0:0.95:0.05".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 20);
        assert_eq!(g.len(), 20);
        assert!((p[19] - 0.95).abs() < 1e-15);
        let g: Grid = "0:1:1/3".parse().unwrap();
        assert_eq!(g.points().len(), 4);
        assert!("0:1".parse::<Grid>().is_err());
        assert!("1:0:0.1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert!("0:1:1e-9".parse::<Grid>().is_err());
    }

    #[test]
    fn precision_names() {
        assert_eq!(parse_precision("double").unwrap(), Summation::Auto);
        assert_eq!(parse_precision("Extended").unwrap(), Summation::Extended);
        assert!(parse_precision("quad").is_err());
    }
}
