//! Four-column CSV tables: abscissa, value, method, tail_estimate.

use std::io::Write;

use koenigs_core::koenigs::Method;

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    S,
    T,
    N,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::S => "s",
            Axis::T => "t",
            Axis::N => "n",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: f64,
    pub value: f64,
    pub method: String,
    pub tail_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub axis: Axis,
    pub rows: Vec<Row>,
    /// Distinct warnings in first-seen order.
    pub warnings: Vec<String>,
}

impl Table {
    pub fn new(axis: Axis) -> Self {
        Self { axis, rows: Vec::new(), warnings: Vec::new() }
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    /// RFC 4180 with a header row and LF line endings.
    pub fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record([self.axis.name(), "value", "method", "tail_estimate"])?;
        for r in &self.rows {
            let x = match self.axis {
                Axis::N => format!("{}", r.x as u64),
                _ => fmt_real(r.x),
            };
            w.write_record([x, fmt_real(r.value), r.method.clone(), fmt_real(r.tail_estimate)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> CliResult<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }
}

/// 17 significant digits.
/// Negative zero is written as `0`.
pub fn fmt_real(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Recurrence0 => "recurrence0",
        Method::Recurrence1 => "recurrence1",
        Method::RecipSeries0 => "recip-series0",
        Method::GForm1 => "g-form1",
        Method::EiExplicit => "ei-explicit",
        Method::Quadrature => "quadrature",
        Method::ClosedForm1 => "closed-form1",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(Axis::N);
        t.rows.push(Row { x: 1.0, value: std::f64::consts::E, method: "recip-series0".into(), tail_estimate: 0.0 });
        let text = String::from_utf8(t.to_csv_bytes().unwrap()).unwrap();
        assert_eq!(
            text,
            "n,value,method,tail_estimate\n1,2.7182818284590451e0,recip-series0,0.0000000000000000e0\n"
        );
        assert_eq!(fmt_real(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_real(-0.0), "0.0000000000000000e0");
    }
}
