use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Column header of the convergence table.
pub const CSV_HEADER: &str = "cuts,lower,upper,gap,time_lower_s,time_upper_s";

/// One training iteration. `lower`/`upper` are the best bounds seen so far;
/// `raw_*` are the values computed in this iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub iteration: usize,
    pub cuts: usize,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub raw_lower: f64,
    pub raw_upper: f64,
    /// Cumulative wall time of forward and backward passes.
    pub time_lower_s: f64,
    /// Cumulative wall time of upper-bound sweeps.
    pub time_upper_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub rows: Vec<ReportRow>,
    /// Whether `gap ≤ tol` was reached before the iteration limit.
    pub converged: bool,
}

impl TrainReport {
    pub fn last(&self) -> Option<&ReportRow> {
        self.rows.last()
    }

    pub fn lower(&self) -> f64 {
        self.last().map_or(f64::NEG_INFINITY, |r| r.lower)
    }

    pub fn upper(&self) -> f64 {
        self.last().map_or(f64::INFINITY, |r| r.upper)
    }

    pub fn gap(&self) -> f64 {
        self.last().map_or(f64::INFINITY, |r| r.gap)
    }

    /// Writes the convergence table with times at 0.1 s resolution.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER.split(','))?;
        for r in &self.rows {
            w.write_record([
                r.cuts.to_string(),
                r.lower.to_string(),
                r.upper.to_string(),
                r.gap.to_string(),
                format!("{:.1}", r.time_lower_s),
                format!("{:.1}", r.time_upper_s),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Full per-iteration series, including raw bounds, for plotting.
    pub fn save_series(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_the_fixed_header_and_rounded_times() {
        let rep = TrainReport {
            rows: vec![ReportRow {
                iteration: 1,
                cuts: 10,
                lower: -3.5,
                upper: 1.25,
                gap: 4.75,
                raw_lower: -3.5,
                raw_upper: 1.25,
                time_lower_s: 0.04,
                time_upper_s: 1.26,
            }],
            converged: false,
        };
        let s = rep.to_csv_string();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("10,-3.5,1.25,4.75,0.0,1.3"));
    }
}
