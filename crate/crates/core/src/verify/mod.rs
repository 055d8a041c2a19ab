//! Reproducible numerical experiments and their reports.

mod orr_sommerfeld;
mod roundoff;
mod scaling;
mod smoke;
mod transforms;

pub use orr_sommerfeld::{
    os_convergence_space, os_convergence_time, os_eigenproblem, os_initial_field, os_run,
    os_velocity, OrrSommerfeldCase, OsRun, OsSpaceOptions, OsTimeOptions,
};
pub use roundoff::roundoff_experiment;
pub use scaling::{
    nlogn_ratio, pipeline_scaling, solver_scaling, PipelineOptions, SolverScalingOptions,
};
pub use smoke::{
    channel_smoke, compare_profile, mean_profile, read_profile, solenoidal_perturbation,
    SmokeOptions, SmokeOutcome,
};
pub use transforms::{transforms_selftest, TransformSelftestOptions};

use std::fmt;
use std::io::Write;

/// Where the accepted band of a check comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    /// Published reference value.
    Reference,
    /// Computed independently of the implementation under test.
    Derived,
    /// Structural property with no reference value.
    Property,
    /// Recorded only.
    Measurement,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Reference => "reference",
            Source::Derived => "derived",
            Source::Property => "property",
            Source::Measurement => "measurement",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    AtMost(f64),
    AtLeast(f64),
    Range(f64, f64),
    /// Within a multiplicative factor of the reference value.
    Factor(f64),
    /// Absolute distance from the reference value.
    Absolute(f64),
    None,
}

impl Tolerance {
    pub fn accepts(&self, value: f64, reference: Option<f64>) -> bool {
        if !value.is_finite() {
            return false;
        }
        match *self {
            Tolerance::AtMost(b) => value <= b,
            Tolerance::AtLeast(b) => value >= b,
            Tolerance::Range(lo, hi) => (lo..=hi).contains(&value),
            Tolerance::Factor(k) => reference.is_some_and(|r| value <= r * k && value >= r / k),
            Tolerance::Absolute(d) => reference.is_some_and(|r| (value - r).abs() <= d),
            Tolerance::None => true,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::AtMost(b) => write!(f, "<= {b:e}"),
            Tolerance::AtLeast(b) => write!(f, ">= {b:e}"),
            Tolerance::Range(lo, hi) => write!(f, "in [{lo}, {hi}]"),
            Tolerance::Factor(k) => write!(f, "within factor {k}"),
            Tolerance::Absolute(d) => write!(f, "within {d:e}"),
            Tolerance::None => f.write_str("-"),
        }
    }
}

/// One checked quantity.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub parameters: Vec<(String, String)>,
    pub quantity: String,
    pub measured: f64,
    pub reference: Option<f64>,
    pub tolerance: Tolerance,
    pub source: Source,
    pub pass: bool,
}

/// Result of one experiment: a table laid out like the published one plus
/// the list of checks performed on it.
#[derive(Clone, Debug, Default)]
pub struct ExperimentReport {
    pub id: String,
    pub columns: Vec<String>,
    pub table: Vec<Vec<f64>>,
    pub rows: Vec<ReportRow>,
}

fn params(list: &[(&str, String)]) -> Vec<(String, String)> {
    list.iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

impl ExperimentReport {
    pub fn new(id: &str, columns: &[&str]) -> Self {
        ExperimentReport {
            id: id.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push(
        &mut self,
        parameters: &[(&str, String)],
        quantity: &str,
        measured: f64,
        reference: Option<f64>,
        tolerance: Tolerance,
        source: Source,
    ) -> bool {
        let pass = tolerance.accepts(measured, reference);
        self.rows.push(ReportRow {
            parameters: params(parameters),
            quantity: quantity.to_string(),
            measured,
            reference,
            tolerance,
            source,
            pass,
        });
        pass
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Rows of checks whose parameters contain `key = value`.
    pub fn rows_with<'a>(
        &'a self,
        key: &'a str,
        value: &'a str,
    ) -> impl Iterator<Item = &'a ReportRow> {
        self.rows
            .iter()
            .filter(move |r| r.parameters.iter().any(|(k, v)| k == key && v == value))
    }

    /// Writes the table layout, one line per table row.
    pub fn write_table_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.table {
            let cells: Vec<String> = row.iter().map(|v| csv_number(*v)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Writes every check with its tolerance, source and verdict.
    pub fn write_checks_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "table,parameters,quantity,measured,reference,tolerance,source,pass"
        )?;
        for r in &self.rows {
            let p: Vec<String> = r
                .parameters
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.id,
                p.join(";"),
                r.quantity,
                csv_number(r.measured),
                r.reference.map(csv_number).unwrap_or_default(),
                r.tolerance,
                r.source,
                r.pass
            )?;
        }
        Ok(())
    }

    /// Human-readable summary, one line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let p: Vec<String> = r
                .parameters
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            s.push_str(&format!(
                "[{}] {} {} {} = {:.6e} ({}{})\n",
                if r.pass { "pass" } else { "FAIL" },
                self.id,
                p.join(" "),
                r.quantity,
                r.measured,
                r.tolerance,
                r.reference
                    .map(|v| format!(", ref {v:e}"))
                    .unwrap_or_default()
            ));
        }
        s
    }
}

/// Shortest representation that parses back to the same value; integers
/// are written without exponent.
pub fn csv_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:e}")
    }
}

/// `log(a_i / a_{i-1}) / log(b_i / b_{i-1})` for consecutive entries.
pub fn observed_orders(errors: &[f64], steps: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .zip(steps.windows(2))
        .map(|(e, h)| (e[1] / e[0]).ln() / (h[1] / h[0]).ln())
        .collect()
}
