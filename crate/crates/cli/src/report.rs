//! Report rows and the table, JSON and CSV writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;

use crate::scenario::ScenarioFile;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// A row that can be rendered as a table or CSV line.
pub trait Row: Serialize {
    fn header() -> &'static [&'static str];
    /// Cells with full-precision numbers.
    fn cells(&self) -> Vec<String>;
    /// Cells rounded for humans.
    fn display_cells(&self) -> Vec<String> {
        self.cells()
    }
}

/// One per-atom quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub position: String,
    pub atom: String,
    pub quantity: String,
    pub value: f64,
    /// Bracket width or constraint residual of the solver; absent for closed forms.
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub argmax: Option<f64>,
    pub multiplier: Option<f64>,
}

impl ReportRow {
    pub fn closed_form(position: &str, atom: &str, quantity: &str, value: f64) -> Self {
        Self {
            position: position.into(),
            atom: atom.into(),
            quantity: quantity.into(),
            value,
            residual: None,
            iterations: None,
            argmax: None,
            multiplier: None,
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
fn exact(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn rounded(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&v.abs()) {
        format!("{v:.10}")
    } else {
        format!("{v:.4e}")
    }
}

fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

impl Row for ReportRow {
    fn header() -> &'static [&'static str] {
        &[
            "position",
            "atom",
            "quantity",
            "value",
            "residual",
            "iterations",
            "argmax",
            "multiplier",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.position.clone(),
            self.atom.clone(),
            self.quantity.clone(),
            exact(self.value),
            opt(self.residual, exact),
            self.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt(self.argmax, exact),
            opt(self.multiplier, exact),
        ]
    }

    fn display_cells(&self) -> Vec<String> {
        vec![
            self.position.clone(),
            self.atom.clone(),
            self.quantity.clone(),
            rounded(self.value),
            opt(self.residual, |v| format!("{v:.2e}")),
            self.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt(self.argmax, rounded),
            opt(self.multiplier, rounded),
        ]
    }
}

/// Outcome of one axiom in `check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomRow {
    pub operator: String,
    pub axiom: String,
    pub checked: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Worst sampled counterexample, when the axiom failed.
    pub counterexample: Option<String>,
}

impl Row for AxiomRow {
    fn header() -> &'static [&'static str] {
        &[
            "operator",
            "axiom",
            "checked",
            "worst_violation",
            "tolerance",
            "passed",
            "counterexample",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.operator.clone(),
            self.axiom.clone(),
            self.checked.to_string(),
            exact(self.worst_violation),
            exact(self.tolerance),
            self.passed.to_string(),
            self.counterexample.clone().unwrap_or_default(),
        ]
    }

    fn display_cells(&self) -> Vec<String> {
        let mut cells = self.cells();
        cells[3] = format!("{:.3e}", self.worst_violation);
        cells[4] = format!("{:.0e}", self.tolerance);
        cells[5] = if self.passed { "pass" } else { "FAIL" }.into();
        cells
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<R> {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub rows: Vec<R>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<ScenarioFile>,
}

impl<R: Row> Report<R> {
    pub fn new(command: &str, parameters: BTreeMap<String, String>, rows: Vec<R>) -> Self {
        Self {
            command: command.into(),
            parameters,
            rows,
            input: None,
        }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Output(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let out = |e: csv::Error| CliError::Output(e.to_string());
                w.write_record(R::header()).map_err(out)?;
                for row in &self.rows {
                    w.write_record(row.cells()).map_err(out)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
                String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
            }
            Format::Table => Ok(self.table()),
        }
    }

    fn table(&self) -> String {
        let header: Vec<String> = R::header().iter().map(|h| h.to_string()).collect();
        let body: Vec<Vec<String>> = self.rows.iter().map(Row::display_cells).collect();
        let mut widths: Vec<usize> = header.iter().map(String::len).collect();
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let _ = write!(out, "# {}", self.command);
        for (k, v) in &self.parameters {
            let _ = write!(out, "  {k}={v}");
        }
        out.push('\n');
        for row in std::iter::once(&header).chain(body.iter()) {
            let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
