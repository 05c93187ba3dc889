use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Flat view of a report's main result, used by the csv and table renderers.
#[derive(Clone, Debug, Default)]
pub struct Rows {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Rows {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Serialize)]
pub struct ReportEnvelope {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub results: Value,
    pub pass: bool,
    pub tool_version: String,
    #[serde(skip)]
    pub rows: Rows,
}

impl ReportEnvelope {
    pub fn new(command: &str, parameters: Map<String, Value>, results: Value, pass: bool, rows: Rows) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            results,
            pass,
            tool_version: ququart::TOOL_VERSION.to_string(),
            rows,
        }
    }
}

/// Scalars as they appear in JSON, so every format shows identical numbers.
fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub fn render(report: &ReportEnvelope, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&report.rows.columns)?;
            for row in &report.rows.rows {
                w.write_record(row.iter().map(cell))?;
            }
            w.flush()
        }
        Format::Table => {
            writeln!(
                out,
                "{} (ququart {}): {}",
                report.command,
                report.tool_version,
                if report.pass { "PASS" } else { "FAIL" }
            )?;
            for (k, v) in &report.parameters {
                writeln!(out, "  {k} = {}", cell(v))?;
            }
            let cells: Vec<Vec<String>> = report.rows.rows.iter().map(|r| r.iter().map(cell).collect()).collect();
            let widths: Vec<usize> = report
                .rows
                .columns
                .iter()
                .enumerate()
                .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
                .collect();
            let line = |fields: Vec<&str>| {
                fields
                    .iter()
                    .zip(&widths)
                    .map(|(f, w)| format!("{f:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            writeln!(out, "{}", line(report.rows.columns.clone()))?;
            for r in &cells {
                writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
            }
            Ok(())
        }
    }
}
