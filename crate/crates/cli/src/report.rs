use std::io::Write;

use anyhow::Result;
use concprob::rational::{format_rational, to_f64, Rational};
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "concprob-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn equal(name: impl Into<String>, got: &Rational, want: &Rational) -> Self {
        let detail = if got == want {
            String::new()
        } else {
            format!(
                "got {}, expected {}",
                format_rational(got),
                format_rational(want)
            )
        };
        Check::new(name, got == want, detail)
    }
}

/// Rows for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// An exact rational cell followed by its decimal approximation.
pub fn rat_cells(r: &Rational) -> [String; 2] {
    [format_rational(r), format!("{:.6}", to_f64(r))]
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub inputs: Value,
    pub result: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl Report {
    pub fn new(
        command: &str,
        inputs: impl Serialize,
        result: impl Serialize,
        checks: Vec<Check>,
    ) -> Result<Self> {
        Ok(Report {
            schema: SCHEMA,
            command: command.to_string(),
            inputs: serde_json::to_value(inputs)?,
            result: serde_json::to_value(result)?,
            passed: checks.iter().all(|c| c.passed),
            checks,
            elapsed_ms: None,
            table: None,
        })
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)?;
        Ok(())
    }

    /// The command's table, or the list of checks when it has none.
    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.table {
            Some(t) => {
                w.write_record(&t.headers)?;
                for r in &t.rows {
                    w.write_record(r)?;
                }
            }
            None => {
                w.write_record(["check", "passed", "detail"])?;
                for c in &self.checks {
                    w.write_record([
                        c.name.as_str(),
                        if c.passed { "true" } else { "false" },
                        &c.detail,
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
