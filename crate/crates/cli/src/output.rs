//! Rendering of command results as JSON, CSV, or plot data.

use std::io;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plotdata,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

/// Header and rows of a CSV table.
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// A named two-column series of `(breakpoint, value)` pairs.
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Artifact {
    pub json: Value,
    pub table: Option<Table>,
    pub plot: Vec<Series>,
    /// A verification that ran and failed; maps to exit status 1.
    pub failed: bool,
}

impl Artifact {
    pub fn json(json: Value) -> Self {
        Artifact {
            json,
            table: None,
            plot: Vec::new(),
            failed: false,
        }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn with_series(mut self, series: Series) -> Self {
        self.plot.push(series);
        self
    }

    pub fn failed_if(mut self, failed: bool) -> Self {
        self.failed = failed;
        self
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(to_json_line(&self.json)),
            Format::Csv => {
                let t = self
                    .table
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("this command has no csv form".into()))?;
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&t.headers).map_err(csv_err)?;
                for row in &t.rows {
                    w.write_record(row).map_err(csv_err)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
            Format::Plotdata => {
                if self.plot.is_empty() {
                    return Err(CliError::Usage("this command has no plotdata form".into()));
                }
                let mut out = String::new();
                for (k, s) in self.plot.iter().enumerate() {
                    if k > 0 {
                        out.push_str("\n\n");
                    }
                    out.push_str(&format!("# {}\n# x y\n", s.name));
                    for (x, y) in &s.points {
                        out.push_str(&format!("{:.17e} {:.17e}\n", x, y));
                    }
                }
                Ok(out)
            }
        }
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(io::Error::other(e.to_string()))
}

/// One-line JSON with a space after `:` and `,`, e.g. `{"kappa": 7}`.
pub fn to_json_line(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Spaced);
    v.serialize(&mut ser).expect("serializing a Value cannot fail");
    let mut s = String::from_utf8(buf).expect("json is utf-8");
    s.push('\n');
    s
}

struct Spaced;

impl Formatter for Spaced {
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }
}
