use std::fmt;
use std::io::Write;

use clap::ValueEnum;
use lowsnr::region::RegionBoundary;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{bad, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    /// Converts a rate held in nats.
    pub fn rate(self, nats: f64) -> f64 {
        match self {
            Unit::Nats => nats,
            Unit::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Flag(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64.
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Flag(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Flag(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

/// A subset-sum constraint `Σ w_k R_k ≤ bound`, bound already in output units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintRow {
    pub kind: String,
    pub users: Vec<usize>,
    pub weights: Vec<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub constraints: Vec<ConstraintRow>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    /// Appends every point of `region`, each rate converted with `scale`,
    /// after the `prefix` cells; the region kind goes last.
    pub fn push_region(
        &mut self,
        prefix: &[Cell],
        region: &RegionBoundary,
        scale: impl Fn(f64) -> f64,
    ) {
        for p in &region.points {
            let mut row = prefix.to_vec();
            row.extend(p.rates.iter().map(|r| Cell::Num(scale(*r))));
            row.push(Cell::Text(region.kind.as_str().to_string()));
            self.rows.push(row);
        }
        for c in &region.constraints {
            self.constraints.push(ConstraintRow {
                kind: region.kind.as_str().to_string(),
                users: c.users.iter().map(|u| u + 1).collect(),
                weights: c.weights.clone(),
                bound: scale(c.bound),
            });
        }
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| bad(format!("cannot format CSV: {e}"));
                w.write_record(&self.columns).map_err(io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
                }
                w.into_inner()
                    .map_err(|e| bad(format!("cannot format CSV: {e}")))
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                    .collect();
                let mut doc = json!({ "columns": self.columns, "rows": rows });
                if !self.constraints.is_empty() {
                    doc["constraints"] = json!(self.constraints);
                }
                let mut out = serde_json::to_vec_pretty(&doc)
                    .map_err(|e| bad(format!("cannot format JSON: {e}")))?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

pub fn emit(bytes: &[u8], out: Option<&std::path::Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| bad(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| bad(format!("cannot write output: {e}"))),
    }
}
