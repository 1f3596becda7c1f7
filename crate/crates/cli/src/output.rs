//! CSV tables with a reproducibility header.
//!
//! Floats are written in scientific notation with 17 significant digits, which
//! round-trips every `f64` and never depends on the locale.

use sha2::{Digest, Sha256};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn render_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_f64(*v),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        Cell::Empty => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column names and rows, without the comment header.
    pub fn body(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(render_cell).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Provenance written as `#` comment lines above the table.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub scenario_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(command: &str, scenario_text: &str, seed: u64) -> Self {
        let digest = Sha256::digest(scenario_text.as_bytes());
        Self { command: command.to_string(), scenario_sha256: hex::encode(digest), seed }
    }
}

pub fn render(table: &Table, prov: &Provenance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# dualgain {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# command {}", prov.command);
    let _ = writeln!(out, "# scenario_sha256 {}", prov.scenario_sha256);
    let _ = writeln!(out, "# seed {}", prov.seed);
    out.push_str(&table.body());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456789.12345679, -2.5e-7] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn text_with_commas_is_quoted() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), 1usize.into()]);
        assert_eq!(t.body(), "a,b\n\"x,y\",1\n");
    }
}
