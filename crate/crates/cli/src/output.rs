use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::args::Format;
use crate::CliError;

/// 17 significant digits, no locale.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn sci_opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

/// One CSV/JSON table; `fields` are the header names, in order.
pub trait Record: Serialize {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

pub fn csv_table<R: Record>(rows: &[R]) -> String {
    let mut out = R::HEADER.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.cells().join(","));
        out.push('\n');
    }
    out
}

pub fn json_value<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Compute(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn render_table<R: Record>(rows: &[R], format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => Ok(csv_table(rows)),
        Format::Json => json_value(rows),
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| CliError::Compute(format!("output: cannot write {}: {e}", p.display())))
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Compute(format!("output: {e}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissionRow {
    #[serde(rename = "E")]
    pub e: f64,
    pub k: f64,
    pub q: f64,
    pub theta: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "T2_semiclassical")]
    pub t2_semiclassical: f64,
    pub regime: &'static str,
    #[serde(rename = "T2_exact")]
    pub t2_exact: Option<f64>,
    pub abs_err: Option<f64>,
}

impl Record for TransmissionRow {
    const HEADER: &'static [&'static str] = &[
        "E",
        "k",
        "q",
        "theta",
        "L",
        "T2_semiclassical",
        "regime",
        "T2_exact",
        "abs_err",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            sci(self.e),
            sci(self.k),
            sci(self.q),
            sci(self.theta),
            sci(self.l),
            sci(self.t2_semiclassical),
            self.regime.to_string(),
            sci_opt(self.t2_exact),
            sci_opt(self.abs_err),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceRow {
    #[serde(rename = "E_semiclassical")]
    pub e_semiclassical: Option<f64>,
    pub residual: Option<f64>,
    #[serde(rename = "E_exact")]
    pub e_exact: Option<f64>,
    #[serde(rename = "T2_exact")]
    pub t2_exact: Option<f64>,
    #[serde(rename = "abs_dE")]
    pub abs_de: Option<f64>,
}

impl Record for ResonanceRow {
    const HEADER: &'static [&'static str] = &["E_semiclassical", "residual", "E_exact", "T2_exact", "abs_dE"];

    fn cells(&self) -> Vec<String> {
        [
            self.e_semiclassical,
            self.residual,
            self.e_exact,
            self.t2_exact,
            self.abs_de,
        ]
        .into_iter()
        .map(sci_opt)
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidebandHeader {
    pub gamma: f64,
    pub f: f64,
    pub resonance_residual: f64,
}

impl Record for SidebandHeader {
    const HEADER: &'static [&'static str] = &["gamma", "f", "resonance_residual"];

    fn cells(&self) -> Vec<String> {
        vec![sci(self.gamma), sci(self.f), sci(self.resonance_residual)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidebandRow {
    pub n: i32,
    #[serde(rename = "J_n")]
    pub j_n: f64,
    pub probability: f64,
}

impl Record for SidebandRow {
    const HEADER: &'static [&'static str] = &["n", "J_n", "probability"];

    fn cells(&self) -> Vec<String> {
        vec![self.n.to_string(), sci(self.j_n), sci(self.probability)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchRow {
    pub quench_n: i32,
    pub f: f64,
}

impl Record for QuenchRow {
    const HEADER: &'static [&'static str] = &["quench_n", "f"];

    fn cells(&self) -> Vec<String> {
        vec![self.quench_n.to_string(), sci(self.f)]
    }
}
