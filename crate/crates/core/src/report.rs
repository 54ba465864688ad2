//! CSV price tables with a `#`-prefixed metadata header.

use std::io::{self, Write};

use crate::config::ExperimentConfig;
use crate::pricing::ExperimentReport;

pub const COLUMNS: [&str; 8] = [
    "alpha",
    "K",
    "price_lhsd",
    "price_mc",
    "std_lhsd",
    "std_mc",
    "std_ratio",
    "var_ratio",
];

/// Ordered `key: value` lines written before the table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportHeader {
    entries: Vec<(String, String)>,
}

impl ReportHeader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Code version, config digest, the seed actually used and the settings
    /// that determine the numbers. No timestamps, so reruns are identical.
    pub fn for_config(cfg: &ExperimentConfig, master_seed: u64) -> Self {
        let mut h = Self::new();
        let sim = &cfg.simulation;
        let opt = &cfg.option;
        h.push("version", env!("CARGO_PKG_VERSION"))
            .push("config_sha256", &cfg.digest)
            .push("master_seed", master_seed)
            .push("payoff", &opt.kind)
            .push("assets", cfg.dim())
            .push(
                "copula_plus",
                format!("{} alpha={}", cfg.copula_plus.family, cfg.copula_plus.alpha),
            )
            .push(
                "copula_minus",
                format!("{} alpha={}", cfg.copula_minus.family, cfg.copula_minus.alpha),
            )
            .push("rate", opt.rate)
            .push("maturity", opt.maturity)
            .push(
                "monitoring",
                format!("{} x {}", opt.monitoring_count, opt.monitoring_spacing),
            )
            .push("n", sim.n)
            .push("m_reps", sim.m_reps)
            .push("eta_policy", sim.eta_policy.as_str())
            .push("drift_convention", sim.drift_convention.as_str());
        h
    }
}

/// Writes the header and one row per report. `alpha` fills the first column.
pub fn write_csv<W: Write>(
    mut out: W,
    header: &ReportHeader,
    alpha: f64,
    rows: &[ExperimentReport],
) -> io::Result<()> {
    for (k, v) in &header.entries {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            alpha.to_string(),
            r.strike.to_string(),
            r.lhsd.price_mean.to_string(),
            r.mc.price_mean.to_string(),
            r.lhsd.price_std.to_string(),
            r.mc.price_std.to_string(),
            r.std_ratio().to_string(),
            r.var_ratio().to_string(),
        ])?;
    }
    w.flush()
}

/// One parsed data row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub alpha: f64,
    pub strike: f64,
    pub price_lhsd: f64,
    pub price_mc: f64,
    pub std_lhsd: f64,
    pub std_mc: f64,
    pub std_ratio: f64,
    pub var_ratio: f64,
}

/// Reads back a table written by [`write_csv`], skipping metadata lines.
pub fn read_csv(text: &str) -> io::Result<Vec<CsvRow>> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    let bad = |e: std::num::ParseFloatError| io::Error::new(io::ErrorKind::InvalidData, e);
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(bad))
            .collect::<io::Result<_>>()?;
        if f.len() != COLUMNS.len() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "wrong column count"));
        }
        rows.push(CsvRow {
            alpha: f[0],
            strike: f[1],
            price_lhsd: f[2],
            price_mc: f[3],
            std_lhsd: f[4],
            std_mc: f[5],
            std_ratio: f[6],
            var_ratio: f[7],
        });
    }
    Ok(rows)
}
