//! Deterministic output emission: CSV with comment headers, the resolved
//! configuration echo, and the parameter digest that ties them together.
//!
//! CSV dialect: comma-separated, `.` decimal point, LF line endings, one
//! header row, floats printed with 12 significant digits so identical runs
//! produce identical bytes.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io;
use std::path::Path;

use crate::config::RunConfig;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed 12-significant-digit float formatting.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// SHA-256 over the experiment-relevant part of the resolved configuration
/// (everything except the seed, which is reported separately, and the
/// output directory).
pub fn params_digest(cfg: &RunConfig) -> String {
    #[derive(Serialize)]
    struct Digestible<'a> {
        params: &'a crate::model::SystemParams,
        topology: &'a crate::model::Topology,
        trials: u64,
        policy: crate::experiments::InfeasiblePolicy,
        robust: bool,
        solver: crate::optimizer::SolveOptions,
        sweep: &'a Option<crate::config::SweepConfig>,
        detect: &'a crate::config::DetectConfig,
    }
    let body = serde_json::to_vec(&Digestible {
        params: &cfg.params,
        topology: &cfg.topology,
        trials: cfg.trials,
        policy: cfg.policy,
        robust: cfg.robust,
        solver: cfg.solver,
        sweep: &cfg.sweep,
        detect: &cfg.detect,
    })
    .expect("config serializes");
    hex::encode(Sha256::digest(body))
}

/// Comment header every output file starts with: artifact version, resolved
/// seed, resolved parameter hash, plus any run-specific metadata pairs.
pub fn comment_header(cfg: &RunConfig, extra: &[(&str, String)]) -> String {
    let mut s = String::new();
    s.push_str(&format!("# covertsim {ARTIFACT_VERSION}\n"));
    s.push_str(&format!("# seed {}\n", cfg.seed));
    s.push_str(&format!("# params_sha256 {}\n", params_digest(cfg)));
    s.push_str(&format!("# p_jmax_dbw {}\n", fmt_sig(cfg.params.p_jmax_dbw())));
    for (k, v) in extra {
        s.push_str(&format!("# {k} {v}\n"));
    }
    s
}

/// Serializes the fully resolved configuration next to the run outputs.
pub fn write_resolved_config(cfg: &RunConfig, path: &Path) -> io::Result<()> {
    #[derive(Serialize)]
    struct Echo<'a> {
        artifact_version: &'static str,
        params_sha256: String,
        #[serde(flatten)]
        config: &'a RunConfig,
    }
    let echo = Echo {
        artifact_version: ARTIFACT_VERSION,
        params_sha256: params_digest(cfg),
        config: cfg,
    };
    let mut text = serde_json::to_string_pretty(&echo).expect("config serializes");
    text.push('\n');
    std::fs::write(path, text)
}

/// One CSV cell.
pub enum Cell {
    Float(f64),
    Int(u64),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => fmt_sig(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Flag(b) => if *b { "1" } else { "0" }.to_string(),
        }
    }
}

/// Writes a CSV file: comment header, column row, then data rows.
pub fn write_csv(
    path: &Path,
    cfg: &RunConfig,
    extra_meta: &[(&str, String)],
    columns: &[&str],
    rows: &[Vec<Cell>],
) -> io::Result<()> {
    let mut text = comment_header(cfg, extra_meta);
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let rendered: Vec<String> = row.iter().map(Cell::render).collect();
        text.push_str(&rendered.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)
}
