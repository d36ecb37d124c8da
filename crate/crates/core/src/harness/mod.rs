//! Experiment driver: configuration, seeded Monte Carlo trials, rate
//! curves and CSV output.

mod config;
pub mod fixtures;
mod run;
mod selftest;

use std::fmt::Write as _;
use std::path::Path;

pub use config::{DemandMode, ExperimentConfig, PlacementMode, Scenario, Scheme};
pub use run::{
    bound_columns, bounds_table, build_model, run_dynamic, run_experiment, run_static, run_two_file, scheme_rate,
    trial_seed, two_file_corner_rate, BoundsRow, TrialOutcome, BOUNDS_HEADER,
};
pub use selftest::{selftest, Check};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "M,scheme,mean_rate,stderr,bound1,bound2,lower_bound";

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub memory: f64,
    pub scheme: Scheme,
    pub mean_rate: f64,
    pub stderr: f64,
    pub bound1: Option<f64>,
    pub bound2: Option<f64>,
    pub lower_bound: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RateCurve {
    pub rows: Vec<RateRow>,
}

impl RateCurve {
    pub fn sort(&mut self) {
        self.rows
            .sort_by(|a, b| a.memory.total_cmp(&b.memory).then(a.scheme.cmp(&b.scheme)));
    }

    pub fn get(&self, memory: f64, scheme: Scheme) -> Option<&RateRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && (r.memory - memory).abs() < 1e-9)
    }

    pub fn without_bounds(mut self) -> Self {
        for r in &mut self.rows {
            r.bound1 = None;
            r.bound2 = None;
            r.lower_bound = None;
        }
        self
    }

    pub fn to_csv(&self) -> Result<String> {
        if self.rows.is_empty() {
            return Err(Error::Experiment("empty rate curve".into()));
        }
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_num(r.memory),
                r.scheme,
                fmt_num(r.mean_rate),
                fmt_num(r.stderr),
                fmt_opt(r.bound1),
                fmt_opt(r.bound2),
                fmt_opt(r.lower_bound)
            );
        }
        Ok(out)
    }
}

/// Fixed-point decimal carrying at least nine significant digits.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let decimals = (9 - x.abs().log10().floor() as i64).max(0) as usize;
    format!("{x:.decimals$}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn emit_csv(curve: &RateCurve, path: &Path) -> Result<()> {
    let text = curve.to_csv()?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
