//! Worked-instance checks behind the `selftest` subcommand.

use std::collections::BTreeSet;

use super::config::{ExperimentConfig, Scenario, Scheme};
use super::fixtures;
use super::run::{run_dynamic, two_file_corner_rate};
use crate::coloring::{ggc1, oracle_min_rate};
use crate::corrlib::PacketRef;
use crate::delivery::{assemble_codeword, decode_verify};
use crate::error::Result;
use crate::graph::{build_demand, ConflictGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

pub fn selftest() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let cfg = ExperimentConfig::defaults(Scenario::Motivating);
    let curve = run_dynamic(&cfg)?;
    let ca = curve.get(1.0, Scheme::CaGgc).map_or(f64::NAN, |r| r.mean_rate);
    let unaware = curve.get(1.0, Scheme::UnawareGgc).map_or(f64::NAN, |r| r.mean_rate);
    out.push(check(
        "motivating example",
        ca == 1.5 && unaware == 2.0,
        format!("aware {ca}, unaware {unaware}"),
    ));

    let delta = 0.1;
    let model = fixtures::example1_model(delta)?;
    let cache = fixtures::example1_cache();
    let q = build_demand(&model, &cache, &fixtures::EXAMPLE1_DEMAND, &fixtures::example1_updates())?;
    let graph = ConflictGraph::build(&model, &cache, &q)?;
    let codeword = assemble_codeword(&graph, &ggc1(&graph, &model), &cache, &model)?;
    let w = PacketRef::original;
    let expected: BTreeSet<BTreeSet<PacketRef>> = [
        [w(0, 2), w(2, 0)].into_iter().collect(),
        [w(0, 3), w(2, 1)].into_iter().collect(),
    ]
    .into_iter()
    .collect();
    let got: BTreeSet<BTreeSet<PacketRef>> = codeword.coded_segment.iter().cloned().collect();
    let target = 0.5 + 1.5 * delta;
    out.push(check(
        "three-receiver example, aware",
        got == expected && (codeword.total_length - target).abs() < 1e-12 && decode_verify(&codeword, &cache, &q, &model),
        format!("rate {} (expected {target})", codeword.total_length),
    ));
    let conventional = ConflictGraph::build_conventional(&model, &cache, &q)?;
    let (_, unaware) = oracle_min_rate(&conventional, &model, &cache)?;
    out.push(check(
        "three-receiver example, unaware",
        unaware == 1.75,
        format!("rate {unaware} (expected 1.75)"),
    ));

    let cfg = ExperimentConfig::defaults(Scenario::TwoFile);
    let corners = [0.0, 1.0, 2.0]
        .iter()
        .map(|&m| two_file_corner_rate(&cfg, Scheme::Oracle, m))
        .collect::<Result<Vec<f64>>>()?;
    out.push(check(
        "two-file corners",
        corners == [1.125, 0.25, 0.0],
        format!("{corners:?}"),
    ));
    Ok(out)
}
