use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{DemandMode, ExperimentConfig, PlacementMode, Scenario, Scheme};
use super::{RateCurve, RateRow};
use crate::bounds::{self, BoundParams};
use crate::coloring::{ggc, oracle_min_rate_with_limit};
use crate::corrlib::{sample_updates, DynamicModel, LibraryModel, UpdateFlags};
use crate::delivery::{assemble_codeword, decode_verify, uncoded_multicast_rate};
use crate::error::{Error, Result};
use crate::graph::{build_demand, ConflictGraph, DemandConfig};
use crate::placement::{
    deterministic_place, random_fractional_place, CacheConfig, CachingDistribution, DeterministicScenario,
};

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one trial, a pure function of the master seed, the memory point
/// and the trial index.
pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    splitmix(splitmix(splitmix(master) ^ point) ^ trial)
}

fn sub_seed(seed: u64, stream: u64) -> u64 {
    splitmix(seed ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

const PLACEMENT_STREAM: u64 = 1;
const UPDATE_STREAM: u64 = 2;
const DEMAND_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// One rate per configured scheme, in `ExperimentConfig::schemes` order.
    pub rates: Vec<f64>,
}

pub fn build_model(cfg: &ExperimentConfig) -> Result<LibraryModel> {
    let (n, b, h) = (cfg.files, cfg.packets, cfg.file_entropy);
    match cfg.scenario {
        Scenario::Static | Scenario::TwoFile => LibraryModel::symmetric(n, b, h, cfg.delta, cfg.cluster_size),
        Scenario::Dynamic | Scenario::Motivating => LibraryModel::independent(n, b, h, cfg.delta)?
            .with_dynamic(DynamicModel::uniform(n, cfg.update_prob, cfg.update_delta)),
    }
}

fn deterministic_scenario(mode: PlacementMode) -> Result<DeterministicScenario> {
    match mode {
        PlacementMode::Cross => Ok(DeterministicScenario::TwoFileCross),
        PlacementMode::Straight => Ok(DeterministicScenario::TwoFileStraight),
        PlacementMode::Motivating => Ok(DeterministicScenario::MotivatingExample),
        PlacementMode::Random => Err(Error::Experiment("random placement has no fixed corners".into())),
    }
}

fn place(cfg: &ExperimentConfig, model: &LibraryModel, memory: f64, seed: u64) -> Result<CacheConfig> {
    match cfg.placement {
        PlacementMode::Random => random_fractional_place(
            model,
            &CachingDistribution::uniform(model.n_files()),
            memory,
            cfg.receivers,
            seed,
        ),
        mode => deterministic_place(deterministic_scenario(mode)?, memory, cfg.file_entropy),
    }
}

fn draw_demand(cfg: &ExperimentConfig, seed: u64) -> Vec<usize> {
    match &cfg.demand {
        DemandMode::Uniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..cfg.receivers).map(|_| rng.gen_range(0..cfg.files)).collect()
        }
        DemandMode::Worst => (0..cfg.receivers).map(|k| k % cfg.files).collect(),
        DemandMode::Fixed(d) => d.clone(),
    }
}

/// Rate of one scheme on one realization. Coded schemes are decode-checked.
pub fn scheme_rate(
    scheme: Scheme,
    model: &LibraryModel,
    cache: &CacheConfig,
    q: &DemandConfig,
    oracle_limit: usize,
) -> Result<f64> {
    let codeword = match scheme {
        Scheme::Naive => return Ok(uncoded_multicast_rate(q, model)),
        Scheme::CaGgc => ggc(&ConflictGraph::build(model, cache, q)?, model, cache)?.1,
        Scheme::UnawareGgc => ggc(&ConflictGraph::build_conventional(model, cache, q)?, model, cache)?.1,
        Scheme::Oracle => {
            let graph = ConflictGraph::build(model, cache, q)?;
            let (coloring, _) = oracle_min_rate_with_limit(&graph, model, cache, oracle_limit)?;
            assemble_codeword(&graph, &coloring, cache, model)?
        }
    };
    if !decode_verify(&codeword, cache, q, model) {
        return Err(Error::Decode(format!("{scheme} codeword for demand {:?}", q.demand)));
    }
    Ok(codeword.total_length)
}

fn run_trial(cfg: &ExperimentConfig, model: &LibraryModel, memory: f64, point: usize, trial: usize) -> Result<TrialOutcome> {
    let seed = trial_seed(cfg.seed, point as u64, trial as u64);
    let cache = place(cfg, model, memory, sub_seed(seed, PLACEMENT_STREAM))?;
    let updates = if model.dynamic().is_some() {
        sample_updates(model, sub_seed(seed, UPDATE_STREAM))?
    } else {
        UpdateFlags::none(model.n_files())
    };
    let demand = draw_demand(cfg, sub_seed(seed, DEMAND_STREAM));
    let q = build_demand(model, &cache, &demand, &updates)?;
    if trial == 0 {
        if let Some(dir) = &cfg.dump_graphs {
            dump_graph(dir, point, &ConflictGraph::build(model, &cache, &q)?)?;
        }
    }
    let rates = cfg
        .schemes
        .iter()
        .map(|&s| {
            scheme_rate(s, model, &cache, &q, cfg.oracle_limit).map_err(|e| match e {
                Error::Decode(msg) => Error::Decode(format!("{msg} at M = {memory}, trial {trial}")),
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TrialOutcome { rates })
}

fn dump_graph(dir: &Path, point: usize, graph: &ConflictGraph) -> Result<()> {
    let io = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join(format!("point{point}_trial0.dot"));
    std::fs::write(&path, graph.to_dot()).map_err(|source| Error::Io { path, source })
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn in_pool<T: Send>(cfg: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    match cfg.parallel {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Experiment(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn monte_carlo(cfg: &ExperimentConfig) -> Result<RateCurve> {
    cfg.validate()?;
    let model = build_model(cfg)?;
    let mut curve = RateCurve::default();
    for (point, &memory) in cfg.memory.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = in_pool(cfg, || {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, &model, memory, point, t))
                .collect::<Result<Vec<_>>>()
        })??;
        let (bound1, bound2, lower_bound) = bound_columns(cfg, memory)?;
        for (i, &scheme) in cfg.schemes.iter().enumerate() {
            let rates: Vec<f64> = outcomes.iter().map(|o| o.rates[i]).collect();
            let (mean_rate, stderr) = mean_stderr(&rates);
            curve.rows.push(RateRow {
                memory,
                scheme,
                mean_rate,
                stderr,
                bound1,
                bound2,
                lower_bound,
            });
        }
    }
    curve.sort();
    Ok(curve)
}

pub fn run_static(cfg: &ExperimentConfig) -> Result<RateCurve> {
    if cfg.scenario != Scenario::Static {
        return Err(Error::Experiment("run_static needs the static scenario".into()));
    }
    monte_carlo(cfg)
}

pub fn run_dynamic(cfg: &ExperimentConfig) -> Result<RateCurve> {
    if !cfg.is_dynamic() {
        return Err(Error::Experiment("run_dynamic needs the dynamic or motivating scenario".into()));
    }
    monte_carlo(cfg)
}

fn two_file_demands(cfg: &ExperimentConfig) -> Vec<Vec<usize>> {
    match &cfg.demand {
        DemandMode::Uniform => vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
        DemandMode::Worst => vec![vec![0, 1]],
        DemandMode::Fixed(d) => vec![d.clone()],
    }
}

/// Average rate of `scheme` over the demand set at one memory corner.
pub fn two_file_corner_rate(cfg: &ExperimentConfig, scheme: Scheme, corner: f64) -> Result<f64> {
    let model = build_model(cfg)?;
    let cache = place(cfg, &model, corner, 0)?;
    let demands = two_file_demands(cfg);
    let mut total = 0.0;
    for d in &demands {
        let q = build_demand(&model, &cache, d, &UpdateFlags::none(2))?;
        total += scheme_rate(scheme, &model, &cache, &q, cfg.oracle_limit)?;
    }
    Ok(total / demands.len() as f64)
}

/// Exact corner rates at `M ∈ {0, h, 2h}`, joined linearly in between.
pub fn run_two_file(cfg: &ExperimentConfig) -> Result<RateCurve> {
    if cfg.scenario != Scenario::TwoFile {
        return Err(Error::Experiment("run_two_file needs the two_file scenario".into()));
    }
    cfg.validate()?;
    let h = cfg.file_entropy;
    if let Some(m) = cfg.memory.iter().find(|&&m| m > 2.0 * h + 1e-9) {
        return Err(Error::Experiment(format!("memory {m} outside [0, {}]", 2.0 * h)));
    }
    let mut curve = RateCurve::default();
    for &scheme in &cfg.schemes {
        let corners = [0.0, h, 2.0 * h]
            .iter()
            .map(|&c| two_file_corner_rate(cfg, scheme, c))
            .collect::<Result<Vec<f64>>>()?;
        for &memory in &cfg.memory {
            let mean_rate = if memory <= h {
                corners[0] + (corners[1] - corners[0]) * memory / h
            } else {
                corners[1] + (corners[2] - corners[1]) * (memory - h) / h
            };
            let (bound1, bound2, lower_bound) = bound_columns(cfg, memory)?;
            curve.rows.push(RateRow {
                memory,
                scheme,
                mean_rate,
                stderr: 0.0,
                bound1,
                bound2,
                lower_bound,
            });
        }
    }
    curve.sort();
    Ok(curve)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RateCurve> {
    match cfg.scenario {
        Scenario::Static => run_static(cfg),
        Scenario::Dynamic | Scenario::Motivating => run_dynamic(cfg),
        Scenario::TwoFile => run_two_file(cfg),
    }
}

/// Analytic columns of a curve row. Static: the correlation-aware bound and
/// its `G = 1` counterpart. Dynamic: the dynamic bound and naive multicast.
/// Two-file: the achievable envelope, the same envelope for independent
/// files, and the lower bound.
pub fn bound_columns(cfg: &ExperimentConfig, memory: f64) -> Result<(Option<f64>, Option<f64>, Option<f64>)> {
    let h = cfg.file_entropy;
    let m_files = memory / h;
    let (k, n) = (cfg.receivers, cfg.files);
    Ok(match cfg.scenario {
        Scenario::Static => {
            let p = BoundParams::new(k, n, m_files, cfg.delta, cfg.cluster_size)?;
            (
                Some(bounds::theorem1_bound(&p)? * h),
                Some(bounds::unaware_static_bound(&p)? * h),
                None,
            )
        }
        Scenario::Dynamic | Scenario::Motivating => {
            let p = BoundParams::new(k, n, m_files, cfg.update_delta, 1)?.with_pi(cfg.update_prob)?;
            (
                Some(bounds::theorem2_bound(&p)? * h),
                Some(bounds::phi_naive(k as f64, n as f64)? * h),
                None,
            )
        }
        Scenario::TwoFile => (
            Some(bounds::two_file_rate(memory, cfg.delta, h)?),
            Some(bounds::two_file_rate(memory, 1.0, h)?),
            Some(bounds::two_file_lower_bound(memory, cfg.delta, h)?),
        ),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub memory: f64,
    pub psi1_static: Option<f64>,
    pub psi2_static: Option<f64>,
    pub theorem1: Option<f64>,
    pub theorem2: Option<f64>,
    pub phi_naive: Option<f64>,
    pub two_file_rate: Option<f64>,
    pub two_file_lower_bound: Option<f64>,
}

pub const BOUNDS_HEADER: &str =
    "M,psi1_static,psi2_static,theorem1,theorem2,phi_naive,two_file_rate,two_file_lower_bound";

/// Every closed form at each memory point of `cfg`. Columns that do not
/// apply to the parameters are left empty.
pub fn bounds_table(cfg: &ExperimentConfig) -> Result<Vec<BoundsRow>> {
    let h = cfg.file_entropy;
    let (k, n) = (cfg.receivers, cfg.files);
    cfg.memory
        .iter()
        .map(|&memory| {
            let m_files = memory / h;
            let stat = BoundParams::new(k, n, m_files, cfg.delta, cfg.cluster_size).ok();
            let dynamic = BoundParams::new(k, n, m_files, cfg.update_delta, 1)
                .and_then(|p| p.with_pi(cfg.update_prob))
                .ok();
            let scaled = |r: Result<f64>| r.ok().map(|x| x * h);
            let two_file = n == 2 && memory <= 2.0 * h + 1e-9;
            Ok(BoundsRow {
                memory,
                psi1_static: stat.as_ref().and_then(|p| scaled(bounds::psi1_static(p))),
                psi2_static: stat.as_ref().and_then(|p| scaled(bounds::psi2_static(p))),
                theorem1: stat.as_ref().and_then(|p| scaled(bounds::theorem1_bound(p))),
                theorem2: dynamic.as_ref().and_then(|p| scaled(bounds::theorem2_bound(p))),
                phi_naive: scaled(bounds::phi_naive(k as f64, n as f64)),
                two_file_rate: two_file.then(|| bounds::two_file_rate(memory, cfg.delta, h).ok()).flatten(),
                two_file_lower_bound: two_file
                    .then(|| bounds::two_file_lower_bound(memory, cfg.delta, h).ok())
                    .flatten(),
            })
        })
        .collect()
}

impl BoundsRow {
    pub fn csv_line(&self) -> String {
        let f = |x: Option<f64>| x.map(super::fmt_num).unwrap_or_default();
        let mut out = String::new();
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{}",
            super::fmt_num(self.memory),
            f(self.psi1_static),
            f(self.psi2_static),
            f(self.theorem1),
            f(self.theorem2),
            f(self.phi_naive),
            f(self.two_file_rate),
            f(self.two_file_lower_bound)
        );
        out
    }
}
