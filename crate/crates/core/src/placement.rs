//! Cache placement: random fractional caching under a caching distribution,
//! and the fixed two-receiver placements used by the small worked scenarios.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corrlib::{LibraryModel, PacketRef};
use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

/// Per-file fraction of the cache devoted to each file.
#[derive(Debug, Clone, PartialEq)]
pub struct CachingDistribution {
    pub weights: Vec<f64>,
}

impl CachingDistribution {
    pub fn uniform(n_files: usize) -> Self {
        Self {
            weights: vec![1.0 / n_files as f64; n_files],
        }
    }

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let d = Self { weights };
        let sum: f64 = d.weights.iter().sum();
        if (sum - 1.0).abs() > TOL {
            return Err(Error::Distribution(format!("weights sum to {sum}, expected 1")));
        }
        if let Some(w) = d.weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::Distribution(format!("negative weight {w}")));
        }
        Ok(d)
    }

    /// Number of packets of each file every receiver stores,
    /// `round(ϱ_n · M/H(W) · B)`.
    pub fn packet_counts(&self, model: &LibraryModel, memory: f64) -> Result<Vec<usize>> {
        if self.weights.len() != model.n_files() {
            return Err(Error::Distribution(format!(
                "{} weights for {} files",
                self.weights.len(),
                model.n_files()
            )));
        }
        let max_memory = model.n_files() as f64 * model.file_entropy();
        if !(memory >= 0.0) || memory > max_memory + TOL {
            return Err(Error::Placement(format!("memory {memory} outside [0, {max_memory}]")));
        }
        if memory == 0.0 {
            return Ok(vec![0; model.n_files()]);
        }
        if model.file_entropy() <= 0.0 {
            return Err(Error::Placement("files carry no entropy".into()));
        }
        let files_of_memory = memory / model.file_entropy();
        let b = model.n_packets() as f64;
        self.weights
            .iter()
            .enumerate()
            .map(|(n, &w)| {
                if w > 1.0 / files_of_memory + TOL {
                    return Err(Error::Distribution(format!(
                        "weight {w} of file {n} exceeds 1/M = {}",
                        1.0 / files_of_memory
                    )));
                }
                let exact = w * files_of_memory * b;
                let count = exact.round();
                if count > b {
                    return Err(Error::Distribution(format!("file {n} needs {count} of {b} packets")));
                }
                Ok(count as usize)
            })
            .collect()
    }
}

/// Per-receiver set of cached packets. Only original-version packets are
/// ever cached: placement happens before any update is observed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CacheConfig {
    pub per_receiver: Vec<BTreeSet<PacketRef>>,
}

impl CacheConfig {
    pub fn empty(n_receivers: usize) -> Self {
        Self {
            per_receiver: vec![BTreeSet::new(); n_receivers],
        }
    }

    pub fn from_sets(per_receiver: Vec<BTreeSet<PacketRef>>) -> Self {
        Self { per_receiver }
    }

    pub fn n_receivers(&self) -> usize {
        self.per_receiver.len()
    }

    pub fn receiver(&self, k: usize) -> &BTreeSet<PacketRef> {
        &self.per_receiver[k]
    }

    pub fn contains(&self, k: usize, p: &PacketRef) -> bool {
        self.per_receiver[k].contains(p)
    }

    /// Checks the capacity and version invariants against `model` and `memory`.
    pub fn validate(&self, model: &LibraryModel, memory: f64) -> Result<()> {
        let slots = if model.file_entropy() > 0.0 {
            memory / model.file_entropy() * model.n_packets() as f64
        } else {
            0.0
        };
        for (k, set) in self.per_receiver.iter().enumerate() {
            if let Some(p) = set.iter().find(|p| !p.is_original() || !model.contains(p)) {
                return Err(Error::Placement(format!("receiver {k} caches invalid packet {p}")));
            }
            if set.len() as f64 > slots + 0.5 * model.n_files() as f64 + TOL {
                return Err(Error::Placement(format!(
                    "receiver {k} caches {} packets, capacity {slots}",
                    set.len()
                )));
            }
        }
        Ok(())
    }
}

/// Each receiver independently stores, per file, a uniformly random subset of
/// `round(ϱ_n · M/H(W) · B)` of that file's original packets.
pub fn random_fractional_place(
    model: &LibraryModel,
    dist: &CachingDistribution,
    memory: f64,
    n_receivers: usize,
    rng_seed: u64,
) -> Result<CacheConfig> {
    let counts = dist.packet_counts(model, memory)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let b = model.n_packets();
    let per_receiver = (0..n_receivers)
        .map(|_| {
            let mut set = BTreeSet::new();
            for (file, &count) in counts.iter().enumerate() {
                if count == b {
                    set.extend((0..b).map(|p| PacketRef::original(file, p)));
                } else if count > 0 {
                    set.extend(index::sample(&mut rng, b, count).into_iter().map(|p| PacketRef::original(file, p)));
                }
            }
            set
        })
        .collect();
    Ok(CacheConfig { per_receiver })
}

/// The fixed two-receiver, two-file, two-packet placements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeterministicScenario {
    /// `Z₁ = {W₁,₁, W₂,₂}`, `Z₂ = {W₁,₂, W₂,₁}`: each receiver holds opposite halves.
    TwoFileCross,
    /// `Z₁ = {W₁,₁, W₂,₁}`, `Z₂ = {W₁,₂, W₂,₂}`.
    TwoFileStraight,
    /// Same sets as `TwoFileStraight`, used with a dynamic library.
    MotivatingExample,
}

/// Returns the placement of `scenario` at one of its memory corners
/// `{0, H(W), 2H(W)}`. Intermediate memories are handled by memory sharing.
pub fn deterministic_place(scenario: DeterministicScenario, memory: f64, file_entropy: f64) -> Result<CacheConfig> {
    let w = PacketRef::original;
    let corner = |m: f64| (memory - m).abs() <= TOL * file_entropy.max(1.0);
    let sets: [Vec<PacketRef>; 2] = if corner(0.0) {
        [vec![], vec![]]
    } else if corner(2.0 * file_entropy) {
        let all = vec![w(0, 0), w(0, 1), w(1, 0), w(1, 1)];
        [all.clone(), all]
    } else if corner(file_entropy) {
        match scenario {
            DeterministicScenario::TwoFileCross => [vec![w(0, 0), w(1, 1)], vec![w(0, 1), w(1, 0)]],
            DeterministicScenario::TwoFileStraight | DeterministicScenario::MotivatingExample => {
                [vec![w(0, 0), w(1, 0)], vec![w(0, 1), w(1, 1)]]
            }
        }
    } else {
        return Err(Error::Placement(format!(
            "memory {memory} is not a corner of {scenario:?} (0, {file_entropy}, {})",
            2.0 * file_entropy
        )));
    };
    Ok(CacheConfig::from_sets(
        sets.into_iter().map(|s| s.into_iter().collect()).collect(),
    ))
}
