#![allow(dead_code)]

use std::collections::BTreeSet;
use std::io::Write;

use cacm::corrlib::{sample_updates, DynamicModel};
use cacm::{build_demand, CacheConfig, DemandConfig, LibraryModel, PacketRef, UpdateFlags};
use rand::seq::SliceRandom;
use rand::Rng;

pub struct Instance {
    pub model: LibraryModel,
    pub cache: CacheConfig,
    pub updates: UpdateFlags,
    pub q: DemandConfig,
}

/// Written straight to stderr so the line shows even when the harness
/// captures test output.
pub fn report(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn random_clusters(rng: &mut impl Rng, n: usize) -> Vec<Vec<usize>> {
    let n_clusters = rng.gen_range(1..=n);
    let mut files: Vec<usize> = (0..n).collect();
    files.shuffle(rng);
    let mut clusters = vec![Vec::new(); n_clusters];
    for (i, f) in files.into_iter().enumerate() {
        // first n_clusters files seed the clusters so none is empty
        let c = if i < n_clusters { i } else { rng.gen_range(0..n_clusters) };
        clusters[c].push(f);
    }
    clusters
}

/// Arbitrary library, caches and demand within the given sizes. Caches hold
/// each original packet independently with a per-instance probability.
pub fn random_instance(rng: &mut impl Rng, max_k: usize, max_n: usize, max_b: usize) -> Instance {
    let k = rng.gen_range(1..=max_k);
    let n = rng.gen_range(1..=max_n);
    let b = rng.gen_range(1..=max_b);
    let deltas = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9];
    let delta = if rng.gen_bool(0.5) { *deltas.choose(rng).unwrap() } else { rng.gen_range(0.0..1.0) };
    let mut model = LibraryModel::new(n, b, 1.0, delta, random_clusters(rng, n)).unwrap();
    if rng.gen_bool(0.4) {
        let pi: Vec<f64> = (0..n).map(|_| *[0.0, 0.5, 1.0].choose(rng).unwrap()).collect();
        let ud = *deltas.choose(rng).unwrap();
        model = model.with_dynamic(DynamicModel { update_prob: pi, update_delta: ud }).unwrap();
    }
    let p_cache = rng.gen_range(0.0..1.0);
    let cache = CacheConfig::from_sets(
        (0..k)
            .map(|_| {
                (0..n)
                    .flat_map(|f| (0..b).map(move |p| PacketRef::original(f, p)))
                    .filter(|_| rng.gen_bool(p_cache))
                    .collect::<BTreeSet<_>>()
            })
            .collect(),
    );
    let updates = if model.dynamic().is_some() {
        sample_updates(&model, rng.gen()).unwrap()
    } else {
        UpdateFlags::none(n)
    };
    let demand: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
    let q = build_demand(&model, &cache, &demand, &updates).unwrap();
    Instance { model, cache, updates, q }
}
