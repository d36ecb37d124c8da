mod common;

use std::collections::HashSet;

use cacm::bounds::{self, BoundParams};
use cacm::coloring::{ggc1, ggc2, oracle_min_rate};
use cacm::corrlib::{sample_updates, DynamicModel};
use cacm::delivery::{assemble_codeword_with, naive_rate};
use cacm::harness::{scheme_rate, Scheme};
use cacm::{
    assemble_codeword, cond_entropy, decode_verify, delta_correlated, ensemble, ggc, random_fractional_place,
    CachingDistribution, ConflictGraph, LibraryModel, PacketRef, Version,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_instance, report, Instance};

fn instance(seed: u64, max_k: usize, max_n: usize, max_b: usize) -> Instance {
    random_instance(&mut ChaCha8Rng::seed_from_u64(seed), max_k, max_n, max_b)
}

fn all_packets(model: &LibraryModel) -> Vec<PacketRef> {
    let versions: &[Version] = if model.dynamic().is_some() {
        &[Version::Original, Version::Updated]
    } else {
        &[Version::Original]
    };
    let mut out = Vec::new();
    for f in 0..model.n_files() {
        for p in 0..model.n_packets() {
            for &v in versions {
                out.push(PacketRef { file: f, packet: p, version: v });
            }
        }
    }
    out
}

/// Correlation written out from the library definition: same packet index,
/// and either two originals in one cluster or the two versions of one file.
fn correlated_by_hand(a: &PacketRef, b: &PacketRef, model: &LibraryModel) -> bool {
    if a == b || a.packet != b.packet {
        return false;
    }
    let same_cluster = model.clusters().iter().any(|c| c.contains(&a.file) && c.contains(&b.file));
    match (a.version, b.version) {
        (Version::Original, Version::Original) => same_cluster,
        (Version::Updated, Version::Updated) => false,
        _ => a.file == b.file && model.dynamic().is_some(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn correlation_is_symmetric_and_irreflexive(seed in any::<u64>()) {
        let inst = instance(seed, 2, 6, 3);
        let packets = all_packets(&inst.model);
        for a in &packets {
            prop_assert!(!delta_correlated(a, a, &inst.model));
            for b in &packets {
                let c = delta_correlated(a, b, &inst.model);
                prop_assert_eq!(c, delta_correlated(b, a, &inst.model));
                prop_assert_eq!(c, correlated_by_hand(a, b, &inst.model));
            }
        }
    }

    #[test]
    fn conditional_entropy_bounds(seed in any::<u64>()) {
        let inst = instance(seed, 2, 5, 3);
        let m = &inst.model;
        let h = m.packet_entropy();
        let ud = m.dynamic().map_or(0.0, |d| d.update_delta);
        let packets = all_packets(m);
        for t in &packets {
            prop_assert_eq!(cond_entropy(t, None, m), h);
            for r in &packets {
                let c = cond_entropy(t, Some(r), m);
                prop_assert!((0.0..=h).contains(&c));
                let joint = if t == r {
                    h
                } else if delta_correlated(t, r, m) {
                    (1.0 + if t.version == r.version { m.delta() } else { ud }) * h
                } else {
                    2.0 * h
                };
                prop_assert!(c + h >= joint - 1e-12);
            }
        }
    }

    #[test]
    fn ensemble_size_is_cluster_size(g in 1usize..5, clusters in 1usize..5, b in 1usize..4, delta in 0.0f64..1.0) {
        let n = g * clusters;
        let m = LibraryModel::symmetric(n, b, 1.0, delta, g).unwrap();
        let universe: HashSet<PacketRef> = all_packets(&m).into_iter().collect();
        for p in &universe {
            prop_assert_eq!(ensemble(p, &universe, &m).len(), g);
        }
    }

    #[test]
    fn update_sampling_is_seeded(seed in any::<u64>(), n in 1usize..40) {
        let m = LibraryModel::independent(n, 2, 1.0, 0.0)
            .unwrap()
            .with_dynamic(DynamicModel::uniform(n, 0.5, 0.3))
            .unwrap();
        prop_assert_eq!(sample_updates(&m, seed).unwrap(), sample_updates(&m, seed).unwrap());
    }

    #[test]
    fn caches_hold_only_originals(seed in any::<u64>(), n in 1usize..8, b in 1usize..20, k in 1usize..5, frac in 0.0f64..=1.0) {
        let m = LibraryModel::independent(n, b, 1.0, 0.0)
            .unwrap()
            .with_dynamic(DynamicModel::uniform(n, 0.5, 0.3))
            .unwrap();
        let memory = frac * n as f64;
        let cache = random_fractional_place(&m, &CachingDistribution::uniform(n), memory, k, seed).unwrap();
        let per_file = (memory / n as f64 * b as f64).round() as usize;
        for z in &cache.per_receiver {
            prop_assert!(z.iter().all(PacketRef::is_original));
            for f in 0..n {
                prop_assert_eq!(z.iter().filter(|p| p.file == f).count(), per_file);
            }
        }
    }

    #[test]
    fn vertex_count_and_adjacency(seed in any::<u64>()) {
        let inst = instance(seed, 4, 5, 4);
        let graph = ConflictGraph::build(&inst.model, &inst.cache, &inst.q).unwrap();
        let universe: HashSet<PacketRef> =
            inst.cache.per_receiver.iter().chain(&inst.q.requested).flatten().copied().collect();
        let expected: usize = inst
            .q
            .requested
            .iter()
            .flatten()
            .map(|p| 1 + universe.iter().filter(|u| correlated_by_hand(p, u, &inst.model)).count())
            .sum();
        prop_assert_eq!(graph.n_vertices(), expected);
        for a in 0..graph.n_vertices() {
            prop_assert!(!graph.adjacent(a, a));
            for b in 0..graph.n_vertices() {
                prop_assert_eq!(graph.adjacent(a, b), graph.adjacent(b, a));
            }
        }
    }

    #[test]
    fn colorings_are_deterministic(seed in any::<u64>()) {
        let inst = instance(seed, 4, 5, 4);
        let graph = ConflictGraph::build(&inst.model, &inst.cache, &inst.q).unwrap();
        prop_assert_eq!(ggc1(&graph, &inst.model), ggc1(&graph, &inst.model));
        prop_assert_eq!(ggc2(&graph, &inst.model), ggc2(&graph, &inst.model));
    }

    #[test]
    fn ggc1_without_virtual_vertices_matches_conventional(seed in any::<u64>(), k in 1usize..5, n in 1usize..6, b in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, k, n, b);
        let m = LibraryModel::independent(inst.model.n_files(), inst.model.n_packets(), 1.0, inst.model.delta()).unwrap();
        let q = cacm::build_demand(&m, &inst.cache, &inst.q.demand, &cacm::UpdateFlags::none(m.n_files())).unwrap();
        let aug = ConflictGraph::build(&m, &inst.cache, &q).unwrap();
        let conv = ConflictGraph::build_conventional(&m, &inst.cache, &q).unwrap();
        prop_assert_eq!(aug.n_vertices(), conv.n_vertices());
        let a = assemble_codeword(&aug, &ggc1(&aug, &m), &inst.cache, &m).unwrap();
        let c = assemble_codeword(&conv, &ggc1(&conv, &m), &inst.cache, &m).unwrap();
        prop_assert_eq!(a.total_length, c.total_length);
    }

    #[test]
    fn codewords_decode_and_beat_concatenation(seed in any::<u64>()) {
        let inst = instance(seed, 5, 6, 5);
        let graph = ConflictGraph::build(&inst.model, &inst.cache, &inst.q).unwrap();
        let naive = naive_rate(&inst.q, &inst.model);
        for coloring in [ggc1(&graph, &inst.model), ggc2(&graph, &inst.model)] {
            let cw = assemble_codeword(&graph, &coloring, &inst.cache, &inst.model).unwrap();
            prop_assert!(decode_verify(&cw, &inst.cache, &inst.q, &inst.model));
            prop_assert!(cw.total_length >= 0.0);
            let unexcluded = assemble_codeword_with(&graph, &coloring, &inst.cache, &inst.model, false).unwrap();
            prop_assert!(unexcluded.total_length >= cw.total_length - 1e-12);
        }
        let (coloring, best) = ggc(&graph, &inst.model, &inst.cache).unwrap();
        prop_assert!(coloring.validate(&graph).is_ok());
        prop_assert!(decode_verify(&best, &inst.cache, &inst.q, &inst.model));
        prop_assert!(best.total_length <= naive + 1e-12, "ggc {} naive {}", best.total_length, naive);
    }

    #[test]
    fn harness_rate_ordering(seed in any::<u64>()) {
        let inst = instance(seed, 3, 4, 2);
        let rate = |s| scheme_rate(s, &inst.model, &inst.cache, &inst.q, 64);
        let ca = rate(Scheme::CaGgc).unwrap();
        prop_assert!(ca <= rate(Scheme::Naive).unwrap() + 1e-12);
        let graph = ConflictGraph::build(&inst.model, &inst.cache, &inst.q).unwrap();
        if graph.n_vertices() <= 9 {
            prop_assert!(rate(Scheme::Oracle).unwrap() <= ca + 1e-12);
            let (coloring, r) = oracle_min_rate(&graph, &inst.model, &inst.cache).unwrap();
            let cw = assemble_codeword(&graph, &coloring, &inst.cache, &inst.model).unwrap();
            prop_assert_eq!(cw.total_length, r);
        }
    }

    #[test]
    fn phi_is_bounded_and_increasing(kappa in 1u32..60, nu in 1.0f64..200.0) {
        let k = kappa as f64;
        let phi = bounds::phi_naive(k, nu).unwrap();
        prop_assert!(phi <= k.min(nu) + 1e-12);
        let next = bounds::phi_naive(k + 1.0, nu).unwrap();
        prop_assert!(next >= phi);
        // the increment is (1 − 1/ν)^κ; below rounding it saturates at ν
        if nu > 1.0 && (1.0 - 1.0 / nu).powf(k) > 1e-12 {
            prop_assert!(next > phi);
        }
    }

    #[test]
    fn two_file_curves(delta in 0.0f64..=1.0, h in 0.5f64..3.0, t in 0.0f64..=1.0) {
        let m = 2.0 * h * t;
        let r = bounds::two_file_rate(m, delta, h).unwrap();
        let lb = bounds::two_file_lower_bound(m, delta, h).unwrap();
        prop_assert!(r >= lb - 1e-12);
        prop_assert!(lb >= 0.0);
        // continuity across the breakpoints
        for bp in [h, (1.0 + delta) * h] {
            if bp < 2.0 * h {
                let eps = 1e-9;
                let jump_r = bounds::two_file_rate(bp + eps, delta, h).unwrap() - bounds::two_file_rate(bp - eps, delta, h).unwrap();
                let jump_lb = bounds::two_file_lower_bound(bp + eps, delta, h).unwrap()
                    - bounds::two_file_lower_bound(bp - eps, delta, h).unwrap();
                prop_assert!(jump_r.abs() < 1e-6 && jump_lb.abs() < 1e-6);
            }
        }
        prop_assert!(bounds::two_file_rate(2.0 * h, delta, h).unwrap().abs() < 1e-12);
        if m >= (1.0 + delta) * h {
            prop_assert!(lb.abs() < 1e-12);
        }
    }

    #[test]
    fn size_class_probabilities_sum_to_one(k in 1usize..12, n in 1usize..30, frac in 0.0f64..=1.0) {
        let p = BoundParams::new(k, n, frac * n as f64, 0.2, 1).unwrap();
        let total: f64 = (1..=k).map(|l| bounds::binomial(k - 1, l - 1) * bounds::p_l(&p, l).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn update_frequency() {
    let m = LibraryModel::independent(100, 1, 1.0, 0.0)
        .unwrap()
        .with_dynamic(DynamicModel::uniform(100, 0.4, 0.3))
        .unwrap();
    let seeds = 200;
    let updated: usize = (0..seeds).map(|s| sample_updates(&m, s).unwrap().count()).sum();
    let mean = updated as f64 / (seeds as f64 * 100.0);
    assert!((0.39..=0.41).contains(&mean), "mean update fraction {mean}");
}

#[test]
fn placement_frequency() {
    let (n, b, memory) = (4, 1000, 1.0);
    let m = LibraryModel::independent(n, b, 1.0, 0.0).unwrap();
    let dist = CachingDistribution::uniform(n);
    let seeds = 1000;
    let target = PacketRef::original(2, 517);
    let hits = (0..seeds)
        .filter(|&s| random_fractional_place(&m, &dist, memory, 1, s).unwrap().contains(0, &target))
        .count();
    let p = memory / n as f64;
    let sigma = (p * (1.0 - p) / seeds as f64).sqrt();
    let freq = hits as f64 / seeds as f64;
    assert!((freq - p).abs() <= 3.0 * sigma, "frequency {freq} vs {p} (σ {sigma})");
}

/// Ψ₂ˢ is the expected cost of sending one packet per requested cluster plus
/// a δ refinement per further requested file.
#[test]
fn psi2_matches_monte_carlo() {
    let (k, n, g, delta) = (10, 20, 4, 0.1);
    let exact = bounds::psi2_static(&BoundParams::new(k, n, 0.0, delta, g).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 200_000;
    let mut total = 0.0;
    for _ in 0..draws {
        let files: HashSet<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        let clusters: HashSet<usize> = files.iter().map(|f| f / g).collect();
        total += clusters.len() as f64 + delta * (files.len() - clusters.len()) as f64;
    }
    let mc = total / draws as f64;
    assert!((mc - exact).abs() / exact < 0.01, "Ψ₂ {exact} vs Monte Carlo {mc}");
}

/// λ(ℓ, G) is meant as a probability. The expanded form is evaluated on a
/// grid and any excursion outside [0, 1] is reported.
#[test]
fn lambda_range() {
    let mut worst = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 1..=8 {
        for g in 1..=4 {
            let n = 4 * g;
            for i in 0..=20 {
                let p = BoundParams::new(k, n, n as f64 * i as f64 / 20.0, 0.3, g).unwrap();
                for l in 1..=k {
                    let v = bounds::lambda(&p, l).unwrap();
                    worst = (worst.0.min(v), worst.1.max(v));
                }
            }
        }
    }
    report(&format!("lambda range on grid: [{:.6}, {:.6}]", worst.0, worst.1));
    assert!(worst.0 >= -1e-12 && worst.1 <= 1.0 + 1e-12, "lambda outside [0,1]: {worst:?}");
}
