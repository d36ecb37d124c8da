//! Small hand-specified instances used by `selftest` and the test suites.

use crate::corrlib::{DynamicModel, LibraryModel, PacketRef, UpdateFlags};
use crate::error::Result;
use crate::placement::{deterministic_place, CacheConfig, DeterministicScenario};

/// Three receivers, six files of four packets. Files 1–2 and 5–6 form
/// correlated pairs, file 1 has been replaced by an update with the same
/// conditional entropy δ.
pub fn example1_model(delta: f64) -> Result<LibraryModel> {
    let mut pi = vec![0.0; 6];
    pi[0] = 1.0;
    LibraryModel::new(6, 4, 1.0, delta, vec![vec![0, 1], vec![2], vec![3], vec![4, 5]])?.with_dynamic(DynamicModel {
        update_prob: pi,
        update_delta: delta,
    })
}

pub fn example1_updates() -> UpdateFlags {
    let mut flags = UpdateFlags::none(6);
    flags.0[0] = true;
    flags
}

/// Demand `(1, 3, 5)`, zero-based.
pub const EXAMPLE1_DEMAND: [usize; 3] = [0, 2, 4];

/// Twelve packets per receiver (`M = 3`). Listed one-based as `(file, packets)`.
pub fn example1_cache() -> CacheConfig {
    let spec: [&[(usize, &[usize])]; 3] = [
        &[(1, &[1, 2]), (2, &[1, 2]), (3, &[1, 2]), (4, &[1, 2]), (5, &[1, 3]), (6, &[1, 3])],
        &[(1, &[3, 4]), (2, &[3, 4]), (3, &[3, 4]), (4, &[3, 4]), (5, &[3, 4]), (6, &[2, 4])],
        &[(1, &[1, 2, 3]), (2, &[1]), (3, &[1, 3]), (4, &[1, 2]), (5, &[1, 3]), (6, &[2, 4])],
    ];
    CacheConfig::from_sets(
        spec.iter()
            .map(|rx| {
                rx.iter()
                    .flat_map(|&(f, ps)| ps.iter().map(move |&b| PacketRef::original(f - 1, b - 1)))
                    .collect()
            })
            .collect(),
    )
}

/// Two independent files of two packets whose updates have conditional
/// entropy `update_delta` given the originals.
pub fn motivating_model(update_prob: f64, update_delta: f64) -> Result<LibraryModel> {
    LibraryModel::independent(2, 2, 1.0, 0.0)?.with_dynamic(DynamicModel::uniform(2, update_prob, update_delta))
}

pub fn motivating_cache() -> CacheConfig {
    deterministic_place(DeterministicScenario::MotivatingExample, 1.0, 1.0).expect("M = 1 is a corner")
}
