//! Synthetic correlated library: files, packets, correlation clusters and the
//! symbolic entropy bookkeeping shared by every other module.
//!
//! No source sequences are ever generated. A packet is identified by
//! `(file, version, packet)` and its content is its identity; lengths are
//! tracked in normalized entropy units where one file carries `file_entropy`
//! and one packet carries `file_entropy / n_packets`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Which library a packet is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Version {
    /// The library used to fill the caches (`W`).
    Original,
    /// The most recent version observed by the sender (`U`).
    Updated,
}

/// One packet of one version of one file. Indices are zero-based; the
/// `Display` form is one-based to match the usual `W_{n,b}` notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketRef {
    pub file: usize,
    pub version: Version,
    pub packet: usize,
}

impl PacketRef {
    pub const fn original(file: usize, packet: usize) -> Self {
        Self {
            file,
            version: Version::Original,
            packet,
        }
    }

    pub const fn updated(file: usize, packet: usize) -> Self {
        Self {
            file,
            version: Version::Updated,
            packet,
        }
    }

    pub fn is_original(&self) -> bool {
        self.version == Version::Original
    }
}

impl fmt::Display for PacketRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.version {
            Version::Original => 'W',
            Version::Updated => 'U',
        };
        write!(f, "{}{},{}", tag, self.file + 1, self.packet + 1)
    }
}

/// Per-file update process of a dynamic library.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicModel {
    /// Probability that the sender observes a new version of each file.
    pub update_prob: Vec<f64>,
    /// `H(U_n | W_n)` as a fraction of `H(W)`.
    pub update_delta: f64,
}

impl DynamicModel {
    pub fn uniform(n_files: usize, update_prob: f64, update_delta: f64) -> Self {
        Self {
            update_prob: vec![update_prob; n_files],
            update_delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LibraryModel {
    n_files: usize,
    n_packets: usize,
    file_entropy: f64,
    delta: f64,
    clusters: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
    dynamic: Option<DynamicModel>,
}

impl LibraryModel {
    /// Builds a library with explicit correlation clusters. Files in the same
    /// cluster are pairwise `delta`-correlated, all other pairs independent.
    pub fn new(
        n_files: usize,
        n_packets: usize,
        file_entropy: f64,
        delta: f64,
        clusters: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if n_files == 0 || n_packets == 0 {
            return Err(Error::Model("need at least one file and one packet".into()));
        }
        if !(file_entropy >= 0.0 && file_entropy.is_finite()) {
            return Err(Error::Model(format!("file entropy {file_entropy} must be >= 0")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Model(format!("delta {delta} must lie in [0, 1)")));
        }
        let mut cluster_of = vec![usize::MAX; n_files];
        for (c, members) in clusters.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::Model(format!("cluster {c} is empty")));
            }
            for &f in members {
                if f >= n_files {
                    return Err(Error::Model(format!("file {f} out of range in cluster {c}")));
                }
                if cluster_of[f] != usize::MAX {
                    return Err(Error::Model(format!("file {f} appears in two clusters")));
                }
                cluster_of[f] = c;
            }
        }
        if let Some(f) = cluster_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::Model(format!("file {f} is not in any cluster")));
        }
        Ok(Self {
            n_files,
            n_packets,
            file_entropy,
            delta,
            clusters,
            cluster_of,
            dynamic: None,
        })
    }

    /// Symmetric model: consecutive blocks of `cluster_size` files.
    pub fn symmetric(
        n_files: usize,
        n_packets: usize,
        file_entropy: f64,
        delta: f64,
        cluster_size: usize,
    ) -> Result<Self> {
        if cluster_size == 0 || n_files % cluster_size != 0 {
            return Err(Error::Model(format!(
                "cluster size {cluster_size} must divide the number of files {n_files}"
            )));
        }
        let clusters = (0..n_files / cluster_size)
            .map(|c| (c * cluster_size..(c + 1) * cluster_size).collect())
            .collect();
        Self::new(n_files, n_packets, file_entropy, delta, clusters)
    }

    /// Independent files (all clusters singletons).
    pub fn independent(n_files: usize, n_packets: usize, file_entropy: f64, delta: f64) -> Result<Self> {
        Self::symmetric(n_files, n_packets, file_entropy, delta, 1)
    }

    pub fn with_dynamic(mut self, dynamic: DynamicModel) -> Result<Self> {
        if dynamic.update_prob.len() != self.n_files {
            return Err(Error::Model(format!(
                "{} update probabilities for {} files",
                dynamic.update_prob.len(),
                self.n_files
            )));
        }
        if let Some(p) = dynamic.update_prob.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Model(format!("update probability {p} outside [0, 1]")));
        }
        if !(0.0..1.0).contains(&dynamic.update_delta) {
            return Err(Error::Model(format!(
                "update delta {} must lie in [0, 1)",
                dynamic.update_delta
            )));
        }
        self.dynamic = Some(dynamic);
        Ok(self)
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn n_packets(&self) -> usize {
        self.n_packets
    }

    pub fn file_entropy(&self) -> f64 {
        self.file_entropy
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster_of(&self, file: usize) -> usize {
        self.cluster_of[file]
    }

    pub fn dynamic(&self) -> Option<&DynamicModel> {
        self.dynamic.as_ref()
    }

    /// `true` when every cluster has the same size.
    pub fn is_symmetric(&self) -> bool {
        self.clusters.windows(2).all(|w| w[0].len() == w[1].len())
    }

    pub fn ledger(&self) -> EntropyLedger {
        EntropyLedger {
            per_packet_entropy: self.file_entropy / self.n_packets as f64,
            delta: self.delta,
            update_delta: self.dynamic.as_ref().map_or(1.0, |d| d.update_delta),
        }
    }

    /// Entropy of one packet, `h = H(W) / B`.
    pub fn packet_entropy(&self) -> f64 {
        self.file_entropy / self.n_packets as f64
    }

    pub fn contains(&self, p: &PacketRef) -> bool {
        p.file < self.n_files
            && p.packet < self.n_packets
            && (p.is_original() || self.dynamic.is_some())
    }

    /// Every library packet that is δ-correlated with `p`, in ascending order.
    pub fn correlated_packets(&self, p: &PacketRef) -> Vec<PacketRef> {
        let mut out = Vec::new();
        match p.version {
            Version::Original => {
                for &f in &self.clusters[self.cluster_of[p.file]] {
                    if f != p.file {
                        out.push(PacketRef::original(f, p.packet));
                    }
                }
                if self.dynamic.is_some() {
                    out.push(PacketRef::updated(p.file, p.packet));
                }
            }
            Version::Updated => out.push(PacketRef::original(p.file, p.packet)),
        }
        out.sort();
        out
    }
}

/// Symbolic entropy arithmetic for one library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyLedger {
    pub per_packet_entropy: f64,
    delta: f64,
    update_delta: f64,
}

impl EntropyLedger {
    pub fn cond_entropy(&self, target: &PacketRef, reference: Option<&PacketRef>, model: &LibraryModel) -> f64 {
        let h = self.per_packet_entropy;
        match reference {
            Some(r) if r == target => 0.0,
            Some(r) if delta_correlated(target, r, model) => {
                if r.version != target.version {
                    self.update_delta * h
                } else {
                    self.delta * h
                }
            }
            _ => h,
        }
    }
}

/// Whether two packets are δ-correlated. Correlation is packet-index aligned:
/// packets with different indices are never correlated.
pub fn delta_correlated(p: &PacketRef, q: &PacketRef, model: &LibraryModel) -> bool {
    if p == q || p.packet != q.packet {
        return false;
    }
    match (p.version, q.version) {
        (Version::Original, Version::Original) => model.cluster_of(p.file) == model.cluster_of(q.file),
        (Version::Updated, Version::Updated) => false,
        _ => p.file == q.file && model.dynamic().is_some(),
    }
}

/// `H(target | reference)` under the symmetric pairwise model.
pub fn cond_entropy(target: &PacketRef, reference: Option<&PacketRef>, model: &LibraryModel) -> f64 {
    model.ledger().cond_entropy(target, reference, model)
}

/// Which files the sender observes in their updated version this round.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UpdateFlags(pub Vec<bool>);

impl UpdateFlags {
    pub fn none(n_files: usize) -> Self {
        Self(vec![false; n_files])
    }

    pub fn all(n_files: usize) -> Self {
        Self(vec![true; n_files])
    }

    pub fn is_updated(&self, file: usize) -> bool {
        self.0.get(file).copied().unwrap_or(false)
    }

    pub fn served_version(&self, file: usize) -> Version {
        if self.is_updated(file) {
            Version::Updated
        } else {
            Version::Original
        }
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&u| u).count()
    }
}

/// Independent Bernoulli(π_n) update flag per file.
pub fn sample_updates(model: &LibraryModel, rng_seed: u64) -> Result<UpdateFlags> {
    let dynamic = model.dynamic().ok_or(Error::NotDynamic)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Ok(UpdateFlags(
        dynamic.update_prob.iter().map(|&p| rng.gen::<f64>() < p).collect(),
    ))
}

/// The δ-ensemble of `p` within `universe` (the cached and requested packets).
pub fn ensemble(p: &PacketRef, universe: &HashSet<PacketRef>, model: &LibraryModel) -> BTreeSet<PacketRef> {
    let mut out: BTreeSet<PacketRef> = model
        .correlated_packets(p)
        .into_iter()
        .filter(|q| universe.contains(q))
        .collect();
    out.insert(*p);
    out
}
