//! Demand realization and the augmented index-coding conflict graph.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::corrlib::{ensemble, LibraryModel, PacketRef, UpdateFlags};
use crate::error::{Error, Result};
use crate::placement::CacheConfig;

/// Largest receiver count representable by the bitmask receiver labels.
pub const MAX_RECEIVERS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandConfig {
    /// Requested file per receiver (zero-based).
    pub demand: Vec<usize>,
    /// `Q_k`: packets of the served version of `d_k` not in `C_k`.
    pub requested: Vec<BTreeSet<PacketRef>>,
}

impl DemandConfig {
    pub fn n_receivers(&self) -> usize {
        self.demand.len()
    }

    pub fn total_requested(&self) -> usize {
        self.requested.iter().map(BTreeSet::len).sum()
    }
}

pub fn build_demand(
    model: &LibraryModel,
    cache: &CacheConfig,
    demand: &[usize],
    updates: &UpdateFlags,
) -> Result<DemandConfig> {
    if demand.len() != cache.n_receivers() {
        return Err(Error::Demand(format!(
            "{} demands for {} receivers",
            demand.len(),
            cache.n_receivers()
        )));
    }
    if let Some(&d) = demand.iter().find(|&&d| d >= model.n_files()) {
        return Err(Error::Demand(format!("file {d} out of range")));
    }
    if updates.count() > 0 && model.dynamic().is_none() {
        return Err(Error::NotDynamic);
    }
    let requested = demand
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let version = updates.served_version(d);
            (0..model.n_packets())
                .map(|b| PacketRef { file: d, version, packet: b })
                .filter(|p| !cache.contains(k, p))
                .collect()
        })
        .collect();
    Ok(DemandConfig {
        demand: demand.to_vec(),
        requested,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Root,
    Virtual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vertex {
    /// ρ(v)
    pub packet: PacketRef,
    /// μ(v)
    pub receiver: usize,
    /// r(v), also the index of the group this vertex belongs to.
    pub root: usize,
    pub kind: VertexKind,
}

/// Augmented conflict graph. Root vertices occupy ids `0..n_roots()` in
/// receiver-major, packet-minor order; group `r` is the group of root `r`.
/// Edges are not stored: the relation is evaluated from ρ, μ and η.
#[derive(Debug, Clone)]
pub struct ConflictGraph {
    vertices: Vec<Vertex>,
    groups: Vec<Vec<usize>>,
    /// η(v) as a receiver bitmask.
    eta: Vec<u64>,
    n_receivers: usize,
    by_packet: HashMap<PacketRef, Vec<usize>>,
    by_member: HashMap<(usize, PacketRef), Vec<usize>>,
}

impl ConflictGraph {
    /// Builds the augmented graph: each requested packet gets a root vertex
    /// plus one virtual vertex per other member of its δ-ensemble over `C ∪ Q`.
    pub fn build(model: &LibraryModel, cache: &CacheConfig, q: &DemandConfig) -> Result<Self> {
        Self::build_inner(model, cache, q, true)
    }

    /// The conventional conflict graph: root vertices only.
    pub fn build_conventional(model: &LibraryModel, cache: &CacheConfig, q: &DemandConfig) -> Result<Self> {
        Self::build_inner(model, cache, q, false)
    }

    fn build_inner(model: &LibraryModel, cache: &CacheConfig, q: &DemandConfig, augmented: bool) -> Result<Self> {
        let k = cache.n_receivers();
        if k > MAX_RECEIVERS {
            return Err(Error::Demand(format!("at most {MAX_RECEIVERS} receivers supported, got {k}")));
        }
        if q.n_receivers() != k {
            return Err(Error::Demand("demand and cache disagree on the receiver count".into()));
        }
        let mut cached_by: HashMap<PacketRef, u64> = HashMap::new();
        for (r, set) in cache.per_receiver.iter().enumerate() {
            for p in set {
                *cached_by.entry(*p).or_default() |= 1 << r;
            }
        }

        let mut vertices = Vec::new();
        for (r, set) in q.requested.iter().enumerate() {
            for p in set {
                if cache.contains(r, p) {
                    return Err(Error::Demand(format!("receiver {r} requests cached packet {p}")));
                }
                let id = vertices.len();
                vertices.push(Vertex {
                    packet: *p,
                    receiver: r,
                    root: id,
                    kind: VertexKind::Root,
                });
            }
        }
        let n_roots = vertices.len();
        let mut groups: Vec<Vec<usize>> = (0..n_roots).map(|r| vec![r]).collect();

        if augmented {
            let universe: HashSet<PacketRef> = cache
                .per_receiver
                .iter()
                .chain(q.requested.iter())
                .flatten()
                .copied()
                .collect();
            for r in 0..n_roots {
                let root = vertices[r];
                for p in ensemble(&root.packet, &universe, model) {
                    if p == root.packet {
                        continue;
                    }
                    groups[r].push(vertices.len());
                    vertices.push(Vertex {
                        packet: p,
                        receiver: root.receiver,
                        root: r,
                        kind: VertexKind::Virtual,
                    });
                }
            }
        }

        let eta = vertices
            .iter()
            .map(|v| cached_by.get(&v.packet).copied().unwrap_or(0))
            .collect();
        let mut by_packet: HashMap<PacketRef, Vec<usize>> = HashMap::new();
        let mut by_member: HashMap<(usize, PacketRef), Vec<usize>> = HashMap::new();
        for (id, v) in vertices.iter().enumerate() {
            by_packet.entry(v.packet).or_default().push(id);
            by_member.entry((v.receiver, v.packet)).or_default().push(id);
        }
        Ok(Self {
            vertices,
            groups,
            eta,
            n_receivers: k,
            by_packet,
            by_member,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_roots(&self) -> usize {
        self.groups.len()
    }

    pub fn n_receivers(&self) -> usize {
        self.n_receivers
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        &self.vertices[id]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// 𝒢 of root `r`; the root itself comes first.
    pub fn group(&self, r: usize) -> &[usize] {
        &self.groups[r]
    }

    /// Receivers caching ρ(v).
    pub fn eta(&self, id: usize) -> u64 {
        self.eta[id]
    }

    /// Receiver label `{μ(v)} ∪ η(v)` as a bitmask.
    pub fn label(&self, id: usize) -> u64 {
        self.eta[id] | 1 << self.vertices[id].receiver
    }

    /// Whether ρ(v) is cached at receiver `k`.
    pub fn cached_at(&self, id: usize, k: usize) -> bool {
        self.eta[id] >> k & 1 == 1
    }

    /// Whether ρ(v) is in the cache of its own receiver μ(v).
    pub fn locally_cached(&self, id: usize) -> bool {
        self.cached_at(id, self.vertices[id].receiver)
    }

    /// Every vertex whose packet is `p`, ascending.
    pub fn vertices_with_packet(&self, p: &PacketRef) -> &[usize] {
        self.by_packet.get(p).map_or(&[], Vec::as_slice)
    }

    /// Every vertex with receiver `k` and packet `p`, ascending.
    pub fn vertices_with_member(&self, k: usize, p: &PacketRef) -> &[usize] {
        self.by_member.get(&(k, *p)).map_or(&[], Vec::as_slice)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let (va, vb) = (&self.vertices[a], &self.vertices[b]);
        if va.root == vb.root {
            return true;
        }
        if va.packet == vb.packet {
            return false;
        }
        !(self.cached_at(a, vb.receiver) && self.cached_at(b, va.receiver))
    }

    /// DOT text: vertices labeled `(ρ, μ, r)`, one cluster per group.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph conflict {\n");
        for (r, group) in self.groups.iter().enumerate() {
            let _ = writeln!(out, "  subgraph cluster_{r} {{");
            for &id in group {
                let v = &self.vertices[id];
                let shape = match v.kind {
                    VertexKind::Root => "ellipse",
                    VertexKind::Virtual => "box",
                };
                let _ = writeln!(
                    out,
                    "    v{id} [label=\"({}, {}, {})\", shape={shape}];",
                    v.packet,
                    v.receiver + 1,
                    v.root + 1
                );
            }
            out.push_str("  }\n");
        }
        for a in 0..self.vertices.len() {
            for b in a + 1..self.vertices.len() {
                if self.adjacent(a, b) {
                    let _ = writeln!(out, "  v{a} -- v{b};");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrlib::DynamicModel;
    use crate::placement::{deterministic_place, DeterministicScenario};

    fn sets(v: Vec<Vec<PacketRef>>) -> CacheConfig {
        CacheConfig::from_sets(v.into_iter().map(|s| s.into_iter().collect()).collect())
    }

    #[test]
    fn motivating_demand_requests_all_updated_packets() {
        let m = LibraryModel::independent(2, 2, 1.0, 0.5)
            .unwrap()
            .with_dynamic(DynamicModel::uniform(2, 1.0, 0.5))
            .unwrap();
        let c = deterministic_place(DeterministicScenario::MotivatingExample, 1.0, 1.0).unwrap();
        let q = build_demand(&m, &c, &[0, 1], &UpdateFlags::all(2)).unwrap();
        assert_eq!(q.requested[0].len(), 2);
        assert!(q.requested[0].iter().all(|p| !p.is_original() && p.file == 0));
        assert!(q.requested[1].iter().all(|p| !p.is_original() && p.file == 1));
    }

    #[test]
    fn full_caches_request_nothing() {
        let m = LibraryModel::independent(2, 2, 1.0, 0.5).unwrap();
        let c = deterministic_place(DeterministicScenario::TwoFileCross, 2.0, 1.0).unwrap();
        let q = build_demand(&m, &c, &[0, 1], &UpdateFlags::none(2)).unwrap();
        assert_eq!(q.total_requested(), 0);
        assert!(ConflictGraph::build(&m, &c, &q).unwrap().is_empty());
    }

    #[test]
    fn same_uncached_packet_roots_are_not_adjacent() {
        let m = LibraryModel::independent(2, 1, 1.0, 0.5).unwrap();
        let c = CacheConfig::empty(2);
        let q = build_demand(&m, &c, &[0, 0], &UpdateFlags::none(2)).unwrap();
        let g = ConflictGraph::build(&m, &c, &q).unwrap();
        assert_eq!(g.n_vertices(), 2);
        assert!(!g.adjacent(0, 1));
    }

    #[test]
    fn cross_cached_roots_are_not_adjacent() {
        let w = PacketRef::original;
        let m = LibraryModel::independent(2, 2, 1.0, 0.5).unwrap();
        let c = sets(vec![vec![w(1, 0)], vec![w(0, 1)]]);
        let q = build_demand(&m, &c, &[0, 1], &UpdateFlags::none(2)).unwrap();
        let g = ConflictGraph::build(&m, &c, &q).unwrap();
        // roots: rx0 {W1,1, W1,2}, rx1 {W2,1, W2,2}
        assert_eq!(g.n_roots(), 4);
        assert!(!g.adjacent(1, 2));
        assert!(g.adjacent(0, 2));
        assert!(g.adjacent(0, 1));
        assert_eq!(g.label(1), 0b11);
    }

    #[test]
    fn correlated_files_add_virtual_vertices() {
        let m = LibraryModel::symmetric(2, 1, 1.0, 0.3, 2).unwrap();
        let c = CacheConfig::empty(2);
        let q = build_demand(&m, &c, &[0, 1], &UpdateFlags::none(2)).unwrap();
        let g = ConflictGraph::build(&m, &c, &q).unwrap();
        assert_eq!(g.n_roots(), 2);
        assert_eq!(g.n_vertices(), 4);
        assert_eq!(g.vertex(2).packet, PacketRef::original(1, 0));
        assert_eq!(g.vertex(2).kind, VertexKind::Virtual);
        assert!(g.adjacent(0, 2));
        // virtual copy of W2,1 in group 0 and root W2,1 share a packet
        assert!(!g.adjacent(2, 1));
        assert!(g.to_dot().contains("cluster_1"));
    }
}
