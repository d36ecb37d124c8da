//! Greedy group colorings (GGC₁, GGC₂), their combination, and an
//! exhaustive minimum-rate oracle for small graphs.

use std::collections::{BTreeMap, HashMap};

use crate::corrlib::{LibraryModel, PacketRef};
use crate::delivery::{assemble_codeword, Codeword};
use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::placement::CacheConfig;

pub const DEFAULT_ORACLE_LIMIT: usize = 10;

const UNSET: usize = usize::MAX;

/// Colors assigned to one vertex per group. `group_vertex[r]` is the vertex
/// whose packet serves group `r`, and `group_color[r]` its color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupColoring {
    pub colored: BTreeMap<usize, usize>,
    pub group_color: Vec<usize>,
    pub group_vertex: Vec<usize>,
}

impl GroupColoring {
    pub fn new(n_groups: usize) -> Self {
        Self {
            colored: BTreeMap::new(),
            group_color: vec![UNSET; n_groups],
            group_vertex: vec![UNSET; n_groups],
        }
    }

    fn assign(&mut self, root: usize, vertex: usize, color: usize) {
        self.colored.insert(vertex, color);
        self.group_color[root] = color;
        self.group_vertex[root] = vertex;
    }

    fn is_assigned(&self, root: usize) -> bool {
        self.group_vertex[root] != UNSET
    }

    pub fn n_colors(&self) -> usize {
        let mut colors: Vec<usize> = self.colored.values().copied().collect();
        colors.sort_unstable();
        colors.dedup();
        colors.len()
    }

    /// Exactly one colored vertex per group, carrying the group color, and
    /// no two adjacent colored vertices sharing a color.
    pub fn validate(&self, graph: &ConflictGraph) -> Result<()> {
        if self.group_vertex.len() != graph.n_roots() {
            return Err(Error::Coloring(format!(
                "{} groups colored, graph has {}",
                self.group_vertex.len(),
                graph.n_roots()
            )));
        }
        let mut per_group = vec![0usize; graph.n_roots()];
        for &id in self.colored.keys() {
            if id >= graph.n_vertices() {
                return Err(Error::Coloring(format!("vertex {id} out of range")));
            }
            per_group[graph.vertex(id).root] += 1;
        }
        for (r, &v) in self.group_vertex.iter().enumerate() {
            if per_group[r] != 1 {
                return Err(Error::Coloring(format!("group {r} has {} colored vertices", per_group[r])));
            }
            if v == UNSET || graph.vertex(v).root != r {
                return Err(Error::Coloring(format!("group {r} is served from outside the group")));
            }
            if self.colored.get(&v) != Some(&self.group_color[r]) {
                return Err(Error::Coloring(format!("group {r} color differs from its vertex")));
            }
        }
        let ids: Vec<(usize, usize)> = self.colored.iter().map(|(&v, &c)| (v, c)).collect();
        for (i, &(a, ca)) in ids.iter().enumerate() {
            for &(b, cb) in &ids[i + 1..] {
                if ca == cb && graph.adjacent(a, b) {
                    return Err(Error::Coloring(format!("adjacent vertices {a} and {b} share color {ca}")));
                }
            }
        }
        Ok(())
    }
}

/// GGC₁. Roots are taken in id order. Within a group, candidates
/// are ordered by receiver label size (largest first), then by the cost of
/// serving the root through them, then by id. The cost is the conditional
/// entropy of the root given the candidate plus the candidate's share of a
/// transmission (`h / |label|`), which is zero when the candidate is already
/// in its receiver's cache and so never transmitted.
pub fn ggc1(graph: &ConflictGraph, model: &LibraryModel) -> GroupColoring {
    let n = graph.n_roots();
    let ledger = model.ledger();
    let h = model.packet_entropy();
    let mut coloring = GroupColoring::new(n);
    let mut alive = vec![true; n];

    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    for id in 0..graph.n_vertices() {
        buckets.entry(graph.label(id)).or_default().push(id);
    }

    let mut color = 0;
    let mut next = 0;
    while let Some(r) = (next..n).find(|&r| alive[r]) {
        next = r;
        let root_packet = graph.vertex(r).packet;
        let mut order: Vec<(u32, f64, usize)> = graph
            .group(r)
            .iter()
            .map(|&v| {
                let size = graph.label(v).count_ones();
                let mut cost = ledger.cond_entropy(&root_packet, Some(&graph.vertex(v).packet), model);
                if !graph.locally_cached(v) {
                    cost += h / size as f64;
                }
                (size, cost, v)
            })
            .collect();
        order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut best: Vec<usize> = Vec::new();
        for (t, &(size, _, vt)) in order.iter().enumerate() {
            let mut set = vec![vt];
            for &u in &buckets[&graph.label(vt)] {
                let ru = graph.vertex(u).root;
                if ru == r || !alive[ru] {
                    continue;
                }
                if set.iter().all(|&w| !graph.adjacent(u, w)) {
                    set.push(u);
                }
            }
            if set.len() > best.len() {
                best = set;
            }
            if best.len() >= size as usize || t + 1 == order.len() {
                break;
            }
        }

        for &v in &best {
            coloring.assign(graph.vertex(v).root, v, color);
        }
        // groups of the same receiver whose ensemble holds a colored packet
        // are served by the same transmission
        let mut served: Vec<usize> = best.iter().map(|&v| graph.vertex(v).root).collect();
        for &v in &best {
            let vv = graph.vertex(v);
            for &u in graph.vertices_with_member(vv.receiver, &vv.packet) {
                let ru = graph.vertex(u).root;
                if alive[ru] && !coloring.is_assigned(ru) {
                    coloring.assign(ru, u, color);
                    served.push(ru);
                }
            }
        }
        for ru in served {
            alive[ru] = false;
        }
        color += 1;
    }
    coloring
}

/// GGC₂: each uncolored group is served by the member whose packet
/// appears in the most live groups; all those groups take its color.
pub fn ggc2(graph: &ConflictGraph, _model: &LibraryModel) -> GroupColoring {
    let n = graph.n_roots();
    let mut coloring = GroupColoring::new(n);
    let mut alive = vec![true; n];
    let mut color = 0;
    let mut next = 0;
    while let Some(r) = (next..n).find(|&r| alive[r]) {
        next = r;
        let mut best: Vec<usize> = Vec::new();
        for &v in graph.group(r) {
            let mut set = vec![v];
            set.extend(graph.vertices_with_packet(&graph.vertex(v).packet).iter().copied().filter(|&u| {
                let ru = graph.vertex(u).root;
                ru != r && alive[ru]
            }));
            if set.len() > best.len() {
                best = set;
            }
        }
        for &v in &best {
            let rv = graph.vertex(v).root;
            coloring.assign(rv, v, color);
            alive[rv] = false;
        }
        color += 1;
    }
    coloring
}

/// Every group served by its own root, one color per distinct requested
/// packet: plain uncoded multicast.
pub fn uncoded_coloring(graph: &ConflictGraph) -> GroupColoring {
    local_reference_coloring(graph, None)
}

/// Groups with a correlated packet in their own receiver's cache recover
/// from it by refinement alone; the rest is sent as uncoded multicast.
fn local_reference_coloring(graph: &ConflictGraph, model: Option<&LibraryModel>) -> GroupColoring {
    let n = graph.n_roots();
    let mut coloring = GroupColoring::new(n);
    let mut colors: HashMap<PacketRef, usize> = HashMap::new();
    let mut local = Vec::new();
    for r in 0..n {
        let root = graph.vertex(r).packet;
        let pick = model.and_then(|m| {
            let ledger = m.ledger();
            graph
                .group(r)
                .iter()
                .filter(|&&v| graph.locally_cached(v))
                .map(|&v| (v, ledger.cond_entropy(&root, Some(&graph.vertex(v).packet), m)))
                .filter(|&(_, c)| c < m.packet_entropy())
                .min_by(|a, b| a.1.total_cmp(&b.1))
        });
        match pick {
            Some((v, _)) => local.push((r, v)),
            None => {
                let next = colors.len();
                let c = *colors.entry(root).or_insert(next);
                coloring.assign(r, r, c);
            }
        }
    }
    for (color, (r, v)) in (colors.len()..).zip(local) {
        coloring.assign(r, v, color);
    }
    coloring
}

/// Runs both greedy colorings and keeps the shortest codeword among them,
/// uncoded multicast, and refinement from locally cached references. Ties go
/// to the earlier candidate in that order.
pub fn ggc(graph: &ConflictGraph, model: &LibraryModel, cache: &CacheConfig) -> Result<(GroupColoring, Codeword)> {
    let candidates = [
        ggc1(graph, model),
        ggc2(graph, model),
        uncoded_coloring(graph),
        local_reference_coloring(graph, Some(model)),
    ];
    let mut best: Option<(GroupColoring, Codeword)> = None;
    for coloring in candidates {
        let cw = assemble_codeword(graph, &coloring, cache, model)?;
        if best.as_ref().is_none_or(|(_, b)| cw.total_length < b.total_length) {
            best = Some((coloring, cw));
        }
    }
    Ok(best.expect("nonempty candidate list"))
}

pub fn oracle_min_rate(graph: &ConflictGraph, model: &LibraryModel, cache: &CacheConfig) -> Result<(GroupColoring, f64)> {
    oracle_min_rate_with_limit(graph, model, cache, DEFAULT_ORACLE_LIMIT)
}

/// Exhaustive search over one served vertex per group and every partition of
/// the served vertices into independent color classes. Returns the first
/// minimizer in enumeration order.
pub fn oracle_min_rate_with_limit(
    graph: &ConflictGraph,
    model: &LibraryModel,
    cache: &CacheConfig,
    limit: usize,
) -> Result<(GroupColoring, f64)> {
    if graph.n_vertices() > limit {
        return Err(Error::OracleLimit {
            vertices: graph.n_vertices(),
            limit,
        });
    }
    let n = graph.n_roots();
    if n == 0 {
        return Ok((GroupColoring::new(0), 0.0));
    }
    let mut search = Search {
        graph,
        model,
        cache,
        best: None,
    };
    let mut pick = vec![0usize; n];
    loop {
        let picked: Vec<usize> = (0..n).map(|r| graph.group(r)[pick[r]]).collect();
        let mut classes: Vec<usize> = Vec::with_capacity(n);
        let mut members: Vec<Vec<usize>> = Vec::new();
        search.partitions(&picked, &mut classes, &mut members);

        // odometer over group members
        let mut r = n;
        loop {
            if r == 0 {
                let (coloring, rate) = search.best.expect("every group has a member");
                return Ok((coloring, rate));
            }
            r -= 1;
            pick[r] += 1;
            if pick[r] < graph.group(r).len() {
                break;
            }
            pick[r] = 0;
        }
    }
}

struct Search<'a> {
    graph: &'a ConflictGraph,
    model: &'a LibraryModel,
    cache: &'a CacheConfig,
    best: Option<(GroupColoring, f64)>,
}

impl Search<'_> {
    fn partitions(&mut self, picked: &[usize], classes: &mut Vec<usize>, members: &mut Vec<Vec<usize>>) {
        let i = classes.len();
        if i == picked.len() {
            self.evaluate(picked, classes);
            return;
        }
        let v = picked[i];
        for c in 0..=members.len() {
            if c < members.len() && members[c].iter().any(|&w| self.graph.adjacent(v, w)) {
                continue;
            }
            if c == members.len() {
                members.push(Vec::new());
            }
            members[c].push(v);
            classes.push(c);
            self.partitions(picked, classes, members);
            classes.pop();
            members[c].pop();
            if members[c].is_empty() {
                members.pop();
            }
        }
    }

    fn evaluate(&mut self, picked: &[usize], classes: &[usize]) {
        let mut coloring = GroupColoring::new(picked.len());
        for (r, (&v, &c)) in picked.iter().zip(classes).enumerate() {
            coloring.assign(r, v, c);
        }
        let Ok(codeword) = assemble_codeword(self.graph, &coloring, self.cache, self.model) else {
            return;
        };
        let rate = codeword.total_length;
        if self.best.as_ref().is_none_or(|(_, b)| rate < b - 1e-12) {
            self.best = Some((coloring, rate));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrlib::{PacketRef, UpdateFlags};
    use crate::graph::build_demand;
    use crate::placement::{deterministic_place, DeterministicScenario};

    #[test]
    fn lone_root_gets_one_color() {
        let m = LibraryModel::independent(1, 1, 1.0, 0.0).unwrap();
        let c = CacheConfig::empty(1);
        let q = build_demand(&m, &c, &[0], &UpdateFlags::none(1)).unwrap();
        let g = ConflictGraph::build(&m, &c, &q).unwrap();
        for col in [ggc1(&g, &m), ggc2(&g, &m)] {
            assert_eq!(col.n_colors(), 1);
            col.validate(&g).unwrap();
        }
    }

    #[test]
    fn same_file_demand_is_one_color_per_packet() {
        let m = LibraryModel::independent(3, 4, 1.0, 0.0).unwrap();
        let c = CacheConfig::empty(3);
        let q = build_demand(&m, &c, &[1, 1, 1], &UpdateFlags::none(3)).unwrap();
        let g = ConflictGraph::build(&m, &c, &q).unwrap();
        let col = ggc2(&g, &m);
        col.validate(&g).unwrap();
        assert_eq!(col.n_colors(), 4);
    }

    #[test]
    fn ggc2_serves_cluster_mate_through_representative() {
        // N=2, K=2, B=1, one cluster, empty caches
        let m = LibraryModel::symmetric(2, 1, 1.0, 0.25, 2).unwrap();
        let c = CacheConfig::empty(2);
        let q = build_demand(&m, &c, &[0, 1], &UpdateFlags::none(2)).unwrap();
        let g = ConflictGraph::build(&m, &c, &q).unwrap();
        let col = ggc2(&g, &m);
        col.validate(&g).unwrap();
        assert_eq!(col.n_colors(), 1);
        // group 0 keeps its root W1,1; group 1 inherits it via its virtual copy
        assert_eq!(g.vertex(col.group_vertex[1]).packet, PacketRef::original(0, 0));
        let cw = assemble_codeword(&g, &col, &c, &m).unwrap();
        assert!((cw.total_length - 1.25).abs() < 1e-12);
    }

    #[test]
    fn maddah_ali_corner_pairs_cross_cached_packets() {
        let m = LibraryModel::independent(2, 2, 1.0, 0.5).unwrap();
        let c = deterministic_place(DeterministicScenario::TwoFileStraight, 1.0, 1.0).unwrap();
        let q = build_demand(&m, &c, &[0, 1], &UpdateFlags::none(2)).unwrap();
        let g = ConflictGraph::build(&m, &c, &q).unwrap();
        // rx0 wants W1,2 and has W2,1; rx1 wants W2,1 and has W1,2
        let col = ggc1(&g, &m);
        col.validate(&g).unwrap();
        assert_eq!(col.n_colors(), 1);
        let cw = assemble_codeword(&g, &col, &c, &m).unwrap();
        assert_eq!(cw.coded_segment.len(), 1);
        assert_eq!(cw.total_length, 0.5);
    }

    #[test]
    fn oracle_handles_empty_and_limit() {
        let m = LibraryModel::independent(2, 2, 1.0, 0.5).unwrap();
        let full = deterministic_place(DeterministicScenario::TwoFileCross, 2.0, 1.0).unwrap();
        let q = build_demand(&m, &full, &[0, 1], &UpdateFlags::none(2)).unwrap();
        let g = ConflictGraph::build(&m, &full, &q).unwrap();
        assert_eq!(oracle_min_rate(&g, &m, &full).unwrap().1, 0.0);
        let (col, cw) = ggc(&g, &m, &full).unwrap();
        assert_eq!(col.n_colors(), 0);
        assert_eq!(cw.total_length, 0.0);

        let m = LibraryModel::independent(4, 4, 1.0, 0.5).unwrap();
        let c = CacheConfig::empty(3);
        let q = build_demand(&m, &c, &[0, 1, 2], &UpdateFlags::none(4)).unwrap();
        let g = ConflictGraph::build(&m, &c, &q).unwrap();
        assert!(matches!(oracle_min_rate(&g, &m, &c), Err(Error::OracleLimit { .. })));
    }
}
