//! Codeword assembly from a group coloring and the symbolic peeling decoder.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::coloring::GroupColoring;
use crate::corrlib::{LibraryModel, PacketRef};
use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, DemandConfig};
use crate::placement::CacheConfig;

const TOL: f64 = 1e-12;

/// An uncoded refinement letting `receivers` recover `target` from
/// `reference`. One entry serves every receiver that needs the same pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub receivers: BTreeSet<usize>,
    pub target: PacketRef,
    pub reference: Option<PacketRef>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    /// One XOR set per transmission, each of length `h`.
    pub coded_segment: Vec<BTreeSet<PacketRef>>,
    pub refinements: Vec<Refinement>,
    pub total_length: f64,
    pub packet_entropy: f64,
}

impl Codeword {
    pub fn empty(packet_entropy: f64) -> Self {
        Self {
            coded_segment: Vec::new(),
            refinements: Vec::new(),
            total_length: 0.0,
            packet_entropy,
        }
    }

    pub fn coded_length(&self) -> f64 {
        self.coded_segment.len() as f64 * self.packet_entropy
    }

    pub fn refinement_length(&self) -> f64 {
        self.refinements.iter().map(|r| r.length).sum()
    }

    /// `XOR p1 p2 ...` per transmission and `REF rx target<-reference len`
    /// per refinement and receiver. Receivers are one-based.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for tx in &self.coded_segment {
            out.push_str("XOR");
            for p in tx {
                let _ = write!(out, " {p}");
            }
            out.push('\n');
        }
        for r in &self.refinements {
            let reference = r.reference.map_or_else(|| "-".to_string(), |p| p.to_string());
            for rx in &r.receivers {
                let _ = writeln!(out, "REF {} {}<-{} {}", rx + 1, r.target, reference, r.length);
            }
        }
        out
    }
}

/// Normalized length of the codeword, in units of `H(W)` when `H(W) = 1`.
pub fn rate(codeword: &Codeword) -> f64 {
    codeword.total_length
}

/// Every requested packet sent uncoded, once per requesting receiver.
pub fn naive_rate(q: &DemandConfig, model: &LibraryModel) -> f64 {
    q.total_requested() as f64 * model.packet_entropy()
}

/// Each distinct requested packet sent uncoded once.
pub fn uncoded_multicast_rate(q: &DemandConfig, model: &LibraryModel) -> f64 {
    let distinct: HashSet<&PacketRef> = q.requested.iter().flatten().collect();
    distinct.len() as f64 * model.packet_entropy()
}

/// Extends `known` with everything recoverable by repeatedly solving XOR
/// transmissions that have a single unknown constituent.
fn peel(known: &mut HashSet<PacketRef>, coded: &[BTreeSet<PacketRef>]) -> bool {
    let mut grew = false;
    loop {
        let mut changed = false;
        for tx in coded {
            let mut unknown = tx.iter().filter(|p| !known.contains(*p));
            if let (Some(p), None) = (unknown.next(), unknown.next()) {
                known.insert(*p);
                changed = true;
            }
        }
        if !changed {
            return grew;
        }
        grew = true;
    }
}

fn best_reference(target: &PacketRef, known: &HashSet<PacketRef>, model: &LibraryModel) -> Option<(PacketRef, f64)> {
    let ledger = model.ledger();
    model
        .correlated_packets(target)
        .into_iter()
        .filter(|p| known.contains(p))
        .map(|p| (p, ledger.cond_entropy(target, Some(&p), model)))
        .fold(None, |best: Option<(PacketRef, f64)>, cand| match best {
            Some(b) if b.1 <= cand.1 => Some(b),
            _ => Some(cand),
        })
}

/// Builds the coded segment (one XOR per color, omitting packets already in
/// the cache of their own receiver) and the refinement segment. An omitted
/// packet can still help a third receiver peel, so the omission is dropped
/// when it makes the codeword longer.
pub fn assemble_codeword(
    graph: &ConflictGraph,
    coloring: &GroupColoring,
    cache: &CacheConfig,
    model: &LibraryModel,
) -> Result<Codeword> {
    let excluded = assemble_codeword_with(graph, coloring, cache, model, true)?;
    let full = assemble_codeword_with(graph, coloring, cache, model, false)?;
    Ok(if full.total_length < excluded.total_length { full } else { excluded })
}

/// `assemble_codeword` with the cached-packet exclusion switchable.
pub fn assemble_codeword_with(
    graph: &ConflictGraph,
    coloring: &GroupColoring,
    cache: &CacheConfig,
    model: &LibraryModel,
    exclude_cached: bool,
) -> Result<Codeword> {
    let h = model.packet_entropy();
    let mut by_color: BTreeMap<usize, BTreeSet<PacketRef>> = BTreeMap::new();
    for (&id, &color) in &coloring.colored {
        let v = graph.vertex(id);
        let entry = by_color.entry(color).or_default();
        if !exclude_cached || !cache.contains(v.receiver, &v.packet) {
            entry.insert(v.packet);
        }
    }
    let coded_segment: Vec<BTreeSet<PacketRef>> = by_color.into_values().filter(|s| !s.is_empty()).collect();

    let mut known: Vec<Option<HashSet<PacketRef>>> = vec![None; graph.n_receivers()];
    let mut refs: BTreeMap<(PacketRef, PacketRef), (BTreeSet<usize>, f64)> = BTreeMap::new();
    for r in 0..graph.n_roots() {
        let v = graph.vertex(r);
        let k = v.receiver;
        let known_k = known[k].get_or_insert_with(|| {
            let mut set: HashSet<PacketRef> = cache.receiver(k).iter().copied().collect();
            peel(&mut set, &coded_segment);
            set
        });
        if known_k.contains(&v.packet) {
            continue;
        }
        let (reference, length) = best_reference(&v.packet, known_k, model).ok_or(Error::Unreferenced {
            receiver: k,
            packet: v.packet,
        })?;
        if length > 0.0 {
            refs.entry((v.packet, reference)).or_insert_with(|| (BTreeSet::new(), length)).0.insert(k);
        }
    }
    let refinements: Vec<Refinement> = refs
        .into_iter()
        .map(|((target, reference), (receivers, length))| Refinement {
            receivers,
            target,
            reference: Some(reference),
            length,
        })
        .collect();
    let total_length = coded_segment.len() as f64 * h + refinements.iter().map(|r| r.length).sum::<f64>();
    Ok(Codeword {
        coded_segment,
        refinements,
        total_length,
        packet_entropy: h,
    })
}

/// Simulates every receiver: start from its cache, peel the coded segment
/// and apply usable refinements until nothing changes. A refinement is
/// usable when addressed to the receiver, its reference is known, and it is
/// long enough to cover the conditional entropy.
pub fn decode_verify(codeword: &Codeword, cache: &CacheConfig, q: &DemandConfig, model: &LibraryModel) -> bool {
    if cache.n_receivers() != q.n_receivers() {
        return false;
    }
    let ledger = model.ledger();
    (0..q.n_receivers()).all(|k| {
        let mut known: HashSet<PacketRef> = cache.receiver(k).iter().copied().collect();
        loop {
            let mut changed = peel(&mut known, &codeword.coded_segment);
            for r in &codeword.refinements {
                if !r.receivers.contains(&k) || known.contains(&r.target) {
                    continue;
                }
                let needed = match &r.reference {
                    Some(p) if known.contains(p) => ledger.cond_entropy(&r.target, Some(p), model),
                    Some(_) => continue,
                    None => ledger.cond_entropy(&r.target, None, model),
                };
                if r.length >= needed - TOL {
                    known.insert(r.target);
                    changed = true;
                }
            }
            // zero-length refinements are omitted from the codeword
            for t in &q.requested[k] {
                if !known.contains(t) && best_reference(t, &known, model).is_some_and(|(_, l)| l <= TOL) {
                    known.insert(*t);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        q.requested[k].iter().all(|p| known.contains(p))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrlib::UpdateFlags;
    use crate::graph::build_demand;

    #[test]
    fn empty_demand_decodes() {
        let m = LibraryModel::independent(2, 2, 1.0, 0.1).unwrap();
        let c = CacheConfig::empty(2);
        let q = DemandConfig {
            demand: vec![0, 1],
            requested: vec![BTreeSet::new(), BTreeSet::new()],
        };
        let cw = Codeword::empty(0.5);
        assert!(decode_verify(&cw, &c, &q, &m));
        assert_eq!(rate(&cw), 0.0);
    }

    #[test]
    fn missing_refinement_fails() {
        let m = LibraryModel::symmetric(2, 1, 1.0, 0.2, 2).unwrap();
        let c = CacheConfig::from_sets(vec![[PacketRef::original(1, 0)].into_iter().collect()]);
        let q = build_demand(&m, &c, &[0], &UpdateFlags::none(2)).unwrap();
        let mut cw = Codeword::empty(1.0);
        assert!(!decode_verify(&cw, &c, &q, &m));
        cw.refinements.push(Refinement {
            receivers: [0].into_iter().collect(),
            target: PacketRef::original(0, 0),
            reference: Some(PacketRef::original(1, 0)),
            length: 0.2,
        });
        assert!(decode_verify(&cw, &c, &q, &m));
        // too short
        cw.refinements[0].length = 0.1;
        assert!(!decode_verify(&cw, &c, &q, &m));
    }

    #[test]
    fn peeling_chains() {
        let w = PacketRef::original;
        let mut known: HashSet<PacketRef> = [w(0, 0)].into_iter().collect();
        let coded = vec![
            [w(1, 0), w(2, 0)].into_iter().collect(),
            [w(0, 0), w(1, 0)].into_iter().collect(),
        ];
        assert!(peel(&mut known, &coded));
        assert!(known.contains(&w(2, 0)));
    }

    #[test]
    fn dump_format() {
        let w = PacketRef::original;
        let cw = Codeword {
            coded_segment: vec![[w(0, 2), w(2, 0)].into_iter().collect()],
            refinements: vec![Refinement {
                receivers: [2].into_iter().collect(),
                target: w(4, 1),
                reference: Some(w(5, 1)),
                length: 0.025,
            }],
            total_length: 0.275,
            packet_entropy: 0.25,
        };
        assert_eq!(cw.dump(), "XOR W1,3 W3,1\nREF 3 W5,2<-W6,2 0.025\n");
    }
}
