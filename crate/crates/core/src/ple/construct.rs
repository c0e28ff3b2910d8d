//! Constructive envelope builders for the structured classes. Each returns a
//! verified witness; the LP in [`super::lp`] remains the ground truth they
//! are tested against.

use super::PleWitness;
use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::maxflow::FlowNetwork;
use crate::valuation::{ExplicitValuation, Hypergraph, SymmetricValuation, WEIGHT_DROP};
use std::collections::BTreeMap;

const SATURATION_TOL: f64 = 1e-9;

fn edges_within(h: &Hypergraph, s: ItemSet) -> (Vec<(ItemSet, f64)>, Vec<(ItemSet, f64)>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (e, w) in h.edges() {
        if e.is_subset_of(s) {
            if w > 0.0 {
                pos.push((e, w));
            } else {
                neg.push((e, w));
            }
        }
    }
    (pos, neg)
}

/// Rank-2 envelope for monotone functions of positive rank at most 2, by the
/// incremental vertex construction: each new vertex brings in its new
/// positive and negative edges, and a max flow charges every new negative
/// edge to positive edges contained in it. Monotonicity guarantees the flow
/// saturates the source; a failed saturation yields a concrete monotonicity
/// violation.
pub fn ple2_flow(f: &ExplicitValuation, s: ItemSet) -> Result<PleWitness> {
    let h = f.to_hypergraph()?;
    let (_, pos_rank, _) = h.ranks();
    if pos_rank > 2 {
        return Err(Error::invalid(format!(
            "positive rank {pos_rank} exceeds 2; the flow construction does not apply"
        )));
    }
    let mut envelope: BTreeMap<ItemSet, f64> = BTreeMap::new();
    let mut grown = ItemSet::EMPTY;
    for u in s.iter() {
        grown = grown.insert(u);
        let (pos_all, neg_all) = edges_within(&h, grown);
        let new_pos: Vec<_> = pos_all.into_iter().filter(|(e, _)| e.contains(u)).collect();
        let new_neg: Vec<_> = neg_all.into_iter().filter(|(e, _)| e.contains(u)).collect();
        if new_neg.is_empty() {
            for (e, w) in new_pos {
                *envelope.entry(e).or_insert(0.0) += w;
            }
            continue;
        }
        // bipartite charging network: source -> negative edges -> contained
        // positive edges -> sink
        let mut net = FlowNetwork::new(2 + new_neg.len() + new_pos.len());
        let source = 0;
        let sink = 1;
        let neg_node = |i: usize| 2 + i;
        let pos_node = |i: usize| 2 + new_neg.len() + i;
        let mut pos_arcs = Vec::with_capacity(new_pos.len());
        for (i, (_, w)) in new_neg.iter().enumerate() {
            net.add_arc(source, neg_node(i), w.abs());
        }
        for (i, (e, w)) in new_pos.iter().enumerate() {
            pos_arcs.push(net.add_arc(pos_node(i), sink, *w));
            for (j, (ne, _)) in new_neg.iter().enumerate() {
                if e.is_subset_of(*ne) {
                    net.add_arc(neg_node(j), pos_node(i), f64::INFINITY);
                }
            }
        }
        let need: f64 = new_neg.iter().map(|(_, w)| w.abs()).sum();
        let routed = net.max_flow(source, sink);
        if routed < need - SATURATION_TOL {
            // The min cut exposes a set whose marginal for u is negative.
            let reach = net.residual_reachable(source);
            let mut base = ItemSet::EMPTY;
            for (i, (e, _)) in new_neg.iter().enumerate() {
                if reach[neg_node(i)] {
                    base = base.union(e.remove(u));
                }
            }
            if f.value(base.insert(u)) < f.value(base) {
                return Err(Error::NotMonotone { lo: base, hi: base.insert(u) });
            }
            return Err(Error::Solver(format!(
                "charging flow under-saturated on {grown}: routed {routed} of {need}"
            )));
        }
        for (i, (e, w)) in new_pos.iter().enumerate() {
            let kept = w - net.flow_on(pos_arcs[i]);
            if kept > WEIGHT_DROP {
                *envelope.entry(*e).or_insert(0.0) += kept;
            }
        }
    }
    let witness = PleWitness {
        envelope: Hypergraph::new(f.m(), envelope)?,
        target_set: s,
        k: 2,
        valid: true,
    };
    witness.verify(f)?;
    Ok(witness)
}

fn laminar_violation(negatives: &[(ItemSet, f64)]) -> Option<(ItemSet, ItemSet)> {
    for (i, (a, _)) in negatives.iter().enumerate() {
        for (b, _) in negatives.iter().skip(i + 1) {
            let inter = a.inter(*b);
            if !inter.is_empty() && !a.is_subset_of(*b) && !b.is_subset_of(*a) {
                return Some((*a, *b));
            }
        }
    }
    None
}

/// Envelope of rank = positive rank for nonnegative functions whose negative
/// hyperedges form a laminar family: remove negatives smallest first, each
/// time spreading the charge over positive edges inside it, proportional to
/// their remaining weight.
pub fn ple_laminar(f: &ExplicitValuation, s: ItemSet) -> Result<PleWitness> {
    for t in s.subsets() {
        if f.value(t) < 0.0 {
            return Err(Error::NotNonnegative { witness: t, value: f.value(t) });
        }
    }
    let h = f.to_hypergraph()?;
    let (pos, mut neg) = edges_within(&h, s);
    if let Some((a, b)) = laminar_violation(&neg) {
        return Err(Error::NotLaminar { a, b });
    }
    neg.sort_by_key(|(e, _)| (e.card(), e.0));
    let mut weights: BTreeMap<ItemSet, f64> = pos.into_iter().collect();
    for (e, w) in neg {
        let need = w.abs();
        let inside: Vec<ItemSet> = weights
            .iter()
            .filter(|(p, w)| p.is_subset_of(e) && **w > 0.0)
            .map(|(&p, _)| p)
            .collect();
        let total: f64 = inside.iter().map(|p| weights[p]).sum();
        if total < need - SATURATION_TOL {
            return Err(Error::Solver(format!(
                "positive weight inside {e} ({total}) cannot absorb {need}"
            )));
        }
        let factor = (need / total).min(1.0);
        for p in inside {
            *weights.get_mut(&p).unwrap() *= 1.0 - factor;
        }
    }
    weights.retain(|_, w| *w > WEIGHT_DROP);
    let rank = weights.keys().map(|e| e.card()).max().unwrap_or(0);
    let witness = PleWitness {
        envelope: Hypergraph::new(f.m(), weights)?,
        target_set: s,
        k: rank.max(1),
        valid: true,
    };
    witness.verify(f)?;
    Ok(witness)
}

/// Rank-1 envelope for nonnegative functions of positive rank 1: a real-
/// capacity flow (vertices supply their weight, negative edges demand theirs)
/// in place of a unit-value matching. A non-saturating flow exposes a set of
/// negative value.
pub fn ple1_matching(f: &ExplicitValuation, s: ItemSet) -> Result<PleWitness> {
    let h = f.to_hypergraph()?;
    let (_, pos_rank, _) = h.ranks();
    if pos_rank > 1 {
        return Err(Error::invalid(format!(
            "positive rank {pos_rank} exceeds 1; the matching construction does not apply"
        )));
    }
    let (pos, neg) = edges_within(&h, s);
    let singles: Vec<(usize, f64)> = pos
        .iter()
        .map(|(e, w)| (e.iter().next().expect("rank-1 edge"), *w))
        .collect();
    let mut net = FlowNetwork::new(2 + neg.len() + singles.len());
    let source = 0;
    let sink = 1;
    let neg_node = |i: usize| 2 + i;
    let single_node = |i: usize| 2 + neg.len() + i;
    for (i, (_, w)) in neg.iter().enumerate() {
        net.add_arc(source, neg_node(i), w.abs());
    }
    let mut single_arcs = Vec::with_capacity(singles.len());
    for (i, (j, w)) in singles.iter().enumerate() {
        single_arcs.push(net.add_arc(single_node(i), sink, *w));
        for (ni, (ne, _)) in neg.iter().enumerate() {
            if ne.contains(*j) {
                net.add_arc(neg_node(ni), single_node(i), f64::INFINITY);
            }
        }
    }
    let need: f64 = neg.iter().map(|(_, w)| w.abs()).sum();
    let routed = net.max_flow(source, sink);
    if routed < need - SATURATION_TOL {
        let reach = net.residual_reachable(source);
        let mut witness = ItemSet::EMPTY;
        for (i, (e, _)) in neg.iter().enumerate() {
            if reach[neg_node(i)] {
                witness = witness.union(*e);
            }
        }
        if f.value(witness) < 0.0 {
            return Err(Error::NotNonnegative { witness, value: f.value(witness) });
        }
        return Err(Error::Solver(format!(
            "demand flow under-saturated on {s}: routed {routed} of {need}"
        )));
    }
    let mut weights: BTreeMap<ItemSet, f64> = BTreeMap::new();
    for (i, (j, w)) in singles.iter().enumerate() {
        let kept = w - net.flow_on(single_arcs[i]);
        if kept > WEIGHT_DROP {
            weights.insert(ItemSet::singleton(*j), kept);
        }
    }
    let witness = PleWitness {
        envelope: Hypergraph::new(f.m(), weights)?,
        target_set: s,
        k: 1,
        valid: true,
    };
    witness.verify(f)?;
    Ok(witness)
}

/// Envelope of rank (supermodular degree + 1) for monotone functions: walk
/// the items of S in the given order, giving the hyperedge {j} u Dep(j)
/// (clipped to S) the marginal of j over its predecessors. The weights
/// telescope to f(S).
pub fn supermodular_ple(
    f: &ExplicitValuation,
    ordering: &[usize],
    s: ItemSet,
) -> Result<PleWitness> {
    let m = f.m();
    {
        let mut seen = vec![false; m];
        if ordering.len() != m || ordering.iter().any(|&j| j >= m || std::mem::replace(&mut seen[j], true)) {
            return Err(Error::invalid("ordering must be a permutation of the items"));
        }
    }
    let (_, deps) = crate::setfn::supermodular_degree(f)?;
    let mut weights: BTreeMap<ItemSet, f64> = BTreeMap::new();
    let mut prev = ItemSet::EMPTY;
    for &j in ordering {
        if !s.contains(j) {
            continue;
        }
        let context = prev.inter(s);
        let w = f.marginal(ItemSet::singleton(j), context);
        if w < -SATURATION_TOL {
            return Err(Error::NotMonotone { lo: context, hi: context.insert(j) });
        }
        let edge = deps[j].insert(j).inter(s);
        if w > WEIGHT_DROP {
            *weights.entry(edge).or_insert(0.0) += w;
        }
        prev = prev.insert(j);
    }
    let rank = weights.keys().map(|e| e.card()).max().unwrap_or(0);
    let witness = PleWitness {
        envelope: Hypergraph::new(m, weights)?,
        target_set: s,
        k: rank.max(1),
        valid: true,
    };
    witness.verify(f)?;
    Ok(witness)
}

/// The canonical symmetric candidate of rank R: uniform weight f(m)/C(m,R)
/// on every cardinality-R edge. For symmetric monotone functions this is a
/// complete test: a rank-R envelope exists iff the canonical one is valid.
pub fn canonical_symmetric_ple(f: &SymmetricValuation, r: usize) -> Result<PleWitness> {
    let m = f.m();
    if r == 0 || r > m {
        return Err(Error::invalid(format!("rank R = {r} outside 1..={m}")));
    }
    if m > 16 {
        return Err(Error::capacity(format!(
            "materializing C({m},{r}) edges exceeds the budget (m <= 16)"
        )));
    }
    let edges = crate::items::subsets_of_size(ItemSet::full(m), r, r);
    let weight = f.value_at(m) / edges.len() as f64;
    let envelope = Hypergraph::new(m, edges.into_iter().map(|e| (e, weight)))?;
    let valid = super::symmetric::canonical_ple_valid(f.profile(), m, r);
    Ok(PleWitness { envelope, target_set: ItemSet::full(m), k: r, valid })
}
