//! The four concrete set-function forms and the conversions between them.
//! The signed hypergraph representation is the Mobius transform of the value
//! table and is unique; positive hypergraphs of bounded rank are the building
//! blocks everything else maximizes over.

use crate::error::{Error, Result};
use crate::items::{ItemSet, MAX_ITEMS};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Hyperedge weights below this magnitude are dropped after Mobius inversion
/// so floating-point noise does not inflate ranks.
pub const WEIGHT_DROP: f64 = 1e-12;

/// A set function given by its full value table, indexed by bit mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitValuation {
    m: usize,
    table: Vec<f64>,
}

impl ExplicitValuation {
    pub fn new(m: usize, table: Vec<f64>) -> Result<Self> {
        if m > MAX_ITEMS {
            return Err(Error::capacity(format!("m = {m} exceeds {MAX_ITEMS}")));
        }
        if table.len() != 1 << m {
            return Err(Error::invalid(format!(
                "table has {} entries, expected 2^{m}",
                table.len()
            )));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("table contains a non-finite value"));
        }
        Ok(ExplicitValuation { m, table })
    }

    pub fn from_fn(m: usize, f: impl Fn(ItemSet) -> f64) -> Result<Self> {
        let table = (0..1u32 << m).map(|s| f(ItemSet(s))).collect();
        ExplicitValuation::new(m, table)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn value(&self, s: ItemSet) -> f64 {
        self.table[s.0 as usize]
    }

    pub fn is_normalized(&self) -> bool {
        self.table[0] == 0.0
    }

    /// Marginal value f(T | S) = f(T u S) - f(S).
    pub fn marginal(&self, t: ItemSet, s: ItemSet) -> f64 {
        self.value(t.union(s)) - self.value(s)
    }

    /// The unique signed hypergraph representation, by Mobius inversion:
    /// h(S) = sum over T subseteq S of (-1)^{|S \ T|} f(T).
    pub fn to_hypergraph(&self) -> Result<Hypergraph> {
        if !self.is_normalized() {
            return Err(Error::invalid("hypergraph representation requires f(empty) = 0"));
        }
        let mut h = self.table.clone();
        for bit in 0..self.m {
            let step = 1usize << bit;
            for mask in 0..h.len() {
                if mask & step != 0 {
                    h[mask] -= h[mask ^ step];
                }
            }
        }
        let edges = h
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, w)| w.abs() >= WEIGHT_DROP)
            .map(|(mask, &w)| (ItemSet(mask as u32), w));
        Hypergraph::new(self.m, edges)
    }
}

/// A sparse signed hypergraph: v(S) = sum of h(T) over edges T contained in S.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    m: usize,
    edges: BTreeMap<ItemSet, f64>,
}

impl Hypergraph {
    pub fn new(m: usize, edges: impl IntoIterator<Item = (ItemSet, f64)>) -> Result<Self> {
        if m > MAX_ITEMS {
            return Err(Error::capacity(format!("m = {m} exceeds {MAX_ITEMS}")));
        }
        let full = ItemSet::full(m);
        let mut map = BTreeMap::new();
        for (set, w) in edges {
            if set.is_empty() {
                return Err(Error::invalid("hypergraph may not carry an edge on the empty set"));
            }
            if !set.is_subset_of(full) {
                return Err(Error::invalid(format!("edge {set} outside ground set of {m} items")));
            }
            if !w.is_finite() {
                return Err(Error::invalid(format!("edge {set} has non-finite weight")));
            }
            if w != 0.0 {
                *map.entry(set).or_insert(0.0) += w;
            }
        }
        map.retain(|_, w| *w != 0.0);
        Ok(Hypergraph { m, edges: map })
    }

    pub fn empty(m: usize) -> Self {
        Hypergraph { m, edges: BTreeMap::new() }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> impl Iterator<Item = (ItemSet, f64)> + '_ {
        self.edges.iter().map(|(&s, &w)| (s, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, s: ItemSet) -> f64 {
        self.edges.get(&s).copied().unwrap_or(0.0)
    }

    pub fn value(&self, s: ItemSet) -> f64 {
        self.edges
            .iter()
            .filter(|(e, _)| e.is_subset_of(s))
            .map(|(_, w)| w)
            .sum()
    }

    /// (rank, positive rank, negative rank); 0 for an empty category.
    pub fn ranks(&self) -> (usize, usize, usize) {
        let mut rank = 0;
        let mut pos = 0;
        let mut neg = 0;
        for (&s, &w) in &self.edges {
            rank = rank.max(s.card());
            if w > 0.0 {
                pos = pos.max(s.card());
            } else {
                neg = neg.max(s.card());
            }
        }
        (rank, pos, neg)
    }

    pub fn rank(&self) -> usize {
        self.ranks().0
    }

    pub fn positive_rank(&self) -> usize {
        self.ranks().1
    }

    pub fn negative_rank(&self) -> usize {
        self.ranks().2
    }

    pub fn is_positive(&self) -> bool {
        self.edges.values().all(|&w| w >= 0.0)
    }

    /// A PH-r witness: all weights nonnegative and rank at most r.
    pub fn is_ph_witness(&self, r: usize) -> bool {
        self.is_positive() && self.rank() <= r
    }

    /// Exact subset-sum expansion (zeta transform over subsets).
    pub fn to_explicit(&self) -> Result<ExplicitValuation> {
        let mut table = vec![0.0f64; 1 << self.m];
        for (&s, &w) in &self.edges {
            table[s.0 as usize] = w;
        }
        for bit in 0..self.m {
            let step = 1usize << bit;
            for mask in 0..table.len() {
                if mask & step != 0 {
                    table[mask] += table[mask ^ step];
                }
            }
        }
        ExplicitValuation::new(self.m, table)
    }

}

/// A symmetric set function: value depends on cardinality only.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricValuation {
    m: usize,
    profile: Vec<f64>,
}

impl SymmetricValuation {
    pub fn new(m: usize, profile: Vec<f64>) -> Result<Self> {
        if profile.len() != m + 1 {
            return Err(Error::invalid(format!(
                "profile has {} entries, expected m + 1 = {}",
                profile.len(),
                m + 1
            )));
        }
        if profile.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("profile contains a non-finite value"));
        }
        Ok(SymmetricValuation { m, profile })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn profile(&self) -> &[f64] {
        &self.profile
    }

    pub fn value(&self, s: ItemSet) -> f64 {
        self.profile[s.card()]
    }

    pub fn value_at(&self, card: usize) -> f64 {
        self.profile[card]
    }

    pub fn is_normalized(&self) -> bool {
        self.profile[0] == 0.0
    }

    pub fn is_monotone(&self) -> bool {
        self.profile.windows(2).all(|w| w[0] <= w[1])
    }

    /// Restriction to any t items is again symmetric: the profile truncates.
    pub fn truncated(&self, t: usize) -> SymmetricValuation {
        SymmetricValuation { m: t, profile: self.profile[..=t].to_vec() }
    }

    pub fn to_explicit(&self) -> Result<ExplicitValuation> {
        if self.m > MAX_ITEMS {
            return Err(Error::capacity(format!("m = {} exceeds {MAX_ITEMS}", self.m)));
        }
        ExplicitValuation::from_fn(self.m, |s| self.profile[s.card()])
    }
}

/// Maximum over positive hypergraphs of rank at most k.
#[derive(Debug, Clone, PartialEq)]
pub struct MphRepresentation {
    m: usize,
    k: usize,
    clauses: Vec<Hypergraph>,
}

impl MphRepresentation {
    pub fn new(m: usize, k: usize, clauses: Vec<Hypergraph>) -> Result<Self> {
        for clause in &clauses {
            if clause.m() != m {
                return Err(Error::invalid("clause ground set differs from representation"));
            }
            if !clause.is_ph_witness(k) {
                return Err(Error::invalid(format!(
                    "clause is not a PH-{k} witness (rank {}, positive: {})",
                    clause.rank(),
                    clause.is_positive()
                )));
            }
        }
        Ok(MphRepresentation { m, k, clauses })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn clauses(&self) -> &[Hypergraph] {
        &self.clauses
    }

    pub fn value(&self, s: ItemSet) -> f64 {
        self.clauses
            .iter()
            .map(|c| c.value(s))
            .fold(0.0, f64::max)
    }

    pub fn to_explicit(&self) -> Result<ExplicitValuation> {
        let tables: Vec<_> = self
            .clauses
            .iter()
            .map(|c| c.to_explicit())
            .collect::<Result<_>>()?;
        ExplicitValuation::from_fn(self.m, |s| {
            tables
                .iter()
                .map(|t: &ExplicitValuation| t.value(s))
                .fold(0.0, f64::max)
        })
    }
}

/// A set function in one of the four concrete forms.
#[derive(Debug, Clone, PartialEq)]
pub enum Valuation {
    Explicit(ExplicitValuation),
    Hypergraph(Hypergraph),
    Symmetric(SymmetricValuation),
    Mph(MphRepresentation),
}

impl Valuation {
    pub fn m(&self) -> usize {
        match self {
            Valuation::Explicit(v) => v.m(),
            Valuation::Hypergraph(v) => v.m(),
            Valuation::Symmetric(v) => v.m(),
            Valuation::Mph(v) => v.m(),
        }
    }

    /// Value query. Rejects sets with bits outside the ground set.
    pub fn eval(&self, s: ItemSet) -> Result<f64> {
        if !s.valid_for(self.m()) {
            return Err(Error::invalid(format!(
                "set {s} has items outside the {}-item ground set",
                self.m()
            )));
        }
        Ok(self.value_unchecked(s))
    }

    pub fn value_unchecked(&self, s: ItemSet) -> f64 {
        match self {
            Valuation::Explicit(v) => v.value(s),
            Valuation::Hypergraph(v) => v.value(s),
            Valuation::Symmetric(v) => v.value(s),
            Valuation::Mph(v) => v.value(s),
        }
    }

    pub fn to_explicit(&self) -> Result<ExplicitValuation> {
        match self {
            Valuation::Explicit(v) => Ok(v.clone()),
            Valuation::Hypergraph(v) => v.to_explicit(),
            Valuation::Symmetric(v) => v.to_explicit(),
            Valuation::Mph(v) => v.to_explicit(),
        }
    }

    /// Single-minded detection: a lone positive hyperedge (in hypergraph or
    /// one-clause MPH form) values exactly the supersets of one bundle.
    pub fn single_minded_bundle(&self) -> Option<(ItemSet, f64)> {
        let single = |h: &Hypergraph| -> Option<(ItemSet, f64)> {
            let mut it = h.edges();
            match (it.next(), it.next()) {
                (Some((s, w)), None) if w > 0.0 => Some((s, w)),
                _ => None,
            }
        };
        match self {
            Valuation::Hypergraph(h) => single(h),
            Valuation::Mph(rep) if rep.clauses().len() == 1 => single(&rep.clauses()[0]),
            _ => None,
        }
    }
}

// --- JSON schema -----------------------------------------------------------
//
// {"m": int, "kind": "explicit"|"hypergraph"|"symmetric"|"mph",
//  "table": [..] | "edges": [{"set":[..],"w":..}] | "profile": [..]
//  | "clauses": [[{"set":[..],"w":..}], ..], "k": int}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct EdgeJson {
    pub set: ItemSet,
    pub w: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
struct ValuationJson {
    m: usize,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<EdgeJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clauses: Option<Vec<Vec<EdgeJson>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let edges_of = |h: &Hypergraph| h.edges().map(|(set, w)| EdgeJson { set, w }).collect();
        let json = match self {
            Valuation::Explicit(v) => ValuationJson {
                m: v.m(),
                kind: "explicit".into(),
                table: Some(v.table().to_vec()),
                edges: None,
                profile: None,
                clauses: None,
                k: None,
            },
            Valuation::Hypergraph(h) => ValuationJson {
                m: h.m(),
                kind: "hypergraph".into(),
                table: None,
                edges: Some(edges_of(h)),
                profile: None,
                clauses: None,
                k: None,
            },
            Valuation::Symmetric(v) => ValuationJson {
                m: v.m(),
                kind: "symmetric".into(),
                table: None,
                edges: None,
                profile: Some(v.profile().to_vec()),
                clauses: None,
                k: None,
            },
            Valuation::Mph(rep) => ValuationJson {
                m: rep.m(),
                kind: "mph".into(),
                table: None,
                edges: None,
                profile: None,
                clauses: Some(rep.clauses().iter().map(edges_of).collect()),
                k: Some(rep.k()),
            },
        };
        json.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let json = ValuationJson::deserialize(de)?;
        let m = json.m;
        let to_edges = |edges: Vec<EdgeJson>| edges.into_iter().map(|e| (e.set, e.w));
        let parsed = match json.kind.as_str() {
            "explicit" => {
                let table = json.table.ok_or_else(|| D::Error::custom("missing table"))?;
                ExplicitValuation::new(m, table).map(Valuation::Explicit)
            }
            "hypergraph" => {
                let edges = json.edges.ok_or_else(|| D::Error::custom("missing edges"))?;
                Hypergraph::new(m, to_edges(edges)).map(Valuation::Hypergraph)
            }
            "symmetric" => {
                let profile = json.profile.ok_or_else(|| D::Error::custom("missing profile"))?;
                SymmetricValuation::new(m, profile).map(Valuation::Symmetric)
            }
            "mph" => {
                let clauses = json.clauses.ok_or_else(|| D::Error::custom("missing clauses"))?;
                let hs: Result<Vec<_>> = clauses
                    .into_iter()
                    .map(|c| Hypergraph::new(m, c.into_iter().map(|e| (e.set, e.w))))
                    .collect();
                match hs {
                    Ok(hs) => {
                        let k = json.k.unwrap_or_else(|| {
                            hs.iter().map(|h| h.rank()).max().unwrap_or(1).max(1)
                        });
                        MphRepresentation::new(m, k, hs).map(Valuation::Mph)
                    }
                    Err(e) => Err(e),
                }
            }
            other => return Err(D::Error::custom(format!("unknown valuation kind '{other}'"))),
        };
        parsed.map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2_explicit(m: usize) -> ExplicitValuation {
        // complete graph: every pair worth 1, so f(S) = C(|S|, 2)
        ExplicitValuation::from_fn(m, |s| {
            let c = s.card();
            (c * c.saturating_sub(1) / 2) as f64
        })
        .unwrap()
    }

    #[test]
    fn mobius_of_f1_alternates_in_sign() {
        // f1(S) = 1 for nonempty S: h(S) = +1 on odd, -1 on even cardinality.
        let m = 3;
        let f1 = ExplicitValuation::from_fn(m, |s| if s.is_empty() { 0.0 } else { 1.0 }).unwrap();
        let h = f1.to_hypergraph().unwrap();
        for s in ItemSet::full(m).subsets() {
            if s.is_empty() {
                continue;
            }
            let expect = if s.card() % 2 == 1 { 1.0 } else { -1.0 };
            assert_eq!(h.weight(s), expect, "edge {s}");
        }
        assert_eq!(h.ranks(), (3, 3, 2));
    }

    #[test]
    fn mobius_of_f2_gives_all_pairs() {
        let h = f2_explicit(4).to_hypergraph().unwrap();
        assert_eq!(h.edge_count(), 6);
        for (s, w) in h.edges() {
            assert_eq!(s.card(), 2);
            assert_eq!(w, 1.0);
        }
        assert_eq!(h.ranks(), (2, 2, 0));
    }

    #[test]
    fn additive_hypergraph_is_rank_one() {
        let f = ExplicitValuation::from_fn(2, |s| {
            let mut v = 0.0;
            if s.contains(0) {
                v += 3.25;
            }
            if s.contains(1) {
                v += 1.5;
            }
            v
        })
        .unwrap();
        let h = f.to_hypergraph().unwrap();
        assert_eq!(h.edge_count(), 2);
        assert_eq!(h.weight(ItemSet::singleton(0)), 3.25);
        assert_eq!(h.weight(ItemSet::singleton(1)), 1.5);
    }

    #[test]
    fn hypergraph_eval_sums_contained_edges() {
        let h = Hypergraph::new(
            3,
            [
                (ItemSet::from_indices(&[0, 1]), 2.0),
                (ItemSet::singleton(0), 1.0),
                (ItemSet::singleton(1), 1.0),
                (ItemSet::singleton(2), 1.0),
            ],
        )
        .unwrap();
        assert_eq!(h.value(ItemSet::from_indices(&[0, 1])), 4.0);
        assert_eq!(h.value(ItemSet::singleton(2)), 1.0);
        assert_eq!(h.value(ItemSet::EMPTY), 0.0);
    }

    #[test]
    fn roundtrip_on_random_sparse_hypergraphs() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(11);
        for _ in 0..40 {
            let m = rng.gen_range(1..=9);
            let mut edges = Vec::new();
            for _ in 0..rng.gen_range(0..12) {
                let mask = rng.gen_range(1..1u32 << m);
                let w = rng.gen_range(-5.0..5.0);
                edges.push((ItemSet(mask), w));
            }
            let h = Hypergraph::new(m, edges).unwrap();
            let f = h.to_explicit().unwrap();
            let h2 = f.to_hypergraph().unwrap();
            let f2 = h2.to_explicit().unwrap();
            for s in ItemSet::full(m).subsets() {
                assert!((f.value(s) - f2.value(s)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empty_hypergraph_expands_to_zero() {
        let f = Hypergraph::empty(4).to_explicit().unwrap();
        assert!(f.table().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mph_eval_matches_max_of_clause_expansions() {
        let c1 = Hypergraph::new(3, [(ItemSet::from_indices(&[0, 1]), 2.0)]).unwrap();
        let c2 = Hypergraph::new(3, [(ItemSet::singleton(2), 1.5)]).unwrap();
        let rep = MphRepresentation::new(3, 2, vec![c1.clone(), c2.clone()]).unwrap();
        let e1 = c1.to_explicit().unwrap();
        let e2 = c2.to_explicit().unwrap();
        for s in ItemSet::full(3).subsets() {
            assert_eq!(rep.value(s), e1.value(s).max(e2.value(s)));
        }
    }

    #[test]
    fn mph_rejects_bad_clause()
    {
        let neg = Hypergraph::new(3, [(ItemSet::singleton(0), -1.0)]).unwrap();
        assert!(MphRepresentation::new(3, 2, vec![neg]).is_err());
        let wide = Hypergraph::new(3, [(ItemSet::full(3), 1.0)]).unwrap();
        assert!(MphRepresentation::new(3, 2, vec![wide]).is_err());
    }

    #[test]
    fn eval_rejects_out_of_range_bits() {
        let v = Valuation::Symmetric(SymmetricValuation::new(3, vec![0.0, 1.0, 1.0, 1.0]).unwrap());
        assert!(v.eval(ItemSet::singleton(5)).is_err());
        assert_eq!(v.eval(ItemSet::EMPTY).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_eval_is_permutation_invariant() {
        use rand::seq::SliceRandom;
        let mut rng = crate::rng::rng_from_seed(3);
        let profile = vec![0.0, 1.0, 2.5, 2.5, 4.0, 7.0];
        let v = SymmetricValuation::new(5, profile).unwrap();
        for _ in 0..50 {
            let mut perm: Vec<usize> = (0..5).collect();
            perm.shuffle(&mut rng);
            for s in ItemSet::full(5).subsets() {
                let mapped = ItemSet::from_indices(&s.iter().map(|j| perm[j]).collect::<Vec<_>>());
                assert_eq!(v.value(s), v.value(mapped));
            }
        }
    }

    #[test]
    fn json_roundtrip_all_kinds() {
        let explicit = Valuation::Explicit(f2_explicit(3));
        let hg = Valuation::Hypergraph(
            Hypergraph::new(3, [(ItemSet::from_indices(&[0, 2]), -1.0), (ItemSet::singleton(0), 2.0)])
                .unwrap(),
        );
        let sym = Valuation::Symmetric(SymmetricValuation::new(4, vec![0.0, 1.0, 1.0, 1.0, 2.0]).unwrap());
        let mph = Valuation::Mph(
            MphRepresentation::new(
                3,
                2,
                vec![Hypergraph::new(3, [(ItemSet::from_indices(&[1, 2]), 1.0)]).unwrap()],
            )
            .unwrap(),
        );
        for v in [explicit, hg, sym, mph] {
            let text = serde_json::to_string(&v).unwrap();
            let back: Valuation = serde_json::from_str(&text).unwrap();
            assert_eq!(v, back);
        }
    }
}
