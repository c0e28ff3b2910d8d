//! Structural queries on explicit set functions: property classification,
//! demand queries, supermodular degree, XOR/OR combination, restriction, and
//! pointwise approximation ratio.

use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::valuation::{ExplicitValuation, Valuation};
use serde::Serialize;

/// Exhaustive property checks scan 4^m pairs; cap per the ground-set budget.
pub const MAX_PROPERTY_ITEMS: usize = 12;
/// Supermodular dependence scans m^2 2^m triples.
pub const MAX_DEGREE_ITEMS: usize = 16;

/// Outcome of exhaustive property verification. Every false flag carries a
/// witness pair of sets under `witness` keyed by the property name.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub normalized: bool,
    pub monotone: bool,
    pub nonnegative: bool,
    pub submodular: bool,
    pub subadditive: bool,
    pub symmetric: bool,
    pub witness: Vec<(String, ItemSet, ItemSet)>,
}

impl PropertyReport {
    fn witness_for(&self, property: &str) -> Option<(ItemSet, ItemSet)> {
        self.witness
            .iter()
            .find(|(name, _, _)| name == property)
            .map(|&(_, a, b)| (a, b))
    }

    pub fn monotone_witness(&self) -> Option<(ItemSet, ItemSet)> {
        self.witness_for("monotone")
    }

    pub fn submodular_witness(&self) -> Option<(ItemSet, ItemSet)> {
        self.witness_for("submodular")
    }
}

/// Exhaustively verify normalization, monotonicity, nonnegativity,
/// submodularity, subadditivity, and symmetry.
pub fn check_properties(f: &ExplicitValuation) -> Result<PropertyReport> {
    let m = f.m();
    if m > MAX_PROPERTY_ITEMS {
        return Err(Error::capacity(format!(
            "property checks scan 4^m pairs; m = {m} exceeds {MAX_PROPERTY_ITEMS}"
        )));
    }
    let full = ItemSet::full(m);
    let mut witness = Vec::new();

    let normalized = f.value(ItemSet::EMPTY) == 0.0;

    let mut monotone = true;
    'mono: for s in full.subsets() {
        for j in 0..m {
            if !s.contains(j) && f.value(s.insert(j)) < f.value(s) {
                monotone = false;
                witness.push(("monotone".into(), s, s.insert(j)));
                break 'mono;
            }
        }
    }

    let mut nonnegative = true;
    for s in full.subsets() {
        if f.value(s) < 0.0 {
            nonnegative = false;
            witness.push(("nonnegative".into(), s, s));
            break;
        }
    }

    // f(S+i) + f(S+j) >= f(S+i+j) + f(S) for i != j outside S.
    let mut submodular = true;
    'sub: for s in full.subsets() {
        for i in 0..m {
            if s.contains(i) {
                continue;
            }
            for j in (i + 1)..m {
                if s.contains(j) {
                    continue;
                }
                let si = s.insert(i);
                let sj = s.insert(j);
                if f.value(si) + f.value(sj) < f.value(si.insert(j)) + f.value(s) {
                    submodular = false;
                    witness.push(("submodular".into(), si, sj));
                    break 'sub;
                }
            }
        }
    }

    let mut subadditive = true;
    'sup: for s in full.subsets() {
        for t in full.subsets() {
            if f.value(s.union(t)) > f.value(s) + f.value(t) {
                subadditive = false;
                witness.push(("subadditive".into(), s, t));
                break 'sup;
            }
        }
    }

    let mut symmetric = true;
    let mut by_card: Vec<Option<ItemSet>> = vec![None; m + 1];
    'sym: for s in full.subsets() {
        match by_card[s.card()] {
            None => by_card[s.card()] = Some(s),
            Some(rep) => {
                if f.value(rep) != f.value(s) {
                    symmetric = false;
                    witness.push(("symmetric".into(), rep, s));
                    break 'sym;
                }
            }
        }
    }

    Ok(PropertyReport {
        normalized,
        monotone,
        nonnegative,
        submodular,
        subadditive,
        symmetric,
        witness,
    })
}

/// Marginal value f(T | S) = f(T u S) - f(S).
pub fn marginal(v: &Valuation, t: ItemSet, s: ItemSet) -> Result<f64> {
    Ok(v.eval(t.union(s))? - v.eval(s)?)
}

/// argmax over S of v(S) - sum of prices in S, by exhaustive search. Ties go
/// to the subset-lexicographically smallest bit pattern, so with zero prices
/// and a (weakly) monotone valuation the full set wins.
pub fn demand_query(v: &Valuation, prices: &[f64]) -> Result<ItemSet> {
    let m = v.m();
    if prices.len() != m {
        return Err(Error::invalid(format!(
            "price vector has {} entries for {m} items",
            prices.len()
        )));
    }
    if prices.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("prices must be finite"));
    }
    let mut best = ItemSet::EMPTY;
    let mut best_utility = v.eval(ItemSet::EMPTY)?;
    for s in ItemSet::full(m).subsets() {
        let utility = v.eval(s)? - s.iter().map(|j| prices[j]).sum::<f64>();
        if utility > best_utility || (utility == best_utility && s.lex_before(best)) {
            best = s;
            best_utility = utility;
        }
    }
    Ok(best)
}

/// Supermodular dependence per item: j' is in Dep(j) when some context S
/// makes the marginal of j strictly larger once j' is present. The degree is
/// the largest dependency set; submodular functions have degree 0.
pub fn supermodular_degree(f: &ExplicitValuation) -> Result<(usize, Vec<ItemSet>)> {
    let m = f.m();
    if m > MAX_DEGREE_ITEMS {
        return Err(Error::capacity(format!(
            "supermodular degree scans m^2 2^m contexts; m = {m} exceeds {MAX_DEGREE_ITEMS}"
        )));
    }
    let mut deps = vec![ItemSet::EMPTY; m];
    for j in 0..m {
        for jp in 0..m {
            if j == jp {
                continue;
            }
            let rest = ItemSet::full(m).remove(j).remove(jp);
            let depends = rest.subsets().any(|s| {
                f.marginal(ItemSet::singleton(j), s.insert(jp))
                    > f.marginal(ItemSet::singleton(j), s)
            });
            if depends {
                deps[j] = deps[j].insert(jp);
            }
        }
    }
    let degree = deps.iter().map(|d| d.card()).max().unwrap_or(0);
    Ok((degree, deps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    /// Pointwise maximum.
    Xor,
    /// Best split of S between the two functions.
    Or,
}

pub fn combine(
    f: &ExplicitValuation,
    g: &ExplicitValuation,
    mode: CombineMode,
) -> Result<ExplicitValuation> {
    if f.m() != g.m() {
        return Err(Error::invalid(format!(
            "ground sets differ: {} vs {} items",
            f.m(),
            g.m()
        )));
    }
    match mode {
        CombineMode::Xor => {
            ExplicitValuation::from_fn(f.m(), |s| f.value(s).max(g.value(s)))
        }
        CombineMode::Or => ExplicitValuation::from_fn(f.m(), |s| {
            s.subsets()
                .map(|t| f.value(t) + g.value(s.minus(t)))
                .fold(f64::NEG_INFINITY, f64::max)
        }),
    }
}

/// A valuation restricted to S, relabeled onto the ground set {0..|S|-1}.
#[derive(Debug, Clone)]
pub struct RestrictedValuation {
    pub valuation: ExplicitValuation,
    /// mapping[new_index] = original item
    pub mapping: Vec<usize>,
}

impl RestrictedValuation {
    /// Lift a relabeled subset back to original item indices.
    pub fn unmap(&self, s: ItemSet) -> ItemSet {
        ItemSet::from_indices(&s.iter().map(|j| self.mapping[j]).collect::<Vec<_>>())
    }
}

pub fn restrict(v: &Valuation, s: ItemSet) -> Result<RestrictedValuation> {
    if !s.valid_for(v.m()) {
        return Err(Error::invalid(format!("restriction {s} outside ground set")));
    }
    let mapping = s.indices();
    let valuation = ExplicitValuation::from_fn(mapping.len(), |t| {
        let original = ItemSet::from_indices(&t.iter().map(|j| mapping[j]).collect::<Vec<_>>());
        v.value_unchecked(original)
    })?;
    Ok(RestrictedValuation { valuation, mapping })
}

/// Pointwise approximation ratio: (max_S f/g) / (min_S f/g) over nonempty S,
/// ignoring 0/0 and reporting infinity when only one side vanishes.
pub fn approx_ratio(f: &ExplicitValuation, g: &ExplicitValuation) -> Result<f64> {
    if f.m() != g.m() {
        return Err(Error::invalid("ground sets differ"));
    }
    if !f.is_normalized() || !g.is_normalized() {
        return Err(Error::invalid("approximation ratio requires normalized inputs"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut any = false;
    for s in ItemSet::full(f.m()).subsets() {
        if s.is_empty() {
            continue;
        }
        let (fv, gv) = (f.value(s), g.value(s));
        if fv == 0.0 && gv == 0.0 {
            continue;
        }
        if gv == 0.0 {
            return Ok(f64::INFINITY);
        }
        let ratio = fv / gv;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        any = true;
    }
    if !any {
        return Ok(1.0);
    }
    if lo <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(hi / lo)
}
