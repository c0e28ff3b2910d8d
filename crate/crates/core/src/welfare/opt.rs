//! Exact welfare optimum. Three engines, picked by instance shape: per-item
//! exhaustive assignment (implements the lexicographic tie rule directly),
//! branch-and-bound set packing when every bidder is single-minded, and a
//! subset DP over (bidder, consumed-items) otherwise.

use super::{Allocation, AuctionInstance};
use crate::error::{Error, Result};
use crate::items::ItemSet;

const EXHAUSTIVE_BUDGET: f64 = 2e7;
const DP_BUDGET: f64 = 4e9;

/// Exact maximum welfare and a maximizing allocation. Tie-breaking: the
/// exhaustive engine returns the lexicographically smallest per-item owner
/// vector (owner indices, unallocated last); the other engines are
/// deterministic for fixed input.
pub fn optimal_welfare(inst: &AuctionInstance) -> Result<(f64, Allocation)> {
    let n = inst.n() as f64;
    let m = inst.m as f64;
    if ((n + 1.0).ln() * m).exp() <= EXHAUSTIVE_BUDGET {
        return exhaustive(inst);
    }
    if let Some(bundles) = single_minded_bundles(inst) {
        return Ok(branch_and_bound(&bundles));
    }
    if n * 3f64.powf(m) <= DP_BUDGET && inst.m <= 20 {
        return subset_dp(inst);
    }
    Err(Error::capacity(format!(
        "optimal welfare needs (n+1)^m <= {EXHAUSTIVE_BUDGET:.0}, single-minded bidders, or n*3^m <= {DP_BUDGET:.0} (n = {}, m = {})",
        inst.n(),
        inst.m
    )))
}

fn single_minded_bundles(inst: &AuctionInstance) -> Option<Vec<(ItemSet, f64)>> {
    inst.bidders.iter().map(|b| b.single_minded_bundle()).collect()
}

/// Owner vectors in lexicographic order: owner(item) in 0..n, n = nobody.
fn exhaustive(inst: &AuctionInstance) -> Result<(f64, Allocation)> {
    let n = inst.n();
    let m = inst.m;
    let tables = inst.value_tables()?;
    let mut owners = vec![0usize; m];
    let mut best_value = f64::NEG_INFINITY;
    let mut best: Option<Vec<ItemSet>> = None;
    loop {
        let mut assignment = vec![ItemSet::EMPTY; n];
        for (j, &o) in owners.iter().enumerate() {
            if o < n {
                assignment[o] = assignment[o].insert(j);
            }
        }
        let value: f64 = assignment
            .iter()
            .enumerate()
            .map(|(i, s)| tables[i][s.0 as usize])
            .sum();
        if value > best_value {
            best_value = value;
            best = Some(assignment);
        }
        // next owner vector in lexicographic order (item 0 most significant)
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok((best_value, Allocation { assignment: best.unwrap() }));
            }
            pos -= 1;
            if owners[pos] < n {
                owners[pos] += 1;
                break;
            }
            owners[pos] = 0;
        }
    }
}

/// Depth-first packing over single-minded bidders, pruned by the sum of
/// remaining values. Bidders are taken in index order, preferring "serve"
/// over "skip", which fixes the maximizer deterministically.
fn branch_and_bound(bundles: &[(ItemSet, f64)]) -> (f64, Allocation) {
    let n = bundles.len();
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + bundles[i].1.max(0.0);
    }
    struct State<'a> {
        bundles: &'a [(ItemSet, f64)],
        suffix: &'a [f64],
        best_value: f64,
        best: Vec<bool>,
        chosen: Vec<bool>,
    }
    fn descend(st: &mut State, i: usize, used: ItemSet, value: f64) {
        if value + st.suffix[i] <= st.best_value {
            return;
        }
        if i == st.bundles.len() {
            if value > st.best_value {
                st.best_value = value;
                st.best = st.chosen.clone();
            }
            return;
        }
        let (bundle, v) = st.bundles[i];
        if bundle.inter(used).is_empty() && v > 0.0 {
            st.chosen[i] = true;
            descend(st, i + 1, used.union(bundle), value + v);
            st.chosen[i] = false;
        }
        descend(st, i + 1, used, value);
    }
    let mut st = State {
        bundles,
        suffix: &suffix,
        best_value: f64::NEG_INFINITY,
        best: vec![false; n],
        chosen: vec![false; n],
    };
    descend(&mut st, 0, ItemSet::EMPTY, 0.0);
    let assignment = st
        .best
        .iter()
        .zip(bundles)
        .map(|(&take, &(bundle, _))| if take { bundle } else { ItemSet::EMPTY })
        .collect();
    (st.best_value.max(0.0), Allocation { assignment })
}

/// dp[i][mask] = best welfare for bidders 0..i using exactly the items of
/// mask; transitions enumerate each bidder's bundle as a submask.
fn subset_dp(inst: &AuctionInstance) -> Result<(f64, Allocation)> {
    let n = inst.n();
    let m = inst.m;
    let tables = inst.value_tables()?;
    let size = 1usize << m;
    let mut dp = vec![0.0f64; size];
    let mut choice: Vec<Vec<u32>> = Vec::with_capacity(n);
    for table in tables.iter() {
        let mut next = vec![f64::NEG_INFINITY; size];
        let mut pick = vec![0u32; size];
        for mask in 0..size {
            // iterate submasks s of mask: bidder takes s
            let mut s = mask;
            loop {
                let rest = mask ^ s;
                let candidate = dp[rest] + table[s];
                if candidate > next[mask] {
                    next[mask] = candidate;
                    pick[mask] = s as u32;
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & mask;
            }
        }
        dp = next;
        choice.push(pick);
    }
    let (best_mask, best_value) = (0..size)
        .map(|mask| (mask, dp[mask]))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let mut assignment = vec![ItemSet::EMPTY; n];
    let mut mask = best_mask;
    for i in (0..n).rev() {
        let s = choice[i][mask] as usize;
        assignment[i] = ItemSet(s as u32);
        mask ^= s;
    }
    Ok((best_value, Allocation { assignment }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::{ExplicitValuation, Hypergraph, Valuation};

    fn single_minded(m: usize, bundle: &[usize], value: f64) -> Valuation {
        Valuation::Hypergraph(
            Hypergraph::new(m, [(ItemSet::from_indices(bundle), value)]).unwrap(),
        )
    }

    fn additive(values: &[f64]) -> Valuation {
        Valuation::Explicit(
            ExplicitValuation::from_fn(values.len(), |s| s.iter().map(|j| values[j]).sum())
                .unwrap(),
        )
    }

    #[test]
    fn disjoint_single_minded_bidders_are_both_served() {
        let inst = AuctionInstance::new(
            2,
            vec![single_minded(2, &[0], 1.0), single_minded(2, &[1], 1.0)],
        )
        .unwrap();
        let (opt, alloc) = optimal_welfare(&inst).unwrap();
        assert_eq!(opt, 2.0);
        assert!(alloc.assignment[0].contains(0));
        assert!(alloc.assignment[1].contains(1));
        assert!(alloc.is_feasible());
    }

    #[test]
    fn ties_resolve_to_the_smallest_owner_vector() {
        // both bidders value item 0 at 1; the lexicographic rule hands the
        // tie (and every worthless leftover item) to bidder 0
        let inst = AuctionInstance::new(
            2,
            vec![single_minded(2, &[0], 1.0), single_minded(2, &[0], 1.0)],
        )
        .unwrap();
        let (opt, alloc) = optimal_welfare(&inst).unwrap();
        assert_eq!(opt, 1.0);
        assert_eq!(alloc.assignment[0], ItemSet::full(2));
        assert_eq!(alloc.assignment[1], ItemSet::EMPTY);
    }

    #[test]
    fn optimum_dominates_every_feasible_allocation() {
        let inst = AuctionInstance::new(
            3,
            vec![additive(&[1.0, 2.0, 0.5]), single_minded(3, &[0, 1], 4.0)],
        )
        .unwrap();
        let (opt, alloc) = optimal_welfare(&inst).unwrap();
        assert!(alloc.is_feasible());
        // cross-check against all owner vectors
        let mut best = f64::NEG_INFINITY;
        for a in 0..3usize.pow(3) {
            let mut owners = a;
            let mut sets = [ItemSet::EMPTY; 2];
            for j in 0..3 {
                let o = owners % 3;
                owners /= 3;
                if o < 2 {
                    sets[o] = sets[o].insert(j);
                }
            }
            let w = inst.bidders[0].eval(sets[0]).unwrap() + inst.bidders[1].eval(sets[1]).unwrap();
            best = best.max(w);
        }
        assert!((opt - best).abs() < 1e-12);
        assert_eq!(opt, 4.5);
    }

    #[test]
    fn engines_agree_on_random_instances() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(61);
        for _ in 0..15 {
            let m = rng.gen_range(2..=5);
            let n = rng.gen_range(1..=3);
            let bidders: Vec<Valuation> = (0..n)
                .map(|_| {
                    let mut table = vec![0.0];
                    for _ in 1..1u32 << m {
                        table.push(rng.gen_range(0.0..3.0));
                    }
                    // monotone repair: running max
                    for bit in 0..m {
                        for mask in 0..table.len() {
                            if mask & (1 << bit) != 0 {
                                table[mask] = f64::max(table[mask], table[mask ^ (1 << bit)]);
                            }
                        }
                    }
                    Valuation::Explicit(ExplicitValuation::new(m, table).unwrap())
                })
                .collect();
            let inst = AuctionInstance::new(m, bidders).unwrap();
            let (via_exhaustive, _) = exhaustive(&inst).unwrap();
            let (via_dp, alloc) = subset_dp(&inst).unwrap();
            assert!((via_exhaustive - via_dp).abs() < 1e-9);
            assert!(alloc.is_feasible());
        }
    }

    #[test]
    fn branch_and_bound_matches_exhaustive_on_single_minded() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(67);
        for _ in 0..15 {
            let m = rng.gen_range(2..=6);
            let n = rng.gen_range(1..=5);
            let bidders: Vec<Valuation> = (0..n)
                .map(|_| {
                    let mask = rng.gen_range(1..1u32 << m);
                    single_minded(m, &ItemSet(mask).indices(), rng.gen_range(0.5..2.0))
                })
                .collect();
            let inst = AuctionInstance::new(m, bidders).unwrap();
            let bundles = single_minded_bundles(&inst).unwrap();
            let (bb, alloc) = branch_and_bound(&bundles);
            let (ex, _) = exhaustive(&inst).unwrap();
            assert!((bb - ex).abs() < 1e-9);
            assert!(alloc.is_feasible());
        }
    }

    #[test]
    fn capacity_error_on_oversized_instances() {
        let bidders = vec![additive(&[1.0; 8]); 200];
        let mut inst = AuctionInstance::new(8, bidders).unwrap();
        // force the generic path past both budgets
        inst.m = 22;
        assert!(matches!(optimal_welfare(&inst), Err(Error::Capacity(_))));
    }
}
