//! Hierarchy classification: the level of f is the largest, over restrictions
//! S, of the minimal rank at which the restriction still admits a positive
//! lower envelope. Monotone functions classified this way sit in MPH-level;
//! dropping monotonicity gives the PLE relaxation of the same quantity.

use super::lp::{ple_exists, ple_witness_from_lp};
use super::PleWitness;
use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::valuation::ExplicitValuation;
use rand::Rng;
use std::collections::BTreeMap;

pub const MAX_LEVEL_ITEMS: usize = 10;
pub const MAX_SAMPLED_ITEMS: usize = 14;

#[derive(Debug, Clone)]
pub struct HierarchyLevel {
    pub level: usize,
    pub monotone: bool,
    /// False when only a sample of restrictions was inspected, in which case
    /// `level` is a lower bound.
    pub exact: bool,
    pub per_restriction_witnesses: Option<BTreeMap<ItemSet, PleWitness>>,
}

fn monotone_violation(f: &ExplicitValuation) -> Option<(ItemSet, ItemSet)> {
    let m = f.m();
    for s in ItemSet::full(m).subsets() {
        for j in 0..m {
            if !s.contains(j) && f.value(s.insert(j)) < f.value(s) {
                return Some((s, s.insert(j)));
            }
        }
    }
    None
}

/// Minimal k for one restriction, by binary search on the LP existence call.
fn minimal_rank(f: &ExplicitValuation, s: ItemSet) -> Result<usize> {
    let card = s.card();
    if card <= 1 {
        return Ok(1);
    }
    let (mut lo, mut hi) = (1usize, card);
    // rank |S| always works for nonnegative f (single edge carrying f(S))
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ple_exists(f, s, mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

fn level_over<I: IntoIterator<Item = ItemSet>>(
    f: &ExplicitValuation,
    restrictions: I,
    collect_witnesses: bool,
) -> Result<(usize, Option<BTreeMap<ItemSet, PleWitness>>)> {
    let mut level = 1usize;
    let mut witnesses = collect_witnesses.then(BTreeMap::new);
    for s in restrictions {
        if s.is_empty() {
            continue;
        }
        let k = minimal_rank(f, s)?;
        level = level.max(k);
        if let Some(map) = witnesses.as_mut() {
            let w = ple_witness_from_lp(f, s, k)?;
            map.insert(s, w);
        }
    }
    Ok((level, witnesses))
}

/// Minimal k such that every restriction of a monotone f admits a rank-k
/// envelope. Errors with the violating pair when f is not monotone (such
/// inputs classify under [`ple_level`] instead).
pub fn mph_level(f: &ExplicitValuation, collect_witnesses: bool) -> Result<HierarchyLevel> {
    if f.m() > MAX_LEVEL_ITEMS {
        return Err(Error::capacity(format!(
            "level classification enumerates 2^m restrictions; m = {} exceeds {MAX_LEVEL_ITEMS}",
            f.m()
        )));
    }
    if !f.is_normalized() {
        return Err(Error::invalid("level classification requires f(empty) = 0"));
    }
    if let Some((lo, hi)) = monotone_violation(f) {
        return Err(Error::NotMonotone { lo, hi });
    }
    let (level, witnesses) =
        level_over(f, ItemSet::full(f.m()).subsets(), collect_witnesses)?;
    Ok(HierarchyLevel { level, monotone: true, exact: true, per_restriction_witnesses: witnesses })
}

/// The same classification without the monotonicity requirement; defined for
/// nonnegative functions.
pub fn ple_level(f: &ExplicitValuation, collect_witnesses: bool) -> Result<HierarchyLevel> {
    if f.m() > MAX_LEVEL_ITEMS {
        return Err(Error::capacity(format!(
            "level classification enumerates 2^m restrictions; m = {} exceeds {MAX_LEVEL_ITEMS}",
            f.m()
        )));
    }
    if !f.is_normalized() {
        return Err(Error::invalid("level classification requires f(empty) = 0"));
    }
    let (level, witnesses) =
        level_over(f, ItemSet::full(f.m()).subsets(), collect_witnesses)?;
    Ok(HierarchyLevel {
        level,
        monotone: monotone_violation(f).is_none(),
        exact: true,
        per_restriction_witnesses: witnesses,
    })
}

/// Sampled classification for larger ground sets: inspects `samples` random
/// restrictions of at most [`super::lp::MAX_LP_ITEMS`] items. The result is a
/// lower bound only (`exact = false`).
pub fn mph_level_sampled(
    f: &ExplicitValuation,
    samples: usize,
    seed: u64,
) -> Result<HierarchyLevel> {
    let m = f.m();
    if m > MAX_SAMPLED_ITEMS {
        return Err(Error::capacity(format!(
            "sampled classification caps m at {MAX_SAMPLED_ITEMS}, got {m}"
        )));
    }
    if let Some((lo, hi)) = monotone_violation(f) {
        return Err(Error::NotMonotone { lo, hi });
    }
    let cap = super::lp::MAX_LP_ITEMS.min(10);
    let mut rng = crate::rng::rng_from_seed(seed);
    let mut restrictions = Vec::with_capacity(samples);
    for _ in 0..samples {
        let size = rng.gen_range(1..=cap.min(m));
        let mut s = ItemSet::EMPTY;
        while s.card() < size {
            s = s.insert(rng.gen_range(0..m));
        }
        restrictions.push(s);
    }
    let (level, _) = level_over(f, restrictions, false)?;
    Ok(HierarchyLevel { level, monotone: true, exact: false, per_restriction_witnesses: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::{combine, CombineMode};

    fn explicit(m: usize, f: impl Fn(ItemSet) -> f64) -> ExplicitValuation {
        ExplicitValuation::from_fn(m, f).unwrap()
    }

    fn f1(m: usize) -> ExplicitValuation {
        explicit(m, |s| if s.is_empty() { 0.0 } else { 1.0 })
    }

    fn f2(m: usize) -> ExplicitValuation {
        explicit(m, |s| {
            let c = s.card();
            (c * c.saturating_sub(1)) as f64 / 2.0
        })
    }

    fn flat2(m: usize) -> ExplicitValuation {
        explicit(m, |s| {
            if s.is_empty() {
                0.0
            } else if s == ItemSet::full(m) {
                2.0
            } else {
                1.0
            }
        })
    }

    fn random_monotone(m: usize, rng: &mut impl rand::Rng) -> ExplicitValuation {
        let mut table = vec![0.0f64];
        for _ in 1..1u32 << m {
            table.push(rng.gen_range(0.0..4.0));
        }
        for bit in 0..m {
            for mask in 0..table.len() {
                if mask & (1 << bit) != 0 {
                    table[mask] = f64::max(table[mask], table[mask ^ (1 << bit)]);
                }
            }
        }
        ExplicitValuation::new(m, table).unwrap()
    }

    #[test]
    fn hierarchy_identities() {
        assert_eq!(mph_level(&f1(5), false).unwrap().level, 1);
        assert_eq!(mph_level(&f2(4), false).unwrap().level, 2);
        assert_eq!(mph_level(&flat2(4), false).unwrap().level, 2);
    }

    #[test]
    fn witnesses_verify_everywhere() {
        let f = f2(4);
        let lvl = mph_level(&f, true).unwrap();
        let map = lvl.per_restriction_witnesses.unwrap();
        assert_eq!(map.len(), (1 << 4) - 1);
        for (s, w) in &map {
            assert!(w.valid, "restriction {s}");
            w.verify(&f).unwrap();
        }
    }

    #[test]
    fn non_monotone_rejected_but_ple_level_accepts() {
        // positive-rank-1 and nonnegative, but adding item 1 to {0} loses value
        let f = explicit(3, |s| {
            let mut v = 0.0;
            if s.contains(0) {
                v += 1.0;
            }
            if s.contains(1) {
                v += 0.2;
            }
            if s.contains(2) {
                v += 0.5;
            }
            if s.contains(0) && s.contains(1) {
                v -= 0.8;
            }
            v
        });
        assert!(f.value(ItemSet::from_indices(&[0, 1])) < f.value(ItemSet::singleton(0)));
        assert!(matches!(mph_level(&f, false), Err(Error::NotMonotone { .. })));
        let lvl = ple_level(&f, false).unwrap();
        assert!(!lvl.monotone);
        assert_eq!(lvl.level, 1, "nonnegative positive-rank-1 functions are PLE-1");
    }

    #[test]
    fn monotone_level_equals_ple_level() {
        let mut rng = crate::rng::rng_from_seed(17);
        for _ in 0..10 {
            let m = rng.gen_range(2..=5);
            let f = random_monotone(m, &mut rng);
            let a = mph_level(&f, false).unwrap().level;
            let b = ple_level(&f, false).unwrap().level;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn xor_and_or_do_not_raise_the_level() {
        let mut rng = crate::rng::rng_from_seed(23);
        for _ in 0..8 {
            let m = rng.gen_range(2..=5);
            let f = random_monotone(m, &mut rng);
            let g = random_monotone(m, &mut rng);
            let bound = mph_level(&f, false)
                .unwrap()
                .level
                .max(mph_level(&g, false).unwrap().level);
            let xor = combine(&f, &g, CombineMode::Xor).unwrap();
            assert!(mph_level(&xor, false).unwrap().level <= bound);
            let or = combine(&f, &g, CombineMode::Or).unwrap();
            assert!(mph_level(&or, false).unwrap().level <= bound);
        }
    }

    #[test]
    fn rank_k_envelopes_stay_available_above_the_level() {
        let f = f2(4);
        for s in ItemSet::full(4).subsets().filter(|s| s.card() >= 2) {
            for k in 2..=s.card() {
                assert!(super::ple_exists(&f, s, k).unwrap(), "k={k} S={s}");
            }
        }
    }

    #[test]
    fn sampled_mode_lower_bounds_the_exact_level() {
        let mut rng = crate::rng::rng_from_seed(29);
        for _ in 0..5 {
            let m = rng.gen_range(3..=6);
            let f = random_monotone(m, &mut rng);
            let exact = mph_level(&f, false).unwrap().level;
            let sampled = mph_level_sampled(&f, 40, 7).unwrap();
            assert!(!sampled.exact);
            assert!(sampled.level <= exact);
        }
    }
}
