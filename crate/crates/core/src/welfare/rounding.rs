//! Random-permutation rounding: sample a tentative bundle per bidder from
//! the LP weights (padded with the empty set), then resolve contention in a
//! uniformly random bidder order, each bidder keeping the still-free part of
//! the tentative bundle.

use super::{Allocation, AuctionInstance, FractionalSolution};
use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::rng::derived_rng;
use rand::Rng;
use serde::Serialize;

pub fn round_permutation(
    sol: &FractionalSolution,
    inst: &AuctionInstance,
    seed: u64,
) -> Result<Allocation> {
    sol.check_feasible(inst)?;
    let mut rng = derived_rng(seed, 0x9d5);
    Ok(round_with(sol, inst.n(), &mut rng))
}

fn round_with(sol: &FractionalSolution, n: usize, rng: &mut impl Rng) -> Allocation {
    // tentative bundle per bidder; leftover mass goes to the empty set
    let mut tentative = vec![ItemSet::EMPTY; n];
    let mut residual: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    for e in &sol.entries {
        if residual[e.i] >= 0.0 {
            residual[e.i] -= e.x;
            if residual[e.i] < 0.0 {
                tentative[e.i] = e.set;
            }
        }
    }
    // uniform permutation over bidders
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut taken = ItemSet::EMPTY;
    let mut assignment = vec![ItemSet::EMPTY; n];
    for &i in &order {
        let kept = tentative[i].minus(taken);
        assignment[i] = kept;
        taken = taken.union(kept);
    }
    Allocation { assignment }
}

/// Monte Carlo estimate of the rounded welfare.
#[derive(Debug, Clone, Serialize)]
pub struct RoundingStats {
    pub trials: usize,
    pub mean_welfare: f64,
    pub std_err: f64,
    pub ratio_to_lp: f64,
}

impl RoundingStats {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.trials, self.mean_welfare, self.std_err, self.ratio_to_lp
        )
    }
}

pub fn estimate_rounded_welfare(
    sol: &FractionalSolution,
    inst: &AuctionInstance,
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<RoundingStats> {
    if trials == 0 {
        return Err(Error::invalid("at least one rounding trial is required"));
    }
    sol.check_feasible(inst)?;
    let tables = inst.value_tables()?;
    let n = inst.n();
    let welfare_of = |alloc: &Allocation| -> f64 {
        alloc
            .assignment
            .iter()
            .enumerate()
            .map(|(i, s)| tables[i][s.0 as usize])
            .sum()
    };
    // trial seeds derive from (seed, trial), so the partition into threads
    // cannot change the outcome
    let run_chunk = |lo: usize, hi: usize| -> (f64, f64) {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for t in lo..hi {
            let mut rng = derived_rng(seed, t as u64);
            let alloc = round_with(sol, n, &mut rng);
            let w = welfare_of(&alloc);
            sum += w;
            sumsq += w * w;
        }
        (sum, sumsq)
    };
    let threads = threads.max(1).min(trials);
    let (sum, sumsq) = if threads == 1 {
        run_chunk(0, trials)
    } else {
        let chunk = trials.div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let lo = t * chunk;
                    let hi = ((t + 1) * chunk).min(trials);
                    scope.spawn(move || run_chunk(lo, hi))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("rounding worker"))
                .fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1))
        })
    };
    let mean = sum / trials as f64;
    let variance = (sumsq / trials as f64 - mean * mean).max(0.0);
    let std_err = (variance / trials as f64).sqrt();
    let ratio_to_lp = if sol.objective.abs() > 0.0 { mean / sol.objective } else { 1.0 };
    Ok(RoundingStats { trials, mean_welfare: mean, std_err, ratio_to_lp })
}
