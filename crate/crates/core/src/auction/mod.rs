//! Simultaneous single-item auctions: outcome computation under first- and
//! second-price rules, no-regret learning to an empirical coarse correlated
//! equilibrium, the projective-plane equilibrium construction, and
//! smoothness-inequality checks.

mod learn;
mod ne;
mod smooth;

pub use learn::{
    cce_metrics, no_regret_learn, standard_action_sets, ActionSet, CceMetrics, EmpiricalCce,
    LearnConfig,
};
pub use ne::{
    aux_bidder_utility_closed_form, plane_bidder_utility_closed_form, poa_lb_instance,
    sample_bundle_bid, verify_mixed_ne, BidderStrategy, NeReport, NeStrategy,
};
pub use smooth::{
    smoothness_check, single_item_density_smoothness, DeviationRule, ProfileSampler,
    SmoothnessReport, UniformBids,
};

use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::welfare::{Allocation, AuctionInstance};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PaymentRule {
    First,
    Second,
}

impl std::str::FromStr for PaymentRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(PaymentRule::First),
            "second" => Ok(PaymentRule::Second),
            other => Err(Error::invalid(format!("unknown payment rule '{other}'"))),
        }
    }
}

/// An n x m matrix of nonnegative bids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidProfile {
    pub bids: Vec<Vec<f64>>,
}

impl BidProfile {
    pub fn zeros(n: usize, m: usize) -> Self {
        BidProfile { bids: vec![vec![0.0; m]; n] }
    }

    pub fn n(&self) -> usize {
        self.bids.len()
    }

    fn validate(&self, inst: &AuctionInstance) -> Result<()> {
        if self.bids.len() != inst.n() {
            return Err(Error::invalid(format!(
                "profile has {} bidders, instance {}",
                self.bids.len(),
                inst.n()
            )));
        }
        for row in &self.bids {
            if row.len() != inst.m {
                return Err(Error::invalid("bid vector length differs from item count"));
            }
            if row.iter().any(|b| !b.is_finite() || *b < 0.0) {
                return Err(Error::invalid("bids must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuctionOutcome {
    pub allocation: Allocation,
    pub payments: Vec<f64>,
    pub utilities: Vec<f64>,
    /// per-item winning bid
    pub prices: Vec<f64>,
    pub welfare: f64,
    pub revenue: f64,
}

/// Per-item highest bid wins, ties to the lowest bidder index. First price
/// pays the winning bid, second price the second-highest bid on the item.
pub fn run_auction(
    inst: &AuctionInstance,
    profile: &BidProfile,
    rule: PaymentRule,
) -> Result<AuctionOutcome> {
    profile.validate(inst)?;
    let n = inst.n();
    let m = inst.m;
    let mut assignment = vec![ItemSet::EMPTY; n];
    let mut payments = vec![0.0; n];
    let mut prices = vec![0.0; m];
    for j in 0..m {
        let mut winner = 0usize;
        let mut best = profile.bids[0][j];
        let mut second = f64::NEG_INFINITY;
        for i in 1..n {
            let b = profile.bids[i][j];
            if b > best {
                second = best;
                best = b;
                winner = i;
            } else if b > second {
                second = b;
            }
        }
        if n == 1 {
            second = 0.0;
        }
        assignment[winner] = assignment[winner].insert(j);
        prices[j] = best;
        payments[winner] += match rule {
            PaymentRule::First => best,
            PaymentRule::Second => second.max(0.0),
        };
    }
    let allocation = Allocation { assignment };
    let mut utilities = vec![0.0; n];
    let mut welfare = 0.0;
    for i in 0..n {
        let value = inst.bidders[i].eval(allocation.assignment[i])?;
        utilities[i] = value - payments[i];
        welfare += value;
    }
    let revenue = payments.iter().sum();
    Ok(AuctionOutcome { allocation, payments, utilities, prices, welfare, revenue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::{ExplicitValuation, Valuation};

    fn additive_inst(rows: &[&[f64]]) -> AuctionInstance {
        let m = rows[0].len();
        let bidders = rows
            .iter()
            .map(|vals| {
                let vals = vals.to_vec();
                Valuation::Explicit(
                    ExplicitValuation::from_fn(m, move |s| s.iter().map(|j| vals[j]).sum())
                        .unwrap(),
                )
            })
            .collect();
        AuctionInstance::new(m, bidders).unwrap()
    }

    #[test]
    fn zero_bids_go_to_bidder_zero() {
        let inst = additive_inst(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let out = run_auction(&inst, &BidProfile::zeros(2, 2), PaymentRule::First).unwrap();
        assert_eq!(out.allocation.assignment[0], ItemSet::full(2));
        assert_eq!(out.utilities, vec![3.0, 0.0]);
        assert_eq!(out.revenue, 0.0);
    }

    #[test]
    fn first_and_second_price_payments() {
        let inst = additive_inst(&[&[1.0], &[1.0]]);
        let profile = BidProfile { bids: vec![vec![0.7], vec![0.5]] };
        let first = run_auction(&inst, &profile, PaymentRule::First).unwrap();
        assert_eq!(first.payments, vec![0.7, 0.0]);
        assert!((first.utilities[0] - 0.3).abs() < 1e-12);
        let second = run_auction(&inst, &profile, PaymentRule::Second).unwrap();
        assert_eq!(second.payments, vec![0.5, 0.0]);
        assert!(second.revenue <= first.revenue);
    }

    #[test]
    fn conservation_of_welfare() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(83);
        let inst = additive_inst(&[&[1.0, 0.5, 2.0], &[0.3, 1.5, 0.1], &[2.0, 2.0, 2.0]]);
        for _ in 0..50 {
            let profile = BidProfile {
                bids: (0..3)
                    .map(|_| (0..3).map(|_| rng.gen_range(0.0..2.0)).collect())
                    .collect(),
            };
            for rule in [PaymentRule::First, PaymentRule::Second] {
                let out = run_auction(&inst, &profile, rule).unwrap();
                let total_u: f64 = out.utilities.iter().sum();
                assert!((total_u + out.revenue - out.welfare).abs() < 1e-9);
                assert!(out.allocation.is_feasible());
            }
        }
    }

    #[test]
    fn abstention_is_individually_rational() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(89);
        let inst = additive_inst(&[&[1.0, 0.5], &[0.7, 0.9], &[0.2, 0.4]]);
        for _ in 0..60 {
            let mut profile = BidProfile {
                bids: (0..3)
                    .map(|_| (0..2).map(|_| rng.gen_range(0.0..1.5)).collect())
                    .collect(),
            };
            let quiet = rng.gen_range(0..3);
            profile.bids[quiet] = vec![0.0, 0.0];
            for rule in [PaymentRule::First, PaymentRule::Second] {
                let out = run_auction(&inst, &profile, rule).unwrap();
                assert!(out.utilities[quiet] >= 0.0, "player {quiet} under {rule:?}");
            }
        }
    }

    #[test]
    fn negative_bids_rejected() {
        let inst = additive_inst(&[&[1.0]]);
        let profile = BidProfile { bids: vec![vec![-0.1]] };
        assert!(run_auction(&inst, &profile, PaymentRule::First).is_err());
    }
}
