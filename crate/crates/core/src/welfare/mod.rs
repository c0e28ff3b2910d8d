//! Welfare maximization: exact optimum, the configuration LP (explicit and
//! column-generation modes), random-permutation rounding, and the
//! projective-plane integrality-gap instances.

mod config_lp;
mod opt;
mod plane;
mod rounding;

pub use config_lp::{solve_config_lp, LpMode};
pub use opt::optimal_welfare;
pub use plane::{certify_gap_rational, integrality_gap_instance, ProjectivePlane};
pub use rounding::{estimate_rounded_welfare, round_permutation, RoundingStats};

use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::valuation::Valuation;
use serde::{Deserialize, Serialize};

/// Known quantities attached to generated instances.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_lp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poa: Option<f64>,
}

/// n bidder valuations over m shared items.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuctionInstance {
    pub m: usize,
    pub bidders: Vec<Valuation>,
    #[serde(default, skip_serializing_if = "meta_is_empty")]
    pub metadata: InstanceMetadata,
}

fn meta_is_empty(meta: &InstanceMetadata) -> bool {
    *meta == InstanceMetadata::default()
}

impl AuctionInstance {
    pub fn new(m: usize, bidders: Vec<Valuation>) -> Result<Self> {
        if bidders.is_empty() {
            return Err(Error::invalid("an instance needs at least one bidder"));
        }
        for (i, b) in bidders.iter().enumerate() {
            if b.m() != m {
                return Err(Error::invalid(format!(
                    "bidder {i} has {} items, instance has {m}",
                    b.m()
                )));
            }
        }
        Ok(AuctionInstance { m, bidders, metadata: InstanceMetadata::default() })
    }

    pub fn n(&self) -> usize {
        self.bidders.len()
    }

    pub fn with_metadata(mut self, metadata: InstanceMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    /// Expanded value tables for every bidder (m <= 20), the fast path for
    /// rounding and learning loops.
    pub fn value_tables(&self) -> Result<Vec<Vec<f64>>> {
        if self.m > 20 {
            return Err(Error::capacity(format!(
                "value tables need 2^m entries per bidder; m = {} exceeds 20",
                self.m
            )));
        }
        self.bidders
            .iter()
            .map(|b| Ok(b.to_explicit()?.table().to_vec()))
            .collect()
    }

    pub fn welfare(&self, allocation: &Allocation) -> Result<f64> {
        let mut total = 0.0;
        for (i, &s) in allocation.assignment.iter().enumerate() {
            total += self.bidders[i].eval(s)?;
        }
        Ok(total)
    }
}

/// Pairwise-disjoint bundles, one per bidder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub assignment: Vec<ItemSet>,
}

impl Allocation {
    pub fn empty(n: usize) -> Self {
        Allocation { assignment: vec![ItemSet::EMPTY; n] }
    }

    pub fn is_feasible(&self) -> bool {
        let mut used = ItemSet::EMPTY;
        for &s in &self.assignment {
            if !s.inter(used).is_empty() {
                return false;
            }
            used = used.union(s);
        }
        true
    }
}

/// A sparse solution of the configuration LP.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub entries: Vec<FractionalEntry>,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractionalEntry {
    pub i: usize,
    pub set: ItemSet,
    pub x: f64,
}

impl FractionalSolution {
    const FEAS_TOL: f64 = 1e-7;

    /// Per-bidder mass <= 1, per-item coverage <= 1, objective consistent.
    pub fn check_feasible(&self, inst: &AuctionInstance) -> Result<()> {
        let mut per_bidder = vec![0.0; inst.n()];
        let mut per_item = vec![0.0; inst.m];
        let mut value = 0.0;
        for e in &self.entries {
            if e.i >= inst.n() || !e.set.valid_for(inst.m) {
                return Err(Error::invalid("entry outside instance dimensions"));
            }
            if e.x < -Self::FEAS_TOL {
                return Err(Error::Verification(format!("negative weight {}", e.x)));
            }
            per_bidder[e.i] += e.x;
            for j in e.set.iter() {
                per_item[j] += e.x;
            }
            value += e.x * inst.bidders[e.i].eval(e.set)?;
        }
        if per_bidder.iter().any(|&v| v > 1.0 + Self::FEAS_TOL) {
            return Err(Error::Verification("bidder mass exceeds one".into()));
        }
        if per_item.iter().any(|&v| v > 1.0 + Self::FEAS_TOL) {
            return Err(Error::Verification("item coverage exceeds one".into()));
        }
        if (value - self.objective).abs() > 1e-6 * (1.0 + value.abs()) {
            return Err(Error::Verification(format!(
                "objective mismatch: recomputed {value}, stored {}",
                self.objective
            )));
        }
        Ok(())
    }

    /// True when every bidder's mass sits on a single bundle.
    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|e| e.x > 1.0 - 1e-9 || e.x < 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Hypergraph;

    #[test]
    fn instance_json_roundtrip_with_metadata() {
        let line = ItemSet::from_indices(&[0, 2]);
        let inst = AuctionInstance::new(
            3,
            vec![Valuation::Hypergraph(Hypergraph::new(3, [(line, 1.0)]).unwrap())],
        )
        .unwrap()
        .with_metadata(InstanceMetadata { known_opt: Some(1.0), k: Some(2), ..Default::default() });
        let text = serde_json::to_string(&inst).unwrap();
        let back: AuctionInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back.m, 3);
        assert_eq!(back.metadata, inst.metadata);
        assert_eq!(back.bidders[0].eval(line).unwrap(), 1.0);
    }

    #[test]
    fn fractional_solution_feasibility_checks() {
        let inst = AuctionInstance::new(
            2,
            vec![
                Valuation::Hypergraph(
                    Hypergraph::new(2, [(ItemSet::singleton(0), 1.0)]).unwrap(),
                ),
                Valuation::Hypergraph(
                    Hypergraph::new(2, [(ItemSet::singleton(1), 1.0)]).unwrap(),
                ),
            ],
        )
        .unwrap();
        let overfull = FractionalSolution {
            entries: vec![
                FractionalEntry { i: 0, set: ItemSet::singleton(0), x: 0.7 },
                FractionalEntry { i: 1, set: ItemSet::singleton(0), x: 0.7 },
            ],
            objective: 1.4,
        };
        assert!(overfull.check_feasible(&inst).is_err());
    }
}
