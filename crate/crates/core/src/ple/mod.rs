//! Positive lower envelopes: the LP feasibility oracle, the constructive
//! algorithms (flow, laminar, matching, supermodular ordering, canonical
//! symmetric), and hierarchy classification built on top of them.

mod construct;
mod level;
mod lp;
mod symmetric;

pub use construct::{canonical_symmetric_ple, ple1_matching, ple2_flow, ple_laminar, supermodular_ple};
pub use level::{mph_level, mph_level_sampled, ple_level, HierarchyLevel};
pub use lp::{
    cover_lp_value, kfrac_subadditive_check, ple_exists, ple_max_lp, ple_max_lp_certified,
    ple_witness_from_lp, PleCertificate,
};
pub use symmetric::{
    analytic_symmetric_dual, check_symmetric_dual, symmetric_mph_level, symmetric_worstcase_lp,
    SymmetricLpCertificate,
};

use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::valuation::{ExplicitValuation, Hypergraph};
use serde::ser::SerializeStruct;
use serde::Serialize;

/// Envelope values must match f on the target set, and never exceed f below
/// it, within this absolute tolerance.
pub const PLE_TOL: f64 = 1e-7;

/// A positive lower envelope of rank at most `k` for f restricted to
/// `target_set`: nonnegative hyperedge weights, value equal to f on the
/// target set, and no overestimate on any subset of it.
#[derive(Debug, Clone)]
pub struct PleWitness {
    pub envelope: Hypergraph,
    pub target_set: ItemSet,
    pub k: usize,
    pub valid: bool,
}

impl PleWitness {
    /// Exhaustively re-check both envelope conditions against f.
    pub fn verify(&self, f: &ExplicitValuation) -> Result<()> {
        if !self.target_set.valid_for(f.m()) {
            return Err(Error::invalid("target set outside ground set"));
        }
        if !self.envelope.is_positive() {
            return Err(Error::Verification("envelope carries a negative weight".into()));
        }
        if self.envelope.rank() > self.k {
            return Err(Error::Verification(format!(
                "envelope rank {} exceeds declared bound {}",
                self.envelope.rank(),
                self.k
            )));
        }
        for (edge, _) in self.envelope.edges() {
            if !edge.is_subset_of(self.target_set) {
                return Err(Error::Verification(format!(
                    "edge {edge} leaves the target set {}",
                    self.target_set
                )));
            }
        }
        let top = self.envelope.value(self.target_set);
        if (top - f.value(self.target_set)).abs() > PLE_TOL {
            return Err(Error::Verification(format!(
                "envelope misses the target value: {} vs {}",
                top,
                f.value(self.target_set)
            )));
        }
        for t in self.target_set.subsets() {
            if self.envelope.value(t) > f.value(t) + PLE_TOL {
                return Err(Error::Verification(format!(
                    "envelope overestimates f on {t}: {} > {}",
                    self.envelope.value(t),
                    f.value(t)
                )));
            }
        }
        Ok(())
    }
}

impl Serialize for PleWitness {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Edge {
            set: ItemSet,
            w: f64,
        }
        let edges: Vec<Edge> =
            self.envelope.edges().map(|(set, w)| Edge { set, w }).collect();
        let mut s = ser.serialize_struct("PleWitness", 6)?;
        s.serialize_field("m", &self.envelope.m())?;
        s.serialize_field("kind", "hypergraph")?;
        s.serialize_field("edges", &edges)?;
        s.serialize_field("target_set", &self.target_set)?;
        s.serialize_field("k", &self.k)?;
        s.serialize_field("valid", &self.valid)?;
        s.end()
    }
}
