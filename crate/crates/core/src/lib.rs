//! Set functions in the MPH-k hierarchy: representations and structural
//! queries, positive-lower-envelope constructions with an LP ground-truth
//! oracle, configuration-LP welfare maximization with random-permutation
//! rounding, and a simultaneous single-item auction simulator with no-regret
//! learning.

pub mod auction;
pub mod error;
pub mod instances;
pub mod items;
pub mod maxflow;
pub mod rng;
pub mod ple;
pub mod setfn;
pub mod simplex;
pub mod valuation;
pub mod welfare;

pub use error::{Error, Result};
pub use items::ItemSet;
pub use valuation::{
    ExplicitValuation, Hypergraph, MphRepresentation, SymmetricValuation, Valuation,
};
