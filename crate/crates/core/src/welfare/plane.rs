//! Finite projective planes of prime order and the single-minded welfare
//! instances built on them. Any two lines meet, so integral welfare is 1,
//! while spreading every line at weight 1/k covers each point exactly once
//! and the LP reaches k - 1 + 1/k.

use super::{AuctionInstance, InstanceMetadata};
use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::valuation::{Hypergraph, Valuation};
use num::rational::BigRational;
use num::{BigInt, One, Zero};

/// Incidence structure with q^2 + q + 1 points and lines, q + 1 points per
/// line. Order 1 is the degenerate triangle; prime orders use the standard
/// homogeneous-coordinate construction over GF(q).
#[derive(Debug, Clone)]
pub struct ProjectivePlane {
    pub order: usize,
    pub lines: Vec<ItemSet>,
}

fn is_prime(q: usize) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl ProjectivePlane {
    pub fn points(&self) -> usize {
        self.order * self.order + self.order + 1
    }

    pub fn new(q: usize) -> Result<Self> {
        if q == 1 {
            // triangle: 3 points, 3 lines of 2 points each
            return Ok(ProjectivePlane {
                order: 1,
                lines: vec![
                    ItemSet::from_indices(&[0, 1]),
                    ItemSet::from_indices(&[1, 2]),
                    ItemSet::from_indices(&[0, 2]),
                ],
            });
        }
        if !is_prime(q) {
            return Err(Error::invalid(format!(
                "unsupported order {q}: only 1 and primes are built (prime powers need field extensions)"
            )));
        }
        let n = q * q + q + 1;
        if n > crate::items::MAX_ITEMS {
            return Err(Error::capacity(format!(
                "plane of order {q} has {n} points, above the {}-item cap",
                crate::items::MAX_ITEMS
            )));
        }
        // canonical representatives of projective points over GF(q):
        // (1, y, z), (0, 1, z), (0, 0, 1)
        let mut reps: Vec<[usize; 3]> = Vec::with_capacity(n);
        for y in 0..q {
            for z in 0..q {
                reps.push([1, y, z]);
            }
        }
        for z in 0..q {
            reps.push([0, 1, z]);
        }
        reps.push([0, 0, 1]);
        debug_assert_eq!(reps.len(), n);
        // lines share the same representative space; point p lies on line l
        // iff <p, l> = 0 (mod q)
        let mut lines = Vec::with_capacity(n);
        for l in &reps {
            let mut line = ItemSet::EMPTY;
            for (idx, p) in reps.iter().enumerate() {
                let dot = (p[0] * l[0] + p[1] * l[1] + p[2] * l[2]) % q;
                if dot == 0 {
                    line = line.insert(idx);
                }
            }
            lines.push(line);
        }
        Ok(ProjectivePlane { order: q, lines })
    }

    /// Structural sanity: line sizes, pairwise intersections, point degrees.
    pub fn verify(&self) -> Result<()> {
        let n = self.points();
        if self.lines.len() != n {
            return Err(Error::Verification("line count differs from point count".into()));
        }
        let mut degree = vec![0usize; n];
        for (a, line) in self.lines.iter().enumerate() {
            if line.card() != self.order + 1 {
                return Err(Error::Verification(format!(
                    "line {a} has {} points, expected {}",
                    line.card(),
                    self.order + 1
                )));
            }
            for j in line.iter() {
                degree[j] += 1;
            }
            for (b, other) in self.lines.iter().enumerate().skip(a + 1) {
                if line.inter(*other).card() != 1 {
                    return Err(Error::Verification(format!(
                        "lines {a} and {b} intersect in {} points",
                        line.inter(*other).card()
                    )));
                }
            }
        }
        if degree.iter().any(|&d| d != self.order + 1) {
            return Err(Error::Verification("a point misses its line degree".into()));
        }
        Ok(())
    }
}

/// One single-minded bidder per line, value 1. Integral optimum 1; fractional
/// optimum k - 1 + 1/k at line weight 1/k, where k = order + 1 is the bundle
/// size (the hypergraph rank of every bidder).
pub fn integrality_gap_instance(k: usize) -> Result<AuctionInstance> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    let plane = ProjectivePlane::new(k - 1)?;
    plane.verify()?;
    let m = plane.points();
    let bidders: Vec<Valuation> = plane
        .lines
        .iter()
        .map(|&line| {
            Ok(Valuation::Hypergraph(Hypergraph::new(m, [(line, 1.0)])?))
        })
        .collect::<Result<_>>()?;
    let kf = k as f64;
    Ok(AuctionInstance::new(m, bidders)?.with_metadata(InstanceMetadata {
        known_opt: Some(1.0),
        known_lp: Some(kf - 1.0 + 1.0 / kf),
        known_gap: Some(kf - 1.0 + 1.0 / kf),
        k: Some(k),
        poa: None,
    }))
}

/// Exact rational certification of the gap: the uniform 1/k fractional
/// solution is feasible with value (k(k-1)+1)/k, the uniform 1/k item prices
/// are dual feasible at the same value, and pairwise intersection forces
/// integral welfare 1. Returns the gap as an exact rational.
pub fn certify_gap_rational(k: usize) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    let plane = ProjectivePlane::new(k - 1)?;
    plane.verify()?;
    let n = plane.lines.len();
    let m = plane.points();
    let q = |a: usize, b: usize| BigRational::new(BigInt::from(a), BigInt::from(b));
    let inv_k = q(1, k);

    // primal feasibility at weight 1/k per line
    let mut coverage = vec![BigRational::zero(); m];
    let mut primal = BigRational::zero();
    for line in &plane.lines {
        for j in line.iter() {
            coverage[j] += inv_k.clone();
        }
        primal += inv_k.clone();
    }
    if coverage.iter().any(|c| *c != BigRational::one()) {
        return Err(Error::Verification("uniform solution does not cover each item once".into()));
    }
    if primal != q(n, k) {
        return Err(Error::Verification("primal value mismatch".into()));
    }

    // dual feasibility: price 1/k per item, bidder utilities zero
    for line in &plane.lines {
        let price: BigRational =
            line.iter().map(|_| inv_k.clone()).fold(BigRational::zero(), |a, b| a + b);
        if price != BigRational::one() {
            return Err(Error::Verification("line price differs from the bid value".into()));
        }
    }
    let dual = q(m, k);
    if dual != primal {
        return Err(Error::Verification("strong duality fails".into()));
    }

    // integral optimum is 1: any two desired bundles intersect
    for (a, line) in plane.lines.iter().enumerate() {
        for other in plane.lines.iter().skip(a + 1) {
            if line.inter(*other).is_empty() {
                return Err(Error::Verification("disjoint lines break the packing bound".into()));
            }
        }
    }
    Ok(primal)
}
