//! The projective-plane price-of-anarchy construction: several independent
//! plane instances whose line bidders mix a common value over their bundle
//! with CDF (kt)^(1/(k-1)^2) on [0, 1/k], plus auxiliary bidders wanting one
//! item per plane whose unique best response is to abstain. The equilibrium
//! serves exactly one line per plane, so welfare is the number of planes
//! while the optimum serves every auxiliary bundle.

use super::{BidProfile, PaymentRule};
use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::rng::rng_from_seed;
use crate::welfare::{integrality_gap_instance, AuctionInstance, InstanceMetadata};
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub enum BidderStrategy {
    /// Draw x with Pr[x <= t] = (k t)^(1/(k-1)^2) on [0, 1/k] and bid x on
    /// every item of the bundle.
    UniformBundleCdf { bundle: ItemSet, k: usize },
    Zero,
    /// An explicit finite mixture of bid vectors.
    Discrete { atoms: Vec<(Vec<f64>, f64)> },
}

#[derive(Debug, Clone, Serialize)]
pub struct NeStrategy {
    pub per_bidder: Vec<BidderStrategy>,
}

impl NeStrategy {
    pub fn sample(&self, m: usize, rng: &mut impl Rng) -> BidProfile {
        let bids = self
            .per_bidder
            .iter()
            .map(|s| match s {
                BidderStrategy::Zero => vec![0.0; m],
                BidderStrategy::UniformBundleCdf { bundle, k } => {
                    let x = sample_bundle_bid(*k, rng.gen::<f64>());
                    let mut row = vec![0.0; m];
                    for j in bundle.iter() {
                        row[j] = x;
                    }
                    row
                }
                BidderStrategy::Discrete { atoms } => {
                    let mut draw = rng.gen::<f64>();
                    let mut row = atoms.last().map(|(b, _)| b.clone()).unwrap_or(vec![0.0; m]);
                    for (bids, p) in atoms {
                        draw -= p;
                        if draw < 0.0 {
                            row = bids.clone();
                            break;
                        }
                    }
                    row
                }
            })
            .collect();
        BidProfile { bids }
    }
}

/// Inverse CDF: x = u^((k-1)^2) / k for uniform u.
pub fn sample_bundle_bid(k: usize, u: f64) -> f64 {
    let e = ((k - 1) * (k - 1)) as f64;
    u.powf(e) / k as f64
}

/// `planes` independent projective-plane single-minded instances (defaults
/// to k of them), plus one auxiliary bidder per line index wanting the
/// matching item of every plane. Metadata records the optimum (all auxiliary
/// bundles served) and the resulting price of anarchy.
pub fn poa_lb_instance(k: usize, planes: Option<usize>) -> Result<(AuctionInstance, NeStrategy)> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    let planes = planes.unwrap_or(k);
    if planes == 0 {
        return Err(Error::invalid("at least one plane is required"));
    }
    let base = integrality_gap_instance(k)?;
    let p = base.m; // points per plane = k(k-1) + 1
    let m = planes
        .checked_mul(p)
        .filter(|&total| total <= crate::items::MAX_ITEMS)
        .ok_or_else(|| {
            Error::capacity(format!(
                "{planes} planes of {p} points exceed the {}-item cap",
                crate::items::MAX_ITEMS
            ))
        })?;

    let mut bidders = Vec::new();
    let mut strategies = Vec::new();
    let shift = |s: ItemSet, by: usize| ItemSet(s.0 << by);
    for plane in 0..planes {
        for bidder in &base.bidders {
            let (line, value) = bidder.single_minded_bundle().expect("plane bidders");
            let bundle = shift(line, plane * p);
            bidders.push(crate::valuation::Valuation::Hypergraph(
                crate::valuation::Hypergraph::new(m, [(bundle, value)])?,
            ));
            strategies.push(BidderStrategy::UniformBundleCdf { bundle, k });
        }
    }
    for point in 0..p {
        let bundle = ItemSet::from_indices(
            &(0..planes).map(|plane| plane * p + point).collect::<Vec<_>>(),
        );
        bidders.push(crate::valuation::Valuation::Hypergraph(
            crate::valuation::Hypergraph::new(m, [(bundle, 1.0)])?,
        ));
        strategies.push(BidderStrategy::Zero);
    }
    let poa = p as f64 / planes as f64;
    let inst = AuctionInstance::new(m, bidders)?.with_metadata(InstanceMetadata {
        known_opt: Some(p as f64),
        known_lp: None,
        known_gap: None,
        k: Some(k.max(planes)),
        poa: Some(poa),
    });
    Ok((inst, NeStrategy { per_bidder: strategies }))
}

/// Closed forms for one plane bidder bidding x on the whole bundle: the win
/// probability of the bundle and the expected payment coincide, so expected
/// utility is zero for every x in [0, 1/k].
pub fn plane_bidder_utility_closed_form(k: usize, x: f64) -> (f64, f64) {
    let kf = k as f64;
    let kx = (kf * x).clamp(0.0, 1.0);
    let value = kx.powf(kf / (kf - 1.0));
    let payment = kf * x * kx.powf(1.0 / (kf - 1.0));
    (value, payment)
}

/// Closed forms for an auxiliary bidder bidding x on one item per plane
/// (with `planes` = k): expected value (kx)^(k^2/(k-1)^2) against expected
/// payment (kx)^(k/(k-1)^2 + 1); value < payment strictly inside (0, 1/k).
pub fn aux_bidder_utility_closed_form(k: usize, planes: usize, x: f64) -> (f64, f64) {
    let kf = k as f64;
    let kx = (kf * x).clamp(0.0, 1.0);
    let e = (kf - 1.0) * (kf - 1.0);
    let per_item_win = kx.powf(kf / e);
    let value = per_item_win.powi(planes as i32);
    let payment = planes as f64 * x * per_item_win;
    (value, payment)
}

#[derive(Debug, Clone, Serialize)]
pub struct NeReport {
    /// worst |expected utility| of a plane bidder over the closed-form grid
    pub closed_form_worst: f64,
    /// worst Monte Carlo deviation gain of a plane bidder (equal and unequal
    /// bundle bids)
    pub plane_deviation_gain: f64,
    /// worst Monte Carlo deviation gain of an auxiliary bidder
    pub aux_deviation_gain: f64,
    pub aux_abstention_optimal: bool,
    pub equilibrium_welfare_mean: f64,
    pub equilibrium_welfare_stderr: f64,
    /// optimum / equilibrium welfare, from instance metadata
    pub poa: f64,
    pub samples: usize,
}

/// Verify the mixed equilibrium: (a) closed-form zero utility on a grid of
/// equal bundle bids, (b) Monte Carlo estimates of equal-bid, unequal-bid
/// and auxiliary deviations, none profitable beyond `tol`, (c) abstention
/// optimal for auxiliary bidders, plus the equilibrium welfare estimate.
pub fn verify_mixed_ne(
    inst: &AuctionInstance,
    strat: &NeStrategy,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<NeReport> {
    let k = inst
        .metadata
        .k
        .ok_or_else(|| Error::invalid("instance metadata must carry k"))?;
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    // pick the representative plane bidder (first UniformBundleCdf) and
    // auxiliary bidder (first Zero)
    let plane_idx = strat
        .per_bidder
        .iter()
        .position(|s| matches!(s, BidderStrategy::UniformBundleCdf { .. }))
        .ok_or_else(|| Error::invalid("strategy has no plane bidder"))?;
    let aux_idx = strat
        .per_bidder
        .iter()
        .position(|s| matches!(s, BidderStrategy::Zero))
        .ok_or_else(|| Error::invalid("strategy has no auxiliary bidder"))?;
    let BidderStrategy::UniformBundleCdf { bundle: plane_bundle, .. } =
        strat.per_bidder[plane_idx]
    else {
        unreachable!()
    };
    let (aux_bundle, _) = inst.bidders[aux_idx]
        .single_minded_bundle()
        .ok_or_else(|| Error::invalid("auxiliary bidder must be single minded"))?;

    // (a) closed-form grid
    let grid: Vec<f64> = (1..=100).map(|i| i as f64 / (100.0 * k as f64)).collect();
    let closed_form_worst = grid
        .iter()
        .map(|&x| {
            let (v, p) = plane_bidder_utility_closed_form(k, x);
            (v - p).abs()
        })
        .fold(0.0f64, f64::max);

    // competitors per item (bidders whose CDF bundle contains the item)
    let competitors = |target: usize, bundle: ItemSet| -> Vec<Vec<(usize, usize)>> {
        bundle
            .iter()
            .map(|j| {
                strat
                    .per_bidder
                    .iter()
                    .enumerate()
                    .filter(|&(i, s)| {
                        i != target
                            && matches!(s, BidderStrategy::UniformBundleCdf { bundle, .. } if bundle.contains(j))
                    })
                    .map(|(i, s)| {
                        let BidderStrategy::UniformBundleCdf { k, .. } = s else { unreachable!() };
                        (i, *k)
                    })
                    .collect()
            })
            .collect()
    };
    let plane_rivals = competitors(plane_idx, plane_bundle);
    let aux_rivals = competitors(aux_idx, aux_bundle);

    // deviation menus: equal bids over the grid, plus unequal two-coordinate
    // perturbations (x on one item, y on the rest)
    let coarse: Vec<f64> = (1..=8).map(|i| i as f64 / (8.0 * k as f64)).collect();
    let mut plane_devs: Vec<Vec<f64>> = Vec::new();
    for &x in &grid {
        plane_devs.push(vec![x; plane_bundle.card()]);
    }
    for pos in 0..plane_bundle.card() {
        for &x in &coarse {
            for &y in &coarse {
                if x != y {
                    let mut bids = vec![y; plane_bundle.card()];
                    bids[pos] = x;
                    plane_devs.push(bids);
                }
            }
        }
    }
    let aux_devs: Vec<Vec<f64>> =
        grid.iter().map(|&x| vec![x; aux_bundle.card()]).collect();

    let mut rng = rng_from_seed(seed);
    let mut plane_sums = vec![0.0f64; plane_devs.len()];
    let mut aux_sums = vec![0.0f64; aux_devs.len()];
    for _ in 0..samples {
        // rival prices per item of each inspected bundle
        let draw_prices = |rivals: &Vec<Vec<(usize, usize)>>, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            rivals
                .iter()
                .map(|list| {
                    list.iter()
                        .map(|&(_, k)| sample_bundle_bid(k, rng.gen::<f64>()))
                        .fold(0.0f64, f64::max)
                })
                .collect()
        };
        let plane_prices = draw_prices(&plane_rivals, &mut rng);
        for (d, bids) in plane_devs.iter().enumerate() {
            let mut all = true;
            let mut pay = 0.0;
            for (pos, &b) in bids.iter().enumerate() {
                if b > plane_prices[pos] {
                    pay += b;
                } else {
                    all = false;
                }
            }
            plane_sums[d] += if all { 1.0 } else { 0.0 } - pay;
        }
        let aux_prices = draw_prices(&aux_rivals, &mut rng);
        for (d, bids) in aux_devs.iter().enumerate() {
            let mut all = true;
            let mut pay = 0.0;
            for (pos, &b) in bids.iter().enumerate() {
                if b > aux_prices[pos] {
                    pay += b;
                } else {
                    all = false;
                }
            }
            aux_sums[d] += if all { 1.0 } else { 0.0 } - pay;
        }
    }
    let plane_deviation_gain =
        plane_sums.iter().map(|s| s / samples as f64).fold(f64::NEG_INFINITY, f64::max);
    let aux_deviation_gain =
        aux_sums.iter().map(|s| s / samples as f64).fold(f64::NEG_INFINITY, f64::max);

    // equilibrium welfare: the top plane bidder of each plane wins its line
    let welfare_samples = samples.min(20_000).max(1);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..welfare_samples {
        let profile = strat.sample(inst.m, &mut rng);
        let outcome = super::run_auction(inst, &profile, PaymentRule::First)?;
        sum += outcome.welfare;
        sumsq += outcome.welfare * outcome.welfare;
    }
    let mean = sum / welfare_samples as f64;
    let var = (sumsq / welfare_samples as f64 - mean * mean).max(0.0);
    let stderr = (var / welfare_samples as f64).sqrt();

    Ok(NeReport {
        closed_form_worst,
        plane_deviation_gain,
        aux_deviation_gain,
        aux_abstention_optimal: aux_deviation_gain <= tol,
        equilibrium_welfare_mean: mean,
        equilibrium_welfare_stderr: stderr,
        poa: inst.metadata.poa.unwrap_or(f64::NAN),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::welfare::optimal_welfare;

    #[test]
    fn instance_shape_k3() {
        let (inst, strat) = poa_lb_instance(3, None).unwrap();
        assert_eq!(inst.m, 21);
        assert_eq!(inst.n(), 21 + 7);
        assert_eq!(inst.metadata.known_opt, Some(7.0));
        assert!((inst.metadata.poa.unwrap() - 7.0 / 3.0).abs() < 1e-12);
        let (opt, _) = optimal_welfare(&inst).unwrap();
        assert_eq!(opt, 7.0);
        let zeros = strat
            .per_bidder
            .iter()
            .filter(|s| matches!(s, BidderStrategy::Zero))
            .count();
        assert_eq!(zeros, 7);
    }

    #[test]
    fn closed_forms_match_at_the_boundary() {
        for k in [2usize, 3] {
            let (v, p) = plane_bidder_utility_closed_form(k, 1.0 / k as f64);
            assert!((v - 1.0).abs() < 1e-12);
            assert!((p - 1.0).abs() < 1e-12);
            // strictly interior: the auxiliary bidder pays more than it wins
            for i in 1..10 {
                let x = i as f64 / (10.0 * k as f64);
                let (av, ap) = aux_bidder_utility_closed_form(k, k, x);
                assert!(av < ap + 1e-12, "k={k} x={x}: {av} vs {ap}");
            }
        }
    }

    #[test]
    fn plane_bidder_utility_vanishes_on_the_grid() {
        for k in [2usize, 3] {
            for i in 1..=50 {
                let x = i as f64 / (50.0 * k as f64);
                let (v, p) = plane_bidder_utility_closed_form(k, x);
                assert!((v - p).abs() < 1e-12, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn k2_verification_passes() {
        let (inst, strat) = poa_lb_instance(2, None).unwrap();
        let report = verify_mixed_ne(&inst, &strat, 30_000, 0.05, 7).unwrap();
        assert!(report.closed_form_worst <= 1e-9);
        assert!(report.plane_deviation_gain <= 0.05, "{}", report.plane_deviation_gain);
        assert!(report.aux_abstention_optimal);
        // each plane contributes exactly one served line
        assert!((report.equilibrium_welfare_mean - 2.0).abs() <= 3.0 * report.equilibrium_welfare_stderr + 1e-9);
        assert!((report.poa - 1.5).abs() < 1e-12);
    }

    #[test]
    fn oversized_requests_hit_the_item_cap() {
        assert!(poa_lb_instance(4, None).is_err());
        assert!(poa_lb_instance(4, Some(1)).is_ok());
    }

    #[test]
    fn strategy_samples_are_reproducible() {
        let (inst, strat) = poa_lb_instance(2, None).unwrap();
        let mut r1 = rng_from_seed(5);
        let mut r2 = rng_from_seed(5);
        assert_eq!(strat.sample(inst.m, &mut r1), strat.sample(inst.m, &mut r2));
    }
}
