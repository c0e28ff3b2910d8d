//! No-regret play: every player runs multiplicative weights over a finite
//! set of bid vectors against the realized play of the others. The empirical
//! joint history approaches a coarse correlated equilibrium at the usual
//! sqrt(T ln |A|) rate, and the per-player external regret is reported, never
//! assumed zero.

use super::{BidProfile, PaymentRule};
use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::rng::rng_from_seed;
use crate::welfare::{optimal_welfare, AuctionInstance};
use rand::Rng;
use serde::Serialize;

/// A finite menu of bid vectors for one player.
#[derive(Debug, Clone)]
pub struct ActionSet {
    /// action -> (item, bid) support pairs
    pub actions: Vec<Vec<(usize, f64)>>,
}

impl ActionSet {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn bid_vector(&self, action: usize, m: usize) -> Vec<f64> {
        let mut bids = vec![0.0; m];
        for &(j, b) in &self.actions[action] {
            bids[j] = b;
        }
        bids
    }
}

/// The default menu: for each candidate bundle S (the bidder's bundle in a
/// welfare-optimal allocation, every singleton, and the desired set of a
/// single-minded bidder) and each grid level g in {0, d, 2d, .., v(S)/|S|},
/// the action "bid g on every item of S". The per-item cap keeps every
/// action individually rational when the whole bundle is won.
pub fn standard_action_sets(
    inst: &AuctionInstance,
    grid_step: Option<f64>,
) -> Result<Vec<ActionSet>> {
    let m = inst.m;
    let full = ItemSet::full(m);
    let max_value = inst
        .bidders
        .iter()
        .map(|b| b.eval(full))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let step = match grid_step {
        Some(s) if s > 0.0 => s,
        Some(_) => return Err(Error::invalid("grid step must be positive")),
        None => 0.02 * max_value,
    };
    let (_, optimal) = optimal_welfare(inst)?;
    let mut sets = Vec::with_capacity(inst.n());
    for (i, bidder) in inst.bidders.iter().enumerate() {
        let mut bundles = vec![optimal.assignment[i]];
        for j in 0..m {
            bundles.push(ItemSet::singleton(j));
        }
        if let Some((bundle, _)) = bidder.single_minded_bundle() {
            bundles.push(bundle);
        }
        bundles.sort_by_key(|s| s.0);
        bundles.dedup();
        let mut actions: Vec<Vec<(usize, f64)>> = vec![Vec::new()]; // abstain
        let mut seen = std::collections::BTreeSet::new();
        seen.insert(Vec::new());
        for bundle in bundles {
            if bundle.is_empty() {
                continue;
            }
            let cap = bidder.eval(bundle)? / bundle.card() as f64;
            let mut levels: Vec<f64> = Vec::new();
            let mut g = step;
            while g <= cap + 1e-12 {
                levels.push(g);
                g += step;
            }
            if levels.last().is_none_or(|&l| (l - cap).abs() > 1e-12) && cap > 0.0 {
                levels.push(cap);
            }
            for level in levels {
                let support: Vec<(usize, f64)> =
                    bundle.iter().map(|j| (j, level)).collect();
                let key: Vec<(usize, u64)> =
                    support.iter().map(|&(j, b)| (j, b.to_bits())).collect();
                if seen.insert(key) {
                    actions.push(support);
                }
            }
        }
        sets.push(ActionSet { actions });
    }
    Ok(sets)
}

#[derive(Debug, Clone)]
pub struct LearnConfig {
    pub iterations: usize,
    pub seed: u64,
    pub rule: PaymentRule,
    /// Learning rate; defaults to sqrt(ln |A| / T) on utilities normalized
    /// to [0, 1].
    pub eta: Option<f64>,
    /// Record a per-iteration trace (utilities, welfare, regret).
    pub trace: bool,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig { iterations: 10_000, seed: 0, rule: PaymentRule::First, eta: None, trace: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub utilities: Vec<f64>,
    pub welfare: f64,
    pub regrets: Vec<f64>,
}

/// The learned history: one action index per player per round, with uniform
/// time weights.
#[derive(Debug, Clone)]
pub struct EmpiricalCce {
    pub action_sets: Vec<ActionSet>,
    pub plays: Vec<Vec<u32>>,
    /// average external regret per player (utility units per round)
    pub regret: Vec<f64>,
    pub iterations: usize,
    pub rule: PaymentRule,
    pub trace: Option<Vec<TraceRow>>,
}

impl EmpiricalCce {
    pub fn profile_at(&self, t: usize, m: usize) -> BidProfile {
        let bids = self
            .plays[t]
            .iter()
            .enumerate()
            .map(|(i, &a)| self.action_sets[i].bid_vector(a as usize, m))
            .collect();
        BidProfile { bids }
    }

    /// Uniform weight carried by each recorded profile.
    pub fn weight(&self) -> f64 {
        1.0 / self.iterations as f64
    }
}

struct Realized {
    // per item: (best bid, owner) and (second-best bid, its owner). Action
    // supports carry strictly positive bids only, so the implicit zero bids
    // of everyone else behave exactly as in a full bid matrix: an item
    // nobody bids on goes to player 0 at price zero.
    top: Vec<(f64, usize)>,
    second: Vec<(f64, usize)>,
}

fn realize(action_sets: &[ActionSet], plays: &[u32], m: usize) -> Realized {
    let mut top = vec![(0.0f64, 0usize); m];
    let mut second = vec![(0.0f64, 0usize); m];
    for (i, &a) in plays.iter().enumerate() {
        for &(j, b) in &action_sets[i].actions[a as usize] {
            let (best, _) = top[j];
            if b > best {
                second[j] = top[j];
                top[j] = (b, i);
            } else if b > second[j].0 {
                second[j] = (b, i);
            }
        }
    }
    Realized { top, second }
}

/// Utility of `player` deviating to `action` against the realized bids of
/// the others (their own realized bid is excluded item by item). Items the
/// action does not touch carry an implicit zero bid and are won exactly when
/// every rival also sits at zero and the player has the lowest index.
fn deviation_utility(
    realized: &Realized,
    action: &[(usize, f64)],
    player: usize,
    table: &[f64],
    rule: PaymentRule,
    zero_wins: ItemSet,
) -> f64 {
    let mut won = zero_wins;
    let mut payment = 0.0;
    for &(j, b) in action {
        let (opp_best, opp_owner) = rival(realized, player, j);
        let wins = b > opp_best || (b == opp_best && player < opp_owner);
        if wins {
            won = won.insert(j);
            payment += match rule {
                PaymentRule::First => b,
                PaymentRule::Second => opp_best.max(0.0),
            };
        } else {
            won = won.remove(j);
        }
    }
    table[won.0 as usize] - payment
}

/// Best rival bid and its owner on item j, from `player`'s point of view.
fn rival(realized: &Realized, player: usize, j: usize) -> (f64, usize) {
    let (best, owner) = realized.top[j];
    if owner == player {
        realized.second[j]
    } else {
        (best, owner)
    }
}

/// Items `player` wins with an implicit zero bid: every rival is at zero and
/// the player index is lowest.
fn zero_bid_wins(realized: &Realized, player: usize, m: usize) -> ItemSet {
    let mut won = ItemSet::EMPTY;
    for j in 0..m {
        let (opp_best, opp_owner) = rival(realized, player, j);
        if opp_best == 0.0 && (player == 0 || player < opp_owner) {
            won = won.insert(j);
        }
    }
    won
}

pub fn no_regret_learn(
    inst: &AuctionInstance,
    action_sets: &[ActionSet],
    config: &LearnConfig,
) -> Result<EmpiricalCce> {
    let n = inst.n();
    let m = inst.m;
    if action_sets.len() != n {
        return Err(Error::invalid("one action set per player is required"));
    }
    if action_sets.iter().any(|a| a.is_empty()) {
        return Err(Error::invalid("every player needs a nonempty action set"));
    }
    if config.iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    // Zero bids are implicit; strip them so tie handling is uniform.
    let action_sets: Vec<ActionSet> = action_sets
        .iter()
        .map(|set| {
            let actions = set
                .actions
                .iter()
                .map(|a| {
                    if a.iter().any(|&(j, b)| j >= inst.m || b < 0.0 || !b.is_finite()) {
                        return Err(Error::invalid("action bids must be finite and nonnegative"));
                    }
                    Ok(a.iter().copied().filter(|&(_, b)| b > 0.0).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ActionSet { actions })
        })
        .collect::<Result<Vec<_>>>()?;
    let action_sets = &action_sets[..];
    let tables = inst.value_tables()?;
    let t_max = config.iterations;

    // normalization span per player: value range plus worst-case payment
    let mut span = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    for i in 0..n {
        let vmax = tables[i].iter().cloned().fold(0.0f64, f64::max);
        let pay_max = action_sets[i]
            .actions
            .iter()
            .map(|a| a.iter().map(|&(_, b)| b).sum::<f64>())
            .fold(0.0f64, f64::max);
        span.push((vmax + pay_max).max(1e-12));
        let auto = (f64::ln(action_sets[i].len().max(2) as f64) / t_max as f64).sqrt();
        eta.push(config.eta.unwrap_or(auto));
    }

    let mut rng = rng_from_seed(config.seed);
    let mut log_weights: Vec<Vec<f64>> =
        action_sets.iter().map(|a| vec![0.0; a.len()]).collect();
    let mut cum_action: Vec<Vec<f64>> =
        action_sets.iter().map(|a| vec![0.0; a.len()]).collect();
    let mut cum_realized = vec![0.0f64; n];
    let mut plays: Vec<Vec<u32>> = Vec::with_capacity(t_max);
    let mut trace = config.trace.then(Vec::new);
    let mut probs: Vec<f64> = Vec::new();

    for t in 0..t_max {
        // sample one action per player from the current mixed strategies
        let mut round = Vec::with_capacity(n);
        for i in 0..n {
            let lw = &log_weights[i];
            let max_lw = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            probs.clear();
            probs.extend(lw.iter().map(|w| (w - max_lw).exp()));
            let total: f64 = probs.iter().sum();
            let mut draw = rng.gen::<f64>() * total;
            let mut pick = probs.len() - 1;
            for (a, p) in probs.iter().enumerate() {
                draw -= p;
                if draw < 0.0 {
                    pick = a;
                    break;
                }
            }
            round.push(pick as u32);
        }
        let realized = realize(action_sets, &round, m);
        let mut round_utils = config.trace.then(|| vec![0.0; n]);
        for i in 0..n {
            let zero_wins = zero_bid_wins(&realized, i, m);
            for (a, action) in action_sets[i].actions.iter().enumerate() {
                let u =
                    deviation_utility(&realized, action, i, &tables[i], config.rule, zero_wins);
                cum_action[i][a] += u;
                log_weights[i][a] += eta[i] * (u / span[i]);
                if a == round[i] as usize {
                    cum_realized[i] += u;
                    if let Some(ru) = round_utils.as_mut() {
                        ru[i] = u;
                    }
                }
            }
        }
        if let Some(rows) = trace.as_mut() {
            let welfare: f64 = {
                let mut bundles = vec![ItemSet::EMPTY; n];
                for (j, &(_, owner)) in realized.top.iter().enumerate() {
                    bundles[owner] = bundles[owner].insert(j);
                }
                bundles
                    .iter()
                    .enumerate()
                    .map(|(i, s)| tables[i][s.0 as usize])
                    .sum()
            };
            let regrets: Vec<f64> = (0..n)
                .map(|i| {
                    let best = cum_action[i].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    (best - cum_realized[i]).max(0.0) / (t + 1) as f64
                })
                .collect();
            rows.push(TraceRow {
                iteration: t,
                utilities: round_utils.unwrap_or_default(),
                welfare,
                regrets,
            });
        }
        plays.push(round);
    }

    let regret: Vec<f64> = (0..n)
        .map(|i| {
            let best = cum_action[i].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (best - cum_realized[i]).max(0.0) / t_max as f64
        })
        .collect();
    Ok(EmpiricalCce {
        action_sets: action_sets.to_vec(),
        plays,
        regret,
        iterations: t_max,
        rule: config.rule,
        trace,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CceMetrics {
    pub expected_sw: f64,
    /// standard error of the welfare mean over the history
    pub sw_stderr: f64,
    pub opt: f64,
    pub ratio: f64,
    pub revenue: f64,
}

/// Expected welfare and revenue over the empirical history, against the
/// exact optimum.
pub fn cce_metrics(inst: &AuctionInstance, cce: &EmpiricalCce) -> Result<CceMetrics> {
    let tables = inst.value_tables()?;
    let n = inst.n();
    let m = inst.m;
    let mut sw_sum = 0.0;
    let mut sw_sumsq = 0.0;
    let mut rev_sum = 0.0;
    for round in &cce.plays {
        let realized = realize(&cce.action_sets, round, m);
        let mut bundles = vec![ItemSet::EMPTY; n];
        for (j, &(bid, owner)) in realized.top.iter().enumerate() {
            bundles[owner] = bundles[owner].insert(j);
            rev_sum += match cce.rule {
                PaymentRule::First => bid,
                PaymentRule::Second => realized.second[j].0.max(0.0),
            };
        }
        let sw: f64 = bundles
            .iter()
            .enumerate()
            .map(|(i, s)| tables[i][s.0 as usize])
            .sum();
        sw_sum += sw;
        sw_sumsq += sw * sw;
    }
    let t = cce.plays.len() as f64;
    let expected_sw = sw_sum / t;
    let sw_var = (sw_sumsq / t - expected_sw * expected_sw).max(0.0);
    let sw_stderr = (sw_var / t).sqrt();
    let (opt, _) = optimal_welfare(inst)?;
    let ratio = if expected_sw > 0.0 { opt / expected_sw } else { f64::INFINITY };
    Ok(CceMetrics { expected_sw, sw_stderr, opt, ratio, revenue: rev_sum / t })
}
