//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities. Tolerances are pinned in the assertions.

use mphk::auction::{
    cce_metrics, no_regret_learn, poa_lb_instance, single_item_density_smoothness,
    standard_action_sets, verify_mixed_ne, LearnConfig, UniformBids,
};
use mphk::instances::{rand_mph, sym3tight, sym4tight};
use mphk::items::ItemSet;
use mphk::ple::{
    analytic_symmetric_dual, canonical_symmetric_ple, check_symmetric_dual,
    kfrac_subadditive_check, mph_level, ple1_matching, ple2_flow, ple_exists, ple_laminar,
    supermodular_ple, symmetric_mph_level, symmetric_worstcase_lp,
};
use mphk::setfn::supermodular_degree;
use mphk::valuation::{ExplicitValuation, Hypergraph, SymmetricValuation, Valuation};
use mphk::welfare::{
    estimate_rounded_welfare, integrality_gap_instance, optimal_welfare, solve_config_lp,
    AuctionInstance, LpMode,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    mphk::rng::rng_from_seed(seed)
}

fn choose(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..r {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Random monotone normalized valuation via a running max over a random table.
fn random_monotone(m: usize, rng: &mut ChaCha8Rng) -> ExplicitValuation {
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
fn criterion_01_integrality_gap() {
    for k in [2usize, 3, 4] {
        let started = std::time::Instant::now();
        let inst = integrality_gap_instance(k).unwrap();
        let (opt, alloc) = optimal_welfare(&inst).unwrap();
        assert!(alloc.is_feasible());
        assert!((opt - 1.0).abs() <= 1e-6, "k={k}: opt = {opt}");
        let sol = solve_config_lp(&inst, LpMode::Auto).unwrap();
        let expect = k as f64 - 1.0 + 1.0 / k as f64;
        assert!(
            (sol.objective - expect).abs() <= 1e-6,
            "k={k}: lp = {}, expected {expect}",
            sol.objective
        );
        let elapsed = started.elapsed();
        assert!(elapsed.as_secs_f64() < 5.0, "k={k} took {elapsed:?}");
        println!(
            "criterion 1 (k={k}): PASS  opt=1, lp={:.9} (= {expect:.9}), {elapsed:?}",
            sol.objective
        );
    }
}

#[test]
fn criterion_02_symmetric_tight_levels() {
    let started = std::time::Instant::now();
    let f3 = sym3tight();
    assert_eq!(f3.value_at(6), 11.0);
    assert_eq!(f3.value_at(5), 5.0);
    let l3 = symmetric_mph_level(&f3).unwrap();
    assert_eq!(l3, 4, "rank-3 tight profile");
    let f4 = sym4tight();
    assert_eq!(f4.value_at(12), 385.0);
    assert_eq!(f4.value_at(11), 220.0);
    let l4 = symmetric_mph_level(&f4).unwrap();
    assert_eq!(l4, 6, "rank-4 tight profile");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0);
    println!("criterion 2: PASS  levels ({l3}, {l4}) = (4, 6), {elapsed:?}");
}

#[test]
fn criterion_03_symmetric_dual_certificates() {
    let started = std::time::Instant::now();
    let mut checked = 0;
    for m in 10..=40usize {
        // r = 3: z = (m - 4) / m
        let (y, z) = analytic_symmetric_dual(m, 3).unwrap();
        let expect = (m as f64 - 4.0) / m as f64;
        assert!((z - expect).abs() <= 1e-7, "m={m} r=3: z = {z}");
        let residual = check_symmetric_dual(m, 3, &y, z).unwrap();
        assert!(residual <= 1e-7, "m={m} r=3: residual {residual:.2e}");
        let cert = symmetric_worstcase_lp(m, 3).unwrap();
        assert!(cert.primal_value >= m as f64 * z - 1e-6, "weak duality at m={m} r=3");

        // r = 4: parity-dependent z
        let (y, z) = analytic_symmetric_dual(m, 4).unwrap();
        let mf = m as f64;
        let expect = if m % 2 == 0 {
            (mf - 4.0) / (mf + 2.0)
        } else {
            (mf - 2.0) * (mf - 3.0) / (mf * (mf + 1.0))
        };
        assert!((z - expect).abs() <= 1e-7, "m={m} r=4: z = {z}");
        let residual = check_symmetric_dual(m, 4, &y, z).unwrap();
        assert!(residual <= 1e-7, "m={m} r=4: residual {residual:.2e}");
        let cert = symmetric_worstcase_lp(m, 4).unwrap();
        assert!(cert.primal_value >= m as f64 * z - 1e-6, "weak duality at m={m} r=4");
        // for rank 4 the analytic dual is optimal
        assert!(
            (cert.primal_value - mf * z).abs() <= 1e-6,
            "m={m} r=4: optimum {} vs m*z = {}",
            cert.primal_value,
            mf * z
        );
        checked += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "{elapsed:?}");
    println!("criterion 3: PASS  {checked} ground-set sizes, both ranks, {elapsed:?}");
}

#[test]
fn criterion_04_rounding_guarantee() {
    let started = std::time::Instant::now();
    let mut r = rng(0x04);
    let mut worst_margin = f64::INFINITY;
    for trial in 0..50 {
        let k = [1usize, 2, 3][trial % 3];
        let m = r.gen_range(k.max(3)..=8);
        let n = r.gen_range(2..=4);
        let bidders: Vec<Valuation> = (0..n)
            .map(|b| {
                Valuation::Mph(
                    rand_mph(m, k, r.gen_range(1..=3), 0x0400 + (trial * 7 + b) as u64).unwrap(),
                )
            })
            .collect();
        let inst = AuctionInstance::new(m, bidders).unwrap();
        let sol = solve_config_lp(&inst, LpMode::Auto).unwrap();
        if sol.objective <= 1e-9 {
            continue;
        }
        let stats = estimate_rounded_welfare(&sol, &inst, 20_000, trial as u64, 2).unwrap();
        let bound = sol.objective / (k as f64 + 1.0);
        let margin = stats.mean_welfare - (bound - 3.0 * stats.std_err);
        worst_margin = worst_margin.min(margin);
        assert!(
            margin >= 0.0,
            "trial {trial} (k={k}, m={m}, n={n}): mean {} < bound {bound} - 3se ({})",
            stats.mean_welfare,
            stats.std_err
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "{elapsed:?}");
    println!("criterion 4: PASS  50 instances, worst margin {worst_margin:.4}, {elapsed:?}");
}

#[test]
fn criterion_05_ple_oracle_equivalence() {
    let started = std::time::Instant::now();
    let mut r = rng(0x05);
    let mut disagreements = 0usize;
    let mut runs = 0usize;

    // (a) flow on monotone positive-rank-2 inputs: 40 instances
    for _ in 0..40 {
        let m = r.gen_range(3..=7);
        let f = random_positive_rank2_monotone(m, &mut r);
        let s = random_nonempty_subset(m, &mut r);
        let constructed = ple2_flow(&f, s).map(|w| w.verify(&f).is_ok()).unwrap_or(false);
        let lp = ple_exists(&f, s, 2).unwrap();
        if constructed != lp {
            disagreements += 1;
        }
        runs += 1;
    }

    // (b) laminar negatives on nonnegative inputs: 40 instances
    for _ in 0..40 {
        let m = r.gen_range(3..=7);
        let f = random_laminar_nonnegative(m, &mut r);
        let s = ItemSet::full(m);
        match ple_laminar(&f, s) {
            Ok(w) => {
                let ok = w.verify(&f).is_ok();
                let lp = ple_exists(&f, s, w.k).unwrap();
                if !(ok && lp) {
                    disagreements += 1;
                }
            }
            Err(_) => disagreements += 1,
        }
        runs += 1;
    }

    // (c) matching on nonnegative positive-rank-1 inputs: 40 instances
    for _ in 0..40 {
        let m = r.gen_range(2..=7);
        let f = random_positive_rank1_nonnegative(m, &mut r);
        let s = random_nonempty_subset(m, &mut r);
        let constructed = ple1_matching(&f, s).map(|w| w.verify(&f).is_ok()).unwrap_or(false);
        let lp = ple_exists(&f, s, 1).unwrap();
        if constructed != lp {
            disagreements += 1;
        }
        runs += 1;
    }

    // (d) supermodular ordering on arbitrary monotone inputs: 40 instances
    for _ in 0..40 {
        let m = r.gen_range(2..=6);
        let f = random_monotone(m, &mut r);
        let mut ordering: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            ordering.swap(i, r.gen_range(0..=i));
        }
        let s = random_nonempty_subset(m, &mut r);
        match supermodular_ple(&f, &ordering, s) {
            Ok(w) => {
                let ok = w.verify(&f).is_ok();
                let lp = ple_exists(&f, s, w.k).unwrap();
                if !(ok && lp) {
                    disagreements += 1;
                }
            }
            Err(_) => disagreements += 1,
        }
        runs += 1;
    }

    // (e) canonical symmetric candidates: validity flag must equal the LP
    // call at the same rank (both directions matter here)
    let mut canonical_valid = 0usize;
    let mut canonical_invalid = 0usize;
    for _ in 0..40 {
        let m = r.gen_range(2..=7);
        let mut profile = vec![0.0f64];
        for t in 1..=m {
            let prev = profile[t - 1];
            profile.push(prev + r.gen_range(0.0..1.5));
        }
        let sym = SymmetricValuation::new(m, profile).unwrap();
        let rank = r.gen_range(1..=m);
        let w = canonical_symmetric_ple(&sym, rank).unwrap();
        let f = sym.to_explicit().unwrap();
        let lp = ple_exists(&f, ItemSet::full(m), rank).unwrap();
        if w.valid != lp {
            disagreements += 1;
        }
        if w.valid {
            canonical_valid += 1;
            if w.verify(&f).is_err() {
                disagreements += 1;
            }
        } else {
            canonical_invalid += 1;
        }
        runs += 1;
    }

    let elapsed = started.elapsed();
    assert_eq!(disagreements, 0, "{disagreements} of {runs} disagreed");
    assert!(
        canonical_valid > 0 && canonical_invalid > 0,
        "canonical family must exercise both outcomes ({canonical_valid} valid, {canonical_invalid} invalid)"
    );
    assert!(elapsed.as_secs_f64() < 180.0, "{elapsed:?}");
    println!(
        "criterion 5: PASS  {runs} instances, zero disagreements ({canonical_valid}+{canonical_invalid} canonical split), {elapsed:?}"
    );
}

#[test]
fn criterion_06_hierarchy_identities() {
    let started = std::time::Instant::now();
    let f1 = |m: usize| {
        ExplicitValuation::from_fn(m, |s: ItemSet| if s.is_empty() { 0.0 } else { 1.0 }).unwrap()
    };
    let f2 = |m: usize| {
        ExplicitValuation::from_fn(m, |s: ItemSet| choose(s.card(), 2)).unwrap()
    };
    assert_eq!(mph_level(&f1(5), false).unwrap().level, 1);
    assert_eq!(mph_level(&f2(5), false).unwrap().level, 2);
    let flat2 = ExplicitValuation::from_fn(4, |s: ItemSet| {
        if s.is_empty() {
            0.0
        } else if s == ItemSet::full(4) {
            2.0
        } else {
            1.0
        }
    })
    .unwrap();
    assert_eq!(mph_level(&flat2, false).unwrap().level, 2);
    let (d1, _) = supermodular_degree(&f1(6)).unwrap();
    assert_eq!(d1, 0);
    let cap = ExplicitValuation::from_fn(6, |s: ItemSet| (s.card() as f64).min(3.0)).unwrap();
    let (d2, _) = supermodular_degree(&cap).unwrap();
    assert_eq!(d2, 0);
    for m in 3..=8 {
        let h = f1(m).to_hypergraph().unwrap();
        assert_eq!(h.rank(), m, "f1 hypergraph rank at m={m}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "{elapsed:?}");
    println!("criterion 6: PASS  identities exact, {elapsed:?}");
}

#[test]
fn criterion_07_poa_lower_bound() {
    let started = std::time::Instant::now();
    let (inst, strat) = poa_lb_instance(3, None).unwrap();
    let report = verify_mixed_ne(&inst, &strat, 1_000_000, 1e-2, 0x07).unwrap();
    assert!(report.closed_form_worst <= 1e-6, "closed form {:.2e}", report.closed_form_worst);
    assert!(
        report.plane_deviation_gain <= 1e-2,
        "plane deviation gain {}",
        report.plane_deviation_gain
    );
    assert!(
        report.aux_deviation_gain <= 1e-2 && report.aux_abstention_optimal,
        "aux deviation gain {}",
        report.aux_deviation_gain
    );
    let eq = report.equilibrium_welfare_mean;
    assert!(
        (eq - 3.0).abs() <= 3.0 * report.equilibrium_welfare_stderr + 1e-9,
        "equilibrium welfare {eq}"
    );
    let (opt, _) = optimal_welfare(&inst).unwrap();
    assert!((report.poa - opt / eq).abs() <= 1e-9, "poa {} vs {}", report.poa, opt / eq);
    assert!((report.poa - 7.0 / 3.0).abs() <= 1e-12);
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "{elapsed:?}");
    println!(
        "criterion 7: PASS  closed form {:.1e}, deviations ({:.1e}, {:.1e}), eq welfare {eq}, poa 7/3, {elapsed:?}",
        report.closed_form_worst, report.plane_deviation_gain, report.aux_deviation_gain
    );
}

#[test]
fn criterion_08_cce_welfare_bound() {
    let started = std::time::Instant::now();
    let mut r = rng(0x08);
    let mut above_2k = 0usize;
    let total = 20usize;
    for trial in 0..total {
        let k = 1 + trial % 2;
        let m = r.gen_range(3..=5);
        let n = r.gen_range(2..=3);
        let bidders: Vec<Valuation> = (0..n)
            .map(|b| {
                Valuation::Mph(
                    rand_mph(m, k, r.gen_range(1..=3), 0x0800 + (trial * 11 + b) as u64).unwrap(),
                )
            })
            .collect();
        let inst = AuctionInstance::new(m, bidders).unwrap();
        let actions = standard_action_sets(&inst, Some(0.05 * max_value(&inst))).unwrap();
        let config = LearnConfig {
            iterations: 100_000,
            seed: trial as u64,
            ..Default::default()
        };
        let cce = no_regret_learn(&inst, &actions, &config).unwrap();
        let metrics = cce_metrics(&inst, &cce).unwrap();
        let opt = metrics.opt;
        let hard = opt / (4.0 * k as f64) - 3.0 * metrics.sw_stderr;
        assert!(
            metrics.expected_sw >= hard,
            "trial {trial} (k={k}): sw {} below Opt/4k = {hard}",
            metrics.expected_sw
        );
        if metrics.expected_sw >= opt / (2.0 * k as f64) - 3.0 * metrics.sw_stderr {
            above_2k += 1;
        }
        for (i, regret) in cce.regret.iter().enumerate() {
            assert!(
                *regret <= 0.05 * opt,
                "trial {trial}: player {i} regret {regret} above 0.05 * {opt}"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(
        above_2k * 10 >= total * 9,
        "only {above_2k}/{total} instances reached Opt/2k"
    );
    assert!(elapsed.as_secs_f64() < 600.0, "{elapsed:?}");
    println!(
        "criterion 8: PASS  {total} instances, Opt/4k everywhere, Opt/2k in {above_2k}/{total}, {elapsed:?}"
    );
}

#[test]
fn criterion_09_smoothness_spot_check() {
    let started = std::time::Instant::now();
    let values = [1.0, 0.6, 0.3];
    let bidders: Vec<Valuation> = values
        .iter()
        .map(|&v| {
            Valuation::Explicit(
                ExplicitValuation::from_fn(1, move |s: ItemSet| {
                    if s.is_empty() {
                        0.0
                    } else {
                        v
                    }
                })
                .unwrap(),
            )
        })
        .collect();
    let inst = AuctionInstance::new(1, bidders).unwrap();
    let sampler = UniformBids { hi: 1.2 };
    let report = single_item_density_smoothness(&inst, 1.0, &sampler, 100_000, 0x09).unwrap();
    assert_eq!(
        report.per_profile_violations, 0,
        "{} profiles violated the inequality",
        report.per_profile_violations
    );
    assert!((report.lambda - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    assert!((report.mu - 1.0).abs() < 1e-12);
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "{elapsed:?}");
    println!(
        "criterion 9: PASS  100000 profiles, zero violations beyond 1e-9, margin {:.4}, {elapsed:?}",
        report.margin
    );
}

#[test]
fn criterion_10_definition_equivalence() {
    let started = std::time::Instant::now();
    let mut r = rng(0x0a);
    let mut checks = 0usize;
    for trial in 0..100 {
        let m = r.gen_range(2..=6);
        let f = random_monotone(m, &mut r);
        let level = mph_level(&f, false).unwrap().level;
        for k in 1..=m {
            let via_cover = kfrac_subadditive_check(&f, k).unwrap();
            let via_level = level <= k;
            assert_eq!(
                via_cover, via_level,
                "trial {trial} (m={m}, k={k}): cover {via_cover} vs level {level}"
            );
            checks += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "{elapsed:?}");
    println!("criterion 10: PASS  {checks} (f, k) pairs, zero disagreements, {elapsed:?}");
}

#[test]
fn criterion_11_markov_bound() {
    let started = std::time::Instant::now();
    let mut r = rng(0x0b);
    let mut worst_slack = usize::MAX;
    let mut beyond_conjecture = 0usize;
    for trial in 0..100 {
        let rank = 2 + trial % 3;
        let m = r.gen_range((3 * rank * rank).max(8)..=60);
        let mut h: Vec<f64> = (0..rank).map(|_| r.gen_range(-1.0..1.0)).collect();
        let worst_marginal = (0..m)
            .map(|t| (1..=rank).map(|i| h[i - 1] * choose(t, i - 1)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        if worst_marginal < 0.0 {
            h[0] += -worst_marginal + 1e-9;
        }
        let profile: Vec<f64> = (0..=m)
            .map(|t| (1..=rank).map(|i| h[i - 1] * choose(t, i)).sum())
            .collect();
        let f = SymmetricValuation::new(m, profile).unwrap();
        let level = symmetric_mph_level(&f).unwrap();
        let bound = 3 * rank * rank;
        assert!(level <= bound, "trial {trial} (m={m}, rank={rank}): level {level}");
        worst_slack = worst_slack.min(bound - level);
        // the conjectured exact bound is logged, never asserted
        if level > rank.div_ceil(2) * (rank + 1).div_ceil(2) {
            beyond_conjecture += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "{elapsed:?}");
    println!(
        "criterion 11: PASS  100 profiles within 3r^2 (tightest slack {worst_slack}; \
         {beyond_conjecture} exceeded the conjectured ceil(r/2)ceil((r+1)/2)), {elapsed:?}"
    );
}

// --- generators for criterion 5 --------------------------------------------

fn random_nonempty_subset(m: usize, rng: &mut ChaCha8Rng) -> ItemSet {
    loop {
        let mask = rng.gen_range(1..1u32 << m);
        if mask != 0 {
            return ItemSet(mask);
        }
    }
}

/// Random signed hypergraph with positive edges of rank <= 2 and negative
/// hyperedges of any rank, lifted to monotone by raising singleton weights.
fn random_positive_rank2_monotone(m: usize, rng: &mut ChaCha8Rng) -> ExplicitValuation {
    let mut edges: Vec<(ItemSet, f64)> = Vec::new();
    for j in 0..m {
        edges.push((ItemSet::singleton(j), rng.gen_range(0.0..1.0)));
    }
    for _ in 0..rng.gen_range(1..=m) {
        let a = rng.gen_range(0..m);
        let b = rng.gen_range(0..m);
        if a != b {
            edges.push((ItemSet::from_indices(&[a, b]), rng.gen_range(0.1..1.0)));
        }
    }
    for _ in 0..rng.gen_range(0..=m / 2 + 1) {
        let mask = rng.gen_range(1..1u32 << m);
        let s = ItemSet(mask);
        if s.card() >= 2 {
            edges.push((s, -rng.gen_range(0.1..0.8)));
        }
    }
    lift_to_monotone(m, edges)
}

fn lift_to_monotone(m: usize, mut edges: Vec<(ItemSet, f64)>) -> ExplicitValuation {
    let f = Hypergraph::new(m, edges.clone()).unwrap().to_explicit().unwrap();
    let mut worst = 0.0f64;
    for s in ItemSet::full(m).subsets() {
        for j in 0..m {
            if !s.contains(j) {
                worst = worst.min(f.marginal(ItemSet::singleton(j), s));
            }
        }
    }
    if worst < 0.0 {
        for j in 0..m {
            edges.push((ItemSet::singleton(j), -worst + 1e-9));
        }
    }
    Hypergraph::new(m, edges).unwrap().to_explicit().unwrap()
}

/// Positive edges of random rank, negative hyperedges drawn as a laminar
/// family, lifted to monotone by raising singleton weights.
fn random_laminar_nonnegative(m: usize, rng: &mut ChaCha8Rng) -> ExplicitValuation {
    let mut edges: Vec<(ItemSet, f64)> = Vec::new();
    for j in 0..m {
        edges.push((ItemSet::singleton(j), rng.gen_range(0.0..1.0)));
    }
    let rank = rng.gen_range(2..=3.min(m));
    for _ in 0..rng.gen_range(1..=m) {
        let mask = rng.gen_range(1..1u32 << m);
        let s = ItemSet(mask);
        if s.card() >= 2 && s.card() <= rank {
            edges.push((s, rng.gen_range(0.1..1.0)));
        }
    }
    // laminar negatives: a chain of nested sets, possibly one disjoint set
    let full = ItemSet::full(m);
    let mut outer = full;
    let mut chain = Vec::new();
    while outer.card() >= 2 && chain.len() < 3 {
        chain.push(outer);
        let drop = rng.gen_range(0..m);
        outer = outer.remove(drop);
    }
    for s in chain {
        if rng.gen_bool(0.7) {
            edges.push((s, -rng.gen_range(0.05..0.4)));
        }
    }
    lift_to_monotone(m, edges)
}

fn random_positive_rank1_nonnegative(m: usize, rng: &mut ChaCha8Rng) -> ExplicitValuation {
    let mut edges: Vec<(ItemSet, f64)> = Vec::new();
    for j in 0..m {
        edges.push((ItemSet::singleton(j), rng.gen_range(0.2..1.2)));
    }
    for _ in 0..rng.gen_range(0..=m) {
        let mask = rng.gen_range(1..1u32 << m);
        let s = ItemSet(mask);
        if s.card() >= 2 {
            edges.push((s, -rng.gen_range(0.05..0.3)));
        }
    }
    lift_to_monotone(m, edges)
}

fn max_value(inst: &AuctionInstance) -> f64 {
    inst.bidders
        .iter()
        .map(|b| b.eval(ItemSet::full(inst.m)).unwrap())
        .fold(0.0, f64::max)
}
