//! Command-line surface: classify valuations, build envelopes, solve and
//! round welfare LPs, run auctions with no-regret learning, generate catalog
//! instances, and re-verify their recorded expectations.
//!
//! Exit codes: 0 success, 2 invalid input, 3 capacity, 4 verification
//! failure.

use clap::{Args, Parser, Subcommand};
use mphk::auction::{
    no_regret_learn, poa_lb_instance, standard_action_sets, verify_mixed_ne, LearnConfig,
    PaymentRule,
};
use mphk::error::Error;
use mphk::instances::{gen, verify_expectations, Built, GenParams, CATALOG};
use mphk::items::ItemSet;
use mphk::ple::{
    canonical_symmetric_ple, mph_level, mph_level_sampled, ple1_matching, ple2_flow, ple_laminar,
    ple_level, ple_max_lp_certified, ple_witness_from_lp, supermodular_ple, symmetric_mph_level,
    symmetric_worstcase_lp, PleWitness,
};
use mphk::setfn::{check_properties, supermodular_degree};
use mphk::valuation::Valuation;
use mphk::welfare::{
    certify_gap_rational, estimate_rounded_welfare, optimal_welfare, round_permutation,
    solve_config_lp, AuctionInstance, LpMode,
};
use serde_json::{json, Value as Json};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "mphk", about = "set-function hierarchy toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ranks, properties, supermodular degree and hierarchy level of a valuation
    Classify(ClassifyArgs),
    /// Build or certify a positive lower envelope
    Ple(PleArgs),
    /// Exact optimum, configuration LP, rounding and gap of an instance
    Welfare(WelfareArgs),
    /// Simultaneous single-item auction: learning or equilibrium verification
    Auction(AuctionArgs),
    /// Emit a catalog valuation or instance as JSON
    Gen(GenArgs),
    /// Re-check the recorded expectations of catalog entries
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// valuation JSON file
    #[arg(long)]
    input: PathBuf,
    /// collect per-restriction envelope witnesses
    #[arg(long)]
    witnesses: bool,
    /// sampled classification with this many random restrictions (lower bound)
    #[arg(long)]
    sampled: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PleArgs {
    /// valuation JSON file
    #[arg(long, required_unless_present = "worstcase_m")]
    input: Option<PathBuf>,
    /// target set, e.g. 0,1,2 (defaults to the full ground set)
    #[arg(long)]
    set: Option<String>,
    /// rank bound
    #[arg(long)]
    k: usize,
    /// lp | flow | laminar | matching | supermodular | canonical
    #[arg(long, default_value = "lp")]
    method: String,
    /// settle borderline LP optima with an exact rational re-solve
    #[arg(long)]
    certify: bool,
    /// solve the symmetric worst-case LP for this ground-set size (rank --k)
    #[arg(long = "worstcase-m")]
    worstcase_m: Option<usize>,
}

#[derive(Args)]
struct WelfareArgs {
    /// instance JSON file (or --gen NAME)
    #[arg(long, required_unless_present = "gen_name")]
    input: Option<PathBuf>,
    /// build a catalog instance instead of reading a file
    #[arg(long = "gen")]
    gen_name: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// skip the exact optimum
    #[arg(long)]
    no_exact: bool,
    /// auto | explicit | colgen
    #[arg(long, default_value = "auto")]
    lp: String,
    /// rounding trials (0 = skip)
    #[arg(long, default_value_t = 0)]
    round: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// exact rational certification of projective-plane gap values
    #[arg(long)]
    certify_gap: bool,
}

#[derive(Args)]
struct AuctionArgs {
    #[arg(long, required_unless_present = "gen_name")]
    input: Option<PathBuf>,
    #[arg(long = "gen")]
    gen_name: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    planes: Option<usize>,
    /// learning iterations
    #[arg(long)]
    learn: Option<usize>,
    /// bid grid step for the standard action sets
    #[arg(long)]
    grid: Option<f64>,
    /// first | second
    #[arg(long, default_value = "first")]
    rule: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// write a per-iteration CSV trace here
    #[arg(long)]
    trace: Option<PathBuf>,
    /// verify the analytic mixed equilibrium (requires --gen poa_lb)
    #[arg(long)]
    verify_ne: bool,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
}

#[derive(Args)]
struct GenArgs {
    /// catalog entry name
    #[arg(long)]
    name: String,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    clauses: Option<usize>,
    #[arg(long)]
    planes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    w_pair: Option<f64>,
    #[arg(long)]
    w_single: Option<f64>,
    #[arg(long)]
    penalty: Option<f64>,
    /// output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// list the catalog and exit
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// entry to verify; use --all for the default sweep
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    all: bool,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Classify(args) => classify(args),
        Command::Ple(args) => ple(args),
        Command::Welfare(args) => welfare(args),
        Command::Auction(args) => auction(args),
        Command::Gen(args) => generate(args),
        Command::Verify(args) => verify(args),
    };
    match outcome {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::invalid(format!("malformed JSON: {e}")))
}

fn parse_set(text: &str) -> Result<ItemSet, Error> {
    let mut items = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let j: usize = part
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad item index '{part}'")))?;
        if j >= mphk::items::MAX_ITEMS {
            return Err(Error::invalid(format!("item index {j} out of range")));
        }
        items.push(j);
    }
    Ok(ItemSet::from_indices(&items))
}

fn emit(report: &Json) {
    println!("{}", serde_json::to_string_pretty(report).expect("serializable report"));
}

fn classify(args: ClassifyArgs) -> Result<(), Error> {
    let v: Valuation = read_json(&args.input)?;
    let m = v.m();
    let mut report = json!({ "m": m });
    let obj = report.as_object_mut().unwrap();

    if let Valuation::Symmetric(sym) = &v {
        if sym.is_monotone() && sym.is_normalized() {
            obj.insert("symmetric_mph_level".into(), json!(symmetric_mph_level(sym)?));
        }
    }
    // sparse inputs carry their ranks directly, at any ground-set size
    if let Valuation::Hypergraph(h) = &v {
        let (rank, pos, neg) = h.ranks();
        obj.insert("ranks".into(), json!({ "rank": rank, "positive": pos, "negative": neg }));
    }

    let explicit = if m <= 16 { v.to_explicit().ok() } else { None };
    if let Some(f) = &explicit {
        if f.is_normalized() && !obj.contains_key("ranks") {
            let h = f.to_hypergraph()?;
            let (rank, pos, neg) = h.ranks();
            obj.insert(
                "ranks".into(),
                json!({ "rank": rank, "positive": pos, "negative": neg }),
            );
        }
        if m <= mphk::setfn::MAX_PROPERTY_ITEMS {
            let props = check_properties(f)?;
            obj.insert("normalized".into(), json!(props.normalized));
            obj.insert("monotone".into(), json!(props.monotone));
            obj.insert("nonnegative".into(), json!(props.nonnegative));
            obj.insert("submodular".into(), json!(props.submodular));
            obj.insert("subadditive".into(), json!(props.subadditive));
            obj.insert("symmetric".into(), json!(props.symmetric));
        }
        if m <= mphk::setfn::MAX_DEGREE_ITEMS {
            let (degree, _) = supermodular_degree(f)?;
            obj.insert("supermodular_degree".into(), json!(degree));
        }
        if let Some(samples) = args.sampled {
            let lvl = mph_level_sampled(f, samples, args.seed)?;
            obj.insert("mph_level_lower_bound".into(), json!(lvl.level));
        } else if m <= 10 {
            match mph_level(f, args.witnesses) {
                Ok(lvl) => {
                    obj.insert("mph_level".into(), json!(lvl.level));
                    if let Some(ws) = lvl.per_restriction_witnesses {
                        let ws: Vec<&PleWitness> = ws.values().collect();
                        obj.insert("witnesses".into(), serde_json::to_value(ws).unwrap());
                    }
                }
                Err(Error::NotMonotone { .. }) => {
                    let lvl = ple_level(f, false)?;
                    obj.insert("monotone".into(), json!(false));
                    obj.insert("ple_level".into(), json!(lvl.level));
                }
                Err(e) => return Err(e),
            }
        }
    }
    emit(&report);
    Ok(())
}

fn ple(args: PleArgs) -> Result<(), Error> {
    if let Some(m) = args.worstcase_m {
        let cert = symmetric_worstcase_lp(m, args.k)?;
        emit(&serde_json::to_value(&cert).unwrap());
        return Ok(());
    }
    let input = args.input.as_ref().expect("clap enforces input");
    let v: Valuation = read_json(input)?;
    let target = match &args.set {
        Some(text) => parse_set(text)?,
        None => ItemSet::full(v.m()),
    };
    if args.method == "canonical" {
        let Valuation::Symmetric(sym) = &v else {
            return Err(Error::invalid("canonical envelopes need a symmetric valuation"));
        };
        let w = canonical_symmetric_ple(sym, args.k)?;
        emit(&serde_json::to_value(&w).unwrap());
        return Ok(());
    }
    let f = v.to_explicit()?;
    let witness = match args.method.as_str() {
        "lp" => {
            if args.certify {
                let cert = ple_max_lp_certified(&f, target, args.k)?;
                emit(&json!({
                    "exists": cert.exists,
                    "optimum": cert.optimum,
                    "exact": cert.exact,
                    "target_value": f.value(target),
                }));
                return Ok(());
            }
            ple_witness_from_lp(&f, target, args.k)?
        }
        "flow" => ple2_flow(&f, target)?,
        "laminar" => ple_laminar(&f, target)?,
        "matching" => ple1_matching(&f, target)?,
        "supermodular" => {
            let ordering: Vec<usize> = (0..f.m()).collect();
            supermodular_ple(&f, &ordering, target)?
        }
        other => return Err(Error::invalid(format!("unknown method '{other}'"))),
    };
    emit(&serde_json::to_value(&witness).unwrap());
    Ok(())
}

fn load_instance(
    input: &Option<PathBuf>,
    gen_name: &Option<String>,
    k: Option<usize>,
    planes: Option<usize>,
) -> Result<AuctionInstance, Error> {
    match (input, gen_name) {
        (Some(path), None) => read_json(path),
        (None, Some(name)) => {
            let params = GenParams { k, planes, ..Default::default() };
            match gen(name, &params)? {
                Built::Instance(inst) => Ok(inst),
                Built::Valuation(_) => {
                    Err(Error::invalid(format!("catalog entry '{name}' is not an instance")))
                }
            }
        }
        _ => Err(Error::invalid("pass exactly one of --input and --gen")),
    }
}

fn welfare(args: WelfareArgs) -> Result<(), Error> {
    let inst = load_instance(&args.input, &args.gen_name, args.k, None)?;
    let mut report = json!({ "m": inst.m, "n": inst.n() });
    let obj = report.as_object_mut().unwrap();

    let opt = if args.no_exact {
        None
    } else {
        let (opt, alloc) = optimal_welfare(&inst)?;
        obj.insert("opt".into(), json!(opt));
        obj.insert("allocation".into(), serde_json::to_value(&alloc.assignment).unwrap());
        Some(opt)
    };
    let mode = match args.lp.as_str() {
        "auto" => LpMode::Auto,
        "explicit" => LpMode::Explicit,
        "colgen" => LpMode::ColumnGeneration,
        other => return Err(Error::invalid(format!("unknown LP mode '{other}'"))),
    };
    let sol = solve_config_lp(&inst, mode)?;
    obj.insert("lp_value".into(), json!(sol.objective));
    if let Some(opt) = opt {
        if opt > 0.0 {
            obj.insert("gap".into(), json!(sol.objective / opt));
        }
    }
    if args.round > 0 {
        let stats = estimate_rounded_welfare(&sol, &inst, args.round, args.seed, args.threads)?;
        obj.insert("rounding".into(), serde_json::to_value(&stats).unwrap());
        obj.insert("rounding_csv".into(), json!(stats.csv_line()));
        let sample = round_permutation(&sol, &inst, args.seed)?;
        obj.insert("sample_rounding".into(), serde_json::to_value(&sample.assignment).unwrap());
    }
    if args.certify_gap {
        let k = args
            .k
            .or(inst.metadata.k)
            .ok_or_else(|| Error::invalid("--certify-gap needs k"))?;
        let gap = certify_gap_rational(k)?;
        obj.insert("certified_gap".into(), json!(gap.to_string()));
    }
    emit(&report);
    Ok(())
}

fn auction(args: AuctionArgs) -> Result<(), Error> {
    let rule: PaymentRule = args.rule.parse()?;
    if args.verify_ne {
        let name = args.gen_name.as_deref().unwrap_or("");
        if name != "poa_lb" {
            return Err(Error::invalid("--verify-ne requires --gen poa_lb"));
        }
        let k = args.k.ok_or_else(|| Error::invalid("--verify-ne needs --k"))?;
        let (inst, strat) = poa_lb_instance(k, args.planes)?;
        let report = verify_mixed_ne(&inst, &strat, args.samples, args.tol, args.seed)?;
        let pass = report.closed_form_worst <= 1e-6
            && report.plane_deviation_gain <= args.tol
            && report.aux_abstention_optimal;
        emit(&serde_json::to_value(&report).unwrap());
        if !pass {
            return Err(Error::Verification("equilibrium checks exceeded tolerance".into()));
        }
        return Ok(());
    }
    let inst = load_instance(&args.input, &args.gen_name, args.k, args.planes)?;
    let iterations = args
        .learn
        .ok_or_else(|| Error::invalid("pass --learn T (or --verify-ne)"))?;
    let actions = standard_action_sets(&inst, args.grid)?;
    let config = LearnConfig {
        iterations,
        seed: args.seed,
        rule,
        eta: None,
        trace: args.trace.is_some(),
    };
    let cce = no_regret_learn(&inst, &actions, &config)?;
    let metrics = mphk::auction::cce_metrics(&inst, &cce)?;
    if let Some(path) = &args.trace {
        let mut rows = String::from("iteration,welfare");
        let n = inst.n();
        for i in 0..n {
            rows.push_str(&format!(",utility_{i}"));
        }
        for i in 0..n {
            rows.push_str(&format!(",regret_{i}"));
        }
        rows.push('\n');
        for row in cce.trace.as_deref().unwrap_or(&[]) {
            rows.push_str(&format!("{},{}", row.iteration, row.welfare));
            for u in &row.utilities {
                rows.push_str(&format!(",{u}"));
            }
            for r in &row.regrets {
                rows.push_str(&format!(",{r}"));
            }
            rows.push('\n');
        }
        std::fs::write(path, rows)
            .map_err(|e| Error::invalid(format!("cannot write trace: {e}")))?;
    }
    let k = inst.metadata.k;
    let mut report = json!({
        "iterations": cce.iterations,
        "rule": args.rule,
        "metrics": serde_json::to_value(&metrics).unwrap(),
        "regret": cce.regret,
    });
    if let Some(k) = k {
        report.as_object_mut().unwrap().insert("bound_2k".into(), json!(2 * k));
        report.as_object_mut().unwrap().insert("bound_4k".into(), json!(4 * k));
    }
    emit(&report);
    Ok(())
}

fn generate(args: GenArgs) -> Result<(), Error> {
    if args.list {
        for name in CATALOG {
            println!("{name}");
        }
        return Ok(());
    }
    let params = GenParams {
        m: args.m,
        k: args.k,
        clauses: args.clauses,
        seed: args.seed,
        planes: args.planes,
        w_pair: args.w_pair,
        w_single: args.w_single,
        penalty: args.penalty,
    };
    let text = match gen(&args.name, &params)? {
        Built::Valuation(v) => serde_json::to_string_pretty(&v).unwrap(),
        Built::Instance(inst) => serde_json::to_string_pretty(&inst).unwrap(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::invalid(format!("cannot write output: {e}")))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Error> {
    let entries: Vec<(String, GenParams)> = if args.all {
        vec![
            ("f1".into(), GenParams { m: Some(5), ..Default::default() }),
            ("cap".into(), GenParams { m: Some(6), ..Default::default() }),
            ("f2".into(), GenParams { m: Some(8), ..Default::default() }),
            ("sym3tight".into(), GenParams::default()),
            ("sym4tight".into(), GenParams::default()),
            ("flat2".into(), GenParams { m: Some(4), ..Default::default() }),
            ("fk_nonneg".into(), GenParams { k: Some(2), m: Some(5), ..Default::default() }),
            ("spectrum".into(), GenParams::default()),
            ("pp_singleminded".into(), GenParams { k: Some(3), ..Default::default() }),
            ("rand_mono_hg".into(), GenParams { m: Some(6), k: Some(2), seed: args.seed, ..Default::default() }),
        ]
    } else {
        let name = args.name.ok_or_else(|| Error::invalid("pass --name or --all"))?;
        vec![(
            name,
            GenParams { m: args.m, k: args.k, seed: args.seed, ..Default::default() },
        )]
    };
    let mut failures = 0;
    for (name, params) in entries {
        for exp in verify_expectations(&name, &params)? {
            let status = if exp.pass { "pass" } else { "FAIL" };
            println!("{status}  {name}.{}: expected {}, got {}", exp.name, exp.expected, exp.actual);
            if !exp.pass {
                failures += 1;
            }
        }
    }
    if failures > 0 {
        return Err(Error::Verification(format!("{failures} expectation(s) failed")));
    }
    Ok(())
}
