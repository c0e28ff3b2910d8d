//! The LP ground truth: the heaviest rank-k nonnegative hypergraph dominated
//! by f on all subsets of S. A rank-k envelope for the restriction exists
//! exactly when the optimum reaches f(S). The primal cover LP (fractional
//! covers by small subsets) is kept as an independent route for the same
//! question.

use super::{PleWitness, PLE_TOL};
use crate::error::{Error, Result};
use crate::items::{subsets_of_size, ItemSet};
use crate::simplex::{LpProblem, LpStatus, Rel, Scalar};
use crate::valuation::{ExplicitValuation, Hypergraph, WEIGHT_DROP};
use num::rational::BigRational;

/// Per-restriction LPs enumerate all subsets of S; keep |S| within budget.
pub const MAX_LP_ITEMS: usize = 12;

/// When the float optimum lands this close to f(S) without clearing the
/// existence tolerance, the exact rational re-solve settles the call.
pub const CERT_BAND: f64 = 1e-5;

fn check_lp_inputs(f: &ExplicitValuation, s: ItemSet, k: usize) -> Result<()> {
    if !s.valid_for(f.m()) {
        return Err(Error::invalid(format!("restriction {s} outside ground set")));
    }
    if s.card() > MAX_LP_ITEMS {
        return Err(Error::capacity(format!(
            "|S| = {} exceeds the LP budget of {MAX_LP_ITEMS}",
            s.card()
        )));
    }
    if k == 0 {
        return Err(Error::invalid("rank bound k must be at least 1"));
    }
    for t in s.subsets() {
        if f.value(t) < 0.0 {
            return Err(Error::NotNonnegative { witness: t, value: f.value(t) });
        }
    }
    Ok(())
}

fn envelope_lp<T: Scalar>(f: &ExplicitValuation, s: ItemSet, vars: &[ItemSet]) -> LpProblem<T> {
    let mut lp = LpProblem::new(vars.len(), vec![T::one(); vars.len()]);
    for t in s.subsets() {
        if t.is_empty() {
            continue;
        }
        let coeffs: Vec<(usize, T)> = vars
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_subset_of(t))
            .map(|(j, _)| (j, T::one()))
            .collect();
        lp.add_constraint(coeffs, Rel::Le, T::from_f64(f.value(t)));
    }
    lp
}

/// Maximize the total weight of a nonnegative rank-k hypergraph on S that
/// never overestimates f on subsets of S. Returns the optimum and the
/// maximizing hypergraph; the optimum equals f(S) within [`PLE_TOL`] exactly
/// when the restriction admits a rank-k envelope.
pub fn ple_max_lp(f: &ExplicitValuation, s: ItemSet, k: usize) -> Result<(f64, Hypergraph)> {
    check_lp_inputs(f, s, k)?;
    let vars = subsets_of_size(s, 1, k.min(s.card().max(1)));
    if vars.is_empty() {
        return Ok((0.0, Hypergraph::empty(f.m())));
    }
    let sol = envelope_lp::<f64>(f, s, &vars).solve();
    match sol.status {
        LpStatus::Optimal => {}
        status => {
            return Err(Error::Solver(format!(
                "envelope LP on {s} (k={k}, {} vars) ended {:?} after {} pivots",
                vars.len(),
                status,
                sol.pivots
            )))
        }
    }
    let edges = vars
        .iter()
        .zip(&sol.x)
        .filter(|(_, w)| **w >= WEIGHT_DROP)
        .map(|(&e, &w)| (e, w));
    Ok((sol.value, Hypergraph::new(f.m(), edges)?))
}

/// Existence decision at rank k for the restriction to S, based on the LP.
pub fn ple_exists(f: &ExplicitValuation, s: ItemSet, k: usize) -> Result<bool> {
    let (opt, _) = ple_max_lp(f, s, k)?;
    Ok(opt >= f.value(s) - PLE_TOL)
}

/// Build a witness from the LP maximizer; `valid` records the existence call.
pub fn ple_witness_from_lp(f: &ExplicitValuation, s: ItemSet, k: usize) -> Result<PleWitness> {
    let (opt, envelope) = ple_max_lp(f, s, k)?;
    Ok(PleWitness { envelope, target_set: s, k, valid: opt >= f.value(s) - PLE_TOL })
}

#[derive(Debug, Clone)]
pub struct PleCertificate {
    pub exists: bool,
    pub optimum: f64,
    /// Whether the call was settled by the exact rational re-solve.
    pub exact: bool,
}

/// Float solve, with an exact rational re-solve when the optimum lands inside
/// the ambiguity band around f(S).
pub fn ple_max_lp_certified(f: &ExplicitValuation, s: ItemSet, k: usize) -> Result<PleCertificate> {
    let (opt, _) = ple_max_lp(f, s, k)?;
    let target = f.value(s);
    if (opt - target).abs() > CERT_BAND {
        return Ok(PleCertificate { exists: opt >= target - PLE_TOL, optimum: opt, exact: false });
    }
    let vars = subsets_of_size(s, 1, k.min(s.card().max(1)));
    let sol = envelope_lp::<BigRational>(f, s, &vars).solve();
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!("exact envelope LP ended {:?}", sol.status)));
    }
    let exact_target = <BigRational as Scalar>::from_f64(target);
    Ok(PleCertificate {
        exists: sol.value == exact_target,
        optimum: Scalar::to_f64(&sol.value),
        exact: true,
    })
}

/// The fractional-cover route: V(S) = min sum a_T f(T) over fractional covers
/// of all size-<=k subsets of S. f is k-fractionally subadditive when
/// V(S) >= f(S) for every S; for monotone f this matches the envelope route.
pub fn kfrac_subadditive_check(f: &ExplicitValuation, k: usize) -> Result<bool> {
    let m = f.m();
    if m > 10 {
        return Err(Error::capacity(format!(
            "k-fractional check solves a cover LP per subset; m = {m} exceeds 10"
        )));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    for s in ItemSet::full(m).subsets() {
        if s.is_empty() {
            continue;
        }
        if cover_lp_value(f, s, k)? < f.value(s) - PLE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// V(S): cheapest fractional cover of the size-<=k subsets of S, where set T
/// costs f(T).
pub fn cover_lp_value(f: &ExplicitValuation, s: ItemSet, k: usize) -> Result<f64> {
    let covers: Vec<ItemSet> = s.subsets().filter(|t| !t.is_empty()).collect();
    let small = subsets_of_size(s, 1, k.min(s.card()));
    // minimize sum a_T f(T)  ==  maximize -sum
    let objective: Vec<f64> = covers.iter().map(|t| -f.value(*t)).collect();
    let mut lp = LpProblem::new(covers.len(), objective);
    for small_set in &small {
        let coeffs: Vec<(usize, f64)> = covers
            .iter()
            .enumerate()
            .filter(|(_, t)| small_set.is_subset_of(**t))
            .map(|(j, _)| (j, 1.0))
            .collect();
        lp.add_constraint(coeffs, Rel::Ge, 1.0);
    }
    let sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!("cover LP on {s} ended {:?}", sol.status)));
    }
    Ok(-sol.value)
}
