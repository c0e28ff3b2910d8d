//! The configuration LP: one variable per (bidder, bundle), bidder mass and
//! item coverage each capped at one. The explicit mode materializes every
//! bundle; column generation prices entering columns with demand queries and
//! scales to ground sets where 2^m columns per bidder are too many.

use super::{AuctionInstance, FractionalEntry, FractionalSolution};
use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::setfn::demand_query;
use crate::simplex::{LpProblem, LpStatus, Rel};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpMode {
    Explicit,
    ColumnGeneration,
    /// Explicit when n * 2^m stays small, column generation otherwise.
    Auto,
}

const EXPLICIT_VAR_BUDGET: usize = 200_000;
const COLGEN_ROUNDS: usize = 400;
const REDUCED_COST_TOL: f64 = 1e-9;

/// Hard cap for materializing every column; auto mode hands off to column
/// generation well before this.
const EXPLICIT_VAR_LIMIT: usize = 1_000_000;

pub fn solve_config_lp(inst: &AuctionInstance, mode: LpMode) -> Result<FractionalSolution> {
    let explicit_vars = inst.n().saturating_mul(1usize << inst.m.min(62));
    match mode {
        LpMode::Explicit => {
            if explicit_vars > EXPLICIT_VAR_LIMIT {
                return Err(Error::capacity(format!(
                    "explicit mode needs n * 2^m <= {EXPLICIT_VAR_LIMIT}, got {explicit_vars}"
                )));
            }
            explicit(inst)
        }
        LpMode::ColumnGeneration => column_generation(inst),
        LpMode::Auto => {
            if explicit_vars <= EXPLICIT_VAR_BUDGET {
                explicit(inst)
            } else {
                column_generation(inst)
            }
        }
    }
}

fn solve_restricted(
    inst: &AuctionInstance,
    columns: &[(usize, ItemSet)],
    values: &[f64],
) -> Result<(FractionalSolution, Vec<f64>, Vec<f64>)> {
    let n = inst.n();
    let m = inst.m;
    let mut lp = LpProblem::new(columns.len(), values.to_vec());
    for bidder in 0..n {
        let coeffs: Vec<(usize, f64)> = columns
            .iter()
            .enumerate()
            .filter(|(_, (i, _))| *i == bidder)
            .map(|(j, _)| (j, 1.0))
            .collect();
        lp.add_constraint(coeffs, Rel::Le, 1.0);
    }
    for item in 0..m {
        let coeffs: Vec<(usize, f64)> = columns
            .iter()
            .enumerate()
            .filter(|(_, (_, s))| s.contains(item))
            .map(|(j, _)| (j, 1.0))
            .collect();
        lp.add_constraint(coeffs, Rel::Le, 1.0);
    }
    let sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!(
            "configuration LP ended {:?} after {} pivots",
            sol.status, sol.pivots
        )));
    }
    let entries: Vec<FractionalEntry> = columns
        .iter()
        .zip(&sol.x)
        .filter(|(_, &x)| x > 1e-12)
        .map(|(&(i, set), &x)| FractionalEntry { i, set, x })
        .collect();
    let solution = FractionalSolution { entries, objective: sol.value };
    let bidder_duals = sol.duals[..n].to_vec();
    let item_duals = sol.duals[n..].to_vec();
    Ok((solution, bidder_duals, item_duals))
}

fn explicit(inst: &AuctionInstance) -> Result<FractionalSolution> {
    let tables = inst.value_tables()?;
    let mut columns = Vec::new();
    let mut values = Vec::new();
    for (i, table) in tables.iter().enumerate() {
        for mask in 1..(1usize << inst.m) {
            columns.push((i, ItemSet(mask as u32)));
            values.push(table[mask]);
        }
    }
    let (solution, _, _) = solve_restricted(inst, &columns, &values)?;
    solution.check_feasible(inst)?;
    Ok(solution)
}

/// Restricted master over singleton columns, grown by demand-query pricing:
/// bidder i enters the bundle maximizing v_i(S) - sum of item duals whenever
/// that utility beats the bidder's own dual.
fn column_generation(inst: &AuctionInstance) -> Result<FractionalSolution> {
    let n = inst.n();
    let m = inst.m;
    let mut columns: Vec<(usize, ItemSet)> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut seen: BTreeSet<(usize, ItemSet)> = BTreeSet::new();
    for i in 0..n {
        for j in 0..m {
            let set = ItemSet::singleton(j);
            columns.push((i, set));
            values.push(inst.bidders[i].eval(set)?);
            seen.insert((i, set));
        }
        // the empty column keeps the bidder row present from the start
        columns.push((i, ItemSet::EMPTY));
        values.push(0.0);
        seen.insert((i, ItemSet::EMPTY));
    }

    let mut last = None;
    for _ in 0..COLGEN_ROUNDS {
        let (solution, bidder_duals, item_duals) = solve_restricted(inst, &columns, &values)?;
        let mut improved = false;
        for i in 0..n {
            let demanded = demand_query(&inst.bidders[i], &item_duals)?;
            let utility = inst.bidders[i].eval(demanded)?
                - demanded.iter().map(|j| item_duals[j]).sum::<f64>();
            if utility > bidder_duals[i] + REDUCED_COST_TOL && seen.insert((i, demanded)) {
                columns.push((i, demanded));
                values.push(inst.bidders[i].eval(demanded)?);
                improved = true;
            }
        }
        last = Some(solution);
        if !improved {
            break;
        }
    }
    let solution = last.expect("at least one master solve");
    solution.check_feasible(inst)?;
    Ok(solution)
}
