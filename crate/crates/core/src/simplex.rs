//! Dense two-phase primal simplex, generic over the scalar so the same code
//! runs in f64 (tolerance 1e-9) and in exact rationals for certification.
//!
//! Pricing is Dantzig with a switch to Bland's rule after a run of degenerate
//! pivots; the exact path uses Bland throughout, which guarantees termination.

use num::rational::BigRational;
use num::{FromPrimitive, ToPrimitive, Zero};
use std::fmt::Debug;

pub trait Scalar: Clone + PartialOrd + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Feasibility / pivot tolerance; zero for exact arithmetic.
    fn eps() -> Self;
    /// Whether Bland's rule must be used from the start (exact arithmetic).
    fn always_bland() -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn eps() -> Self {
        1e-9
    }
    fn always_bland() -> bool {
        false
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        num::zero()
    }
    fn one() -> Self {
        num::one()
    }
    fn from_f64(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).expect("finite value")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn eps() -> Self {
        num::zero()
    }
    fn always_bland() -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub coeffs: Vec<(usize, T)>,
    pub rel: Rel,
    pub rhs: T,
}

/// Maximize c.x subject to constraints, with x >= 0.
#[derive(Debug, Clone)]
pub struct LpProblem<T> {
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot budget exhausted without convergence.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub value: T,
    pub x: Vec<T>,
    /// One dual multiplier per original constraint (shadow price of its rhs,
    /// for the maximization orientation).
    pub duals: Vec<T>,
    pub pivots: usize,
}

impl<T: Scalar> LpProblem<T> {
    pub fn new(num_vars: usize, objective: Vec<T>) -> Self {
        assert_eq!(num_vars, objective.len());
        LpProblem { num_vars, objective, constraints: Vec::new() }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, T)>, rel: Rel, rhs: T) {
        debug_assert!(coeffs.iter().all(|(j, _)| *j < self.num_vars));
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> LpSolution<T> {
        Tableau::build(self).solve()
    }
}

const DEGENERATE_SWITCH: usize = 40;
const MAX_PIVOT_FACTOR: usize = 200;

enum Step {
    Optimal,
    Unbounded,
    Stalled,
}

struct Tableau<T> {
    rows: usize,
    cols: usize,
    a: Vec<T>,
    rhs: Vec<T>,
    obj: Vec<T>,
    obj_val: T,
    basis: Vec<usize>,
    num_vars: usize,
    costs: Vec<T>,
    artificial_from: usize,
    row_dual_col: Vec<usize>,
    row_dual_negate: Vec<bool>,
    row_flipped: Vec<bool>,
    degenerate: usize,
    pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(p: &LpProblem<T>) -> Tableau<T> {
        let m = p.constraints.len();
        let n = p.num_vars;
        let mut rels = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        for c in &p.constraints {
            let flip = c.rhs < T::zero();
            let rel = match (c.rel, flip) {
                (Rel::Le, false) | (Rel::Ge, true) => Rel::Le,
                (Rel::Ge, false) | (Rel::Le, true) => Rel::Ge,
                (Rel::Eq, _) => Rel::Eq,
            };
            rels.push(rel);
            flipped.push(flip);
        }
        let n_slack = rels.iter().filter(|r| matches!(r, Rel::Le | Rel::Ge)).count();
        let n_art = rels.iter().filter(|r| matches!(r, Rel::Ge | Rel::Eq)).count();
        let cols = n + n_slack + n_art;
        let artificial_from = n + n_slack;

        let mut a = vec![T::zero(); m * cols];
        let mut rhs = vec![T::zero(); m];
        let mut basis = vec![0usize; m];
        let mut row_dual_col = vec![0usize; m];
        let mut row_dual_negate = vec![false; m];
        let mut slack_at = n;
        let mut art_at = artificial_from;

        for (i, c) in p.constraints.iter().enumerate() {
            let flip = flipped[i];
            for (j, v) in &c.coeffs {
                let v = if flip { v.neg() } else { v.clone() };
                a[i * cols + j] = a[i * cols + j].add(&v);
            }
            rhs[i] = if flip { c.rhs.neg() } else { c.rhs.clone() };
            match rels[i] {
                Rel::Le => {
                    a[i * cols + slack_at] = T::one();
                    basis[i] = slack_at;
                    row_dual_col[i] = slack_at;
                    row_dual_negate[i] = true;
                    slack_at += 1;
                }
                Rel::Ge => {
                    a[i * cols + slack_at] = T::one().neg();
                    row_dual_col[i] = slack_at;
                    row_dual_negate[i] = false;
                    slack_at += 1;
                    a[i * cols + art_at] = T::one();
                    basis[i] = art_at;
                    art_at += 1;
                }
                Rel::Eq => {
                    a[i * cols + art_at] = T::one();
                    basis[i] = art_at;
                    row_dual_col[i] = art_at;
                    row_dual_negate[i] = true;
                    art_at += 1;
                }
            }
        }

        let mut costs = vec![T::zero(); cols];
        costs[..n].clone_from_slice(&p.objective);

        Tableau {
            rows: m,
            cols,
            a,
            rhs,
            obj: vec![T::zero(); cols],
            obj_val: T::zero(),
            basis,
            num_vars: n,
            costs,
            artificial_from,
            row_dual_col,
            row_dual_negate,
            row_flipped: flipped,
            degenerate: 0,
            pivots: 0,
        }
    }

    fn at(&self, i: usize, j: usize) -> &T {
        &self.a[i * self.cols + j]
    }

    /// Load reduced costs d_j = c_j - c_B . (B^-1 A)_j for the given costs.
    fn load_objective(&mut self, costs: &[T]) {
        for j in 0..self.cols {
            self.obj[j] = costs[j].clone();
        }
        self.obj_val = T::zero();
        for i in 0..self.rows {
            let cb = costs[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let delta = cb.mul(self.at(i, j));
                self.obj[j] = self.obj[j].sub(&delta);
            }
            self.obj_val = self.obj_val.add(&cb.mul(&self.rhs[i]));
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        self.pivots += 1;
        let pivot = self.at(row, col).clone();
        for j in 0..self.cols {
            self.a[row * self.cols + j] = self.a[row * self.cols + j].div(&pivot);
        }
        self.rhs[row] = self.rhs[row].div(&pivot);
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let factor = self.at(i, col).clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let delta = factor.mul(self.at(row, j));
                self.a[i * self.cols + j] = self.a[i * self.cols + j].sub(&delta);
            }
            let delta = factor.mul(&self.rhs[row]);
            self.rhs[i] = self.rhs[i].sub(&delta);
        }
        let factor = self.obj[col].clone();
        if !factor.is_zero() {
            for j in 0..self.cols {
                let delta = factor.mul(self.at(row, j));
                self.obj[j] = self.obj[j].sub(&delta);
            }
            let delta = factor.mul(&self.rhs[row]);
            self.obj_val = self.obj_val.add(&delta);
        }
        self.basis[row] = col;
    }

    fn optimize(&mut self, allow_artificial: bool) -> Step {
        let eps = T::eps();
        let limit = if allow_artificial { self.cols } else { self.artificial_from };
        let budget = MAX_PIVOT_FACTOR * (self.rows + self.cols).max(64);
        for _ in 0..budget {
            let bland = T::always_bland() || self.degenerate > DEGENERATE_SWITCH;
            let mut entering: Option<usize> = None;
            let mut best = eps.clone();
            for j in 0..limit {
                if self.obj[j] > best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = self.obj[j].clone();
                }
            }
            let Some(col) = entering else { return Step::Optimal };
            let mut leave: Option<usize> = None;
            let mut best_ratio: Option<T> = None;
            for i in 0..self.rows {
                let aij = self.at(i, col);
                if *aij > eps {
                    let ratio = self.rhs[i].div(aij);
                    let better = match &best_ratio {
                        None => true,
                        Some(r) => {
                            ratio < *r
                                || (ratio == *r && self.basis[i] < self.basis[leave.unwrap()])
                        }
                    };
                    if better {
                        best_ratio = Some(ratio);
                        leave = Some(i);
                    }
                }
            }
            let Some(row) = leave else { return Step::Unbounded };
            match &best_ratio {
                Some(r) if *r <= eps => self.degenerate += 1,
                _ => self.degenerate = 0,
            }
            self.pivot(row, col);
        }
        Step::Stalled
    }

    fn report(&self, status: LpStatus) -> LpSolution<T> {
        let mut x = vec![T::zero(); self.num_vars];
        for i in 0..self.rows {
            if self.basis[i] < self.num_vars {
                x[self.basis[i]] = self.rhs[i].clone();
            }
        }
        let mut duals = vec![T::zero(); self.rows];
        for i in 0..self.rows {
            let d = self.obj[self.row_dual_col[i]].clone();
            let mut y = if self.row_dual_negate[i] { d.neg() } else { d };
            if self.row_flipped[i] {
                y = y.neg();
            }
            duals[i] = y;
        }
        LpSolution { status, value: self.obj_val.clone(), x, duals, pivots: self.pivots }
    }

    fn solve(mut self) -> LpSolution<T> {
        let eps = T::eps();
        if self.artificial_from < self.cols {
            let mut phase1 = vec![T::zero(); self.cols];
            for c in phase1.iter_mut().skip(self.artificial_from) {
                *c = T::one().neg();
            }
            self.load_objective(&phase1);
            match self.optimize(true) {
                Step::Stalled => return self.report(LpStatus::Stalled),
                Step::Unbounded => unreachable!("phase 1 objective is bounded"),
                Step::Optimal => {}
            }
            let infeasibility = self.obj_val.neg();
            if infeasibility > eps.add(&eps) {
                return self.report(LpStatus::Infeasible);
            }
            // Remaining basic artificials sit at value zero; pivot them onto
            // a real column when the row has one, otherwise the row is
            // redundant and stays inert.
            for i in 0..self.rows {
                if self.basis[i] >= self.artificial_from {
                    let col = (0..self.artificial_from).find(|&j| {
                        let v = self.at(i, j);
                        *v > eps || *v < eps.neg()
                    });
                    if let Some(col) = col {
                        self.pivot(i, col);
                    }
                }
            }
        }

        let costs = self.costs.clone();
        self.load_objective(&costs);
        self.degenerate = 0;
        match self.optimize(false) {
            Step::Optimal => self.report(LpStatus::Optimal),
            Step::Unbounded => self.report(LpStatus::Unbounded),
            Step::Stalled => self.report(LpStatus::Stalled),
        }
    }
}

/// Convenience: an f64 problem in one call.
pub fn maximize(
    objective: Vec<f64>,
    constraints: Vec<(Vec<(usize, f64)>, Rel, f64)>,
) -> LpSolution<f64> {
    let mut lp = LpProblem::new(objective.len(), objective);
    for (coeffs, rel, rhs) in constraints {
        lp.add_constraint(coeffs, rel, rhs);
    }
    lp.solve()
}
