//! Symmetric functions: the canonical uniform envelope is a complete test
//! for rank-R membership, the per-restriction scan classifies any monotone
//! symmetric profile, and the worst-case LP (min f(m-1) over monotone rank-r
//! profiles scaled to f(m) = m) bounds the whole class at once. Closed-form
//! feasible duals are provided for ranks 3 and 4.

use crate::error::{Error, Result};
use crate::simplex::{LpProblem, LpStatus, Rel};
use crate::valuation::SymmetricValuation;
use serde::Serialize;

pub const MAX_SYMMETRIC_ITEMS: usize = 200;
pub const MAX_WORSTCASE_RANK: usize = 6;
const SYM_TOL: f64 = 1e-9;

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

/// Whether the canonical rank-R envelope of the profile truncated to t items
/// stays below the profile: C(c,R)/C(t,R) * f(t) <= f(c) for all c < t.
fn canonical_valid_at(profile: &[f64], t: usize, r: usize) -> bool {
    if t <= r {
        // the whole restriction fits in one edge
        return true;
    }
    let ft = profile[t];
    // ratio(c) = C(c,R)/C(t,R), advanced incrementally over c
    let mut ratio = 1.0;
    for i in 0..r {
        ratio *= (r - i) as f64 / (t - i) as f64;
    }
    let mut c = r;
    loop {
        if ratio * ft > profile[c] + SYM_TOL * (1.0 + profile[c].abs()) {
            return false;
        }
        c += 1;
        if c >= t {
            return true;
        }
        ratio *= c as f64 / (c - r) as f64;
    }
}

/// Validity of the canonical rank-R envelope for the full profile.
pub(super) fn canonical_ple_valid(profile: &[f64], m: usize, r: usize) -> bool {
    canonical_valid_at(profile, m, r)
}

/// Minimal R such that every restriction (every truncation of the profile)
/// admits a rank-R envelope, decided through the canonical candidate.
pub fn symmetric_mph_level(f: &SymmetricValuation) -> Result<usize> {
    let m = f.m();
    if m > MAX_SYMMETRIC_ITEMS {
        return Err(Error::capacity(format!("m = {m} exceeds {MAX_SYMMETRIC_ITEMS}")));
    }
    if !f.is_normalized() {
        return Err(Error::invalid("classification requires f(0) = 0"));
    }
    if !f.is_monotone() {
        let bad = f.profile().windows(2).position(|w| w[0] > w[1]).unwrap();
        return Err(Error::invalid(format!(
            "profile not monotone: f({bad}) = {} > f({}) = {}",
            f.value_at(bad),
            bad + 1,
            f.value_at(bad + 1)
        )));
    }
    let profile = f.profile();
    for r in 1..=m.max(1) {
        if (1..=m).all(|t| canonical_valid_at(profile, t, r)) {
            return Ok(r);
        }
    }
    Ok(m)
}

/// Certificate for the worst-case LP: minimize f(m-1) over monotone
/// symmetric rank-r profiles with f(m) = m, together with an optimal dual
/// for the transposed system.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetricLpCertificate {
    pub m: usize,
    pub r: usize,
    /// hypergraph coefficients x_1..x_r of the minimizing profile
    pub primal_x: Vec<f64>,
    /// minimal f(m-1)
    pub primal_value: f64,
    /// dual multipliers y_0..y_{m-1} (>= 0) for the monotonicity rows
    pub dual_y: Vec<f64>,
    /// dual multiplier of the scaling row; dual objective is m * z
    pub dual_z: f64,
}

impl SymmetricLpCertificate {
    /// Largest violation of the dual equations
    /// sum_t C(t,i-1) y_t + C(m,i) z = C(m-1,i), plus any negative y.
    pub fn dual_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 1..=self.r {
            let lhs: f64 = self
                .dual_y
                .iter()
                .enumerate()
                .map(|(t, y)| choose(t, i - 1) * y)
                .sum::<f64>()
                + choose(self.m, i) * self.dual_z;
            worst = worst.max((lhs - choose(self.m - 1, i)).abs() / choose(self.m - 1, i).max(1.0));
        }
        for y in &self.dual_y {
            worst = worst.max(-y);
        }
        worst
    }

    /// |primal - dual| objective gap, relative to the scale of m.
    pub fn objective_gap(&self) -> f64 {
        (self.primal_value - self.m as f64 * self.dual_z).abs() / self.m as f64
    }

    /// The profile f(0..m) realized by the primal coefficients.
    pub fn profile(&self) -> Vec<f64> {
        (0..=self.m)
            .map(|t| {
                (1..=self.r)
                    .map(|i| choose(t, i) * self.primal_x[i - 1])
                    .sum()
            })
            .collect()
    }
}

/// Solve the worst-case LP for ground set size m and rank r.
pub fn symmetric_worstcase_lp(m: usize, r: usize) -> Result<SymmetricLpCertificate> {
    if !(3..=MAX_SYMMETRIC_ITEMS).contains(&m) {
        return Err(Error::invalid(format!("m = {m} outside 3..={MAX_SYMMETRIC_ITEMS}")));
    }
    if r == 0 || r > MAX_WORSTCASE_RANK || r > m {
        return Err(Error::invalid(format!(
            "rank r = {r} outside 1..={MAX_WORSTCASE_RANK} (and at most m)"
        )));
    }
    // free variables x_i split into u_i - v_i; maximize the negated objective
    let nv = 2 * r;
    let split = |i: usize, c: f64| [(i, c), (i + r, -c)];
    let mut objective = vec![0.0; nv];
    for i in 1..=r {
        let c = -choose(m - 1, i);
        objective[i - 1] = c;
        objective[i - 1 + r] = -c;
    }
    let mut lp = LpProblem::new(nv, objective);
    for t in 0..m {
        let coeffs: Vec<(usize, f64)> = (1..=r)
            .flat_map(|i| split(i - 1, choose(t, i - 1)))
            .collect();
        lp.add_constraint(coeffs, Rel::Ge, 0.0);
    }
    let scaling: Vec<(usize, f64)> = (1..=r).flat_map(|i| split(i - 1, choose(m, i))).collect();
    lp.add_constraint(scaling, Rel::Eq, m as f64);
    let sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!(
            "worst-case LP (m={m}, r={r}) ended {:?}; the primal is always feasible and bounded",
            sol.status
        )));
    }
    let primal_x: Vec<f64> = (0..r).map(|i| sol.x[i] - sol.x[i + r]).collect();
    let primal_value = -sol.value;
    // Our solver maximizes; the minimization dual is the negated multiplier.
    let dual_y: Vec<f64> = sol.duals[..m].iter().map(|y| -y).collect();
    let dual_z = -sol.duals[m];
    let cert = SymmetricLpCertificate { m, r, primal_x, primal_value, dual_y, dual_z };
    if cert.dual_residual() > 1e-6 || cert.objective_gap() > 1e-6 {
        return Err(Error::Solver(format!(
            "dual extraction failed (residual {:.2e}, gap {:.2e})",
            cert.dual_residual(),
            cert.objective_gap()
        )));
    }
    Ok(cert)
}

/// The closed-form feasible duals for ranks 3 and 4. Their objective m*z
/// lower-bounds the primal; for rank 4 they are optimal.
pub fn analytic_symmetric_dual(m: usize, r: usize) -> Option<(Vec<f64>, f64)> {
    let mf = m as f64;
    let mut y = vec![0.0; m];
    match r {
        3 if m >= 9 => {
            let z = (mf - 4.0) / mf;
            match m % 3 {
                1 => {
                    y[(m - 4) / 3] = 2.0 * (mf - 1.0) / (mf + 2.0);
                    y[(m - 1) / 3] = 1.0;
                    y[2 * (m - 1) / 3] = 6.0 / (mf + 2.0);
                }
                2 => {
                    y[(m - 5) / 3] = 1.0;
                    y[(m - 2) / 3] = 2.0 * (mf - 5.0) / (mf - 2.0);
                    y[2 * (m - 2) / 3] = 6.0 / (mf - 2.0);
                }
                _ => {
                    y[(m - 3) / 3] = (3.0 * mf - 23.0) / (mf - 3.0);
                    y[(m - 6) / 3] = 8.0 / mf;
                    y[2 * (m - 3) / 3] = 6.0 * (mf + 4.0) / (mf * (mf - 3.0));
                }
            }
            Some((y, z))
        }
        4 if m >= 6 => {
            if m.is_multiple_of(2) {
                let z = (mf - 4.0) / (mf + 2.0);
                y[0] = 1.0;
                y[m / 2 - 1] = (2.0 * mf - 2.0) / (mf + 2.0);
                y[m / 2] = (2.0 * mf - 2.0) / (mf + 2.0);
                Some((y, z))
            } else {
                let z = (mf - 2.0) * (mf - 3.0) / (mf * (mf + 1.0));
                y[0] = 1.0;
                y[(m - 1) / 2] = 4.0 * (mf - 2.0) / (mf + 1.0);
                Some((y, z))
            }
        }
        _ => None,
    }
}

/// Check a candidate dual (y, z) against the rank-r system for m items.
/// Returns the worst relative equation residual; negative y short-circuits.
pub fn check_symmetric_dual(m: usize, r: usize, y: &[f64], z: f64) -> Result<f64> {
    if y.len() != m {
        return Err(Error::invalid("dual needs one multiplier per monotonicity row"));
    }
    if let Some(bad) = y.iter().find(|v| **v < 0.0) {
        return Err(Error::Verification(format!("negative dual multiplier {bad}")));
    }
    let mut worst: f64 = 0.0;
    for i in 1..=r {
        let lhs: f64 = y
            .iter()
            .enumerate()
            .map(|(t, v)| choose(t, i - 1) * v)
            .sum::<f64>()
            + choose(m, i) * z;
        let rhs = choose(m - 1, i);
        worst = worst.max((lhs - rhs).abs() / rhs.max(1.0));
    }
    Ok(worst)
}
