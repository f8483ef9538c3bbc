//! LP and MIP solving for [`MipModel`]s, plus MPS/LP file export.

mod bnb;
mod export;
mod simplex;

pub use bnb::solve_mip;
pub use export::{read_mps, write_lp, write_mps};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::reform::{MipModel, ObjSense, Sense};
use simplex::{solve_dense, LpStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Wall-clock limit for branch-and-bound, in seconds.
    pub time_limit: Option<f64>,
    /// Relative gap `(incumbent - bound) / max(1, |incumbent|)` at which
    /// branch-and-bound stops.
    pub mip_gap: f64,
    pub int_tol: f64,
    pub feas_tol: f64,
    pub max_iterations: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { time_limit: None, mip_gap: 1e-6, int_tol: 1e-6, feas_tol: 1e-8, max_iterations: 1_000_000 }
    }
}

impl SolveOptions {
    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = Some(seconds);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    /// Values of every model variable (NaN when no solution is known).
    pub x: Vec<f64>,
    /// Objective in the model's sense (NaN when no solution is known).
    pub objective: f64,
    /// Binary pattern of the solution, in model order of the binaries.
    pub q: Vec<bool>,
    pub bound_gap: f64,
    /// Best proven bound on the objective, in the model's sense.
    pub best_bound: f64,
    pub node_count: u64,
    pub iteration_count: u64,
    /// Row duals of the final LP (minimisation form; empty for MIPs).
    pub duals: Vec<f64>,
    /// Lagrangian dual objective reconstructed from the final basis.
    pub dual_objective: f64,
    /// Largest row or bound violation of `x`.
    pub max_violation: f64,
}

impl SolveResult {
    pub(crate) fn empty(status: Status, n: usize) -> Self {
        Self {
            status,
            x: vec![f64::NAN; n],
            objective: f64::NAN,
            q: Vec::new(),
            bound_gap: f64::INFINITY,
            best_bound: f64::NAN,
            node_count: 0,
            iteration_count: 0,
            duals: Vec::new(),
            dual_objective: f64::NAN,
            max_violation: f64::NAN,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

pub(crate) fn model_bounds(m: &MipModel) -> Vec<(f64, f64)> {
    m.vars.iter().map(|v| (v.lower, v.upper)).collect()
}

pub(crate) fn objective_sign(m: &MipModel) -> f64 {
    match m.sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    }
}

/// Solve the LP relaxation of `m` (binaries relaxed to `[0, 1]`).
pub fn solve_lp(m: &MipModel, opts: &SolveOptions) -> Result<SolveResult> {
    solve_lp_bounded(m, &model_bounds(m), opts)
}

pub(crate) fn solve_lp_bounded(m: &MipModel, bounds: &[(f64, f64)], opts: &SolveOptions) -> Result<SolveResult> {
    let out = solve_dense(m, bounds, opts.max_iterations)?;
    let n = m.n_vars();
    let mut res = match out.status {
        LpStatus::Infeasible => SolveResult::empty(Status::Infeasible, n),
        LpStatus::Unbounded => SolveResult::empty(Status::Unbounded, n),
        LpStatus::Optimal => {
            let dual_objective = dual_objective(m, bounds, &out.duals);
            SolveResult {
                status: Status::Optimal,
                q: pattern(m, &out.x),
                max_violation: violation(m, bounds, &out.x),
                objective: out.objective,
                best_bound: out.objective,
                bound_gap: 0.0,
                node_count: 0,
                iteration_count: 0,
                dual_objective,
                duals: out.duals,
                x: out.x,
            }
        }
    };
    res.iteration_count = out.iterations;
    Ok(res)
}

pub(crate) fn pattern(m: &MipModel, x: &[f64]) -> Vec<bool> {
    m.binaries().into_iter().map(|j| x[j] > 0.5).collect()
}

fn violation(m: &MipModel, bounds: &[(f64, f64)], x: &[f64]) -> f64 {
    let mut worst = m.max_violation(x);
    for (&(l, h), v) in bounds.iter().zip(x) {
        worst = worst.max(l - v).max(v - h);
    }
    worst
}

/// `b^T y + sum_j min over [l_j, u_j] of d_j x_j` with `d = c - A^T y`, the
/// Lagrangian bound attained by the row duals `y` (minimisation form),
/// reported in the model's sense.
fn dual_objective(m: &MipModel, bounds: &[(f64, f64)], y: &[f64]) -> f64 {
    const ZERO: f64 = 1e-9;
    let sign = objective_sign(m);
    let mut d = vec![0.0; m.n_vars()];
    for &(j, c) in &m.objective {
        d[j] += sign * c;
    }
    let mut value = 0.0;
    for (row, &yi) in m.rows.iter().zip(y) {
        if yi == 0.0 {
            continue;
        }
        value += row.rhs * yi;
        for &(j, a) in &row.terms {
            d[j] -= a * yi;
        }
        // Slack column: reduced cost -y_i over the slack's sign range.
        let slack_ok = match row.sense {
            Sense::Le => yi <= ZERO,
            Sense::Ge => yi >= -ZERO,
            Sense::Eq => true,
        };
        if !slack_ok {
            return f64::NEG_INFINITY * sign;
        }
    }
    for (dj, &(l, h)) in d.iter().zip(bounds) {
        let bound = if *dj > ZERO {
            l
        } else if *dj < -ZERO {
            h
        } else {
            continue;
        };
        if !bound.is_finite() {
            return f64::NEG_INFINITY * sign;
        }
        value += dj * bound;
    }
    sign * value
}
