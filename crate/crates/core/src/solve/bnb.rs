//! Best-bound branch-and-bound over the binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{model_bounds, objective_sign, pattern, solve_lp, solve_lp_bounded};
use super::{SolveOptions, SolveResult, Status};
use crate::error::Result;
use crate::reform::MipModel;

struct Node {
    /// Lower bound (minimisation form) inherited from the parent relaxation.
    bound: f64,
    depth: usize,
    seq: u64,
    fixes: Vec<(usize, bool)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap pops the greatest: lowest bound, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(self.depth.cmp(&other.depth)).then(other.seq.cmp(&self.seq))
    }
}

fn gap(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() {
        return f64::INFINITY;
    }
    ((incumbent - bound) / incumbent.abs().max(1.0)).max(0.0)
}

/// Solve `m` to optimality (within `opts.mip_gap`) or until the time limit.
///
/// Models without binaries are passed straight to the LP solver.
pub fn solve_mip(m: &MipModel, opts: &SolveOptions) -> Result<SolveResult> {
    let binaries = m.binaries();
    if binaries.is_empty() {
        return solve_lp(m, opts);
    }
    let start = Instant::now();
    let sign = objective_sign(m);
    let base = model_bounds(m);
    let n = m.n_vars();

    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: f64::NEG_INFINITY, depth: 0, seq: 0, fixes: Vec::new() });
    let mut seq = 1u64;
    let mut incumbent: Option<SolveResult> = None;
    let mut inc_val = f64::INFINITY;
    let mut nodes = 0u64;
    let mut iterations = 0u64;
    let mut timed_out = false;

    while let Some(node) = heap.peek() {
        if gap(inc_val, node.bound) <= opts.mip_gap {
            break;
        }
        if opts.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() > t) {
            timed_out = true;
            break;
        }
        let node = heap.pop().expect("peeked");
        let mut bounds = base.clone();
        for &(j, v) in &node.fixes {
            let v = if v { 1.0 } else { 0.0 };
            bounds[j] = (v, v);
        }
        let lp = solve_lp_bounded(m, &bounds, opts)?;
        nodes += 1;
        iterations += lp.iteration_count;
        match lp.status {
            Status::Infeasible => continue,
            Status::Unbounded => {
                let mut r = SolveResult::empty(Status::Unbounded, n);
                r.node_count = nodes;
                r.iteration_count = iterations;
                return Ok(r);
            }
            _ => {}
        }
        let z = sign * lp.objective;
        if gap(inc_val, z) <= opts.mip_gap {
            continue;
        }

        let mut branch: Option<(usize, f64)> = None;
        for &j in &binaries {
            let v = lp.x[j];
            let frac = v.min(1.0 - v);
            if frac > opts.int_tol && branch.map_or(true, |(_, f)| frac > f) {
                branch = Some((j, frac));
            }
        }

        match branch {
            None => {
                // Polish: fix the rounded pattern and re-solve the continuous part.
                let mut fixed = bounds.clone();
                for &j in &binaries {
                    let v = lp.x[j].round();
                    fixed[j] = (v, v);
                }
                let polished = solve_lp_bounded(m, &fixed, opts)?;
                iterations += polished.iteration_count;
                let cand = if polished.status == Status::Optimal { polished } else { lp };
                let val = sign * cand.objective;
                if val < inc_val {
                    inc_val = val;
                    incumbent = Some(cand);
                }
            }
            Some((j, _)) => {
                for v in [false, true] {
                    let mut fixes = node.fixes.clone();
                    fixes.push((j, v));
                    heap.push(Node { bound: z, depth: node.depth + 1, seq, fixes });
                    seq += 1;
                }
            }
        }
    }

    let open_bound = heap.peek().map_or(inc_val, |nd| nd.bound.min(inc_val));
    let mut res = match incumbent {
        Some(mut r) => {
            r.status = if timed_out { Status::TimeLimit } else { Status::Optimal };
            r.q = pattern(m, &r.x);
            r.x.iter_mut().filter(|v| v.abs() < 1e-15).for_each(|v| *v = 0.0);
            for &j in &binaries {
                r.x[j] = r.x[j].round();
            }
            r.max_violation = m.max_violation(&r.x);
            r.bound_gap = if timed_out { gap(inc_val, open_bound) } else { gap(inc_val, open_bound).min(opts.mip_gap) };
            r.best_bound = sign * open_bound;
            r.duals = Vec::new();
            r.dual_objective = f64::NAN;
            r
        }
        None if timed_out => SolveResult::empty(Status::TimeLimit, n),
        None => SolveResult::empty(Status::Infeasible, n),
    };
    res.node_count = nodes;
    res.iteration_count = iterations;
    Ok(res)
}
