//! Closed-form uncertainty quantification and feasibility tests.
//!
//! For a fixed decision the unsafe set is a union of halfspaces, so every
//! quantity here reduces to sorting per-sample distances and taking partial
//! sums with fractional length.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{dist_to_union, dual_norm, min_signed_dist, nearest, project, signed_dist, Halfspace};
use crate::model::{IndividualSafety, JointRhsSafety, Norm, TrainingSet};

/// Distances at or below this are treated as zero (sample already unsafe).
pub const ZERO_DIST: f64 = 1e-12;

/// Sum of the first `len` entries of an ascending list, where a fractional
/// `len` adds that fraction of the next entry.
pub fn partial_sum(sorted: &[f64], len: f64) -> Result<f64> {
    let n = sorted.len() as f64;
    if !(0.0..=n).contains(&len) {
        return Err(Error::Invalid(format!("partial-sum length {len} outside [0, {n}]")));
    }
    let whole = len.floor() as usize;
    let frac = len - whole as f64;
    let mut s: f64 = sorted[..whole].iter().sum();
    if frac > 0.0 {
        s += frac * sorted[whole];
    }
    Ok(s)
}

/// Per-sample values with their ascending order (ties by sample index).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceProfile {
    pub distances: Vec<f64>,
    pub order: Vec<usize>,
    /// Number of samples at distance zero.
    pub unsafe_count: usize,
}

impl DistanceProfile {
    pub fn new(distances: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..distances.len()).collect();
        order.sort_by(|&i, &j| distances[i].total_cmp(&distances[j]).then(i.cmp(&j)));
        let unsafe_count = distances.iter().filter(|d| d.abs() <= ZERO_DIST).count();
        Self { distances, order, unsafe_count }
    }

    /// Distances of samples to the union of `unsafe_set`.
    pub fn to_union(ts: &TrainingSet, unsafe_set: &[Halfspace], norm: Norm) -> Self {
        Self::new(ts.samples().iter().map(|xi| dist_to_union(xi, unsafe_set, norm)).collect())
    }

    pub fn sorted(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.distances[i]).collect()
    }

    /// `(1/N) * partial_sum(sorted, eps * N)`.
    pub fn mean_partial_sum(&self, epsilon: f64) -> Result<f64> {
        let n = self.distances.len() as f64;
        Ok(partial_sum(&self.sorted(), epsilon * n)? / n)
    }
}

/// A discrete distribution attaining the worst-case unsafe probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstCaseDistribution {
    pub support: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    /// Whether each support point lies in the (closed) unsafe set.
    pub is_unsafe: Vec<bool>,
    /// Sample each support point originates from.
    pub origin: Vec<usize>,
    pub unsafe_mass: f64,
    pub j_star: usize,
    pub p_star: f64,
    /// Transport cost from the empirical distribution.
    pub transport_cost: f64,
}

fn require_radius(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::Radius(theta))
    }
}

fn require_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::Epsilon(epsilon))
    }
}

/// Largest probability that any distribution in the ball assigns to the
/// unsafe set, with a distribution attaining it.
pub fn worst_case_probability(
    ts: &TrainingSet,
    unsafe_set: &[Halfspace],
    theta: f64,
    norm: Norm,
) -> Result<(f64, WorstCaseDistribution)> {
    require_radius(theta)?;
    if unsafe_set.is_empty() {
        return Err(Error::Invalid("unsafe set needs at least one halfspace".into()));
    }
    let n = ts.len();
    let nf = n as f64;
    let prof = DistanceProfile::to_union(ts, unsafe_set, norm);
    let budget = theta * nf;

    let mut j_star = 0;
    let mut used = 0.0;
    while j_star < n {
        let d = prof.distances[prof.order[j_star]];
        if used + d <= budget {
            used += d;
            j_star += 1;
        } else {
            break;
        }
    }
    // A zero distance always fits, so the next distance here is positive.
    let p_star = if j_star < n {
        let d = prof.distances[prof.order[j_star]];
        if d < 1e-15 {
            0.0
        } else {
            (budget - used) / d
        }
    } else {
        0.0
    };

    let mut wcd = WorstCaseDistribution {
        support: Vec::with_capacity(n + 1),
        masses: Vec::with_capacity(n + 1),
        is_unsafe: Vec::with_capacity(n + 1),
        origin: Vec::with_capacity(n + 1),
        unsafe_mass: 0.0,
        j_star,
        p_star,
        transport_cost: 0.0,
    };
    let push = |w: &mut WorstCaseDistribution, point: Vec<f64>, mass: f64, bad: bool, i: usize, cost: f64| {
        w.support.push(point);
        w.masses.push(mass);
        w.is_unsafe.push(bad);
        w.origin.push(i);
        w.transport_cost += mass * cost;
        if bad {
            w.unsafe_mass += mass;
        }
    };
    for (rank, &i) in prof.order.iter().enumerate() {
        let xi = ts.get(i);
        let d = prof.distances[i];
        let already = d <= ZERO_DIST;
        if already {
            push(&mut wcd, xi.to_vec(), 1.0 / nf, true, i, 0.0);
        } else if rank < j_star {
            let (m, dm) = nearest(xi, unsafe_set, norm);
            push(&mut wcd, project(xi, &unsafe_set[m], norm), 1.0 / nf, true, i, dm);
        } else if rank == j_star && p_star > 0.0 {
            let (m, dm) = nearest(xi, unsafe_set, norm);
            push(&mut wcd, project(xi, &unsafe_set[m], norm), p_star / nf, true, i, dm);
            push(&mut wcd, xi.to_vec(), (1.0 - p_star) / nf, false, i, 0.0);
        } else {
            push(&mut wcd, xi.to_vec(), 1.0 / nf, false, i, 0.0);
        }
    }
    let prob = if j_star == n { 1.0 } else { (j_star as f64 + p_star) / nf };
    Ok((prob, wcd))
}

/// Outcome of a deterministic feasibility test `lhs >= theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChanceCheck {
    pub feasible: bool,
    /// `lhs - theta`.
    pub slack: f64,
}

impl ChanceCheck {
    fn from_lhs(lhs: f64, theta: f64) -> Self {
        Self { feasible: lhs >= theta, slack: lhs - theta }
    }
}

/// Whether the worst-case probability of the unsafe set is at most `epsilon`.
pub fn check_chance_feasible(
    ts: &TrainingSet,
    unsafe_set: &[Halfspace],
    theta: f64,
    epsilon: f64,
    norm: Norm,
) -> Result<ChanceCheck> {
    require_radius(theta)?;
    require_epsilon(epsilon)?;
    let lhs = DistanceProfile::to_union(ts, unsafe_set, norm).mean_partial_sum(epsilon)?;
    Ok(ChanceCheck::from_lhs(lhs, theta))
}

/// Worst-case CVaR test for an individual safety condition at `x`.
pub fn check_cvar_feasible_individual(
    ts: &TrainingSet,
    safety: &IndividualSafety,
    x: &[f64],
    theta: f64,
    epsilon: f64,
    norm: Norm,
) -> Result<ChanceCheck> {
    require_radius(theta)?;
    require_epsilon(epsilon)?;
    let h = safety
        .unsafe_halfspace(x)
        .ok_or_else(|| Error::Invalid("b - A^T x = 0: signed distances are undefined at this decision".into()))?;
    let prof = DistanceProfile::new(ts.samples().iter().map(|xi| signed_dist(xi, &h, norm)).collect());
    Ok(ChanceCheck::from_lhs(prof.mean_partial_sum(epsilon)?, theta))
}

/// Worst-case CVaR test for a joint condition at `x` with scaling weights
/// `w` (defaults to `w*`, proportional to `1 / ||b_m||_*`).
pub fn check_cvar_feasible_joint(
    ts: &TrainingSet,
    safety: &JointRhsSafety,
    x: &[f64],
    theta: f64,
    epsilon: f64,
    norm: Norm,
    w: Option<&[f64]>,
) -> Result<ChanceCheck> {
    require_radius(theta)?;
    require_epsilon(epsilon)?;
    let hs = safety.unsafe_halfspaces(x);
    let values: Vec<f64> = match w {
        None => ts.samples().iter().map(|xi| min_signed_dist(xi, &hs, norm)).collect(),
        Some(w) => {
            let scale = joint_weight_scales(safety, norm, w)?;
            ts.samples()
                .iter()
                .map(|xi| {
                    hs.iter().zip(&scale).map(|(h, s)| s * signed_dist(xi, h, norm)).fold(f64::INFINITY, f64::min)
                })
                .collect()
        }
    };
    Ok(ChanceCheck::from_lhs(DistanceProfile::new(values).mean_partial_sum(epsilon)?, theta))
}

/// Validate `w` in the open simplex and return the per-row factors
/// `w_m ||b_m||_* / max_l w_l ||b_l||_*`.
pub fn joint_weight_scales(safety: &JointRhsSafety, norm: Norm, w: &[f64]) -> Result<Vec<f64>> {
    if w.len() != safety.len() {
        return Err(Error::Dimension(format!("w has length {}, expected M = {}", w.len(), safety.len())));
    }
    if w.iter().any(|v| !(*v > 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid("w must be strictly positive and sum to 1".into()));
    }
    let raw: Vec<f64> = safety.rows.iter().zip(w).map(|(r, wm)| wm * dual_norm(norm, &r.b)).collect();
    let top = raw.iter().cloned().fold(0.0, f64::max);
    Ok(raw.iter().map(|v| v / top).collect())
}

/// `w*_m` proportional to `1 / ||b_m||_*`.
pub fn optimal_joint_weights(safety: &JointRhsSafety, norm: Norm) -> Vec<f64> {
    let inv: Vec<f64> = safety.rows.iter().map(|r| 1.0 / dual_norm(norm, &r.b)).collect();
    let total: f64 = inv.iter().sum();
    inv.iter().map(|v| v / total).collect()
}
