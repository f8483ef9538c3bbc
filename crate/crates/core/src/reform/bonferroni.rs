use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{add_decisions, add_feasible_rows, set_cost};
use super::{MipModel, RowRole, Sense, VarRole};
use crate::error::{Error, Result};
use crate::geometry::dual_norm;
use crate::model::{dot, ChanceProgram, JointRhsSafety, Norm, TrainingSet};
use crate::oracle::partial_sum;
use crate::solve::{solve_lp, SolveOptions, Status};

const BISECT_TOL: f64 = 1e-8;

/// Optimal value of the fixed-`eta` worst-case VaR program
/// `min theta beta + mean(alpha)` over `alpha >= 0`, `w >= 0`,
/// `alpha_i >= 1 - w_i (eta + b^T xi_i)`, `beta >= w_i ||b||_*`.
/// The threshold `eta` is admissible when this is at most `eps`.
fn var_program_value(b: &[f64], ts: &TrainingSet, theta: f64, norm: Norm, eta: f64) -> Result<f64> {
    let n = ts.len();
    let dn = dual_norm(norm, b);
    let mut m = MipModel::new("wc_var");
    let alpha: Vec<usize> = (0..n)
        .map(|i| m.add_continuous(format!("alpha{}", i + 1), 0.0, f64::INFINITY, VarRole::CvarExcess(i)))
        .collect();
    let w: Vec<usize> =
        (0..n).map(|i| m.add_continuous(format!("w{}", i + 1), 0.0, f64::INFINITY, VarRole::Decision(i))).collect();
    let beta = m.add_continuous("beta", 0.0, f64::INFINITY, VarRole::CvarBeta);
    for (i, xi) in ts.samples().iter().enumerate() {
        let g = eta + dot(b, xi);
        m.add_row(format!("a{}", i + 1), vec![(alpha[i], 1.0), (w[i], g)], Sense::Ge, 1.0, RowRole::CvarExcess(i, 0));
        m.add_row(format!("b{}", i + 1), vec![(beta, 1.0), (w[i], -dn)], Sense::Ge, 0.0, RowRole::DualNorm);
    }
    let mut obj = vec![(beta, theta)];
    obj.extend(alpha.iter().map(|&a| (a, 1.0 / n as f64)));
    m.set_objective(obj);
    let r = solve_lp(&m, &SolveOptions::default())?;
    match r.status {
        Status::Optimal => Ok(r.objective),
        s => Err(Error::Numerical(format!("worst-case VaR program ended with status {s:?}"))),
    }
}

/// Search interval for the threshold: infeasible at the left end and
/// feasible at the right end.
fn bracket(b: &[f64], ts: &TrainingSet, theta: f64, norm: Norm, eps: f64) -> (f64, f64) {
    let reach = theta * ts.len() as f64 * dual_norm(norm, b) / eps;
    let neg: Vec<f64> = ts.samples().iter().map(|xi| -dot(b, xi)).collect();
    let lo = neg.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = neg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo - reach, hi + reach)
}

/// Smallest `eta` such that `-b^T xi <= eta` holds with worst-case
/// probability at least `1 - eps` over the ball, found by bisection on the
/// fixed-`eta` linear program. Returns infinity when `eps = 0`.
pub fn bonferroni_threshold(b: &[f64], ts: &TrainingSet, theta: f64, norm: Norm, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Ok(f64::INFINITY);
    }
    if eps >= 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let admissible = |eta: f64| -> Result<bool> { Ok(var_program_value(b, ts, theta, norm, eta)? <= eps + 1e-9) };
    let (mut lo, mut hi) = bracket(b, ts, theta, norm, eps);
    if admissible(lo)? || !admissible(hi)? {
        return Err(Error::Bracket(format!("threshold search interval [{lo}, {hi}] does not bracket a root")));
    }
    while hi - lo > BISECT_TOL * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if admissible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Same threshold from the sorted distances of the samples to the unsafe
/// halfspace `{b^T xi <= v}`: the largest `v` whose mean partial sum of
/// distances over `eps N` samples reaches `theta`, negated.
pub fn bonferroni_threshold_scan(b: &[f64], ts: &TrainingSet, theta: f64, norm: Norm, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Ok(f64::INFINITY);
    }
    if eps >= 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let n = ts.len() as f64;
    let dn = dual_norm(norm, b);
    let mut u: Vec<f64> = ts.samples().iter().map(|xi| dot(b, xi) / dn).collect();
    u.sort_by(f64::total_cmp);
    // the order of (u - v)^+ does not depend on v
    let g = |v: f64| -> Result<f64> {
        let d: Vec<f64> = u.iter().map(|x| (x - v).max(0.0)).collect();
        Ok(partial_sum(&d, eps * n)? / n)
    };
    let mut lo = u[0] - theta / eps - 1.0;
    let mut hi = u[u.len() - 1];
    if g(lo)? < theta {
        return Err(Error::Bracket("distance scan lower end is not admissible".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? >= theta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(-lo * dn)
}

/// Per-row risk levels and the resulting thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct BonferroniPlan {
    pub risks: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl BonferroniPlan {
    /// Thresholds for the given split of the risk budget.
    pub fn with_risks(cp: &ChanceProgram, risks: Vec<f64>) -> Result<Self> {
        Self::compute(cp, risks, bonferroni_threshold)
    }

    /// As [`with_risks`](Self::with_risks), using the distance scan instead
    /// of linear programs; suited to large training sets.
    pub fn with_risks_scan(cp: &ChanceProgram, risks: Vec<f64>) -> Result<Self> {
        Self::compute(cp, risks, bonferroni_threshold_scan)
    }

    /// Uniform split `eps / M`.
    pub fn uniform(cp: &ChanceProgram) -> Result<Self> {
        let j = joint(cp)?;
        Self::with_risks(cp, vec![cp.epsilon / j.len() as f64; j.len()])
    }

    fn compute(
        cp: &ChanceProgram,
        risks: Vec<f64>,
        f: fn(&[f64], &TrainingSet, f64, Norm, f64) -> Result<f64>,
    ) -> Result<Self> {
        let j = joint(cp)?;
        cp.ball.require_positive_radius()?;
        if risks.len() != j.len() {
            return Err(Error::Dimension(format!("{} risk levels for {} rows", risks.len(), j.len())));
        }
        if risks.iter().any(|e| *e < 0.0) || risks.iter().sum::<f64>() > cp.epsilon * (1.0 + 1e-12) {
            return Err(Error::Invalid(format!(
                "risk split {risks:?} must be nonnegative and sum to at most {}",
                cp.epsilon
            )));
        }
        let thresholds = j
            .rows
            .iter()
            .zip(&risks)
            .map(|(r, &e)| f(&r.b, &cp.ball.center, cp.ball.radius, cp.ball.norm, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { risks, thresholds })
    }
}

fn joint(cp: &ChanceProgram) -> Result<&JointRhsSafety> {
    cp.joint().ok_or_else(|| Error::Invalid("Bonferroni needs a joint right-hand side safety condition".into()))
}

/// Linear model `a_m^T x <= b0_m - eta_m` plus the feasible set. A row with an
/// unattainable threshold becomes the empty row `0 <= -1`.
pub fn build_bonferroni_lp(cp: &ChanceProgram, plan: &BonferroniPlan) -> Result<MipModel> {
    let j = joint(cp)?;
    if plan.thresholds.len() != j.len() {
        return Err(Error::Dimension("plan does not match the number of rows".into()));
    }
    let mut m = MipModel::new("bonferroni");
    let xs = add_decisions(&mut m, cp.dim_x());
    for (r, (row, eta)) in j.rows.iter().zip(&plan.thresholds).enumerate() {
        let name = format!("bonf{}", r + 1);
        if eta.is_infinite() && *eta > 0.0 {
            m.add_row(name, vec![], Sense::Le, -1.0, RowRole::Bonferroni(r));
        } else if eta.is_finite() {
            let terms = xs.iter().zip(&row.a).map(|(&x, &a)| (x, a)).collect();
            m.add_row(name, terms, Sense::Le, row.b0 - eta, RowRole::Bonferroni(r));
        }
    }
    add_feasible_rows(&mut m, cp, &xs);
    set_cost(&mut m, cp, &xs);
    Ok(m)
}

/// Candidate splits of `eps` over `rows` rows for a heuristic search: the
/// lattice with `steps` parts for up to three rows, otherwise `samples`
/// seeded Dirichlet(1, ..., 1) draws. The uniform split is always first.
pub fn risk_splits(eps: f64, rows: usize, steps: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![eps / rows as f64; rows]];
    if rows == 0 {
        return out;
    }
    if rows <= 3 {
        let mut cur = vec![0usize; rows];
        compositions(steps, 0, &mut cur, &mut |c| {
            out.push(c.iter().map(|&k| eps * k as f64 / steps as f64).collect());
        });
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let e: Vec<f64> = (0..rows).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let s: f64 = e.iter().sum();
            out.push(e.iter().map(|v| eps * v / s).collect());
        }
    }
    out
}

fn compositions(left: usize, at: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if at + 1 == cur.len() {
        cur[at] = left;
        f(cur);
        return;
    }
    for k in 0..=left {
        cur[at] = k;
        compositions(left - k, at + 1, cur, f);
    }
}
