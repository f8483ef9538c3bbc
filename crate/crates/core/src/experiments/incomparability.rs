//! Two-point examples on which the worst-case CVaR and Bonferroni
//! approximations of a joint condition are strictly ordered, one each way.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SampleLaw;
use crate::error::{Error, Result};
use crate::model::{ChanceProgram, JointRhsSafety, JointRow, Norm, Polytope, Safety, TrainingSet, WassersteinBall};
use crate::oracle::{check_cvar_feasible_joint, partial_sum};
use crate::reform::{build_bonferroni_lp, BonferroniPlan};
use crate::solve::{solve_lp, SolveOptions, Status};

/// Upper bound on `x2` in the first example.
const X2_MAX: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ex1Report {
    pub n: usize,
    pub theta: f64,
    pub empirical_p: f64,
    /// Best Bonferroni objective over the `eps_1` grid in `(p, eps)`.
    pub bonferroni_objective: Option<f64>,
    pub bonferroni_risk: Option<f64>,
    pub bonferroni_feasible: bool,
    /// Number of the 99 grid weights for which some decision passes the CVaR test.
    pub cvar_feasible_weights: usize,
    /// Mean partial sum of `x1_max - xi_1` over `eps N` samples.
    pub certificate_lhs: f64,
    /// `certificate_lhs < theta`, which rules out every weight at once.
    pub certificate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ex2Report {
    pub n: usize,
    pub theta: f64,
    pub hits: usize,
    /// `(min(eps N, I) (x - 1) + (eps N - I)^+ x) / N` at `x = (x_lo, x_lo, x_lo)`.
    pub cvar_lhs: f64,
    /// The same quantity from the CVaR test, minus `theta`.
    pub cvar_slack: f64,
    pub cvar_feasible: bool,
    pub cvar_objective: Option<f64>,
    /// Number of the 19 grid splits with a feasible Bonferroni model.
    pub bonferroni_feasible_splits: usize,
    pub bonferroni_feasible: bool,
    /// `I / N > eps / 2`: the even split already fails on the empirical distribution.
    pub even_split_violated: bool,
}

fn sample(law: &SampleLaw, n: usize, seed: u64) -> Result<TrainingSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TrainingSet::new(law.draw(n, &mut rng))
}

fn bonferroni_value(cp: &ChanceProgram, risks: Vec<f64>) -> Result<Option<f64>> {
    let plan = BonferroniPlan::with_risks_scan(cp, risks)?;
    let r = solve_lp(&build_bonferroni_lp(cp, &plan)?, &SolveOptions::default())?;
    Ok((r.status == Status::Optimal).then_some(r.objective))
}

/// `min x1` s.t. the joint condition `x1 > xi_1, x2 > xi_2` over the ball
/// with radius `N^{-1/2}`, `x1 in [x1_lo, x1_hi]`, `x2 in [0, 1000]`, and
/// `xi = (1, 0)` with probability `p`, else `(0, 0)`.
pub fn run_incomparability_ex1(p: f64, eps: f64, x1_lo: f64, x1_hi: f64, n: usize, seed: u64) -> Result<Ex1Report> {
    if !(x1_hi * eps < p && p < eps) {
        return Err(Error::Invalid(format!("need p in ({}, {eps}), got {p}", x1_hi * eps)));
    }
    if !(0.0 < x1_lo && x1_lo <= x1_hi && x1_hi < 1.0) {
        return Err(Error::Invalid("need 0 < x1_lo <= x1_hi < 1".into()));
    }
    let theta = 1.0 / (n as f64).sqrt();
    let law = SampleLaw::TwoPoint { p, hit: vec![1.0, 0.0], miss: vec![0.0, 0.0] };
    let ts = sample(&law, n, seed)?;
    let hits = ts.samples().iter().filter(|xi| xi[0] == 1.0).count();
    let safety = JointRhsSafety::new(vec![
        JointRow { a: vec![-1.0, 0.0], b: vec![-1.0, 0.0], b0: 0.0 },
        JointRow { a: vec![0.0, -1.0], b: vec![0.0, -1.0], b0: 0.0 },
    ])?;
    let cp = ChanceProgram::new(
        vec![1.0, 0.0],
        Polytope::boxed(&[x1_lo, 0.0], &[x1_hi, X2_MAX])?,
        Safety::JointRhs(safety.clone()),
        eps,
        WassersteinBall::new(theta, Norm::L1, ts.clone())?,
    )?;

    let mut best: Option<(f64, f64)> = None;
    for k in 1..20 {
        let e1 = p + (eps - p) * k as f64 / 20.0;
        if let Some(v) = bonferroni_value(&cp, vec![e1, eps - e1])? {
            if best.map_or(true, |(b, _)| v < b) {
                best = Some((v, e1));
            }
        }
    }

    // Each row's slack grows with x, so the CVaR test is passed by some
    // decision iff it is passed at the upper corner.
    let corner = [x1_hi, X2_MAX];
    let mut cvar_ok = 0;
    for k in 1..100 {
        let w1 = k as f64 / 100.0;
        let c = check_cvar_feasible_joint(&ts, &safety, &corner, theta, eps, Norm::L1, Some(&[w1, 1.0 - w1]))?;
        if c.feasible {
            cvar_ok += 1;
        }
    }
    let mut first: Vec<f64> = ts.samples().iter().map(|xi| x1_hi - xi[0]).collect();
    first.sort_by(f64::total_cmp);
    let certificate_lhs = partial_sum(&first, eps * n as f64)? / n as f64;

    Ok(Ex1Report {
        n,
        theta,
        empirical_p: hits as f64 / n as f64,
        bonferroni_objective: best.map(|b| b.0),
        bonferroni_risk: best.map(|b| b.1),
        bonferroni_feasible: best.is_some(),
        cvar_feasible_weights: cvar_ok,
        certificate_lhs,
        certificate: certificate_lhs < theta,
    })
}

/// `min x3` s.t. the joint condition `x1 > xi, x2 > xi` over the ball with
/// radius `N^{-1/2}`, `x in [x_lo, 1]^3`, `x3 >= x1, x2`, and `xi = 1` with
/// probability `p`, else `0`.
pub fn run_incomparability_ex2(p: f64, eps: f64, x_lo: f64, n: usize, seed: u64) -> Result<Ex2Report> {
    if !(eps / 2.0 < p && p <= x_lo * eps) {
        return Err(Error::Invalid(format!("need p in ({}, {}], got {p}", eps / 2.0, x_lo * eps)));
    }
    if !(0.5 < x_lo && x_lo <= 1.0) {
        return Err(Error::Invalid("need 1/2 < x_lo <= 1".into()));
    }
    let theta = 1.0 / (n as f64).sqrt();
    let law = SampleLaw::TwoPoint { p, hit: vec![1.0], miss: vec![0.0] };
    let ts = sample(&law, n, seed)?;
    let hits = ts.samples().iter().filter(|xi| xi[0] == 1.0).count();
    let safety = JointRhsSafety::new(vec![
        JointRow { a: vec![-1.0, 0.0, 0.0], b: vec![-1.0], b0: 0.0 },
        JointRow { a: vec![0.0, -1.0, 0.0], b: vec![-1.0], b0: 0.0 },
    ])?;
    let mut feasible = Polytope::boxed(&[x_lo; 3], &[1.0; 3])?;
    feasible.push_row(vec![1.0, 0.0, -1.0], 0.0)?;
    feasible.push_row(vec![0.0, 1.0, -1.0], 0.0)?;
    let cp = ChanceProgram::new(
        vec![0.0, 0.0, 1.0],
        feasible,
        Safety::JointRhs(safety.clone()),
        eps,
        WassersteinBall::new(theta, Norm::L1, ts.clone())?,
    )?;

    let en = eps * n as f64;
    let i = hits as f64;
    let cvar_lhs = (en.min(i) * (x_lo - 1.0) + (en - i).max(0.0) * x_lo) / n as f64;
    let x = [x_lo; 3];
    let check = check_cvar_feasible_joint(&ts, &safety, &x, theta, eps, Norm::L1, Some(&[0.5, 0.5]))?;

    let mut ok = 0;
    for k in 1..20 {
        let e1 = eps * k as f64 / 20.0;
        if bonferroni_value(&cp, vec![e1, eps - e1])?.is_some() {
            ok += 1;
        }
    }
    Ok(Ex2Report {
        n,
        theta,
        hits,
        cvar_lhs,
        cvar_slack: check.slack,
        cvar_feasible: check.feasible,
        cvar_objective: check.feasible.then_some(x_lo),
        bonferroni_feasible_splits: ok,
        bonferroni_feasible: ok > 0,
        even_split_violated: i / n as f64 > eps / 2.0,
    })
}
