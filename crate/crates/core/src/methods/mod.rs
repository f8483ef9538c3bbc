//! End-to-end pipelines: build the model for a method, solve it, and read the
//! decision back.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, ChanceProgram, Safety};
use crate::oracle::optimal_joint_weights;
use crate::reform::{
    build_bonferroni_lp, build_classical_mip, build_cvar_lp_individual, build_cvar_lp_joint, build_individual_mip,
    build_joint_rhs_mip, build_kappa_model, derive_big_m, derive_classical_big_m, BonferroniPlan, MipModel, RowRole,
    Sense,
};
use crate::solve::{solve_mip, SolveOptions, SolveResult, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exact mixed-integer reformulation.
    Exact,
    /// Convex model with fixed `kappa` coefficients.
    Kappa,
    /// Worst-case CVaR inner approximation.
    Cvar,
    /// Per-row thresholds from a split of the risk budget.
    Bonferroni,
    /// Sample approximation on the empirical distribution (radius ignored).
    Classical,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "kappa" => Ok(Self::Kappa),
            "cvar" => Ok(Self::Cvar),
            "bonferroni" => Ok(Self::Bonferroni),
            "classical" => Ok(Self::Classical),
            _ => Err(Error::Invalid(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct MethodOptions {
    pub solve: SolveOptions,
    /// Coefficients for [`Method::Kappa`]; all ones when absent.
    pub kappa: Option<Vec<f64>>,
    /// Row weights for joint CVaR; the optimal `1 / ||b_m||_*` weights when absent.
    pub weights: Option<Vec<f64>>,
    /// Risk split for Bonferroni; uniform when absent.
    pub risks: Option<Vec<f64>>,
    /// Compute Bonferroni thresholds from sorted distances instead of LPs.
    pub bonferroni_scan: bool,
    /// Override of the derived big-M constant.
    pub big_m: Option<f64>,
    /// Gap used to emulate the strict inequalities of the degenerate-normal
    /// variants; without it that case is reported as an error.
    pub degenerate_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub method: Method,
    pub status: Status,
    /// Decision vector (empty unless a solution is known).
    pub x: Vec<f64>,
    pub objective: f64,
    pub big_m: Option<f64>,
    pub weights: Option<Vec<f64>>,
    pub plan: Option<(Vec<f64>, Vec<f64>)>,
    pub result: SolveResult,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Build the model a method would solve, with the data it derived.
pub fn build(cp: &ChanceProgram, method: Method, opts: &MethodOptions) -> Result<Built> {
    let mut built = Built { model: MipModel::new(""), big_m: None, weights: None, plan: None };
    built.model = match method {
        Method::Exact => {
            let m = match opts.big_m {
                Some(m) => m,
                None => derive_big_m(cp, &cp.feasible.validate_bounded()?)?,
            };
            built.big_m = Some(m);
            match &cp.safety {
                Safety::Individual(_) => build_individual_mip(cp, m)?,
                Safety::JointRhs(_) => build_joint_rhs_mip(cp, m)?,
            }
        }
        Method::Kappa => {
            let kappa = opts.kappa.clone().unwrap_or_else(|| vec![1.0; cp.n_samples()]);
            build_kappa_model(cp, &kappa)?
        }
        Method::Cvar => match &cp.safety {
            Safety::Individual(_) => build_cvar_lp_individual(cp)?,
            Safety::JointRhs(j) => {
                let w = opts.weights.clone().unwrap_or_else(|| optimal_joint_weights(j, cp.ball.norm));
                let m = build_cvar_lp_joint(cp, &w)?;
                built.weights = Some(w);
                m
            }
        },
        Method::Bonferroni => {
            let j = cp
                .joint()
                .ok_or_else(|| Error::Invalid("Bonferroni needs a joint right-hand side safety condition".into()))?;
            let risks = opts.risks.clone().unwrap_or_else(|| vec![cp.epsilon / j.len() as f64; j.len()]);
            let plan = if opts.bonferroni_scan {
                BonferroniPlan::with_risks_scan(cp, risks)?
            } else {
                BonferroniPlan::with_risks(cp, risks)?
            };
            let m = build_bonferroni_lp(cp, &plan)?;
            built.plan = Some(plan);
            m
        }
        Method::Classical => {
            let m = match opts.big_m {
                Some(m) => m,
                None => derive_classical_big_m(cp, &cp.feasible.validate_bounded()?)?,
            };
            built.big_m = Some(m);
            build_classical_mip(cp, m)?
        }
    };
    Ok(built)
}

/// A model together with the constants chosen while building it.
#[derive(Clone, Debug)]
pub struct Built {
    pub model: MipModel,
    pub big_m: Option<f64>,
    pub weights: Option<Vec<f64>>,
    pub plan: Option<BonferroniPlan>,
}

/// Solve `cp` with `method`.
pub fn solve(cp: &ChanceProgram, method: Method, opts: &MethodOptions) -> Result<Solution> {
    let built = build(cp, method, opts)?;
    let result = solve_mip(&built.model, &opts.solve)?;
    let sol = finish(cp, method, &built, result);
    if method == Method::Exact && sol.is_optimal() {
        if let Some(v) = degenerate_variants(cp, &sol.x) {
            return match opts.degenerate_gap {
                None => Err(Error::DegenerateNormal { variants: v.iter().map(|d| d.describe()).collect() }),
                Some(gap) => solve_variants(cp, &built, &v, gap, &opts.solve, method),
            };
        }
    }
    Ok(sol)
}

fn finish(cp: &ChanceProgram, method: Method, built: &Built, result: SolveResult) -> Solution {
    let l = cp.dim_x();
    let has_x =
        matches!(result.status, Status::Optimal | Status::TimeLimit) && result.x.iter().take(l).all(|v| v.is_finite());
    Solution {
        method,
        status: result.status,
        x: if has_x { result.x[..l].to_vec() } else { Vec::new() },
        objective: result.objective,
        big_m: built.big_m,
        weights: built.weights.clone(),
        plan: built.plan.as_ref().map(|p| (p.risks.clone(), p.thresholds.clone())),
        result,
    }
}

/// One of the strict side conditions that split the degenerate case.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Variant {
    Above(usize),
    Below(usize),
    Intercept,
}

impl Variant {
    fn describe(&self) -> String {
        match self {
            Variant::Above(k) => format!("[A^T x]_{} > b_{}", k + 1, k + 1),
            Variant::Below(k) => format!("[A^T x]_{} < b_{}", k + 1, k + 1),
            Variant::Intercept => "a^T x < b0".to_string(),
        }
    }
}

/// The side conditions to branch on when the optimal decision of an
/// individual model makes the normal `b - A^T x` vanish while the intercept
/// is not strictly safe; `None` when the solution is valid as is.
fn degenerate_variants(cp: &ChanceProgram, x: &[f64]) -> Option<Vec<Variant>> {
    let s = cp.individual()?;
    if !s.has_lhs_uncertainty() || x.is_empty() {
        return None;
    }
    let scale = 1.0 + s.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if s.normal(x).iter().any(|v| v.abs() > 1e-9 * scale) {
        return None;
    }
    if s.b0 - dot(&s.a, x) > 1e-9 {
        return None;
    }
    let mut v: Vec<Variant> = (0..s.b.len()).flat_map(|k| [Variant::Above(k), Variant::Below(k)]).collect();
    v.push(Variant::Intercept);
    Some(v)
}

fn solve_variants(
    cp: &ChanceProgram,
    built: &Built,
    variants: &[Variant],
    gap: f64,
    opts: &SolveOptions,
    method: Method,
) -> Result<Solution> {
    let s = cp.individual().expect("variants only arise for individual conditions");
    let l = cp.dim_x();
    let mut best: Option<Solution> = None;
    for v in variants {
        let mut m = built.model.clone();
        let (terms, sense, rhs): (Vec<(usize, f64)>, Sense, f64) = match *v {
            Variant::Above(k) => ((0..l).map(|j| (j, s.a_mat[k][j])).collect(), Sense::Ge, s.b[k] + gap),
            Variant::Below(k) => ((0..l).map(|j| (j, s.a_mat[k][j])).collect(), Sense::Le, s.b[k] - gap),
            Variant::Intercept => ((0..l).map(|j| (j, s.a[j])).collect(), Sense::Le, s.b0 - gap),
        };
        m.add_row(v.describe(), terms, sense, rhs, RowRole::Feasible);
        let r = solve_mip(&m, opts)?;
        if r.is_optimal() && best.as_ref().map_or(true, |b| r.objective < b.objective) {
            best = Some(finish(cp, method, built, r));
        }
    }
    Ok(best.unwrap_or_else(|| finish(cp, method, built, SolveResult::empty(Status::Infeasible, built.model.n_vars()))))
}
