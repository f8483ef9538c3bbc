//! Seeded instance generators and the reproducible studies: portfolio
//! selection, transportation, radius selection by cross-validation and the
//! two incomparability examples.
//!
//! Every generator is a pure function of its configuration and seed, and the
//! runners return rows in a fixed order so CSV output is byte-identical
//! across reruns (absent a time limit).

mod incomparability;

pub use incomparability::{run_incomparability_ex1, run_incomparability_ex2, Ex1Report, Ex2Report};

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::methods::{self, Method, MethodOptions};
use crate::model::{
    dot, ChanceProgram, IndividualSafety, JointRhsSafety, JointRow, Norm, Polytope, Safety, TrainingSet,
    WassersteinBall,
};
use crate::reform::{build_max_radius_mip, derive_big_m, MipModel};
use crate::solve::{solve_lp, solve_mip, SolveOptions, Status};

/// Fresh samples drawn for out-of-sample evaluation.
pub const FRESH_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub instances: usize,
    /// Portfolio: number of assets `K` (= `L`).
    pub assets: usize,
    /// Portfolio: target return `w`.
    pub target_return: f64,
    pub factories: usize,
    pub centers: usize,
    pub samples: usize,
    /// Radii to sweep; transportation derives its own grid when empty.
    pub thetas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub norm: Norm,
    pub time_limit: Option<f64>,
    pub folds: usize,
}

impl ExperimentConfig {
    pub fn portfolio_desk(seed: u64) -> Self {
        Self {
            seed,
            instances: 3,
            assets: 5,
            target_return: 1.0,
            factories: 0,
            centers: 0,
            samples: 20,
            thetas: vec![0.05, 0.1, 0.2],
            epsilons: vec![0.05, 0.1],
            norm: Norm::L1,
            time_limit: None,
            folds: 7,
        }
    }

    pub fn transport_desk(seed: u64) -> Self {
        Self {
            seed,
            instances: 3,
            assets: 0,
            target_return: 0.0,
            factories: 3,
            centers: 5,
            samples: 30,
            thetas: Vec::new(),
            epsilons: vec![0.1],
            norm: Norm::L2,
            time_limit: None,
            folds: 7,
        }
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions { time_limit: self.time_limit, ..SolveOptions::default() }
    }

    /// Seed of instance `i`.
    pub fn instance_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(i as u64)
    }
}

/// Law of the uncertain parameter, used to draw training and test samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SampleLaw {
    /// Independent uniform coordinates on `[lo, hi]`.
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
    /// `hit` with probability `p`, otherwise `miss`.
    TwoPoint { p: f64, hit: Vec<f64>, miss: Vec<f64> },
}

impl SampleLaw {
    pub fn draw(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| match self {
                SampleLaw::Uniform { lo, hi } => lo.iter().zip(hi).map(|(l, h)| rng.gen_range(*l..=*h)).collect(),
                SampleLaw::TwoPoint { p, hit, miss } => {
                    if rng.gen::<f64>() < *p {
                        hit.clone()
                    } else {
                        miss.clone()
                    }
                }
            })
            .collect()
    }
}

/// A generated program together with the law its samples came from.
#[derive(Clone, Debug)]
pub struct Instance {
    pub program: ChanceProgram,
    pub law: SampleLaw,
}

/// Portfolio instance: minimise `c^T x` subject to the ambiguous chance
/// constraint `xi^T x > w`, with integer costs on `{1, ..., 100}` and returns
/// uniform on `[0.8, 1.5]`.
///
/// The constraint is written with `A = -I`, `a = 0`, `b = 0`, `b0 = -w`. The
/// feasible set `x >= 0` is closed by the box `x <= 10 w / min xi` and cut by
/// `e^T x >= w / max xi`, which every decision satisfying the constraint on
/// at least one sample meets; the cut also keeps `x = 0`, where the
/// normal `b - A^T x` vanishes, out of the feasible set.
pub fn gen_portfolio(cfg: &ExperimentConfig, seed: u64) -> Result<Instance> {
    let k = cfg.assets;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost: Vec<f64> = (0..k).map(|_| rng.gen_range(1..=100) as f64).collect();
    let law = SampleLaw::Uniform { lo: vec![0.8; k], hi: vec![1.5; k] };
    let samples = law.draw(cfg.samples, &mut rng);
    let lo_xi = samples.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let hi_xi = samples.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w = cfg.target_return;
    let mut feasible = Polytope::boxed(&vec![0.0; k], &vec![10.0 * w / lo_xi; k])?;
    feasible.push_row(vec![-1.0; k], -w / hi_xi)?;
    let a_mat = (0..k).map(|r| (0..k).map(|c| if r == c { -1.0 } else { 0.0 }).collect()).collect();
    let safety = IndividualSafety { a_mat, a: vec![0.0; k], b: vec![0.0; k], b0: -w };
    let theta = cfg.thetas.first().copied().unwrap_or(0.1);
    let eps = cfg.epsilons.first().copied().unwrap_or(0.1);
    let ball = WassersteinBall::new(theta, cfg.norm, TrainingSet::new(samples)?)?;
    let program = ChanceProgram::new(cost, feasible, Safety::Individual(safety), eps, ball)?;
    Ok(Instance { program, law })
}

/// Transportation instance with `F` factories and `D` distribution centres
/// on `[0, 10]^2`, Euclidean unit costs, demands uniform on
/// `[0.8 mu, 1.2 mu]` with `mu_d` uniform on `[0, 10]`, and capacities scaled
/// to 150% of the largest total demand. Shipments are `x[f * D + d]`.
pub fn gen_transportation(cfg: &ExperimentConfig, seed: u64) -> Result<Instance> {
    let (f, d) = (cfg.factories, cfg.centers);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| [rng.gen_range(0.0..=10.0), rng.gen_range(0.0..=10.0)];
    let fac: Vec<[f64; 2]> = (0..f).map(|_| point(&mut rng)).collect();
    let cen: Vec<[f64; 2]> = (0..d).map(|_| point(&mut rng)).collect();
    let mu: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..=10.0)).collect();
    let raw_cap: Vec<f64> = (0..f).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let law = SampleLaw::Uniform { lo: mu.iter().map(|m| 0.8 * m).collect(), hi: mu.iter().map(|m| 1.2 * m).collect() };
    let samples = law.draw(cfg.samples, &mut rng);

    let peak: f64 = mu.iter().map(|m| 1.2 * m).sum();
    let total: f64 = raw_cap.iter().sum();
    let cap: Vec<f64> = raw_cap.iter().map(|c| 1.5 * peak * c / total).collect();
    let l = f * d;
    let mut cost = vec![0.0; l];
    for (i, p) in fac.iter().enumerate() {
        for (j, q) in cen.iter().enumerate() {
            cost[i * d + j] = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        }
    }
    let mut g = Vec::new();
    let mut h = Vec::new();
    for v in 0..l {
        let mut row = vec![0.0; l];
        row[v] = -1.0;
        g.push(row);
        h.push(0.0);
    }
    for (i, c) in cap.iter().enumerate() {
        let mut row = vec![0.0; l];
        row[i * d..(i + 1) * d].iter_mut().for_each(|v| *v = 1.0);
        g.push(row);
        h.push(*c);
    }
    // sum_f x_fd > xi_d, i.e. -sum_f x_fd < -xi_d
    let rows = (0..d)
        .map(|j| {
            let mut a = vec![0.0; l];
            (0..f).for_each(|i| a[i * d + j] = -1.0);
            let mut b = vec![0.0; d];
            b[j] = -1.0;
            JointRow { a, b, b0: 0.0 }
        })
        .collect();
    let theta = cfg.thetas.first().copied().unwrap_or(0.001);
    let eps = cfg.epsilons.first().copied().unwrap_or(0.1);
    let ball = WassersteinBall::new(theta, cfg.norm, TrainingSet::new(samples)?)?;
    let program =
        ChanceProgram::new(cost, Polytope::new(g, h, l)?, Safety::JointRhs(JointRhsSafety::new(rows)?), eps, ball)?;
    Ok(Instance { program, law })
}

/// Empirical violation rate of `x` on `samples` and its cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutOfSample {
    pub violation: f64,
    pub cost: f64,
}

pub fn evaluate_out_of_sample(cp: &ChanceProgram, x: &[f64], samples: &[Vec<f64>]) -> OutOfSample {
    let bad = samples.iter().filter(|xi| !cp.safety.is_safe(x, xi)).count();
    OutOfSample { violation: bad as f64 / samples.len().max(1) as f64, cost: dot(&cp.objective, x) }
}

/// Largest radius at which the joint program is still feasible.
pub fn max_feasible_radius(cp: &ChanceProgram, opts: &SolveOptions) -> Result<f64> {
    let m = derive_big_m(cp, &cp.feasible.validate_bounded()?)?;
    let tight = SolveOptions { mip_gap: 1e-10, ..opts.clone() };
    let r = solve_mip(&build_max_radius_mip(cp, m)?, &tight)?;
    match r.status {
        Status::Optimal => Ok(r.objective),
        Status::Infeasible => Err(Error::NoFeasibleRadius),
        s => Err(Error::Numerical(format!("radius model ended with status {s:?}"))),
    }
}

/// Ten equispaced radii from 0.001 up to the smallest radius at which the
/// program becomes infeasible: the largest feasible radius plus a relative
/// step of 1e-6, widened until the exact model confirms infeasibility.
pub fn theta_grid(cp: &ChanceProgram, opts: &SolveOptions) -> Result<Vec<f64>> {
    let first = 0.001;
    let top = max_feasible_radius(cp, opts)?;
    let mut step = 1e-6 * top.max(1.0);
    let mut last = top + step;
    for _ in 0..30 {
        let sol = methods::solve(
            &cp.with_radius(last)?,
            Method::Exact,
            &MethodOptions { solve: opts.clone(), ..Default::default() },
        )?;
        if sol.status == Status::Infeasible {
            break;
        }
        step *= 2.0;
        last = top + step;
    }
    if last <= first {
        return Err(Error::NoFeasibleRadius);
    }
    Ok((0..10).map(|k| first + (last - first) * k as f64 / 9.0).collect())
}

/// Binary patterns `q` for which the exact joint model with `q` fixed is
/// feasible, in lexicographic order. Exponential in `N`.
pub fn feasible_patterns(model: &MipModel) -> Result<Vec<Vec<bool>>> {
    let n = model.binaries().len();
    let mut out = Vec::new();
    for code in 0u64..(1u64 << n) {
        let q: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
        let r = solve_lp(&model.with_binaries_fixed(&q), &SolveOptions::default())?;
        if r.status == Status::Optimal {
            out.push(q);
        }
    }
    Ok(out)
}

/// Outcome of radius selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub grid: Vec<f64>,
    /// Mean held-out violation per radius (`None` when some fold is infeasible).
    pub mean_violation: Vec<Option<f64>>,
    pub chosen: usize,
    pub theta: f64,
}

/// Choose the smallest radius whose mean held-out violation over `folds`
/// folds is at most `eps`. Fold `f` holds the samples with index `i % folds == f`;
/// with one fold the training set is also the held-out set.
pub fn cross_validate_theta(
    cp: &ChanceProgram,
    grid: &[f64],
    folds: usize,
    opts: &SolveOptions,
) -> Result<CrossValidation> {
    if folds == 0 || grid.is_empty() {
        return Err(Error::Invalid("cross-validation needs at least one fold and one radius".into()));
    }
    let n = cp.n_samples();
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|f| {
            if folds == 1 {
                ((0..n).collect(), (0..n).collect())
            } else {
                ((0..n).filter(|i| i % folds != f).collect(), (0..n).filter(|i| i % folds == f).collect())
            }
        })
        .collect();
    let mean_violation = grid
        .par_iter()
        .map(|&theta| -> Result<Option<f64>> {
            let mut total = 0.0;
            for (train, held) in &splits {
                let sub = cp.with_samples(cp.ball.center.select(train)?)?.with_radius(theta)?;
                let sol =
                    methods::solve(&sub, Method::Exact, &MethodOptions { solve: opts.clone(), ..Default::default() })?;
                if sol.x.is_empty() {
                    return Ok(None);
                }
                let test: Vec<Vec<f64>> = held.iter().map(|&i| cp.ball.center.get(i).to_vec()).collect();
                total += evaluate_out_of_sample(cp, &sol.x, &test).violation;
            }
            Ok(Some(total / folds as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let chosen = mean_violation
        .iter()
        .position(|v| v.map_or(false, |v| v <= cp.epsilon + 1e-12))
        .ok_or(Error::NoFeasibleRadius)?;
    Ok(CrossValidation { grid: grid.to_vec(), mean_violation, chosen, theta: grid[chosen] })
}

fn fmt_opt(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

/// One (instance, radius, risk, method) cell of the portfolio study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PortfolioRow {
    pub instance: usize,
    pub theta: f64,
    pub epsilon: f64,
    pub method: String,
    pub status: String,
    pub objective: String,
    pub violation: String,
    pub nodes: u64,
    pub box_active: bool,
}

/// Exact and CVaR portfolios over the configured radii and risk levels,
/// evaluated on fresh samples.
pub fn run_portfolio(cfg: &ExperimentConfig) -> Result<Vec<PortfolioRow>> {
    let opts = cfg.solve_options();
    let per_instance = (0..cfg.instances)
        .into_par_iter()
        .map(|i| -> Result<Vec<PortfolioRow>> {
            let inst = gen_portfolio(cfg, cfg.instance_seed(i))?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.instance_seed(i) ^ 0x5eed);
            let fresh = inst.law.draw(FRESH_SAMPLES, &mut rng);
            let x_max = cfg_box(&inst.program);
            let mut rows = Vec::new();
            for &eps in &cfg.epsilons {
                for &theta in &cfg.thetas {
                    let cp = inst.program.with_epsilon(eps)?.with_radius(theta)?;
                    for method in [Method::Exact, Method::Cvar] {
                        let sol =
                            methods::solve(&cp, method, &MethodOptions { solve: opts.clone(), ..Default::default() })?;
                        let (objective, violation, active) = if sol.x.is_empty() {
                            (String::new(), String::new(), false)
                        } else {
                            let oos = evaluate_out_of_sample(&cp, &sol.x, &fresh);
                            (fmt_opt(sol.objective), fmt_opt(oos.violation), sol.x.iter().any(|v| *v >= x_max - 1e-7))
                        };
                        rows.push(PortfolioRow {
                            instance: i,
                            theta,
                            epsilon: eps,
                            method: format!("{method:?}").to_lowercase(),
                            status: format!("{:?}", sol.status).to_lowercase(),
                            objective,
                            violation,
                            nodes: sol.result.node_count,
                            box_active: active,
                        });
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}

/// Upper end of the generated portfolio box.
fn cfg_box(cp: &ChanceProgram) -> f64 {
    cp.feasible.h[0]
}

/// One (instance, radius) cell of the transportation study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportRow {
    pub instance: usize,
    pub theta_index: usize,
    pub theta: f64,
    pub method: String,
    pub status: String,
    pub objective: String,
    pub violation: String,
    pub nodes: u64,
}

/// Exact model along each instance's radius grid, plus the classical
/// scenario model, with out-of-sample violation on fresh demands.
pub fn run_transport(cfg: &ExperimentConfig) -> Result<Vec<TransportRow>> {
    let opts = cfg.solve_options();
    let per_instance = (0..cfg.instances)
        .into_par_iter()
        .map(|i| -> Result<Vec<TransportRow>> {
            let inst = gen_transportation(cfg, cfg.instance_seed(i))?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.instance_seed(i) ^ 0x5eed);
            let fresh = inst.law.draw(FRESH_SAMPLES, &mut rng);
            let grid = if cfg.thetas.is_empty() { theta_grid(&inst.program, &opts)? } else { cfg.thetas.clone() };
            let mo = MethodOptions { solve: opts.clone(), ..Default::default() };
            let mut rows = Vec::new();
            let mut push = |k: usize, theta: f64, method: Method, sol: &methods::Solution| {
                let violation = if sol.x.is_empty() {
                    String::new()
                } else {
                    fmt_opt(evaluate_out_of_sample(&inst.program, &sol.x, &fresh).violation)
                };
                rows.push(TransportRow {
                    instance: i,
                    theta_index: k,
                    theta,
                    method: format!("{method:?}").to_lowercase(),
                    status: format!("{:?}", sol.status).to_lowercase(),
                    objective: if sol.x.is_empty() { String::new() } else { fmt_opt(sol.objective) },
                    violation,
                    nodes: sol.result.node_count,
                });
            };
            let classical = methods::solve(&inst.program, Method::Classical, &mo)?;
            push(0, 0.0, Method::Classical, &classical);
            for (k, &theta) in grid.iter().enumerate() {
                let sol = methods::solve(&inst.program.with_radius(theta)?, Method::Exact, &mo)?;
                push(k + 1, theta, Method::Exact, &sol);
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}

/// One instance of the radius-selection study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossvalRow {
    pub instance: usize,
    pub chosen_index: usize,
    pub theta: f64,
    pub objective: String,
    pub violation: String,
}

/// Cross-validated radius per transportation instance, then the exact model
/// at that radius on the full training set, evaluated on fresh demands.
pub fn run_crossval(cfg: &ExperimentConfig) -> Result<Vec<CrossvalRow>> {
    let opts = cfg.solve_options();
    (0..cfg.instances)
        .map(|i| {
            let inst = gen_transportation(cfg, cfg.instance_seed(i))?;
            let grid = if cfg.thetas.is_empty() { theta_grid(&inst.program, &opts)? } else { cfg.thetas.clone() };
            let cv = cross_validate_theta(&inst.program, &grid, cfg.folds, &opts)?;
            let sol = methods::solve(
                &inst.program.with_radius(cv.theta)?,
                Method::Exact,
                &MethodOptions { solve: opts.clone(), ..Default::default() },
            )?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.instance_seed(i) ^ 0x5eed);
            let fresh = inst.law.draw(FRESH_SAMPLES, &mut rng);
            let (objective, violation) = if sol.x.is_empty() {
                (String::new(), String::new())
            } else {
                (fmt_opt(sol.objective), fmt_opt(evaluate_out_of_sample(&inst.program, &sol.x, &fresh).violation))
            };
            Ok(CrossvalRow { instance: i, chosen_index: cv.chosen + 1, theta: cv.theta, objective, violation })
        })
        .collect()
}

/// Write `rows` as CSV with a header row.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
