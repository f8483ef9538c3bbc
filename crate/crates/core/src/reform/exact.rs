use super::{add_decisions, add_feasible_rows, dual_norm_epigraph, set_cost};
use super::{MipModel, ObjSense, RowRole, Sense, VarRole};
use crate::error::{Error, Result};
use crate::geometry::dual_norm;
use crate::model::{dot, ChanceProgram, IndividualSafety, JointRhsSafety};

fn require_individual(cp: &ChanceProgram) -> Result<&IndividualSafety> {
    cp.individual().ok_or_else(|| Error::Invalid("model needs an individual safety condition".into()))
}

fn require_joint(cp: &ChanceProgram) -> Result<&JointRhsSafety> {
    cp.joint().ok_or_else(|| Error::Invalid("model needs a joint right-hand side safety condition".into()))
}

fn require_big_m(big_m: f64) -> Result<()> {
    if big_m > 0.0 && big_m.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("big-M must be positive and finite, got {big_m}")))
    }
}

/// Slacks, threshold and indicators shared by both exact models.
struct Core {
    s: Vec<usize>,
    t: usize,
    q: Vec<usize>,
}

fn add_core(m: &mut MipModel, n: usize, big_m: f64) -> Core {
    let half = big_m / 2.0;
    let s = (0..n).map(|i| m.add_continuous(format!("s{}", i + 1), 0.0, half, VarRole::Slack(i))).collect();
    let t = m.add_continuous("t", 0.0, half, VarRole::Threshold);
    let q = (0..n).map(|i| m.add_binary(format!("q{}", i + 1), VarRole::Indicator(i))).collect();
    Core { s, t, q }
}

/// `M (1 - q_i) >= t - s_i`.
fn add_caps(m: &mut MipModel, c: &Core, big_m: f64) {
    for i in 0..c.s.len() {
        m.add_row(
            format!("cap{}", i + 1),
            vec![(c.t, 1.0), (c.s[i], -1.0), (c.q[i], big_m)],
            Sense::Le,
            big_m,
            RowRole::Cap(i),
        );
    }
}

/// Exact mixed-integer model for an individual condition.
///
/// For the 1- and inf-norm the model is linear; for the 2-norm the dual-norm
/// bound is a second-order cone row (export only). When `A = 0` the dual norm
/// is a constant and every norm yields a linear model.
pub fn build_individual_mip(cp: &ChanceProgram, big_m: f64) -> Result<MipModel> {
    let s = require_individual(cp)?;
    cp.ball.require_positive_radius()?;
    require_big_m(big_m)?;
    let n = cp.n_samples();
    let nf = n as f64;
    let mut m = MipModel::new("individual_exact");
    m.big_m = Some(big_m);
    let xs = add_decisions(&mut m, cp.dim_x());
    let c = add_core(&mut m, n, big_m);

    let mut budget = vec![(c.t, cp.epsilon * nf)];
    budget.extend(c.s.iter().map(|&j| (j, -1.0)));
    let theta_n = cp.ball.radius * nf;
    let mut rhs = 0.0;
    if s.has_lhs_uncertainty() {
        let nu = m.add_continuous("nu", 0.0, f64::INFINITY, VarRole::DualNorm);
        dual_norm_epigraph(&mut m, s, &xs, cp.ball.norm, nu)?;
        budget.push((nu, -theta_n));
    } else {
        rhs = theta_n * dual_norm(cp.ball.norm, &s.b);
    }
    m.add_row("budget", budget, Sense::Ge, rhs, RowRole::Budget);

    for (i, xi) in cp.ball.center.samples().iter().enumerate() {
        // margin_i(x) + M q_i >= t - s_i
        let (k, grad) = s.margin_affine(xi);
        let mut terms: Vec<(usize, f64)> = xs.iter().zip(&grad).map(|(&j, &g)| (j, g)).collect();
        terms.extend([(c.q[i], big_m), (c.s[i], 1.0), (c.t, -1.0)]);
        m.add_row(format!("disj{}", i + 1), terms, Sense::Ge, -k, RowRole::Disjunct(i));
    }
    add_caps(&mut m, &c, big_m);
    add_feasible_rows(&mut m, cp, &xs);
    set_cost(&mut m, cp, &xs);
    Ok(m)
}

/// Joint model core; `theta` is either a constant or a radius variable.
fn joint_model(cp: &ChanceProgram, big_m: f64, name: &str, radius_var: bool) -> Result<MipModel> {
    let j = require_joint(cp)?;
    require_big_m(big_m)?;
    let n = cp.n_samples();
    let nf = n as f64;
    let half = big_m / 2.0;
    let mut m = MipModel::new(name);
    m.big_m = Some(big_m);
    let xs = add_decisions(&mut m, cp.dim_x());
    let c = add_core(&mut m, n, big_m);
    let p: Vec<usize> =
        (0..n).map(|i| m.add_continuous(format!("p{}", i + 1), -half, half, VarRole::Distance(i))).collect();

    let mut budget = vec![(c.t, cp.epsilon * nf)];
    budget.extend(c.s.iter().map(|&v| (v, -1.0)));
    let rhs = if radius_var {
        let r = m.add_continuous("theta", 0.0, half, VarRole::Radius);
        budget.push((r, -nf));
        m.set_objective(vec![(r, 1.0)]);
        m.sense = ObjSense::Maximize;
        0.0
    } else {
        cp.ball.radius * nf
    };
    m.add_row("budget", budget, Sense::Ge, rhs, RowRole::Budget);

    for i in 0..n {
        m.add_row(
            format!("disj{}", i + 1),
            vec![(p[i], 1.0), (c.q[i], big_m), (c.s[i], 1.0), (c.t, -1.0)],
            Sense::Ge,
            0.0,
            RowRole::Disjunct(i),
        );
    }
    add_caps(&mut m, &c, big_m);
    for (i, xi) in cp.ball.center.samples().iter().enumerate() {
        for (r, row) in j.rows.iter().enumerate() {
            // (b_m^T xi + b0_m - a_m^T x) / ||b_m||_* >= p_i
            let dn = dual_norm(cp.ball.norm, &row.b);
            let mut terms: Vec<(usize, f64)> = xs.iter().zip(&row.a).map(|(&v, &a)| (v, a / dn)).collect();
            terms.push((p[i], 1.0));
            m.add_row(
                format!("d{}_{}", i + 1, r + 1),
                terms,
                Sense::Le,
                (dot(&row.b, xi) + row.b0) / dn,
                RowRole::DistanceBound(r, i),
            );
        }
    }
    add_feasible_rows(&mut m, cp, &xs);
    if !radius_var {
        set_cost(&mut m, cp, &xs);
    }
    Ok(m)
}

/// Exact mixed-integer linear model for a joint condition with right-hand
/// side uncertainty. The norm only enters through the constants
/// `||b_m||_*`, so the model is linear for every norm.
pub fn build_joint_rhs_mip(cp: &ChanceProgram, big_m: f64) -> Result<MipModel> {
    cp.ball.require_positive_radius()?;
    joint_model(cp, big_m, "joint_exact", false)
}

/// The joint model with the radius as a decision, maximised: its optimum is
/// the largest radius for which the feasible set is nonempty.
pub fn build_max_radius_mip(cp: &ChanceProgram, big_m: f64) -> Result<MipModel> {
    joint_model(cp, big_m, "joint_max_radius", true)
}

/// Classical scenario model: every safety row must hold for all but
/// `floor(eps N)` samples, with non-strict rows.
pub fn build_classical_mip(cp: &ChanceProgram, big_m: f64) -> Result<MipModel> {
    require_big_m(big_m)?;
    let n = cp.n_samples();
    let mut m = MipModel::new("classical");
    m.big_m = Some(big_m);
    let xs = add_decisions(&mut m, cp.dim_x());
    let y: Vec<usize> = (0..n).map(|i| m.add_binary(format!("y{}", i + 1), VarRole::Skip(i))).collect();
    for (i, xi) in cp.ball.center.samples().iter().enumerate() {
        match &cp.safety {
            crate::model::Safety::Individual(s) => {
                // margin_i(x) + M y_i >= 0
                let (k, grad) = s.margin_affine(xi);
                let mut terms: Vec<(usize, f64)> = xs.iter().zip(&grad).map(|(&j, &g)| (j, g)).collect();
                terms.push((y[i], big_m));
                m.add_row(format!("sc{}", i + 1), terms, Sense::Ge, -k, RowRole::Scenario(i, 0));
            }
            crate::model::Safety::JointRhs(j) => {
                for (r, row) in j.rows.iter().enumerate() {
                    // a_m^T x - M y_i <= b_m^T xi + b0_m
                    let mut terms: Vec<(usize, f64)> = xs.iter().zip(&row.a).map(|(&v, &a)| (v, a)).collect();
                    terms.push((y[i], -big_m));
                    m.add_row(
                        format!("sc{}_{}", i + 1, r + 1),
                        terms,
                        Sense::Le,
                        dot(&row.b, xi) + row.b0,
                        RowRole::Scenario(i, r),
                    );
                }
            }
        }
    }
    let skips = (cp.epsilon * n as f64 + 1e-9).floor();
    m.add_row("skips", y.iter().map(|&v| (v, 1.0)).collect(), Sense::Le, skips, RowRole::SkipBudget);
    add_feasible_rows(&mut m, cp, &xs);
    set_cost(&mut m, cp, &xs);
    Ok(m)
}
