use super::{add_decisions, add_feasible_rows, dual_norm_epigraph, set_cost};
use super::{MipModel, RowRole, Sense, VarRole};
use crate::error::{Error, Result};
use crate::geometry::dual_norm;
use crate::model::{dot, ChanceProgram, Safety};
use crate::oracle::joint_weight_scales;

/// Convex model with every disjunction replaced by
/// `kappa_i * (expression) >= t - s_i`.
pub fn build_kappa_model(cp: &ChanceProgram, kappa: &[f64]) -> Result<MipModel> {
    cp.ball.require_positive_radius()?;
    let n = cp.n_samples();
    if kappa.len() != n {
        return Err(Error::Dimension(format!("kappa has length {}, expected N = {n}", kappa.len())));
    }
    if kappa.iter().any(|k| !(0.0..=1.0).contains(k)) {
        return Err(Error::Invalid("kappa entries must lie in [0, 1]".into()));
    }
    let nf = n as f64;
    let mut m = MipModel::new("kappa");
    let xs = add_decisions(&mut m, cp.dim_x());
    let s: Vec<usize> =
        (0..n).map(|i| m.add_continuous(format!("s{}", i + 1), 0.0, f64::INFINITY, VarRole::Slack(i))).collect();
    let t = m.add_continuous("t", f64::NEG_INFINITY, f64::INFINITY, VarRole::Threshold);
    let mut budget = vec![(t, cp.epsilon * nf)];
    budget.extend(s.iter().map(|&j| (j, -1.0)));
    let theta_n = cp.ball.radius * nf;

    match &cp.safety {
        Safety::Individual(sf) => {
            let mut rhs = 0.0;
            if sf.has_lhs_uncertainty() {
                let nu = m.add_continuous("nu", 0.0, f64::INFINITY, VarRole::DualNorm);
                dual_norm_epigraph(&mut m, sf, &xs, cp.ball.norm, nu)?;
                budget.push((nu, -theta_n));
            } else {
                rhs = theta_n * dual_norm(cp.ball.norm, &sf.b);
            }
            m.add_row("budget", budget, Sense::Ge, rhs, RowRole::Budget);
            for (i, xi) in cp.ball.center.samples().iter().enumerate() {
                let (k, grad) = sf.margin_affine(xi);
                let ki = kappa[i];
                let mut terms: Vec<(usize, f64)> = xs.iter().zip(&grad).map(|(&j, &g)| (j, ki * g)).collect();
                terms.extend([(s[i], 1.0), (t, -1.0)]);
                m.add_row(format!("k{}", i + 1), terms, Sense::Ge, -ki * k, RowRole::KappaSlot(i, 0));
            }
        }
        Safety::JointRhs(j) => {
            m.add_row("budget", budget, Sense::Ge, theta_n, RowRole::Budget);
            for (i, xi) in cp.ball.center.samples().iter().enumerate() {
                let ki = kappa[i];
                for (r, row) in j.rows.iter().enumerate() {
                    // kappa_i (b^T xi + b0 - a^T x) / ||b||_* >= t - s_i
                    let dn = dual_norm(cp.ball.norm, &row.b);
                    let mut terms: Vec<(usize, f64)> =
                        xs.iter().zip(&row.a).map(|(&v, &a)| (v, -ki * a / dn)).collect();
                    terms.extend([(s[i], 1.0), (t, -1.0)]);
                    m.add_row(
                        format!("k{}_{}", i + 1, r + 1),
                        terms,
                        Sense::Ge,
                        -ki * (dot(&row.b, xi) + row.b0) / dn,
                        RowRole::KappaSlot(i, r),
                    );
                }
            }
        }
    }
    add_feasible_rows(&mut m, cp, &xs);
    set_cost(&mut m, cp, &xs);
    Ok(m)
}

struct Cvar {
    alpha: Vec<usize>,
    tau: usize,
}

fn add_cvar_vars(m: &mut MipModel, n: usize) -> Cvar {
    let alpha = (0..n)
        .map(|i| m.add_continuous(format!("alpha{}", i + 1), 0.0, f64::INFINITY, VarRole::CvarExcess(i)))
        .collect();
    let tau = m.add_continuous("tau", f64::NEG_INFINITY, f64::INFINITY, VarRole::CvarTau);
    Cvar { alpha, tau }
}

/// Worst-case CVaR model for an individual condition in `(alpha, beta, tau)`:
/// `eps tau + theta beta + mean(alpha) <= 0`,
/// `alpha_i >= -margin_i(x) - tau`, `beta >= ||A^T x - b||_*`.
pub fn build_cvar_lp_individual(cp: &ChanceProgram) -> Result<MipModel> {
    let sf = cp.individual().ok_or_else(|| Error::Invalid("model needs an individual safety condition".into()))?;
    cp.ball.require_positive_radius()?;
    let n = cp.n_samples();
    let nf = n as f64;
    let mut m = MipModel::new("cvar_individual");
    let xs = add_decisions(&mut m, cp.dim_x());
    let v = add_cvar_vars(&mut m, n);
    let beta = if sf.has_lhs_uncertainty() {
        let beta = m.add_continuous("beta", 0.0, f64::INFINITY, VarRole::CvarBeta);
        dual_norm_epigraph(&mut m, sf, &xs, cp.ball.norm, beta)?;
        beta
    } else {
        let dn = dual_norm(cp.ball.norm, &sf.b);
        m.add_continuous("beta", dn, f64::INFINITY, VarRole::CvarBeta)
    };
    let mut budget = vec![(v.tau, cp.epsilon), (beta, cp.ball.radius)];
    budget.extend(v.alpha.iter().map(|&a| (a, 1.0 / nf)));
    m.add_row("cvar", budget, Sense::Le, 0.0, RowRole::CvarBudget);
    for (i, xi) in cp.ball.center.samples().iter().enumerate() {
        let (k, grad) = sf.margin_affine(xi);
        let mut terms: Vec<(usize, f64)> = xs.iter().zip(&grad).map(|(&j, &g)| (j, g)).collect();
        terms.extend([(v.alpha[i], 1.0), (v.tau, 1.0)]);
        m.add_row(format!("ex{}", i + 1), terms, Sense::Ge, -k, RowRole::CvarExcess(i, 0));
    }
    add_feasible_rows(&mut m, cp, &xs);
    set_cost(&mut m, cp, &xs);
    Ok(m)
}

/// Worst-case CVaR model for a joint condition with scaling weights `w` in
/// the open simplex; `beta = max_m w_m ||b_m||_*` is substituted directly.
pub fn build_cvar_lp_joint(cp: &ChanceProgram, w: &[f64]) -> Result<MipModel> {
    let j = cp.joint().ok_or_else(|| Error::Invalid("model needs a joint right-hand side safety condition".into()))?;
    cp.ball.require_positive_radius()?;
    joint_weight_scales(j, cp.ball.norm, w)?;
    let n = cp.n_samples();
    let nf = n as f64;
    let beta = j.rows.iter().zip(w).map(|(r, wm)| wm * dual_norm(cp.ball.norm, &r.b)).fold(0.0, f64::max);
    let mut m = MipModel::new("cvar_joint");
    let xs = add_decisions(&mut m, cp.dim_x());
    let v = add_cvar_vars(&mut m, n);
    let mut budget = vec![(v.tau, cp.epsilon)];
    budget.extend(v.alpha.iter().map(|&a| (a, 1.0 / nf)));
    m.add_row("cvar", budget, Sense::Le, -cp.ball.radius * beta, RowRole::CvarBudget);
    for (i, xi) in cp.ball.center.samples().iter().enumerate() {
        for (r, (row, wm)) in j.rows.iter().zip(w).enumerate() {
            // alpha_i + tau - w_m a_m^T x >= -w_m (b_m^T xi + b0_m)
            let mut terms: Vec<(usize, f64)> = xs.iter().zip(&row.a).map(|(&x, &a)| (x, -wm * a)).collect();
            terms.extend([(v.alpha[i], 1.0), (v.tau, 1.0)]);
            m.add_row(
                format!("ex{}_{}", i + 1, r + 1),
                terms,
                Sense::Ge,
                -wm * (dot(&row.b, xi) + row.b0),
                RowRole::CvarExcess(i, r),
            );
        }
    }
    add_feasible_rows(&mut m, cp, &xs);
    set_cost(&mut m, cp, &xs);
    Ok(m)
}
