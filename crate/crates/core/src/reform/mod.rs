//! Solver-agnostic models: exact mixed-integer reformulations, convex inner
//! approximations, Bonferroni thresholds and the classical scenario model.

mod approx;
mod bonferroni;
mod exact;
mod mip;

pub use approx::{build_cvar_lp_individual, build_cvar_lp_joint, build_kappa_model};
pub use bonferroni::{
    bonferroni_threshold, bonferroni_threshold_scan, build_bonferroni_lp, risk_splits, BonferroniPlan,
};
pub use exact::{build_classical_mip, build_individual_mip, build_joint_rhs_mip, build_max_radius_mip};
pub use mip::*;

use crate::error::{Error, Result};
use crate::geometry::dual_norm;
use crate::model::{dot, Bounds, ChanceProgram, Norm, Safety};

/// Range of `constant + grad^T x` over the box.
pub(crate) fn interval(constant: f64, grad: &[f64], b: &Bounds) -> (f64, f64) {
    let (mut lo, mut hi) = (constant, constant);
    for ((g, l), h) in grad.iter().zip(&b.lo).zip(&b.hi) {
        let (u, v) = (g * l, g * h);
        lo += u.min(v);
        hi += u.max(v);
    }
    (lo, hi)
}

/// Largest magnitude over the box and the samples of the quantity each
/// disjunction compares against `t - s_i`: the margin for individual
/// conditions, the normalised row slack for joint ones.
fn disjunct_magnitude(cp: &ChanceProgram, b: &Bounds) -> f64 {
    let mut k: f64 = 0.0;
    for xi in cp.ball.center.samples() {
        match &cp.safety {
            Safety::Individual(s) => {
                let (c, g) = s.margin_affine(xi);
                let (lo, hi) = interval(c, &g, b);
                k = k.max(lo.abs()).max(hi.abs());
            }
            Safety::JointRhs(j) => {
                for r in &j.rows {
                    let dn = dual_norm(cp.ball.norm, &r.b);
                    let neg: Vec<f64> = r.a.iter().map(|v| -v).collect();
                    let (lo, hi) = interval(dot(&r.b, xi) + r.b0, &neg, b);
                    k = k.max(lo.abs() / dn).max(hi.abs() / dn);
                }
            }
        }
    }
    k
}

fn require_finite_box(b: &Bounds) -> Result<()> {
    for (j, (l, h)) in b.lo.iter().zip(&b.hi).enumerate() {
        if !l.is_finite() || !h.is_finite() {
            return Err(Error::Unbounded { coordinate: j + 1 });
        }
    }
    Ok(())
}

/// Big-M constant for the exact reformulations over the box `b`.
///
/// With `K` the largest magnitude of any disjunct expression over the box,
/// an optimal threshold `t` of the partial-sum program is one of the clamped
/// expressions, so `t, s_i` can be confined to `[0, K]` and every disjunction
/// is slack once `M >= 2K`. The returned constant doubles that, and the
/// builders bound `t` and `s_i` by `M / 2`.
pub fn derive_big_m(cp: &ChanceProgram, b: &Bounds) -> Result<f64> {
    require_finite_box(b)?;
    let k = disjunct_magnitude(cp, b);
    Ok(2.0 * 2.0 * k.max(1e-6))
}

/// Big-M constant for the classical scenario model: twice the largest
/// violation any scenario row can have over the box.
pub fn derive_classical_big_m(cp: &ChanceProgram, b: &Bounds) -> Result<f64> {
    require_finite_box(b)?;
    let mut v: f64 = 0.0;
    for xi in cp.ball.center.samples() {
        match &cp.safety {
            Safety::Individual(s) => {
                let (c, g) = s.margin_affine(xi);
                v = v.max(-interval(c, &g, b).0);
            }
            Safety::JointRhs(j) => {
                for r in &j.rows {
                    v = v.max(interval(-dot(&r.b, xi) - r.b0, &r.a, b).1);
                }
            }
        }
    }
    Ok(2.0 * v.max(0.5))
}

pub(crate) fn add_decisions(m: &mut MipModel, l: usize) -> Vec<usize> {
    (0..l)
        .map(|j| m.add_continuous(format!("x{}", j + 1), f64::NEG_INFINITY, f64::INFINITY, VarRole::Decision(j)))
        .collect()
}

pub(crate) fn add_feasible_rows(m: &mut MipModel, cp: &ChanceProgram, xs: &[usize]) {
    for (r, (row, h)) in cp.feasible.g.iter().zip(&cp.feasible.h).enumerate() {
        m.add_row(
            format!("G{}", r + 1),
            xs.iter().zip(row).map(|(&j, &c)| (j, c)).collect(),
            Sense::Le,
            *h,
            RowRole::Feasible,
        );
    }
}

pub(crate) fn set_cost(m: &mut MipModel, cp: &ChanceProgram, xs: &[usize]) {
    m.set_objective(xs.iter().zip(&cp.objective).filter(|(_, c)| **c != 0.0).map(|(&j, &c)| (j, c)).collect());
}

/// Constrain `head >= ||b - A^T x||_*` with explicit auxiliary rows.
/// Returns an error for norms whose dual is not polyhedral or quadratic.
pub(crate) fn dual_norm_epigraph(
    m: &mut MipModel,
    s: &crate::model::IndividualSafety,
    xs: &[usize],
    norm: Norm,
    head: usize,
) -> Result<()> {
    let k = s.b.len();
    // v_k = b_k - sum_l A[k][l] x_l; a row "coef * head + sign * (A x)_k (sense) sign * b_k".
    let ax = |kk: usize, sign: f64| -> Vec<(usize, f64)> {
        xs.iter().zip(&s.a_mat[kk]).map(|(&j, &c)| (j, sign * c)).collect()
    };
    match norm {
        Norm::L1 => {
            // dual is the inf-norm: head >= +-v_k
            for kk in 0..k {
                let mut plus = vec![(head, 1.0)];
                plus.extend(ax(kk, 1.0));
                m.add_row(format!("dn{}p", kk + 1), plus, Sense::Ge, s.b[kk], RowRole::DualNorm);
                let mut minus = vec![(head, 1.0)];
                minus.extend(ax(kk, -1.0));
                m.add_row(format!("dn{}m", kk + 1), minus, Sense::Ge, -s.b[kk], RowRole::DualNorm);
            }
        }
        Norm::Linf => {
            // dual is the 1-norm: u_k >= +-v_k, head >= sum u_k
            let us: Vec<usize> = (0..k)
                .map(|kk| m.add_continuous(format!("u{}", kk + 1), 0.0, f64::INFINITY, VarRole::NormComponent(kk)))
                .collect();
            for kk in 0..k {
                let mut plus = vec![(us[kk], 1.0)];
                plus.extend(ax(kk, 1.0));
                m.add_row(format!("dn{}p", kk + 1), plus, Sense::Ge, s.b[kk], RowRole::DualNorm);
                let mut minus = vec![(us[kk], 1.0)];
                minus.extend(ax(kk, -1.0));
                m.add_row(format!("dn{}m", kk + 1), minus, Sense::Ge, -s.b[kk], RowRole::DualNorm);
            }
            let mut sum = vec![(head, 1.0)];
            sum.extend(us.iter().map(|&u| (u, -1.0)));
            m.add_row("dnsum", sum, Sense::Ge, 0.0, RowRole::DualNorm);
        }
        Norm::L2 => {
            let vs: Vec<usize> = (0..k)
                .map(|kk| {
                    m.add_continuous(format!("v{}", kk + 1), f64::NEG_INFINITY, f64::INFINITY, VarRole::ConeMember(kk))
                })
                .collect();
            for kk in 0..k {
                let mut row = vec![(vs[kk], 1.0)];
                row.extend(ax(kk, 1.0));
                m.add_row(format!("cl{}", kk + 1), row, Sense::Eq, s.b[kk], RowRole::ConeLink);
            }
            m.add_cone("dncone", head, vs);
        }
        Norm::Lp(_) => return Err(Error::ExportOnlyNorm(norm.tag())),
    }
    Ok(())
}
