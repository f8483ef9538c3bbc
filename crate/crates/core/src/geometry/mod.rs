//! Dual norms and closed-form point-to-halfspace distances.
//!
//! A [`Halfspace`] is the closed set `{xi : level >= normal^T xi}`. The
//! distance of a point to it in the norm `||.||` is
//! `(normal^T xi - level)^+ / ||normal||_*`, and the distance to a union of
//! halfspaces is the minimum over the members. Minima over members break
//! ties toward the lowest index.

use crate::error::{Error, Result};
use crate::model::{dot, pnorm, Norm};

#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    normal: Vec<f64>,
    level: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, level: f64) -> Result<Self> {
        if normal.iter().all(|v| *v == 0.0) {
            return Err(Error::Invalid("halfspace normal must be nonzero".into()));
        }
        Ok(Self { normal, level })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        dot(&self.normal, xi) <= self.level
    }

    /// `normal^T xi - level`; positive outside the halfspace.
    pub fn gap(&self, xi: &[f64]) -> f64 {
        dot(&self.normal, xi) - self.level
    }
}

/// `||v||_*` for the dual of `norm`.
pub fn dual_norm(norm: Norm, v: &[f64]) -> f64 {
    match norm {
        Norm::L1 => Norm::Linf.eval(v),
        Norm::Linf => Norm::L1.eval(v),
        Norm::L2 => Norm::L2.eval(v),
        Norm::Lp(p) => pnorm(v, p / (p - 1.0)),
    }
}

pub fn dist_to_halfspace(xi: &[f64], h: &Halfspace, norm: Norm) -> f64 {
    signed_dist(xi, h, norm).max(0.0)
}

/// Distance to `H_1 u ... u H_M`; zero when `xi` lies in any member.
pub fn dist_to_union(xi: &[f64], hs: &[Halfspace], norm: Norm) -> f64 {
    min_signed_dist(xi, hs, norm).max(0.0)
}

/// Signed distance to a single halfspace: positive outside, minus the
/// depth of penetration inside.
pub fn signed_dist(xi: &[f64], h: &Halfspace, norm: Norm) -> f64 {
    h.gap(xi) / dual_norm(norm, &h.normal)
}

/// Minimum over members of the single-halfspace signed distances.
pub fn min_signed_dist(xi: &[f64], hs: &[Halfspace], norm: Norm) -> f64 {
    nearest(xi, hs, norm).1
}

/// Index of the member minimising the signed distance, and that distance.
pub fn nearest(xi: &[f64], hs: &[Halfspace], norm: Norm) -> (usize, f64) {
    assert!(!hs.is_empty(), "union of halfspaces must be nonempty");
    let mut best = (0, f64::INFINITY);
    for (m, h) in hs.iter().enumerate() {
        let d = signed_dist(xi, h, norm);
        if d < best.1 {
            best = (m, d);
        }
    }
    best
}

/// A closest point of the halfspace to `xi` in the given norm. Points inside
/// the halfspace are returned unchanged.
///
/// The 1-norm moves the single coordinate with the largest `|normal_k|`
/// (lowest index on ties), the inf-norm moves every coordinate uniformly along
/// `sign(normal)`, and the p-norms move along the Hölder-dual direction
/// (which for `p = 2` is the Euclidean foot point).
pub fn project(xi: &[f64], h: &Halfspace, norm: Norm) -> Vec<f64> {
    let gap = h.gap(xi);
    let mut out = xi.to_vec();
    if gap <= 0.0 {
        return out;
    }
    let b = &h.normal;
    match norm {
        Norm::L1 => {
            let mut k = 0;
            for (j, v) in b.iter().enumerate() {
                if v.abs() > b[k].abs() {
                    k = j;
                }
            }
            out[k] -= gap / b[k];
        }
        Norm::Linf => {
            let step = gap / Norm::L1.eval(b);
            for (o, v) in out.iter_mut().zip(b) {
                *o -= step * v.signum() * f64::from(*v != 0.0);
            }
        }
        Norm::L2 => {
            let sq: f64 = b.iter().map(|v| v * v).sum();
            for (o, v) in out.iter_mut().zip(b) {
                *o -= gap * v / sq;
            }
        }
        Norm::Lp(p) => {
            let q = p / (p - 1.0);
            let bq = pnorm(b, q);
            // u_k = sign(b_k) |b_k|^(q-1) / ||b||_q^(q-1) has ||u||_p = 1 and b^T u = ||b||_q.
            for (o, v) in out.iter_mut().zip(b) {
                let u = v.signum() * (v.abs() / bq).powf(q - 1.0);
                *o -= gap / bq * u;
            }
        }
    }
    out
}
