//! Reference computations that do not go through the library's solvers or
//! distance formulas.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use wdrcc::geometry::Halfspace;
use wdrcc::model::TrainingSet;
use wdrcc::{MipModel, Norm, Sense, VarKind};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Optimal value of the LP relaxation of `m` in the model's sense, or
/// `None` when it is infeasible.
pub fn minilp_value(m: &MipModel) -> Option<f64> {
    assert!(m.cones.is_empty(), "cone rows have no LP counterpart");
    let sign = match m.sense {
        wdrcc::reform::ObjSense::Minimize => 1.0,
        wdrcc::reform::ObjSense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; m.n_vars()];
    for &(j, c) in &m.objective {
        cost[j] += sign * c;
    }
    // Every variable is rewritten over nonnegative ones (`lo + y`, `hi - y`
    // or `y+ - y-`); the reference solver mishandles free columns.
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let mut shift = 0.0;
    let cols: Vec<(f64, Vec<(minilp::Variable, f64)>)> = m
        .vars
        .iter()
        .zip(&cost)
        .map(|(v, &c)| {
            let (lo, hi) = match v.kind {
                VarKind::Binary => (v.lower.max(0.0), v.upper.min(1.0)),
                VarKind::Continuous => (v.lower, v.upper),
            };
            if lo.is_finite() {
                shift += c * lo;
                (lo, vec![(p.add_var(c, (0.0, hi - lo)), 1.0)])
            } else if hi.is_finite() {
                shift += c * hi;
                (hi, vec![(p.add_var(-c, (0.0, f64::INFINITY)), -1.0)])
            } else {
                let up = p.add_var(c, (0.0, f64::INFINITY));
                let down = p.add_var(-c, (0.0, f64::INFINITY));
                (0.0, vec![(up, 1.0), (down, -1.0)])
            }
        })
        .collect();
    for r in &m.rows {
        let mut terms = Vec::new();
        let mut rhs = r.rhs;
        for &(j, c) in &r.terms {
            rhs -= c * cols[j].0;
            terms.extend(cols[j].1.iter().map(|&(v, s)| (v, s * c)));
        }
        let op = match r.sense {
            Sense::Le => ComparisonOp::Le,
            Sense::Ge => ComparisonOp::Ge,
            Sense::Eq => ComparisonOp::Eq,
        };
        p.add_constraint(&terms[..], op, rhs);
    }
    match p.solve() {
        Ok(s) if s.objective().is_finite() => Some(sign * (s.objective() + shift)),
        Err(minilp::Error::Infeasible) => None,
        Ok(s) => panic!("reference LP ended with objective {}", s.objective()),
        Err(e) => panic!("reference LP failed: {e:?}"),
    }
}

/// Best objective over every binary pattern of `m`, each pattern solved as an
/// LP with the binaries fixed.
pub fn enumerate_patterns(m: &MipModel) -> Option<f64> {
    let n = m.binaries().len();
    assert!(n <= 16, "enumeration over {n} binaries");
    let better = |a: f64, b: f64| match m.sense {
        wdrcc::reform::ObjSense::Minimize => a < b,
        wdrcc::reform::ObjSense::Maximize => a > b,
    };
    let mut best: Option<f64> = None;
    for code in 0u32..(1 << n) {
        let q: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
        if let Some(v) = minilp_value(&m.with_binaries_fixed(&q)) {
            if best.map_or(true, |b| better(v, b)) {
                best = Some(v);
            }
        }
    }
    best
}

/// Points of `{normal^T z <= level}` that a nearest-point move from `xi`
/// can end at: one per coordinate for the 1-norm (the vertices of the ball),
/// the sign direction for the max-norm, and the normal direction for the
/// Euclidean norm. Returns `(point, cost)` with the cost measured on the
/// displacement itself.
pub fn landing_points(xi: &[f64], h: &Halfspace, norm: Norm) -> Vec<(Vec<f64>, f64)> {
    let n = h.normal();
    let gap = dot(n, xi) - h.level();
    if gap <= 0.0 {
        return vec![(xi.to_vec(), 0.0)];
    }
    let mut out = Vec::new();
    match norm {
        Norm::L1 => {
            for k in 0..n.len() {
                if n[k] != 0.0 {
                    let mut z = xi.to_vec();
                    z[k] -= gap / n[k];
                    out.push(z);
                }
            }
        }
        Norm::Linf => {
            let r = gap / n.iter().map(|v| v.abs()).sum::<f64>();
            out.push(xi.iter().zip(n).map(|(x, v)| x - r * v.signum() * (*v != 0.0) as u8 as f64).collect());
        }
        Norm::L2 => {
            let s = gap / dot(n, n);
            out.push(xi.iter().zip(n).map(|(x, v)| x - s * v).collect());
        }
        Norm::Lp(_) => unreachable!("not used by the suites"),
    }
    out.into_iter()
        .map(|z| {
            let d: Vec<f64> = z.iter().zip(xi).map(|(a, b)| a - b).collect();
            let cost = norm.eval(&d);
            (z, cost)
        })
        .collect()
}

/// Largest mass a transport plan of cost at most `theta` out of the
/// empirical distribution can put on the union of `hs`, as an explicit LP
/// over candidate landing points.
pub fn transport_probability(ts: &TrainingSet, hs: &[Halfspace], theta: f64, norm: Norm) -> f64 {
    let n = ts.len();
    let w = 1.0 / n as f64;
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let mut budget = Vec::new();
    for xi in ts.samples() {
        let inside = hs.iter().any(|h| h.contains(xi));
        let stay = p.add_var(if inside { 1.0 } else { 0.0 }, (0.0, w));
        let mut supply = vec![(stay, 1.0)];
        for h in hs {
            for (z, cost) in landing_points(xi, h, norm) {
                assert!(dot(h.normal(), &z) - h.level() <= 1e-12 * (1.0 + h.level().abs()));
                let v = p.add_var(1.0, (0.0, w));
                supply.push((v, 1.0));
                if cost > 0.0 {
                    budget.push((v, cost));
                }
            }
        }
        p.add_constraint(&supply[..], ComparisonOp::Eq, w);
    }
    if !budget.is_empty() {
        p.add_constraint(&budget[..], ComparisonOp::Le, theta);
    }
    p.solve().expect("transport LP is always feasible").objective()
}

fn partial(sorted: &[f64], len: f64) -> f64 {
    let whole = len.floor() as usize;
    let mut s: f64 = sorted[..whole].iter().sum();
    if len > whole as f64 {
        s += (len - whole as f64) * sorted[whole];
    }
    s
}

/// Bonferroni threshold for one row by a scan over breakpoints: with
/// `u_i = b^T xi_i / ||b||_*`, the map `g(v) = mean partial sum of (u - v)^+`
/// is piecewise linear with kinks at the `u_i` and slope `-eps` left of all
/// of them, so the largest `v` with `g(v) >= theta` is found by locating the
/// segment and interpolating. Returns `-v ||b||_*`.
pub fn threshold_by_breakpoints(b: &[f64], ts: &TrainingSet, theta: f64, norm: Norm, eps: f64) -> f64 {
    let dn = match norm {
        Norm::L1 => b.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        Norm::Linf => b.iter().map(|v| v.abs()).sum(),
        Norm::L2 => dot(b, b).sqrt(),
        Norm::Lp(_) => unreachable!(),
    };
    let n = ts.len() as f64;
    let mut u: Vec<f64> = ts.samples().iter().map(|xi| dot(b, xi) / dn).collect();
    u.sort_by(f64::total_cmp);
    let g = |v: f64| {
        let d: Vec<f64> = u.iter().map(|x| (x - v).max(0.0)).collect();
        partial(&d, eps * n) / n
    };
    let gs: Vec<f64> = u.iter().map(|&v| g(v)).collect();
    let v = if gs[0] < theta {
        u[0] - (theta - gs[0]) / eps
    } else {
        let k = (0..u.len()).rev().find(|&k| gs[k] >= theta).unwrap();
        let (v0, v1) = (u[k], u[k + 1]);
        if gs[k] == gs[k + 1] {
            v0
        } else {
            v0 + (gs[k] - theta) / (gs[k] - gs[k + 1]) * (v1 - v0)
        }
    };
    -v * dn
}
