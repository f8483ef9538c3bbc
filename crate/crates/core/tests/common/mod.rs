#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wdrcc::model::{IndividualSafety, JointRhsSafety, JointRow, Polytope, TrainingSet};
use wdrcc::reform::ObjSense;
use wdrcc::{ChanceProgram, MipModel, Norm, Safety, Sense, VarKind, WassersteinBall};

/// Reference LP result in the model's sense.
#[derive(Debug, PartialEq)]
pub enum Reference {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

pub fn reference_lp(m: &MipModel) -> Reference {
    let sign = if m.sense == ObjSense::Minimize { 1.0 } else { -1.0 };
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
        // unbounded problems can also come back as a NaN or infinite objective
        Ok(s) if !s.objective().is_finite() => Reference::Unbounded,
        Ok(s) => Reference::Optimal(sign * (s.objective() + shift)),
        Err(minilp::Error::Infeasible) => Reference::Infeasible,
        Err(minilp::Error::Unbounded) => Reference::Unbounded,
    }
}

fn vec_in(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

fn nonzero(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = vec_in(rng, n);
        if v.iter().any(|x| x.abs() >= 0.2) {
            return v;
        }
    }
}

/// Small random program on `[0, 2]^2`: individual ones have `K = 3` and a
/// polyhedral norm, joint ones `K = 2` and two or three rows.
pub fn program(seed: u64, joint: bool, n: usize) -> ChanceProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = rng.gen_range(0.02..=0.3);
    let eps = [0.1, 0.2, 0.3][rng.gen_range(0..3)];
    let c = vec_in(&mut rng, 2);
    let feasible = Polytope::boxed(&[0.0; 2], &[2.0; 2]).unwrap();
    let k = if joint { 2 } else { 3 };
    let norm = match rng.gen_range(0..if joint { 3 } else { 2 }) {
        0 => Norm::L1,
        1 => Norm::Linf,
        _ => Norm::L2,
    };
    let ts = TrainingSet::new((0..n).map(|_| vec_in(&mut rng, k)).collect()).unwrap();
    let safety = if joint {
        let m = rng.gen_range(2..=3);
        let rows = (0..m)
            .map(|_| JointRow { a: vec_in(&mut rng, 2), b: nonzero(&mut rng, k), b0: rng.gen_range(1.0..=2.0) })
            .collect();
        Safety::JointRhs(JointRhsSafety::new(rows).unwrap())
    } else {
        Safety::Individual(IndividualSafety {
            a_mat: (0..k).map(|_| vec_in(&mut rng, 2)).collect(),
            a: vec_in(&mut rng, 2),
            b: nonzero(&mut rng, k),
            b0: rng.gen_range(1.0..=2.0),
        })
    };
    ChanceProgram::new(c, feasible, safety, eps, WassersteinBall::new(theta, norm, ts).unwrap()).unwrap()
}
