//! Seeded random instances shared by several criteria.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wdrcc::model::{IndividualSafety, JointRhsSafety, JointRow, Polytope, TrainingSet};
use wdrcc::{ChanceProgram, Norm, Safety, WassersteinBall};

pub fn rng(tag: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(tag.wrapping_mul(0x9e37_79b9).wrapping_add(i as u64))
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// A vector with at least one entry of magnitude >= 0.2.
pub fn nonzero_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = uniform_vec(rng, n, -1.0, 1.0);
        if v.iter().any(|x| x.abs() >= 0.2) {
            return v;
        }
    }
}

pub fn samples(rng: &mut ChaCha8Rng, n: usize, k: usize) -> TrainingSet {
    TrainingSet::new((0..n).map(|_| uniform_vec(rng, k, -1.0, 1.0)).collect()).unwrap()
}

pub fn pick_norm(rng: &mut ChaCha8Rng, polyhedral_only: bool) -> Norm {
    let n = if polyhedral_only { 2 } else { 3 };
    match rng.gen_range(0..n) {
        0 => Norm::L1,
        1 => Norm::Linf,
        _ => Norm::L2,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Class {
    Individual,
    Joint,
}

/// `L = 2` decisions on `[0, 2]^2`. Individual instances use `K = 3`, so
/// that `b - A^T x = 0` has no solution for generic data; joint instances
/// use `K = 2` and `M` in `{2, 3}`. Individual norms are polyhedral.
pub fn program(rng: &mut ChaCha8Rng, class: Class, n: usize, eps: f64, theta: f64) -> ChanceProgram {
    let l = 2;
    let c = uniform_vec(rng, l, -1.0, 1.0);
    let feasible = Polytope::boxed(&[0.0; 2], &[2.0; 2]).unwrap();
    match class {
        Class::Individual => {
            let k = 3;
            let norm = pick_norm(rng, true);
            let ts = samples(rng, n, k);
            let s = IndividualSafety {
                a_mat: (0..k).map(|_| uniform_vec(rng, l, -1.0, 1.0)).collect(),
                a: uniform_vec(rng, l, -1.0, 1.0),
                b: nonzero_vec(rng, k),
                b0: rng.gen_range(1.0..=2.0),
            };
            let ball = WassersteinBall::new(theta, norm, ts).unwrap();
            ChanceProgram::new(c, feasible, Safety::Individual(s), eps, ball).unwrap()
        }
        Class::Joint => {
            let k = 2;
            let m = rng.gen_range(2..=3);
            let norm = pick_norm(rng, false);
            let ts = samples(rng, n, k);
            let rows = (0..m)
                .map(|_| JointRow {
                    a: uniform_vec(rng, l, -1.0, 1.0),
                    b: nonzero_vec(rng, k),
                    b0: rng.gen_range(1.0..=2.0),
                })
                .collect();
            let ball = WassersteinBall::new(theta, norm, ts).unwrap();
            ChanceProgram::new(c, feasible, Safety::JointRhs(JointRhsSafety::new(rows).unwrap()), eps, ball).unwrap()
        }
    }
}

/// Random radius and risk level for the generic suites.
pub fn theta_eps(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let theta = rng.gen_range(0.02..=0.3);
    let eps = [0.1, 0.15, 0.2, 0.3][rng.gen_range(0..4)];
    (theta, eps)
}
