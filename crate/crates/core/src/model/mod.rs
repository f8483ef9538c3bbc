//! Problem data: training samples, Wasserstein balls, feasible polytopes and
//! the two supported safety-set families.

mod json;

pub use json::{parse_problem, to_json};

use crate::error::{Error, Result};
use crate::geometry::Halfspace;
use crate::reform::{MipModel, RowRole, Sense, VarRole};
use crate::solve::{solve_lp, SolveOptions, Status};

/// Norm defining the transport cost of the Wasserstein distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    L1,
    L2,
    Linf,
    /// General p-norm, `p > 1`.
    Lp(f64),
}

impl Norm {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::Norm(format!("p-norm requires finite p > 1, got {p}")));
        }
        Ok(Norm::Lp(p))
    }

    /// The norm itself, `||v||`.
    pub fn eval(&self, v: &[f64]) -> f64 {
        match *self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Norm::Lp(p) => pnorm(v, p),
        }
    }

    /// Conjugate exponent of the dual norm (`1/p + 1/q = 1`), with the
    /// conventions `q = inf` for `p = 1` and `q = 1` for `p = inf`.
    pub fn dual_exponent(&self) -> f64 {
        match *self {
            Norm::L1 => f64::INFINITY,
            Norm::L2 => 2.0,
            Norm::Linf => 1.0,
            Norm::Lp(p) => p / (p - 1.0),
        }
    }

    /// Short lowercase tag used in file formats and diagnostics.
    pub fn tag(&self) -> String {
        match *self {
            Norm::L1 => "l1".into(),
            Norm::L2 => "l2".into(),
            Norm::Linf => "linf".into(),
            Norm::Lp(p) => format!("lp({p})"),
        }
    }

    /// Whether the dual-norm epigraph is polyhedral.
    pub fn is_polyhedral(&self) -> bool {
        matches!(self, Norm::L1 | Norm::Linf)
    }
}

pub(crate) fn pnorm(v: &[f64], p: f64) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// The `N` training samples defining the empirical distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    samples: Vec<Vec<f64>>,
}

impl TrainingSet {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::Dimension("training set needs at least one sample".into()));
        };
        let k = first.len();
        if k == 0 {
            return Err(Error::Dimension("samples must have dimension K >= 1".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.len() != k {
                return Err(Error::Dimension(format!("sample {} has dimension {}, expected {k}", i + 1, s.len())));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!("sample {} has a non-finite entry", i + 1)));
            }
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.samples[i]
    }

    /// Sub-sample by index (used for cross-validation folds).
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        Self::new(idx.iter().map(|&i| self.samples[i].clone()).collect())
    }
}

/// Type-1 Wasserstein ball of radius `theta` around the empirical distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct WassersteinBall {
    pub radius: f64,
    pub norm: Norm,
    pub center: TrainingSet,
}

impl WassersteinBall {
    pub fn new(radius: f64, norm: Norm, center: TrainingSet) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::Radius(radius));
        }
        Ok(Self { radius, norm, center })
    }

    /// Exact reformulations break down at `theta = 0`.
    pub fn require_positive_radius(&self) -> Result<()> {
        if self.radius > 0.0 {
            Ok(())
        } else {
            Err(Error::ZeroRadius)
        }
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(radius, self.norm, self.center.clone())
    }
}

/// Coordinate-wise bounds of a polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
    }
}

/// `{x in R^L : G x <= h}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    dim: usize,
}

impl Polytope {
    pub fn new(g: Vec<Vec<f64>>, h: Vec<f64>, dim: usize) -> Result<Self> {
        if g.len() != h.len() {
            return Err(Error::Dimension(format!("polytope has {} rows in G but {} entries in h", g.len(), h.len())));
        }
        for (r, row) in g.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "polytope row {} has length {}, expected L = {dim}",
                    r + 1,
                    row.len()
                )));
            }
        }
        if g.iter().flatten().chain(&h).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("polytope data must be finite".into()));
        }
        Ok(Self { g, h, dim })
    }

    /// Box `lo <= x <= hi`.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let l = lo.len();
        let mut g = Vec::with_capacity(2 * l);
        let mut h = Vec::with_capacity(2 * l);
        for j in 0..l {
            let mut up = vec![0.0; l];
            up[j] = 1.0;
            g.push(up);
            h.push(hi[j]);
            let mut down = vec![0.0; l];
            down[j] = -1.0;
            g.push(down);
            h.push(-lo[j]);
        }
        Self::new(g, h, l)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push_row(&mut self, row: Vec<f64>, rhs: f64) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::Dimension("appended polytope row has wrong length".into()));
        }
        self.g.push(row);
        self.h.push(rhs);
        Ok(())
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.g.iter().zip(&self.h).all(|(row, h)| dot(row, x) <= h + tol)
    }

    /// Coordinate-wise minima and maxima over the polytope via `2L` linear programs.
    pub fn validate_bounded(&self) -> Result<Bounds> {
        let l = self.dim;
        let mut lo = vec![0.0; l];
        let mut hi = vec![0.0; l];
        let opts = SolveOptions::default();
        for j in 0..l {
            for (maximize, out) in [(false, &mut lo), (true, &mut hi)] {
                let mut m = MipModel::new(if maximize { "coord_max" } else { "coord_min" });
                let xs: Vec<usize> = (0..l)
                    .map(|k| {
                        m.add_continuous(format!("x{}", k + 1), f64::NEG_INFINITY, f64::INFINITY, VarRole::Decision(k))
                    })
                    .collect();
                for (r, (row, rhs)) in self.g.iter().zip(&self.h).enumerate() {
                    m.add_row(
                        format!("G{}", r + 1),
                        xs.iter().zip(row).map(|(&v, &c)| (v, c)).collect(),
                        Sense::Le,
                        *rhs,
                        RowRole::Feasible,
                    );
                }
                let sign = if maximize { -1.0 } else { 1.0 };
                m.set_objective(vec![(xs[j], sign)]);
                let res = solve_lp(&m, &opts)?;
                match res.status {
                    Status::Optimal => *out.get_mut(j).unwrap() = res.x[xs[j]],
                    Status::Infeasible => return Err(Error::EmptyPolytope),
                    Status::Unbounded => return Err(Error::Unbounded { coordinate: j + 1 }),
                    Status::TimeLimit => return Err(Error::Numerical("bounding LP hit its limit".into())),
                }
            }
        }
        Ok(Bounds { lo, hi })
    }
}

/// Individual safety set `{xi : (A xi + a)^T x < b^T xi + b0}`.
///
/// `a_mat` is stored with `K` rows of length `L`: entry `[k][l]` multiplies
/// `xi_k * x_l`, so row `k` of `a_mat` holds the `x`-coefficients of `xi_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndividualSafety {
    pub a_mat: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub b0: f64,
}

impl IndividualSafety {
    /// `b - A^T x`, the decision-dependent normal of the unsafe halfspace.
    pub fn normal(&self, x: &[f64]) -> Vec<f64> {
        self.a_mat.iter().zip(&self.b).map(|(row, bk)| bk - dot(row, x)).collect()
    }

    /// `(b - A^T x)^T xi + b0 - a^T x`; positive exactly on the safety set.
    pub fn margin(&self, x: &[f64], xi: &[f64]) -> f64 {
        dot(&self.normal(x), xi) + self.b0 - dot(&self.a, x)
    }

    /// Coefficients of the margin as an affine function of `x` for a fixed sample:
    /// returns `(constant, gradient)`.
    pub fn margin_affine(&self, xi: &[f64]) -> (f64, Vec<f64>) {
        let l = self.a.len();
        let mut grad = vec![0.0; l];
        for (k, row) in self.a_mat.iter().enumerate() {
            for (g, c) in grad.iter_mut().zip(row) {
                *g -= c * xi[k];
            }
        }
        for (g, a) in grad.iter_mut().zip(&self.a) {
            *g -= a;
        }
        (dot(&self.b, xi) + self.b0, grad)
    }

    /// Whether the normal depends on the decision (`A != 0`).
    pub fn has_lhs_uncertainty(&self) -> bool {
        self.a_mat.iter().flatten().any(|v| *v != 0.0)
    }

    /// The unsafe set as a halfspace; `None` when `b - A^T x = 0`.
    pub fn unsafe_halfspace(&self, x: &[f64]) -> Option<Halfspace> {
        let normal = self.normal(x);
        let level = dot(&self.a, x) - self.b0;
        Halfspace::new(normal, level).ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointRow {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub b0: f64,
}

/// Joint safety set with right-hand side uncertainty
/// `{xi : a_m^T x < b_m^T xi + b0_m for all m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointRhsSafety {
    pub rows: Vec<JointRow>,
}

impl JointRhsSafety {
    pub fn new(rows: Vec<JointRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("joint safety set needs at least one row".into()));
        }
        for (m, row) in rows.iter().enumerate() {
            if row.b.iter().all(|v| *v == 0.0) {
                return Err(Error::UncertaintyFreeRow { row: m + 1 });
            }
        }
        Ok(Self { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The unsafe set `{xi : b_m^T xi <= a_m^T x - b0_m}` for every row.
    pub fn unsafe_halfspaces(&self, x: &[f64]) -> Vec<Halfspace> {
        self.rows.iter().map(|r| Halfspace::new(r.b.clone(), dot(&r.a, x) - r.b0).expect("b_m != 0 checked")).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Safety {
    Individual(IndividualSafety),
    JointRhs(JointRhsSafety),
}

impl Safety {
    /// Unsafe halfspaces at decision `x`.
    pub fn unsafe_halfspaces(&self, x: &[f64]) -> Result<Vec<Halfspace>> {
        match self {
            Safety::Individual(s) => s
                .unsafe_halfspace(x)
                .map(|h| vec![h])
                .ok_or_else(|| Error::Invalid("b - A^T x = 0: the safety normal vanishes at this decision".into())),
            Safety::JointRhs(j) => Ok(j.unsafe_halfspaces(x)),
        }
    }

    /// Whether scenario `xi` lies in the (open) safety set at `x`.
    pub fn is_safe(&self, x: &[f64], xi: &[f64]) -> bool {
        match self {
            Safety::Individual(s) => s.margin(x, xi) > 0.0,
            Safety::JointRhs(j) => j.rows.iter().all(|r| dot(&r.a, x) < dot(&r.b, xi) + r.b0),
        }
    }
}

/// A distributionally robust chance constrained program
/// `min c^T x  s.t.  P[xi in S(x)] >= 1 - epsilon  for all P in the ball, x in X`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChanceProgram {
    pub objective: Vec<f64>,
    pub feasible: Polytope,
    pub safety: Safety,
    pub epsilon: f64,
    pub ball: WassersteinBall,
}

impl ChanceProgram {
    pub fn new(
        objective: Vec<f64>,
        feasible: Polytope,
        safety: Safety,
        epsilon: f64,
        ball: WassersteinBall,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Epsilon(epsilon));
        }
        let l = feasible.dim();
        let k = ball.center.dim();
        if objective.len() != l {
            return Err(Error::Dimension(format!("objective has length {}, polytope has L = {l}", objective.len())));
        }
        match &safety {
            Safety::Individual(s) => {
                if s.a_mat.len() != k || s.a_mat.iter().any(|r| r.len() != l) {
                    return Err(Error::Dimension(format!("A must be {k} x {l} (K x L)")));
                }
                if s.a.len() != l {
                    return Err(Error::Dimension(format!("a must have length L = {l}")));
                }
                if s.b.len() != k {
                    return Err(Error::Dimension(format!("b must have length K = {k}")));
                }
            }
            Safety::JointRhs(j) => {
                for (m, r) in j.rows.iter().enumerate() {
                    if r.a.len() != l || r.b.len() != k {
                        return Err(Error::Dimension(format!(
                            "joint row {} must have a of length {l} and b of length {k}",
                            m + 1
                        )));
                    }
                }
            }
        }
        Ok(Self { objective, feasible, safety, epsilon, ball })
    }

    pub fn n_samples(&self) -> usize {
        self.ball.center.len()
    }

    pub fn dim_x(&self) -> usize {
        self.feasible.dim()
    }

    pub fn dim_xi(&self) -> usize {
        self.ball.center.dim()
    }

    pub fn cost(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Ok(Self { ball: self.ball.with_radius(radius)?, ..self.clone() })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.objective.clone(), self.feasible.clone(), self.safety.clone(), epsilon, self.ball.clone())
    }

    pub fn with_samples(&self, samples: TrainingSet) -> Result<Self> {
        let ball = WassersteinBall::new(self.ball.radius, self.ball.norm, samples)?;
        Self::new(self.objective.clone(), self.feasible.clone(), self.safety.clone(), self.epsilon, ball)
    }

    pub fn individual(&self) -> Option<&IndividualSafety> {
        match &self.safety {
            Safety::Individual(s) => Some(s),
            Safety::JointRhs(_) => None,
        }
    }

    pub fn joint(&self) -> Option<&JointRhsSafety> {
        match &self.safety {
            Safety::JointRhs(j) => Some(j),
            Safety::Individual(_) => None,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
