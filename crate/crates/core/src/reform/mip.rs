use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

/// What a variable means in the originating formulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarRole {
    /// Decision `x_l`.
    Decision(usize),
    /// Partial-sum slack `s_i`.
    Slack(usize),
    /// Partial-sum threshold `t`.
    Threshold,
    /// Disjunction indicator `q_i`.
    Indicator(usize),
    /// Distance proxy `p_i` of the joint reformulation.
    Distance(usize),
    /// Epigraph variable bounding the dual norm of the safety normal.
    DualNorm,
    /// Component bound `u_k >= |.|` in a polyhedral dual-norm epigraph.
    NormComponent(usize),
    /// Member of a second-order cone `v_k = (b - A^T x)_k`.
    ConeMember(usize),
    /// CVaR excess `alpha_i`.
    CvarExcess(usize),
    /// CVaR dual multiplier `beta`.
    CvarBeta,
    /// CVaR threshold `tau`.
    CvarTau,
    /// Scenario skip indicator `y_i` of the classical formulation.
    Skip(usize),
    /// Radius treated as a decision when maximising feasibility.
    Radius,
}

/// What a row means in the originating formulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowRole {
    /// `eps N t - e^T s >= theta N ||.||_*`.
    Budget,
    /// `margin_i + M q_i >= t - s_i` (or `p_i + M q_i >= t - s_i`).
    Disjunct(usize),
    /// `M (1 - q_i) >= t - s_i`.
    Cap(usize),
    /// `(b_m^T xi_i + b0_m - a_m^T x) / ||b_m||_* >= p_i`.
    DistanceBound(usize, usize),
    /// `kappa_i * margin >= t - s_i`, one per sample (and row for joint sets).
    KappaSlot(usize, usize),
    /// Rows of a dual-norm epigraph.
    DualNorm,
    /// Defining equalities of cone members.
    ConeLink,
    /// `G x <= h`.
    Feasible,
    /// `tau + (theta beta + mean(alpha)) / eps <= 0`.
    CvarBudget,
    /// `alpha_i >= loss - tau`.
    CvarExcess(usize, usize),
    /// `a_m^T x <= b0_m - eta_m`.
    Bonferroni(usize),
    /// Scenario row of the classical big-M formulation.
    Scenario(usize, usize),
    /// `e^T y <= floor(eps N)`.
    SkipBudget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    pub role: VarRole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub role: RowRole,
}

/// `head >= || (members) ||_2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeRow {
    pub name: String,
    pub head: usize,
    pub members: Vec<usize>,
}

/// Solver-agnostic mixed-integer model with linear rows and optional
/// second-order cone rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MipModel {
    pub name: String,
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    pub cones: Vec<ConeRow>,
    pub objective: Vec<(usize, f64)>,
    pub sense: ObjSense,
    /// Big-M constant used by disjunctive rows, if any.
    pub big_m: Option<f64>,
}

impl MipModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            vars: Vec::new(),
            rows: Vec::new(),
            cones: Vec::new(),
            objective: Vec::new(),
            sense: ObjSense::Minimize,
            big_m: None,
        }
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64, role: VarRole) -> usize {
        self.vars.push(Variable { name: name.into(), lower, upper, kind: VarKind::Continuous, role });
        self.vars.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, role: VarRole) -> usize {
        self.vars.push(Variable { name: name.into(), lower: 0.0, upper: 1.0, kind: VarKind::Binary, role });
        self.vars.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
        role: RowRole,
    ) -> usize {
        let terms = terms.into_iter().filter(|(_, c)| *c != 0.0).collect();
        self.rows.push(Row { name: name.into(), terms, sense, rhs, role });
        self.rows.len() - 1
    }

    pub fn add_cone(&mut self, name: impl Into<String>, head: usize, members: Vec<usize>) {
        self.cones.push(ConeRow { name: name.into(), head, members });
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, f64)>) {
        self.objective = terms;
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn binaries(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&j| self.vars[j].kind == VarKind::Binary).collect()
    }

    pub fn count_vars(&self, pred: impl Fn(&Variable) -> bool) -> usize {
        self.vars.iter().filter(|v| pred(v)).count()
    }

    pub fn count_rows(&self, pred: impl Fn(&Row) -> bool) -> usize {
        self.rows.iter().filter(|r| pred(r)).count()
    }

    /// Indices of decision variables, ordered by decision coordinate.
    pub fn decision_vars(&self) -> Vec<usize> {
        let mut xs: Vec<(usize, usize)> = self
            .vars
            .iter()
            .enumerate()
            .filter_map(|(j, v)| match v.role {
                VarRole::Decision(l) => Some((l, j)),
                _ => None,
            })
            .collect();
        xs.sort_unstable();
        xs.into_iter().map(|(_, j)| j).collect()
    }

    /// Variable index carrying `role`, if any.
    pub fn find(&self, role: VarRole) -> Option<usize> {
        self.vars.iter().position(|v| v.role == role)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Largest violation of any row or bound at `x` (cones excluded).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            let lhs: f64 = r.terms.iter().map(|&(j, c)| c * x[j]).sum();
            let v = match r.sense {
                Sense::Le => lhs - r.rhs,
                Sense::Ge => r.rhs - lhs,
                Sense::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (v, val) in self.vars.iter().zip(x) {
            worst = worst.max(v.lower - val).max(val - v.upper);
        }
        worst
    }

    /// Fix every binary to the given pattern (by binary order).
    pub fn with_binaries_fixed(&self, pattern: &[bool]) -> MipModel {
        let mut m = self.clone();
        for (j, val) in self.binaries().into_iter().zip(pattern) {
            let v = if *val { 1.0 } else { 0.0 };
            m.vars[j].lower = v;
            m.vars[j].upper = v;
            m.vars[j].kind = VarKind::Continuous;
        }
        m
    }
}
