//! Dense bounded-variable primal simplex.
//!
//! Every row `a_i^T x (<=, >=, =) b_i` gets a slack `s_i` with
//! `a_i^T x + s_i = b_i` and sign-restricted bounds, so the slacks form the
//! starting basis. Rows whose slack would start outside its bounds get an
//! artificial column, and phase one minimises the sum of artificials.
//!
//! Pricing is Dantzig's largest reduced cost; after a run of degenerate
//! pivots the solver switches to Bland's smallest-index rule for both the
//! entering and leaving choice until the objective strictly improves, which
//! rules out cycling. The tableau is rebuilt from the original columns by an
//! LU factorisation of the basis every `REFACTOR_EVERY` pivots and before
//! the final solution is read off.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::reform::{MipModel, ObjSense, Sense};

const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_STREAK: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub(crate) struct LpOutcome {
    pub status: LpStatus,
    /// Values of the model variables.
    pub x: Vec<f64>,
    /// Objective in the model's own sense.
    pub objective: f64,
    /// Row duals `y` of the minimisation form (one per model row, zero for
    /// dropped empty rows).
    pub duals: Vec<f64>,
    pub iterations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum ColState {
    Basic,
    Lower,
    Upper,
    /// Free nonbasic column resting at zero.
    Zero,
}

struct Tableau {
    m: usize,
    nc: usize,
    /// Original columns `[A | I | art]`, row-major.
    orig: Vec<f64>,
    rhs: Vec<f64>,
    /// Current tableau `B^-1 [A | I | art]`, row-major.
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    val: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    iterations: u64,
    max_iterations: u64,
}

/// Solve the continuous relaxation of `model` with the given per-variable
/// bounds (which override the model's own bounds).
pub(crate) fn solve_dense(model: &MipModel, bounds: &[(f64, f64)], max_iterations: u64) -> Result<LpOutcome> {
    if !model.cones.is_empty() {
        return Err(Error::ConeRows);
    }
    let n = model.vars.len();
    let sign = match model.sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    };
    let infeasible = |iterations| LpOutcome {
        status: LpStatus::Infeasible,
        x: vec![f64::NAN; n],
        objective: f64::NAN,
        duals: vec![0.0; model.rows.len()],
        iterations,
    };
    if bounds.iter().any(|(l, h)| l > h) {
        return Ok(infeasible(0));
    }

    // Empty rows are either trivially satisfied or prove infeasibility.
    let mut kept = Vec::with_capacity(model.rows.len());
    for (i, r) in model.rows.iter().enumerate() {
        if r.terms.is_empty() {
            let ok = match r.sense {
                Sense::Le => 0.0 <= r.rhs,
                Sense::Ge => 0.0 >= r.rhs,
                Sense::Eq => r.rhs == 0.0,
            };
            if !ok {
                return Ok(infeasible(0));
            }
        } else {
            kept.push(i);
        }
    }
    let m = kept.len();

    let mut cost_struct = vec![0.0; n];
    for &(j, c) in &model.objective {
        cost_struct[j] += sign * c;
    }

    if m == 0 {
        // Each variable independently at its cheapest bound.
        let mut x = vec![0.0; n];
        for j in 0..n {
            let (l, h) = bounds[j];
            let c = cost_struct[j];
            x[j] = if c > 0.0 {
                l
            } else if c < 0.0 {
                h
            } else {
                rest_value(l, h)
            };
            if !x[j].is_finite() {
                return Ok(LpOutcome {
                    status: LpStatus::Unbounded,
                    x: vec![f64::NAN; n],
                    objective: f64::NAN,
                    duals: vec![0.0; model.rows.len()],
                    iterations: 0,
                });
            }
        }
        let objective = model.objective_value(&x);
        return Ok(LpOutcome {
            status: LpStatus::Optimal,
            x,
            objective,
            duals: vec![0.0; model.rows.len()],
            iterations: 0,
        });
    }

    // Structural and slack columns.
    let mut dense = vec![0.0; m * n];
    let mut rhs = vec![0.0; m];
    let mut slack_bounds = Vec::with_capacity(m);
    for (i, &ri) in kept.iter().enumerate() {
        let r = &model.rows[ri];
        for &(j, c) in &r.terms {
            dense[i * n + j] += c;
        }
        rhs[i] = r.rhs;
        slack_bounds.push(match r.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        });
    }

    let mut lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let mut hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
    let mut val: Vec<f64> = bounds.iter().map(|&(l, h)| rest_value(l, h)).collect();
    let mut state: Vec<ColState> = bounds.iter().map(|&(l, h)| rest_state(l, h)).collect();

    // Residual each slack would have to absorb.
    let mut art_rows = Vec::new();
    let mut slack_val = vec![0.0; m];
    for i in 0..m {
        let ax: f64 = (0..n).map(|j| dense[i * n + j] * val[j]).sum();
        let r = rhs[i] - ax;
        let (sl, sh) = slack_bounds[i];
        let clamped = r.clamp(sl, sh);
        slack_val[i] = clamped;
        if r != clamped {
            art_rows.push((i, (r - clamped).signum()));
        }
    }
    let na = art_rows.len();
    let nc = n + m + na;

    let mut orig = vec![0.0; m * nc];
    for i in 0..m {
        orig[i * nc..i * nc + n].copy_from_slice(&dense[i * n..(i + 1) * n]);
        orig[i * nc + n + i] = 1.0;
    }
    for (k, &(i, s)) in art_rows.iter().enumerate() {
        orig[i * nc + n + m + k] = s;
    }
    drop(dense);

    let mut basis = vec![0; m];
    for i in 0..m {
        lo.push(slack_bounds[i].0);
        hi.push(slack_bounds[i].1);
        val.push(slack_val[i]);
        state.push(ColState::Basic);
        basis[i] = n + i;
    }
    for (k, &(i, _)) in art_rows.iter().enumerate() {
        lo.push(0.0);
        hi.push(f64::INFINITY);
        val.push(0.0);
        state.push(ColState::Basic);
        // The slack of this row leaves to its nearest bound.
        let s = n + i;
        state[s] = if slack_val[i] == slack_bounds[i].0 { ColState::Lower } else { ColState::Upper };
        basis[i] = n + m + k;
    }

    let mut cost = vec![0.0; nc];
    for c in cost.iter_mut().skip(n + m) {
        *c = 1.0;
    }

    let mut tab = Tableau {
        m,
        nc,
        orig,
        rhs,
        t: Vec::new(),
        beta: vec![0.0; m],
        basis,
        state,
        val,
        lo,
        hi,
        cost,
        d: vec![0.0; nc],
        iterations: 0,
        max_iterations,
    };
    tab.refactor()?;

    if na > 0 {
        match tab.run()? {
            LpStatus::Optimal => {}
            // Phase one is bounded below by zero.
            other => return Err(Error::Numerical(format!("phase one ended as {other:?}"))),
        }
        let infeas: f64 = (n + m..nc).map(|j| tab.value(j)).sum();
        let scale = 1.0 + tab.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeas > PHASE1_TOL * scale {
            return Ok(infeasible(tab.iterations));
        }
        for j in n + m..nc {
            tab.hi[j] = 0.0;
            if tab.state[j] != ColState::Basic {
                tab.state[j] = ColState::Lower;
                tab.val[j] = 0.0;
            }
        }
    }

    for j in 0..nc {
        tab.cost[j] = if j < n { cost_struct[j] } else { 0.0 };
    }
    tab.refactor()?;
    let mut status = tab.run()?;
    // Re-check optimality on a freshly factorised tableau.
    for _ in 0..3 {
        if status != LpStatus::Optimal {
            break;
        }
        tab.refactor()?;
        if tab.entering(false).is_none() {
            break;
        }
        status = tab.run()?;
    }
    if status == LpStatus::Unbounded {
        return Ok(LpOutcome {
            status,
            x: vec![f64::NAN; n],
            objective: f64::NAN,
            duals: vec![0.0; model.rows.len()],
            iterations: tab.iterations,
        });
    }

    let x: Vec<f64> = (0..n).map(|j| tab.value(j)).collect();
    let y = tab.duals()?;
    let mut duals = vec![0.0; model.rows.len()];
    for (i, &ri) in kept.iter().enumerate() {
        duals[ri] = y[i];
    }
    let objective = model.objective_value(&x);
    Ok(LpOutcome { status: LpStatus::Optimal, x, objective, duals, iterations: tab.iterations })
}

fn rest_value(l: f64, h: f64) -> f64 {
    if l.is_finite() {
        l
    } else if h.is_finite() {
        h
    } else {
        0.0
    }
}

fn rest_state(l: f64, h: f64) -> ColState {
    if l.is_finite() {
        ColState::Lower
    } else if h.is_finite() {
        ColState::Upper
    } else {
        ColState::Zero
    }
}

impl Tableau {
    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::Basic => {
                let r = self.basis.iter().position(|&b| b == j).expect("basic column in basis");
                self.beta[r]
            }
            _ => self.val[j],
        }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |i, k| self.orig[i * self.nc + self.basis[k]])
    }

    /// Rebuild `t`, `beta` and `d` from the original columns.
    fn refactor(&mut self) -> Result<()> {
        let (m, nc) = (self.m, self.nc);
        let lu = self.basis_matrix().lu();
        let u = lu.u();
        let scale = u.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
        if let Some(r) = (0..m).find(|&r| u[(r, r)].abs() <= 1e-13 * scale) {
            return Err(Error::Numerical(format!("singular basis at row {}", r + 1)));
        }
        let full = DMatrix::from_row_slice(m, nc, &self.orig);
        let t = lu.solve(&full).ok_or_else(|| Error::Numerical("basis factorisation failed".into()))?;
        self.t = vec![0.0; m * nc];
        for i in 0..m {
            for j in 0..nc {
                self.t[i * nc + j] = t[(i, j)];
            }
        }
        for (i, &b) in self.basis.iter().enumerate() {
            // Clean the identity part against round-off.
            for k in 0..m {
                self.t[k * nc + b] = if k == i { 1.0 } else { 0.0 };
            }
        }
        let mut r = nalgebra::DVector::from_column_slice(&self.rhs);
        for j in 0..nc {
            if self.state[j] != ColState::Basic && self.val[j] != 0.0 {
                for i in 0..m {
                    r[i] -= self.orig[i * nc + j] * self.val[j];
                }
            }
        }
        let beta = lu.solve(&r).ok_or_else(|| Error::Numerical("basis factorisation failed".into()))?;
        self.beta = beta.iter().copied().collect();
        self.price();
        Ok(())
    }

    /// Reduced costs `d_j = c_j - c_B^T t_j`.
    fn price(&mut self) {
        let nc = self.nc;
        self.d = self.cost.clone();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                let row = &self.t[i * nc..(i + 1) * nc];
                for (dj, tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    /// Row duals `y = B^-T c_B`.
    fn duals(&self) -> Result<Vec<f64>> {
        let bt = self.basis_matrix().transpose();
        let cb = nalgebra::DVector::from_iterator(self.m, self.basis.iter().map(|&b| self.cost[b]));
        let y = bt.lu().solve(&cb).ok_or_else(|| Error::Numerical("singular basis while computing duals".into()))?;
        Ok(y.iter().copied().collect())
    }

    /// Column eligible to enter with its direction (+1 increase, -1 decrease).
    fn entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.nc {
            let dir = match self.state[j] {
                ColState::Basic => continue,
                _ if self.lo[j] == self.hi[j] => continue,
                ColState::Lower if self.d[j] < -DUAL_TOL => 1.0,
                ColState::Upper if self.d[j] > DUAL_TOL => -1.0,
                ColState::Zero if self.d[j].abs() > DUAL_TOL => -self.d[j].signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            let score = self.d[j].abs();
            if best.map_or(true, |(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn run(&mut self) -> Result<LpStatus> {
        let (m, nc) = (self.m, self.nc);
        let mut since_refactor = 0;
        let mut degenerate = 0;
        let mut bland = false;
        loop {
            let Some((q, dir)) = self.entering(bland) else {
                return Ok(LpStatus::Optimal);
            };
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::Numerical(format!("simplex iteration limit ({}) reached", self.max_iterations)));
            }

            // Ratio test.
            let mut step = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let alpha = dir * self.t[i * nc + q];
                let b = self.basis[i];
                let lim = if alpha > PIVOT_TOL && self.lo[b].is_finite() {
                    ((self.beta[i] - self.lo[b]) / alpha).max(0.0)
                } else if alpha < -PIVOT_TOL && self.hi[b].is_finite() {
                    ((self.hi[b] - self.beta[i]) / -alpha).max(0.0)
                } else {
                    continue;
                };
                let better = match leave {
                    None => lim < step || (lim == step && !step.is_finite()),
                    Some((r, best_alpha)) => {
                        if lim < step - 1e-12 {
                            true
                        } else if lim <= step + 1e-12 {
                            if bland {
                                b < self.basis[r]
                            } else {
                                alpha.abs() > best_alpha.abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    step = if leave.is_none() || lim < step { lim } else { step };
                    leave = Some((i, alpha));
                }
            }
            if !step.is_finite() {
                return Ok(LpStatus::Unbounded);
            }

            if step <= 1e-12 {
                degenerate += 1;
                if degenerate >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            for i in 0..m {
                let tiq = self.t[i * nc + q];
                if tiq != 0.0 {
                    self.beta[i] -= dir * step * tiq;
                }
            }
            let entering_value = self.val[q] + dir * step;

            match leave {
                None => {
                    // Bound flip.
                    if dir > 0.0 {
                        self.state[q] = ColState::Upper;
                        self.val[q] = self.hi[q];
                    } else {
                        self.state[q] = ColState::Lower;
                        self.val[q] = self.lo[q];
                    }
                }
                Some((r, alpha)) => {
                    let out = self.basis[r];
                    if alpha > 0.0 {
                        self.state[out] = ColState::Lower;
                        self.val[out] = self.lo[out];
                    } else {
                        self.state[out] = ColState::Upper;
                        self.val[out] = self.hi[out];
                    }
                    self.pivot(r, q);
                    self.basis[r] = q;
                    self.state[q] = ColState::Basic;
                    self.beta[r] = entering_value;
                    since_refactor += 1;
                    if since_refactor >= REFACTOR_EVERY {
                        self.refactor()?;
                        since_refactor = 0;
                    }
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.nc;
        let piv = self.t[r * nc + q];
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        prow[q] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
                row[q] = 0.0;
            }
        };
        for row in before.chunks_mut(nc) {
            eliminate(row);
        }
        for row in after.chunks_mut(nc) {
            eliminate(row);
        }
        let f = self.d[q];
        if f != 0.0 {
            for (a, b) in self.d.iter_mut().zip(prow.iter()) {
                *a -= f * b;
            }
            self.d[q] = 0.0;
        }
    }
}
