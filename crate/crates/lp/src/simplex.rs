//! Bounded-variable revised simplex.
//!
//! Every original variable is mapped to one or two internal columns with
//! bounds `[0, u]`, `u` possibly infinite. Each row receives a slack column
//! so the internal system is `A x = b`. Rows whose slack cannot start
//! feasible receive an artificial column that phase one drives to zero.

use crate::{BoundedLP, LpError, Relation, Sense};

const INF: f64 = f64::INFINITY;
const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 100;
const BLAND_AFTER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`].
///
/// `duals[i]` is the rate of change of the optimal objective per unit
/// increase of row `i`'s right-hand side.
#[derive(Debug, Clone)]
pub struct LPSolution {
    pub status: Status,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LPSolution {
    /// Reduced cost `c_j - A_j^T y` of every original variable.
    pub fn reduced_costs(&self, lp: &BoundedLP) -> Vec<f64> {
        let mut d = lp.objective.clone();
        for (row, &y) in lp.rows.iter().zip(&self.duals) {
            for &(j, a) in &row.coeffs {
                d[j] -= a * y;
            }
        }
        d
    }

    /// Lagrangian dual bound evaluated at the returned duals.
    ///
    /// For a maximization this is an upper bound on every feasible
    /// objective whenever the duals have the right signs; it equals the
    /// optimum at an optimal basis.
    pub fn dual_objective(&self, lp: &BoundedLP) -> f64 {
        let maximize = lp.sense == Sense::Maximize;
        let mut total: f64 = lp.rows.iter().zip(&self.duals).map(|(r, y)| r.rhs * y).sum();
        for (j, d) in self.reduced_costs(lp).into_iter().enumerate() {
            if d.abs() <= DUAL_TOL {
                continue;
            }
            // sup (max) or inf (min) of d * x over the box
            let pick_upper = (d > 0.0) == maximize;
            let bound = if pick_upper { lp.upper[j] } else { lp.lower[j] };
            total += d * bound;
        }
        total
    }

    /// Largest violation of complementary slackness over rows and bounds.
    pub fn complementary_slackness_residual(&self, lp: &BoundedLP) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, y) in self.duals.iter().enumerate() {
            let slack = lp.rows[i].rhs - lp.row_activity(i, &self.primal);
            worst = worst.max((y * slack).abs());
        }
        for (j, d) in self.reduced_costs(lp).into_iter().enumerate() {
            let x = self.primal[j];
            let gap_lo = if lp.lower[j].is_finite() { x - lp.lower[j] } else { INF };
            let gap_hi = if lp.upper[j].is_finite() { lp.upper[j] - x } else { INF };
            let gap = gap_lo.min(gap_hi);
            let r = if gap.is_finite() { (d * gap).abs() } else { d.abs() };
            worst = worst.max(r);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = lo + col
    Shift { col: usize, lo: f64 },
    /// x = hi - col
    Reflect { col: usize, hi: f64 },
    /// x = pos - neg
    Split { pos: usize, neg: usize },
}

struct Standard {
    m: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    cost: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    n_struct: usize,
    first_artificial: usize,
    basis: Vec<usize>,
    maps: Vec<VarMap>,
}

impl Standard {
    fn ncols(&self) -> usize {
        self.cost.len()
    }

    fn push_col(&mut self, entries: impl IntoIterator<Item = (usize, f64)>, cost: f64, upper: f64) -> usize {
        for (i, a) in entries {
            self.row_idx.push(i);
            self.vals.push(a);
        }
        self.col_start.push(self.row_idx.len());
        self.cost.push(cost);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    fn build(lp: &BoundedLP) -> Standard {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j].push((i, a));
            }
        }
        let sign = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let mut s = Standard {
            m,
            col_start: vec![0],
            row_idx: Vec::new(),
            vals: Vec::new(),
            cost: Vec::new(),
            upper: Vec::new(),
            rhs: lp.rows.iter().map(|r| r.rhs).collect(),
            n_struct: 0,
            first_artificial: 0,
            basis: Vec::with_capacity(m),
            maps: Vec::with_capacity(n),
        };
        for j in 0..n {
            let (lo, hi, c) = (lp.lower[j], lp.upper[j], sign * lp.objective[j]);
            let map = if lo.is_finite() {
                for &(i, a) in &cols[j] {
                    s.rhs[i] -= a * lo;
                }
                let col = s.push_col(cols[j].iter().copied(), c, hi - lo);
                VarMap::Shift { col, lo }
            } else if hi.is_finite() {
                for &(i, a) in &cols[j] {
                    s.rhs[i] -= a * hi;
                }
                let col = s.push_col(cols[j].iter().map(|&(i, a)| (i, -a)), -c, INF);
                VarMap::Reflect { col, hi }
            } else {
                let pos = s.push_col(cols[j].iter().copied(), c, INF);
                let neg = s.push_col(cols[j].iter().map(|&(i, a)| (i, -a)), -c, INF);
                VarMap::Split { pos, neg }
            };
            s.maps.push(map);
        }
        s.n_struct = s.ncols();

        // slack for row i lives at column n_struct + i
        let mut slack_coef = vec![1.0; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let (coef, upper) = match row.relation {
                Relation::Le => (1.0, INF),
                Relation::Ge => (-1.0, INF),
                Relation::Eq => (1.0, 0.0),
            };
            slack_coef[i] = coef;
            s.push_col([(i, coef)], 0.0, upper);
        }
        s.first_artificial = s.ncols();
        for i in 0..m {
            let b = s.rhs[i];
            let value = b / slack_coef[i];
            let slack = s.n_struct + i;
            if value >= 0.0 && value <= s.upper[slack] {
                s.basis.push(slack);
            } else {
                let coef = if b >= 0.0 { 1.0 } else { -1.0 };
                let art = s.push_col([(i, coef)], 0.0, INF);
                s.basis.push(art);
            }
        }
        s
    }
}

struct Engine<'a> {
    s: &'a Standard,
    m: usize,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    head: Vec<usize>,
    at_upper: Vec<bool>,
    binv: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
    y: Vec<f64>,
    alpha: Vec<f64>,
}

const NONBASIC: usize = usize::MAX;

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl<'a> Engine<'a> {
    fn new(s: &'a Standard) -> Result<Self, LpError> {
        let m = s.m;
        let n = s.ncols();
        let mut head = vec![NONBASIC; n];
        for (r, &b) in s.basis.iter().enumerate() {
            head[b] = r;
        }
        let mut e = Engine {
            s,
            m,
            upper: s.upper.clone(),
            x: vec![0.0; n],
            basis: s.basis.clone(),
            head,
            at_upper: vec![false; n],
            binv: vec![0.0; m * m],
            since_refactor: 0,
            iterations: 0,
            max_iterations: 50 * (n + m) + 10_000,
            y: vec![0.0; m],
            alpha: vec![0.0; m],
        };
        e.refactor()?;
        Ok(e)
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.s.col_start[j], self.s.col_start[j + 1]);
        self.s.row_idx[a..b].iter().copied().zip(self.s.vals[a..b].iter().copied())
    }

    /// Rebuilds the dense basis inverse by Gauss-Jordan elimination and
    /// recomputes basic values from the nonbasic ones.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (c, &j) in self.basis.iter().enumerate() {
            for (i, v) in self.column(j) {
                a[i * m + c] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = a[col * m + col].abs();
            for r in col + 1..m {
                let v = a[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < SINGULAR_TOL {
                return Err(LpError::NumericalBreakdown {
                    iterations: self.iterations,
                    reason: format!("singular basis at column {col}"),
                });
            }
            if piv != col {
                for k in 0..m {
                    a.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let p = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[col * m + k];
                    inv[r * m + k] -= f * inv[col * m + k];
                }
            }
        }
        // inv row p belongs to basis position p
        self.binv = inv;
        self.since_refactor = 0;
        self.recompute_basic_values();
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut r = self.s.rhs.clone();
        for j in 0..self.x.len() {
            if self.head[j] != NONBASIC || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            for (i, v) in self.column(j) {
                r[i] -= v * xj;
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let v: f64 = row.iter().zip(&r).map(|(a, b)| a * b).sum();
            self.x[self.basis[p]] = v;
        }
    }

    fn compute_duals(&mut self, cost: &[f64]) {
        let m = self.m;
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for p in 0..m {
            let c = cost[self.basis[p]];
            if c == 0.0 {
                continue;
            }
            let row = &self.binv[p * m..(p + 1) * m];
            for (yi, a) in self.y.iter_mut().zip(row) {
                *yi += c * a;
            }
        }
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut d = cost[j];
        for (i, v) in self.column(j) {
            d -= self.y[i] * v;
        }
        d
    }

    fn compute_alpha(&mut self, q: usize) {
        let m = self.m;
        self.alpha.iter_mut().for_each(|v| *v = 0.0);
        let (a, b) = (self.s.col_start[q], self.s.col_start[q + 1]);
        for k in a..b {
            let (i, v) = (self.s.row_idx[k], self.s.vals[k]);
            for p in 0..m {
                self.alpha[p] += self.binv[p * m + i] * v;
            }
        }
    }

    fn pivot_update(&mut self, r: usize) {
        let m = self.m;
        let piv = self.alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= piv;
        }
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (prow, after) = rest.split_at_mut(m);
        for (p, chunk) in before.chunks_exact_mut(m).enumerate() {
            let f = self.alpha[p];
            if f != 0.0 {
                chunk.iter_mut().zip(prow.iter()).for_each(|(a, b)| *a -= f * b);
            }
        }
        for (off, chunk) in after.chunks_exact_mut(m).enumerate() {
            let f = self.alpha[r + 1 + off];
            if f != 0.0 {
                chunk.iter_mut().zip(prow.iter()).for_each(|(a, b)| *a -= f * b);
            }
        }
    }

    fn run_phase(&mut self, cost: &[f64], allow: usize) -> Result<PhaseEnd, LpError> {
        let mut stalled = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::NumericalBreakdown {
                    iterations: self.iterations,
                    reason: "iteration limit reached".into(),
                });
            }
            self.compute_duals(cost);
            let bland = stalled >= BLAND_AFTER;

            let mut entering = None;
            let mut best = 0.0;
            for j in 0..allow {
                if self.head[j] != NONBASIC || self.upper[j] == 0.0 {
                    continue;
                }
                let d = self.reduced_cost(cost, j);
                let gain = if self.at_upper[j] { d } else { -d };
                if gain > DUAL_TOL && gain > best {
                    best = gain;
                    entering = Some((j, d));
                    if bland {
                        break;
                    }
                }
            }
            let Some((q, dq)) = entering else {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                return Ok(PhaseEnd::Optimal);
            };

            self.compute_alpha(q);
            let dir = if self.at_upper[q] { -1.0 } else { 1.0 };
            let mut theta = self.upper[q];
            let mut leave: Option<(usize, bool)> = None;
            let mut best_piv = 0.0;
            for p in 0..self.m {
                let d = dir * self.alpha[p];
                let b = self.basis[p];
                let (t, to_upper) = if d > PIVOT_TOL {
                    ((self.x[b]).max(0.0) / d, false)
                } else if d < -PIVOT_TOL && self.upper[b].is_finite() {
                    ((self.upper[b] - self.x[b]).max(0.0) / -d, true)
                } else {
                    continue;
                };
                let tie_tol = 1e-12 * (1.0 + theta.min(1e12));
                let better = match leave {
                    _ if t < theta - tie_tol => true,
                    Some((lp_, _)) if t <= theta + tie_tol => {
                        if bland {
                            b < self.basis[lp_]
                        } else {
                            d.abs() > best_piv
                        }
                    }
                    _ => false,
                };
                if better {
                    theta = t.min(theta);
                    leave = Some((p, to_upper));
                    best_piv = d.abs();
                }
            }
            if theta == INF {
                return Ok(PhaseEnd::Unbounded);
            }
            self.iterations += 1;
            if theta * dq.abs() > 1e-12 {
                stalled = 0;
            } else {
                stalled += 1;
            }
            if theta > 0.0 {
                self.x[q] += dir * theta;
                for p in 0..self.m {
                    let b = self.basis[p];
                    self.x[b] -= theta * dir * self.alpha[p];
                }
            }
            match leave {
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                    self.x[q] = if self.at_upper[q] { self.upper[q] } else { 0.0 };
                }
                Some((r, to_upper)) => {
                    let b = self.basis[r];
                    self.x[b] = if to_upper { self.upper[b] } else { 0.0 };
                    self.at_upper[b] = to_upper;
                    self.head[b] = NONBASIC;
                    self.basis[r] = q;
                    self.head[q] = r;
                    self.at_upper[q] = false;
                    self.pivot_update(r);
                    self.since_refactor += 1;
                    if self.since_refactor >= REFACTOR_EVERY {
                        self.refactor()?;
                    }
                }
            }
        }
    }
}

/// Solves `lp` and reports status, primal values, duals and pivot count.
pub fn solve_lp(lp: &BoundedLP) -> Result<LPSolution, LpError> {
    lp.validate()?;
    let s = Standard::build(lp);
    let mut e = Engine::new(&s)?;
    let ncols = s.ncols();

    if s.first_artificial < ncols {
        let mut phase1 = vec![0.0; ncols];
        phase1[s.first_artificial..].iter_mut().for_each(|c| *c = 1.0);
        e.run_phase(&phase1, ncols)?;
        let infeasibility: f64 = (s.first_artificial..ncols).map(|j| e.x[j]).sum();
        let scale = 1.0 + s.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeasibility > FEAS_TOL * scale {
            return Ok(LPSolution {
                status: Status::Infeasible,
                objective: f64::NAN,
                primal: recover(&s, &e.x),
                duals: vec![0.0; s.m],
                iterations: e.iterations,
            });
        }
        for j in s.first_artificial..ncols {
            e.upper[j] = 0.0;
        }
    }

    let phase2 = &s.cost;
    let outcome = e.run_phase(phase2, s.first_artificial)?;
    let primal = recover(&s, &e.x);
    match outcome {
        PhaseEnd::Unbounded => Ok(LPSolution {
            status: Status::Unbounded,
            objective: if lp.sense == Sense::Maximize { INF } else { -INF },
            primal,
            duals: vec![0.0; s.m],
            iterations: e.iterations,
        }),
        PhaseEnd::Optimal => {
            e.compute_duals(phase2);
            let sign = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
            let duals = e.y.iter().map(|v| sign * v).collect();
            Ok(LPSolution {
                status: Status::Optimal,
                objective: lp.objective_value(&primal),
                primal,
                duals,
                iterations: e.iterations,
            })
        }
    }
}

fn recover(s: &Standard, x: &[f64]) -> Vec<f64> {
    s.maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo } => lo + x[col],
            VarMap::Reflect { col, hi } => hi - x[col],
            VarMap::Split { pos, neg } => x[pos] - x[neg],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 + b.abs())
    }

    #[test]
    fn single_variable_upper_row() {
        let mut lp = BoundedLP::new(Sense::Maximize);
        let x = lp.add_var(1.0, 0.0, INF);
        lp.add_row(vec![(x, 1.0)], Relation::Le, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!(close(s.objective, 1.0));
        assert!(close(s.duals[0], 1.0));
    }

    #[test]
    fn infeasible_lower_row_against_box() {
        let mut lp = BoundedLP::new(Sense::Maximize);
        let x = lp.add_var(1.0, 0.0, 1.0);
        lp.add_row(vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve_lp(&lp).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = BoundedLP::new(Sense::Maximize);
        let x = lp.add_var(1.0, 0.0, INF);
        let y = lp.add_var(0.0, 0.0, INF);
        lp.add_row(vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn bound_flip_without_rows() {
        let mut lp = BoundedLP::new(Sense::Maximize);
        lp.add_var(2.0, -1.0, 3.0);
        lp.add_var(-1.0, -4.0, 5.0);
        let s = solve_lp(&lp).unwrap();
        assert!(close(s.objective, 10.0));
        assert_eq!(s.primal, vec![3.0, -4.0]);
    }

    #[test]
    fn free_and_reflected_variables() {
        // min x + y  s.t. x - y = 1, x + y >= -3, x free, y <= 0
        let mut lp = BoundedLP::new(Sense::Minimize);
        let x = lp.add_var(1.0, -INF, INF);
        let y = lp.add_var(1.0, -INF, 0.0);
        lp.add_row(vec![(x, 1.0), (y, -1.0)], Relation::Eq, 1.0);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Relation::Ge, -3.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!(close(s.objective, -3.0));
        assert!(close(s.primal[x] - s.primal[y], 1.0));
        assert!(close(s.dual_objective(&lp), -3.0));
    }

    #[test]
    fn equality_rows_need_phase_one() {
        // max 3a + 2b s.t. a + b = 4, a - b >= 1, a <= 3
        let mut lp = BoundedLP::new(Sense::Maximize);
        let a = lp.add_var(3.0, 0.0, 3.0);
        let b = lp.add_var(2.0, 0.0, INF);
        lp.add_row(vec![(a, 1.0), (b, 1.0)], Relation::Eq, 4.0);
        lp.add_row(vec![(a, 1.0), (b, -1.0)], Relation::Ge, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert!(close(s.objective, 11.0));
        assert!(close(s.dual_objective(&lp), 11.0));
        assert!(s.complementary_slackness_residual(&lp) < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance
        let mut lp = BoundedLP::new(Sense::Minimize);
        let x: Vec<usize> = [-0.75, 150.0, -0.02, 6.0].iter().map(|&c| lp.add_var(c, 0.0, INF)).collect();
        lp.add_row(vec![(x[0], 0.25), (x[1], -60.0), (x[2], -0.04), (x[3], 9.0)], Relation::Le, 0.0);
        lp.add_row(vec![(x[0], 0.5), (x[1], -90.0), (x[2], -0.02), (x[3], 3.0)], Relation::Le, 0.0);
        lp.add_row(vec![(x[2], 1.0)], Relation::Le, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert!(close(s.objective, -0.05));
    }
}
