//! Linear programming engine used by the restricted master.
//!
//! [`RevisedSimplex`] solves `min c'x  s.t.  Ax = b, l <= x <= u` with a dense
//! explicit basis inverse, sparse columns and bounded variables. Every row
//! owns an artificial variable fixed to zero; the initial basis is made of
//! the artificials and a composite phase 1 (minimize the sum of bound
//! violations of the basic variables) drives it to feasibility. The same
//! phase 1 repairs a warm basis after bound changes, so the engine can be
//! re-solved after columns are appended or bounds are tightened.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("basis matrix became singular")]
    SingularBasis,
    #[error("problem is unbounded")]
    Unbounded,
}

/// The operations the master problem needs from an LP solver. Columns are
/// created with bounds `[0, +inf)`.
pub trait LpSolver {
    fn num_rows(&self) -> usize;
    fn num_cols(&self) -> usize;
    fn add_column(&mut self, cost: f64, entries: &[(usize, f64)]) -> usize;
    fn set_bounds(&mut self, col: usize, lower: f64, upper: f64);
    fn bounds(&self, col: usize) -> (f64, f64);
    fn solve(&mut self) -> Result<LpStatus, LpError>;
    /// Objective of the last solve.
    fn objective(&self) -> f64;
    /// Column values of the last solve.
    fn primal(&self) -> Vec<f64>;
    /// Row multipliers of the last optimal solve.
    fn duals(&self) -> Vec<f64>;
}

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Bound violation tolerated on basic variables.
    pub feasibility_tol: f64,
    /// Reduced cost magnitude needed to enter the basis.
    pub optimality_tol: f64,
    /// Smallest usable pivot element.
    pub pivot_tol: f64,
    /// Pivots between basis re-inversions.
    pub refactor_every: usize,
    pub max_iterations: usize,
    /// Consecutive degenerate pivots (as a multiple of the row count) before
    /// switching to Bland's rule.
    pub bland_factor: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            refactor_every: 100,
            max_iterations: 2_000_000,
            bland_factor: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    Lower,
    Upper,
}

/// Bounded-variable revised simplex.
#[derive(Debug, Clone)]
pub struct RevisedSimplex {
    rows: usize,
    rhs: Vec<f64>,
    // variable v < rows is the artificial of row v; v >= rows is column v - rows
    columns: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    since_refactor: usize,
    stale_values: bool,
    duals: Vec<f64>,
    objective: f64,
    iterations: usize,
    opts: SimplexOptions,
}

impl RevisedSimplex {
    pub fn new(rhs: Vec<f64>) -> Self {
        Self::with_options(rhs, SimplexOptions::default())
    }

    pub fn with_options(rhs: Vec<f64>, opts: SimplexOptions) -> Self {
        let rows = rhs.len();
        let mut binv = vec![0.0; rows * rows];
        let mut columns = Vec::with_capacity(rows);
        let mut x = Vec::with_capacity(rows);
        for (r, &b) in rhs.iter().enumerate() {
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            columns.push(vec![(r, sign)]);
            binv[r * rows + r] = sign;
            x.push(b.abs());
        }
        Self {
            rows,
            columns,
            cost: vec![0.0; rows],
            lower: vec![0.0; rows],
            upper: vec![0.0; rows],
            x,
            state: (0..rows).map(VarState::Basic).collect(),
            basis: (0..rows).collect(),
            binv,
            rhs,
            since_refactor: 0,
            stale_values: false,
            duals: vec![0.0; rows],
            objective: 0.0,
            iterations: 0,
            opts,
        }
    }

    /// Simplex pivots (including bound flips) performed so far.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn is_feasible(&self, var: usize) -> bool {
        let x = self.x[var];
        x >= self.lower[var] - self.opts.feasibility_tol
            && x <= self.upper[var] + self.opts.feasibility_tol
    }

    /// Re-inverts the basis with Gauss-Jordan elimination and recomputes the
    /// basic values from the nonbasic ones.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.rows;
        let mut a = vec![0.0; m * m];
        for (pos, &var) in self.basis.iter().enumerate() {
            for &(r, val) in &self.columns[var] {
                a[r * m + pos] = val;
            }
        }
        let mut inv = vec![0.0; m * m];
        for r in 0..m {
            inv[r * m + r] = 1.0;
        }
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&i, &j| a[i * m + c].abs().total_cmp(&a[j * m + c].abs()))
                .ok_or(LpError::SingularBasis)?;
            if a[piv * m + c].abs() < 1e-11 {
                return Err(LpError::SingularBasis);
            }
            if piv != c {
                for k in 0..m {
                    a.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        // `inv` is B^-1 with rows indexed by basis position
        self.binv = inv;
        self.since_refactor = 0;
        self.recompute_basic_values();
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let m = self.rows;
        let mut resid = self.rhs.clone();
        for (var, st) in self.state.iter().enumerate() {
            if matches!(st, VarState::Basic(_)) {
                continue;
            }
            let xv = self.x[var];
            if xv != 0.0 {
                for &(r, val) in &self.columns[var] {
                    resid[r] -= val * xv;
                }
            }
        }
        for pos in 0..m {
            let row = &self.binv[pos * m..(pos + 1) * m];
            let v: f64 = row.iter().zip(&resid).map(|(a, b)| a * b).sum();
            self.x[self.basis[pos]] = v;
        }
        self.stale_values = false;
    }

    fn ftran(&self, var: usize) -> Vec<f64> {
        let m = self.rows;
        let col = &self.columns[var];
        (0..m)
            .map(|pos| {
                let row = &self.binv[pos * m..(pos + 1) * m];
                col.iter().map(|&(r, val)| row[r] * val).sum()
            })
            .collect()
    }

    fn row_prices(&self, basic_cost: &[f64]) -> Vec<f64> {
        let m = self.rows;
        let mut y = vec![0.0; m];
        for (pos, &cb) in basic_cost.iter().enumerate() {
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[pos * m..(pos + 1) * m];
            for (yc, &b) in y.iter_mut().zip(row) {
                *yc += cb * b;
            }
        }
        y
    }

    fn pivot(&mut self, leave_pos: usize, w: &[f64]) {
        let m = self.rows;
        let piv = w[leave_pos];
        let (before, rest) = self.binv.split_at_mut(leave_pos * m);
        let (prow, after) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        for (r, chunk) in before.chunks_mut(m).enumerate() {
            let f = w[r];
            if f != 0.0 {
                for (a, &p) in chunk.iter_mut().zip(prow.iter()) {
                    *a -= f * p;
                }
            }
        }
        for (off, chunk) in after.chunks_mut(m).enumerate() {
            let f = w[leave_pos + 1 + off];
            if f != 0.0 {
                for (a, &p) in chunk.iter_mut().zip(prow.iter()) {
                    *a -= f * p;
                }
            }
        }
    }

    fn finish_optimal(&mut self) {
        let cb: Vec<f64> = self.basis.iter().map(|&v| self.cost[v]).collect();
        self.duals = self.row_prices(&cb);
        self.objective = (self.rows..self.columns.len())
            .map(|v| self.cost[v] * self.x[v])
            .sum();
    }

    fn run(&mut self) -> Result<LpStatus, LpError> {
        let m = self.rows;
        let tol = self.opts.optimality_tol;
        let mut degenerate = 0usize;
        let mut budget = self.opts.max_iterations;
        loop {
            if self.stale_values || self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let phase_one = self.basis.iter().any(|&v| !self.is_feasible(v));
            let cb: Vec<f64> = self
                .basis
                .iter()
                .map(|&v| {
                    if phase_one {
                        if self.x[v] < self.lower[v] - self.opts.feasibility_tol {
                            -1.0
                        } else if self.x[v] > self.upper[v] + self.opts.feasibility_tol {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        self.cost[v]
                    }
                })
                .collect();
            let y = self.row_prices(&cb);
            let bland = degenerate > self.opts.bland_factor * m.max(1);

            let mut entering: Option<(usize, f64, f64)> = None;
            for var in m..self.columns.len() {
                let dir = match self.state[var] {
                    VarState::Basic(_) => continue,
                    VarState::Lower if self.upper[var] > self.lower[var] => 1.0,
                    VarState::Upper if self.upper[var] > self.lower[var] => -1.0,
                    _ => continue,
                };
                let c = if phase_one { 0.0 } else { self.cost[var] };
                let d = c - self.columns[var].iter().map(|&(r, a)| y[r] * a).sum::<f64>();
                if d * dir < -tol {
                    let score = d.abs();
                    if bland {
                        entering = Some((var, dir, score));
                        break;
                    }
                    if entering.is_none_or(|(_, _, s)| score > s) {
                        entering = Some((var, dir, score));
                    }
                }
            }

            let Some((q, dir, _)) = entering else {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                if phase_one {
                    return Ok(LpStatus::Infeasible);
                }
                self.finish_optimal();
                return Ok(LpStatus::Optimal);
            };

            if budget == 0 {
                return Ok(LpStatus::IterationLimit);
            }
            budget -= 1;
            self.iterations += 1;

            let w = self.ftran(q);
            let mut theta = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, f64)> = None;
            let mut best_pivot = 0.0;
            for pos in 0..m {
                let wp = w[pos];
                if wp.abs() <= self.opts.pivot_tol {
                    continue;
                }
                let var = self.basis[pos];
                let rate = -dir * wp;
                let xv = self.x[var];
                let (lo, hi) = (self.lower[var], self.upper[var]);
                let ftol = self.opts.feasibility_tol;
                let (limit, bound) = if phase_one && xv < lo - ftol {
                    if rate > 0.0 {
                        ((lo - xv) / rate, lo)
                    } else {
                        continue;
                    }
                } else if phase_one && xv > hi + ftol {
                    if rate < 0.0 {
                        ((xv - hi) / -rate, hi)
                    } else {
                        continue;
                    }
                } else if rate < 0.0 {
                    (((xv - lo) / -rate).max(0.0), lo)
                } else if hi.is_finite() {
                    (((hi - xv) / rate).max(0.0), hi)
                } else {
                    continue;
                };
                let take = if limit < theta - 1e-12 {
                    true
                } else if limit <= theta + 1e-12 {
                    match leave {
                        None => true,
                        Some(_) if bland => var < self.basis[leave.unwrap().0],
                        Some(_) => wp.abs() > best_pivot,
                    }
                } else {
                    false
                };
                if take {
                    theta = theta.min(limit).max(0.0);
                    leave = Some((pos, bound));
                    best_pivot = wp.abs();
                }
            }

            if !theta.is_finite() {
                return Err(LpError::Unbounded);
            }

            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            self.x[q] += dir * theta;
            for pos in 0..m {
                if w[pos] != 0.0 {
                    let var = self.basis[pos];
                    self.x[var] -= dir * theta * w[pos];
                }
            }
            match leave {
                None => {
                    // bound flip
                    if dir > 0.0 {
                        self.state[q] = VarState::Upper;
                        self.x[q] = self.upper[q];
                    } else {
                        self.state[q] = VarState::Lower;
                        self.x[q] = self.lower[q];
                    }
                }
                Some((pos, bound)) => {
                    let out = self.basis[pos];
                    self.x[out] = bound;
                    self.state[out] = if bound == self.lower[out] {
                        VarState::Lower
                    } else {
                        VarState::Upper
                    };
                    self.basis[pos] = q;
                    self.state[q] = VarState::Basic(pos);
                    self.pivot(pos, &w);
                    self.since_refactor += 1;
                }
            }
        }
    }
}

impl LpSolver for RevisedSimplex {
    fn num_rows(&self) -> usize {
        self.rows
    }

    fn num_cols(&self) -> usize {
        self.columns.len() - self.rows
    }

    fn add_column(&mut self, cost: f64, entries: &[(usize, f64)]) -> usize {
        debug_assert!(entries.iter().all(|&(r, _)| r < self.rows));
        self.columns.push(entries.to_vec());
        self.cost.push(cost);
        self.lower.push(0.0);
        self.upper.push(f64::INFINITY);
        self.x.push(0.0);
        self.state.push(VarState::Lower);
        self.columns.len() - self.rows - 1
    }

    fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        assert!(lower.is_finite() && lower <= upper, "invalid bounds [{lower}, {upper}]");
        let var = col + self.rows;
        self.lower[var] = lower;
        self.upper[var] = upper;
        match self.state[var] {
            VarState::Basic(_) => {}
            VarState::Upper if upper.is_finite() => {
                self.x[var] = upper;
                self.stale_values = true;
            }
            _ => {
                self.state[var] = VarState::Lower;
                self.x[var] = lower;
                self.stale_values = true;
            }
        }
    }

    fn bounds(&self, col: usize) -> (f64, f64) {
        let var = col + self.rows;
        (self.lower[var], self.upper[var])
    }

    fn solve(&mut self) -> Result<LpStatus, LpError> {
        self.run()
    }

    fn objective(&self) -> f64 {
        self.objective
    }

    fn primal(&self) -> Vec<f64> {
        self.x[self.rows..].to_vec()
    }

    fn duals(&self) -> Vec<f64> {
        self.duals.clone()
    }
}
