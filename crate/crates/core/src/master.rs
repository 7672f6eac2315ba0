//! The restricted master LP over a subset of arcs.
//!
//! Rows: for each machine `h`, one flow-conservation row per node `1..=n+1`
//! (right-hand side `+1` at node 1, `-1` at node `n+1`), followed by one
//! partition row per job. A column `(i, k, B)` on machine `h` has `+1` in the
//! flow row of `i`, `-1` in the flow row of `k` (both of machine `h`) and `1`
//! in the partition row of each job of `B`.

use std::collections::HashMap;

use thiserror::Error;

use crate::lp::{LpError, LpSolver, LpStatus, RevisedSimplex};
use crate::lpfile::{Constraint, LpDocument, Sense};
use crate::model::{ArcColumn, Instance, JobId};
use crate::pricing::DualValues;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MasterError {
    #[error("column references job {0}, which is not part of the instance")]
    ForeignJob(JobId),
    #[error("column {0} does not fit the instance graph")]
    ForeignArc(String),
    #[error("machine index {0} out of range")]
    ForeignMachine(usize),
    #[error("restricted master is infeasible")]
    Infeasible,
    #[error("LP iteration limit reached")]
    IterationLimit,
    #[error("LP numerical failure: {0}")]
    NumericalFailure(#[from] LpError),
}

/// An arc assigned to a machine (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MasterColumn {
    pub arc: ArcColumn,
    pub machine: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// One value per master column, in column order.
    pub primal: Vec<f64>,
    pub duals: DualValues,
}

type ColumnKey = (usize, usize, Vec<JobId>, usize);

pub struct RestrictedMaster<S: LpSolver = RevisedSimplex> {
    inst: Instance,
    columns: Vec<MasterColumn>,
    index: HashMap<ColumnKey, usize>,
    solver: S,
}

impl<S: LpSolver> std::fmt::Debug for RestrictedMaster<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RestrictedMaster")
            .field("n", &self.inst.n())
            .field("machines", &self.inst.machines())
            .field("columns", &self.columns.len())
            .finish()
    }
}

/// Builds the master with the built-in simplex. Each initial arc is placed on
/// every machine; with more than one machine all empty arcs `(1, k, {})` are
/// added for every machine as well.
pub fn build_master(
    inst: &Instance,
    initial: impl IntoIterator<Item = ArcColumn>,
) -> Result<RestrictedMaster, MasterError> {
    RestrictedMaster::with_solver(inst, initial, RevisedSimplex::new)
}

impl<S: LpSolver> RestrictedMaster<S> {
    /// Same as [`build_master`] with a caller-provided LP engine, created from
    /// the right-hand side vector.
    pub fn with_solver(
        inst: &Instance,
        initial: impl IntoIterator<Item = ArcColumn>,
        make_solver: impl FnOnce(Vec<f64>) -> S,
    ) -> Result<Self, MasterError> {
        let n = inst.n();
        let m = inst.machines();
        let mut rhs = vec![0.0; m * (n + 1) + n];
        for h in 0..m {
            rhs[h * (n + 1)] = 1.0;
            rhs[h * (n + 1) + n] = -1.0;
        }
        for r in rhs.iter_mut().skip(m * (n + 1)) {
            *r = 1.0;
        }
        let mut master = Self {
            inst: inst.clone(),
            columns: Vec::new(),
            index: HashMap::new(),
            solver: make_solver(rhs),
        };
        let mut cols = Vec::new();
        for arc in initial {
            for machine in 0..m {
                cols.push(MasterColumn {
                    arc: arc.clone(),
                    machine,
                });
            }
        }
        if m > 1 {
            for machine in 0..m {
                for head in 2..=n + 1 {
                    cols.push(MasterColumn {
                        arc: ArcColumn::new_unchecked(n, 1, head, crate::model::Batch::empty()),
                        machine,
                    });
                }
            }
        }
        master.add_columns(cols)?;
        Ok(master)
    }

    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    pub fn columns(&self) -> &[MasterColumn] {
        &self.columns
    }

    pub fn num_rows(&self) -> usize {
        self.solver.num_rows()
    }

    pub fn num_flow_rows(&self) -> usize {
        self.inst.machines() * (self.inst.n() + 1)
    }

    pub fn num_partition_rows(&self) -> usize {
        self.inst.n()
    }

    fn flow_row(&self, machine: usize, node: usize) -> usize {
        machine * (self.inst.n() + 1) + node - 1
    }

    fn partition_row(&self, job: JobId) -> usize {
        self.num_flow_rows() + job - 1
    }

    fn check(&self, col: &MasterColumn) -> Result<(), MasterError> {
        let n = self.inst.n();
        if col.machine >= self.inst.machines() {
            return Err(MasterError::ForeignMachine(col.machine));
        }
        if let Some(&j) = col.arc.batch().jobs().iter().find(|&&j| !self.inst.contains(j)) {
            return Err(MasterError::ForeignJob(j));
        }
        let arc = &col.arc;
        let expected = (n + 1).saturating_sub(arc.tail()) as u64 * arc.batch().processing_time();
        let shape_ok = arc.head() <= n + 1
            && (arc.batch().is_empty() || arc.batch().len() == arc.head() - arc.tail())
            && arc.cost() == expected
            && arc.batch().fits(self.inst.capacity());
        if !shape_ok {
            return Err(MasterError::ForeignArc(arc.to_string()));
        }
        Ok(())
    }

    /// Appends columns, skipping any already present. Returns the number of
    /// columns actually added.
    pub fn add_columns(
        &mut self,
        cols: impl IntoIterator<Item = MasterColumn>,
    ) -> Result<usize, MasterError> {
        let mut added = 0;
        for col in cols {
            self.check(&col)?;
            let key = (
                col.arc.tail(),
                col.arc.head(),
                col.arc.batch().jobs().to_vec(),
                col.machine,
            );
            if self.index.contains_key(&key) {
                continue;
            }
            let mut entries = vec![
                (self.flow_row(col.machine, col.arc.tail()), 1.0),
                (self.flow_row(col.machine, col.arc.head()), -1.0),
            ];
            entries.extend(col.arc.batch().jobs().iter().map(|&j| (self.partition_row(j), 1.0)));
            let idx = self.solver.add_column(col.arc.cost() as f64, &entries);
            debug_assert_eq!(idx, self.columns.len());
            self.index.insert(key, idx);
            self.columns.push(col);
            added += 1;
        }
        Ok(added)
    }

    pub fn set_column_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.solver.set_bounds(col, lower, upper);
    }

    pub fn column_bounds(&self, col: usize) -> (f64, f64) {
        self.solver.bounds(col)
    }

    /// Solves the current LP; infeasibility is reported through the status.
    pub fn solve_relaxation(&mut self) -> Result<LpSolution, MasterError> {
        let status = self.solver.solve()?;
        let n = self.inst.n();
        let m = self.inst.machines();
        let duals = if status == LpStatus::Optimal {
            let y = self.solver.duals();
            let u = (0..m).map(|h| y[h * (n + 1)..(h + 1) * (n + 1)].to_vec()).collect();
            let v = y[m * (n + 1)..].to_vec();
            DualValues::new(u, v).map_err(|_| MasterError::NumericalFailure(LpError::SingularBasis))?
        } else {
            DualValues::zeros(n, m)
        };
        Ok(LpSolution {
            status,
            objective: self.solver.objective(),
            primal: self.solver.primal(),
            duals,
        })
    }

    /// Solves the current LP and returns the optimal primal and dual values.
    pub fn solve_lp(&mut self) -> Result<LpSolution, MasterError> {
        let sol = self.solve_relaxation()?;
        match sol.status {
            LpStatus::Optimal => Ok(sol),
            LpStatus::Infeasible => Err(MasterError::Infeasible),
            LpStatus::IterationLimit => Err(MasterError::IterationLimit),
        }
    }

    /// Column variable name used in text dumps.
    pub fn column_name(&self, idx: usize) -> String {
        let c = &self.columns[idx];
        let jobs: Vec<String> = c.arc.batch().jobs().iter().map(|j| j.to_string()).collect();
        format!(
            "x_{}_{}_{}_m{}",
            c.arc.tail(),
            c.arc.head(),
            if jobs.is_empty() { "e".to_string() } else { jobs.join("_") },
            c.machine + 1
        )
    }

    /// The current restricted master (continuous) in LP text format.
    pub fn to_lp_text(&self) -> String {
        let n = self.inst.n();
        let m = self.inst.machines();
        let names: Vec<String> = (0..self.columns.len()).map(|i| self.column_name(i)).collect();
        let mut rows: Vec<Vec<(i64, String)>> = vec![Vec::new(); self.num_rows()];
        for (idx, col) in self.columns.iter().enumerate() {
            rows[self.flow_row(col.machine, col.arc.tail())].push((1, names[idx].clone()));
            rows[self.flow_row(col.machine, col.arc.head())].push((-1, names[idx].clone()));
            for &j in col.arc.batch().jobs() {
                rows[self.partition_row(j)].push((1, names[idx].clone()));
            }
        }
        let mut constraints = Vec::with_capacity(rows.len());
        for h in 0..m {
            for node in 1..=n + 1 {
                let rhs = if node == 1 {
                    1
                } else if node == n + 1 {
                    -1
                } else {
                    0
                };
                constraints.push(Constraint {
                    name: format!("flow_m{}_{}", h + 1, node),
                    terms: std::mem::take(&mut rows[self.flow_row(h, node)]),
                    sense: Sense::Eq,
                    rhs,
                });
            }
        }
        for j in 1..=n {
            constraints.push(Constraint {
                name: format!("part_{j}"),
                terms: std::mem::take(&mut rows[self.partition_row(j)]),
                sense: Sense::Eq,
                rhs: 1,
            });
        }
        LpDocument {
            comment: vec![format!(
                "restricted master: n={n} m={m} C={} columns={}",
                self.inst.capacity(),
                self.columns.len()
            )],
            objective: self
                .columns
                .iter()
                .zip(&names)
                .map(|(c, name)| (c.arc.cost() as i64, name.clone()))
                .collect(),
            constraints,
            bounds: Vec::new(),
            binaries: Vec::new(),
        }
        .render()
    }
}
