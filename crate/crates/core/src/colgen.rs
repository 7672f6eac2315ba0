//! Column generation and price-and-branch.
//!
//! [`run_cg`] starts the restricted master from SPT-consecutive batches,
//! then alternates LP solves and knapsack pricing until no arc prices out
//! negative; the final LP value is the lower bound `CG-LB`. [`price_and_branch`]
//! then restores integrality over the generated columns with a depth-first
//! LP-based branch-and-bound and reports the best schedule found as `CG-UB`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::LpStatus;
use crate::master::{build_master, LpSolution, MasterColumn, MasterError, RestrictedMaster};
use crate::model::{
    evaluate_schedule, paths_to_schedule, ArcColumn, Batch, Instance, JobId, ModelError, Path,
    Schedule,
};
use crate::pricing::{Pricer, PricingError, EPS_NEG};

#[derive(Debug, Error)]
pub enum CgError {
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("upper bound must be positive, got {0}")]
    NonPositiveUb(f64),
    #[error("single-machine pricing requested for {0} machines")]
    PricingRuleMismatch(usize),
}

/// Which pricing procedure drives the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PricingRule {
    /// Single-machine pricing for `m = 1`, identical-machine pricing otherwise.
    #[default]
    Auto,
    Single,
    Identical,
}

#[derive(Debug, Clone, Serialize)]
pub struct CgConfig {
    /// Wall-clock budget of the integer phase.
    #[serde(serialize_with = "secs")]
    pub ub_time_limit: Duration,
    pub eps_neg: f64,
    pub max_cg_iterations: usize,
    pub branch_node_limit: u64,
    pub pricing: PricingRule,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            ub_time_limit: Duration::from_secs(60),
            eps_neg: EPS_NEG,
            max_cg_iterations: 10_000,
            branch_node_limit: 1_000_000,
            pricing: PricingRule::Auto,
        }
    }
}

impl CgConfig {
    /// Defaults with the integer-phase limit used for `machines` machines:
    /// 60 s for one machine, 180 s for several.
    pub fn for_machines(machines: usize) -> Self {
        let secs = if machines > 1 { 180 } else { 60 };
        Self {
            ub_time_limit: Duration::from_secs(secs),
            ..Self::default()
        }
    }
}

/// State after the column generation phase.
#[derive(Debug)]
pub struct CgRun {
    pub master: RestrictedMaster,
    pub lp: LpSolution,
    /// The final LP value, claimed as a bound only when pricing converged.
    pub cg_lb: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub columns_generated: usize,
    pub lb_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CgResult {
    pub cg_lb: Option<f64>,
    pub cg_ub: Option<u64>,
    pub gap_percent: Option<f64>,
    pub schedule: Option<Schedule>,
    pub certified_optimal: bool,
    pub converged: bool,
    pub iterations: usize,
    pub columns_generated: usize,
    pub master_columns: usize,
    pub lb_seconds: f64,
    pub ub_seconds: f64,
    pub branch_nodes: u64,
    /// The integer phase stopped on its time or node limit.
    pub ub_limit_hit: bool,
}

/// Initial arcs: every singleton and every batch grown greedily from a job
/// over the following jobs in SPT order, each placed at every position.
pub fn init_cols(inst: &Instance) -> Vec<ArcColumn> {
    let n = inst.n();
    let spt = inst.spt_order();
    let mut batches: Vec<Vec<JobId>> = Vec::new();
    let mut seen = HashSet::new();
    let mut emit = |jobs: &[JobId], batches: &mut Vec<Vec<JobId>>| {
        let mut key = jobs.to_vec();
        key.sort_unstable();
        if seen.insert(key.clone()) {
            batches.push(key);
        }
    };
    for (pos, &j) in spt.iter().enumerate() {
        let mut batch = vec![j];
        let mut size = inst.job(j).size;
        emit(&batch, &mut batches);
        for &h in &spt[pos + 1..] {
            if size + inst.job(h).size <= inst.capacity() {
                size += inst.job(h).size;
                batch.push(h);
                emit(&batch, &mut batches);
            }
        }
    }
    let mut arcs = Vec::new();
    for jobs in batches {
        let len = jobs.len();
        let batch = Batch::from_sorted(inst, jobs);
        for i in 1..=n - len + 1 {
            arcs.push(ArcColumn::new_unchecked(n, i, i + len, batch.clone()));
        }
    }
    arcs
}

/// Percentage gap `100 (ub - lb) / ub`.
pub fn gap(ub: f64, lb: f64) -> Result<f64, CgError> {
    if ub.is_nan() || ub <= 0.0 {
        return Err(CgError::NonPositiveUb(ub));
    }
    Ok(100.0 * (ub - lb) / ub)
}

fn certified(ub: u64, lb: f64) -> bool {
    ub as f64 - lb <= 1e-6 * f64::max(1.0, ub as f64)
}

/// Column generation on the arc-flow master.
pub fn run_cg(inst: &Instance, config: &CgConfig) -> Result<CgRun, CgError> {
    let start = Instant::now();
    let identical = match config.pricing {
        PricingRule::Auto => inst.machines() > 1,
        PricingRule::Single if inst.machines() > 1 => {
            return Err(CgError::PricingRuleMismatch(inst.machines()))
        }
        PricingRule::Single => false,
        PricingRule::Identical => true,
    };
    let mut master = build_master(inst, init_cols(inst))?;
    let mut iterations = 0;
    let mut generated = 0;
    let mut converged = false;
    let mut lp = master.solve_lp()?;
    loop {
        iterations += 1;
        let pricer = Pricer::new(inst, &lp.duals)?;
        let arcs = if identical {
            pricer.new_cols_identical(&lp.duals, config.eps_neg)
        } else {
            pricer.new_cols_single(&lp.duals, config.eps_neg)
        };
        debug!(
            "cg iteration {iterations}: z={:.6} columns={} priced={}",
            lp.objective,
            master.columns().len(),
            arcs.len()
        );
        if arcs.is_empty() {
            converged = true;
            break;
        }
        let added = master.add_columns(arcs.into_iter().map(|p| MasterColumn {
            arc: p.arc,
            machine: p.machine,
        }))?;
        generated += added;
        if added == 0 {
            warn!("pricing returned only known columns; stopping at z={}", lp.objective);
            converged = true;
            break;
        }
        if iterations >= config.max_cg_iterations {
            lp = master.solve_lp()?;
            break;
        }
        lp = master.solve_lp()?;
    }
    Ok(CgRun {
        cg_lb: converged.then_some(lp.objective),
        master,
        lp,
        converged,
        iterations,
        columns_generated: generated,
        lb_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Column generation followed by branch-and-bound over the final columns.
pub fn price_and_branch(inst: &Instance, config: &CgConfig) -> Result<CgResult, CgError> {
    let mut run = run_cg(inst, config)?;
    let ub_start = Instant::now();
    let greedy = greedy_rounding(&run.master, &run.lp.primal)?;
    let greedy_value = evaluate_schedule(&greedy, inst)?;
    let mut bb = BranchAndBound {
        deadline: ub_start + config.ub_time_limit,
        node_limit: config.branch_node_limit,
        nodes: 0,
        limit_hit: false,
        best_value: greedy_value,
        best: greedy,
    };
    bb.run(&mut run.master)?;
    let ub_seconds = ub_start.elapsed().as_secs_f64();
    let cg_ub = evaluate_schedule(&bb.best, inst)?;
    let gap_percent = match run.cg_lb {
        Some(lb) => Some(gap(cg_ub as f64, lb)?),
        None => None,
    };
    Ok(CgResult {
        cg_lb: run.cg_lb,
        cg_ub: Some(cg_ub),
        gap_percent,
        certified_optimal: run.cg_lb.is_some_and(|lb| certified(cg_ub, lb)),
        schedule: Some(bb.best),
        converged: run.converged,
        iterations: run.iterations,
        columns_generated: run.columns_generated,
        master_columns: run.master.columns().len(),
        lb_seconds: run.lb_seconds,
        ub_seconds,
        branch_nodes: bb.nodes,
        ub_limit_hit: bb.limit_hit,
    })
}

fn smith_cmp(a: &Batch, b: &Batch) -> Ordering {
    (a.processing_time() * b.len() as u64)
        .cmp(&(b.processing_time() * a.len() as u64))
        .then(a.processing_time().cmp(&b.processing_time()))
        .then(a.jobs().cmp(b.jobs()))
}

/// Feasible schedule from an LP solution: take disjoint batches by
/// decreasing LP value, cover the remaining jobs with singletons, then list
/// schedule the batches in Smith order on the least loaded machine.
fn greedy_rounding(master: &RestrictedMaster, primal: &[f64]) -> Result<Schedule, CgError> {
    let inst = master.instance();
    let mut order: Vec<usize> = (0..master.columns().len())
        .filter(|&c| primal[c] > 1e-9 && !master.columns()[c].arc.is_empty_arc())
        .collect();
    order.sort_by(|&a, &b| primal[b].total_cmp(&primal[a]).then(a.cmp(&b)));
    let mut used = vec![false; inst.n() + 1];
    let mut batches = Vec::new();
    for c in order {
        let batch = master.columns()[c].arc.batch();
        if batch.jobs().iter().all(|&j| !used[j]) {
            for &j in batch.jobs() {
                used[j] = true;
            }
            batches.push(batch.clone());
        }
    }
    for (j, _) in used.iter().enumerate().skip(1).filter(|(_, &u)| !u) {
        batches.push(Batch::from_sorted(inst, vec![j]));
    }
    batches.sort_by(smith_cmp);
    let mut machines = vec![Vec::new(); inst.machines()];
    let mut load = vec![0u64; inst.machines()];
    for b in batches {
        let h = (0..load.len()).min_by_key(|&h| (load[h], h)).unwrap_or(0);
        load[h] += b.processing_time();
        machines[h].push(b);
    }
    Ok(Schedule::new(machines))
}

/// Schedule encoded by an integral master solution.
fn decode(master: &RestrictedMaster, primal: &[f64]) -> Result<Schedule, ModelError> {
    let inst = master.instance();
    let mut by_tail: Vec<HashMap<usize, &ArcColumn>> = vec![HashMap::new(); inst.machines()];
    for (c, col) in master.columns().iter().enumerate() {
        if primal[c] > 0.5 && by_tail[col.machine].insert(col.arc.tail(), &col.arc).is_some() {
            return Err(ModelError::BrokenChain);
        }
    }
    let mut paths = Vec::with_capacity(inst.machines());
    for tails in &by_tail {
        let mut arcs = Vec::new();
        let mut node = 1;
        while node <= inst.n() {
            let arc = tails.get(&node).ok_or(ModelError::BrokenChain)?;
            arcs.push((*arc).clone());
            node = arc.head();
        }
        paths.push(Path::new(arcs));
    }
    paths_to_schedule(&paths, inst)
}

const INT_TOL: f64 = 1e-6;

struct BranchAndBound {
    deadline: Instant,
    node_limit: u64,
    nodes: u64,
    limit_hit: bool,
    best_value: u64,
    best: Schedule,
}

impl BranchAndBound {
    /// Depth-first search; each stack entry is the full list of fixings
    /// `(column, value)` of a node. The 1-branch is explored first.
    fn run(&mut self, master: &mut RestrictedMaster) -> Result<(), CgError> {
        let mut stack: Vec<Vec<(usize, bool)>> = vec![Vec::new()];
        let mut applied: Vec<(usize, bool)> = Vec::new();
        let result = self.search(master, &mut stack, &mut applied);
        for &(c, _) in &applied {
            master.set_column_bounds(c, 0.0, f64::INFINITY);
        }
        result
    }

    fn search(
        &mut self,
        master: &mut RestrictedMaster,
        stack: &mut Vec<Vec<(usize, bool)>>,
        applied: &mut Vec<(usize, bool)>,
    ) -> Result<(), CgError> {
        while let Some(fixings) = stack.pop() {
            if self.nodes >= self.node_limit || Instant::now() >= self.deadline {
                self.limit_hit = true;
                return Ok(());
            }
            self.nodes += 1;
            let common = applied
                .iter()
                .zip(&fixings)
                .take_while(|(a, b)| a == b)
                .count();
            for &(c, _) in &applied[common..] {
                master.set_column_bounds(c, 0.0, f64::INFINITY);
            }
            applied.truncate(common);
            for &(c, one) in &fixings[common..] {
                if one {
                    master.set_column_bounds(c, 1.0, f64::INFINITY);
                } else {
                    master.set_column_bounds(c, 0.0, 0.0);
                }
                applied.push((c, one));
            }

            let sol = match master.solve_relaxation() {
                Ok(sol) => sol,
                Err(MasterError::NumericalFailure(e)) => {
                    warn!("branch-and-bound stopped on LP failure: {e}");
                    self.limit_hit = true;
                    return Ok(());
                }
                Err(e) => return Err(e.into()),
            };
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                LpStatus::IterationLimit => {
                    self.limit_hit = true;
                    continue;
                }
            }
            // integer objective: only strictly better integers are of interest
            if sol.objective > self.best_value as f64 - 1.0 + INT_TOL {
                continue;
            }
            let branch_on = sol
                .primal
                .iter()
                .enumerate()
                .filter(|&(_, &x)| x > INT_TOL && x < 1.0 - INT_TOL)
                .min_by(|&(a, &xa), &(b, &xb)| {
                    (xa - 0.5).abs().total_cmp(&(xb - 0.5).abs()).then(a.cmp(&b))
                })
                .map(|(c, _)| c);
            match branch_on {
                None => match decode(master, &sol.primal) {
                    Ok(sched) => {
                        let value = evaluate_schedule(&sched, master.instance())?;
                        if value < self.best_value {
                            debug!("branch-and-bound incumbent {value} at node {}", self.nodes);
                            self.best_value = value;
                            self.best = sched;
                        }
                    }
                    Err(e) => warn!("integral LP solution failed to decode: {e}"),
                },
                Some(c) => {
                    let mut zero = fixings.clone();
                    zero.push((c, false));
                    let mut one = fixings;
                    one.push((c, true));
                    stack.push(zero);
                    stack.push(one);
                }
            }
        }
        Ok(())
    }
}
