//! Arc pricing through a family of cardinality-constrained knapsacks.
//!
//! With jobs renumbered in LPT order, `g_r(tau, l)` is the best total dual
//! profit of `l` jobs among positions `r..=n` whose sizes sum to at most
//! `tau`. For a pair of nodes `i < k`, the cheapest arc is always among the
//! batches `B_r(C, k - i)` with `r` a breakpoint of the LPT order (a position
//! where the processing time strictly drops), so one memoized table serves
//! every pair and, for identical machines, every machine.

use std::collections::HashSet;

use thiserror::Error;

use crate::model::{ArcColumn, Batch, Instance, JobId};

/// Default tolerance on negative reduced costs.
pub const EPS_NEG: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("knapsack index out of range: r={r}, tau={tau}, l={l}")]
    IndexOutOfRange { r: usize, tau: u64, l: usize },
    #[error("dual vectors have the wrong shape: {0}")]
    DualShape(String),
}

/// Simplex multipliers of the restricted master: `u[h][node - 1]` for the
/// flow rows of machine `h`, `v[job - 1]` for the partition rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DualValues {
    u: Vec<Vec<f64>>,
    v: Vec<f64>,
}

impl DualValues {
    pub fn new(u: Vec<Vec<f64>>, v: Vec<f64>) -> Result<Self, PricingError> {
        let n = v.len();
        if u.is_empty() {
            return Err(PricingError::DualShape("no machine multipliers".into()));
        }
        if let Some(bad) = u.iter().find(|row| row.len() != n + 1) {
            return Err(PricingError::DualShape(format!(
                "expected {} node multipliers, found {}",
                n + 1,
                bad.len()
            )));
        }
        if u.iter().flatten().chain(&v).any(|x| !x.is_finite()) {
            return Err(PricingError::DualShape("non-finite multiplier".into()));
        }
        Ok(Self { u, v })
    }

    /// All-zero multipliers.
    pub fn zeros(n: usize, machines: usize) -> Self {
        Self {
            u: vec![vec![0.0; n + 1]; machines],
            v: vec![0.0; n],
        }
    }

    pub fn machines(&self) -> usize {
        self.u.len()
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// Multiplier of node `node` (1-based) on machine `h` (0-based).
    pub fn u(&self, h: usize, node: usize) -> f64 {
        self.u[h][node - 1]
    }

    pub fn v(&self, job: JobId) -> f64 {
        self.v[job - 1]
    }

    pub fn node_duals(&self, h: usize) -> &[f64] {
        &self.u[h]
    }

    pub fn job_duals(&self) -> &[f64] {
        &self.v
    }

    /// Reduced cost of `arc` placed on machine `h`.
    pub fn reduced_cost(&self, arc: &ArcColumn, h: usize) -> f64 {
        let profit: f64 = arc.batch().jobs().iter().map(|&j| self.v(j)).sum();
        arc.cost() as f64 - (self.u(h, arc.tail()) - self.u(h, arc.head())) - profit
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    /// `None` is the infeasible (minus infinity) state.
    value: Option<f64>,
    take: bool,
}

/// Memoized `g_r(tau, l)` over the LPT renumbering of an instance.
///
/// Entries are created on first query. Only states with `1 <= l <= n - r + 1`
/// are stored; the rest are boundary values.
#[derive(Debug, Clone)]
pub struct KnapsackTable {
    n: usize,
    capacity: usize,
    lpt: Vec<JobId>,
    sizes: Vec<usize>,
    profits: Vec<f64>,
    memo: Vec<Option<Entry>>,
    created: usize,
}

/// An optimal knapsack value together with its job set (original ids).
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSolution {
    pub value: f64,
    pub jobs: Vec<JobId>,
}

impl KnapsackTable {
    /// `profits` are indexed by job id (`profits[j - 1]`).
    pub fn new(inst: &Instance, profits: &[f64]) -> Self {
        let lpt = inst.lpt_order();
        let n = inst.n();
        let capacity = inst.capacity() as usize;
        Self {
            n,
            capacity,
            sizes: lpt.iter().map(|&j| inst.job(j).size as usize).collect(),
            profits: lpt.iter().map(|&j| profits[j - 1]).collect(),
            lpt,
            memo: vec![None; n * (capacity + 1) * (n + 1)],
            created: 0,
        }
    }

    /// Job ids in LPT position order (`lpt()[r - 1]` sits at position `r`).
    pub fn lpt(&self) -> &[JobId] {
        &self.lpt
    }

    /// Number of memo entries filled so far.
    pub fn entries_created(&self) -> usize {
        self.created
    }

    /// `g_r(tau, l)` and a maximizing job set, or `None` when no `l` jobs of
    /// positions `r..=n` fit in `tau`.
    pub fn knapsack(
        &mut self,
        r: usize,
        tau: u64,
        l: usize,
    ) -> Result<Option<KnapsackSolution>, PricingError> {
        if r == 0 || r > self.n || tau as usize > self.capacity || l > self.n {
            return Err(PricingError::IndexOutOfRange { r, tau, l });
        }
        let tau = tau as usize;
        let Some(value) = self.value(r, tau, l) else {
            return Ok(None);
        };
        let jobs = self.backtrack(r, tau, l);
        Ok(Some(KnapsackSolution { value, jobs }))
    }

    fn slot(&self, r: usize, tau: usize, l: usize) -> usize {
        ((r - 1) * (self.capacity + 1) + tau) * (self.n + 1) + l
    }

    fn value(&mut self, r: usize, tau: usize, l: usize) -> Option<f64> {
        if l == 0 {
            return Some(0.0);
        }
        if r > self.n || l > self.n - r + 1 {
            return None;
        }
        self.entry(r, tau, l).value
    }

    fn entry(&mut self, r: usize, tau: usize, l: usize) -> Entry {
        let slot = self.slot(r, tau, l);
        if let Some(e) = self.memo[slot] {
            return e;
        }
        let size = self.sizes[r - 1];
        let with = if size <= tau {
            self.value(r + 1, tau - size, l - 1)
                .map(|g| g + self.profits[r - 1])
        } else {
            None
        };
        let without = self.value(r + 1, tau, l);
        let e = match (with, without) {
            (Some(a), Some(b)) if b > a => Entry { value: Some(b), take: false },
            (Some(a), _) => Entry { value: Some(a), take: true },
            (None, b) => Entry { value: b, take: false },
        };
        self.memo[slot] = Some(e);
        self.created += 1;
        e
    }

    fn backtrack(&mut self, mut r: usize, mut tau: usize, mut l: usize) -> Vec<JobId> {
        let mut jobs = Vec::with_capacity(l);
        while l > 0 {
            let e = self.entry(r, tau, l);
            if e.take {
                jobs.push(self.lpt[r - 1]);
                tau -= self.sizes[r - 1];
                l -= 1;
            }
            r += 1;
        }
        jobs.sort_unstable();
        jobs
    }
}

/// LPT positions where the processing time strictly drops, plus position 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakpointSet {
    positions: Vec<usize>,
}

impl BreakpointSet {
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }
}

pub fn breakpoints(inst: &Instance) -> BreakpointSet {
    let times: Vec<u64> = inst
        .lpt_order()
        .iter()
        .map(|&j| inst.job(j).processing_time)
        .collect();
    let mut positions = vec![1];
    positions.extend((2..=times.len()).filter(|&j| times[j - 1] < times[j - 2]));
    BreakpointSet { positions }
}

/// A priced column: `arc` placed on machine `machine` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct PricedArc {
    pub arc: ArcColumn,
    pub machine: usize,
    pub reduced_cost: f64,
}

#[derive(Debug, Clone)]
struct Candidate {
    profit: f64,
    batch: Batch,
}

/// One pricing round: a fresh knapsack table for the current job duals and
/// the candidate batches `B_r(C, l)` for every cardinality `l` and
/// breakpoint `r`.
#[derive(Debug)]
pub struct Pricer<'a> {
    inst: &'a Instance,
    table: KnapsackTable,
    candidates: Vec<Vec<Candidate>>,
}

impl<'a> Pricer<'a> {
    pub fn new(inst: &'a Instance, duals: &DualValues) -> Result<Self, PricingError> {
        if duals.n() != inst.n() {
            return Err(PricingError::DualShape(format!(
                "expected {} job multipliers, found {}",
                inst.n(),
                duals.n()
            )));
        }
        let mut table = KnapsackTable::new(inst, duals.job_duals());
        let roots = breakpoints(inst);
        let n = inst.n();
        let cap = inst.capacity();
        let mut candidates = vec![Vec::new(); n + 1];
        for (l, slot) in candidates.iter_mut().enumerate().skip(1) {
            for &r in roots.positions() {
                if l > n - r + 1 {
                    break;
                }
                if let Some(sol) = table.knapsack(r, cap, l)? {
                    slot.push(Candidate {
                        profit: sol.value,
                        batch: Batch::from_sorted(inst, sol.jobs),
                    });
                }
            }
        }
        Ok(Self {
            inst,
            table,
            candidates,
        })
    }

    pub fn memo_entries(&self) -> usize {
        self.table.entries_created()
    }

    /// Best machine-independent part `(n - i + 1) p_B - g` over the
    /// candidates of cardinality `k - i`.
    fn best_candidate(&self, i: usize, k: usize) -> Option<(f64, &Batch)> {
        let weight = (self.inst.n() - i + 1) as f64;
        let mut best: Option<(f64, &Batch)> = None;
        for c in &self.candidates[k - i] {
            let val = weight * c.batch.processing_time() as f64 - c.profit;
            if best.is_none_or(|(b, _)| val < b) {
                best = Some((val, &c.batch));
            }
        }
        best
    }

    /// Minimum reduced cost over all feasible batches of `k - i` jobs for the
    /// arc `(i, k)` on machine `h`, with a batch attaining it.
    pub fn min_reduced_cost(
        &self,
        duals: &DualValues,
        i: usize,
        k: usize,
        h: usize,
    ) -> Option<(f64, Batch)> {
        let (val, batch) = self.best_candidate(i, k)?;
        Some((val - (duals.u(h, i) - duals.u(h, k)), batch.clone()))
    }

    /// Every candidate arc with reduced cost below `-eps_neg` on one machine.
    pub fn new_cols_single(&self, duals: &DualValues, eps_neg: f64) -> Vec<PricedArc> {
        let n = self.inst.n();
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for l in 1..=n {
            for c in &self.candidates[l] {
                for i in 1..=n - l + 1 {
                    let k = i + l;
                    let rc = (n - i + 1) as f64 * c.batch.processing_time() as f64
                        - (duals.u(0, i) - duals.u(0, k))
                        - c.profit;
                    if rc < -eps_neg && seen.insert((i, k, c.batch.jobs().to_vec())) {
                        out.push(PricedArc {
                            arc: ArcColumn::new_unchecked(n, i, k, c.batch.clone()),
                            machine: 0,
                            reduced_cost: rc,
                        });
                    }
                }
            }
        }
        out
    }

    /// Identical-machine pricing: candidates are screened with the largest
    /// node-dual difference over machines, then emitted for every machine
    /// on which they price out negative.
    pub fn new_cols_identical(&self, duals: &DualValues, eps_neg: f64) -> Vec<PricedArc> {
        let n = self.inst.n();
        let m = duals.machines();
        let mut delta = vec![f64::NEG_INFINITY; (n + 2) * (n + 2)];
        for i in 1..=n {
            for k in i + 1..=n + 1 {
                delta[i * (n + 2) + k] = (0..m)
                    .map(|h| duals.u(h, i) - duals.u(h, k))
                    .fold(f64::NEG_INFINITY, f64::max);
            }
        }
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for l in 1..=n {
            for c in &self.candidates[l] {
                for i in 1..=n - l + 1 {
                    let k = i + l;
                    let base = (n - i + 1) as f64 * c.batch.processing_time() as f64 - c.profit;
                    if base - delta[i * (n + 2) + k] >= -eps_neg {
                        continue;
                    }
                    for h in 0..m {
                        let rc = base - (duals.u(h, i) - duals.u(h, k));
                        if rc < -eps_neg && seen.insert((i, k, c.batch.jobs().to_vec(), h)) {
                            out.push(PricedArc {
                                arc: ArcColumn::new_unchecked(n, i, k, c.batch.clone()),
                                machine: h,
                                reduced_cost: rc,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn new_cols_single(
    inst: &Instance,
    duals: &DualValues,
    eps_neg: f64,
) -> Result<Vec<PricedArc>, PricingError> {
    if duals.machines() != 1 {
        return Err(PricingError::DualShape(format!(
            "single-machine pricing needs one machine, found {}",
            duals.machines()
        )));
    }
    Ok(Pricer::new(inst, duals)?.new_cols_single(duals, eps_neg))
}

pub fn new_cols_identical(
    inst: &Instance,
    duals: &DualValues,
    eps_neg: f64,
) -> Result<Vec<PricedArc>, PricingError> {
    Ok(Pricer::new(inst, duals)?.new_cols_identical(duals, eps_neg))
}
