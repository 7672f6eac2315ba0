//! Instances, batches, schedules and their arc-flow encoding.
//!
//! A batch sequence `(B_1, ..., B_t)` on one machine is a path
//! `1 -> 1+|B_1| -> ... -> n+1` in a multigraph over nodes `1..=n+1`. The arc
//! `(i, k, B)` says that `n - i + 1` jobs are scheduled from `B` to the end of
//! the sequence, so its positional cost `(n - i + 1) * p_B` is exactly the
//! contribution of `p_B` to the total completion time. With `m` machines every
//! path starts with an empty placeholder arc `(1, k, {})` of cost zero.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 1-based job identifier.
pub type JobId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("instance has no jobs")]
    EmptyInstance,
    #[error("job {job} has a non-positive {field}")]
    NonPositive { job: JobId, field: &'static str },
    #[error("job {0} does not fit in the machine capacity")]
    OversizedJob(JobId),
    #[error("machine count must be at least 1")]
    NoMachines,
    #[error("job {0} is not part of the instance")]
    UnknownJob(JobId),
    #[error("job {0} appears more than once")]
    DuplicateJob(JobId),
    #[error("batches do not partition the job set")]
    NotAPartition,
    #[error("batch {0:?} exceeds the machine capacity")]
    CapacityViolation(Vec<JobId>),
    #[error("expected {expected} machine sequences, found {found}")]
    MachineCountMismatch { expected: usize, found: usize },
    #[error("invalid arc: {0}")]
    InvalidArc(String),
    #[error("path arcs do not chain from node 1 to node n+1")]
    BrokenChain,
    #[error("path arcs do not partition the job set")]
    PartitionMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub processing_time: u64,
    pub size: u64,
}

/// A validated problem instance. Jobs are stored in id order (`jobs[j - 1]`
/// has id `j`); orderings used by the algorithms are derived views.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    jobs: Vec<Job>,
    capacity: u64,
    machines: usize,
}

impl Instance {
    /// Builds an instance from `(processing_time, size)` pairs, assigning ids
    /// `1..=n` in input order.
    pub fn new(raw: &[(u64, u64)], capacity: u64, machines: usize) -> Result<Self, ModelError> {
        validate_instance(raw, capacity, machines)
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    /// # Panics
    /// If `id` is not in `1..=n`.
    pub fn job(&self, id: JobId) -> &Job {
        &self.jobs[id - 1]
    }

    pub fn contains(&self, id: JobId) -> bool {
        (1..=self.n()).contains(&id)
    }

    /// Same jobs, different machine count.
    pub fn with_machines(&self, machines: usize) -> Result<Self, ModelError> {
        if machines == 0 {
            return Err(ModelError::NoMachines);
        }
        Ok(Self {
            machines,
            ..self.clone()
        })
    }

    /// Job ids by non-increasing processing time, ties by ascending id.
    pub fn lpt_order(&self) -> Vec<JobId> {
        let mut ids: Vec<JobId> = (1..=self.n()).collect();
        ids.sort_by(|&a, &b| {
            self.job(b)
                .processing_time
                .cmp(&self.job(a).processing_time)
                .then(a.cmp(&b))
        });
        ids
    }

    /// Job ids by non-decreasing processing time, ties by ascending id.
    pub fn spt_order(&self) -> Vec<JobId> {
        let mut ids: Vec<JobId> = (1..=self.n()).collect();
        ids.sort_by_key(|&j| (self.job(j).processing_time, j));
        ids
    }

    pub fn total_processing_time(&self) -> u64 {
        self.jobs.iter().map(|j| j.processing_time).sum()
    }
}

pub fn validate_instance(
    raw: &[(u64, u64)],
    capacity: u64,
    machines: usize,
) -> Result<Instance, ModelError> {
    if raw.is_empty() {
        return Err(ModelError::EmptyInstance);
    }
    if machines == 0 {
        return Err(ModelError::NoMachines);
    }
    let mut jobs = Vec::with_capacity(raw.len());
    for (idx, &(p, s)) in raw.iter().enumerate() {
        let id = idx + 1;
        if p == 0 {
            return Err(ModelError::NonPositive {
                job: id,
                field: "processing time",
            });
        }
        if s == 0 {
            return Err(ModelError::NonPositive { job: id, field: "size" });
        }
        if s > capacity {
            return Err(ModelError::OversizedJob(id));
        }
        jobs.push(Job {
            id,
            processing_time: p,
            size: s,
        });
    }
    Ok(Instance {
        jobs,
        capacity,
        machines,
    })
}

/// A set of jobs processed together. Job ids are kept sorted so that equal
/// batches compare and hash equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Batch {
    jobs: Vec<JobId>,
    total_size: u64,
    processing_time: u64,
}

impl Batch {
    /// Builds a batch from job ids. Capacity is not checked here; see
    /// [`Batch::fits`].
    pub fn new(inst: &Instance, ids: impl IntoIterator<Item = JobId>) -> Result<Self, ModelError> {
        let mut jobs: Vec<JobId> = ids.into_iter().collect();
        jobs.sort_unstable();
        for w in jobs.windows(2) {
            if w[0] == w[1] {
                return Err(ModelError::DuplicateJob(w[0]));
            }
        }
        if let Some(&bad) = jobs.iter().find(|&&j| !inst.contains(j)) {
            return Err(ModelError::UnknownJob(bad));
        }
        Ok(Self::from_sorted(inst, jobs))
    }

    /// `jobs` must be sorted, duplicate-free and belong to `inst`.
    pub(crate) fn from_sorted(inst: &Instance, jobs: Vec<JobId>) -> Self {
        debug_assert!(jobs.windows(2).all(|w| w[0] < w[1]));
        let total_size = jobs.iter().map(|&j| inst.job(j).size).sum();
        let processing_time = jobs
            .iter()
            .map(|&j| inst.job(j).processing_time)
            .max()
            .unwrap_or(0);
        Self {
            jobs,
            total_size,
            processing_time,
        }
    }

    /// The placeholder batch carried by empty arcs.
    pub fn empty() -> Self {
        Self {
            jobs: Vec::new(),
            total_size: 0,
            processing_time: 0,
        }
    }

    pub fn jobs(&self) -> &[JobId] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn total_size(&self) -> u64 {
        self.total_size
    }

    pub fn processing_time(&self) -> u64 {
        self.processing_time
    }

    pub fn fits(&self, capacity: u64) -> bool {
        self.total_size <= capacity
    }

    pub fn contains(&self, id: JobId) -> bool {
        self.jobs.binary_search(&id).is_ok()
    }
}

impl fmt::Display for Batch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (idx, j) in self.jobs.iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

/// Batch sequences, one per machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    machines: Vec<Vec<Batch>>,
}

impl Schedule {
    pub fn new(machines: Vec<Vec<Batch>>) -> Self {
        Self { machines }
    }

    pub fn single(batches: Vec<Batch>) -> Self {
        Self {
            machines: vec![batches],
        }
    }

    pub fn machines(&self) -> &[Vec<Batch>] {
        &self.machines
    }

    pub fn num_machines(&self) -> usize {
        self.machines.len()
    }

    /// Completion time of each batch of machine `h`, in sequence order.
    pub fn completion_times(&self, h: usize) -> Vec<u64> {
        self.machines[h]
            .iter()
            .scan(0u64, |t, b| {
                *t += b.processing_time();
                Some(*t)
            })
            .collect()
    }

    /// Checks that the batches exactly partition the jobs of `inst` and that
    /// every batch fits.
    pub fn validate(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.machines.len() != inst.machines() {
            return Err(ModelError::MachineCountMismatch {
                expected: inst.machines(),
                found: self.machines.len(),
            });
        }
        let mut seen = vec![false; inst.n() + 1];
        let mut count = 0;
        for batch in self.machines.iter().flatten() {
            if batch.is_empty() {
                return Err(ModelError::NotAPartition);
            }
            for &j in batch.jobs() {
                if !inst.contains(j) {
                    return Err(ModelError::UnknownJob(j));
                }
                if std::mem::replace(&mut seen[j], true) {
                    return Err(ModelError::NotAPartition);
                }
                count += 1;
            }
            if !batch.fits(inst.capacity()) {
                return Err(ModelError::CapacityViolation(batch.jobs().to_vec()));
            }
        }
        if count != inst.n() {
            return Err(ModelError::NotAPartition);
        }
        Ok(())
    }
}

/// Total completion time computed job by job from batch completion times.
pub fn evaluate_schedule(sched: &Schedule, inst: &Instance) -> Result<u64, ModelError> {
    sched.validate(inst)?;
    let mut total = 0u64;
    for h in 0..sched.num_machines() {
        for (batch, done) in sched.machines()[h].iter().zip(sched.completion_times(h)) {
            for _ in batch.jobs() {
                total += done;
            }
        }
    }
    Ok(total)
}

/// An arc `(tail, head, batch)` of the arc-flow graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArcColumn {
    tail: usize,
    head: usize,
    batch: Batch,
    cost: u64,
}

impl ArcColumn {
    pub fn new(inst: &Instance, tail: usize, head: usize, batch: Batch) -> Result<Self, ModelError> {
        let n = inst.n();
        if tail == 0 || tail >= head || head > n + 1 {
            return Err(ModelError::InvalidArc(format!(
                "nodes ({tail},{head}) out of order or range for n={n}"
            )));
        }
        if batch.is_empty() {
            if tail != 1 {
                return Err(ModelError::InvalidArc(format!(
                    "empty arc must leave node 1, found tail {tail}"
                )));
            }
        } else if batch.len() != head - tail {
            return Err(ModelError::InvalidArc(format!(
                "batch {batch} has {} jobs but arc ({tail},{head}) spans {}",
                batch.len(),
                head - tail
            )));
        }
        if let Some(&bad) = batch.jobs().iter().find(|&&j| !inst.contains(j)) {
            return Err(ModelError::UnknownJob(bad));
        }
        Ok(Self::new_unchecked(inst.n(), tail, head, batch))
    }

    pub(crate) fn new_unchecked(n: usize, tail: usize, head: usize, batch: Batch) -> Self {
        let cost = (n - tail + 1) as u64 * batch.processing_time();
        Self {
            tail,
            head,
            batch,
            cost,
        }
    }

    /// Placeholder arc `(1, head, {})`.
    pub fn empty(inst: &Instance, head: usize) -> Result<Self, ModelError> {
        Self::new(inst, 1, head, Batch::empty())
    }

    pub fn tail(&self) -> usize {
        self.tail
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn batch(&self) -> &Batch {
        &self.batch
    }

    /// Positional cost `(n - tail + 1) * p_B`; identical on every machine.
    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn is_empty_arc(&self) -> bool {
        self.batch.is_empty()
    }
}

impl fmt::Display for ArcColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.tail, self.head, self.batch)
    }
}

/// Chained arcs from node 1 to node n+1 on one machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    arcs: Vec<ArcColumn>,
}

impl Path {
    pub fn new(arcs: Vec<ArcColumn>) -> Self {
        Self { arcs }
    }

    pub fn arcs(&self) -> &[ArcColumn] {
        &self.arcs
    }

    /// Visited nodes, starting with the first tail.
    pub fn nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self.arcs.first().map(|a| a.tail()).into_iter().collect();
        nodes.extend(self.arcs.iter().map(|a| a.head()));
        nodes
    }

    pub fn cost(&self) -> u64 {
        self.arcs.iter().map(ArcColumn::cost).sum()
    }

    fn check_chain(&self, n: usize) -> Result<(), ModelError> {
        let first = self.arcs.first().ok_or(ModelError::BrokenChain)?;
        let last = self.arcs.last().ok_or(ModelError::BrokenChain)?;
        if first.tail() != 1 || last.head() != n + 1 {
            return Err(ModelError::BrokenChain);
        }
        if self.arcs.windows(2).any(|w| w[0].head() != w[1].tail()) {
            return Err(ModelError::BrokenChain);
        }
        Ok(())
    }
}

/// Encodes each machine's sequence as a path. With one machine the path
/// starts at node 1 directly; with several, a machine holding `c < n` jobs
/// starts with the empty arc `(1, n + 1 - c, {})`.
pub fn schedule_to_paths(sched: &Schedule, inst: &Instance) -> Result<Vec<Path>, ModelError> {
    sched.validate(inst)?;
    let n = inst.n();
    let mut paths = Vec::with_capacity(sched.num_machines());
    for seq in sched.machines() {
        let count: usize = seq.iter().map(Batch::len).sum();
        let mut node = n + 1 - count;
        let mut arcs = Vec::with_capacity(seq.len() + 1);
        if node > 1 {
            if inst.machines() == 1 {
                return Err(ModelError::PartitionMismatch);
            }
            arcs.push(ArcColumn::new_unchecked(n, 1, node, Batch::empty()));
        }
        for batch in seq {
            let head = node + batch.len();
            arcs.push(ArcColumn::new_unchecked(n, node, head, batch.clone()));
            node = head;
        }
        paths.push(Path::new(arcs));
    }
    Ok(paths)
}

/// Inverse of [`schedule_to_paths`]; empty arcs are dropped.
pub fn paths_to_schedule(paths: &[Path], inst: &Instance) -> Result<Schedule, ModelError> {
    if paths.len() != inst.machines() {
        return Err(ModelError::MachineCountMismatch {
            expected: inst.machines(),
            found: paths.len(),
        });
    }
    let n = inst.n();
    let mut machines = Vec::with_capacity(paths.len());
    let mut seen = BTreeSet::new();
    for path in paths {
        path.check_chain(n)?;
        let mut seq = Vec::new();
        for (pos, arc) in path.arcs().iter().enumerate() {
            if arc.is_empty_arc() {
                if pos != 0 || inst.machines() == 1 {
                    return Err(ModelError::BrokenChain);
                }
                continue;
            }
            if arc.batch().len() != arc.head() - arc.tail() {
                return Err(ModelError::BrokenChain);
            }
            for &j in arc.batch().jobs() {
                if !inst.contains(j) || !seen.insert(j) {
                    return Err(ModelError::PartitionMismatch);
                }
            }
            seq.push(arc.batch().clone());
        }
        machines.push(seq);
    }
    if seen.len() != n {
        return Err(ModelError::PartitionMismatch);
    }
    Ok(Schedule::new(machines))
}

/// Sum of the positional arc costs over all paths. Validates the paths the
/// same way [`paths_to_schedule`] does.
pub fn path_cost(paths: &[Path], inst: &Instance) -> Result<u64, ModelError> {
    let sched = paths_to_schedule(paths, inst)?;
    for b in sched.machines().iter().flatten() {
        if !b.fits(inst.capacity()) {
            return Err(ModelError::CapacityViolation(b.jobs().to_vec()));
        }
    }
    Ok(paths.iter().map(Path::cost).sum())
}
