//! Exact reference solutions for small instances, exhaustive batch
//! enumeration, and the compact MILP in LP text form.

use std::cmp::Ordering;
use std::path::Path as FsPath;

use thiserror::Error;

use crate::lpfile::{Constraint, LpDocument, Sense};
use crate::model::{Batch, Instance, JobId, Schedule};

/// Largest instance accepted by [`enumerate_feasible_batches`].
pub const BATCH_ENUMERATION_CAP: usize = 16;
/// Largest single-machine instance accepted by [`exact_optimum`].
pub const EXACT_SINGLE_CAP: usize = 9;
/// Largest multi-machine instance accepted by [`exact_optimum`].
pub const EXACT_PARALLEL_CAP: usize = 7;
/// Largest instance accepted by [`exact_optimum_all_orders`].
pub const ALL_ORDERS_CAP: usize = 6;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance with {n} jobs exceeds the enumeration limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("the compact MILP covers a single machine, instance has {0}")]
    UnsupportedMachines(usize),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub optimum: u64,
    pub schedule: Schedule,
    pub partitions_explored: u64,
}

/// Every nonempty job subset that fits in the capacity, in bitmask order.
pub fn enumerate_feasible_batches(inst: &Instance) -> Result<Vec<Batch>, OracleError> {
    let n = inst.n();
    if n > BATCH_ENUMERATION_CAP {
        return Err(OracleError::TooLarge {
            n,
            limit: BATCH_ENUMERATION_CAP,
        });
    }
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let size: u64 = (0..n)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| inst.job(b + 1).size)
            .sum();
        if size <= inst.capacity() {
            let jobs: Vec<JobId> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            out.push(Batch::from_sorted(inst, jobs));
        }
    }
    Ok(out)
}

/// Smith's rule for batches: non-decreasing `p_B / |B|`, then smaller `p_B`,
/// then smaller first job id.
fn smith_cmp(a: &Batch, b: &Batch) -> Ordering {
    let lhs = a.processing_time() * b.len() as u64;
    let rhs = b.processing_time() * a.len() as u64;
    lhs.cmp(&rhs)
        .then(a.processing_time().cmp(&b.processing_time()))
        .then(a.jobs().cmp(b.jobs()))
}

/// Total completion time of one machine processing `seq` in order.
fn sequence_cost(seq: &[&Batch]) -> u64 {
    let mut t = 0;
    let mut total = 0;
    for b in seq {
        t += b.processing_time();
        total += t * b.len() as u64;
    }
    total
}

/// Calls `visit` with every partition of `0..n` into blocks (restricted
/// growth strings), pruning blocks that violate `fits`.
fn for_each_partition(
    n: usize,
    fits: &dyn Fn(&[usize], usize) -> bool,
    visit: &mut dyn FnMut(&[Vec<usize>]),
) {
    fn rec(
        item: usize,
        n: usize,
        blocks: &mut Vec<Vec<usize>>,
        fits: &dyn Fn(&[usize], usize) -> bool,
        visit: &mut dyn FnMut(&[Vec<usize>]),
    ) {
        if item == n {
            visit(blocks);
            return;
        }
        for b in 0..blocks.len() {
            if fits(&blocks[b], item) {
                blocks[b].push(item);
                rec(item + 1, n, blocks, fits, visit);
                blocks[b].pop();
            }
        }
        if fits(&[], item) {
            blocks.push(vec![item]);
            rec(item + 1, n, blocks, fits, visit);
            blocks.pop();
        }
    }
    rec(0, n, &mut Vec::new(), fits, visit);
}

fn batches_of(inst: &Instance, blocks: &[Vec<usize>]) -> Vec<Batch> {
    blocks
        .iter()
        .map(|blk| {
            let mut ids: Vec<JobId> = blk.iter().map(|&j| j + 1).collect();
            ids.sort_unstable();
            Batch::from_sorted(inst, ids)
        })
        .collect()
}

/// Optimal total completion time by enumerating batch partitions (and, with
/// several machines, groupings of batches onto machines); each machine
/// sequences its batches by Smith's rule.
pub fn exact_optimum(inst: &Instance) -> Result<OracleResult, OracleError> {
    let n = inst.n();
    let m = inst.machines();
    let limit = if m == 1 {
        EXACT_SINGLE_CAP
    } else {
        EXACT_PARALLEL_CAP
    };
    if n > limit {
        return Err(OracleError::TooLarge { n, limit });
    }
    let cap = inst.capacity();
    let fits = |blk: &[usize], j: usize| {
        blk.iter().map(|&i| inst.job(i + 1).size).sum::<u64>() + inst.job(j + 1).size <= cap
    };
    let mut best: Option<(u64, Vec<Vec<Batch>>)> = None;
    let mut explored = 0u64;
    for_each_partition(n, &fits, &mut |blocks| {
        explored += 1;
        let batches = batches_of(inst, blocks);
        let t = batches.len();
        // group batches onto at most m identical machines
        let within_m = |_: &[usize], _: usize| true;
        let mut groupings: Vec<Vec<Vec<usize>>> = Vec::new();
        for_each_partition(t, &within_m, &mut |groups| {
            if groups.len() <= m {
                groupings.push(groups.to_vec());
            }
        });
        for groups in groupings {
            let mut total = 0;
            let mut machines = Vec::with_capacity(m);
            for grp in &groups {
                let mut seq: Vec<&Batch> = grp.iter().map(|&b| &batches[b]).collect();
                seq.sort_by(|a, b| smith_cmp(a, b));
                total += sequence_cost(&seq);
                machines.push(seq.into_iter().cloned().collect::<Vec<_>>());
            }
            if best.as_ref().is_none_or(|(v, _)| total < *v) {
                machines.resize(m, Vec::new());
                best = Some((total, machines));
            }
        }
    });
    let (optimum, machines) = best.expect("every instance has a feasible partition");
    Ok(OracleResult {
        optimum,
        schedule: Schedule::new(machines),
        partitions_explored: explored,
    })
}

fn min_over_orders(seq: &mut Vec<&Batch>, k: usize) -> u64 {
    if k == seq.len() {
        return sequence_cost(seq);
    }
    let mut best = u64::MAX;
    for i in k..seq.len() {
        seq.swap(k, i);
        best = best.min(min_over_orders(seq, k + 1));
        seq.swap(k, i);
    }
    best
}

/// Optimum by brute force over every partition, every assignment of batches
/// to (labelled) machines and every batch order. Independent of the
/// sequencing rule used by [`exact_optimum`].
pub fn exact_optimum_all_orders(inst: &Instance) -> Result<u64, OracleError> {
    let n = inst.n();
    if n > ALL_ORDERS_CAP {
        return Err(OracleError::TooLarge {
            n,
            limit: ALL_ORDERS_CAP,
        });
    }
    let m = inst.machines();
    let cap = inst.capacity();
    let fits = |blk: &[usize], j: usize| {
        blk.iter().map(|&i| inst.job(i + 1).size).sum::<u64>() + inst.job(j + 1).size <= cap
    };
    let mut best = u64::MAX;
    for_each_partition(n, &fits, &mut |blocks| {
        let batches = batches_of(inst, blocks);
        let t = batches.len();
        let assignments = (m as u64).pow(t as u32);
        for code in 0..assignments {
            let mut c = code;
            let mut per: Vec<Vec<&Batch>> = vec![Vec::new(); m];
            for b in &batches {
                per[(c % m as u64) as usize].push(b);
                c /= m as u64;
            }
            let total: u64 = per.iter_mut().map(|seq| min_over_orders(seq, 0)).sum();
            best = best.min(total);
        }
    });
    Ok(best)
}

/// Big-M constant used by the compact MILP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BigM {
    /// Sum of all processing times: no batch completes later than that.
    #[default]
    TotalWork,
    Value(u64),
}

/// The positional-assignment MILP for one machine: `x_i_j = 1` iff job `i`
/// goes to the `j`-th batch, `P_j` and `C_j` are the duration and completion
/// time of batch `j`, and `c_i` the completion time of job `i`.
pub fn export_milp(inst: &Instance, big_m: BigM) -> Result<String, OracleError> {
    if inst.machines() != 1 {
        return Err(OracleError::UnsupportedMachines(inst.machines()));
    }
    let n = inst.n();
    let big = match big_m {
        BigM::TotalWork => inst.total_processing_time(),
        BigM::Value(v) => v,
    } as i64;
    let x = |i: usize, j: usize| format!("x_{i}_{j}");
    let mut cons = Vec::new();
    for i in 1..=n {
        cons.push(Constraint {
            name: format!("assign_{i}"),
            terms: (1..=n).map(|j| (1, x(i, j))).collect(),
            sense: Sense::Eq,
            rhs: 1,
        });
    }
    for j in 1..=n {
        cons.push(Constraint {
            name: format!("cap_{j}"),
            terms: (1..=n).map(|i| (inst.job(i).size as i64, x(i, j))).collect(),
            sense: Sense::Le,
            rhs: inst.capacity() as i64,
        });
    }
    for i in 1..=n {
        for j in 1..=n {
            cons.push(Constraint {
                name: format!("ptime_{i}_{j}"),
                terms: vec![(1, format!("P_{j}")), (-(inst.job(i).processing_time as i64), x(i, j))],
                sense: Sense::Ge,
                rhs: 0,
            });
        }
    }
    cons.push(Constraint {
        name: "chain_1".into(),
        terms: vec![(1, "C_1".into()), (-1, "P_1".into())],
        sense: Sense::Ge,
        rhs: 0,
    });
    for j in 2..=n {
        cons.push(Constraint {
            name: format!("chain_{j}"),
            terms: vec![(1, format!("C_{j}")), (-1, format!("C_{}", j - 1)), (-1, format!("P_{j}"))],
            sense: Sense::Ge,
            rhs: 0,
        });
    }
    for i in 1..=n {
        for j in 1..=n {
            cons.push(Constraint {
                name: format!("link_{i}_{j}"),
                terms: vec![(1, format!("c_{i}")), (-1, format!("C_{j}")), (-big, x(i, j))],
                sense: Sense::Ge,
                rhs: -big,
            });
        }
    }
    let mut binaries = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            binaries.push(x(i, j));
        }
    }
    let doc = LpDocument {
        comment: vec![
            format!("single-machine p-batch total completion time, n={n} C={}", inst.capacity()),
            format!("M = {big}"),
        ],
        objective: (1..=n).map(|i| (1, format!("c_{i}"))).collect(),
        constraints: cons,
        bounds: Vec::new(),
        binaries,
    };
    Ok(doc.render())
}

pub fn write_milp(inst: &Instance, big_m: BigM, path: &FsPath) -> Result<(), OracleError> {
    std::fs::write(path, export_milp(inst, big_m)?)?;
    Ok(())
}
