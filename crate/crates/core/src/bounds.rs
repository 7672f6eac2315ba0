//! Combinatorial lower bound from a preemptive parallel-machine relaxation.
//!
//! A batch machine of capacity `C` is relaxed to `C` unit-width machines
//! (`m * C` with `m` batch machines) on which a job of size `s_j` occupies
//! `s_j` machines for `p_j` time units and may be preempted. Whatever the
//! schedule, the `k`-th completion happens no earlier than the `k`-th
//! smallest processing time, and no earlier than the time needed to spread
//! the `k` smallest areas `s_j p_j` over the full width. The two sequences
//! are sorted independently: pairing the cumulative area with the SPT order
//! instead overestimates when a short job is very wide.

use serde::Serialize;

use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrBound {
    pub value: f64,
    /// Width of the relaxation: `m * C`.
    pub machine_count: u64,
}

pub fn pr_bound(inst: &Instance) -> PrBound {
    let width = inst.machines() as u64 * inst.capacity();
    let mut times: Vec<u64> = inst.jobs().iter().map(|j| j.processing_time).collect();
    let mut areas: Vec<u64> = inst.jobs().iter().map(|j| j.size * j.processing_time).collect();
    times.sort_unstable();
    areas.sort_unstable();
    let mut work = 0u64;
    let mut value = 0.0;
    for (p, a) in times.into_iter().zip(areas) {
        work += a;
        value += f64::max(p as f64, work as f64 / width as f64);
    }
    PrBound {
        value,
        machine_count: width,
    }
}
