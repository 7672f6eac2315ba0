//! Helpers shared by the integration tests: random instances and schedules,
//! and brute-force references that do not go through the library's own
//! enumeration code.

#![allow(dead_code)]

use pbatch_core::model::{Batch, Instance, JobId, Schedule};
use pbatch_core::pricing::DualValues;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn i3(m: usize) -> Instance {
    Instance::new(&[(5, 6), (3, 5), (2, 4)], 10, m).unwrap()
}

pub fn random_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    capacity: u64,
    machines: usize,
    p_max: u64,
) -> Instance {
    let jobs: Vec<(u64, u64)> = (0..n)
        .map(|_| (rng.gen_range(1..=p_max), rng.gen_range(1..=capacity)))
        .collect();
    Instance::new(&jobs, capacity, machines).unwrap()
}

/// A random feasible schedule: jobs shuffled, cut into capacity-feasible
/// batches, batches spread over the machines in random order.
pub fn random_schedule<R: Rng>(rng: &mut R, inst: &Instance) -> Schedule {
    let mut ids: Vec<JobId> = (1..=inst.n()).collect();
    ids.shuffle(rng);
    let mut batches = Vec::new();
    let mut current: Vec<JobId> = Vec::new();
    let mut size = 0;
    for j in ids {
        let s = inst.job(j).size;
        if !current.is_empty() && (size + s > inst.capacity() || rng.gen_bool(0.3)) {
            batches.push(Batch::new(inst, current.drain(..)).unwrap());
            size = 0;
        }
        current.push(j);
        size += s;
    }
    batches.push(Batch::new(inst, current).unwrap());
    batches.shuffle(rng);
    let mut machines = vec![Vec::new(); inst.machines()];
    for b in batches {
        machines[rng.gen_range(0..inst.machines())].push(b);
    }
    Schedule::new(machines)
}

/// Every capacity-feasible batch as a sorted id list, with its size and time.
pub fn all_batches(inst: &Instance) -> Vec<(Vec<JobId>, u64)> {
    let n = inst.n();
    let mut out = Vec::new();
    for mask in 1usize..(1 << n) {
        let ids: Vec<JobId> = (1..=n).filter(|j| mask >> (j - 1) & 1 == 1).collect();
        let size: u64 = ids.iter().map(|&j| inst.job(j).size).sum();
        if size <= inst.capacity() {
            let p = ids.iter().map(|&j| inst.job(j).processing_time).max().unwrap();
            out.push((ids, p));
        }
    }
    out
}

/// Exhaustive minimum reduced cost of an arc `(i, k)` on machine `h`.
pub fn brute_min_reduced_cost(
    inst: &Instance,
    batches: &[(Vec<JobId>, u64)],
    duals: &DualValues,
    i: usize,
    k: usize,
    h: usize,
) -> Option<f64> {
    let n = inst.n();
    batches
        .iter()
        .filter(|(ids, _)| ids.len() == k - i)
        .map(|(ids, p)| {
            (n - i + 1) as f64 * *p as f64
                - (duals.u(h, i) - duals.u(h, k))
                - ids.iter().map(|&j| duals.v(j)).sum::<f64>()
        })
        .min_by(f64::total_cmp)
}

/// Most negative reduced cost over all arcs of the complete master,
/// including the empty placeholder arcs when there are several machines.
pub fn most_negative_reduced_cost(inst: &Instance, duals: &DualValues) -> f64 {
    let n = inst.n();
    let batches = all_batches(inst);
    let mut worst = f64::INFINITY;
    for h in 0..inst.machines() {
        for i in 1..=n {
            for k in i + 1..=n + 1 {
                if let Some(rc) = brute_min_reduced_cost(inst, &batches, duals, i, k, h) {
                    worst = worst.min(rc);
                }
            }
        }
        if inst.machines() > 1 {
            for k in 2..=n + 1 {
                worst = worst.min(-(duals.u(h, 1) - duals.u(h, k)));
            }
        }
    }
    worst
}

pub fn random_duals<R: Rng>(rng: &mut R, n: usize, machines: usize) -> DualValues {
    let u = (0..machines)
        .map(|_| (0..=n).map(|_| rng.gen_range(-60.0..60.0)).collect())
        .collect();
    let v = (0..n).map(|_| rng.gen_range(-10.0..40.0)).collect();
    DualValues::new(u, v).unwrap()
}

/// A fixture line of `data/master_lp.txt`: instance and the optimum of the
/// master LP over every feasible arc.
pub struct MasterLpCase {
    pub instance: Instance,
    pub value: f64,
}

pub fn master_lp_cases() -> Vec<MasterLpCase> {
    let text = include_str!("../data/master_lp.txt");
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut f = line.split_whitespace();
            let cap: u64 = f.next().unwrap().parse().unwrap();
            let m: usize = f.next().unwrap().parse().unwrap();
            let value: f64 = f.next().unwrap().parse().unwrap();
            let jobs: Vec<(u64, u64)> = f
                .map(|js| {
                    let (p, s) = js.split_once(':').unwrap();
                    (p.parse().unwrap(), s.parse().unwrap())
                })
                .collect();
            MasterLpCase {
                instance: Instance::new(&jobs, cap, m).unwrap(),
                value,
            }
        })
        .collect()
}
