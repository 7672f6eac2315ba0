//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! fails the target if any criterion fails.

mod common;

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use pbatch_core::bench::{
    format_instance, generate_instance, run_experiment, ExperimentConfig, GenSpec, Sigma,
};
use pbatch_core::bounds::pr_bound;
use pbatch_core::colgen::{init_cols, price_and_branch, run_cg, CgConfig, PricingRule};
use pbatch_core::master::build_master;
use pbatch_core::model::{
    evaluate_schedule, path_cost, schedule_to_paths, ArcColumn, Batch, Instance, Schedule,
};
use pbatch_core::oracle::{exact_optimum, exact_optimum_all_orders};
use pbatch_core::pricing::Pricer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<f64, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {:.2}s, limit {:?}", t.as_secs_f64(), limit))?;
    Ok(t.as_secs_f64())
}

/// Unit-time instance whose single machine path visits the given nodes.
fn unit_layout(batch_sizes: &[usize], machines: usize) -> (Instance, Schedule) {
    let n: usize = batch_sizes.iter().sum();
    let inst = Instance::new(&vec![(1, 1); n], 10, machines).unwrap();
    let mut next = 1;
    let batches: Vec<Batch> = batch_sizes
        .iter()
        .map(|&len| {
            let b = Batch::new(&inst, next..next + len).unwrap();
            next += len;
            b
        })
        .collect();
    (inst, Schedule::single(batches))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    // single machine, nodes 1, 4, 7, 9, 11
    let (inst, sched) = unit_layout(&[3, 3, 2, 2], 1);
    let paths = schedule_to_paths(&sched, &inst).unwrap();
    let coefs: Vec<u64> = paths[0].arcs().iter().map(|a| a.cost()).collect();
    ensure(coefs == [10, 7, 4, 2], || format!("single-machine layout coefficients {coefs:?}"))?;
    ensure(path_cost(&paths, &inst) == Ok(23), || "single-machine layout total".into())?;

    // ten jobs on two machines: batches of 3, 3 and of 2, 2
    let inst = Instance::new(&[(1, 1); 10], 10, 2).unwrap();
    let b = |ids: std::ops::RangeInclusive<usize>| Batch::new(&inst, ids).unwrap();
    let sched = Schedule::new(vec![vec![b(1..=3), b(4..=6)], vec![b(7..=8), b(9..=10)]]);
    let paths = schedule_to_paths(&sched, &inst).unwrap();
    let coefs: Vec<u64> = paths
        .iter()
        .flat_map(|p| p.arcs().iter().filter(|a| !a.is_empty_arc()).map(ArcColumn::cost))
        .collect();
    ensure(coefs == [6, 3, 4, 2], || format!("two-machine layout coefficients {coefs:?}"))?;
    ensure(path_cost(&paths, &inst) == Ok(15), || "two-machine layout total".into())?;
    ensure(evaluate_schedule(&sched, &inst) == Ok(15), || "two-machine layout schedule".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for t in 0..1000 {
        let n = rng.gen_range(1..=12);
        let m = rng.gen_range(1..=3);
        let inst = common::random_instance(&mut rng, n, 10, m, 100);
        let sched = common::random_schedule(&mut rng, &inst);
        let paths = schedule_to_paths(&sched, &inst).map_err(|e| format!("#{t}: {e}"))?;
        let a = path_cost(&paths, &inst).unwrap();
        let b = evaluate_schedule(&sched, &inst).unwrap();
        ensure(a == b, || format!("#{t}: path cost {a} != {b}"))?;
    }
    let secs = within(start, Duration::from_secs(5))?;
    Ok(format!("1000 random schedules and both ten-job layouts agree ({secs:.2}s)"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut arcs = 0;
    let mut worst: f64 = 0.0;
    for t in 0..200 {
        let n = rng.gen_range(1..=8);
        let cap = rng.gen_range(1..=12);
        let m = rng.gen_range(1..=2);
        let inst = common::random_instance(&mut rng, n, cap, m, 100);
        let duals = common::random_duals(&mut rng, n, m);
        let pricer = Pricer::new(&inst, &duals).unwrap();
        let batches = common::all_batches(&inst);
        for h in 0..m {
            for i in 1..=n {
                for k in i + 1..=n + 1 {
                    let brute = common::brute_min_reduced_cost(&inst, &batches, &duals, i, k, h);
                    let dp = pricer.min_reduced_cost(&duals, i, k, h).map(|(v, _)| v);
                    match (brute, dp) {
                        (None, None) => {}
                        (Some(b), Some(g)) => {
                            worst = worst.max((b - g).abs());
                            ensure((b - g).abs() <= 1e-9, || {
                                format!("pair #{t} arc ({i},{k}) machine {h}: {b} vs {g}")
                            })?;
                        }
                        other => return Err(format!("pair #{t} arc ({i},{k}): {other:?}")),
                    }
                    arcs += 1;
                }
            }
        }
    }
    let secs = within(start, Duration::from_secs(30))?;
    Ok(format!("{arcs} arcs, max deviation {worst:.1e} ({secs:.2}s)"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut certified = 0;
    let mut checked_orders = 0;
    for t in 0..100 {
        let n = rng.gen_range(4..=8);
        let spec = GenSpec {
            n,
            machines: 1,
            capacity: 10,
            sigma: Sigma::ALL[t % 4],
            seed: rng.gen(),
            replicas: 1,
        };
        let inst = generate_instance(&spec, 0).unwrap();
        let opt = exact_optimum(&inst).unwrap().optimum;
        if n <= 6 {
            let check = exact_optimum_all_orders(&inst).unwrap();
            ensure(check == opt, || format!("#{t}: oracle {opt} vs all orders {check}"))?;
            checked_orders += 1;
        }
        let res = price_and_branch(&inst, &CgConfig::default()).map_err(|e| e.to_string())?;
        ensure(res.converged, || format!("#{t}: pricing did not converge"))?;
        let run = run_cg(&inst, &CgConfig::default()).map_err(|e| e.to_string())?;
        let worst = common::most_negative_reduced_cost(&inst, &run.lp.duals);
        ensure(worst >= -1e-6, || format!("#{t}: dual infeasible by {worst}"))?;
        let lb = res.cg_lb.unwrap();
        let ub = res.cg_ub.ok_or(format!("#{t}: no upper bound"))? as f64;
        let pr = pr_bound(&inst).value;
        let opt = opt as f64;
        ensure(pr <= opt, || format!("#{t}: PR {pr} > OPT {opt}"))?;
        ensure(lb <= opt + 1e-6 && opt + 1e-6 <= ub + 2e-6, || {
            format!("#{t}: {lb} <= {opt} <= {ub} violated")
        })?;
        certified += res.certified_optimal as usize;
    }
    let secs = within(start, Duration::from_secs(120))?;
    Ok(format!(
        "100 instances sandwiched, oracle cross-checked on {checked_orders}, {certified} certified ({secs:.1}s)"
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let specs: Vec<GenSpec> = [Sigma::S1, Sigma::S4]
        .into_iter()
        .map(|sigma| GenSpec {
            n: 20,
            machines: 1,
            capacity: 10,
            sigma,
            seed: 2016,
            replicas: 10,
        })
        .collect();
    let config = ExperimentConfig {
        ub_time_limit: Some(Duration::from_secs(60)),
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&specs, &config).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut certified = 0;
    for row in &report.summary {
        let gap = row.gap_avg.ok_or(format!("{}: no gap", row.sigma))?;
        let ratio = row.ratio_avg.ok_or(format!("{}: no ratio", row.sigma))?;
        ensure(!row.partial, || format!("{}: partial group", row.sigma))?;
        ensure(gap <= 5.0, || format!("{}: average gap {gap:.2}%", row.sigma))?;
        ensure(ratio >= 1.0, || format!("{}: average CG-LB/PR {ratio:.3}", row.sigma))?;
        certified += row.opt_count;
        parts.push(format!(
            "{} gap {:.2}% (worst {:.2}) ratio {:.3} opt {}",
            row.sigma,
            gap,
            row.gap_worst.unwrap(),
            ratio,
            row.opt_count
        ));
    }
    ensure(certified >= 1, || "no certified optimum".into())?;
    let secs = within(start, Duration::from_secs(600))?;
    Ok(format!("{} ({secs:.1}s)", parts.join("; ")))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let identical = CgConfig {
        pricing: PricingRule::Identical,
        ..CgConfig::default()
    };
    for t in 0..50 {
        let n = rng.gen_range(1..=7);
        let one = common::random_instance(&mut rng, n, 10, 1, 100);
        let two = one.with_machines(2).unwrap();
        let single = run_cg(&one, &CgConfig::default()).map_err(|e| e.to_string())?;
        let parallel = run_cg(&one, &identical).map_err(|e| e.to_string())?;
        let (a, b) = (single.cg_lb.unwrap(), parallel.cg_lb.unwrap());
        ensure((a - b).abs() <= 1e-6, || format!("#{t}: m=1 paths differ {a} vs {b}"))?;
        let res = price_and_branch(&two, &CgConfig::for_machines(2)).map_err(|e| e.to_string())?;
        let opt = exact_optimum(&two).unwrap().optimum as f64;
        let lb2 = res.cg_lb.ok_or(format!("#{t}: m=2 not converged"))?;
        let ub2 = res.cg_ub.ok_or(format!("#{t}: m=2 no upper bound"))? as f64;
        ensure(ub2 >= opt - 1e-6, || format!("#{t}: CG-UB {ub2} below OPT {opt}"))?;
        ensure(lb2 <= opt + 1e-6, || format!("#{t}: CG-LB {lb2} above OPT {opt}"))?;
        ensure(lb2 <= a + 1e-6, || format!("#{t}: CG-LB(m=2) {lb2} > CG-LB(m=1) {a}"))?;
    }
    let secs = within(start, Duration::from_secs(300))?;
    Ok(format!("50 instances consistent ({secs:.1}s)"))
}

fn criterion_6() -> Outcome {
    let spec = GenSpec {
        n: 100,
        machines: 1,
        capacity: 50,
        sigma: Sigma::S1,
        seed: 6,
        replicas: 1,
    };
    let inst = generate_instance(&spec, 0).unwrap();
    let mut master = build_master(&inst, init_cols(&inst)).map_err(|e| e.to_string())?;
    let lp = master.solve_lp().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let pricer = Pricer::new(&inst, &lp.duals).map_err(|e| e.to_string())?;
    let cols = pricer.new_cols_single(&lp.duals, pbatch_core::pricing::EPS_NEG);
    let pricing_secs = within(start, Duration::from_secs(2))?;
    let entries = pricer.memo_entries();
    let limit = 100 * 100 * 51;
    ensure(entries <= limit, || format!("{entries} memo entries > {limit}"))?;

    let mut cg_times = Vec::new();
    for seed in [10, 11] {
        let spec = GenSpec {
            capacity: 10,
            seed,
            ..spec.clone()
        };
        let inst = generate_instance(&spec, 0).unwrap();
        let start = Instant::now();
        let run = run_cg(&inst, &CgConfig::default()).map_err(|e| e.to_string())?;
        let secs = within(start, Duration::from_secs(10))?;
        ensure(run.converged, || format!("seed {seed}: not converged"))?;
        cg_times.push(format!("{secs:.2}s"));
    }
    Ok(format!(
        "{entries} memo entries (limit {limit}), {} arcs priced in {pricing_secs:.3}s; CG-LB n=100 C=10 in {}",
        cols.len(),
        cg_times.join(", ")
    ))
}

fn criterion_7() -> Outcome {
    for (seed, sigma) in [(7u64, Sigma::S1), (8, Sigma::S4)] {
        let spec = GenSpec {
            n: 20,
            machines: 1,
            capacity: 10,
            sigma,
            seed,
            replicas: 1,
        };
        let a = generate_instance(&spec, 0).unwrap();
        let b = generate_instance(&spec, 0).unwrap();
        ensure(format_instance(&a) == format_instance(&b), || "generator drift".into())?;
        let cfg = CgConfig {
            ub_time_limit: Duration::from_secs(3600),
            branch_node_limit: 20_000,
            ..CgConfig::default()
        };
        let ra = price_and_branch(&a, &cfg).map_err(|e| e.to_string())?;
        let rb = price_and_branch(&b, &cfg).map_err(|e| e.to_string())?;
        let (la, lb) = (ra.cg_lb.unwrap(), rb.cg_lb.unwrap());
        ensure((la - lb).abs() <= 1e-9, || format!("seed {seed}: CG-LB {la} vs {lb}"))?;
        ensure(ra.schedule == rb.schedule, || format!("seed {seed}: schedules differ"))?;
        ensure(ra.cg_ub == rb.cg_ub, || format!("seed {seed}: CG-UB differs"))?;
    }
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden");
    let mut files = 0;
    for entry in fs::read_dir(&dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let stem = name.trim_end_matches(".txt");
        let f: Vec<&str> = stem.split('_').collect();
        let field = |i: usize, p: &str| f[i].strip_prefix(p).unwrap().to_string();
        let spec = GenSpec {
            n: field(0, "n").parse().unwrap(),
            sigma: field(1, "sigma").parse().unwrap(),
            capacity: field(2, "c").parse().unwrap(),
            machines: field(3, "m").parse().unwrap(),
            seed: field(4, "seed").parse().unwrap(),
            replicas: 1,
        };
        let replica: u64 = field(5, "r").parse().unwrap();
        let text = format_instance(&generate_instance(&spec, replica).unwrap());
        let golden = fs::read_to_string(&path).map_err(|e| e.to_string())?;
        ensure(text == golden, || format!("{name} differs from the generator"))?;
        files += 1;
    }
    ensure(files >= 3, || format!("only {files} golden files"))?;
    Ok(format!("repeat runs identical, {files} golden instances reproduced"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("1 path cost identity", criterion_1),
        ("2 pricing vs enumeration", criterion_2),
        ("3 sandwich and termination", criterion_3),
        ("4 desk-scale replication n=20", criterion_4),
        ("5 parallel-machine consistency", criterion_5),
        ("6 complexity smoke", criterion_6),
        ("7 determinism", criterion_7),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match std::panic::catch_unwind(run) {
            Ok(Ok(detail)) => println!("PASS criterion {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL criterion {name}: panicked");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
