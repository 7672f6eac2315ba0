//! Reproducible instance generation, the instance text format and the
//! experiment harness.
//!
//! # Generator
//!
//! Each replica uses its own splitmix64 stream seeded with
//! `seed ^ replica`:
//!
//! ```text
//! state += 0x9e3779b97f4a7c15
//! z = state
//! z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//! z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//! return z ^ (z >> 31)
//! ```
//!
//! (wrapping arithmetic). An integer in `[a, b]` is drawn by rejection: with
//! `r = b - a + 1` and `zone = (2^64 / r) * r`, outputs `x >= zone` are
//! discarded and `a + x % r` is returned. For every job in id order, `p` is
//! drawn from `[1, 100]` and then `s` from the size range of the sigma class.
//!
//! # Instance files
//!
//! ASCII with LF line ends: a header line `n m C`, then one `p s` line per job.
//!
//! # CSV schemas
//!
//! The detail file has one row per instance with the columns of
//! [`DetailRow`]; the summary file has one row per `(n, sigma, C, m)` group
//! with the columns of [`ReportRow`]. Gap columns are percentages; a gap is
//! only defined (and aggregated) when column generation converged.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::pr_bound;
use crate::colgen::{price_and_branch, CgConfig};
use crate::model::{Instance, ModelError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown sigma class {0:?} (expected 1..4)")]
    BadSigma(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid experiment spec: {0}")]
    BadSpec(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Job size distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sigma {
    S1,
    S2,
    S3,
    S4,
}

impl Sigma {
    pub const ALL: [Sigma; 4] = [Sigma::S1, Sigma::S2, Sigma::S3, Sigma::S4];

    pub fn size_range(self) -> (u64, u64) {
        match self {
            Sigma::S1 => (1, 10),
            Sigma::S2 => (2, 8),
            Sigma::S3 => (3, 10),
            Sigma::S4 => (1, 5),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Sigma::S1 => 1,
            Sigma::S2 => 2,
            Sigma::S3 => 3,
            Sigma::S4 => 4,
        }
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sigma{}", self.index())
    }
}

/// Accepts `1`, `s1`, `sigma1` or `σ1` (case-insensitive).
impl FromStr for Sigma {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_lowercase();
        let digits = lower
            .strip_prefix("sigma")
            .or_else(|| lower.strip_prefix('σ'))
            .or_else(|| lower.strip_prefix('s'))
            .unwrap_or(&lower);
        match digits {
            "1" => Ok(Sigma::S1),
            "2" => Ok(Sigma::S2),
            "3" => Ok(Sigma::S3),
            "4" => Ok(Sigma::S4),
            _ => Err(BenchError::BadSigma(s.to_string())),
        }
    }
}

impl Serialize for Sigma {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Sigma {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Num(k) => k.to_string(),
            Raw::Text(t) => t,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn default_replicas() -> usize {
    10
}

fn default_machines() -> usize {
    1
}

fn default_capacity() -> u64 {
    10
}

/// One group of generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    #[serde(default = "default_machines")]
    pub machines: usize,
    #[serde(default = "default_capacity")]
    pub capacity: u64,
    pub sigma: Sigma,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.n == 0 {
            return Err(BenchError::BadSpec("n must be positive".into()));
        }
        if self.machines == 0 {
            return Err(BenchError::BadSpec("machines must be positive".into()));
        }
        let (_, max_size) = self.sigma.size_range();
        if self.capacity < max_size {
            return Err(BenchError::BadSpec(format!(
                "capacity {} is below the largest {} size {max_size}",
                self.capacity, self.sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn uniform(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        let range = (hi - lo).wrapping_add(1);
        if range == 0 {
            return self.next_u64();
        }
        let zone = (1u128 << 64) / u128::from(range) * u128::from(range);
        loop {
            let x = self.next_u64();
            if u128::from(x) < zone {
                return lo + x % range;
            }
        }
    }
}

pub const P_RANGE: (u64, u64) = (1, 100);

pub fn generate_instance(spec: &GenSpec, replica: u64) -> Result<Instance, BenchError> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed ^ replica);
    let (s_lo, s_hi) = spec.sigma.size_range();
    let jobs: Vec<(u64, u64)> = (0..spec.n)
        .map(|_| {
            let p = rng.uniform(P_RANGE.0, P_RANGE.1);
            let s = rng.uniform(s_lo, s_hi);
            (p, s)
        })
        .collect();
    Ok(Instance::new(&jobs, spec.capacity, spec.machines)?)
}

pub fn format_instance(inst: &Instance) -> String {
    let mut out = format!("{} {} {}\n", inst.n(), inst.machines(), inst.capacity());
    for job in inst.jobs() {
        out.push_str(&format!("{} {}\n", job.processing_time, job.size));
    }
    out
}

fn parse_fields(line: &str, lineno: usize, want: usize) -> Result<Vec<u64>, BenchError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != want {
        return Err(BenchError::Parse {
            line: lineno,
            msg: format!("expected {want} integers, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<u64>().map_err(|e| BenchError::Parse {
                line: lineno,
                msg: format!("{f:?}: {e}"),
            })
        })
        .collect()
}

pub fn parse_instance(text: &str) -> Result<Instance, BenchError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(BenchError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let head = parse_fields(header, 1, 3)?;
    let (n, machines, capacity) = (head[0] as usize, head[1] as usize, head[2]);
    let mut jobs = Vec::with_capacity(n);
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if jobs.len() == n {
            return Err(BenchError::Parse {
                line: lineno,
                msg: format!("more than the {n} declared jobs"),
            });
        }
        let f = parse_fields(line, lineno, 2)?;
        jobs.push((f[0], f[1]));
    }
    if jobs.len() != n {
        return Err(BenchError::Parse {
            line: text.lines().count() + 1,
            msg: format!("declared {n} jobs, found {}", jobs.len()),
        });
    }
    Instance::new(&jobs, capacity, machines).map_err(|e| BenchError::Parse {
        line: 1,
        msg: e.to_string(),
    })
}

pub fn read_instance(path: &Path) -> Result<Instance, BenchError> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<(), BenchError> {
    fs::write(path, format_instance(inst))?;
    Ok(())
}

/// Harness settings shared by all groups.
#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    /// Overrides the per-machine-count default of [`CgConfig::for_machines`].
    pub ub_time_limit: Option<Duration>,
    pub branch_node_limit: Option<u64>,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn cg_config(&self, machines: usize) -> CgConfig {
        let mut cfg = CgConfig::for_machines(machines);
        if let Some(t) = self.ub_time_limit {
            cfg.ub_time_limit = t;
        }
        if let Some(nodes) = self.branch_node_limit {
            cfg.branch_node_limit = nodes;
        }
        cfg
    }
}

/// Per-instance results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetailRow {
    pub n: usize,
    pub sigma: Sigma,
    pub capacity: u64,
    pub machines: usize,
    pub seed: u64,
    pub replica: u64,
    pub pr: f64,
    pub cg_lb: Option<f64>,
    pub cg_ub: Option<u64>,
    pub gap: Option<f64>,
    pub ratio: Option<f64>,
    pub certified: bool,
    pub converged: bool,
    pub ub_limit_hit: bool,
    pub iterations: usize,
    pub columns: usize,
    pub lb_seconds: f64,
    pub ub_seconds: f64,
    pub error: Option<String>,
}

/// One summary line per `(n, sigma, C, m)` group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub sigma: Sigma,
    pub capacity: u64,
    pub machines: usize,
    pub instances: usize,
    pub lb_seconds: f64,
    pub ub_seconds: f64,
    pub gap_avg: Option<f64>,
    pub gap_worst: Option<f64>,
    pub gap_best: Option<f64>,
    pub ratio_avg: Option<f64>,
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
    pub opt_count: usize,
    /// Some instance failed or has no gap.
    pub partial: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub details: Vec<DetailRow>,
    pub summary: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn write_detail_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        write_csv(out, DETAIL_HEADER, &self.details)
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        write_csv(out, SUMMARY_HEADER, &self.summary)
    }
}

const DETAIL_HEADER: &[&str] = &[
    "n", "sigma", "capacity", "machines", "seed", "replica", "pr", "cg_lb", "cg_ub", "gap", "ratio",
    "certified", "converged", "ub_limit_hit", "iterations", "columns", "lb_seconds", "ub_seconds",
    "error",
];

const SUMMARY_HEADER: &[&str] = &[
    "n", "sigma", "capacity", "machines", "instances", "lb_seconds", "ub_seconds", "gap_avg",
    "gap_worst", "gap_best", "ratio_avg", "ratio_min", "ratio_max", "opt_count", "partial",
];

// Headers are written explicitly so that an empty report still has them.
fn write_csv<W: Write, T: Serialize>(out: W, header: &[&str], rows: &[T]) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn solve_one(spec: &GenSpec, replica: u64, config: &ExperimentConfig) -> DetailRow {
    let mut row = DetailRow {
        n: spec.n,
        sigma: spec.sigma,
        capacity: spec.capacity,
        machines: spec.machines,
        seed: spec.seed,
        replica,
        pr: f64::NAN,
        cg_lb: None,
        cg_ub: None,
        gap: None,
        ratio: None,
        certified: false,
        converged: false,
        ub_limit_hit: false,
        iterations: 0,
        columns: 0,
        lb_seconds: 0.0,
        ub_seconds: 0.0,
        error: None,
    };
    let inst = match generate_instance(spec, replica) {
        Ok(inst) => inst,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.pr = pr_bound(&inst).value;
    match price_and_branch(&inst, &config.cg_config(spec.machines)) {
        Ok(res) => {
            row.cg_lb = res.cg_lb;
            row.cg_ub = res.cg_ub;
            row.gap = res.gap_percent;
            row.ratio = res.cg_lb.map(|lb| lb / row.pr);
            row.certified = res.certified_optimal;
            row.converged = res.converged;
            row.ub_limit_hit = res.ub_limit_hit;
            row.iterations = res.iterations;
            row.columns = res.master_columns;
            row.lb_seconds = res.lb_seconds;
            row.ub_seconds = res.ub_seconds;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn stats(values: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None, None);
    }
    let avg = values.iter().sum::<f64>() / values.len() as f64;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (Some(avg), Some(max), Some(min))
}

/// Summary of the rows of one group.
pub fn summarize(rows: &[DetailRow]) -> Option<ReportRow> {
    let first = rows.first()?;
    let gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap).collect();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let (gap_avg, gap_worst, gap_best) = stats(&gaps);
    let (ratio_avg, ratio_max, ratio_min) = stats(&ratios);
    let count = rows.len() as f64;
    Some(ReportRow {
        n: first.n,
        sigma: first.sigma,
        capacity: first.capacity,
        machines: first.machines,
        instances: rows.len(),
        lb_seconds: rows.iter().map(|r| r.lb_seconds).sum::<f64>() / count,
        ub_seconds: rows.iter().map(|r| r.ub_seconds).sum::<f64>() / count,
        gap_avg,
        gap_worst,
        gap_best,
        ratio_avg,
        ratio_min,
        ratio_max,
        opt_count: rows.iter().filter(|r| r.certified).count(),
        partial: gaps.len() < rows.len(),
    })
}

/// Solves every replica of every spec on a worker pool; rows come back in
/// spec and replica order regardless of the scheduling.
pub fn run_experiment(
    specs: &[GenSpec],
    config: &ExperimentConfig,
) -> Result<ExperimentReport, BenchError> {
    for spec in specs {
        spec.validate()?;
    }
    let tasks: Vec<(usize, u64)> = specs
        .iter()
        .enumerate()
        .flat_map(|(g, s)| (0..s.replicas as u64).map(move |r| (g, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let details: Vec<DetailRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(g, r)| solve_one(&specs[g], r, config))
            .collect()
    });
    let mut summary = Vec::new();
    let mut start = 0;
    for spec in specs {
        let rows = &details[start..start + spec.replicas];
        summary.extend(summarize(rows));
        start += spec.replicas;
    }
    Ok(ExperimentReport { details, summary })
}
