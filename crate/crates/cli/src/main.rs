//! `pbatch`: command-line front end for the batch scheduling solver.
//!
//! Exit codes: 0 when the command ran (time limits included), 1 on usage
//! errors, 2 on unreadable or invalid input, 3 when a solver step failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use pbatch_core::bench::{
    format_instance, generate_instance, read_instance, run_experiment, write_instance,
    ExperimentConfig, GenSpec, Sigma,
};
use pbatch_core::bounds::pr_bound;
use pbatch_core::colgen::{price_and_branch, CgConfig, PricingRule};
use pbatch_core::model::Instance;
use pbatch_core::oracle::{exact_optimum, exact_optimum_all_orders, export_milp, BigM};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "pbatch", version, about = "Parallel-batch scheduling by column generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances.
    Gen(GenArgs),
    /// Run price-and-branch on an instance file and print a JSON result.
    Solve(SolveArgs),
    /// Exact optimum by enumeration (small instances only).
    Oracle(OracleArgs),
    /// Write the positional MILP of a single-machine instance in LP format.
    ExportMilp(ExportArgs),
    /// Run an experiment and write detail and summary CSV files.
    Bench(BenchArgs),
    /// Print the preemptive relaxation lower bound.
    Pr(InstanceArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file (`n m C` header, then `p s` per job).
    instance: PathBuf,
    /// Override the machine count of the file.
    #[arg(long)]
    machines: Option<usize>,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance, Failure> {
        let inst = read_instance(&self.instance).map_err(Failure::input)?;
        match self.machines {
            Some(m) => inst.with_machines(m).map_err(Failure::input),
            None => Ok(inst),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_sigma)]
    sigma: Sigma,
    #[arg(long, default_value_t = 10)]
    capacity: u64,
    #[arg(long, default_value_t = 1)]
    machines: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// First replica index.
    #[arg(long, default_value_t = 0)]
    replica: u64,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    /// Output directory; without it a single instance goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PricingArg {
    Auto,
    Single,
    Identical,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InstanceArgs,
    /// Seconds for the branch-and-bound phase (default 60, or 180 with m > 1).
    #[arg(long)]
    time_limit_ub: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, value_enum, default_value_t = PricingArg::Auto)]
    pricing: PricingArg,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InstanceArgs,
    /// Also cross-check with the all-orders enumeration.
    #[arg(long)]
    all_orders: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    input: InstanceArgs,
    /// Big-M constant; defaults to the total processing time.
    #[arg(long)]
    big_m: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML file with `[[group]]` tables; without it one group is built from the flags.
    spec: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = parse_sigma)]
    sigma: Option<Sigma>,
    #[arg(long, default_value_t = 10)]
    capacity: u64,
    #[arg(long, default_value_t = 1)]
    machines: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    replicas: usize,
    #[arg(long)]
    time_limit_ub: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Directory receiving detail.csv and summary.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchFile {
    #[serde(default)]
    group: Vec<GenSpec>,
}

fn parse_sigma(s: &str) -> Result<Sigma, String> {
    s.parse().map_err(|e: pbatch_core::bench::BenchError| e.to_string())
}

fn seconds(s: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(s).map_err(|e| Failure::usage(format!("time limit {s}: {e}")))
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(msg: impl ToString) -> Self {
        Self {
            code: 1,
            message: msg.to_string(),
        }
    }

    fn input(msg: impl ToString) -> Self {
        Self {
            code: 2,
            message: msg.to_string(),
        }
    }

    fn solver(msg: impl ToString) -> Self {
        Self {
            code: 3,
            message: msg.to_string(),
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialize to JSON");
    s.push('\n');
    s
}

fn instance_echo(inst: &Instance) -> serde_json::Value {
    json!({ "n": inst.n(), "machines": inst.machines(), "capacity": inst.capacity() })
}

fn gen(args: &GenArgs) -> Result<(), Failure> {
    let spec = GenSpec {
        n: args.n,
        machines: args.machines,
        capacity: args.capacity,
        sigma: args.sigma,
        seed: args.seed,
        replicas: args.replicas,
    };
    spec.validate().map_err(Failure::usage)?;
    let Some(dir) = &args.out else {
        if args.replicas != 1 {
            return Err(Failure::usage("--out is required for more than one replica"));
        }
        let inst = generate_instance(&spec, args.replica).map_err(Failure::usage)?;
        print!("{}", format_instance(&inst));
        return Ok(());
    };
    fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    for r in args.replica..args.replica + args.replicas as u64 {
        let inst = generate_instance(&spec, r).map_err(Failure::usage)?;
        let name = format!(
            "n{}_{}_c{}_m{}_seed{}_r{}.txt",
            spec.n, spec.sigma, spec.capacity, spec.machines, spec.seed, r
        );
        let path = dir.join(name);
        write_instance(&inst, &path).map_err(Failure::input)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let inst = args.input.load()?;
    let mut config = CgConfig::for_machines(inst.machines());
    if let Some(t) = args.time_limit_ub {
        config.ub_time_limit = seconds(t)?;
    }
    if let Some(nodes) = args.node_limit {
        config.branch_node_limit = nodes;
    }
    config.pricing = match args.pricing {
        PricingArg::Auto => PricingRule::Auto,
        PricingArg::Single => PricingRule::Single,
        PricingArg::Identical => PricingRule::Identical,
    };
    let result = price_and_branch(&inst, &config).map_err(Failure::solver)?;
    let doc = json!({
        "version": VERSION,
        "instance_file": args.input.instance,
        "instance": instance_echo(&inst),
        "config": config,
        "pr": pr_bound(&inst),
        "result": result,
    });
    emit(&to_json(&doc), args.out.as_deref())
}

fn oracle(args: &OracleArgs) -> Result<(), Failure> {
    let inst = args.input.load()?;
    let res = exact_optimum(&inst).map_err(Failure::input)?;
    let mut doc = json!({
        "version": VERSION,
        "instance": instance_echo(&inst),
        "optimum": res.optimum,
        "partitions_explored": res.partitions_explored,
        "schedule": res.schedule,
    });
    if args.all_orders {
        let check = exact_optimum_all_orders(&inst).map_err(Failure::input)?;
        doc["all_orders_optimum"] = json!(check);
    }
    emit(&to_json(&doc), None)
}

fn export(args: &ExportArgs) -> Result<(), Failure> {
    let inst = args.input.load()?;
    let big_m = args.big_m.map_or(BigM::TotalWork, BigM::Value);
    let text = export_milp(&inst, big_m).map_err(Failure::input)?;
    emit(&text, args.out.as_deref())
}

fn bench(args: &BenchArgs) -> Result<(), Failure> {
    let specs = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            let file: BenchFile = toml::from_str(&text)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            file.group
        }
        None => {
            let (Some(n), Some(sigma)) = (args.n, args.sigma) else {
                return Err(Failure::usage("bench needs a spec file or both --n and --sigma"));
            };
            vec![GenSpec {
                n,
                machines: args.machines,
                capacity: args.capacity,
                sigma,
                seed: args.seed,
                replicas: args.replicas,
            }]
        }
    };
    let config = ExperimentConfig {
        ub_time_limit: args.time_limit_ub.map(seconds).transpose()?,
        branch_node_limit: args.node_limit,
        threads: args.jobs,
    };
    let report = run_experiment(&specs, &config).map_err(Failure::input)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::input(format!("{}: {e}", args.out.display())))?;
    let open = |name: &str| {
        let path = args.out.join(name);
        fs::File::create(&path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    };
    report.write_detail_csv(open("detail.csv")?).map_err(Failure::input)?;
    report.write_summary_csv(open("summary.csv")?).map_err(Failure::input)?;
    report
        .write_summary_csv(std::io::stdout().lock())
        .map_err(Failure::input)?;
    Ok(())
}

fn pr(args: &InstanceArgs) -> Result<(), Failure> {
    let inst = args.load()?;
    let doc = json!({
        "version": VERSION,
        "instance": instance_echo(&inst),
        "pr": pr_bound(&inst),
    });
    emit(&to_json(&doc), None)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Oracle(a) => oracle(a),
        Command::ExportMilp(a) => export(a),
        Command::Bench(a) => bench(a),
        Command::Pr(a) => pr(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pbatch: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
