use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use rideshare_transit::generator::{GeneratorConfig, Workload, WorkloadGenerator};
use rideshare_transit::harness::{
    compare_solvers, parse_config, run_day, run_oracle_suite, RunConfig, SmallInstanceConfig, SolverKind,
    DEFAULT_PRESET,
};
use rideshare_transit::network::{generate_network, NetworkGenConfig, TransitNetwork};
use rideshare_transit::packing::ImprovementMetric;

#[derive(Parser)]
#[command(name = "rideshare-transit", version, about = "Ridesharing with public transit: matching and day simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver over every interval of a day.
    Simulate(SimulateArgs),
    /// Run several solvers on the same workload.
    Compare {
        #[command(flatten)]
        run: SimulateArgs,
        /// Comma-separated solver names.
        #[arg(long, value_delimiter = ',', default_value = "exact,impgreedy,greedy,anyimp,bestimp")]
        solvers: Vec<SolverKind>,
    },
    /// Check every solver against the exact optimum on small random instances.
    OracleSuite {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 6)]
        max_drivers: usize,
        #[arg(long, default_value_t = 10)]
        max_riders: usize,
        #[arg(long, default_value_t = 3)]
        max_capacity: u32,
        /// Write the per-instance outcomes as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write a synthetic network as JSON.
    GenNetwork {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a day of trips into a directory.
    GenWorkload {
        #[command(flatten)]
        network: NetworkSource,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        trip_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct NetworkSource {
    /// Network JSON file.
    #[arg(long, conflicts_with = "gen_network")]
    network: Option<PathBuf>,
    /// Seed of a generated network (default 1).
    #[arg(long)]
    gen_network: Option<u64>,
}

impl NetworkSource {
    fn load(&self) -> anyhow::Result<TransitNetwork> {
        match &self.network {
            Some(path) => TransitNetwork::load(path).with_context(|| format!("loading network {}", path.display())),
            None => Ok(generate_network(&NetworkGenConfig::default(), self.gen_network.unwrap_or(1))?),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    network: NetworkSource,
    /// Workload directory written by gen-workload.
    #[arg(long, conflicts_with = "gen_seed")]
    workload: Option<PathBuf>,
    /// Seed of a generated workload (default 1).
    #[arg(long)]
    gen_seed: Option<u64>,
    /// Scale factor on generated trip counts.
    #[arg(long, default_value_t = 1.0)]
    trip_scale: f64,
    #[arg(long, default_value = "impgreedy")]
    solver: SolverKind,
    /// Preset name (Small1 .. Huge3) or x,y,z.
    #[arg(long, default_value = DEFAULT_PRESET)]
    config: String,
    /// Per-improvement time limit of the local searches, in seconds.
    #[arg(long, conflicts_with = "no_time_limit")]
    time_limit: Option<f64>,
    #[arg(long)]
    no_time_limit: bool,
    /// Time budget of the exact solver per interval, in seconds.
    #[arg(long, default_value_t = 60.0)]
    exact_time_limit: f64,
    /// Leave wall-clock times out of the outputs.
    #[arg(long)]
    no_timings: bool,
    /// Keep the fastest station of each single-rider match.
    #[arg(long)]
    best_station: bool,
    #[arg(long, value_enum, default_value = "weight-squared")]
    improvement_metric: Metric,
    #[arg(long)]
    parallel_intervals: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Metric {
    Weight,
    WeightSquared,
}

fn seconds(s: f64) -> anyhow::Result<Duration> {
    Duration::try_from_secs_f64(s).with_context(|| format!("bad duration {s}"))
}

impl SimulateArgs {
    fn run_config(&self) -> anyhow::Result<RunConfig> {
        let (reduction, preset_limit) = parse_config(&self.config)?;
        let mut cfg = RunConfig { solver: self.solver, ..RunConfig::default() };
        cfg.engine.reduction = reduction;
        cfg.engine.best_station = self.best_station;
        cfg.round_limit = match (self.no_time_limit, self.time_limit) {
            (true, _) => None,
            (false, Some(s)) => Some(seconds(s)?),
            (false, None) => preset_limit.or(cfg.round_limit),
        };
        cfg.exact_budget = Some(seconds(self.exact_time_limit)?);
        cfg.improvement_metric = match self.improvement_metric {
            Metric::Weight => ImprovementMetric::Weight,
            Metric::WeightSquared => ImprovementMetric::WeightSquared,
        };
        cfg.record_timings = !self.no_timings;
        cfg.parallel_intervals = self.parallel_intervals;
        Ok(cfg)
    }

    fn inputs(&self) -> anyhow::Result<(TransitNetwork, Workload)> {
        let net = self.network.load()?;
        let workload = match &self.workload {
            Some(dir) => {
                let (w, manifest) =
                    Workload::load(dir).with_context(|| format!("loading workload {}", dir.display()))?;
                log::info!("workload seed {} config {}", manifest.seed, manifest.config_hash);
                w
            }
            None => generate_workload(&net, self.gen_seed.unwrap_or(1), self.trip_scale)?.0,
        };
        Ok((net, workload))
    }
}

fn generate_workload(net: &TransitNetwork, seed: u64, trip_scale: f64) -> anyhow::Result<(Workload, GeneratorConfig)> {
    let cfg = GeneratorConfig { seed, trip_scale, ..GeneratorConfig::default() };
    let w = WorkloadGenerator::new(net, cfg.clone())?.generate_day()?;
    Ok((w, cfg))
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<bool> {
    let cfg = args.run_config()?;
    let (net, workload) = args.inputs()?;
    let day = run_day(&net, &workload, &cfg, args.out.as_deref())?;
    let s = &day.summary;
    println!(
        "{}: served {} of {} riders ({:.1}%), time saved {} s, mean occupancy {:.3}, mean vacancy {:.3}",
        s.solver,
        s.total_served,
        s.total_riders,
        100.0 * s.served_fraction,
        s.total_time_saved,
        s.mean_occupancy,
        s.mean_vacancy
    );
    if cfg.record_timings {
        println!("wall time {:.2} s", day.wall_ms as f64 / 1000.0);
    }
    for (t, e) in &s.failed {
        eprintln!("interval {t} failed: {e}");
    }
    Ok(s.is_complete())
}

fn compare(args: &SimulateArgs, solvers: &[SolverKind]) -> anyhow::Result<bool> {
    if solvers.is_empty() {
        bail!("no solvers given");
    }
    let cfg = args.run_config()?;
    let (net, workload) = args.inputs()?;
    let totals = compare_solvers(&net, &workload, &cfg, solvers, args.out.as_deref())?;
    println!("{:<12} {:>8} {:>12} {:>12}", "solver", "served", "time_saved", "solver_ms");
    for t in &totals {
        println!("{:<12} {:>8} {:>12} {:>12}", t.solver, t.served, t.time_saved, t.solver_ms);
    }
    Ok(totals.iter().all(|t| t.failed_intervals == 0))
}

fn oracle_suite(instances: usize, cfg: SmallInstanceConfig, json: Option<&Path>) -> anyhow::Result<bool> {
    let report = run_oracle_suite(instances, &cfg)?;
    if let Some(path) = json {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    let violations = report.violations();
    let opt: usize = report.instances.iter().map(|o| o.exact).sum();
    let imp: usize = report.instances.iter().map(|o| o.impgreedy).sum();
    println!(
        "{} instances ({} with shared rides): optimum {opt}, impgreedy {imp}, {} violations",
        report.instances.len(),
        report.nontrivial(),
        violations.len()
    );
    for v in &violations {
        eprintln!("{v}");
    }
    Ok(violations.is_empty())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Compare { run, solvers } => compare(&run, &solvers),
        Command::OracleSuite { instances, max_drivers, max_riders, max_capacity, json } => {
            let cfg = SmallInstanceConfig { max_drivers, max_riders, max_capacity, ..SmallInstanceConfig::default() };
            oracle_suite(instances, cfg, json.as_deref())
        }
        Command::GenNetwork { seed, out } => {
            generate_network(&NetworkGenConfig::default(), seed)?.save(&out)?;
            Ok(true)
        }
        Command::GenWorkload { network, seed, trip_scale, out } => {
            let net = network.load()?;
            let (w, cfg) = generate_workload(&net, seed, trip_scale)?;
            w.save(&out, &cfg)?;
            let trips: usize = w.intervals.iter().map(|b| b.drivers.len() + b.riders.len()).sum();
            println!("wrote {} intervals, {trips} trips to {}", w.intervals.len(), out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
