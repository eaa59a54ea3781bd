use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_interval, IntervalReport, RunConfig, SolverKind};
use crate::error::Result;
use crate::feasibility::ReductionConfig;
use crate::generator::Workload;
use crate::network::TransitNetwork;
use crate::packing::Solution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DaySummary {
    pub solver: String,
    pub reduction: ReductionConfig,
    pub intervals: usize,
    /// Intervals that failed, with the error.
    pub failed: Vec<(usize, String)>,
    pub total_riders: usize,
    pub total_drivers: usize,
    pub total_served: usize,
    pub served_fraction: f64,
    pub total_time_saved: i64,
    /// Sum of every rider's fastest transit time.
    pub total_transit_time: i64,
    pub time_saved_fraction: f64,
    pub avg_served_per_interval: f64,
    pub avg_time_saved_per_interval: f64,
    /// Mean over intervals with a serving driver.
    pub mean_occupancy: f64,
    /// Mean over intervals with a matchable driver.
    pub mean_vacancy: f64,
}

impl DaySummary {
    pub fn is_complete(&self) -> bool {
        self.failed.is_empty()
    }
}

pub struct DayRun {
    pub summary: DaySummary,
    pub reports: Vec<IntervalReport>,
    pub solutions: Vec<Solution>,
    pub wall_ms: u64,
}

#[derive(Serialize)]
struct IntervalRow<'a> {
    interval: usize,
    drivers: usize,
    riders: usize,
    base_matches: usize,
    edges: usize,
    matchable_drivers: usize,
    served: usize,
    serving_drivers: usize,
    time_saved: i64,
    occupancy: f64,
    vacancy: f64,
    solver: &'a str,
    optimal: bool,
}

#[derive(Serialize)]
struct TimingRow {
    interval: usize,
    alg1_ms: u64,
    alg2_ms: u64,
    solver_ms: u64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Runs every interval of the workload. Failed intervals are recorded in the
/// summary and skipped. With `out`, writes `intervals.csv`, `summary.json`,
/// `solutions/interval_XX.json` and, when timings are on, `timings.csv`.
pub fn run_day(net: &TransitNetwork, workload: &Workload, cfg: &RunConfig, out: Option<&Path>) -> Result<DayRun> {
    let start = Instant::now();
    let run = |(t, batch)| (t, run_interval(t, batch, net, cfg));
    let results: Vec<_> = if cfg.parallel_intervals {
        workload.intervals.par_iter().enumerate().map(run).collect()
    } else {
        workload.intervals.iter().enumerate().map(run).collect()
    };
    let mut reports = Vec::new();
    let mut solutions = Vec::new();
    let mut failed = Vec::new();
    for (t, r) in results {
        match r {
            Ok((report, solution)) => {
                log::info!(
                    "interval {t:02}: {} riders, {} drivers, {} edges, served {}",
                    report.riders,
                    report.drivers,
                    report.edges,
                    report.served
                );
                reports.push(report);
                solutions.push(solution);
            }
            Err(e) => {
                log::error!("{e}");
                failed.push((t, e.to_string()));
            }
        }
    }
    let total_riders: usize = workload.intervals.iter().map(|b| b.riders.len()).sum();
    let total_served: usize = reports.iter().map(|r| r.served).sum();
    let total_time_saved: i64 = reports.iter().map(|r| r.time_saved).sum();
    let total_transit_time: i64 =
        workload.intervals.iter().flat_map(|b| b.riders.iter().map(|r| r.baseline_transit_time)).sum();
    let n = workload.intervals.len().max(1) as f64;
    let summary = DaySummary {
        solver: cfg.solver.name().to_string(),
        reduction: cfg.engine.reduction,
        intervals: workload.intervals.len(),
        failed,
        total_riders,
        total_drivers: workload.intervals.iter().map(|b| b.drivers.len()).sum(),
        total_served,
        served_fraction: if total_riders == 0 { 0.0 } else { total_served as f64 / total_riders as f64 },
        total_time_saved,
        total_transit_time,
        time_saved_fraction: if total_transit_time == 0 {
            0.0
        } else {
            total_time_saved as f64 / total_transit_time as f64
        },
        avg_served_per_interval: total_served as f64 / n,
        avg_time_saved_per_interval: total_time_saved as f64 / n,
        mean_occupancy: mean(reports.iter().filter(|r| r.serving_drivers > 0).map(|r| r.occupancy)),
        mean_vacancy: mean(reports.iter().filter(|r| r.matchable_drivers > 0).map(|r| r.vacancy)),
    };
    if let Some(dir) = out {
        write_outputs(dir, cfg, &summary, &reports, &solutions)?;
    }
    Ok(DayRun { summary, reports, solutions, wall_ms: start.elapsed().as_millis() as u64 })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_outputs(
    dir: &Path,
    cfg: &RunConfig,
    summary: &DaySummary,
    reports: &[IntervalReport],
    solutions: &[Solution],
) -> Result<()> {
    fs::create_dir_all(dir.join("solutions"))?;
    let mut w = csv::Writer::from_path(dir.join("intervals.csv"))?;
    for r in reports {
        w.serialize(IntervalRow {
            interval: r.interval,
            drivers: r.drivers,
            riders: r.riders,
            base_matches: r.base_matches,
            edges: r.edges,
            matchable_drivers: r.matchable_drivers,
            served: r.served,
            serving_drivers: r.serving_drivers,
            time_saved: r.time_saved,
            occupancy: r.occupancy,
            vacancy: r.vacancy,
            solver: &r.solver,
            optimal: r.optimal,
        })?;
    }
    w.flush()?;
    let timings = dir.join("timings.csv");
    if cfg.record_timings {
        let mut w = csv::Writer::from_path(&timings)?;
        for r in reports {
            w.serialize(TimingRow { interval: r.interval, alg1_ms: r.alg1_ms, alg2_ms: r.alg2_ms, solver_ms: r.solver_ms })?;
        }
        w.flush()?;
    } else if timings.exists() {
        fs::remove_file(timings)?;
    }
    write_json(&dir.join("summary.json"), summary)?;
    for (r, s) in reports.iter().zip(solutions) {
        write_json(&dir.join("solutions").join(format!("interval_{:02}.json", r.interval)), s)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverTotals {
    pub solver: String,
    pub served: usize,
    pub time_saved: i64,
    pub solver_ms: u64,
    pub failed_intervals: usize,
    pub served_per_interval: Vec<usize>,
}

/// Runs each solver on the same workload. With `out`, writes `compare.csv`
/// with one row per solver and interval.
pub fn compare_solvers(
    net: &TransitNetwork,
    workload: &Workload,
    cfg: &RunConfig,
    solvers: &[SolverKind],
    out: Option<&Path>,
) -> Result<Vec<SolverTotals>> {
    #[derive(Serialize)]
    struct Row<'a> {
        solver: &'a str,
        interval: usize,
        served: usize,
        time_saved: i64,
        solver_ms: u64,
    }
    let mut totals = Vec::new();
    let mut rows = Vec::new();
    for &solver in solvers {
        let day = run_day(net, workload, &RunConfig { solver, ..cfg.clone() }, None)?;
        for r in &day.reports {
            rows.push((solver.name(), r.interval, r.served, r.time_saved, r.solver_ms));
        }
        totals.push(SolverTotals {
            solver: solver.name().to_string(),
            served: day.summary.total_served,
            time_saved: day.summary.total_time_saved,
            solver_ms: day.reports.iter().map(|r| r.solver_ms).sum(),
            failed_intervals: day.summary.failed.len(),
            served_per_interval: day.reports.iter().map(|r| r.served).collect(),
        });
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("compare.csv"))?;
        for (solver, interval, served, time_saved, solver_ms) in rows {
            w.serialize(Row { solver, interval, served, time_saved, solver_ms })?;
        }
        w.flush()?;
        write_json(&dir.join("compare.json"), &totals)?;
    }
    Ok(totals)
}
