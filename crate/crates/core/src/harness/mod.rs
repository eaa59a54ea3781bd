//! Runs the pipeline per interval and over a day, and writes reports.

mod day;
mod suite;

use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{EngineConfig, MatchEngine, MatchHypergraph, ReductionConfig, Revalidator};
use crate::network::TransitNetwork;
use crate::packing::{
    exact_solve, greedy_mis, imp_greedy, local_search, solution_from_vertices, to_conflict_graph, ImprovementMetric,
    ImprovementRule, LocalSearchConfig, Solution, DEFAULT_CONFLICT_BUDGET,
};
use crate::trip::TripBatch;

pub use day::{compare_solvers, run_day, DayRun, DaySummary, SolverTotals};
pub use suite::{run_oracle_suite, small_instance, suite_hypergraph, InstanceOutcome, SmallInstanceConfig, SuiteReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    ImpGreedy,
    Greedy,
    AnyImp,
    BestImp,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] =
        [SolverKind::Exact, SolverKind::ImpGreedy, SolverKind::Greedy, SolverKind::AnyImp, SolverKind::BestImp];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::ImpGreedy => "impgreedy",
            SolverKind::Greedy => "greedy",
            SolverKind::AnyImp => "anyimp",
            SolverKind::BestImp => "bestimp",
        }
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown solver {s:?} (expected exact, impgreedy, greedy, anyimp or bestimp)")))
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A named reduction configuration with its improvement time limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub reduction: ReductionConfig,
    pub round_limit: Duration,
}

const fn preset(name: &'static str, x: f64, y: usize, z: usize, secs: u64) -> Preset {
    Preset {
        name,
        reduction: ReductionConfig { base_keep_percent: x, driver_match_cap: y, rider_base_cap: z },
        round_limit: Duration::from_secs(secs),
    }
}

pub const PRESETS: [Preset; 15] = [
    preset("Small1", 20.0, 300, 10, 20),
    preset("Small2", 20.0, 600, 10, 20),
    preset("Small3", 20.0, 300, 20, 20),
    preset("Small4-10", 20.0, 600, 20, 10),
    preset("Medium1", 30.0, 300, 10, 20),
    preset("Medium2", 30.0, 600, 10, 20),
    preset("Medium3", 30.0, 300, 20, 20),
    preset("Medium4-10", 30.0, 600, 20, 10),
    preset("Large1", 40.0, 300, 10, 20),
    preset("Large2", 40.0, 600, 10, 20),
    preset("Large3-10", 40.0, 300, 20, 10),
    preset("Large4-10", 40.0, 600, 20, 10),
    preset("Huge1", 100.0, 600, 10, 20),
    preset("Huge2", 100.0, 2500, 20, 20),
    preset("Huge3", 100.0, 10000, 30, 20),
];

pub const DEFAULT_PRESET: &str = "Medium4-10";

/// Looks up a preset by name (case-insensitive; `Small4` also finds
/// `Small4-10`), or parses `x,y,z`.
pub fn parse_config(spec: &str) -> Result<(ReductionConfig, Option<Duration>)> {
    let lower = spec.to_ascii_lowercase();
    if let Some(p) = PRESETS.iter().find(|p| {
        let name = p.name.to_ascii_lowercase();
        name == lower || name.strip_suffix("-10") == Some(lower.as_str())
    }) {
        return Ok((p.reduction, Some(p.round_limit)));
    }
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() == 3 {
        let x = parts[0].trim_end_matches('%').parse::<f64>();
        let y = parts[1].parse::<usize>();
        let z = parts[2].parse::<usize>();
        if let (Ok(x), Ok(y), Ok(z)) = (x, y, z) {
            return Ok((ReductionConfig::new(x, y, z)?, None));
        }
    }
    Err(Error::Config(format!("unknown config {spec:?}: expected a preset name or x,y,z")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub solver: SolverKind,
    pub engine: EngineConfig,
    /// Per-improvement time limit of the local searches; `None` disables it.
    pub round_limit: Option<Duration>,
    pub improvement_metric: ImprovementMetric,
    /// Adjacency budget of the conflict graph before falling back to
    /// ImpGreedy.
    pub conflict_budget: u64,
    /// Time budget of the exact solver.
    pub exact_budget: Option<Duration>,
    /// Record wall-clock times in solutions and timing files.
    pub record_timings: bool,
    /// Run intervals concurrently.
    pub parallel_intervals: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let (reduction, round_limit) = parse_config(DEFAULT_PRESET).expect("default preset exists");
        Self {
            solver: SolverKind::ImpGreedy,
            engine: EngineConfig { reduction, best_station: false },
            round_limit,
            improvement_metric: ImprovementMetric::WeightSquared,
            conflict_budget: DEFAULT_CONFLICT_BUDGET,
            exact_budget: Some(Duration::from_secs(60)),
            record_timings: true,
            parallel_intervals: false,
        }
    }
}

/// Metrics of one interval.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub interval: usize,
    pub drivers: usize,
    pub riders: usize,
    pub base_matches: usize,
    pub edges: usize,
    /// Drivers with at least one feasible match.
    pub matchable_drivers: usize,
    pub served: usize,
    pub serving_drivers: usize,
    /// Sum over served riders of fastest transit time minus ridesharing time.
    pub time_saved: i64,
    pub occupancy: f64,
    pub vacancy: f64,
    pub solver: String,
    /// The exact solver proved optimality (always true for other solvers).
    pub optimal: bool,
    pub alg1_ms: u64,
    pub alg2_ms: u64,
    pub solver_ms: u64,
}

/// Served riders per serving driver, and matchable drivers left idle over
/// matchable drivers; both zero when undefined.
pub fn occupancy_and_vacancy(served: usize, serving: usize, matchable: usize) -> (f64, f64) {
    let occupancy = if serving == 0 { 0.0 } else { served as f64 / serving as f64 };
    let vacancy = if matchable == 0 { 0.0 } else { (matchable - serving) as f64 / matchable as f64 };
    (occupancy, vacancy)
}

fn ms(d: Duration) -> u64 {
    d.as_millis() as u64
}

/// Runs one solver on a hypergraph. Returns the solution and whether it is
/// certified optimal.
pub fn solve(h: &MatchHypergraph, cfg: &RunConfig) -> Result<(Solution, bool)> {
    let k = h.max_edge_size().max(1);
    match cfg.solver {
        SolverKind::Exact => {
            let out = exact_solve(h, cfg.exact_budget)?;
            Ok((out.solution, out.optimal))
        }
        SolverKind::ImpGreedy => Ok((imp_greedy(h)?, true)),
        kind => {
            let g = match to_conflict_graph(h, cfg.conflict_budget) {
                Ok(g) => g,
                Err(e @ Error::ConflictGraphTooLarge { .. }) => {
                    log::warn!("{e}; falling back to impgreedy");
                    let mut s = imp_greedy(h)?;
                    s.solver = format!("{kind}-fallback-impgreedy");
                    return Ok((s, true));
                }
                Err(e) => return Err(e),
            };
            let init = greedy_mis(&g);
            let set = match kind {
                SolverKind::Greedy => init,
                _ => {
                    let rule = if kind == SolverKind::AnyImp { ImprovementRule::AnyImp } else { ImprovementRule::BestImp };
                    let ls = LocalSearchConfig {
                        rule,
                        metric: cfg.improvement_metric,
                        max_talons: k + 1,
                        round_limit: cfg.round_limit,
                    };
                    local_search(&g, &init, ls)?.set
                }
            };
            Ok((solution_from_vertices(kind.name(), &g, h, &set)?, true))
        }
    }
}

/// Station tuples, single-rider matches, reduction, group enumeration,
/// solving, revalidation and metrics for one batch.
pub fn run_interval(t: usize, batch: &TripBatch, net: &TransitNetwork, cfg: &RunConfig) -> Result<(IntervalReport, Solution)> {
    let wrap = |e: Error| Error::Interval { interval: t, source: Box::new(e) };
    let start = Instant::now();
    let engine = MatchEngine::new(net, batch, cfg.engine).map_err(wrap)?;
    let (base, base_stats) = engine.single_passenger_matches().map_err(wrap)?;
    let alg1 = start.elapsed();
    let start = Instant::now();
    let (h, _) = engine.enumerate_matches(&base).map_err(wrap)?;
    let alg2 = start.elapsed();
    log::debug!("interval {t}: {} base matches, {} edges in {:?} + {:?}", base_stats.base_kept, h.edges().len(), alg1, alg2);
    let start = Instant::now();
    let (mut solution, optimal) = solve(&h, cfg).map_err(wrap)?;
    let solver_time = start.elapsed();
    log::debug!("interval {t}: {} served {} in {solver_time:?}", solution.solver, solution.objective);
    solution.elapsed_ms = if cfg.record_timings { ms(solver_time) } else { 0 };

    Revalidator::new(net, batch).check_assignment(&solution.matches).map_err(wrap)?;

    let baselines: std::collections::HashMap<_, _> =
        batch.riders.iter().map(|r| (r.id, r.baseline_transit_time)).collect();
    let baselines = &baselines;
    let time_saved = solution
        .matches
        .iter()
        .flat_map(|m| m.riders.iter().map(move |&r| baselines[&r] - m.rider_time(r).expect("rider of its match")))
        .sum();
    let served = solution.objective;
    let serving = solution.serving_drivers();
    let (occupancy, vacancy) = occupancy_and_vacancy(served, serving, h.drivers().len());
    let report = IntervalReport {
        interval: t,
        drivers: batch.drivers.len(),
        riders: batch.riders.len(),
        base_matches: base_stats.base_kept,
        edges: h.edges().len(),
        matchable_drivers: h.drivers().len(),
        served,
        serving_drivers: serving,
        time_saved,
        occupancy,
        vacancy,
        solver: solution.solver.clone(),
        optimal,
        alg1_ms: if cfg.record_timings { ms(alg1) } else { 0 },
        alg2_ms: if cfg.record_timings { ms(alg2) } else { 0 },
        solver_ms: solution.elapsed_ms,
    };
    Ok((report, solution))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_by_name_and_tuple() {
        let (r, limit) = parse_config("Medium4-10").unwrap();
        assert_eq!((r.base_keep_percent, r.driver_match_cap, r.rider_base_cap), (30.0, 600, 20));
        assert_eq!(limit, Some(Duration::from_secs(10)));
        let (r, limit) = parse_config("small1").unwrap();
        assert_eq!((r.base_keep_percent, r.driver_match_cap, r.rider_base_cap), (20.0, 300, 10));
        assert_eq!(limit, Some(Duration::from_secs(20)));
        assert_eq!(parse_config("Huge3").unwrap().0.driver_match_cap, 10000);
        assert_eq!(parse_config("Large3").unwrap().1, Some(Duration::from_secs(10)));
        let (r, limit) = parse_config("50%,100,5").unwrap();
        assert_eq!((r.base_keep_percent, r.driver_match_cap, r.rider_base_cap), (50.0, 100, 5));
        assert_eq!(limit, None);
        assert!(parse_config("Tiny").is_err());
        assert!(parse_config("0,1,1").is_err());
    }

    #[test]
    fn occupancy_and_vacancy_follow_their_definitions() {
        assert_eq!(occupancy_and_vacancy(0, 0, 0), (0.0, 0.0));
        assert_eq!(occupancy_and_vacancy(1, 1, 1), (1.0, 0.0));
        assert_eq!(occupancy_and_vacancy(6, 3, 4), (2.0, 0.25));
    }

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert!("cplex".parse::<SolverKind>().is_err());
    }

    #[test]
    fn empty_batch_gives_zero_report() {
        let net = crate::network::generate_network(&Default::default(), 1).unwrap();
        let (report, solution) = run_interval(0, &TripBatch::default(), &net, &RunConfig::default()).unwrap();
        assert_eq!(report.served, 0);
        assert_eq!(report.edges, 0);
        assert_eq!(report.occupancy, 0.0);
        assert_eq!(solution.objective, 0);
    }
}
