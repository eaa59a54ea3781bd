use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::feasibility::{build_hypergraph, EngineConfig, MatchHypergraph, Revalidator};
use crate::network::{
    Location, LocationId, Mode, Multipliers, NetworkDoc, RoadEdge, Station, StationId, TransitLine, TransitNetwork,
    NETWORK_FORMAT_VERSION,
};
use crate::packing::{
    exact_solve, greedy_mis, imp_greedy, local_search, solution_from_vertices, to_conflict_graph, ImprovementMetric,
    ImprovementRule, LocalSearchConfig, Solution, DEFAULT_CONFLICT_BUDGET,
};
use crate::trip::{driver_max_trip_time, DriverTrip, MatchType, RiderTrip, TripBatch, TripId};
use crate::Seconds;

/// Shape of the random desk-scale instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallInstanceConfig {
    pub max_drivers: usize,
    pub max_riders: usize,
    pub max_capacity: u32,
    /// Street grid columns; train stations sit on row 0.
    pub columns: usize,
    pub rows: usize,
}

impl Default for SmallInstanceConfig {
    fn default() -> Self {
        Self { max_drivers: 6, max_riders: 10, max_capacity: 3, columns: 9, rows: 5 }
    }
}

fn small_network(rng: &mut ChaCha8Rng, cfg: &SmallInstanceConfig) -> Result<TransitNetwork> {
    let (w, h) = (cfg.columns.max(3), cfg.rows.max(3));
    let at = |r: usize, c: usize| LocationId((r * w + c) as u32);
    let locations = (0..h)
        .flat_map(|r| (0..w).map(move |c| (r, c)))
        .map(|(r, c)| Location { id: at(r, c), coords: [c as f64 * 100.0, r as f64 * 100.0], area: None })
        .collect();
    let mut road_edges = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let mut link = |to: LocationId| {
                road_edges.push(RoadEdge { from: at(r, c), to, seconds: rng.random_range(60..=120) });
                road_edges.push(RoadEdge { from: to, to: at(r, c), seconds: rng.random_range(60..=120) });
            };
            if c + 1 < w {
                link(at(r, c + 1));
            }
            if r + 1 < h {
                link(at(r + 1, c));
            }
        }
    }
    let mut stations = Vec::new();
    let mut add = |loc: LocationId, mode: Mode| {
        let id = StationId(stations.len() as u32);
        stations.push(Station { id, location: loc, mode, name: format!("s{}", id.0) });
        id
    };
    let train: Vec<StationId> = (0..w).step_by(2).map(|c| add(at(0, c), Mode::Train)).collect();
    let mid = train[train.len() / 2];
    let bus: Vec<StationId> = [1, w / 2, w - 2].iter().map(|&c| add(at(h - 1, c), Mode::Bus)).collect();
    let feeder = add(at(h / 2, w / 2), Mode::Bus);
    let transit_lines = vec![
        TransitLine { name: "train".into(), mode: Mode::Train, stations: train },
        TransitLine { name: "bus-crosstown".into(), mode: Mode::Bus, stations: bus.clone() },
        TransitLine { name: "bus-feeder".into(), mode: Mode::Bus, stations: vec![bus[1], feeder, mid] },
    ];
    TransitNetwork::new(NetworkDoc {
        version: NETWORK_FORMAT_VERSION,
        locations,
        stations,
        road_edges,
        transit_lines,
        multipliers: Multipliers::default(),
        areas: Vec::new(),
    })
}

fn match_type(rng: &mut ChaCha8Rng) -> MatchType {
    match rng.random_range(0..3) {
        0 => MatchType::Type1,
        1 => MatchType::Type2,
        _ => MatchType::Either,
    }
}

/// A seeded random instance: a small grid city with one train line and two
/// bus lines, and trips clustered in space and time so that many riders share
/// drivers. Every rider accepts 80% of the fastest transit time.
pub fn small_instance(seed: u64, cfg: &SmallInstanceConfig) -> Result<(TransitNetwork, TripBatch)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = small_network(&mut rng, cfg)?;
    let (w, h) = (cfg.columns.max(3), cfg.rows.max(3));
    let at = |r: usize, c: usize| LocationId((r * w + c) as u32);
    // riders gather around one column and travel to the far side
    let home = rng.random_range(0..w);
    let near = |rng: &mut ChaCha8Rng| (home + rng.random_range(0..=2)).saturating_sub(1).min(w - 1);
    let far = |rng: &mut ChaCha8Rng| if home < w / 2 { rng.random_range(w - 2..w) } else { rng.random_range(0..2) };
    let outer = |rng: &mut ChaCha8Rng| rng.random_range(h / 2..h);
    let inner = |rng: &mut ChaCha8Rng| rng.random_range(0..2);
    let n_drivers = rng.random_range(1..=cfg.max_drivers.max(1));
    let n_riders = rng.random_range(1..=cfg.max_riders.max(1));

    let mut riders = Vec::new();
    for k in 0..n_riders {
        let mt = match_type(&mut rng);
        let inbound = match mt {
            MatchType::Type1 => true,
            MatchType::Type2 => false,
            MatchType::Either => rng.random_bool(0.5),
        };
        let (o, d) = if inbound {
            (at(outer(&mut rng), near(&mut rng)), at(inner(&mut rng), far(&mut rng)))
        } else {
            (at(inner(&mut rng), far(&mut rng)), at(outer(&mut rng), near(&mut rng)))
        };
        if o == d {
            continue;
        }
        let baseline = net.best_transit_route_time(o, d)?;
        let alpha: Seconds = rng.random_range(0..=600);
        riders.push(RiderTrip {
            id: TripId(100 + k as u64),
            origin: o,
            destination: d,
            earliest_departure: alpha,
            latest_arrival: alpha + 2 * baseline.max(1),
            max_trip_time: baseline.max(1),
            acceptance_rate: 0.8,
            baseline_transit_time: baseline,
            match_type: mt,
        });
    }
    let mut drivers = Vec::new();
    for k in 0..n_drivers {
        let mt = match_type(&mut rng);
        let inbound = match mt {
            MatchType::Type1 => true,
            MatchType::Type2 => false,
            MatchType::Either => rng.random_bool(0.5),
        };
        let (o, d) = if inbound {
            (at(outer(&mut rng), near(&mut rng)), at(inner(&mut rng), rng.random_range(0..w)))
        } else {
            (at(inner(&mut rng), rng.random_range(0..w)), at(outer(&mut rng), near(&mut rng)))
        };
        if o == d {
            continue;
        }
        let alpha: Seconds = rng.random_range(0..=600);
        let mut driver = DriverTrip {
            id: TripId(1 + k as u64),
            origin: o,
            destination: d,
            capacity: rng.random_range(1..=cfg.max_capacity.max(1)),
            detour_limit: rng.random_range(300..=900),
            preferred_path: None,
            stop_limit: rng.random_range(1..=3),
            earliest_departure: alpha,
            latest_arrival: 0,
            max_trip_time: 0,
            match_type: mt,
        };
        driver.max_trip_time = driver_max_trip_time(&driver, &net)?;
        driver.latest_arrival = alpha + driver.max_trip_time + rng.random_range(0..=600);
        drivers.push(driver);
    }
    let batch = TripBatch { drivers, riders };
    batch.validate(&net)?;
    Ok((net, batch))
}

/// Served counts of every solver on one suite instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub seed: u64,
    pub drivers: usize,
    pub riders: usize,
    pub edges: usize,
    pub max_edge_size: usize,
    pub optimal: bool,
    pub exact: usize,
    pub impgreedy: usize,
    pub greedy: usize,
    pub anyimp: usize,
    pub bestimp: usize,
    /// ImpGreedy and greedy on the conflict graph cover the same riders.
    pub same_covered_riders: bool,
    /// Revalidation failures, one entry per failing solver.
    pub invalid: Vec<String>,
}

impl InstanceOutcome {
    /// Failed checks of this instance; empty when all hold.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let s = self.seed;
        if !self.optimal {
            out.push(format!("seed {s}: exact solver did not certify optimality"));
        }
        if 2 * self.impgreedy < self.exact {
            out.push(format!("seed {s}: 2 x impgreedy {} < optimum {}", self.impgreedy, self.exact));
        }
        if self.impgreedy != self.greedy || !self.same_covered_riders {
            out.push(format!("seed {s}: impgreedy {} and greedy {} disagree", self.impgreedy, self.greedy));
        }
        for (name, v) in [("anyimp", self.anyimp), ("bestimp", self.bestimp)] {
            if v < self.greedy || v > self.exact {
                out.push(format!("seed {s}: {name} {v} outside [greedy {}, optimum {}]", self.greedy, self.exact));
            }
        }
        out.extend(self.invalid.iter().map(|e| format!("seed {s}: {e}")));
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub instances: Vec<InstanceOutcome>,
}

impl SuiteReport {
    pub fn violations(&self) -> Vec<String> {
        self.instances.iter().flat_map(InstanceOutcome::violations).collect()
    }

    /// Instances whose hypergraph has an edge with two or more riders.
    pub fn nontrivial(&self) -> usize {
        self.instances.iter().filter(|o| o.max_edge_size >= 2).count()
    }
}

/// Builds the unreduced hypergraph of a suite instance.
pub fn suite_hypergraph(net: &TransitNetwork, batch: &TripBatch) -> Result<MatchHypergraph> {
    Ok(build_hypergraph(net, batch, EngineConfig::default())?.0)
}

fn run_instance(seed: u64, cfg: &SmallInstanceConfig) -> Result<InstanceOutcome> {
    let (net, batch) = small_instance(seed, cfg)?;
    let h = suite_hypergraph(&net, &batch)?;
    let exact = exact_solve(&h, None)?;
    let imp = imp_greedy(&h)?;
    let g = to_conflict_graph(&h, DEFAULT_CONFLICT_BUDGET)?;
    let init = greedy_mis(&g);
    let greedy = solution_from_vertices("greedy", &g, &h, &init)?;
    let k = h.max_edge_size().max(1);
    let improve = |rule| -> Result<Solution> {
        let ls = LocalSearchConfig { rule, metric: ImprovementMetric::WeightSquared, max_talons: k + 1, round_limit: None };
        let set = local_search(&g, &init, ls)?.set;
        solution_from_vertices(if rule == ImprovementRule::AnyImp { "anyimp" } else { "bestimp" }, &g, &h, &set)
    };
    let any = improve(ImprovementRule::AnyImp)?;
    let best = improve(ImprovementRule::BestImp)?;
    let checker = Revalidator::new(&net, &batch);
    let invalid = [&exact.solution, &imp, &greedy, &any, &best]
        .iter()
        .filter_map(|s| checker.check_assignment(&s.matches).err().map(|e| format!("{}: {e}", s.solver)))
        .collect();
    let covered = |s: &Solution| -> BTreeSet<TripId> { s.covered_riders() };
    Ok(InstanceOutcome {
        seed,
        drivers: batch.drivers.len(),
        riders: batch.riders.len(),
        edges: h.edges().len(),
        max_edge_size: h.max_edge_size(),
        optimal: exact.optimal,
        exact: exact.solution.objective,
        impgreedy: imp.objective,
        greedy: greedy.objective,
        anyimp: any.objective,
        bestimp: best.objective,
        same_covered_riders: covered(&imp) == covered(&greedy),
        invalid,
    })
}

/// Runs every solver on `instances` seeded instances and records the checks.
pub fn run_oracle_suite(instances: usize, cfg: &SmallInstanceConfig) -> Result<SuiteReport> {
    let instances = (0..instances as u64).into_par_iter().map(|seed| run_instance(seed, cfg)).collect::<Result<_>>()?;
    Ok(SuiteReport { instances })
}
