//! Feasible matches between drivers and groups of riders.
//!
//! Each trip first gets its time-feasible stations. Single-rider matches are
//! then found per driver–rider pair and thinned by a [`ReductionConfig`];
//! larger groups grow from smaller feasible ones, one rider at a time, only
//! when every one-smaller subgroup is feasible.

mod hypergraph;
mod reduce;
mod revalidate;
mod route;
mod tuples;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::TransitNetwork;
use crate::trip::{MatchType, RiderTrip, TripBatch, TripId};

pub use hypergraph::{Match, MatchHypergraph, MatchTimes};
pub use reduce::ReductionConfig;
pub use revalidate::Revalidator;
pub use route::{latest_departure, latest_departure_from_offsets};
pub use tuples::{driver_station_tuples, rider_station_tuples, StationTimeTuple};

use route::{build_match, evaluate, search_order, DriverCtx, RiderCtx};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub reduction: ReductionConfig,
    /// Scan every common station for a single-rider match and keep the one
    /// with the shortest rider time, instead of stopping at the first.
    pub best_station: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { reduction: ReductionConfig::unreduced(), best_station: false }
    }
}

/// Counters of one enumeration run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationStats {
    /// Single-rider matches before reduction.
    pub base_found: usize,
    /// Single-rider matches after reduction.
    pub base_kept: usize,
    /// Multi-rider candidates passed to the insertion test.
    pub candidates_tested: usize,
    /// Candidates tested twice for the same driver (tracked in debug builds
    /// only; always zero otherwise).
    pub duplicate_candidates: usize,
    pub edges: usize,
}

impl std::ops::AddAssign for EnumerationStats {
    fn add_assign(&mut self, o: Self) {
        self.base_found += o.base_found;
        self.base_kept += o.base_kept;
        self.candidates_tested += o.candidates_tested;
        self.duplicate_candidates += o.duplicate_candidates;
        self.edges += o.edges;
    }
}

/// Precomputed station tuples for one trip batch.
pub struct MatchEngine<'a> {
    net: &'a TransitNetwork,
    config: EngineConfig,
    drivers: Vec<DriverCtx<'a>>,
    riders: Vec<RiderCtx<'a>>,
    driver_pos: HashMap<TripId, usize>,
    rider_pos: HashMap<TripId, usize>,
    rider_trips: BTreeMap<TripId, &'a RiderTrip>,
}

impl<'a> MatchEngine<'a> {
    /// Validates the batch and computes every trip's station tuples.
    pub fn new(net: &'a TransitNetwork, batch: &'a TripBatch, config: EngineConfig) -> Result<Self> {
        config.reduction.validate()?;
        batch.validate(net)?;
        let mut drivers: Vec<DriverCtx> = batch.drivers.par_iter().map(|d| DriverCtx::new(d, net)).collect();
        drivers.sort_by_key(|d| d.trip.id);
        let mut riders: Vec<RiderCtx> = batch.riders.par_iter().map(|r| RiderCtx::new(r, net)).collect();
        riders.sort_by_key(|r| r.trip.id);
        Ok(Self {
            net,
            config,
            driver_pos: drivers.iter().enumerate().map(|(k, d)| (d.trip.id, k)).collect(),
            rider_pos: riders.iter().enumerate().map(|(k, r)| (r.trip.id, k)).collect(),
            rider_trips: riders.iter().map(|r| (r.trip.id, r.trip)).collect(),
            drivers,
            riders,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    fn base_for_driver(&self, d: &DriverCtx) -> Vec<Match> {
        let mut out = Vec::new();
        if d.stations.is_empty() || d.trip.capacity == 0 {
            return out;
        }
        for r in &self.riders {
            for &view in d.trip.match_type.views() {
                if !r.trip.match_type.accepts(view) {
                    continue;
                }
                let common = r.stations(view);
                if common.is_empty() {
                    continue;
                }
                let mut best: Option<Match> = None;
                for ds in d.stations.iter().filter(|ds| common.contains(ds.station)) {
                    let Some(t) = evaluate(self.net, view, d, ds, &[r]) else { continue };
                    let m = build_match(view, d, ds, &[r], t);
                    if !self.config.best_station {
                        best = Some(m);
                        break;
                    }
                    let key = |m: &Match| (m.times.riders[0][0] + m.times.riders[0][1], m.times.driver);
                    if best.as_ref().is_none_or(|b| key(&m) < key(b)) {
                        best = Some(m);
                    }
                }
                out.extend(best);
            }
        }
        out
    }

    /// All single-rider matches, reduced by the configured caps.
    pub fn single_passenger_matches(&self) -> Result<(MatchHypergraph, EnumerationStats)> {
        let found: Vec<Vec<Match>> = self.drivers.par_iter().map(|d| self.base_for_driver(d)).collect();
        let base_found = found.iter().map(Vec::len).sum();
        let kept: Vec<Match> =
            reduce::reduce_base(found, &self.rider_trips, &self.config.reduction).into_iter().flatten().collect();
        let stats = EnumerationStats { base_found, base_kept: kept.len(), edges: kept.len(), ..Default::default() };
        Ok((MatchHypergraph::new(kept)?, stats))
    }

    /// Grows the single-rider matches of `base` into every feasible group, up
    /// to each driver's capacity and the per-driver match cap.
    pub fn enumerate_matches(&self, base: &MatchHypergraph) -> Result<(MatchHypergraph, EnumerationStats)> {
        let mut groups: BTreeMap<TripId, Vec<&Match>> = BTreeMap::new();
        for e in base.edges() {
            if e.size() != 1 {
                return Err(Error::InvalidReduction(format!("driver {} has a multi-rider base match", e.driver.0)));
            }
            groups.entry(e.driver).or_default().push(e);
        }
        let groups: Vec<(TripId, Vec<&Match>)> = groups.into_iter().collect();
        let results: Vec<Result<(Vec<Match>, EnumerationStats)>> = groups
            .par_iter()
            .map(|(id, ms)| {
                let &k = self.driver_pos.get(id).ok_or_else(|| Error::Violation {
                    driver: *id,
                    reason: "base match of a driver outside the batch".into(),
                })?;
                Ok(self.extend_driver(&self.drivers[k], ms))
            })
            .collect();
        let mut edges = Vec::new();
        let mut stats = EnumerationStats::default();
        for r in results {
            let (ms, s) = r?;
            edges.extend(ms);
            stats += s;
        }
        stats.edges = edges.len();
        Ok((MatchHypergraph::new(edges)?, stats))
    }

    /// Single-rider matches, reduction, then group enumeration.
    pub fn build(&self) -> Result<(MatchHypergraph, EnumerationStats)> {
        let (base, s1) = self.single_passenger_matches()?;
        let (all, s2) = self.enumerate_matches(&base)?;
        Ok((all, EnumerationStats { base_found: s1.base_found, base_kept: s1.base_kept, ..s2 }))
    }

    fn extend_driver(&self, d: &DriverCtx, base: &[&Match]) -> (Vec<Match>, EnumerationStats) {
        let cap = self.config.reduction.driver_match_cap;
        let mut out: Vec<Match> = base.iter().take(cap).map(|&m| m.clone()).collect();
        let mut stats = EnumerationStats::default();
        let views = d.trip.match_type.views();
        // level p − 1 per view, keyed by ascending rider set
        let mut levels: Vec<BTreeMap<Vec<TripId>, Match>> = views
            .iter()
            .map(|&v| out.iter().filter(|m| m.match_type == v).map(|m| (m.riders.clone(), m.clone())).collect())
            .collect();
        let singles: Vec<Vec<TripId>> = levels.iter().map(|l| l.keys().map(|k| k[0]).collect()).collect();
        #[cfg(debug_assertions)]
        let mut tested = std::collections::HashSet::new();

        'grow: for _p in 2..=d.trip.capacity as usize {
            for (v, &view) in views.iter().enumerate() {
                let mut next = BTreeMap::new();
                for (set, m) in &levels[v] {
                    if out.len() >= cap {
                        break 'grow;
                    }
                    let last = *set.last().expect("matches have riders");
                    for &j in singles[v].iter().filter(|&&j| j > last) {
                        let mut cand = set.clone();
                        cand.push(j);
                        let closed = (0..set.len()).all(|q| {
                            let mut sub = cand.clone();
                            sub.remove(q);
                            levels[v].contains_key(&sub)
                        });
                        if !closed {
                            continue;
                        }
                        stats.candidates_tested += 1;
                        #[cfg(debug_assertions)]
                        if !tested.insert((view, cand.clone())) {
                            stats.duplicate_candidates += 1;
                        }
                        if let Some(m2) = self.insert_rider(d, view, m, &self.riders[self.rider_pos[&j]]) {
                            out.push(m2.clone());
                            next.insert(cand, m2);
                            if out.len() >= cap {
                                break 'grow;
                            }
                        }
                    }
                }
                levels[v] = next;
            }
            if levels.iter().all(BTreeMap::is_empty) {
                break;
            }
        }
        (out, stats)
    }

    fn insert_rider(&self, d: &DriverCtx, view: MatchType, m: &Match, j: &RiderCtx) -> Option<Match> {
        let current: Vec<&RiderCtx> = m.order.iter().map(|id| &self.riders[self.rider_pos[id]]).collect();
        for ds in &d.stations {
            if !j.stations(view).contains(ds.station) || !current.iter().all(|r| r.stations(view).contains(ds.station))
            {
                continue;
            }
            // extend the stored order first
            for pos in 0..=current.len() {
                let mut order = current.clone();
                order.insert(pos, j);
                if let Some(t) = evaluate(self.net, view, d, ds, &order) {
                    return Some(build_match(view, d, ds, &order, t));
                }
            }
            let mut all = current.clone();
            all.push(j);
            if let Some(idx) = search_order(self.net, view, d, ds, &all) {
                let order: Vec<&RiderCtx> = idx.iter().map(|&k| all[k]).collect();
                let t = evaluate(self.net, view, d, ds, &order).expect("search agrees with evaluation");
                return Some(build_match(view, d, ds, &order, t));
            }
        }
        None
    }

    /// Tries to add `rider` to the feasible match `m`, keeping its driver and
    /// type. Returns the first feasible route over the common stations.
    pub fn feasible_insert(&self, m: &Match, rider: TripId) -> Option<Match> {
        let d = &self.drivers[*self.driver_pos.get(&m.driver)?];
        let j = &self.riders[*self.rider_pos.get(&rider)?];
        if m.riders.contains(&rider)
            || m.size() >= d.trip.capacity as usize
            || !j.trip.match_type.accepts(m.match_type)
            || !m.order.iter().all(|id| self.rider_pos.contains_key(id))
        {
            return None;
        }
        self.insert_rider(d, m.match_type, m, j)
    }
}

/// Builds the full match hypergraph of one batch.
pub fn build_hypergraph(
    net: &TransitNetwork,
    batch: &TripBatch,
    config: EngineConfig,
) -> Result<(MatchHypergraph, EnumerationStats)> {
    MatchEngine::new(net, batch, config)?.build()
}
