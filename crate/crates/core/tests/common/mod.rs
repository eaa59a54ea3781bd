//! Brute-force oracles shared by the integration tests. They use only the
//! public network queries and never call into the engine or the solvers.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rideshare_transit::feasibility::{Match, MatchHypergraph, MatchTimes};
use rideshare_transit::network::{
    Location, LocationId, Mode, Multipliers, NetworkDoc, RoadEdge, Station, StationId, TransitLine, TransitNetwork,
    NETWORK_FORMAT_VERSION,
};
use rideshare_transit::packing::ConflictGraph;
use rideshare_transit::trip::{acceptance_threshold, DriverTrip, MatchType, RiderTrip, TripBatch, TripId};
use rideshare_transit::Seconds;

pub type EdgeKey = (TripId, Vec<TripId>, MatchType);

pub fn key(m: &Match) -> EdgeKey {
    (m.driver, m.riders.clone(), m.match_type)
}

fn distinct<T: Ord>(items: impl Iterator<Item = T>) -> usize {
    items.collect::<BTreeSet<_>>().len()
}

fn rider_cap(r: &RiderTrip) -> Seconds {
    r.max_trip_time.min(acceptance_threshold(r))
}

/// Whether `driver` can serve `order` (visiting order) through `station`
/// under the given concrete match type.
pub fn route_feasible(net: &TransitNetwork, view: MatchType, d: &DriverTrip, s: &Station, order: &[&RiderTrip]) -> bool {
    let car = |u, v| net.car_time(u, v).unwrap();
    if order.is_empty() || order.len() > d.capacity as usize {
        return false;
    }
    match view {
        MatchType::Type1 => {
            if distinct(order.iter().map(|r| r.origin)) > d.stop_limit as usize {
                return false;
            }
            let mut offsets = Vec::new();
            let mut pos = d.origin;
            let mut p = 0;
            for r in order {
                p += car(pos, r.origin);
                pos = r.origin;
                offsets.push(p);
            }
            let t_i = p + car(pos, s.location);
            let dep = order.iter().zip(&offsets).map(|(r, o)| r.earliest_departure - o).fold(d.earliest_departure, Seconds::max);
            let t = dep + t_i;
            let on = car(s.location, d.destination);
            if t + on > d.latest_arrival || t_i + on > d.max_trip_time {
                return false;
            }
            order.iter().zip(&offsets).all(|(r, o)| {
                let transit = net.transit_to_location(s.id, r.destination).unwrap();
                t_i - o + transit <= rider_cap(r) && t + transit <= r.latest_arrival
            })
        }
        MatchType::Type2 => {
            if distinct(order.iter().map(|r| r.destination)) > d.stop_limit as usize {
                return false;
            }
            let there = car(d.origin, s.location);
            let access: Vec<Seconds> = order.iter().map(|r| net.transit_from_location(r.origin, s.id).unwrap()).collect();
            let meet = order.iter().zip(&access).map(|(r, a)| r.earliest_departure + a).fold(d.earliest_departure + there, Seconds::max);
            let mut pos = s.location;
            let mut q = 0;
            for (r, a) in order.iter().zip(&access) {
                q += car(pos, r.destination);
                pos = r.destination;
                if a + q > rider_cap(r) || meet + q > r.latest_arrival {
                    return false;
                }
            }
            let rest = q + car(pos, d.destination);
            there + rest <= d.max_trip_time && meet + rest <= d.latest_arrival
        }
        MatchType::Either => unreachable!(),
    }
}

pub fn permutations<T: Copy>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(k);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

/// Every feasible (driver, rider set, type): all subsets, all stations, all
/// visiting orders.
pub fn oracle_edges(net: &TransitNetwork, batch: &TripBatch) -> BTreeSet<EdgeKey> {
    let mut out = BTreeSet::new();
    for d in &batch.drivers {
        for view in [MatchType::Type1, MatchType::Type2] {
            if !d.match_type.accepts(view) {
                continue;
            }
            let mut eligible: Vec<&RiderTrip> = batch.riders.iter().filter(|r| r.match_type.accepts(view)).collect();
            eligible.sort_by_key(|r| r.id);
            for mask in 1u32..(1 << eligible.len()) {
                if mask.count_ones() > d.capacity {
                    continue;
                }
                let set: Vec<&RiderTrip> = (0..eligible.len()).filter(|k| mask & (1 << k) != 0).map(|k| eligible[k]).collect();
                let orders = permutations(&set);
                let ok = net.stations().iter().any(|s| orders.iter().any(|o| route_feasible(net, view, d, s, o)));
                if ok {
                    out.insert((d.id, set.iter().map(|r| r.id).collect(), view));
                }
            }
        }
    }
    out
}

/// Smallest departure in `[α_i, horizon]` that minimizes the simulated
/// arrival at the last pick-up, where the driver waits for riders not yet
/// ready; ties go to the latest such departure.
pub fn sweep_departure(net: &TransitNetwork, d: &DriverTrip, pickups: &[(rideshare_transit::network::LocationId, Seconds)], horizon: Seconds) -> Seconds {
    let mut best: Option<(Seconds, Seconds)> = None;
    for dep in d.earliest_departure..=horizon {
        let mut t = dep;
        let mut pos = d.origin;
        for &(loc, ready) in pickups {
            t += net.car_time(pos, loc).unwrap();
            pos = loc;
            t = t.max(ready);
        }
        if best.is_none_or(|(arr, _)| t <= arr) {
            best = Some((t, dep));
        }
    }
    best.unwrap().1
}

/// Maximum number of riders served by trip-disjoint edges, by dynamic
/// programming over drivers with the set of used riders as state.
pub fn max_served(h: &MatchHypergraph) -> usize {
    let riders: Vec<TripId> = h.riders().to_vec();
    assert!(riders.len() <= 20, "oracle is exponential in riders");
    let bit = |r: &TripId| 1u32 << riders.binary_search(r).unwrap();
    let mut by_driver: BTreeMap<TripId, Vec<(u32, usize)>> = BTreeMap::new();
    for e in h.edges() {
        let mask = e.riders.iter().map(bit).fold(0, |a, b| a | b);
        by_driver.entry(e.driver).or_default().push((mask, e.riders.len()));
    }
    let mut best: BTreeMap<u32, usize> = BTreeMap::from([(0, 0)]);
    for options in by_driver.values() {
        let mut next = best.clone();
        for (&used, &value) in &best {
            for &(mask, w) in options {
                if used & mask == 0 {
                    let v = next.entry(used | mask).or_insert(0);
                    *v = (*v).max(value + w);
                }
            }
        }
        best = next;
    }
    best.values().copied().max().unwrap_or(0)
}

/// Largest independent set inside `candidates`, by plain branching.
pub fn max_independent(g: &ConflictGraph, candidates: &[usize]) -> usize {
    match candidates.split_first() {
        None => 0,
        Some((&v, rest)) => {
            let without = max_independent(g, rest);
            let free: Vec<usize> = rest.iter().copied().filter(|&u| !g.adjacent(u, v)).collect();
            without.max(1 + max_independent(g, &free))
        }
    }
}

/// Bare edge for solver tests; route data is irrelevant there.
pub fn edge(driver: u64, riders: &[u64]) -> Match {
    let mut riders: Vec<TripId> = riders.iter().map(|&r| TripId(r)).collect();
    riders.sort_unstable();
    Match {
        driver: TripId(driver),
        order: riders.clone(),
        times: MatchTimes { departure: 0, at_station: 0, driver: 0, riders: vec![[0, 0]; riders.len()] },
        riders,
        match_type: MatchType::Type1,
        station: StationId(0),
        route: Vec::new(),
    }
}

/// Rider origins 0 and 5, driver origin 1, train stations A (2) and B (3),
/// destination 4.
pub fn toy_network() -> TransitNetwork {
    let locations = (0..6).map(|k| Location { id: LocationId(k), coords: [k as f64, 0.0], area: None }).collect();
    let mut road_edges = Vec::new();
    for (a, b, s) in [(0, 1, 60), (1, 2, 440), (0, 2, 500), (2, 3, 1000), (3, 4, 100), (5, 1, 60), (5, 0, 60)] {
        road_edges.push(RoadEdge { from: LocationId(a), to: LocationId(b), seconds: s });
        road_edges.push(RoadEdge { from: LocationId(b), to: LocationId(a), seconds: s });
    }
    let stations = vec![
        Station { id: StationId(0), location: LocationId(2), mode: Mode::Train, name: "A".into() },
        Station { id: StationId(1), location: LocationId(3), mode: Mode::Train, name: "B".into() },
    ];
    TransitNetwork::new(NetworkDoc {
        version: NETWORK_FORMAT_VERSION,
        locations,
        stations,
        road_edges,
        transit_lines: vec![TransitLine {
            name: "line".into(),
            mode: Mode::Train,
            stations: vec![StationId(0), StationId(1)],
        }],
        multipliers: Multipliers::default(),
        areas: Vec::new(),
    })
    .unwrap()
}

pub fn toy_rider(net: &TransitNetwork, id: u64, origin: u32, alpha: i64) -> RiderTrip {
    let baseline = net.best_transit_route_time(LocationId(origin), LocationId(4)).unwrap();
    RiderTrip {
        id: TripId(id),
        origin: LocationId(origin),
        destination: LocationId(4),
        earliest_departure: alpha,
        latest_arrival: alpha + 10_000,
        max_trip_time: baseline,
        acceptance_rate: 0.8,
        baseline_transit_time: baseline,
        match_type: MatchType::Type1,
    }
}

pub fn toy_driver(id: u64, capacity: u32, stops: u32) -> DriverTrip {
    DriverTrip {
        id: TripId(id),
        origin: LocationId(1),
        destination: LocationId(4),
        capacity,
        detour_limit: 300,
        preferred_path: None,
        stop_limit: stops,
        earliest_departure: 0,
        latest_arrival: 10_000,
        max_trip_time: 1540 + 300,
        match_type: MatchType::Type1,
    }
}

/// Door-to-door time of each rider of `m` in visiting order, recomputed from
/// road and transit queries along the stored order and station.
pub fn rider_times_from_queries(net: &TransitNetwork, batch: &TripBatch, m: &Match) -> Vec<(TripId, Seconds)> {
    let rider = |id: TripId| batch.riders.iter().find(|r| r.id == id).unwrap();
    let car = |u, v| net.car_time(u, v).unwrap();
    let s = net.station(m.station).unwrap().location;
    let order: Vec<&RiderTrip> = m.order.iter().map(|&id| rider(id)).collect();
    match m.match_type {
        MatchType::Type1 => (0..order.len())
            .map(|k| {
                let mut ride = 0;
                let mut pos = order[k].origin;
                for r in &order[k + 1..] {
                    ride += car(pos, r.origin);
                    pos = r.origin;
                }
                ride += car(pos, s);
                (order[k].id, ride + net.transit_to_location(m.station, order[k].destination).unwrap())
            })
            .collect(),
        _ => {
            let mut pos = s;
            let mut q = 0;
            order
                .iter()
                .map(|r| {
                    q += car(pos, r.destination);
                    pos = r.destination;
                    (r.id, net.transit_from_location(r.origin, m.station).unwrap() + q)
                })
                .collect()
        }
    }
}
