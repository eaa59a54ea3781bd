mod common;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{key, oracle_edges, sweep_departure, toy_driver, toy_network, toy_rider};
use rideshare_transit::feasibility::{
    build_hypergraph, driver_station_tuples, latest_departure, latest_departure_from_offsets, rider_station_tuples,
    EngineConfig, MatchEngine, ReductionConfig, Revalidator, StationTimeTuple,
};
use rideshare_transit::harness::{small_instance, SmallInstanceConfig};
use rideshare_transit::network::{LocationId, StationId, TransitNetwork};
use rideshare_transit::trip::{acceptance_threshold, DriverTrip, MatchType, RiderTrip, TripBatch, TripId};

#[test]
fn toy_network_has_the_expected_times() {
    let net = toy_network();
    assert_eq!(net.car_time(LocationId(0), LocationId(2)).unwrap(), 500);
    assert_eq!(net.car_time(LocationId(1), LocationId(4)).unwrap(), 1540);
    // bus access 2 x 500, train 1.15 x 1000, bus egress 2 x 100
    assert_eq!(net.best_transit_route_time(LocationId(0), LocationId(4)).unwrap(), 2350);
    assert_eq!(net.transit_to_location(StationId(0), LocationId(4)).unwrap(), 1350);
}

#[test]
fn rider_tuples_on_toy_network() {
    let net = toy_network();
    let r = toy_rider(&net, 10, 0, 100);
    assert_eq!(acceptance_threshold(&r), 1880);
    let tuples = rider_station_tuples(&r, &net, MatchType::Type1);
    assert_eq!(
        tuples,
        vec![
            StationTimeTuple { station: StationId(0), earliest_arrival: 600 },
            StationTimeTuple { station: StationId(1), earliest_arrival: 1600 },
        ]
    );
    let strict = RiderTrip { acceptance_rate: 0.5, ..r };
    assert!(rider_station_tuples(&strict, &net, MatchType::Type1).is_empty());
}

#[test]
fn driver_tuples_exclude_stations_off_a_zero_detour_path() {
    let net = toy_network();
    let d = toy_driver(1, 1, 1);
    assert_eq!(driver_station_tuples(&d, &net).len(), 2);
    // with no detour allowance only stations on the fastest path remain
    let tight = DriverTrip { origin: LocationId(0), detour_limit: 0, max_trip_time: 1600, ..d.clone() };
    let tuples = driver_station_tuples(&tight, &net);
    assert_eq!(tuples.iter().map(|t| t.station).collect::<Vec<_>>(), vec![StationId(0), StationId(1)]);
    let off = DriverTrip { destination: LocationId(5), detour_limit: 0, max_trip_time: 60, ..d };
    assert!(driver_station_tuples(&off, &net).is_empty());
}

#[test]
fn single_rider_match_on_toy_network() {
    let net = toy_network();
    let batch = TripBatch { drivers: vec![toy_driver(1, 2, 2)], riders: vec![toy_rider(&net, 10, 0, 100)] };
    let engine = MatchEngine::new(&net, &batch, EngineConfig::default()).unwrap();
    let (base, _) = engine.single_passenger_matches().unwrap();
    assert_eq!(base.edges().len(), 1);
    let m = &base.edges()[0];
    // first station by earliest arrival is A; departure max(0, 100 - 60)
    assert_eq!(m.station, StationId(0));
    assert_eq!(m.route, vec![LocationId(1), LocationId(0), LocationId(2)]);
    assert_eq!(m.times.departure, 40);
    assert_eq!(m.times.at_station, 40 + 560);
    assert_eq!(m.times.driver, 560 + 1100);
    assert_eq!(m.times.riders, vec![[500, 1350]]);
}

#[test]
fn collocated_rider_is_inserted_at_no_cost() {
    let net = toy_network();
    let batch = TripBatch {
        drivers: vec![toy_driver(1, 2, 1)],
        riders: vec![toy_rider(&net, 10, 0, 0), toy_rider(&net, 11, 0, 0)],
    };
    let engine = MatchEngine::new(&net, &batch, EngineConfig::default()).unwrap();
    let (base, _) = engine.single_passenger_matches().unwrap();
    let single = base.edges().iter().find(|m| m.riders == [TripId(10)]).unwrap();
    let pair = engine.feasible_insert(single, TripId(11)).unwrap();
    assert_eq!(pair.riders, vec![TripId(10), TripId(11)]);
    assert_eq!(pair.station, single.station);
    assert_eq!(pair.times.at_station, single.times.at_station);
    Revalidator::new(&net, &batch).check_match(&pair).unwrap();
}

#[test]
fn stop_limit_removes_pair_with_two_pickup_points() {
    let net = toy_network();
    let riders = vec![toy_rider(&net, 10, 0, 0), toy_rider(&net, 11, 5, 0)];
    let sets = |stops| {
        let batch = TripBatch { drivers: vec![toy_driver(1, 2, stops)], riders: riders.clone() };
        let (h, _) = build_hypergraph(&net, &batch, EngineConfig::default()).unwrap();
        h.edges().iter().map(|m| m.riders.clone()).collect::<Vec<_>>()
    };
    assert_eq!(sets(2), vec![vec![TripId(10)], vec![TripId(10), TripId(11)], vec![TripId(11)]]);
    assert_eq!(sets(1), vec![vec![TripId(10)], vec![TripId(11)]]);
}

#[test]
fn unit_capacity_leaves_only_base_matches() {
    let net = toy_network();
    let batch = TripBatch {
        drivers: vec![toy_driver(1, 1, 2), toy_driver(2, 1, 2)],
        riders: vec![toy_rider(&net, 10, 0, 0), toy_rider(&net, 11, 0, 0)],
    };
    let engine = MatchEngine::new(&net, &batch, EngineConfig::default()).unwrap();
    let (base, _) = engine.single_passenger_matches().unwrap();
    let (all, _) = engine.enumerate_matches(&base).unwrap();
    assert_eq!(base.edges(), all.edges());
}

#[test]
fn rider_cap_of_one_keeps_one_base_match() {
    let net = toy_network();
    let batch = TripBatch {
        drivers: vec![toy_driver(1, 1, 1), toy_driver(2, 1, 1), toy_driver(3, 1, 1)],
        riders: vec![toy_rider(&net, 10, 0, 0)],
    };
    let open = EngineConfig::default();
    let (base, _) = MatchEngine::new(&net, &batch, open).unwrap().single_passenger_matches().unwrap();
    assert_eq!(base.edges().len(), 3);
    let capped = EngineConfig { reduction: ReductionConfig::new(100.0, usize::MAX, 1).unwrap(), ..open };
    let (base, _) = MatchEngine::new(&net, &batch, capped).unwrap().single_passenger_matches().unwrap();
    assert_eq!(base.edges().len(), 1);
    assert_eq!(base.edges()[0].driver, TripId(1));
}

#[test]
fn latest_departure_examples() {
    assert_eq!(latest_departure_from_offsets(0, [(10, 4)]), 6);
    assert_eq!(latest_departure_from_offsets(20, [(10, 4)]), 20);
    let net = toy_network();
    let d = toy_driver(1, 2, 2);
    let one = latest_departure(&net, &d, &[(LocationId(0), 300)]).unwrap();
    assert_eq!(one, (300 - 60).max(d.earliest_departure));
}

fn random_net(seed: u64) -> TransitNetwork {
    small_instance(seed, &SmallInstanceConfig::default()).unwrap().0
}

#[test]
fn latest_departure_matches_departure_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cases = 0;
    for seed in 0..25 {
        let net = random_net(seed);
        let n = net.locations().len() as u32;
        for _ in 0..24 {
            let alpha = rng.random_range(0..600);
            let d = DriverTrip {
                id: TripId(1),
                origin: LocationId(rng.random_range(0..n)),
                destination: LocationId(rng.random_range(0..n)),
                capacity: 3,
                detour_limit: 0,
                preferred_path: None,
                stop_limit: 3,
                earliest_departure: alpha,
                latest_arrival: alpha + 4000,
                max_trip_time: 0,
                match_type: MatchType::Type1,
            };
            let k = rng.random_range(1..=3);
            let pickups: Vec<(LocationId, i64)> =
                (0..k).map(|_| (LocationId(rng.random_range(0..n)), rng.random_range(0..1500))).collect();
            let expected = sweep_departure(&net, &d, &pickups, d.latest_arrival);
            assert_eq!(latest_departure(&net, &d, &pickups).unwrap(), expected, "seed {seed} case {pickups:?}");
            cases += 1;
        }
    }
    assert!(cases >= 500);
}

fn scan_rider(net: &TransitNetwork, r: &RiderTrip, view: MatchType) -> Vec<StationTimeTuple> {
    let limit = (r.acceptance_rate * r.baseline_transit_time as f64 + 1e-9).floor() as i64;
    let mut out = Vec::new();
    for s in net.stations() {
        let (first, second) = match view {
            MatchType::Type1 => {
                (net.car_time(r.origin, s.location).unwrap(), net.transit_to_location(s.id, r.destination).unwrap())
            }
            _ => (net.transit_from_location(r.origin, s.id).unwrap(), net.car_time(s.location, r.destination).unwrap()),
        };
        let arrival = r.earliest_departure + first;
        if arrival + second <= r.latest_arrival && first + second <= r.max_trip_time && first + second <= limit {
            out.push(StationTimeTuple { station: s.id, earliest_arrival: arrival });
        }
    }
    out
}

#[test]
fn station_tuples_match_exhaustive_scan() {
    for seed in 0..40 {
        let (net, batch) = small_instance(seed, &SmallInstanceConfig::default()).unwrap();
        for r in &batch.riders {
            for view in [MatchType::Type1, MatchType::Type2] {
                assert_eq!(rider_station_tuples(r, &net, view), scan_rider(&net, r, view), "seed {seed} rider {:?}", r.id);
            }
        }
        for d in &batch.drivers {
            let scan: Vec<StationTimeTuple> = net
                .stations()
                .iter()
                .filter_map(|s| {
                    let there = net.car_time(d.origin, s.location).unwrap();
                    let on = net.car_time(s.location, d.destination).unwrap();
                    let arrival = d.earliest_departure + there;
                    (arrival + on <= d.latest_arrival && there + on <= d.max_trip_time)
                        .then_some(StationTimeTuple { station: s.id, earliest_arrival: arrival })
                })
                .collect();
            assert_eq!(driver_station_tuples(d, &net), scan);
        }
    }
}

fn one_driver_instances() -> impl Iterator<Item = (u64, TransitNetwork, TripBatch)> {
    let cfg = SmallInstanceConfig { max_drivers: 1, max_riders: 4, max_capacity: 3, ..SmallInstanceConfig::default() };
    (0..).map(move |seed| {
        let (net, batch) = small_instance(seed, &cfg).unwrap();
        (seed, net, batch)
    })
}

#[test]
fn enumeration_equals_subset_and_permutation_oracle() {
    let mut multi = 0;
    for (seed, net, batch) in one_driver_instances().take(120) {
        let (h, _) = build_hypergraph(&net, &batch, EngineConfig::default()).unwrap();
        let got: BTreeSet<_> = h.edges().iter().map(key).collect();
        assert_eq!(got, oracle_edges(&net, &batch), "seed {seed}");
        multi += usize::from(h.max_edge_size() >= 2);
    }
    assert!(multi >= 10, "too few instances with shared rides: {multi}");
}

#[test]
fn full_instances_match_oracle_and_edge_bound() {
    for seed in 0..30 {
        let (net, batch) = small_instance(seed, &SmallInstanceConfig { max_riders: 7, ..Default::default() }).unwrap();
        let (h, _) = build_hypergraph(&net, &batch, EngineConfig::default()).unwrap();
        let got: BTreeSet<_> = h.edges().iter().map(key).collect();
        assert_eq!(got, oracle_edges(&net, &batch), "seed {seed}");
        let k = batch.drivers.iter().map(|d| d.capacity).max().unwrap_or(0);
        // Either-type trips contribute one edge per type
        let bound = 2 * batch.drivers.len() * (batch.riders.len() + 1).pow(k);
        assert!(h.edges().len() <= bound);
    }
}

#[test]
fn stored_routes_revalidate_and_are_downward_closed() {
    for seed in 0..60 {
        let (net, batch) = small_instance(seed, &SmallInstanceConfig::default()).unwrap();
        let (h, _) = build_hypergraph(&net, &batch, EngineConfig::default()).unwrap();
        let check = Revalidator::new(&net, &batch);
        let keys: BTreeSet<_> = h.edges().iter().map(key).collect();
        for m in h.edges() {
            check.check_match(m).unwrap();
            if m.size() >= 2 {
                for k in 0..m.size() {
                    let mut sub = m.riders.clone();
                    sub.remove(k);
                    assert!(keys.contains(&(m.driver, sub, m.match_type)));
                }
            }
        }
    }
}

#[test]
fn feasible_insert_agrees_with_permutation_oracle() {
    for (seed, net, batch) in one_driver_instances().take(80) {
        let engine = MatchEngine::new(&net, &batch, EngineConfig::default()).unwrap();
        let (h, _) = engine.build().unwrap();
        let oracle = oracle_edges(&net, &batch);
        for m in h.edges() {
            for r in &batch.riders {
                if m.riders.contains(&r.id) || !r.match_type.accepts(m.match_type) {
                    continue;
                }
                let mut set = m.riders.clone();
                set.push(r.id);
                set.sort();
                let expect = oracle.contains(&(m.driver, set.clone(), m.match_type));
                let got = engine.feasible_insert(m, r.id);
                assert_eq!(got.is_some(), expect, "seed {seed} insert {:?} into {:?}", r.id, m.riders);
                if let Some(g) = got {
                    assert_eq!(g.riders, set);
                    Revalidator::new(&net, &batch).check_match(&g).unwrap();
                }
            }
        }
    }
}

#[test]
fn reduction_caps_hold_on_a_generated_interval() {
    use rideshare_transit::generator::{GeneratorConfig, WorkloadGenerator};
    use rideshare_transit::network::{generate_network, NetworkGenConfig};
    let net = generate_network(&NetworkGenConfig::default(), 1).unwrap();
    let gen = WorkloadGenerator::new(&net, GeneratorConfig { trip_scale: 0.5, ..GeneratorConfig::default() }).unwrap();
    let batch = gen.generate_interval(8).unwrap();
    let open = EngineConfig::default();
    let (full_base, _) = MatchEngine::new(&net, &batch, open).unwrap().single_passenger_matches().unwrap();
    let reduction = ReductionConfig::new(30.0, 40, 5).unwrap();
    let cfg = EngineConfig { reduction, ..open };
    let engine = MatchEngine::new(&net, &batch, cfg).unwrap();
    let (base, _) = engine.single_passenger_matches().unwrap();
    let (all, _) = engine.enumerate_matches(&base).unwrap();
    let count = |edges: &[rideshare_transit::feasibility::Match], f: &dyn Fn(&rideshare_transit::feasibility::Match) -> TripId| {
        let mut c: BTreeMap<TripId, usize> = BTreeMap::new();
        for m in edges {
            *c.entry(f(m)).or_default() += 1;
        }
        c
    };
    let before = count(full_base.edges(), &|m| m.driver);
    for (d, n) in count(base.edges(), &|m| m.driver) {
        assert!(n <= reduction.keep_count(before[&d]));
    }
    assert!(count(base.edges(), &|m| m.riders[0]).values().all(|&n| n <= 5));
    assert!(count(all.edges(), &|m| m.driver).values().all(|&n| n <= 40));
    assert!(base.edges().len() < full_base.edges().len());
}
