//! Independent constraint checker: replays each stored route against raw
//! network queries, letting the driver wait where a rider is not yet there.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::network::{LocationId, TransitNetwork};
use crate::trip::{driver_max_trip_time, DriverTrip, MatchType, RiderTrip, TripBatch, TripId};
use crate::Seconds;

use super::hypergraph::Match;

pub struct Revalidator<'a> {
    net: &'a TransitNetwork,
    drivers: HashMap<TripId, &'a DriverTrip>,
    riders: HashMap<TripId, &'a RiderTrip>,
}

impl<'a> Revalidator<'a> {
    pub fn new(net: &'a TransitNetwork, batch: &'a TripBatch) -> Self {
        Self {
            net,
            drivers: batch.drivers.iter().map(|d| (d.id, d)).collect(),
            riders: batch.riders.iter().map(|r| (r.id, r)).collect(),
        }
    }

    /// Checks a set of matches that must be trip-disjoint.
    pub fn check_assignment<'m>(&self, matches: impl IntoIterator<Item = &'m Match>) -> Result<()> {
        let mut used = HashSet::new();
        for m in matches {
            for t in m.trips() {
                if !used.insert(t) {
                    return Err(Error::NotDisjoint(t));
                }
            }
            self.check_match(m)?;
        }
        Ok(())
    }

    /// Replays one match and checks capacity, travel time, stop and
    /// acceptance constraints plus agreement with the stored times.
    pub fn check_match(&self, m: &Match) -> Result<()> {
        let fail = |reason: String| Err(Error::Violation { driver: m.driver, reason });
        let net = self.net;
        let Some(&d) = self.drivers.get(&m.driver) else {
            return fail("unknown driver".into());
        };
        if m.match_type == MatchType::Either || !d.match_type.accepts(m.match_type) {
            return fail(format!("driver does not accept {:?}", m.match_type));
        }
        if m.riders.is_empty() || m.riders.windows(2).any(|w| w[0] >= w[1]) {
            return fail("rider list must be nonempty and strictly ascending".into());
        }
        let mut sorted = m.order.clone();
        sorted.sort_unstable();
        if sorted != m.riders {
            return fail("visit order is not a permutation of the riders".into());
        }
        if m.riders.len() > d.capacity as usize {
            return fail(format!("{} riders exceed capacity {}", m.riders.len(), d.capacity));
        }
        if m.times.riders.len() != m.riders.len() {
            return fail("rider times do not match the rider list".into());
        }
        let mut order = Vec::with_capacity(m.order.len());
        for id in &m.order {
            let Some(&r) = self.riders.get(id) else {
                return fail(format!("unknown rider {}", id.0));
            };
            if !r.match_type.accepts(m.match_type) {
                return fail(format!("rider {} does not accept {:?}", id.0, m.match_type));
            }
            order.push(r);
        }
        let sloc = net.station(m.station)?.location;

        let stops: Vec<LocationId> = match m.match_type {
            MatchType::Type1 => order.iter().map(|r| r.origin).collect(),
            _ => order.iter().map(|r| r.destination).collect(),
        };
        let expected_route: Vec<LocationId> = match m.match_type {
            MatchType::Type1 => [d.origin].into_iter().chain(stops.iter().copied()).chain([sloc]).collect(),
            _ => [sloc].into_iter().chain(stops.iter().copied()).chain([d.destination]).collect(),
        };
        if expected_route != m.route {
            return fail("stored route does not follow the visit order".into());
        }
        let distinct: HashSet<_> = stops.iter().collect();
        if distinct.len() > d.stop_limit as usize {
            return fail(format!("{} stops exceed the limit {}", distinct.len(), d.stop_limit));
        }

        let departure = m.times.departure;
        if departure < d.earliest_departure {
            return fail("driver leaves before their earliest departure".into());
        }
        // (rider, [first leg, second leg], arrival at destination)
        let mut outcomes: Vec<(&RiderTrip, [Seconds; 2], Seconds)> = Vec::new();
        let (at_station, arrival) = match m.match_type {
            MatchType::Type1 => {
                let mut clock = departure;
                let mut pos = d.origin;
                let mut pickups = Vec::new();
                for r in &order {
                    clock += net.car_time(pos, r.origin)?;
                    pos = r.origin;
                    clock = clock.max(r.earliest_departure);
                    pickups.push(clock);
                }
                clock += net.car_time(pos, sloc)?;
                for (r, p) in order.iter().zip(pickups) {
                    let transit = net.transit_to_location(m.station, r.destination)?;
                    outcomes.push((r, [clock - p, transit], clock + transit));
                }
                (clock, clock + net.car_time(sloc, d.destination)?)
            }
            _ => {
                let mut pickup = departure + net.car_time(d.origin, sloc)?;
                let mut access = Vec::new();
                for r in &order {
                    let a = net.transit_from_location(r.origin, m.station)?;
                    pickup = pickup.max(r.earliest_departure + a);
                    access.push(a);
                }
                let mut clock = pickup;
                let mut pos = sloc;
                for (r, a) in order.iter().zip(access) {
                    clock += net.car_time(pos, r.destination)?;
                    pos = r.destination;
                    outcomes.push((r, [a, clock - pickup], clock));
                }
                (pickup, clock + net.car_time(pos, d.destination)?)
            }
        };
        if at_station != m.times.at_station {
            return fail(format!("station time {} differs from stored {}", at_station, m.times.at_station));
        }
        let duration = arrival - departure;
        if duration != m.times.driver {
            return fail(format!("driver time {} differs from stored {}", duration, m.times.driver));
        }
        if arrival > d.latest_arrival {
            return fail(format!("driver arrives at {} after {}", arrival, d.latest_arrival));
        }
        let limit = driver_max_trip_time(d, net)?;
        if duration > limit {
            return fail(format!("driver time {duration} exceeds {limit}"));
        }

        for (r, legs, arrive) in outcomes {
            let k = m.riders.binary_search(&r.id).expect("rider list checked above");
            if legs != m.times.riders[k] {
                return fail(format!("rider {} legs {:?} differ from stored {:?}", r.id.0, legs, m.times.riders[k]));
            }
            let total = legs[0] + legs[1];
            if arrive > r.latest_arrival {
                return fail(format!("rider {} arrives at {} after {}", r.id.0, arrive, r.latest_arrival));
            }
            if total > r.max_trip_time {
                return fail(format!("rider {} time {} exceeds {}", r.id.0, total, r.max_trip_time));
            }
            let baseline = net.best_transit_route_time(r.origin, r.destination)?;
            if baseline != r.baseline_transit_time {
                return fail(format!("rider {} baseline {} differs from network {}", r.id.0, r.baseline_transit_time, baseline));
            }
            let bound = r.acceptance_rate * baseline as f64;
            if total as f64 > bound + 1e-9 * bound.max(1.0) {
                return fail(format!("rider {} time {} exceeds acceptance bound {:.3}", r.id.0, total, bound));
            }
        }
        Ok(())
    }
}
