//! Route timing for a fixed driver, station and rider order, and the exact
//! search over orders.

use crate::error::Result;
use crate::network::{LocationId, StationId, TransitNetwork};
use crate::trip::{DriverTrip, MatchType, RiderTrip};
use crate::Seconds;

use super::hypergraph::{Match, MatchTimes};
use super::tuples::{driver_station_tuples, rider_limit, rider_station_tuples, StationSet};

/// Latest departure of a driver from `earliest` that still meets every rider
/// at their pick-up: `max(earliest, α_j − offset_j)` where `offset_j` is the
/// driving time from the origin to rider j's pick-up along the route.
pub fn latest_departure_from_offsets(earliest: Seconds, pickups: impl IntoIterator<Item = (Seconds, Seconds)>) -> Seconds {
    pickups
        .into_iter()
        .fold(earliest, |dep, (rider_earliest, offset)| dep.max(rider_earliest - offset))
}

/// Latest departure of `driver` for a pick-up sequence of `(location, rider
/// earliest departure)` pairs visited in order. Departing then minimizes the
/// driver's travel time to the last pick-up without making any rider wait past
/// their earliest departure.
pub fn latest_departure(net: &TransitNetwork, driver: &DriverTrip, pickups: &[(LocationId, Seconds)]) -> Result<Seconds> {
    let mut pos = driver.origin;
    let mut offset = 0;
    let mut offsets = Vec::with_capacity(pickups.len());
    for &(loc, rider_earliest) in pickups {
        offset += net.car_time(pos, loc)?;
        pos = loc;
        offsets.push((rider_earliest, offset));
    }
    Ok(latest_departure_from_offsets(driver.earliest_departure, offsets))
}

pub(crate) struct DriverStation {
    pub station: StationId,
    pub location: LocationId,
    /// Car time from the driver origin to the station.
    pub there: Seconds,
    /// Car time from the station to the driver destination.
    pub on: Seconds,
}

pub(crate) struct DriverCtx<'a> {
    pub trip: &'a DriverTrip,
    /// Time-feasible stations by earliest arrival, then id.
    pub stations: Vec<DriverStation>,
}

impl<'a> DriverCtx<'a> {
    pub fn new(trip: &'a DriverTrip, net: &TransitNetwork) -> Self {
        let mut tuples = driver_station_tuples(trip, net);
        tuples.sort_by_key(|t| (t.earliest_arrival, t.station));
        let stations = tuples
            .into_iter()
            .map(|t| {
                let location = net.stations()[t.station.index()].location;
                DriverStation {
                    station: t.station,
                    location,
                    there: net.car(trip.origin, location),
                    on: net.car(location, trip.destination),
                }
            })
            .collect();
        Self { trip, stations }
    }
}

pub(crate) struct RiderCtx<'a> {
    pub trip: &'a RiderTrip,
    pub limit: Seconds,
    type1: StationSet,
    type2: StationSet,
}

impl<'a> RiderCtx<'a> {
    pub fn new(trip: &'a RiderTrip, net: &TransitNetwork) -> Self {
        let n = net.stations().len();
        let set = |view: MatchType| {
            if trip.match_type.accepts(view) {
                StationSet::from_tuples(&rider_station_tuples(trip, net, view), n)
            } else {
                StationSet::default()
            }
        };
        Self { trip, limit: rider_limit(trip), type1: set(MatchType::Type1), type2: set(MatchType::Type2) }
    }

    pub fn stations(&self, view: MatchType) -> &StationSet {
        match view {
            MatchType::Type1 => &self.type1,
            _ => &self.type2,
        }
    }
}

/// Timing of a full candidate route; `legs` is aligned with the visit order.
pub(crate) struct Timing {
    pub departure: Seconds,
    pub at_station: Seconds,
    pub driver: Seconds,
    pub legs: Vec<[Seconds; 2]>,
}

fn stop_count(locs: impl Iterator<Item = LocationId>) -> usize {
    let mut seen: Vec<LocationId> = Vec::new();
    for l in locs {
        if !seen.contains(&l) {
            seen.push(l);
        }
    }
    seen.len()
}

/// Checks every constraint of a driver visiting `order` through station `ds`
/// and returns the route timing if it is feasible.
pub(crate) fn evaluate(
    net: &TransitNetwork,
    view: MatchType,
    driver: &DriverCtx,
    ds: &DriverStation,
    order: &[&RiderCtx],
) -> Option<Timing> {
    let d = driver.trip;
    if order.len() > d.capacity as usize {
        return None;
    }
    match view {
        MatchType::Type1 => {
            if stop_count(order.iter().map(|r| r.trip.origin)) > d.stop_limit as usize {
                return None;
            }
            let mut pos = d.origin;
            let mut prefix = 0;
            let mut offsets = Vec::with_capacity(order.len());
            for r in order {
                prefix += net.car(pos, r.trip.origin);
                pos = r.trip.origin;
                offsets.push(prefix);
            }
            let departure = latest_departure_from_offsets(
                d.earliest_departure,
                order.iter().zip(&offsets).map(|(r, &o)| (r.trip.earliest_departure, o)),
            );
            let t_i = prefix + net.car(pos, ds.location);
            let t = departure + t_i;
            if t + ds.on > d.latest_arrival || t_i + ds.on > d.max_trip_time {
                return None;
            }
            let mut legs = Vec::with_capacity(order.len());
            for (r, &o) in order.iter().zip(&offsets) {
                let ride = t_i - o;
                let transit = net.egress(ds.station, r.trip.destination);
                if ride + transit > r.limit || t + transit > r.trip.latest_arrival {
                    return None;
                }
                legs.push([ride, transit]);
            }
            Some(Timing { departure, at_station: t, driver: t_i + ds.on, legs })
        }
        _ => {
            if stop_count(order.iter().map(|r| r.trip.destination)) > d.stop_limit as usize {
                return None;
            }
            let access: Vec<Seconds> = order.iter().map(|r| net.access(r.trip.origin, ds.station)).collect();
            let at_station = order
                .iter()
                .zip(&access)
                .map(|(r, a)| r.trip.earliest_departure + a)
                .fold(d.earliest_departure + ds.there, Seconds::max);
            let mut pos = ds.location;
            let mut ride = 0;
            let mut legs = Vec::with_capacity(order.len());
            for (r, &a) in order.iter().zip(&access) {
                ride += net.car(pos, r.trip.destination);
                pos = r.trip.destination;
                if a + ride > r.limit || at_station + ride > r.trip.latest_arrival {
                    return None;
                }
                legs.push([a, ride]);
            }
            let rest = ride + net.car(pos, d.destination);
            if ds.there + rest > d.max_trip_time || at_station + rest > d.latest_arrival {
                return None;
            }
            Some(Timing { departure: at_station - ds.there, at_station, driver: ds.there + rest, legs })
        }
    }
}

/// Finds some feasible visiting order of `riders` through `ds`, as indices
/// into `riders`. Exhaustive over orders, pruned by lower bounds that only
/// grow as riders are appended (shortest-path triangle inequality).
pub(crate) fn search_order(
    net: &TransitNetwork,
    view: MatchType,
    driver: &DriverCtx,
    ds: &DriverStation,
    riders: &[&RiderCtx],
) -> Option<Vec<usize>> {
    let d = driver.trip;
    if riders.len() > d.capacity as usize {
        return None;
    }
    let mut s = Search {
        net,
        driver: d,
        ds,
        riders,
        used: vec![false; riders.len()],
        order: Vec::with_capacity(riders.len()),
        stops: Vec::new(),
    };
    let found = match view {
        MatchType::Type1 => s.type1(d.origin, 0, d.earliest_departure, &mut Vec::new()),
        _ => {
            let access: Vec<Seconds> = riders.iter().map(|r| net.access(r.trip.origin, ds.station)).collect();
            let at_station = riders
                .iter()
                .zip(&access)
                .map(|(r, a)| r.trip.earliest_departure + a)
                .fold(d.earliest_departure + ds.there, Seconds::max);
            s.type2(ds.location, 0, at_station, &access)
        }
    };
    found.then_some(s.order)
}

struct Search<'s, 'a> {
    net: &'s TransitNetwork,
    driver: &'s DriverTrip,
    ds: &'s DriverStation,
    riders: &'s [&'s RiderCtx<'a>],
    used: Vec<bool>,
    order: Vec<usize>,
    stops: Vec<LocationId>,
}

impl Search<'_, '_> {
    fn push_stop(&mut self, l: LocationId) -> Option<bool> {
        if self.stops.contains(&l) {
            Some(false)
        } else if self.stops.len() < self.driver.stop_limit as usize {
            self.stops.push(l);
            Some(true)
        } else {
            None
        }
    }

    /// `offsets[y]` is the driving time from the driver origin to the pick-up
    /// of `order[y]`.
    fn type1(&mut self, pos: LocationId, prefix: Seconds, dep: Seconds, offsets: &mut Vec<Seconds>) -> bool {
        if self.order.len() == self.riders.len() {
            return true;
        }
        for k in 0..self.riders.len() {
            if self.used[k] {
                continue;
            }
            let r = self.riders[k];
            let Some(new_stop) = self.push_stop(r.trip.origin) else { continue };
            let prefix2 = prefix + self.net.car(pos, r.trip.origin);
            let dep2 = dep.max(r.trip.earliest_departure - prefix2);
            self.used[k] = true;
            self.order.push(k);
            offsets.push(prefix2);
            if self.type1_bounds(r.trip.origin, prefix2, dep2, offsets) && self.type1(r.trip.origin, prefix2, dep2, offsets)
            {
                return true;
            }
            offsets.pop();
            self.order.pop();
            self.used[k] = false;
            if new_stop {
                self.stops.pop();
            }
        }
        false
    }

    fn type1_bounds(&self, pos: LocationId, prefix: Seconds, dep: Seconds, offsets: &[Seconds]) -> bool {
        let t_i = prefix + self.net.car(pos, self.ds.location);
        let t = dep + t_i;
        if t + self.ds.on > self.driver.latest_arrival || t_i + self.ds.on > self.driver.max_trip_time {
            return false;
        }
        self.order.iter().zip(offsets).all(|(&k, &o)| {
            let r = self.riders[k];
            let transit = self.net.egress(self.ds.station, r.trip.destination);
            t_i - o + transit <= r.limit && t + transit <= r.trip.latest_arrival
        })
    }

    fn type2(&mut self, pos: LocationId, ride: Seconds, at_station: Seconds, access: &[Seconds]) -> bool {
        if self.order.len() == self.riders.len() {
            return true;
        }
        for k in 0..self.riders.len() {
            if self.used[k] {
                continue;
            }
            let r = self.riders[k];
            let ride2 = ride + self.net.car(pos, r.trip.destination);
            if access[k] + ride2 > r.limit || at_station + ride2 > r.trip.latest_arrival {
                continue;
            }
            let rest = ride2 + self.net.car(r.trip.destination, self.driver.destination);
            if self.ds.there + rest > self.driver.max_trip_time || at_station + rest > self.driver.latest_arrival {
                continue;
            }
            let Some(new_stop) = self.push_stop(r.trip.destination) else { continue };
            self.used[k] = true;
            self.order.push(k);
            if self.type2(r.trip.destination, ride2, at_station, access) {
                return true;
            }
            self.order.pop();
            self.used[k] = false;
            if new_stop {
                self.stops.pop();
            }
        }
        false
    }
}

/// Assembles a match from a feasible order.
pub(crate) fn build_match(
    view: MatchType,
    driver: &DriverCtx,
    ds: &DriverStation,
    order: &[&RiderCtx],
    timing: Timing,
) -> Match {
    let d = driver.trip;
    let route = match view {
        MatchType::Type1 => std::iter::once(d.origin)
            .chain(order.iter().map(|r| r.trip.origin))
            .chain(std::iter::once(ds.location))
            .collect(),
        _ => std::iter::once(ds.location)
            .chain(order.iter().map(|r| r.trip.destination))
            .chain(std::iter::once(d.destination))
            .collect(),
    };
    let mut by_id: Vec<(crate::trip::TripId, [Seconds; 2])> =
        order.iter().zip(&timing.legs).map(|(r, &l)| (r.trip.id, l)).collect();
    by_id.sort_unstable_by_key(|&(id, _)| id);
    Match {
        driver: d.id,
        riders: by_id.iter().map(|&(id, _)| id).collect(),
        match_type: view,
        station: ds.station,
        order: order.iter().map(|r| r.trip.id).collect(),
        route,
        times: MatchTimes {
            departure: timing.departure,
            at_station: timing.at_station,
            driver: timing.driver,
            riders: by_id.into_iter().map(|(_, l)| l).collect(),
        },
    }
}
