use serde::{Deserialize, Serialize};

use crate::network::{StationId, TransitNetwork};
use crate::trip::{acceptance_threshold, DriverTrip, MatchType, RiderTrip};
use crate::Seconds;

/// A station that is time feasible for a trip, with the trip's earliest
/// arrival there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationTimeTuple {
    pub station: StationId,
    pub earliest_arrival: Seconds,
}

/// Longest ridesharing route a rider accepts: the tighter of the trip-time
/// limit and the acceptance threshold.
pub(crate) fn rider_limit(rider: &RiderTrip) -> Seconds {
    rider.max_trip_time.min(acceptance_threshold(rider))
}

/// Time-feasible stations of a rider for one concrete match type, by station
/// id.
///
/// Type 1 reaches the station by car from the origin and continues by
/// transit; Type 2 reaches it by transit and continues by car.
///
/// # Panics
/// If `view` is [`MatchType::Either`].
pub fn rider_station_tuples(rider: &RiderTrip, net: &TransitNetwork, view: MatchType) -> Vec<StationTimeTuple> {
    let limit = rider_limit(rider);
    net.stations()
        .iter()
        .filter_map(|s| {
            let (first, second) = match view {
                MatchType::Type1 => (net.car(rider.origin, s.location), net.egress(s.id, rider.destination)),
                MatchType::Type2 => (net.access(rider.origin, s.id), net.car(s.location, rider.destination)),
                MatchType::Either => panic!("station tuples need a concrete match type"),
            };
            let arrival = rider.earliest_departure + first;
            (arrival + second <= rider.latest_arrival && first + second <= limit)
                .then_some(StationTimeTuple { station: s.id, earliest_arrival: arrival })
        })
        .collect()
}

/// Time-feasible stations of a driver, by station id. The same set serves
/// both match types.
pub fn driver_station_tuples(driver: &DriverTrip, net: &TransitNetwork) -> Vec<StationTimeTuple> {
    net.stations()
        .iter()
        .filter_map(|s| {
            let there = net.car(driver.origin, s.location);
            let on = net.car(s.location, driver.destination);
            let arrival = driver.earliest_departure + there;
            (arrival + on <= driver.latest_arrival && there + on <= driver.max_trip_time)
                .then_some(StationTimeTuple { station: s.id, earliest_arrival: arrival })
        })
        .collect()
}

/// Membership bitset over station ids.
#[derive(Clone, Debug, Default)]
pub(crate) struct StationSet(Vec<u64>);

impl StationSet {
    pub(crate) fn from_tuples(tuples: &[StationTimeTuple], stations: usize) -> Self {
        let mut bits = vec![0u64; stations.div_ceil(64)];
        for t in tuples {
            bits[t.station.index() / 64] |= 1 << (t.station.index() % 64);
        }
        Self(bits)
    }

    pub(crate) fn contains(&self, s: StationId) -> bool {
        self.0.get(s.index() / 64).is_some_and(|w| w & (1 << (s.index() % 64)) != 0)
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}
