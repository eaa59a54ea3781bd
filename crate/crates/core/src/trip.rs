//! Trip announcements of drivers and riders.
//!
//! Times are integer seconds since midnight; durations are integer seconds.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{LocationId, StationId, TransitNetwork};
use crate::Seconds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TripId(pub u64);

/// How a trip may be combined with transit.
///
/// `Type1` is rideshare-then-transit: the driver collects riders at their
/// origins and drops everyone at one station. `Type2` is transit-then-rideshare:
/// the driver collects everyone at one station and drops each rider at their
/// destination. `Either` lets the system choose.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchType {
    Type1,
    Type2,
    Either,
}

impl MatchType {
    /// The concrete match types this announcement can take part in.
    pub fn views(self) -> &'static [MatchType] {
        match self {
            MatchType::Type1 => &[MatchType::Type1],
            MatchType::Type2 => &[MatchType::Type2],
            MatchType::Either => &[MatchType::Type1, MatchType::Type2],
        }
    }

    pub fn accepts(self, concrete: MatchType) -> bool {
        self == MatchType::Either || self == concrete
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverTrip {
    pub id: TripId,
    pub origin: LocationId,
    pub destination: LocationId,
    /// Seats available for riders.
    pub capacity: u32,
    pub detour_limit: Seconds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preferred_path: Option<Vec<LocationId>>,
    /// Maximum distinct pick-up (Type 1) or drop-off (Type 2) locations.
    pub stop_limit: u32,
    pub earliest_departure: Seconds,
    pub latest_arrival: Seconds,
    pub max_trip_time: Seconds,
    pub match_type: MatchType,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiderTrip {
    pub id: TripId,
    pub origin: LocationId,
    pub destination: LocationId,
    pub earliest_departure: Seconds,
    pub latest_arrival: Seconds,
    pub max_trip_time: Seconds,
    /// Fraction of the fastest transit-only time a ridesharing route may take.
    pub acceptance_rate: f64,
    /// Fastest transit-only travel time from origin to destination.
    pub baseline_transit_time: Seconds,
    pub match_type: MatchType,
}

/// The travel plan offered to one rider of a match.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RideshareRoute {
    pub rider: TripId,
    pub driver: TripId,
    pub station: StationId,
    pub total_time: Seconds,
    /// Ride then transit for Type 1; transit then ride for Type 2.
    pub leg_times: Vec<Seconds>,
}

/// Trip parameter symbols and the struct field housing each.
pub const NOTATION: &[(&str, &str)] = &[
    ("o", "origin"),
    ("d", "destination"),
    ("n", "capacity"),
    ("z", "detour_limit"),
    ("p", "preferred_path"),
    ("δ", "stop_limit"),
    ("α", "earliest_departure"),
    ("β", "latest_arrival"),
    ("γ", "max_trip_time"),
    ("θ", "acceptance_rate"),
    ("t(π̂)", "baseline_transit_time"),
];

/// Largest whole number of seconds not exceeding `rate × baseline`.
pub fn acceptance_threshold(rider: &RiderTrip) -> Seconds {
    floor_scaled(rider.acceptance_rate, rider.baseline_transit_time)
}

pub(crate) fn floor_scaled(rate: f64, seconds: Seconds) -> Seconds {
    let exact = rate * seconds as f64;
    // absorbs representation error such as 0.29 * 100 = 28.999999999999996
    (exact + 1e-9 * exact.abs().max(1.0)).floor() as Seconds
}

/// Maximum trip time of a driver: preferred-path (or fastest) car time plus
/// the detour limit.
pub fn driver_max_trip_time(driver: &DriverTrip, net: &TransitNetwork) -> Result<Seconds> {
    let base = match &driver.preferred_path {
        Some(path) => net.path_time(path).map_err(|e| malformed(driver.id, format!("preferred path: {e}")))?,
        None => net.car_time(driver.origin, driver.destination)?,
    };
    Ok(base + driver.detour_limit)
}

fn malformed(id: TripId, reason: impl Into<String>) -> Error {
    Error::MalformedTrip { id, reason: reason.into() }
}

impl DriverTrip {
    pub fn validate(&self, net: &TransitNetwork) -> Result<()> {
        let id = self.id;
        for (what, l) in [("origin", self.origin), ("destination", self.destination)] {
            if !net.contains(l) {
                return Err(malformed(id, format!("{what} {} is not in the network", l.0)));
            }
        }
        if self.capacity < 1 {
            return Err(malformed(id, "capacity must be at least 1"));
        }
        if self.stop_limit < 1 {
            return Err(malformed(id, "stop limit must be at least 1"));
        }
        if self.detour_limit < 0 {
            return Err(malformed(id, "detour limit must be non-negative"));
        }
        if self.earliest_departure >= self.latest_arrival {
            return Err(malformed(id, "earliest departure must precede latest arrival"));
        }
        if let Some(path) = &self.preferred_path {
            if path.len() < 2 || path[0] != self.origin || path[path.len() - 1] != self.destination {
                return Err(malformed(id, "preferred path must run from origin to destination"));
            }
        }
        let expected = driver_max_trip_time(self, net)?;
        if self.max_trip_time != expected {
            return Err(malformed(
                id,
                format!("max trip time {} differs from path time plus detour {expected}", self.max_trip_time),
            ));
        }
        Ok(())
    }
}

impl RiderTrip {
    pub fn validate(&self, net: &TransitNetwork) -> Result<()> {
        let id = self.id;
        for (what, l) in [("origin", self.origin), ("destination", self.destination)] {
            if !net.contains(l) {
                return Err(malformed(id, format!("{what} {} is not in the network", l.0)));
            }
        }
        if !(self.acceptance_rate > 0.0 && self.acceptance_rate <= 1.0) {
            return Err(malformed(id, format!("acceptance rate {} outside (0, 1]", self.acceptance_rate)));
        }
        if self.earliest_departure >= self.latest_arrival {
            return Err(malformed(id, "earliest departure must precede latest arrival"));
        }
        if self.max_trip_time <= 0 {
            return Err(malformed(id, "max trip time must be positive"));
        }
        let baseline = net.best_transit_route_time(self.origin, self.destination)?;
        if self.baseline_transit_time != baseline {
            return Err(malformed(
                id,
                format!(
                    "baseline transit time {} differs from the network's {baseline}",
                    self.baseline_transit_time
                ),
            ));
        }
        Ok(())
    }
}

/// One interval's announcements.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TripBatch {
    pub drivers: Vec<DriverTrip>,
    pub riders: Vec<RiderTrip>,
}

/// A line of the trip batch file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "lowercase")]
pub enum Trip {
    Driver(DriverTrip),
    Rider(RiderTrip),
}

impl TripBatch {
    pub fn is_empty(&self) -> bool {
        self.drivers.is_empty() && self.riders.is_empty()
    }

    /// Validates every trip and the uniqueness of labels across drivers and
    /// riders.
    pub fn validate(&self, net: &TransitNetwork) -> Result<()> {
        let mut seen = HashSet::new();
        for id in self.drivers.iter().map(|d| d.id).chain(self.riders.iter().map(|r| r.id)) {
            if !seen.insert(id) {
                return Err(Error::DuplicateTrip(id));
            }
        }
        self.drivers.iter().try_for_each(|d| d.validate(net))?;
        self.riders.iter().try_for_each(|r| r.validate(net))
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for d in &self.drivers {
            serde_json::to_writer(&mut out, &Trip::Driver(d.clone()))?;
            out.write_all(b"\n")?;
        }
        for r in &self.riders {
            serde_json::to_writer(&mut out, &Trip::Rider(r.clone()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut batch = TripBatch::default();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(&line).map_err(|source| Error::TripLine { line: k + 1, source })? {
                Trip::Driver(d) => batch.drivers.push(d),
                Trip::Rider(r) => batch.riders.push(r),
            }
        }
        Ok(batch)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_jsonl(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_jsonl(BufReader::new(File::open(path)?))
    }
}
