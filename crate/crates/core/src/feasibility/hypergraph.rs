use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{LocationId, StationId};
use crate::trip::{MatchType, RideshareRoute, TripId};
use crate::Seconds;

/// Times of a match's witnessing route.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchTimes {
    /// When the driver leaves their origin.
    pub departure: Seconds,
    /// Drop-off time at the station (Type 1) or pick-up time there (Type 2).
    pub at_station: Seconds,
    /// Driver's total travel duration from origin to destination.
    pub driver: Seconds,
    /// Per rider, aligned with `Match::riders`: the two legs of the rider's
    /// route in travel order (ride then transit for Type 1, transit then ride
    /// for Type 2).
    pub riders: Vec<[Seconds; 2]>,
}

/// A feasible match: one driver serving a nonempty rider set, with one
/// witnessing route.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub driver: TripId,
    /// Rider ids in ascending order.
    pub riders: Vec<TripId>,
    #[serde(rename = "type")]
    pub match_type: MatchType,
    pub station: StationId,
    /// Riders in visiting order.
    pub order: Vec<TripId>,
    /// Type 1: driver origin, then each pick-up location, then the station.
    /// Type 2: the station, then each drop-off location, then the driver
    /// destination.
    pub route: Vec<LocationId>,
    pub times: MatchTimes,
}

impl Match {
    /// Number of riders served.
    pub fn size(&self) -> usize {
        self.riders.len()
    }

    /// The driver and all riders.
    pub fn trips(&self) -> impl Iterator<Item = TripId> + '_ {
        std::iter::once(self.driver).chain(self.riders.iter().copied())
    }

    pub fn rider_time(&self, rider: TripId) -> Option<Seconds> {
        let k = self.riders.binary_search(&rider).ok()?;
        Some(self.times.riders[k].iter().sum())
    }

    pub fn routes(&self) -> Vec<RideshareRoute> {
        self.riders
            .iter()
            .zip(&self.times.riders)
            .map(|(&rider, legs)| RideshareRoute {
                rider,
                driver: self.driver,
                station: self.station,
                total_time: legs.iter().sum(),
                leg_times: legs.to_vec(),
            })
            .collect()
    }

    pub(crate) fn sort_key(&self) -> (TripId, &[TripId], MatchType) {
        (self.driver, &self.riders, self.match_type)
    }
}

/// Bipartite hypergraph of drivers, riders and feasible matches.
///
/// Edges are ordered by driver id, then rider set (lexicographic), then match
/// type; this order is the tie-breaking order of every solver.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MatchHypergraph {
    drivers: Vec<TripId>,
    riders: Vec<TripId>,
    edges: Vec<Match>,
    incidence: BTreeMap<TripId, Vec<usize>>,
}

impl MatchHypergraph {
    /// Builds the hypergraph over the trips touched by `edges`; trips without
    /// an edge are not vertices.
    pub fn new(mut edges: Vec<Match>) -> Result<Self> {
        edges.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut incidence: BTreeMap<TripId, Vec<usize>> = BTreeMap::new();
        let mut drivers = Vec::new();
        let mut riders = Vec::new();
        for (k, e) in edges.iter().enumerate() {
            if e.riders.is_empty() {
                return Err(Error::Violation { driver: e.driver, reason: "match without riders".into() });
            }
            if e.riders.windows(2).any(|w| w[0] >= w[1]) || e.riders.contains(&e.driver) {
                return Err(Error::Violation {
                    driver: e.driver,
                    reason: "match trips are not pairwise distinct".into(),
                });
            }
            if k > 0 && edges[k - 1].sort_key() == e.sort_key() {
                return Err(Error::Violation { driver: e.driver, reason: "duplicate match".into() });
            }
            for t in e.trips() {
                incidence.entry(t).or_default().push(k);
            }
            if drivers.last() != Some(&e.driver) {
                drivers.push(e.driver);
            }
            riders.extend_from_slice(&e.riders);
        }
        riders.sort_unstable();
        riders.dedup();
        if let Some(&r) = riders.iter().find(|r| drivers.binary_search(r).is_ok()) {
            return Err(Error::DuplicateTrip(r));
        }
        Ok(Self { drivers, riders, edges, incidence })
    }

    pub fn drivers(&self) -> &[TripId] {
        &self.drivers
    }

    pub fn riders(&self) -> &[TripId] {
        &self.riders
    }

    pub fn edges(&self) -> &[Match] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Indices of the edges containing `trip`.
    pub fn incident(&self, trip: TripId) -> &[usize] {
        self.incidence.get(&trip).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest number of riders on any edge.
    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Match::size).max().unwrap_or(0)
    }

    /// Edges of one driver, in edge order.
    pub fn driver_edges(&self, driver: TripId) -> impl Iterator<Item = (usize, &Match)> {
        self.incident(driver).iter().map(move |&k| (k, &self.edges[k])).filter(move |(_, e)| e.driver == driver)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.edges {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut edges = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            if !line.trim().is_empty() {
                edges.push(serde_json::from_str(&line).map_err(|source| Error::TripLine { line: k + 1, source })?);
            }
        }
        Self::new(edges)
    }
}
