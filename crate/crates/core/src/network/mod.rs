//! Road and public-transit network.
//!
//! All travel-time queries of the engine go through [`TransitNetwork`]:
//! private-car shortest paths over the road graph, and public-transit times
//! over the station graph, where each hop of a line costs the line's mode
//! multiplier times the car time of that hop. Shortest-path trees are built on
//! first use and memoized per source; the network itself is immutable, so
//! queries may be issued from many threads.

mod generate;
mod io;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Seconds;

pub use generate::{generate_network, NetworkGenConfig};
pub use io::{NetworkDoc, NETWORK_FORMAT_VERSION};

const UNREACHABLE: Seconds = Seconds::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocationId(pub u32);

impl LocationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationId(pub u32);

impl StationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AreaId(pub u32);

impl AreaId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: LocationId,
    pub coords: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<AreaId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Train,
    Bus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: StationId,
    pub location: LocationId,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadEdge {
    pub from: LocationId,
    pub to: LocationId,
    /// Car travel time in whole seconds.
    pub seconds: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitLine {
    pub name: String,
    pub mode: Mode,
    /// Stations in service order. Lines run in both directions.
    pub stations: Vec<StationId>,
}

/// Transit travel time as a multiple of the car time over the same hop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub train: f64,
    pub bus: f64,
}

impl Default for Multipliers {
    fn default() -> Self {
        Self {
            train: 1.15,
            bus: 2.0,
        }
    }
}

impl Multipliers {
    pub fn for_mode(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Train => self.train,
            Mode::Bus => self.bus,
        }
    }
}

/// Scales a car duration by a transit multiplier, rounded to the nearest second.
pub fn scale_duration(multiplier: f64, car: Seconds) -> Seconds {
    (multiplier * car as f64).round() as Seconds
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AreaKind {
    Community,
    Downtown,
    Airport,
}

/// A demand area (community, downtown or airport) grouping network locations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub id: AreaId,
    pub name: String,
    pub kind: AreaKind,
    /// Representative location used for inter-area distances.
    pub hub: LocationId,
    pub locations: Vec<LocationId>,
}

/// One directed hop of the station graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitHop {
    pub from: StationId,
    pub to: StationId,
    /// `None` for a zero-cost transfer between collocated stations.
    pub mode: Option<Mode>,
    pub seconds: Seconds,
}

#[derive(Debug)]
pub struct TransitNetwork {
    locations: Vec<Location>,
    stations: Vec<Station>,
    road_edges: Vec<RoadEdge>,
    transit_lines: Vec<TransitLine>,
    multipliers: Multipliers,
    areas: Vec<Area>,

    road_adj: Vec<Vec<(u32, Seconds)>>,
    hops: Vec<TransitHop>,
    station_adj: Vec<Vec<(u32, Seconds)>>,

    car_memo: Vec<OnceLock<Box<[Seconds]>>>,
    transit_memo: Vec<OnceLock<Box<[Seconds]>>>,
    egress_memo: Vec<OnceLock<Box<[Seconds]>>>,
    access_memo: Vec<OnceLock<Box<[Seconds]>>>,
}

impl TransitNetwork {
    /// Builds a network, validating every structural invariant.
    pub fn new(doc: NetworkDoc) -> Result<Self> {
        doc.validate()?;
        let NetworkDoc {
            locations,
            stations,
            road_edges,
            transit_lines,
            multipliers,
            areas,
            ..
        } = doc;

        let n = locations.len();
        let mut road_adj = vec![Vec::new(); n];
        for e in &road_edges {
            road_adj[e.from.index()].push((e.to.0, e.seconds as Seconds));
        }
        check_strongly_connected(&road_adj)?;

        let mut net = Self {
            car_memo: (0..n).map(|_| OnceLock::new()).collect(),
            transit_memo: (0..stations.len()).map(|_| OnceLock::new()).collect(),
            egress_memo: (0..stations.len()).map(|_| OnceLock::new()).collect(),
            access_memo: (0..n).map(|_| OnceLock::new()).collect(),
            station_adj: vec![Vec::new(); stations.len()],
            hops: Vec::new(),
            locations,
            stations,
            road_edges,
            transit_lines,
            multipliers,
            areas,
            road_adj,
        };
        net.build_station_graph();
        Ok(net)
    }

    fn build_station_graph(&mut self) {
        let mut hops = Vec::new();
        for line in &self.transit_lines {
            let mult = self.multipliers.for_mode(line.mode);
            for pair in line.stations.windows(2) {
                for (a, b) in [(pair[0], pair[1]), (pair[1], pair[0])] {
                    let car = self.car(self.stations[a.index()].location, self.stations[b.index()].location);
                    hops.push(TransitHop {
                        from: a,
                        to: b,
                        mode: Some(line.mode),
                        seconds: scale_duration(mult, car),
                    });
                }
            }
        }
        for a in &self.stations {
            for b in &self.stations {
                if a.id != b.id && a.location == b.location {
                    hops.push(TransitHop {
                        from: a.id,
                        to: b.id,
                        mode: None,
                        seconds: 0,
                    });
                }
            }
        }
        for hop in &hops {
            self.station_adj[hop.from.index()].push((hop.to.0, hop.seconds));
        }
        self.hops = hops;
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn road_edges(&self) -> &[RoadEdge] {
        &self.road_edges
    }

    pub fn transit_lines(&self) -> &[TransitLine] {
        &self.transit_lines
    }

    pub fn multipliers(&self) -> Multipliers {
        self.multipliers
    }

    pub fn areas(&self) -> &[Area] {
        &self.areas
    }

    pub fn transit_hops(&self) -> &[TransitHop] {
        &self.hops
    }

    pub fn station(&self, id: StationId) -> Result<&Station> {
        self.stations.get(id.index()).ok_or(Error::UnknownStation(id))
    }

    pub fn contains(&self, id: LocationId) -> bool {
        id.index() < self.locations.len()
    }

    fn check(&self, id: LocationId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownLocation(id))
        }
    }

    fn check_station(&self, id: StationId) -> Result<()> {
        if id.index() < self.stations.len() {
            Ok(())
        } else {
            Err(Error::UnknownStation(id))
        }
    }

    /// Shortest car travel time from `u` to `v`.
    pub fn car_time(&self, u: LocationId, v: LocationId) -> Result<Seconds> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.car(u, v))
    }

    /// Car time over consecutive waypoints of a path.
    pub fn path_time(&self, path: &[LocationId]) -> Result<Seconds> {
        for &l in path {
            self.check(l)?;
        }
        Ok(path.windows(2).map(|w| self.car(w[0], w[1])).sum())
    }

    /// Unchecked car time; both ids must belong to the network.
    pub(crate) fn car(&self, u: LocationId, v: LocationId) -> Seconds {
        self.car_tree(u)[v.index()]
    }

    fn car_tree(&self, source: LocationId) -> &[Seconds] {
        self.car_memo[source.index()].get_or_init(|| dijkstra(&self.road_adj, source.0))
    }

    fn transit_tree(&self, source: StationId) -> &[Seconds] {
        self.transit_memo[source.index()].get_or_init(|| dijkstra(&self.station_adj, source.0))
    }

    /// Public-transit time between two stations over the line graph.
    pub fn transit_time(&self, s1: StationId, s2: StationId) -> Result<Seconds> {
        self.check_station(s1)?;
        self.check_station(s2)?;
        match self.transit_tree(s1)[s2.index()] {
            UNREACHABLE => Err(Error::TransitUnreachable { from: s1, to: s2 }),
            t => Ok(t),
        }
    }

    /// Fastest transit time from station `s` to location `d`: ride the lines to
    /// some station, then the bus-multiplier egress leg.
    pub fn transit_to_location(&self, s: StationId, d: LocationId) -> Result<Seconds> {
        self.check_station(s)?;
        self.check(d)?;
        Ok(self.egress(s, d))
    }

    /// Fastest transit time from location `o` to station `s`: bus-multiplier
    /// access leg to some station, then the lines.
    pub fn transit_from_location(&self, o: LocationId, s: StationId) -> Result<Seconds> {
        self.check(o)?;
        self.check_station(s)?;
        Ok(self.access(o, s))
    }

    pub(crate) fn egress(&self, s: StationId, d: LocationId) -> Seconds {
        self.egress_memo[s.index()].get_or_init(|| {
            let tree = self.transit_tree(s);
            let bus = self.multipliers.bus;
            let mut best = vec![UNREACHABLE; self.locations.len()];
            for (k, station) in self.stations.iter().enumerate() {
                let ride = tree[k];
                if ride == UNREACHABLE {
                    continue;
                }
                let from_station = self.car_tree(station.location);
                for (slot, &car) in best.iter_mut().zip(from_station.iter()) {
                    let t = ride + scale_duration(bus, car);
                    if t < *slot {
                        *slot = t;
                    }
                }
            }
            best.into_boxed_slice()
        })[d.index()]
    }

    pub(crate) fn access(&self, o: LocationId, s: StationId) -> Seconds {
        self.access_memo[o.index()].get_or_init(|| {
            let from_origin = self.car_tree(o);
            let bus = self.multipliers.bus;
            let mut best = vec![UNREACHABLE; self.stations.len()];
            for (k, station) in self.stations.iter().enumerate() {
                let walk = scale_duration(bus, from_origin[station.location.index()]);
                let tree = self.transit_tree(StationId(k as u32));
                for (slot, &ride) in best.iter_mut().zip(tree.iter()) {
                    if ride != UNREACHABLE && walk + ride < *slot {
                        *slot = walk + ride;
                    }
                }
            }
            best.into_boxed_slice()
        })[s.index()]
    }

    /// Fastest pure public-transit route time from `o` to `d`.
    pub fn best_transit_route_time(&self, o: LocationId, d: LocationId) -> Result<Seconds> {
        self.check(o)?;
        self.check(d)?;
        Ok(self.best_transit(o, d))
    }

    pub(crate) fn best_transit(&self, o: LocationId, d: LocationId) -> Seconds {
        let from_origin = self.car_tree(o);
        let bus = self.multipliers.bus;
        self.stations
            .iter()
            .map(|s| {
                let egress = self.egress(s.id, d);
                if egress == UNREACHABLE {
                    UNREACHABLE
                } else {
                    scale_duration(bus, from_origin[s.location.index()]) + egress
                }
            })
            .min()
            .unwrap_or(UNREACHABLE)
    }

    /// The area containing a location, if areas are defined.
    pub fn area_of(&self, id: LocationId) -> Option<AreaId> {
        self.locations.get(id.index()).and_then(|l| l.area)
    }
}

fn dijkstra(adj: &[Vec<(u32, Seconds)>], source: u32) -> Box<[Seconds]> {
    let mut dist = vec![UNREACHABLE; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = 0;
    heap.push(Reverse((0, source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        for &(v, w) in &adj[u as usize] {
            let nd = d + w;
            if nd < dist[v as usize] {
                dist[v as usize] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist.into_boxed_slice()
}

fn check_strongly_connected(adj: &[Vec<(u32, Seconds)>]) -> Result<()> {
    if adj.is_empty() {
        return Ok(());
    }
    let mut reverse = vec![Vec::new(); adj.len()];
    for (u, edges) in adj.iter().enumerate() {
        for &(v, w) in edges {
            reverse[v as usize].push((u as u32, w));
        }
    }
    for (graph, direction) in [(adj, "forward"), (&reverse[..], "reverse")] {
        let dist = dijkstra(graph, 0);
        if let Some(k) = dist.iter().position(|&d| d == UNREACHABLE) {
            return Err(Error::MalformedNetwork {
                path: format!("locations[{k}]"),
                reason: format!("road graph is not strongly connected ({direction} search from location 0)"),
            });
        }
    }
    Ok(())
}
