//! Synthetic city network: a downtown hub, thirteen communities and two
//! airports, each a small street grid, joined by arterials. Train lines radiate
//! from downtown; bus routes feed the train stations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    Area, AreaId, AreaKind, Location, LocationId, Mode, Multipliers, NetworkDoc, RoadEdge, Station, StationId,
    TransitLine, TransitNetwork, NETWORK_FORMAT_VERSION,
};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkGenConfig {
    /// Street grid side length per area (grid_side × grid_side locations).
    pub grid_side: usize,
    /// Distance between neighboring grid locations, in meters.
    pub grid_spacing: f64,
    /// Street speed inside an area, in m/s.
    pub street_speed: f64,
    /// Arterial speed between areas, in m/s.
    pub arterial_speed: f64,
    /// Road length over straight-line distance for arterials.
    pub arterial_detour: f64,
    /// Nearest neighbors each area is joined to by arterials.
    pub arterial_neighbors: usize,
    /// Maximum random displacement of area centers, in meters.
    pub jitter: f64,
    pub multipliers: Multipliers,
}

impl Default for NetworkGenConfig {
    fn default() -> Self {
        Self {
            grid_side: 4,
            grid_spacing: 350.0,
            street_speed: 9.0,
            arterial_speed: 14.0,
            arterial_detour: 1.2,
            arterial_neighbors: 3,
            jitter: 300.0,
            multipliers: Multipliers::default(),
        }
    }
}

struct AreaSpec {
    name: &'static str,
    kind: AreaKind,
    center: [f64; 2],
}

const AREAS: [AreaSpec; 16] = [
    AreaSpec { name: "downtown", kind: AreaKind::Downtown, center: [0.0, 0.0] },
    AreaSpec { name: "north-1", kind: AreaKind::Community, center: [-2500.0, 6000.0] },
    AreaSpec { name: "north-2", kind: AreaKind::Community, center: [-1000.0, 12000.0] },
    AreaSpec { name: "northwest-1", kind: AreaKind::Community, center: [-6000.0, 9000.0] },
    AreaSpec { name: "west-1", kind: AreaKind::Community, center: [-9500.0, 4000.0] },
    AreaSpec { name: "west-2", kind: AreaKind::Community, center: [-7000.0, -1000.0] },
    AreaSpec { name: "west-3", kind: AreaKind::Community, center: [-12500.0, -500.0] },
    AreaSpec { name: "southwest-1", kind: AreaKind::Community, center: [-4000.0, -5000.0] },
    AreaSpec { name: "south-1", kind: AreaKind::Community, center: [-1000.0, -8000.0] },
    AreaSpec { name: "south-2", kind: AreaKind::Community, center: [-2000.0, -14000.0] },
    AreaSpec { name: "southwest-2", kind: AreaKind::Community, center: [-6500.0, -11500.0] },
    AreaSpec { name: "near-west", kind: AreaKind::Community, center: [-3500.0, 2500.0] },
    AreaSpec { name: "northwest-2", kind: AreaKind::Community, center: [-12000.0, 9500.0] },
    AreaSpec { name: "north-3", kind: AreaKind::Community, center: [-4500.0, 15000.0] },
    AreaSpec { name: "airport-nw", kind: AreaKind::Airport, center: [-17000.0, 12000.0] },
    AreaSpec { name: "airport-sw", kind: AreaKind::Airport, center: [-9500.0, -8000.0] },
];

/// Train lines as area indices, starting downtown.
const TRAIN_LINES: [(&str, &[usize]); 5] = [
    ("train-north", &[0, 1, 2, 13]),
    ("train-northwest", &[0, 11, 3, 12, 14]),
    ("train-west", &[0, 5, 6]),
    ("train-southwest", &[0, 7, 15]),
    ("train-south", &[0, 8, 9]),
];

/// Bus routes as area indices; each stop sits at the area's bus corner.
const BUS_ROUTES: [(&str, &[usize]); 3] = [
    ("bus-west", &[4, 5, 3]),
    ("bus-southwest", &[10, 7, 9]),
    ("bus-crosstown", &[12, 4, 6, 15, 10]),
];

fn travel_seconds(dist: f64, speed: f64) -> u32 {
    ((dist / speed).round() as u32).max(1)
}

/// Builds the synthetic network. The same `(cfg, seed)` always yields the same
/// network.
pub fn generate_network(cfg: &NetworkGenConfig, seed: u64) -> Result<TransitNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = cfg.grid_side.max(2);
    let half = (side - 1) as f64 * cfg.grid_spacing / 2.0;

    let mut locations = Vec::new();
    let mut areas = Vec::new();
    let mut road_edges = Vec::new();
    let mut centers = Vec::new();

    for (a, spec) in AREAS.iter().enumerate() {
        let area_id = AreaId(a as u32);
        let center = if spec.kind == AreaKind::Downtown {
            spec.center
        } else {
            [
                spec.center[0] + rng.random_range(-cfg.jitter..=cfg.jitter),
                spec.center[1] + rng.random_range(-cfg.jitter..=cfg.jitter),
            ]
        };
        centers.push(center);
        let first = locations.len() as u32;
        for r in 0..side {
            for c in 0..side {
                let id = LocationId(locations.len() as u32);
                locations.push(Location {
                    id,
                    coords: [
                        center[0] - half + c as f64 * cfg.grid_spacing,
                        center[1] - half + r as f64 * cfg.grid_spacing,
                    ],
                    area: Some(area_id),
                });
            }
        }
        let at = |r: usize, c: usize| LocationId(first + (r * side + c) as u32);
        let street = travel_seconds(cfg.grid_spacing, cfg.street_speed);
        for r in 0..side {
            for c in 0..side {
                if c + 1 < side {
                    road_edges.push(RoadEdge { from: at(r, c), to: at(r, c + 1), seconds: street });
                    road_edges.push(RoadEdge { from: at(r, c + 1), to: at(r, c), seconds: street });
                }
                if r + 1 < side {
                    road_edges.push(RoadEdge { from: at(r, c), to: at(r + 1, c), seconds: street });
                    road_edges.push(RoadEdge { from: at(r + 1, c), to: at(r, c), seconds: street });
                }
            }
        }
        let mid = side / 2;
        areas.push(Area {
            id: area_id,
            name: spec.name.to_string(),
            kind: spec.kind,
            hub: at(mid, mid),
            locations: (first..first + (side * side) as u32).map(LocationId).collect(),
        });
    }

    let dist = |a: usize, b: usize| {
        let (p, q) = (centers[a], centers[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    };
    let mut arterials = Vec::new();
    for a in 0..AREAS.len() {
        let mut others: Vec<usize> = (0..AREAS.len()).filter(|&b| b != a).collect();
        others.sort_by(|&x, &y| dist(a, x).total_cmp(&dist(a, y)));
        for &b in others.iter().take(cfg.arterial_neighbors) {
            arterials.push((a.min(b), a.max(b)));
        }
    }
    // expressways along the train corridors
    for (_, line) in TRAIN_LINES {
        for w in line.windows(2) {
            arterials.push((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    arterials.sort_unstable();
    arterials.dedup();
    for (a, b) in arterials {
        let seconds = travel_seconds(dist(a, b) * cfg.arterial_detour, cfg.arterial_speed);
        let (ha, hb) = (areas[a].hub, areas[b].hub);
        road_edges.push(RoadEdge { from: ha, to: hb, seconds });
        road_edges.push(RoadEdge { from: hb, to: ha, seconds });
    }

    let mut stations = Vec::new();
    let mut train_station = vec![None; AREAS.len()];
    let mut transit_lines = Vec::new();
    for (name, line) in TRAIN_LINES {
        let mut ids = Vec::new();
        for &a in line {
            let id = *train_station[a].get_or_insert_with(|| {
                let id = StationId(stations.len() as u32);
                stations.push(Station {
                    id,
                    location: areas[a].hub,
                    mode: Mode::Train,
                    name: format!("{}-train", AREAS[a].name),
                });
                id
            });
            ids.push(id);
        }
        transit_lines.push(TransitLine { name: name.to_string(), mode: Mode::Train, stations: ids });
    }
    let mut bus_stop = vec![None; AREAS.len()];
    for (a, area) in areas.iter().enumerate() {
        if area.kind == AreaKind::Airport {
            continue;
        }
        let id = StationId(stations.len() as u32);
        stations.push(Station {
            id,
            location: area.locations[0],
            mode: Mode::Bus,
            name: format!("{}-bus", AREAS[a].name),
        });
        bus_stop[a] = Some(id);
        // feeder to the local train station
        if let Some(train) = train_station[a] {
            transit_lines.push(TransitLine {
                name: format!("bus-{}-feeder", AREAS[a].name),
                mode: Mode::Bus,
                stations: vec![id, train],
            });
        }
    }
    for (name, route) in BUS_ROUTES {
        let ids: Vec<StationId> = route
            .iter()
            .map(|&a| train_station[a].or(bus_stop[a]).expect("bus route area has a stop"))
            .collect();
        transit_lines.push(TransitLine { name: name.to_string(), mode: Mode::Bus, stations: ids });
    }

    TransitNetwork::new(NetworkDoc {
        version: NETWORK_FORMAT_VERSION,
        locations,
        stations,
        road_edges,
        transit_lines,
        multipliers: cfg.multipliers,
        areas,
    })
}
