use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Area, Location, Multipliers, RoadEdge, Station, TransitLine, TransitNetwork};
use crate::error::{Error, Result};

pub const NETWORK_FORMAT_VERSION: u32 = 1;

/// Serialized form of a [`TransitNetwork`].
///
/// Location, station and area ids are dense: the element at position `k` of
/// each list must carry id `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub version: u32,
    pub locations: Vec<Location>,
    pub stations: Vec<Station>,
    pub road_edges: Vec<RoadEdge>,
    pub transit_lines: Vec<TransitLine>,
    pub multipliers: Multipliers,
    #[serde(default)]
    pub areas: Vec<Area>,
}

fn malformed(path: String, reason: impl Into<String>) -> Error {
    Error::MalformedNetwork {
        path,
        reason: reason.into(),
    }
}

impl NetworkDoc {
    /// Checks every invariant that does not need shortest paths.
    pub fn validate(&self) -> Result<()> {
        if self.version != NETWORK_FORMAT_VERSION {
            return Err(malformed(
                "version".into(),
                format!("unsupported version {} (expected {NETWORK_FORMAT_VERSION})", self.version),
            ));
        }
        let n = self.locations.len();
        if n == 0 {
            return Err(malformed("locations".into(), "network has no locations"));
        }
        for (k, l) in self.locations.iter().enumerate() {
            if l.id.index() != k {
                return Err(malformed(format!("locations[{k}].id"), format!("expected id {k}, found {}", l.id.0)));
            }
            if !l.coords.iter().all(|c| c.is_finite()) {
                return Err(malformed(format!("locations[{k}].coords"), "coordinates must be finite"));
            }
            if let Some(a) = l.area {
                if a.index() >= self.areas.len() {
                    return Err(malformed(format!("locations[{k}].area"), format!("unknown area {}", a.0)));
                }
            }
        }
        if self.stations.is_empty() {
            return Err(malformed("stations".into(), "network has no stations"));
        }
        for (k, s) in self.stations.iter().enumerate() {
            if s.id.index() != k {
                return Err(malformed(format!("stations[{k}].id"), format!("expected id {k}, found {}", s.id.0)));
            }
            if s.location.index() >= n {
                return Err(malformed(
                    format!("stations[{k}].location"),
                    format!("unknown location {}", s.location.0),
                ));
            }
        }
        for (k, e) in self.road_edges.iter().enumerate() {
            for (field, id) in [("from", e.from), ("to", e.to)] {
                if id.index() >= n {
                    return Err(malformed(format!("road_edges[{k}].{field}"), format!("unknown location {}", id.0)));
                }
            }
            if e.seconds == 0 {
                return Err(malformed(format!("road_edges[{k}].seconds"), "edge weight must be positive"));
            }
        }
        for (k, line) in self.transit_lines.iter().enumerate() {
            if line.stations.len() < 2 {
                return Err(malformed(format!("transit_lines[{k}].stations"), "a line needs at least two stations"));
            }
            for (i, s) in line.stations.iter().enumerate() {
                if s.index() >= self.stations.len() {
                    return Err(malformed(
                        format!("transit_lines[{k}].stations[{i}]"),
                        format!("unknown station {}", s.0),
                    ));
                }
            }
        }
        let m = self.multipliers;
        if !(m.train.is_finite() && m.train >= 1.0) {
            return Err(malformed("multipliers.train".into(), "train factor must be >= 1"));
        }
        if !(m.bus.is_finite() && m.bus >= m.train) {
            return Err(malformed("multipliers.bus".into(), "bus factor must be >= train factor"));
        }
        for (k, a) in self.areas.iter().enumerate() {
            if a.id.index() != k {
                return Err(malformed(format!("areas[{k}].id"), format!("expected id {k}, found {}", a.id.0)));
            }
            if a.locations.is_empty() {
                return Err(malformed(format!("areas[{k}].locations"), "area has no locations"));
            }
            for (i, l) in a.locations.iter().chain(std::iter::once(&a.hub)).enumerate() {
                match self.locations.get(l.index()) {
                    Some(loc) if loc.area == Some(a.id) => {}
                    Some(_) => {
                        return Err(malformed(
                            format!("areas[{k}].locations[{i}]"),
                            format!("location {} is not tagged with area {k}", l.0),
                        ))
                    }
                    None => {
                        return Err(malformed(format!("areas[{k}].locations[{i}]"), format!("unknown location {}", l.0)))
                    }
                }
            }
        }
        Ok(())
    }

    /// Parses a network document. Syntax and type errors carry line and
    /// column; semantic errors carry the JSON path of the offending element.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }
}

impl TransitNetwork {
    pub fn to_doc(&self) -> NetworkDoc {
        NetworkDoc {
            version: NETWORK_FORMAT_VERSION,
            locations: self.locations.clone(),
            stations: self.stations.clone(),
            road_edges: self.road_edges.clone(),
            transit_lines: self.transit_lines.clone(),
            multipliers: self.multipliers,
            areas: self.areas.clone(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        TransitNetwork::new(NetworkDoc::from_json_str(text)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}
