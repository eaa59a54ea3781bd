use thiserror::Error;

use crate::network::{LocationId, StationId};
use crate::trip::TripId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown location {0:?}")]
    UnknownLocation(LocationId),

    #[error("unknown station {0:?}")]
    UnknownStation(StationId),

    #[error("station {from:?} cannot reach station {to:?} by transit")]
    TransitUnreachable { from: StationId, to: StationId },

    #[error("malformed network at {path}: {reason}")]
    MalformedNetwork { path: String, reason: String },

    #[error("malformed trip {id:?}: {reason}")]
    MalformedTrip { id: TripId, reason: String },

    #[error("trip file line {line}: {source}")]
    TripLine {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("duplicate trip id {0:?}")]
    DuplicateTrip(TripId),

    #[error("invalid reduction config: {0}")]
    InvalidReduction(String),

    #[error("conflict graph would need {needed} adjacency entries (budget {budget})")]
    ConflictGraphTooLarge { needed: u64, budget: u64 },

    #[error("local search input is not an independent set: vertices {0} and {1} are adjacent")]
    NotIndependent(usize, usize),

    #[error("solution is not trip-disjoint: trip {0:?} appears in more than one chosen match")]
    NotDisjoint(TripId),

    #[error("constraint violation in match of driver {driver:?}: {reason}")]
    Violation { driver: TripId, reason: String },

    #[error("interval {interval}: {source}")]
    Interval {
        interval: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
