//! Choosing a trip-disjoint set of matches that serves the most riders.
//!
//! [`exact_solve`] is a branch-and-bound over drivers for small instances.
//! [`imp_greedy`] repeatedly takes the largest remaining match. The
//! independent-set route converts the hypergraph to a [`ConflictGraph`], runs
//! [`greedy_mis`] and optionally improves it with claw [`local_search`].

mod conflict;
mod exact;
mod greedy;
mod local;

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{Match, MatchHypergraph};
use crate::trip::TripId;

pub use conflict::{to_conflict_graph, ConflictGraph, DEFAULT_CONFLICT_BUDGET};
pub use exact::{exact_solve, ExactOutcome};
pub use greedy::{greedy_mis, imp_greedy};
pub use local::{local_search, ImprovementMetric, ImprovementRule, LocalSearchConfig, LocalSearchOutcome};

/// A trip-disjoint set of matches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub solver: String,
    /// Riders served.
    pub objective: usize,
    pub matches: Vec<Match>,
    pub elapsed_ms: u64,
    /// Indices of the chosen matches in the hypergraph's edge order.
    #[serde(skip)]
    pub edges: Vec<usize>,
}

impl Solution {
    /// Collects the given edges, checking that no trip is used twice.
    pub fn from_edges(solver: &str, h: &MatchHypergraph, mut edges: Vec<usize>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        let mut used: HashSet<TripId> = HashSet::new();
        for &k in &edges {
            let e = h
                .edges()
                .get(k)
                .ok_or_else(|| Error::Config(format!("edge index {k} out of range")))?;
            for t in e.trips() {
                if !used.insert(t) {
                    return Err(Error::NotDisjoint(t));
                }
            }
        }
        let matches: Vec<Match> = edges.iter().map(|&k| h.edges()[k].clone()).collect();
        Ok(Self {
            solver: solver.to_string(),
            objective: matches.iter().map(Match::size).sum(),
            matches,
            elapsed_ms: 0,
            edges,
        })
    }

    pub fn empty(solver: &str) -> Self {
        Self { solver: solver.to_string(), objective: 0, matches: Vec::new(), elapsed_ms: 0, edges: Vec::new() }
    }

    pub fn covered_riders(&self) -> BTreeSet<TripId> {
        self.matches.iter().flat_map(|m| m.riders.iter().copied()).collect()
    }

    /// Drivers with at least one rider.
    pub fn serving_drivers(&self) -> usize {
        self.matches.len()
    }
}

/// Maps an independent vertex set of `g` back to matches of `h`.
pub fn solution_from_vertices(solver: &str, g: &ConflictGraph, h: &MatchHypergraph, set: &[usize]) -> Result<Solution> {
    g.check_independent(set)?;
    if g.len() != h.edges().len() {
        return Err(Error::Config("conflict graph does not belong to this hypergraph".into()));
    }
    Solution::from_edges(solver, h, set.to_vec())
}
