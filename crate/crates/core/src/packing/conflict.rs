use crate::error::{Error, Result};
use crate::feasibility::MatchHypergraph;

/// Adjacency entries allowed by default (about 200 MB of `u32`).
pub const DEFAULT_CONFLICT_BUDGET: u64 = 50_000_000;

/// One vertex per match, weighted by riders served; two vertices are adjacent
/// when their matches share a trip.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictGraph {
    weights: Vec<u32>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
}

/// Builds the conflict graph, refusing when the adjacency bound
/// `Σ_j |E_j|(|E_j| − 1)` exceeds `budget` entries.
pub fn to_conflict_graph(h: &MatchHypergraph, budget: u64) -> Result<ConflictGraph> {
    let trips = h.drivers().iter().chain(h.riders());
    let needed: u64 = trips
        .map(|&t| {
            let n = h.incident(t).len() as u64;
            n * n.saturating_sub(1)
        })
        .sum();
    if needed > budget {
        return Err(Error::ConflictGraphTooLarge { needed, budget });
    }
    let mut offsets = Vec::with_capacity(h.edges().len() + 1);
    let mut adjacency = Vec::new();
    offsets.push(0);
    let mut scratch = Vec::new();
    for (k, e) in h.edges().iter().enumerate() {
        scratch.clear();
        for t in e.trips() {
            scratch.extend(h.incident(t).iter().filter(|&&o| o != k).map(|&o| o as u32));
        }
        scratch.sort_unstable();
        scratch.dedup();
        adjacency.extend_from_slice(&scratch);
        offsets.push(adjacency.len());
    }
    Ok(ConflictGraph { weights: h.edges().iter().map(|e| e.size() as u32).collect(), offsets, adjacency })
}

impl ConflictGraph {
    /// A graph from explicit weights and undirected edges.
    pub fn from_edges(weights: Vec<u32>, edges: &[(usize, usize)]) -> Self {
        let mut lists = vec![Vec::new(); weights.len()];
        for &(u, v) in edges {
            if u != v {
                lists[u].push(v as u32);
                lists[v].push(u as u32);
            }
        }
        let mut offsets = vec![0];
        let mut adjacency = Vec::new();
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            adjacency.extend(l);
            offsets.push(adjacency.len());
        }
        Self { weights, offsets, adjacency }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, v: usize) -> u32 {
        self.weights[v]
    }

    /// Neighbors of `v`, ascending.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    pub fn check_independent(&self, set: &[usize]) -> Result<()> {
        for (a, &u) in set.iter().enumerate() {
            if u >= self.len() {
                return Err(Error::Config(format!("vertex {u} out of range")));
            }
            for &v in &set[a + 1..] {
                if u == v || self.adjacent(u, v) {
                    return Err(Error::NotIndependent(u, v));
                }
            }
        }
        Ok(())
    }

    pub fn set_weight(&self, set: &[usize]) -> u64 {
        set.iter().map(|&v| self.weights[v] as u64).sum()
    }
}
