use crate::error::Result;
use crate::feasibility::MatchHypergraph;

use super::{ConflictGraph, Solution};

/// Repeatedly takes the match serving the most still-unserved riders and
/// discards every match sharing a trip with it.
///
/// Any match sharing a rider with a chosen one is discarded, so every
/// surviving match's riders are all unserved and the greedy key is its size.
/// Ties go to the earlier edge (driver id, then rider set).
pub fn imp_greedy(h: &MatchHypergraph) -> Result<Solution> {
    let edges = h.edges();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&k| (std::cmp::Reverse(edges[k].size()), k));
    let mut alive = vec![true; edges.len()];
    let mut chosen = Vec::new();
    let mut served = 0;
    for k in order {
        if served == h.riders().len() || chosen.len() == h.drivers().len() {
            break;
        }
        if !alive[k] {
            continue;
        }
        chosen.push(k);
        served += edges[k].size();
        for t in edges[k].trips() {
            for &o in h.incident(t) {
                alive[o] = false;
            }
        }
    }
    Solution::from_edges("impgreedy", h, chosen)
}

/// Takes the heaviest remaining vertex (ties by index) and removes it and its
/// neighbors, until no vertex remains. Returns the set in ascending order.
pub fn greedy_mis(g: &ConflictGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.weight(v)), v));
    let mut alive = vec![true; g.len()];
    let mut set = Vec::new();
    for v in order {
        if alive[v] {
            set.push(v);
            alive[v] = false;
            for &u in g.neighbors(v) {
                alive[u as usize] = false;
            }
        }
    }
    set.sort_unstable();
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::tests_support::edge;
    use crate::packing::{to_conflict_graph, DEFAULT_CONFLICT_BUDGET};

    #[test]
    fn conflicting_edge_is_eliminated() {
        let h = MatchHypergraph::new(vec![edge(1, &[10, 11]), edge(2, &[11])]).unwrap();
        let s = imp_greedy(&h).unwrap();
        assert_eq!(s.objective, 2);
        assert_eq!(s.edges, vec![0]);
    }

    #[test]
    fn disjoint_edges_are_all_taken() {
        let h = MatchHypergraph::new(vec![edge(1, &[10]), edge(2, &[11, 12]), edge(3, &[13])]).unwrap();
        assert_eq!(imp_greedy(&h).unwrap().edges, vec![0, 1, 2]);
    }

    #[test]
    fn single_vertex_and_triangle() {
        assert_eq!(greedy_mis(&ConflictGraph::from_edges(vec![1], &[])), vec![0]);
        let g = ConflictGraph::from_edges(vec![1, 3, 2], &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(greedy_mis(&g), vec![1]);
    }

    #[test]
    fn both_greedy_pipelines_pick_the_same_edges() {
        let h = MatchHypergraph::new(vec![
            edge(1, &[10]),
            edge(1, &[10, 11]),
            edge(2, &[11]),
            edge(2, &[12]),
            edge(3, &[12, 13]),
        ])
        .unwrap();
        let g = to_conflict_graph(&h, DEFAULT_CONFLICT_BUDGET).unwrap();
        assert_eq!(greedy_mis(&g), imp_greedy(&h).unwrap().edges);
    }
}
