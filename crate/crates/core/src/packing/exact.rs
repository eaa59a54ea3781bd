use std::time::{Duration, Instant};

use crate::error::Result;
use crate::feasibility::MatchHypergraph;

use super::{imp_greedy, Solution};

pub struct ExactOutcome {
    pub solution: Solution,
    /// False when the time budget ran out before the search finished.
    pub optimal: bool,
    /// Search nodes visited.
    pub nodes: u64,
}

struct Bnb {
    /// Per driver (most riders first): its edges as (index, rider bitmask).
    drivers: Vec<Vec<(usize, Vec<u64>, usize)>>,
    /// `suffix[k]`: sum over drivers k.. of their largest edge size.
    suffix: Vec<usize>,
    rider_count: usize,
    used: Vec<u64>,
    chosen: Vec<usize>,
    best: usize,
    best_set: Vec<usize>,
    deadline: Option<Instant>,
    nodes: u64,
    aborted: bool,
}

impl Bnb {
    fn dfs(&mut self, k: usize, value: usize, covered: usize) {
        self.nodes += 1;
        if self.nodes % 4096 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.aborted = true;
        }
        if self.aborted {
            return;
        }
        if k == self.drivers.len() {
            if value > self.best {
                self.best = value;
                self.best_set = self.chosen.clone();
            }
            return;
        }
        let bound = value + self.suffix[k].min(self.rider_count - covered);
        if bound <= self.best {
            return;
        }
        for e in 0..self.drivers[k].len() {
            let (idx, ref mask, size) = self.drivers[k][e];
            if mask.iter().zip(&self.used).any(|(m, u)| m & u != 0) {
                continue;
            }
            let mask = mask.clone();
            for (u, m) in self.used.iter_mut().zip(&mask) {
                *u |= m;
            }
            self.chosen.push(idx);
            self.dfs(k + 1, value + size, covered + size);
            self.chosen.pop();
            for (u, m) in self.used.iter_mut().zip(&mask) {
                *u &= !m;
            }
            if self.aborted {
                return;
            }
        }
        self.dfs(k + 1, value, covered);
    }
}

/// Maximizes riders served by branch-and-bound over drivers. Each driver takes
/// one of its matches or none; the bound adds, per undecided driver, its
/// largest match size, capped by the riders still uncovered.
///
/// With a `budget`, the search stops when it runs out and returns the best
/// solution found, flagged non-optimal.
pub fn exact_solve(h: &MatchHypergraph, budget: Option<Duration>) -> Result<ExactOutcome> {
    let start = Instant::now();
    let riders = h.riders();
    let words = riders.len().div_ceil(64).max(1);
    let mut drivers: Vec<Vec<(usize, Vec<u64>, usize)>> = h
        .drivers()
        .iter()
        .map(|&d| {
            let mut es: Vec<(usize, Vec<u64>, usize)> = h
                .driver_edges(d)
                .map(|(k, e)| {
                    let mut mask = vec![0u64; words];
                    for r in &e.riders {
                        let i = riders.binary_search(r).expect("rider is a vertex");
                        mask[i / 64] |= 1 << (i % 64);
                    }
                    (k, mask, e.size())
                })
                .collect();
            es.sort_by_key(|&(k, _, size)| (std::cmp::Reverse(size), k));
            es
        })
        .collect();
    drivers.sort_by_key(|es| std::cmp::Reverse(es.first().map_or(0, |e| e.2)));
    let mut suffix = vec![0; drivers.len() + 1];
    for k in (0..drivers.len()).rev() {
        suffix[k] = suffix[k + 1] + drivers[k].first().map_or(0, |e| e.2);
    }

    let incumbent = imp_greedy(h)?;
    let mut bnb = Bnb {
        drivers,
        suffix,
        rider_count: riders.len(),
        used: vec![0; words],
        chosen: Vec::new(),
        best: incumbent.objective,
        best_set: incumbent.edges.clone(),
        deadline: budget.map(|b| start + b),
        nodes: 0,
        aborted: false,
    };
    bnb.dfs(0, 0, 0);
    Ok(ExactOutcome {
        solution: Solution::from_edges("exact", h, bnb.best_set)?,
        optimal: !bnb.aborted,
        nodes: bnb.nodes,
    })
}
