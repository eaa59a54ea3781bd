use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::ConflictGraph;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImprovementRule {
    /// Apply the first improving claw found.
    AnyImp,
    /// Apply the claw with the largest gain in each round.
    BestImp,
}

/// How talons and the vertices they displace are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImprovementMetric {
    Weight,
    WeightSquared,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    pub rule: ImprovementRule,
    pub metric: ImprovementMetric,
    /// Most talons per claw; the conflict graph of matches with at most K
    /// riders needs K + 1.
    pub max_talons: usize,
    /// Wall-clock limit on the search for one improvement.
    pub round_limit: Option<Duration>,
}

impl LocalSearchConfig {
    pub fn new(rule: ImprovementRule, max_talons: usize) -> Self {
        Self { rule, metric: ImprovementMetric::WeightSquared, max_talons: max_talons.max(1), round_limit: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSearchOutcome {
    /// Final independent set, ascending.
    pub set: Vec<usize>,
    pub improvements: usize,
    /// True when a round hit the time limit.
    pub timed_out: bool,
}

struct Improvement {
    talons: Vec<usize>,
    gain: u64,
}

struct ClawSearch<'g> {
    g: &'g ConflictGraph,
    cfg: LocalSearchConfig,
    in_set: Vec<bool>,
    /// Per vertex of the set: how many chosen talons it is adjacent to.
    hit: Vec<u32>,
    talons: Vec<usize>,
    removed_w: u64,
    removed_sq: u64,
    added_w: u64,
    added_sq: u64,
    deadline: Option<Instant>,
    steps: u64,
    timed_out: bool,
    best: Option<Improvement>,
}

impl ClawSearch<'_> {
    fn out_of_time(&mut self) -> bool {
        self.steps += 1;
        if !self.timed_out && self.steps % 256 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
        }
        self.timed_out
    }

    fn push(&mut self, t: usize) {
        let w = self.g.weight(t) as u64;
        self.added_w += w;
        self.added_sq += w * w;
        for &u in self.g.neighbors(t) {
            let u = u as usize;
            if self.in_set[u] {
                if self.hit[u] == 0 {
                    let w = self.g.weight(u) as u64;
                    self.removed_w += w;
                    self.removed_sq += w * w;
                }
                self.hit[u] += 1;
            }
        }
        self.talons.push(t);
    }

    fn pop(&mut self) {
        let t = self.talons.pop().expect("talon stack is nonempty");
        let w = self.g.weight(t) as u64;
        self.added_w -= w;
        self.added_sq -= w * w;
        for &u in self.g.neighbors(t) {
            let u = u as usize;
            if self.in_set[u] {
                self.hit[u] -= 1;
                if self.hit[u] == 0 {
                    let w = self.g.weight(u) as u64;
                    self.removed_w -= w;
                    self.removed_sq -= w * w;
                }
            }
        }
    }

    /// Gain of the current talons, if they improve the set.
    fn gain(&self) -> Option<u64> {
        // never lose served riders, whatever the metric
        if self.added_w < self.removed_w {
            return None;
        }
        let (add, rem) = match self.cfg.metric {
            ImprovementMetric::Weight => (self.added_w, self.removed_w),
            ImprovementMetric::WeightSquared => (self.added_sq, self.removed_sq),
        };
        (add > rem).then(|| add - rem)
    }

    /// Records the current talons; returns true when the search should stop.
    fn offer(&mut self) -> bool {
        let Some(gain) = self.gain() else { return false };
        if self.best.as_ref().is_none_or(|b| gain > b.gain) {
            self.best = Some(Improvement { talons: self.talons.clone(), gain });
        }
        self.cfg.rule == ImprovementRule::AnyImp
    }

    /// Whether talons of weight at most `w` in the `slots` still open could
    /// make the current talons an improvement.
    fn promising(&self, slots: u64, w: u64) -> bool {
        let add_w = self.added_w + slots * w;
        match self.cfg.metric {
            ImprovementMetric::Weight => add_w > self.removed_w,
            ImprovementMetric::WeightSquared => add_w >= self.removed_w && self.added_sq + slots * w * w > self.removed_sq,
        }
    }

    /// Extends the talon set with candidates from `cands[from..]`, which are
    /// sorted by weight, heaviest first.
    fn extend(&mut self, cands: &[usize], from: usize) -> bool {
        let slots = (self.cfg.max_talons - self.talons.len()) as u64;
        if slots == 0 {
            return false;
        }
        for k in from..cands.len() {
            if self.out_of_time() {
                return true;
            }
            let c = cands[k];
            // removed weight only grows, so lighter candidates cannot help
            if !self.promising(slots, self.g.weight(c) as u64) {
                break;
            }
            if self.talons.iter().any(|&t| self.g.adjacent(t, c)) {
                continue;
            }
            self.push(c);
            let stop = self.offer() || self.extend(cands, k + 1);
            self.pop();
            if stop {
                return true;
            }
        }
        false
    }

    /// Searches claws centered at every vertex, starting at `first` and
    /// wrapping around. Returns the center where the search stopped early
    /// (improvement found under AnyImp, or out of time).
    fn scan(&mut self, first: usize) -> Option<usize> {
        let n = self.g.len();
        for center in (first..n).chain(0..first) {
            if !self.in_set[center] {
                // a lone talon: the center itself
                self.push(center);
                let stop = self.offer();
                self.pop();
                if stop {
                    return Some(center);
                }
            }
            let mut cands: Vec<usize> =
                self.g.neighbors(center).iter().map(|&u| u as usize).filter(|&u| !self.in_set[u]).collect();
            cands.sort_by_key(|&u| (std::cmp::Reverse(self.g.weight(u)), u));
            if self.extend(&cands, 0) {
                return Some(center);
            }
        }
        None
    }
}

/// Improves an independent set by claw swaps: a set T of pairwise
/// nonadjacent vertices outside the set, all adjacent to one center, replaces
/// the set's vertices adjacent to T when that raises the metric (and never
/// lowers total weight). Stops when no claw improves, or when one round's
/// search exceeds the time limit. Under AnyImp each round resumes at the
/// center of the previous improvement.
pub fn local_search(g: &ConflictGraph, initial: &[usize], cfg: LocalSearchConfig) -> Result<LocalSearchOutcome> {
    g.check_independent(initial)?;
    let mut in_set = vec![false; g.len()];
    for &v in initial {
        in_set[v] = true;
    }
    let mut improvements = 0;
    let mut timed_out = false;
    let mut first = 0;
    loop {
        let mut search = ClawSearch {
            g,
            cfg,
            in_set,
            hit: vec![0; g.len()],
            talons: Vec::new(),
            removed_w: 0,
            removed_sq: 0,
            added_w: 0,
            added_sq: 0,
            deadline: cfg.round_limit.map(|l| Instant::now() + l),
            steps: 0,
            timed_out: false,
            best: None,
        };
        if let Some(center) = search.scan(first) {
            first = center;
        }
        in_set = std::mem::take(&mut search.in_set);
        if search.timed_out {
            timed_out = true;
        }
        // under a time limit, a found improvement is still applied
        let Some(best) = search.best else { break };
        for &t in &best.talons {
            for &u in g.neighbors(t) {
                in_set[u as usize] = false;
            }
        }
        for &t in &best.talons {
            in_set[t] = true;
        }
        improvements += 1;
        if timed_out {
            break;
        }
    }
    let set: Vec<usize> = (0..g.len()).filter(|&v| in_set[v]).collect();
    debug_assert!(g.check_independent(&set).is_ok());
    Ok(LocalSearchOutcome { set, improvements, timed_out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rule: ImprovementRule) -> LocalSearchConfig {
        LocalSearchConfig::new(rule, 3)
    }

    #[test]
    fn optimal_path_set_is_unchanged() {
        let g = ConflictGraph::from_edges(vec![1, 1, 1], &[(0, 1), (1, 2)]);
        for rule in [ImprovementRule::AnyImp, ImprovementRule::BestImp] {
            let out = local_search(&g, &[0, 2], cfg(rule)).unwrap();
            assert_eq!(out.set, vec![0, 2]);
            assert_eq!(out.improvements, 0);
        }
    }

    #[test]
    fn lighter_vertex_is_swapped_for_heavier_neighbor() {
        let g = ConflictGraph::from_edges(vec![1, 2], &[(0, 1)]);
        for rule in [ImprovementRule::AnyImp, ImprovementRule::BestImp] {
            assert_eq!(local_search(&g, &[0], cfg(rule)).unwrap().set, vec![1]);
        }
    }

    #[test]
    fn two_talons_replace_their_shared_neighbor() {
        // star: center 0 (weight 2) with leaves 1, 2 (weight 2 each)
        let g = ConflictGraph::from_edges(vec![2, 2, 2], &[(0, 1), (0, 2)]);
        let out = local_search(&g, &[0], cfg(ImprovementRule::AnyImp)).unwrap();
        assert_eq!(out.set, vec![1, 2]);
    }

    #[test]
    fn squared_metric_never_loses_weight() {
        // one vertex of weight 3 against two of weight 2: 9 > 8 but 3 < 4
        let g = ConflictGraph::from_edges(vec![3, 2, 2], &[(0, 1), (0, 2)]);
        let out = local_search(&g, &[1, 2], cfg(ImprovementRule::BestImp)).unwrap();
        assert_eq!(out.set, vec![1, 2]);
    }

    #[test]
    fn missing_vertices_are_added() {
        let g = ConflictGraph::from_edges(vec![1, 1], &[]);
        assert_eq!(local_search(&g, &[], cfg(ImprovementRule::AnyImp)).unwrap().set, vec![0, 1]);
    }

    #[test]
    fn rejects_dependent_input() {
        let g = ConflictGraph::from_edges(vec![1, 1], &[(0, 1)]);
        assert!(local_search(&g, &[0, 1], cfg(ImprovementRule::AnyImp)).is_err());
    }
}
