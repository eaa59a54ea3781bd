use std::cmp::Reverse;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trip::{RiderTrip, TripId};
use crate::Seconds;

use super::hypergraph::Match;

/// Caps on the number of matches kept per driver and rider.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    /// Percentage x of each driver's base matches kept.
    pub base_keep_percent: f64,
    /// Most matches y (of any size) per driver.
    pub driver_match_cap: usize,
    /// Most base matches z per rider.
    pub rider_base_cap: usize,
}

impl ReductionConfig {
    pub fn new(base_keep_percent: f64, driver_match_cap: usize, rider_base_cap: usize) -> Result<Self> {
        let cfg = Self { base_keep_percent, driver_match_cap, rider_base_cap };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Keeps every match.
    pub fn unreduced() -> Self {
        Self { base_keep_percent: 100.0, driver_match_cap: usize::MAX, rider_base_cap: usize::MAX }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_keep_percent > 0.0 && self.base_keep_percent <= 100.0) {
            return Err(Error::Config(format!("base_keep_percent must be in (0, 100], got {}", self.base_keep_percent)));
        }
        if self.driver_match_cap == 0 || self.rider_base_cap == 0 {
            return Err(Error::Config("match caps must be at least 1".into()));
        }
        Ok(())
    }

    /// Base matches a driver keeps out of `count`.
    pub fn keep_count(&self, count: usize) -> usize {
        let exact = self.base_keep_percent * count as f64 / 100.0;
        ((exact - 1e-9).ceil().max(0.0) as usize).min(count)
    }
}

fn saved(m: &Match, riders: &BTreeMap<TripId, &RiderTrip>) -> Seconds {
    let r = m.riders[0];
    riders[&r].baseline_transit_time - m.rider_time(r).expect("base match carries its rider")
}

/// Applies the caps to base matches grouped by driver (groups in driver order).
///
/// Ranking is by rider time saved, descending; drivers break ties by rider id,
/// riders by driver id.
pub(crate) fn reduce_base(
    per_driver: Vec<Vec<Match>>,
    riders: &BTreeMap<TripId, &RiderTrip>,
    cfg: &ReductionConfig,
) -> Vec<Vec<Match>> {
    let driver_rank = |m: &Match| (Reverse(saved(m, riders)), m.riders[0], m.match_type);
    let mut kept: Vec<Vec<Match>> = per_driver
        .into_iter()
        .map(|mut ms| {
            ms.sort_by_cached_key(driver_rank);
            ms.truncate(cfg.keep_count(ms.len()));
            ms
        })
        .collect();

    if cfg.rider_base_cap < usize::MAX {
        let mut by_rider: BTreeMap<TripId, Vec<(Reverse<Seconds>, TripId, usize, usize)>> = BTreeMap::new();
        for (g, ms) in kept.iter().enumerate() {
            for (k, m) in ms.iter().enumerate() {
                by_rider.entry(m.riders[0]).or_default().push((Reverse(saved(m, riders)), m.driver, g, k));
            }
        }
        let mut drop = vec![Vec::new(); kept.len()];
        for mut list in by_rider.into_values() {
            list.sort_by_key(|&(s, d, g, k)| (s, d, kept[g][k].match_type));
            for &(_, _, g, k) in list.iter().skip(cfg.rider_base_cap) {
                drop[g].push(k);
            }
        }
        for (ms, drop) in kept.iter_mut().zip(drop) {
            let mut k = 0;
            ms.retain(|_| {
                k += 1;
                !drop.contains(&(k - 1))
            });
        }
    }

    for ms in &mut kept {
        ms.truncate(cfg.driver_match_cap);
    }
    kept
}
