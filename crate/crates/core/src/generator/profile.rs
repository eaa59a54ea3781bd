use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Adjacency, GeneratorConfig, HOURS, FIRST_HOUR, INTERVALS};
use crate::network::{AreaKind, TransitNetwork};

/// Expected trips per interval and the driver origin–destination heatmap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandProfile {
    /// Riders a_t per interval.
    pub riders: Vec<usize>,
    /// `heatmap[h][c][r]`: driver flow from area c to area r during hour
    /// `FIRST_HOUR + h`.
    pub heatmap: Vec<Vec<Vec<f64>>>,
}

impl DemandProfile {
    /// Column total P(c, h) over destinations.
    pub fn column_total(&self, hour: usize, c: usize) -> f64 {
        self.heatmap[hour][c].iter().sum()
    }

    /// Destination probabilities of a driver leaving area c during hour h.
    pub fn destination_probabilities(&self, hour: usize, c: usize) -> Vec<f64> {
        let p = self.column_total(hour, c);
        self.heatmap[hour][c].iter().map(|d| if p > 0.0 { d / p } else { 0.0 }).collect()
    }
}

/// Total trips in interval `t`, interpolated linearly between hour midpoints.
pub(crate) fn trips_in_interval(cfg: &GeneratorConfig, t: usize) -> f64 {
    let hourly = &cfg.hourly_trips;
    let x = (t as f64 + 0.5) / 4.0 - 0.5;
    let lo = x.floor().clamp(0.0, (hourly.len() - 1) as f64) as usize;
    let hi = (lo + 1).min(hourly.len() - 1);
    let f = (x - lo as f64).clamp(0.0, 1.0);
    (hourly[lo] * (1.0 - f) + hourly[hi] * f) * cfg.trip_scale
}

/// Synthesizes the demand profile: riders per interval from the configured
/// curve, and a heatmap with inbound-downtown flow in the morning and
/// outbound flow in the afternoon.
pub fn build_demand_profile(net: &TransitNetwork, cfg: &GeneratorConfig) -> DemandProfile {
    let adjacency = Adjacency::new(net, cfg.adjacent_threshold);
    build_with(net, cfg, &adjacency)
}

pub(crate) fn build_with(net: &TransitNetwork, cfg: &GeneratorConfig, adjacency: &Adjacency) -> DemandProfile {
    let riders =
        (0..INTERVALS).map(|t| (trips_in_interval(cfg, t) * cfg.rider_share).round().max(0.0) as usize).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    let areas = net.areas();
    let n = areas.len();
    let mass = |k: AreaKind| match k {
        AreaKind::Downtown => 6.0,
        AreaKind::Community => 1.0,
        AreaKind::Airport => 1.0,
    };
    let mut heatmap = Vec::with_capacity(HOURS);
    for h in 0..HOURS {
        let hour = FIRST_HOUR + h;
        let morning = (6..10).contains(&hour);
        let afternoon = (15..19).contains(&hour);
        let mut columns = Vec::with_capacity(n);
        for c in 0..n {
            let mut col: Vec<f64> = (0..n)
                .map(|r| {
                    if !adjacency.far_apart(c, r) {
                        return 0.0;
                    }
                    let minutes = adjacency.hub_time(c, r) as f64 / 60.0;
                    let mut d = mass(areas[r].kind) / (1.0 + minutes / 10.0);
                    let into = areas[r].kind == AreaKind::Downtown;
                    let out_of = areas[c].kind == AreaKind::Downtown;
                    if morning {
                        d *= if into { 3.0 } else if out_of { 0.5 } else { 1.0 };
                    }
                    if afternoon {
                        d *= if out_of { 3.0 } else if into { 0.5 } else { 1.0 };
                    }
                    d * rng.random_range(0.8..1.2) * 40.0
                })
                .collect();
            // pull cells toward the column mean
            let nonzero: Vec<f64> = col.iter().copied().filter(|&d| d > 0.0).collect();
            if !nonzero.is_empty() {
                let mean = nonzero.iter().sum::<f64>() / nonzero.len() as f64;
                for d in col.iter_mut().filter(|d| **d > 0.0) {
                    *d = (1.0 - cfg.smoothing) * *d + cfg.smoothing * mean;
                }
            }
            // fixed airport share of the column
            let is_airport = |r: usize| areas[r].kind == AreaKind::Airport;
            let air: f64 = (0..n).filter(|&r| is_airport(r)).map(|r| col[r]).sum();
            let total: f64 = col.iter().sum();
            if air > 0.0 && total > air {
                for (r, d) in col.iter_mut().enumerate() {
                    *d *= if is_airport(r) {
                        cfg.airport_share * total / air
                    } else {
                        (1.0 - cfg.airport_share) * total / (total - air)
                    };
                }
            }
            columns.push(col);
        }
        heatmap.push(columns);
    }
    DemandProfile { riders, heatmap }
}
