//! Synthetic weekday workloads: riders and drivers for each of the 72
//! fifteen-minute intervals from 6:00 to midnight.
//!
//! Rider areas come from per-period rules that map the magnitude of a
//! standard normal draw onto classes of areas. Drivers leave from the riders'
//! pick-up areas, one per three riders, with destinations drawn from the
//! demand heatmap.

mod profile;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::network::{AreaKind, LocationId, TransitNetwork};
use crate::trip::{DriverTrip, MatchType, RiderTrip, TripBatch, TripId};
use crate::Seconds;

pub use profile::{build_demand_profile, DemandProfile};

pub const INTERVALS: usize = 72;
pub const INTERVAL_SECONDS: Seconds = 900;
pub const FIRST_HOUR: usize = 6;
pub const HOURS: usize = 18;
/// Seconds since midnight at which interval 0 starts.
pub const DAY_START: Seconds = FIRST_HOUR as Seconds * 3600;

pub fn interval_start(t: usize) -> Seconds {
    DAY_START + t as Seconds * INTERVAL_SECONDS
}

/// Hour slot (0 for 6:00) containing interval `t`.
pub fn hour_of(t: usize) -> usize {
    t / 4
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimePeriod {
    MorningRush,
    MorningNormal,
    Noon,
    AfternoonNormal,
    AfternoonRush,
    Evening,
}

impl TimePeriod {
    pub const ALL: [TimePeriod; 6] = [
        TimePeriod::MorningRush,
        TimePeriod::MorningNormal,
        TimePeriod::Noon,
        TimePeriod::AfternoonNormal,
        TimePeriod::AfternoonRush,
        TimePeriod::Evening,
    ];

    /// Interval range covered, end exclusive.
    pub fn intervals(self) -> std::ops::Range<usize> {
        match self {
            TimePeriod::MorningRush => 0..12,
            TimePeriod::MorningNormal => 12..20,
            TimePeriod::Noon => 20..32,
            TimePeriod::AfternoonNormal => 32..40,
            TimePeriod::AfternoonRush => 40..52,
            TimePeriod::Evening => 52..72,
        }
    }

    pub fn of_interval(t: usize) -> TimePeriod {
        *Self::ALL.iter().find(|p| p.intervals().contains(&t)).unwrap_or(&TimePeriod::Evening)
    }

    pub fn is_peak(self) -> bool {
        matches!(self, TimePeriod::MorningRush | TimePeriod::AfternoonRush)
    }

    /// Pick-up and drop-off area rules.
    pub fn rules(self) -> (AreaRule, AreaRule) {
        use AreaKind::*;
        let c_d_a = AreaRule::Bands(vec![(2.0, vec![Community]), (3.0, vec![Downtown]), (f64::INFINITY, vec![Airport])]);
        match self {
            TimePeriod::MorningRush => (
                AreaRule::Bands(vec![(f64::INFINITY, vec![Community])]),
                AreaRule::Bands(vec![(2.0, vec![Downtown]), (3.0, vec![Airport]), (f64::INFINITY, vec![Community])]),
            ),
            TimePeriod::MorningNormal => (c_d_a, AreaRule::Uniform),
            TimePeriod::Noon => (AreaRule::Uniform, AreaRule::Uniform),
            TimePeriod::AfternoonNormal => (
                AreaRule::Bands(vec![(2.0, vec![Downtown, Airport]), (f64::INFINITY, vec![Community])]),
                AreaRule::Bands(vec![(2.0, vec![Community]), (f64::INFINITY, vec![Downtown, Airport])]),
            ),
            TimePeriod::AfternoonRush => (
                AreaRule::Bands(vec![(2.0, vec![Downtown]), (3.0, vec![Airport]), (f64::INFINITY, vec![Community])]),
                AreaRule::Bands(vec![(2.0, vec![Community]), (3.0, vec![Airport]), (f64::INFINITY, vec![Downtown])]),
            ),
            TimePeriod::Evening => (c_d_a.clone(), c_d_a),
        }
    }
}

/// How an area is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum AreaRule {
    /// Any area, uniformly.
    Uniform,
    /// Draw |Z| for a standard normal Z; the first band whose upper bound is at
    /// least |Z| gives the area kinds, then an area of those kinds is chosen
    /// uniformly.
    Bands(Vec<(f64, Vec<AreaKind>)>),
}

impl AreaRule {
    /// Index of the band selected by one draw.
    pub fn sample_band<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            AreaRule::Uniform => 0,
            AreaRule::Bands(bands) => {
                let z: f64 = rng.sample::<f64, _>(StandardNormal).abs();
                bands.iter().position(|(upper, _)| z <= *upper).unwrap_or(bands.len() - 1)
            }
        }
    }

    pub fn sample_area<R: Rng + ?Sized>(&self, rng: &mut R, by_kind: &dyn Fn(&[AreaKind]) -> Vec<usize>) -> usize {
        let pool = match self {
            AreaRule::Uniform => by_kind(&[AreaKind::Downtown, AreaKind::Community, AreaKind::Airport]),
            AreaRule::Bands(bands) => by_kind(&bands[self.sample_band(rng)].1),
        };
        pool[rng.random_range(0..pool.len())]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Total trips (riders and drivers) per interval at the middle of each
    /// hour from 6:00 to 23:00.
    pub hourly_trips: Vec<f64>,
    pub trip_scale: f64,
    /// Riders' share of all trips.
    pub rider_share: f64,
    /// Areas whose hubs are closer than this by car (either way) count as
    /// adjacent; no trip joins adjacent or identical areas.
    pub adjacent_threshold: Seconds,
    pub acceptance_rate: f64,
    /// Rider latest arrival: earliest departure plus this factor times the
    /// fastest transit time.
    pub rider_arrival_slack: f64,
    /// Earliest departures fall up to this long after the announcement.
    pub departure_window: Seconds,
    pub detour_min: Seconds,
    pub detour_max: Seconds,
    /// Driver latest arrival: earliest departure plus this factor times the
    /// maximum trip time.
    pub driver_arrival_slack: f64,
    /// Share of low-range vehicles in peak periods; the rest are mid-range.
    pub peak_low_share: f64,
    /// Low, mid and high range shares off peak.
    pub offpeak_shares: [f64; 3],
    /// Share of airport destinations in every heatmap column.
    pub airport_share: f64,
    /// Weight pulling heatmap cells toward their column mean.
    pub smoothing: f64,
    /// Share of Type 1 announcements in peak periods.
    pub peak_type1_share: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            hourly_trips: vec![
                650.0, 1050.0, 1150.0, 850.0, 600.0, 550.0, 600.0, 580.0, 620.0, 760.0, 1000.0, 1150.0, 1050.0,
                750.0, 600.0, 500.0, 420.0, 350.0,
            ],
            trip_scale: 1.0,
            rider_share: 0.75,
            adjacent_threshold: 300,
            acceptance_rate: 0.8,
            rider_arrival_slack: 1.5,
            departure_window: 2 * INTERVAL_SECONDS,
            detour_min: 300,
            detour_max: 1200,
            driver_arrival_slack: 1.5,
            peak_low_share: 0.95,
            offpeak_shares: [0.8, 0.1, 0.1],
            airport_share: 0.05,
            smoothing: 0.2,
            peak_type1_share: 0.5,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.hourly_trips.len() != HOURS || self.hourly_trips.iter().any(|&v| !(v >= 0.0)) {
            return bad("hourly_trips needs 18 nonnegative values");
        }
        if !(self.trip_scale >= 0.0) || !(self.rider_share > 0.0 && self.rider_share <= 1.0) {
            return bad("trip_scale must be >= 0 and rider_share in (0, 1]");
        }
        if !(self.acceptance_rate > 0.0 && self.acceptance_rate <= 1.0) {
            return bad("acceptance_rate must be in (0, 1]");
        }
        if self.detour_min < 0 || self.detour_max < self.detour_min || self.departure_window < 0 {
            return bad("detour bounds and departure window must be ordered and nonnegative");
        }
        if self.rider_arrival_slack < 1.0 || self.driver_arrival_slack < 1.0 {
            return bad("arrival slacks must be at least 1");
        }
        let shares = [self.peak_low_share, self.airport_share, self.smoothing, self.peak_type1_share];
        if shares.iter().any(|s| !(0.0..=1.0).contains(s))
            || self.offpeak_shares.iter().any(|s| !(*s >= 0.0))
            || (self.offpeak_shares.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return bad("shares must lie in [0, 1] and off-peak shares must sum to 1");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

/// Which areas are too close to be joined by a trip.
pub(crate) struct Adjacency {
    hub_time: Vec<Vec<Seconds>>,
    threshold: Seconds,
}

impl Adjacency {
    pub(crate) fn new(net: &TransitNetwork, threshold: Seconds) -> Self {
        let hubs: Vec<LocationId> = net.areas().iter().map(|a| a.hub).collect();
        let hub_time = hubs.iter().map(|&a| hubs.iter().map(|&b| net.car(a, b)).collect()).collect();
        Self { hub_time, threshold }
    }

    pub(crate) fn hub_time(&self, a: usize, b: usize) -> Seconds {
        self.hub_time[a][b]
    }

    pub(crate) fn far_apart(&self, a: usize, b: usize) -> bool {
        a != b && self.hub_time[a][b] >= self.threshold && self.hub_time[b][a] >= self.threshold
    }
}

/// Largest-remainder apportionment of `total` seats over `quotas`; ties go
/// to the lower index.
pub fn apportion(quotas: &[f64], total: usize) -> Vec<usize> {
    let mut seats: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
    let given: usize = seats.iter().sum();
    for &k in order.iter().cycle().take(total.saturating_sub(given)) {
        seats[k] += 1;
    }
    seats
}

/// One day of batches, indexed by interval.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Workload {
    pub intervals: Vec<TripBatch>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadManifest {
    pub seed: u64,
    pub config_hash: String,
    pub config: GeneratorConfig,
    pub files: Vec<String>,
}

pub struct WorkloadGenerator<'a> {
    net: &'a TransitNetwork,
    cfg: GeneratorConfig,
    profile: DemandProfile,
    adjacency: Adjacency,
    by_kind: Vec<(AreaKind, usize)>,
}

impl<'a> WorkloadGenerator<'a> {
    pub fn new(net: &'a TransitNetwork, cfg: GeneratorConfig) -> Result<Self> {
        cfg.validate()?;
        let kinds = [AreaKind::Downtown, AreaKind::Community, AreaKind::Airport];
        for k in kinds {
            if !net.areas().iter().any(|a| a.kind == k) {
                return Err(Error::Config(format!("network has no {k:?} area")));
            }
        }
        let adjacency = Adjacency::new(net, cfg.adjacent_threshold);
        let profile = profile::build_with(net, &cfg, &adjacency);
        let by_kind = net.areas().iter().enumerate().map(|(k, a)| (a.kind, k)).collect();
        Ok(Self { net, cfg, profile, adjacency, by_kind })
    }

    pub fn profile(&self) -> &DemandProfile {
        &self.profile
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.cfg
    }

    fn areas_of(&self, kinds: &[AreaKind]) -> Vec<usize> {
        self.by_kind.iter().filter(|(k, _)| kinds.contains(k)).map(|&(_, a)| a).collect()
    }

    fn rng(&self, t: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(t as u64);
        rng
    }

    fn random_location<R: Rng>(&self, rng: &mut R, area: usize) -> LocationId {
        let locs = &self.net.areas()[area].locations;
        locs[rng.random_range(0..locs.len())]
    }

    fn match_type<R: Rng>(&self, rng: &mut R, t: usize) -> MatchType {
        if !TimePeriod::of_interval(t).is_peak() {
            MatchType::Either
        } else if rng.random_bool(self.cfg.peak_type1_share) {
            MatchType::Type1
        } else {
            MatchType::Type2
        }
    }

    fn earliest_departure<R: Rng>(&self, rng: &mut R, t: usize) -> Seconds {
        let announced = interval_start(t) + rng.random_range(0..INTERVAL_SECONDS);
        announced + rng.random_range(0..=self.cfg.departure_window)
    }

    /// Riders of interval `t` plus the count per pick-up area.
    pub fn generate_riders(&self, t: usize, rng: &mut ChaCha8Rng, first_id: u64) -> Result<(Vec<RiderTrip>, Vec<usize>)> {
        let count = self.profile.riders.get(t).copied().unwrap_or(0);
        let (pick, drop) = TimePeriod::of_interval(t).rules();
        let pool = |kinds: &[AreaKind]| self.areas_of(kinds);
        let mut per_area = vec![0; self.net.areas().len()];
        let mut riders = Vec::with_capacity(count);
        for k in 0..count {
            let mut tries = 0;
            let (a, b) = loop {
                let a = pick.sample_area(rng, &pool);
                let b = drop.sample_area(rng, &pool);
                if self.adjacency.far_apart(a, b) {
                    break (a, b);
                }
                tries += 1;
                if tries > 10_000 {
                    return Err(Error::Config(format!("interval {t}: no pair of distant areas found")));
                }
            };
            per_area[a] += 1;
            let origin = self.random_location(rng, a);
            let destination = self.random_location(rng, b);
            let baseline = self.net.best_transit_route_time(origin, destination)?;
            let alpha = self.earliest_departure(rng, t);
            riders.push(RiderTrip {
                id: TripId(first_id + k as u64),
                origin,
                destination,
                earliest_departure: alpha,
                latest_arrival: alpha + (self.cfg.rider_arrival_slack * baseline as f64).floor() as Seconds,
                max_trip_time: baseline,
                acceptance_rate: self.cfg.acceptance_rate,
                baseline_transit_time: baseline,
                match_type: self.match_type(rng, t),
            });
        }
        Ok((riders, per_area))
    }

    /// Drivers of interval `t`: a third of the riders of each pick-up area,
    /// apportioned by largest remainder.
    pub fn generate_drivers(
        &self,
        t: usize,
        per_area: &[usize],
        rng: &mut ChaCha8Rng,
        first_id: u64,
    ) -> Result<Vec<DriverTrip>> {
        let quotas: Vec<f64> = per_area.iter().map(|&c| c as f64 / 3.0).collect();
        let total = (per_area.iter().sum::<usize>() as f64 / 3.0).round() as usize;
        let counts = apportion(&quotas, total);
        let hour = hour_of(t).min(HOURS - 1);
        let peak = TimePeriod::of_interval(t).is_peak();
        let mut drivers = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let weights = &self.profile.heatmap[hour][c];
            let dist = WeightedIndex::new(weights)
                .map_err(|e| Error::Config(format!("heatmap column {c} at hour {hour}: {e}")))?;
            for _ in 0..n {
                let r = dist.sample(rng);
                let origin = self.random_location(rng, c);
                let destination = self.random_location(rng, r);
                let direct = self.net.car_time(origin, destination)?;
                let capacity = if peak {
                    if rng.random_bool(self.cfg.peak_low_share) {
                        rng.random_range(1..=3)
                    } else {
                        rng.random_range(3..=5)
                    }
                } else {
                    let u: f64 = rng.random();
                    let [low, mid, _] = self.cfg.offpeak_shares;
                    if u < low {
                        rng.random_range(1..=3)
                    } else if u < low + mid {
                        rng.random_range(3..=5)
                    } else {
                        rng.random_range(4..=6)
                    }
                };
                let stop_limit = if capacity <= 3 { capacity } else { rng.random_range(capacity - 2..=capacity) };
                let hi = (2 * direct).min(self.cfg.detour_max);
                let detour = rng.random_range(self.cfg.detour_min.min(hi)..=hi);
                let alpha = self.earliest_departure(rng, t);
                let gamma = direct + detour;
                drivers.push(DriverTrip {
                    id: TripId(first_id + drivers.len() as u64),
                    origin,
                    destination,
                    capacity,
                    detour_limit: detour,
                    preferred_path: None,
                    stop_limit,
                    earliest_departure: alpha,
                    latest_arrival: alpha + (self.cfg.driver_arrival_slack * gamma as f64).floor() as Seconds,
                    max_trip_time: gamma,
                    match_type: self.match_type(rng, t),
                });
            }
        }
        Ok(drivers)
    }

    /// The batch of interval `t`. Ids are `(t + 1) · 100000 + k`, riders first.
    pub fn generate_interval(&self, t: usize) -> Result<TripBatch> {
        if t >= INTERVALS {
            return Err(Error::Config(format!("interval {t} out of range 0..{INTERVALS}")));
        }
        let mut rng = self.rng(t);
        let base = (t as u64 + 1) * 100_000;
        let (riders, per_area) = self.generate_riders(t, &mut rng, base)?;
        let drivers = self.generate_drivers(t, &per_area, &mut rng, base + riders.len() as u64)?;
        Ok(TripBatch { drivers, riders })
    }

    pub fn generate_day(&self) -> Result<Workload> {
        use rayon::prelude::*;
        let intervals = (0..INTERVALS).into_par_iter().map(|t| self.generate_interval(t)).collect::<Result<_>>()?;
        Ok(Workload { intervals })
    }
}

pub fn interval_file_name(t: usize) -> String {
    format!("interval_{t:02}.jsonl")
}

impl Workload {
    /// Writes one JSON-lines file per interval and `manifest.json`.
    pub fn save(&self, dir: &Path, cfg: &GeneratorConfig) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for (t, batch) in self.intervals.iter().enumerate() {
            let name = interval_file_name(t);
            batch.save(&dir.join(&name))?;
            files.push(name);
        }
        let manifest = WorkloadManifest { seed: cfg.seed, config_hash: cfg.hash(), config: cfg.clone(), files };
        let mut out = BufWriter::new(File::create(dir.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut out, &manifest)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    /// Reads the files listed in `manifest.json`.
    pub fn load(dir: &Path) -> Result<(Self, WorkloadManifest)> {
        let manifest: WorkloadManifest = serde_json::from_reader(BufReader::new(File::open(dir.join("manifest.json"))?))?;
        let intervals = manifest
            .files
            .iter()
            .enumerate()
            .map(|(t, f)| {
                TripBatch::load(&dir.join(f)).map_err(|e| Error::Interval { interval: t, source: Box::new(e) })
            })
            .collect::<Result<_>>()?;
        Ok((Self { intervals }, manifest))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{generate_network, NetworkGenConfig};

    #[test]
    fn periods_partition_the_day() {
        let mut seen = vec![0; INTERVALS];
        for p in TimePeriod::ALL {
            for t in p.intervals() {
                seen[t] += 1;
                assert_eq!(TimePeriod::of_interval(t), p);
            }
        }
        assert!(seen.iter().all(|&n| n == 1));
    }

    #[test]
    fn apportionment_hands_out_remainders_by_size() {
        assert_eq!(apportion(&[1.2, 0.7, 0.1], 2), vec![1, 1, 0]);
        assert_eq!(apportion(&[1.5, 1.5], 3), vec![2, 1]);
        assert_eq!(apportion(&[0.0, 0.0], 0), vec![0, 0]);
    }

    #[test]
    fn interval_totals_follow_the_curve() {
        let cfg = GeneratorConfig::default();
        for t in 0..INTERVALS {
            let total = profile::trips_in_interval(&cfg, t);
            assert!((350.0..=1150.0).contains(&total), "{t}: {total}");
        }
        let peak = profile::trips_in_interval(&cfg, 6);
        let noon = profile::trips_in_interval(&cfg, 24);
        assert!(peak > noon);
    }

    #[test]
    fn generated_trips_validate_and_are_reproducible() {
        let net = generate_network(&NetworkGenConfig::default(), 5).unwrap();
        let cfg = GeneratorConfig { trip_scale: 0.1, ..Default::default() };
        let g = WorkloadGenerator::new(&net, cfg.clone()).unwrap();
        for t in [0, 20, 45, 71] {
            let a = g.generate_interval(t).unwrap();
            a.validate(&net).unwrap();
            assert_eq!(a, WorkloadGenerator::new(&net, cfg.clone()).unwrap().generate_interval(t).unwrap());
            let peak = TimePeriod::of_interval(t).is_peak();
            assert!(a.riders.iter().all(|r| (r.match_type == MatchType::Either) != peak));
            assert_eq!(a.drivers.len(), (a.riders.len() as f64 / 3.0).round() as usize);
        }
    }

    #[test]
    fn zero_demand_gives_empty_batches() {
        let net = generate_network(&NetworkGenConfig::default(), 5).unwrap();
        let g = WorkloadGenerator::new(&net, GeneratorConfig { trip_scale: 0.0, ..Default::default() }).unwrap();
        assert!(g.generate_interval(3).unwrap().is_empty());
    }
}
