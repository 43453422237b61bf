//! Event-driven simulation of the branching process.
//!
//! Every particle carries its own exponential clock; deaths are processed in
//! `(time, id)` order from a priority queue. Replicate `r` draws from a
//! ChaCha8 stream seeded by a hash of `(seed, r)`, so replicates can be run
//! in any order or in parallel and folded afterwards with
//! [`SimOutcome::from_replicates`].

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::error::{domain, Error, Result};
use crate::math::sqrt;
use crate::model::BranchingModel;

/// Default population cap per replicate.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// Fewest surviving replicates [`lcl_estimate`] will condition on.
pub const MIN_SURVIVORS: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: BranchingModel,
    pub horizon: f64,
    pub replicates: u64,
    pub seed: u64,
    pub cap: u64,
    /// Times at which the population is recorded, all in `[0, horizon]`.
    /// The horizon is always recorded.
    pub checkpoints: Vec<f64>,
}

impl SimConfig {
    pub fn new(model: BranchingModel, horizon: f64, replicates: u64, seed: u64) -> Self {
        Self { model, horizon, replicates, seed, cap: DEFAULT_CAP, checkpoints: Vec::new() }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<f64>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(domain(format!("horizon must be finite and nonnegative, got {}", self.horizon)));
        }
        if self.replicates == 0 {
            return Err(domain("need at least one replicate"));
        }
        if self.cap == 0 {
            return Err(domain("population cap must be positive"));
        }
        if let Some(t) = self.checkpoints.iter().find(|&&t| !(t >= 0.0 && t <= self.horizon)) {
            return Err(domain(format!("checkpoint {t} outside [0, {}]", self.horizon)));
        }
        Ok(())
    }

    /// Sorted, deduplicated checkpoints ending at the horizon.
    pub fn times(&self) -> Vec<f64> {
        let mut ts = self.checkpoints.clone();
        ts.push(self.horizon);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }
}

/// Population of one replicate at each checkpoint; `None` once the cap was exceeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicateResult {
    pub populations: Vec<Option<u64>>,
}

impl ReplicateResult {
    pub fn truncated(&self) -> bool {
        self.populations.iter().any(Option::is_none)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    id: u64,
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.id.cmp(&other.id))
    }
}

/// SplitMix64 finaliser applied to `seed` and the replicate index.
pub fn substream_seed(seed: u64, replicate: u64) -> u64 {
    let mut z = seed ^ replicate.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs replicate `r` of `config` (assumed valid) from one particle at time 0.
pub fn simulate_replicate(config: &SimConfig, times: &[f64], r: u64) -> ReplicateResult {
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(config.seed, r));
    let lifetime = Exp::new(config.model.k()).expect("K > 0");
    let offspring = Poisson::new(config.model.lambda()).expect("lambda > 0");
    let mut queue = BinaryHeap::new();
    let mut next_id = 0u64;
    let mut spawn = |queue: &mut BinaryHeap<Reverse<Event>>, rng: &mut ChaCha8Rng, now: f64| {
        let time = now + lifetime.sample(rng);
        queue.push(Reverse(Event { time, id: next_id }));
        next_id += 1;
    };
    spawn(&mut queue, &mut rng, 0.0);
    let mut populations = vec![None; times.len()];
    let mut truncated = false;
    for (slot, &t) in populations.iter_mut().zip(times) {
        while !truncated {
            match queue.peek() {
                Some(Reverse(e)) if e.time <= t => {}
                _ => break,
            }
            let Reverse(event) = queue.pop().expect("peeked");
            let children = offspring.sample(&mut rng) as u64;
            if queue.len() as u64 + children > config.cap {
                truncated = true;
                break;
            }
            for _ in 0..children {
                spawn(&mut queue, &mut rng, event.time);
            }
        }
        if !truncated {
            *slot = Some(queue.len() as u64);
        }
    }
    ReplicateResult { populations }
}

/// Population histogram at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    /// Population size → number of replicates; truncated replicates are excluded.
    pub histogram: BTreeMap<u64, u64>,
    pub truncated: u64,
    pub extinct_fraction: f64,
    /// Binomial standard error of `extinct_fraction`.
    pub extinct_se: f64,
    /// Mean population over untruncated replicates.
    pub mean_estimate: f64,
    pub mean_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub replicates: u64,
    pub checkpoints: Vec<Checkpoint>,
    /// Replicates that exceeded the cap at some point.
    pub truncated: u64,
}

impl SimOutcome {
    /// Folds replicate results given in replicate-index order.
    pub fn from_replicates(config: &SimConfig, results: &[ReplicateResult]) -> Result<Self> {
        let times = config.times();
        let r = results.len() as u64;
        let truncated = results.iter().filter(|x| x.truncated()).count() as u64;
        if truncated == r {
            return Err(Error::Statistical(format!(
                "all {r} replicates exceeded the population cap {}",
                config.cap
            )));
        }
        let mut checkpoints = Vec::with_capacity(times.len());
        for (i, &t) in times.iter().enumerate() {
            let mut histogram = BTreeMap::new();
            let mut cut = 0;
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for res in results {
                match res.populations[i] {
                    Some(n) => {
                        *histogram.entry(n).or_insert(0) += 1;
                        let x = n as f64;
                        sum += x;
                        sum_sq += x * x;
                    }
                    None => cut += 1,
                }
            }
            let kept = (r - cut) as f64;
            let extinct = histogram.get(&0).copied().unwrap_or(0) as f64;
            let p = extinct / r as f64;
            let mean = if kept > 0.0 { sum / kept } else { f64::NAN };
            let var = if kept > 1.0 { (sum_sq - kept * mean * mean).max(0.0) / (kept - 1.0) } else { f64::NAN };
            checkpoints.push(Checkpoint {
                t,
                histogram,
                truncated: cut,
                extinct_fraction: p,
                extinct_se: sqrt(p * (1.0 - p) / r as f64),
                mean_estimate: mean,
                mean_se: sqrt(var / kept),
            });
        }
        Ok(Self { replicates: r, checkpoints, truncated })
    }

    /// The checkpoint at the horizon.
    pub fn at_horizon(&self) -> &Checkpoint {
        self.checkpoints.last().expect("horizon is always recorded")
    }
}

/// Runs every replicate in index order.
pub fn simulate(config: &SimConfig) -> Result<SimOutcome> {
    config.validate()?;
    let times = config.times();
    let results: Vec<ReplicateResult> =
        (0..config.replicates).map(|r| simulate_replicate(config, &times, r)).collect();
    SimOutcome::from_replicates(config, &results)
}

/// Empirical law of `X(t)` given `X(t) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LclEstimate {
    pub survivors: u64,
    pub replicates: u64,
    /// `(n, p̂_n, se_n)` with multinomial standard errors.
    pub entries: Vec<(u64, f64, f64)>,
}

impl LclEstimate {
    pub fn get(&self, n: u64) -> Option<(f64, f64)> {
        self.entries.iter().find(|e| e.0 == n).map(|e| (e.1, e.2))
    }
}

/// Conditional histogram at the horizon from an outcome. Fails when fewer
/// than [`MIN_SURVIVORS`] replicates survive.
pub fn lcl_from_outcome(outcome: &SimOutcome) -> Result<LclEstimate> {
    let cp = outcome.at_horizon();
    let survivors: u64 = cp.histogram.iter().filter(|(&n, _)| n > 0).map(|(_, &c)| c).sum();
    if survivors < MIN_SURVIVORS {
        let rate = survivors.max(1) as f64 / outcome.replicates as f64;
        let needed = (MIN_SURVIVORS as f64 / rate) as u64;
        return Err(Error::Statistical(format!(
            "only {survivors} of {} replicates survive; about {needed} replicates are needed",
            outcome.replicates
        )));
    }
    let m = survivors as f64;
    let entries = cp
        .histogram
        .iter()
        .filter(|(&n, _)| n > 0)
        .map(|(&n, &c)| {
            let p = c as f64 / m;
            (n, p, sqrt(p * (1.0 - p) / m))
        })
        .collect();
    Ok(LclEstimate { survivors, replicates: outcome.replicates, entries })
}

/// Simulates and conditions on survival; needs `λ < 1`.
pub fn lcl_estimate(config: &SimConfig) -> Result<LclEstimate> {
    if !(config.model.lambda() < 1.0) {
        return Err(domain("the limit conditional law needs lambda < 1"));
    }
    lcl_from_outcome(&simulate(config)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;

    fn model(lambda: f64) -> BranchingModel {
        BranchingModel::with_lambda(lambda).unwrap()
    }

    #[test]
    fn time_zero_is_one_particle() {
        let out = simulate(&SimConfig::new(model(2.0), 0.0, 50, 1)).unwrap();
        let cp = out.at_horizon();
        assert_eq!(cp.histogram.get(&1), Some(&50));
        assert_eq!(cp.extinct_fraction, 0.0);
    }

    #[test]
    fn deterministic_and_order_independent() {
        let cfg = SimConfig::new(model(0.9), 2.0, 200, 7).with_checkpoints(vec![0.5, 1.0]);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        let times = cfg.times();
        let mut rev: Vec<_> = (0..200).rev().map(|r| simulate_replicate(&cfg, &times, r)).collect();
        rev.reverse();
        assert_eq!(SimOutcome::from_replicates(&cfg, &rev).unwrap(), a);
        assert_eq!(a.checkpoints.len(), 3);
        for cp in &a.checkpoints {
            assert_eq!(cp.histogram.values().sum::<u64>() + cp.truncated, 200);
        }
    }

    #[test]
    fn mean_is_close() {
        let cfg = SimConfig::new(model(0.5), 1.0, 20_000, 3);
        let cp = simulate(&cfg).unwrap().at_horizon().clone();
        assert!((cp.mean_estimate - exp(-0.5)).abs() <= 4.0 * cp.mean_se);
    }

    #[test]
    fn cap_truncates() {
        let cfg = SimConfig::new(model(1.5), 10.0, 200, 5).with_cap(20);
        let out = simulate(&cfg).unwrap();
        assert!(out.truncated > 0 && out.truncated < 200);
        let cp = out.at_horizon();
        assert_eq!(cp.histogram.values().sum::<u64>() + cp.truncated, 200);
        let all = SimConfig::new(model(3.0), 10.0, 20, 5).with_cap(50);
        assert!(matches!(simulate(&all), Err(Error::Statistical(_))));
    }

    #[test]
    fn conditioning_guard() {
        let cfg = SimConfig::new(model(0.2), 30.0, 50, 9);
        assert!(matches!(lcl_estimate(&cfg), Err(Error::Statistical(_))));
        let cfg = SimConfig::new(model(0.5), 1.0, 5_000, 9);
        let est = lcl_estimate(&cfg).unwrap();
        let total: f64 = est.entries.iter().map(|e| e.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(lcl_estimate(&SimConfig::new(model(2.0), 1.0, 10, 1)).is_err());
    }

    #[test]
    fn invalid_configs() {
        assert!(simulate(&SimConfig::new(model(0.5), -1.0, 10, 0)).is_err());
        assert!(simulate(&SimConfig::new(model(0.5), 1.0, 0, 0)).is_err());
        assert!(simulate(&SimConfig::new(model(0.5), 1.0, 10, 0).with_checkpoints(vec![2.0])).is_err());
    }
}
