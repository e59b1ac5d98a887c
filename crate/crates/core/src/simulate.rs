//! Monte Carlo replay of search paths under a fixed frontier sequence.
//!
//! Each run draws feasibility and, when feasible, the location of the
//! successful project, then walks the per-period intervals until success or
//! the censoring horizon. Run `i` draws from stream `i` of a ChaCha generator
//! keyed by the seed, so any run can be reproduced on its own and batches
//! split across threads without changing the result.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SearchError};
use crate::model::ModelParams;
use crate::solver::FrontierPath;

/// Censoring horizon used when none is given.
pub const DEFAULT_HORIZON_CAP: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub runs: u64,
    /// Periods simulated before a path still searching is censored.
    pub horizon_cap: usize,
    pub seed: u64,
    pub params: ModelParams,
    pub path: FrontierPath,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(SearchError::InvalidConfig {
                field: "runs",
                reason: "must be at least 1".into(),
            });
        }
        if self.horizon_cap == 0 {
            return Err(SearchError::InvalidConfig {
                field: "horizon_cap",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Generator for run `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// One simulated search history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub feasible: bool,
    pub hot_project: Option<f64>,
    /// Period in which the innovation was found.
    pub success_period: Option<usize>,
    /// Still searching at the censoring horizon.
    pub censored: bool,
    /// `μ(L_t)` for every period searched.
    pub per_period_intensity: Vec<f64>,
}

/// Period `t ≤ limit` whose interval `[l_{t−1}, l_t)` contains `hot`.
fn success_period(path: &FrontierPath, hot: f64, limit: usize) -> Option<usize> {
    let b = path.boundaries();
    let last = limit.min(path.horizon());
    // first t with hot < l_t; intervals are half-open so hot == l_t belongs to t+1
    let t = b[..=last].partition_point(|&l| l <= hot);
    (t >= 1 && t <= last).then_some(t)
}

/// Replays one run of `config` with the given randomness source.
pub fn simulate_path<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> PathRecord {
    let feasible = rng.random::<f64>() < config.params.p();
    let hot_project = feasible.then(|| rng.random::<f64>());
    replay(config, hot_project)
}

fn replay(config: &SimConfig, hot_project: Option<f64>) -> PathRecord {
    let found = hot_project.and_then(|hot| success_period(&config.path, hot, config.horizon_cap));
    let periods = found.unwrap_or(config.horizon_cap);
    let per_period_intensity = (1..=periods)
        .map(|t| config.path.frontier_after(t) - config.path.frontier_after(t - 1))
        .collect();
    PathRecord {
        feasible: hot_project.is_some(),
        hot_project,
        success_period: found,
        censored: found.is_none(),
        per_period_intensity,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub runs: u64,
    /// Entry `t − 1`: fraction of runs still searching at the start of period `t`.
    pub active_fraction: Vec<f64>,
    /// Entry `t − 1`: fraction of runs that succeeded by the end of period `t`.
    pub success_fraction: Vec<f64>,
    /// Entry `t − 1`: three binomial standard deviations of the active
    /// fraction around `1 − p·l_{t−1}`.
    pub confidence_halfwidths: Vec<f64>,
    pub mean_discounted_payoff: f64,
    /// Standard error of the mean discounted payoff.
    pub payoff_std_error: f64,
    pub censored_fraction: f64,
}

/// Realized discounted payoff of a run that succeeds in period `success`
/// (or never, within `horizon_cap` periods).
fn realized_payoffs(config: &SimConfig) -> (Vec<f64>, f64) {
    let params = &config.params;
    let mut by_success = Vec::with_capacity(config.horizon_cap);
    let mut paid = 0.0;
    let mut discount = 1.0;
    for t in 1..=config.horizon_cap {
        let (a, b) = (config.path.frontier_after(t - 1), config.path.frontier_after(t));
        paid += discount * params.cost().integral_unchecked(a, b);
        by_success.push(discount * params.v() - paid);
        discount *= params.delta();
    }
    (by_success, -paid)
}

/// Aggregates `config.runs` independent runs; bit-identical for a fixed seed.
pub fn simulate_batch(config: &SimConfig) -> Result<AggregateStats> {
    config.validate()?;
    let cap = config.horizon_cap;
    let outcomes: Vec<Option<usize>> = (0..config.runs)
        .into_par_iter()
        .map(|i| simulate_path(config, &mut config.stream(i)).success_period)
        .collect();

    let mut successes = vec![0u64; cap + 1];
    let mut censored = 0u64;
    for s in &outcomes {
        match s {
            Some(t) => successes[*t] += 1,
            None => censored += 1,
        }
    }

    let runs = config.runs as f64;
    let p = config.params.p();
    let mut active_fraction = Vec::with_capacity(cap);
    let mut success_fraction = Vec::with_capacity(cap);
    let mut confidence_halfwidths = Vec::with_capacity(cap);
    let mut found = 0u64;
    for t in 1..=cap {
        active_fraction.push((config.runs - found) as f64 / runs);
        found += successes[t];
        success_fraction.push(found as f64 / runs);
        let q = 1.0 - p * config.path.frontier_after(t - 1);
        confidence_halfwidths.push(3.0 * (q * (1.0 - q) / runs).sqrt());
    }

    let (by_success, never) = realized_payoffs(config);
    let payoff = |t: usize| if t == 0 { never } else { by_success[t - 1] };
    let counts = std::iter::once(censored).chain(successes[1..].iter().copied());
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (t, count) in counts.enumerate() {
        let x = payoff(t);
        sum += count as f64 * x;
        sum_sq += count as f64 * x * x;
    }
    let mean = sum / runs;
    let var = if config.runs > 1 {
        ((sum_sq - runs * mean * mean) / (runs - 1.0)).max(0.0)
    } else {
        0.0
    };

    Ok(AggregateStats {
        runs: config.runs,
        active_fraction,
        success_fraction,
        confidence_halfwidths,
        mean_discounted_payoff: mean,
        payoff_std_error: (var / runs).sqrt(),
        censored_fraction: censored as f64 / runs,
    })
}

/// Probability that search is still active at the start of period `t`,
/// `1 − p·l_{t−1}`.
pub fn active_probability_analytic(params: &ModelParams, path: &FrontierPath, t: usize) -> Result<f64> {
    if t == 0 || t > path.horizon() {
        return Err(SearchError::Domain {
            name: "t",
            value: t as f64,
            expected: "a period within the path horizon",
        });
    }
    Ok(1.0 - params.p() * path.boundaries()[t - 1])
}
