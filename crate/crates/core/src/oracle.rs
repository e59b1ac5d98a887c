//! Exhaustive oracle on a finite analog of the search problem.
//!
//! The project set is cut into `N` equal slots whose costs are cell
//! integrals of the cost density, and search lasts at most `T` periods. Every
//! one of the `(T+1)^N` ways to assign slots to periods (or to "never") is
//! evaluated exactly, with no pruning, so the result is independent of the
//! continuous solver.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SearchError};
use crate::model::ModelParams;
use crate::solver::TruncatedSolution;

/// Default cap on the number of schedules evaluated per instance.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Values within this relative distance of the maximum count as ties.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteInstance {
    slot_costs: Vec<f64>,
    p: f64,
    v: f64,
    delta: f64,
    horizon: usize,
}

impl DiscreteInstance {
    /// Slot costs must be positive and strictly increasing; only the last may
    /// be `+∞`.
    pub fn new(slot_costs: Vec<f64>, p: f64, v: f64, delta: f64, horizon: usize) -> Result<Self> {
        let invalid = |field, reason: &str| SearchError::InvalidConfig {
            field,
            reason: reason.to_string(),
        };
        if slot_costs.is_empty() {
            return Err(invalid("slot_costs", "need at least one slot"));
        }
        if slot_costs.len() > u8::MAX as usize {
            return Err(invalid("slot_costs", "at most 255 slots"));
        }
        if slot_costs.iter().any(|&c| c.is_nan() || c <= 0.0) {
            return Err(invalid("slot_costs", "costs must be positive"));
        }
        if slot_costs[..slot_costs.len() - 1].iter().any(|c| !c.is_finite()) {
            return Err(invalid("slot_costs", "only the last slot may have infinite cost"));
        }
        if slot_costs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("slot_costs", "costs must be strictly increasing"));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("p", "must lie in (0, 1)"));
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid("v", "must be positive"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid("delta", "must lie in (0, 1)"));
        }
        if horizon == 0 || horizon > u8::MAX as usize {
            return Err(invalid("horizon", "must lie in 1..=255"));
        }
        Ok(Self {
            slot_costs,
            p,
            v,
            delta,
            horizon,
        })
    }

    /// Analog of `params` with `slots` equal cells; each slot costs the
    /// integral of the density over its cell (the top cell may be infinite).
    pub fn from_model(params: &ModelParams, slots: usize, horizon: usize) -> Result<Self> {
        if slots == 0 {
            return Err(SearchError::InvalidConfig {
                field: "slots",
                reason: "need at least one slot".into(),
            });
        }
        let n = slots as f64;
        let cost = params.cost();
        let costs = (0..slots)
            .map(|i| {
                let a = i as f64 / n;
                if i + 1 == slots {
                    cost.tail_integral(a)
                } else {
                    cost.integral(a, (i + 1) as f64 / n)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(costs, params.p(), params.v(), params.delta(), horizon)
    }

    pub fn slot_costs(&self) -> &[f64] {
        &self.slot_costs
    }

    pub fn slots(&self) -> usize {
        self.slot_costs.len()
    }

    /// Probability mass of one slot, `1/N`.
    pub fn slot_mass(&self) -> f64 {
        1.0 / self.slots() as f64
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of schedules, `(T+1)^N`, as a float so it cannot overflow.
    pub fn schedule_count(&self) -> f64 {
        ((self.horizon + 1) as f64).powi(self.slots() as i32)
    }

    /// Unrolled expected payoff of a digit vector (0 = never, t = period t).
    fn value_of(&self, digits: &[u8], mass: &mut [u32], cost: &mut [f64]) -> f64 {
        mass.iter_mut().for_each(|m| *m = 0);
        cost.iter_mut().for_each(|c| *c = 0.0);
        for (&d, &c) in digits.iter().zip(&self.slot_costs) {
            if d > 0 {
                mass[d as usize] += 1;
                cost[d as usize] += c;
            }
        }
        let unit = self.slot_mass();
        let mut total = 0.0;
        let mut discount = 1.0;
        let mut searched = 0u32;
        for t in 1..=self.horizon {
            if mass[t] > 0 {
                let before = searched as f64 * unit;
                let hit = self.p * mass[t] as f64 * unit * self.v;
                total += discount * (hit - (1.0 - self.p * before) * cost[t]);
                searched += mass[t];
            }
            discount *= self.delta;
        }
        total
    }
}

/// Period in which each slot is searched, or `None` for never.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    schedule: Vec<Option<u32>>,
}

impl Assignment {
    pub fn new(schedule: Vec<Option<u32>>) -> Self {
        Self { schedule }
    }

    /// Nothing is ever searched.
    pub fn empty(slots: usize) -> Self {
        Self {
            schedule: vec![None; slots],
        }
    }

    pub fn schedule(&self) -> &[Option<u32>] {
        &self.schedule
    }

    fn from_digits(digits: &[u8]) -> Self {
        Self {
            schedule: digits.iter().map(|&d| (d > 0).then_some(d as u32)).collect(),
        }
    }

    fn digits(&self, instance: &DiscreteInstance) -> Result<Vec<u8>> {
        if self.schedule.len() != instance.slots() {
            return Err(SearchError::InvalidConfig {
                field: "schedule",
                reason: format!("{} entries for {} slots", self.schedule.len(), instance.slots()),
            });
        }
        self.schedule
            .iter()
            .map(|entry| match *entry {
                None => Ok(0),
                Some(t) if t >= 1 && t as usize <= instance.horizon() => Ok(t as u8),
                Some(t) => Err(SearchError::InvalidConfig {
                    field: "schedule",
                    reason: format!("period {t} outside 1..={}", instance.horizon()),
                }),
            })
            .collect()
    }

    /// Frontier after each period `t = 1..=horizon`: searched mass so far.
    pub fn prefix_frontiers(&self, horizon: usize) -> Vec<f64> {
        let n = self.schedule.len() as f64;
        (1..=horizon as u32)
            .map(|t| self.schedule.iter().filter(|e| matches!(e, Some(s) if *s <= t)).count() as f64 / n)
            .collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.schedule.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match e {
                Some(t) => write!(f, "{t}")?,
                None => f.write_str("never")?,
            }
        }
        f.write_str("]")
    }
}

/// Expected discounted payoff of a schedule at time 1:
/// `Σ_t δ^{t−1} [p·m_t·v − (1 − p·M_{t−1})·K_t]`.
pub fn evaluate_assignment(instance: &DiscreteInstance, assignment: &Assignment) -> Result<f64> {
    let digits = assignment.digits(instance)?;
    let mut mass = vec![0; instance.horizon() + 1];
    let mut cost = vec![0.0; instance.horizon() + 1];
    Ok(instance.value_of(&digits, &mut mass, &mut cost))
}

/// Same payoff from the backward recursion on conditional values, with the
/// posterior `p̂_t = μ(U_t)p/(μ(U_t)p + 1 − p)` updated after every failure.
pub fn evaluate_recursive(instance: &DiscreteInstance, assignment: &Assignment) -> Result<f64> {
    let digits = assignment.digits(instance)?;
    let horizon = instance.horizon();
    let unit = instance.slot_mass();
    let mut mass = vec![0.0; horizon + 1];
    let mut cost = vec![0.0; horizon + 1];
    for (&d, &c) in digits.iter().zip(instance.slot_costs()) {
        if d > 0 {
            mass[d as usize] += unit;
            cost[d as usize] += c;
        }
    }
    let p = instance.p();
    // unsearched mass at the start of each period
    let mut unsearched = vec![1.0; horizon + 2];
    for t in 1..=horizon {
        unsearched[t + 1] = unsearched[t] - mass[t];
    }
    let mut next = 0.0;
    for t in (1..=horizon).rev() {
        let u = unsearched[t];
        let posterior = u * p / (u * p + (1.0 - p));
        let hit = if mass[t] > 0.0 { posterior * mass[t] / u } else { 0.0 };
        let searched_cost = if mass[t] > 0.0 { cost[t] } else { 0.0 };
        next = hit * instance.v() - searched_cost + instance.delta() * (1.0 - hit) * next;
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationResult {
    pub assignment: Assignment,
    pub value: f64,
    /// Schedules whose value is within `1e−12` (relative) of the maximum,
    /// the maximizer included.
    pub near_ties: u64,
    pub evaluated: u64,
}

#[derive(Debug, Clone)]
struct Partial {
    best: Vec<u8>,
    value: f64,
    near_ties: u64,
    evaluated: u64,
}

impl Partial {
    fn tie_band(value: f64) -> f64 {
        TIE_TOL * value.abs().max(1.0)
    }

    /// Merge with a partition that comes later in enumeration order.
    fn merge(self, later: Partial) -> Partial {
        let evaluated = self.evaluated + later.evaluated;
        let band = Self::tie_band(self.value.max(later.value));
        let near_ties = if (self.value - later.value).abs() <= band {
            self.near_ties + later.near_ties
        } else if self.value > later.value {
            self.near_ties
        } else {
            later.near_ties
        };
        let winner = if later.value > self.value { later } else { self };
        Partial {
            evaluated,
            near_ties,
            ..winner
        }
    }
}

/// Exhaustive maximizer over all `(T+1)^N` schedules.
///
/// Ties resolve to the lexicographically earliest schedule, ordering each
/// entry as never < 1 < … < T with slot 0 most significant.
pub fn best_assignment(instance: &DiscreteInstance, budget: u64) -> Result<EnumerationResult> {
    let required = instance.schedule_count();
    if required > budget as f64 {
        return Err(SearchError::Budget {
            required,
            limit: budget,
        });
    }
    let radix = (instance.horizon() + 1) as u8;
    let n = instance.slots();

    let partial = (0..radix)
        .into_par_iter()
        .map(|first| enumerate_partition(instance, first, radix, n))
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(Partial::merge)
        .expect("radix is at least 2");

    Ok(EnumerationResult {
        assignment: Assignment::from_digits(&partial.best),
        value: partial.value,
        near_ties: partial.near_ties,
        evaluated: partial.evaluated,
    })
}

/// Mixed-radix walk over every schedule whose first digit is `first`.
fn enumerate_partition(instance: &DiscreteInstance, first: u8, radix: u8, n: usize) -> Partial {
    let mut digits = vec![0u8; n];
    digits[0] = first;
    let mut mass = vec![0u32; instance.horizon() + 1];
    let mut cost = vec![0.0; instance.horizon() + 1];
    let value = instance.value_of(&digits, &mut mass, &mut cost);
    let mut out = Partial {
        best: digits.clone(),
        value,
        near_ties: 1,
        evaluated: 1,
    };
    loop {
        // increment the counter; slot n−1 is least significant
        let mut i = n;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < radix {
                break;
            }
            digits[i] = 0;
        }
        let value = instance.value_of(&digits, &mut mass, &mut cost);
        out.evaluated += 1;
        let band = Partial::tie_band(out.value);
        if value > out.value + band {
            out.near_ties = 1;
        } else if value >= out.value - band {
            out.near_ties += 1;
        }
        if value > out.value {
            out.value = value;
            out.best.copy_from_slice(&digits);
        }
    }
}

/// Discrete counterparts of the no-gaps, increasing-order and no-breaks
/// properties of optimal search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    /// No unsearched slot lies below a searched one.
    pub no_gaps: bool,
    /// Periods of searched slots are nondecreasing in slot index.
    pub increasing_order: bool,
    /// No empty period precedes a nonempty one.
    pub no_breaks: bool,
}

impl StructureReport {
    pub fn all(&self) -> bool {
        self.no_gaps && self.increasing_order && self.no_breaks
    }
}

pub fn structure_check(assignment: &Assignment) -> StructureReport {
    let schedule = assignment.schedule();
    let no_gaps = match schedule.iter().rposition(Option::is_some) {
        Some(last) => schedule[..last].iter().all(Option::is_some),
        None => true,
    };
    let periods: Vec<u32> = schedule.iter().flatten().copied().collect();
    let increasing_order = periods.windows(2).all(|w| w[0] <= w[1]);
    let used = |t: u32| periods.contains(&t);
    let max_period = periods.iter().copied().max().unwrap_or(0);
    let no_breaks = (1..=max_period).all(used);
    StructureReport {
        no_gaps,
        increasing_order,
        no_breaks,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousComparison {
    pub discrete: EnumerationResult,
    pub structure: StructureReport,
    pub continuous_value: f64,
    /// `|best discrete value − truncated continuous value at l = 0|`
    pub value_gap: f64,
    pub discrete_frontier: Vec<f64>,
    pub continuous_frontier: Vec<f64>,
    /// Largest per-period distance between the two frontier sequences.
    pub frontier_deviation: f64,
}

/// Compares the exhaustive optimum with the `T`-truncated continuous solution
/// of the same instance. `None` stands for the no-search continuous optimum.
pub fn compare_with_continuous(
    instance: &DiscreteInstance,
    continuous: Option<&TruncatedSolution>,
    budget: u64,
) -> Result<ContinuousComparison> {
    let discrete = best_assignment(instance, budget)?;
    let horizon = instance.horizon();
    let (continuous_value, continuous_frontier) = match continuous {
        Some(sol) => {
            if sol.horizon() != horizon {
                return Err(SearchError::InvalidConfig {
                    field: "horizon",
                    reason: format!("continuous horizon {} differs from {horizon}", sol.horizon()),
                });
            }
            (sol.value_at_origin(), sol.frontier().boundaries()[1..].to_vec())
        }
        None => (0.0, vec![0.0; horizon]),
    };
    let discrete_frontier = discrete.assignment.prefix_frontiers(horizon);
    let frontier_deviation = discrete_frontier
        .iter()
        .zip(&continuous_frontier)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ContinuousComparison {
        structure: structure_check(&discrete.assignment),
        value_gap: (discrete.value - continuous_value).abs(),
        continuous_value,
        discrete,
        discrete_frontier,
        continuous_frontier,
        frontier_deviation,
    })
}
