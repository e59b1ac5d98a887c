//! Optimal search policies on the frontier state.
//!
//! The value `W(l)` is the expected discounted payoff of optimal search given
//! that `[0, l)` has failed. One period of search moves the frontier to
//! `l' ≥ l`:
//!
//! ```text
//! W(l) = max_{l' ∈ [l, j*]}  s(l,l')·v − C([l,l')) + δ·(1 − s(l,l'))·W(l')
//! s(l,l') = p(l' − l)/(1 − l·p)
//! ```
//!
//! Starting from `W ≡ 0`, the n-th iterate of this operator is the value of
//! the problem truncated after n periods, so value iteration and backward
//! induction share one sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SearchError};
use crate::grid::{FrontierGrid, Refinement};
use crate::model::{Frontier, ModelParams};
use crate::roots::golden_max;

/// Smallest increment that always counts as active search.
pub const ACTIVITY_FLOOR: f64 = 1e-13;

/// Fraction of the local grid cell below which an increment is unresolved.
pub const ACTIVITY_CELL_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of uniformly spaced nodes on `[0, j*]`.
    pub grid_size: usize,
    /// Sup-norm convergence tolerance in value units.
    pub tol: f64,
    pub max_iters: usize,
    /// Golden-section tolerance relative to the width of `[l, j*]`.
    pub inner_tol: f64,
    /// Candidates in the coarse scan preceding golden-section refinement.
    pub scan_points: usize,
    pub refinement: Option<Refinement>,
    pub adaptation: Option<Adaptation>,
}

/// Curvature-driven subdivision of the grid after convergence.
///
/// Piecewise-linear continuation values bias the optimal move by roughly
/// `δ·h·|W''|` per unit length in a cell of width `h`. After each converged
/// pass, cells where that estimate exceeds `target·p·v` are split and the
/// iteration resumes from the interpolated values. Measuring against `p·v`
/// keeps the grid unchanged when prize and costs are scaled together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adaptation {
    pub target: f64,
    pub max_passes: usize,
    /// Subdivision stops once the grid would exceed this many nodes.
    pub max_nodes: usize,
}

impl Default for Adaptation {
    fn default() -> Self {
        Self {
            target: 1e-4,
            max_passes: 4,
            max_nodes: 1 << 16,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_size: 2048,
            tol: 1e-9,
            max_iters: 100_000,
            inner_tol: 1e-10,
            scan_points: 64,
            refinement: Some(Refinement::default()),
            adaptation: Some(Adaptation::default()),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(SearchError::InvalidConfig {
                field,
                reason: reason.to_string(),
            })
        };
        if self.grid_size < 64 {
            return bad("grid_size", "must be at least 64");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", "must be positive and finite");
        }
        if self.max_iters == 0 {
            return bad("max_iters", "must be positive");
        }
        if !(self.inner_tol > 0.0 && self.inner_tol < 1.0) {
            return bad("inner_tol", "must lie in (0, 1)");
        }
        if self.scan_points < 2 {
            return bad("scan_points", "must be at least 2");
        }
        if let Some(r) = self.refinement {
            if !(r.ratio > 0.0 && r.ratio < 1.0) {
                return bad("refinement.ratio", "must lie in (0, 1)");
            }
            if !(r.floor > 0.0 && r.floor < 1.0) {
                return bad("refinement.floor", "must lie in (0, 1)");
            }
        }
        if let Some(a) = self.adaptation {
            if !(a.target > 0.0 && a.target.is_finite()) {
                return bad("adaptation.target", "must be positive and finite");
            }
            if a.max_nodes < self.grid_size {
                return bad("adaptation.max_nodes", "must be at least grid_size");
            }
        }
        Ok(())
    }
}

/// Right-hand side of the Bellman equation for the move `l → l_next`.
pub fn bellman_rhs<F>(params: &ModelParams, l: Frontier, l_next: Frontier, continuation: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (l, l_next) = (l.get(), l_next.get());
    if l_next < l {
        return Err(SearchError::Ordering {
            lower_name: "l",
            lower: l,
            upper_name: "l_next",
            upper: l_next,
        });
    }
    Ok(rhs(params, l, l_next, continuation(l_next)))
}

#[inline]
fn rhs(params: &ModelParams, l: f64, l_next: f64, w_next: f64) -> f64 {
    let hit = params.success_probability_unchecked(l, l_next);
    hit * params.v() - params.cost().integral_unchecked(l, l_next)
        + params.delta() * params.survival_unchecked(l, l_next) * w_next
}

#[derive(Debug, Clone, Copy)]
struct Maximizer {
    scan_points: usize,
    inner_tol: f64,
}

impl Maximizer {
    fn from_config(config: &SolverConfig) -> Self {
        Self {
            scan_points: config.scan_points,
            inner_tol: config.inner_tol,
        }
    }

    /// `(max, argmax)` of the right-hand side from state `l`.
    ///
    /// `continuation = None` is the terminal period, whose strictly concave
    /// objective is maximized through its first-order condition.
    fn maximize(
        &self,
        params: &ModelParams,
        grid: &FrontierGrid,
        continuation: Option<&[f64]>,
        l: f64,
    ) -> (f64, f64) {
        let cap = grid.cap();
        let Some(values) = continuation else {
            let next = params
                .last_period_boundary(Frontier::new(l.min(cap)).expect("grid lies in [0,1)"))
                .min(cap);
            return (rhs(params, l, next, 0.0), next);
        };
        let objective = |x: f64| rhs(params, l, x, grid.interpolate(values, x));
        if l >= cap {
            return (objective(cap), cap);
        }
        let width = cap - l;
        let n = self.scan_points;
        let at = |i: usize| if i == n { cap } else { l + width * i as f64 / n as f64 };

        let mut best_i = 0;
        let mut best_f = objective(l);
        for i in 1..=n {
            let f = objective(at(i));
            if f > best_f {
                best_f = f;
                best_i = i;
            }
        }
        let lo = at(best_i.saturating_sub(1));
        let hi = at((best_i + 1).min(n));
        let tol = (self.inner_tol * width).max(4.0 * f64::EPSILON * cap);
        let (x, f) = golden_max(objective, lo, hi, tol);
        if f > best_f {
            (f, x)
        } else {
            (best_f, at(best_i))
        }
    }

    fn sweep(
        &self,
        params: &ModelParams,
        grid: &FrontierGrid,
        continuation: Option<&[f64]>,
    ) -> (Vec<f64>, Vec<f64>) {
        grid.nodes()
            .par_iter()
            .map(|&l| self.maximize(params, grid, continuation, l))
            .unzip()
    }
}

/// Converged value function and policy on the frontier grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueSolution {
    params: ModelParams,
    config: SolverConfig,
    grid: FrontierGrid,
    values: Vec<f64>,
    policy: Vec<f64>,
    iterations: usize,
    sup_norm_history: Vec<f64>,
    /// Sweeps run on each successive grid.
    pass_lengths: Vec<usize>,
}

impl ValueSolution {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &FrontierGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    /// `W` at each node.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Next frontier `l'(l)` at each node.
    pub fn policy(&self) -> &[f64] {
        &self.policy
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Sup-norm distance between successive iterates, over all grid passes.
    pub fn sup_norm_history(&self) -> &[f64] {
        &self.sup_norm_history
    }

    /// Number of sweeps on each grid, coarsest first.
    pub fn pass_lengths(&self) -> &[usize] {
        &self.pass_lengths
    }

    /// Search cap `j*`.
    pub fn cap(&self) -> f64 {
        self.grid.cap()
    }

    pub fn value_at(&self, l: f64) -> f64 {
        self.grid.interpolate(&self.values, l)
    }

    /// Optimal next frontier from an arbitrary state, re-optimized against
    /// the interpolated value function.
    pub fn policy_at(&self, l: f64) -> f64 {
        Maximizer::from_config(&self.config)
            .maximize(&self.params, &self.grid, Some(&self.values), l)
            .1
    }

    /// `|W(l) − (TW)(l)|` at every node.
    pub fn bellman_residuals(&self) -> Vec<f64> {
        let (next, _) = Maximizer::from_config(&self.config).sweep(&self.params, &self.grid, Some(&self.values));
        next.iter().zip(&self.values).map(|(a, b)| (a - b).abs()).collect()
    }

    /// Ratios of successive sup-norm differences within each grid pass.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        let mut ratios = Vec::new();
        let mut start = 0;
        for &len in &self.pass_lengths {
            let pass = &self.sup_norm_history[start..start + len];
            ratios.extend(pass.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]));
            start += len;
        }
        ratios
    }
}

/// Infinite-horizon value iteration from `W ≡ 0`.
pub fn value_iteration(params: &ModelParams, config: &SolverConfig) -> Result<ValueSolution> {
    config.validate()?;
    let mut grid = FrontierGrid::build(params, config.grid_size, config.refinement)?;
    let maximizer = Maximizer::from_config(config);
    let mut values = vec![0.0; grid.len()];
    let mut warm = false;
    let mut iterations = 0;
    let mut pass = 0;
    let mut sup_norm_history = Vec::new();
    let mut pass_lengths = Vec::new();
    loop {
        let (next, policy, history) = iterate(params, config, &maximizer, &grid, values, warm, &mut iterations)?;
        values = next;
        pass_lengths.push(history.len());
        sup_norm_history.extend(history);
        let refined = config.adaptation.and_then(|a| {
            (pass < a.max_passes)
                .then(|| subdivision(&grid, &values, params, a))
                .flatten()
        });
        match refined {
            Some(finer) => {
                values = finer.nodes().iter().map(|&x| grid.interpolate(&values, x)).collect();
                grid = finer;
                warm = true;
                pass += 1;
            }
            None => {
                return Ok(ValueSolution {
                    params: *params,
                    config: *config,
                    grid,
                    values,
                    policy,
                    iterations,
                    sup_norm_history,
                    pass_lengths,
                })
            }
        }
    }
}

/// Iterates the Bellman operator on `grid` until successive iterates are
/// within `tol`; `warm = false` treats the first sweep as the terminal period.
fn iterate(
    params: &ModelParams,
    config: &SolverConfig,
    maximizer: &Maximizer,
    grid: &FrontierGrid,
    mut values: Vec<f64>,
    warm: bool,
    iterations: &mut usize,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut history = Vec::new();
    for sweep in 1.. {
        if *iterations >= config.max_iters {
            break;
        }
        *iterations += 1;
        let continuation = (warm || sweep > 1).then_some(values.as_slice());
        let (next, policy) = maximizer.sweep(params, grid, continuation);
        let diff = sup_distance(&next, &values);
        history.push(diff);
        values = next;
        if diff < config.tol {
            return Ok((values, policy, history));
        }
    }
    let tail = history[history.len().saturating_sub(5)..].to_vec();
    Err(SearchError::NonConvergence {
        iterations: config.max_iters,
        tail,
    })
}

/// Finer grid where the interpolation bias estimate exceeds the target, or
/// `None` when no cell needs splitting or the node budget is spent.
fn subdivision(grid: &FrontierGrid, values: &[f64], params: &ModelParams, adaptation: Adaptation) -> Option<FrontierGrid> {
    let target = adaptation.target * params.expected_prize();
    let x = grid.nodes();
    let n = x.len();
    let mut curvature = vec![0.0; n];
    for i in 1..n - 1 {
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let d2 = 2.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0) / (h0 + h1);
        curvature[i] = d2.abs();
    }
    let pieces: Vec<usize> = (0..n - 1)
        .map(|i| {
            let bias = params.delta() * (x[i + 1] - x[i]) * curvature[i].max(curvature[i + 1]);
            (bias / target).ceil().clamp(1.0, 16.0) as usize
        })
        .collect();
    let added: usize = pieces.iter().map(|m| m - 1).sum();
    (added > 0 && n + added <= adaptation.max_nodes).then(|| grid.subdivide(&pieces))
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Per-period frontiers `l_0 = 0 ≤ l_1 ≤ …` of a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPath {
    boundaries: Vec<f64>,
}

impl FrontierPath {
    /// Path through the given boundaries; the first must be 0 and the
    /// sequence nondecreasing in `[0, 1)`.
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        match boundaries.first() {
            Some(0.0) => {}
            _ => {
                return Err(SearchError::InvalidConfig {
                    field: "boundaries",
                    reason: "a frontier path starts at 0".into(),
                })
            }
        }
        for w in boundaries.windows(2) {
            if !(w[0] <= w[1] && w[1] < 1.0) {
                return Err(SearchError::Ordering {
                    lower_name: "l_t",
                    lower: w[0],
                    upper_name: "l_{t+1}",
                    upper: w[1],
                });
            }
        }
        Ok(Self { boundaries })
    }

    /// `l_0, l_1, …, l_H`.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Number of periods `H` covered.
    pub fn horizon(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Frontier at the start of period `t + 1`, i.e. after `t` periods;
    /// constant past the horizon.
    pub fn frontier_after(&self, t: usize) -> f64 {
        self.boundaries[t.min(self.horizon())]
    }

    /// Search intensities `μ(L_t) = l_t − l_{t−1}` for `t = 1..=H`.
    pub fn increments(&self) -> Vec<f64> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn last(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    /// Expected discounted payoff of following the path from `l = 0`:
    /// `Σ_t δ^{t−1} [p·μ(L_t)·v − (1 − p·l_{t−1})·C(L_t)]`.
    pub fn discounted_value(&self, params: &ModelParams) -> f64 {
        let mut total = 0.0;
        let mut discount = 1.0;
        for w in self.boundaries.windows(2) {
            let (a, b) = (w[0], w[1]);
            let gain = params.p() * (b - a) * params.v();
            let cost = (1.0 - params.p() * a) * params.cost().integral_unchecked(a, b);
            total += discount * (gain - cost);
            discount *= params.delta();
        }
        total
    }
}

/// Iterates the optimal policy from `l_0 = 0` for `horizon` periods.
pub fn frontier_sequence(solution: &ValueSolution, horizon: usize) -> FrontierPath {
    let mut boundaries = Vec::with_capacity(horizon + 1);
    let mut l = 0.0;
    boundaries.push(l);
    for _ in 0..horizon {
        l = solution.policy_at(l).max(l);
        boundaries.push(l);
    }
    FrontierPath { boundaries }
}

/// How one frontier increment compares with the numerical resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IncrementStatus {
    /// Above the activity threshold.
    Active,
    /// Below the threshold while the frontier sits in the last grid cell
    /// before its limit: numerically indistinguishable from zero.
    Unresolved,
    /// Below the threshold although the grid could still resolve further
    /// search.
    Stalled,
}

/// Activity threshold at frontier `l`: `max(1e−13, 1e−3 · local cell width)`.
pub fn activity_threshold(grid: &FrontierGrid, l: f64) -> f64 {
    ACTIVITY_FLOOR.max(ACTIVITY_CELL_FRACTION * grid.cell_width(l))
}

pub fn classify_increments(solution: &ValueSolution, path: &FrontierPath) -> Vec<IncrementStatus> {
    let grid = solution.grid();
    path.boundaries()
        .windows(2)
        .map(|w| {
            if w[1] - w[0] > activity_threshold(grid, w[0]) {
                IncrementStatus::Active
            } else if grid.in_terminal_cell(w[0]) {
                IncrementStatus::Unresolved
            } else {
                IncrementStatus::Stalled
            }
        })
        .collect()
}

/// Value functions of the problem in which search must stop after `horizon`
/// periods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncatedSolution {
    params: ModelParams,
    config: SolverConfig,
    grid: FrontierGrid,
    /// `stages[k]`: value with `k` periods of search remaining.
    stages: Vec<Vec<f64>>,
    first_policy: Vec<f64>,
}

/// Backward induction over `horizon` periods.
pub fn backward_induction(params: &ModelParams, horizon: usize, config: &SolverConfig) -> Result<TruncatedSolution> {
    config.validate()?;
    if horizon == 0 {
        return Err(SearchError::InvalidConfig {
            field: "horizon",
            reason: "must be at least 1".into(),
        });
    }
    let grid = FrontierGrid::build(params, config.grid_size, config.refinement)?;
    let maximizer = Maximizer::from_config(config);
    let mut stages = vec![vec![0.0; grid.len()]];
    let mut first_policy = Vec::new();
    for k in 1..=horizon {
        let continuation = (k > 1).then(|| stages[k - 1].as_slice());
        let (values, policy) = maximizer.sweep(params, &grid, continuation);
        stages.push(values);
        first_policy = policy;
    }
    Ok(TruncatedSolution {
        params: *params,
        config: *config,
        grid,
        stages,
        first_policy,
    })
}

impl TruncatedSolution {
    pub fn horizon(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn grid(&self) -> &FrontierGrid {
        &self.grid
    }

    /// Value with `remaining` periods left, at frontier `l`.
    pub fn value(&self, remaining: usize, l: f64) -> f64 {
        self.grid.interpolate(&self.stages[remaining], l)
    }

    /// Value of the full truncated problem at `l = 0`.
    pub fn value_at_origin(&self) -> f64 {
        self.stages[self.horizon()][0]
    }

    /// First-period policy at every node.
    pub fn first_period_policy(&self) -> &[f64] {
        &self.first_policy
    }

    /// Optimal next frontier from `l` with `remaining ≥ 1` periods left.
    pub fn policy_at(&self, remaining: usize, l: f64) -> f64 {
        let continuation = (remaining > 1).then(|| self.stages[remaining - 1].as_slice());
        Maximizer::from_config(&self.config)
            .maximize(&self.params, &self.grid, continuation, l)
            .1
            .max(l)
    }

    /// Optimal frontiers `l_0 = 0, l_1, …, l_T`.
    pub fn frontier(&self) -> FrontierPath {
        let t_max = self.horizon();
        let mut boundaries = vec![0.0];
        let mut l = 0.0;
        for t in 1..=t_max {
            l = self.policy_at(t_max - t + 1, l);
            boundaries.push(l);
        }
        FrontierPath { boundaries }
    }

    /// Residual of the last-period boundary condition
    /// `p·v/((1 − l_{T−1})p + (1 − p)) = c(l_T)`.
    pub fn final_period_residual(&self) -> f64 {
        let path = self.frontier();
        let b = path.boundaries();
        let (prev, last) = (b[b.len() - 2], b[b.len() - 1]);
        let p = self.params.p();
        let lhs = self.params.expected_prize() / ((1.0 - prev) * p + (1.0 - p));
        (lhs - self.params.cost().density_unchecked(last)).abs()
    }
}

/// One row of [`continuation_inequality_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationCheck {
    pub candidate: f64,
    /// `c(l_T)/c(l_{T+1})`
    pub lhs: f64,
    /// `(1 − l_T·p)/(1 − l_{T−1}·p)`
    pub rhs: f64,
    /// Stopping after `T` requires `lhs < rhs`; `true` when that fails, i.e.
    /// one more period of search to `candidate` pays.
    pub violated: bool,
}

/// Tests the condition under which stopping after the last period `T` would
/// be optimal against candidate frontiers `l_{T+1}`.
pub fn continuation_inequality_check(
    params: &ModelParams,
    l_prev: Frontier,
    l_last: Frontier,
    candidates: &[f64],
) -> Result<Vec<ContinuationCheck>> {
    let (prev, last) = (l_prev.get(), l_last.get());
    if prev >= last {
        return Err(SearchError::Ordering {
            lower_name: "l_prev",
            lower: prev,
            upper_name: "l_T",
            upper: last,
        });
    }
    let p = params.p();
    let rhs = (1.0 - last * p) / (1.0 - prev * p);
    let c_last = params.cost().density_unchecked(last);
    candidates
        .iter()
        .map(|&candidate| {
            if !(candidate > last && candidate < 1.0) {
                return Err(SearchError::Ordering {
                    lower_name: "l_T",
                    lower: last,
                    upper_name: "l_{T+1}",
                    upper: candidate,
                });
            }
            let lhs = c_last / params.cost().density_unchecked(candidate);
            Ok(ContinuationCheck {
                candidate,
                lhs,
                rhs,
                violated: lhs >= rhs,
            })
        })
        .collect()
}

/// Derivative of the Bellman right-hand side in `l_next`, with the
/// continuation differentiated by central differences of half-width `step`.
pub fn first_order_residual<F>(params: &ModelParams, l: f64, l_next: f64, continuation: F, step: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let p = params.p();
    let slope = (continuation(l_next + step) - continuation(l_next - step)) / (2.0 * step);
    let scale = 1.0 - l * p;
    params.expected_prize() / scale - params.cost().density_unchecked(l_next)
        + params.delta() / scale * (-p * continuation(l_next) + (1.0 - l_next * p) * slope)
}

/// First-order residual at the optimal policy from `l`.
pub fn euler_residual(solution: &ValueSolution, l: Frontier) -> Result<f64> {
    let next = solution.policy_at(l.get());
    euler_residual_at(solution, l, next)
}

/// First-order residual of an arbitrary interior move `l → l_next`.
pub fn euler_residual_at(solution: &ValueSolution, l: Frontier, l_next: f64) -> Result<f64> {
    let l = l.get();
    let grid = solution.grid();
    let cap = grid.cap();
    let step = grid.cell_width(l_next);
    if !(l_next - l > step && cap - l_next > step) {
        return Err(SearchError::NotApplicable("policy is not interior to (l, j*)"));
    }
    Ok(first_order_residual(
        solution.params(),
        l,
        l_next,
        |x| solution.value_at(x),
        step,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CostModel;
    use approx::assert_abs_diff_eq;

    fn instance() -> ModelParams {
        ModelParams::new(0.5, 2.0, 0.9, CostModel::reciprocal(0.0, 1.0).unwrap()).unwrap()
    }

    fn fr(l: f64) -> Frontier {
        Frontier::new(l).unwrap()
    }

    fn small() -> SolverConfig {
        SolverConfig {
            grid_size: 256,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn rhs_of_empty_search_is_pure_discounting() {
        let m = instance();
        let r = bellman_rhs(&m, fr(0.3), fr(0.3), |_| 0.7).unwrap();
        assert_abs_diff_eq!(r, 0.9 * 0.7, epsilon = 1e-15);
    }

    #[test]
    fn rhs_one_shot_examples() {
        let m = instance();
        let r = bellman_rhs(&m, fr(0.0), fr(0.5), |_| 0.0).unwrap();
        assert_abs_diff_eq!(r, 0.5 - (2f64.ln() - 0.5), epsilon = 1e-15);
        assert!(matches!(
            bellman_rhs(&m, fr(0.5), fr(0.2), |_| 0.0),
            Err(SearchError::Ordering { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            grid_size: 10,
            ..SolverConfig::default()
        };
        assert!(matches!(bad.validate(), Err(SearchError::InvalidConfig { field: "grid_size", .. })));
        let bad = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn value_iteration_requires_search() {
        let m = ModelParams::new(0.1, 1.0, 0.9, CostModel::reciprocal(0.2, 1.0).unwrap()).unwrap();
        assert!(matches!(value_iteration(&m, &small()), Err(SearchError::NoSearch { .. })));
    }

    #[test]
    fn non_convergence_carries_history() {
        let cfg = SolverConfig {
            max_iters: 3,
            ..small()
        };
        match value_iteration(&instance(), &cfg) {
            Err(SearchError::NonConvergence { iterations, tail }) => {
                assert_eq!(iterations, 3);
                assert_eq!(tail.len(), 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn values_nonnegative_and_zero_at_cap() {
        let sol = value_iteration(&instance(), &small()).unwrap();
        assert!(sol.values().iter().all(|&w| w >= 0.0));
        assert_eq!(*sol.values().last().unwrap(), 0.0);
        for (&l, &next) in sol.nodes().iter().zip(sol.policy()) {
            assert!(next >= l && next <= sol.cap());
        }
    }

    #[test]
    fn truncated_horizon_one_is_myopic() {
        let m = instance();
        let t = backward_induction(&m, 1, &small()).unwrap();
        let path = t.frontier();
        assert_abs_diff_eq!(path.boundaries()[1], m.myopic_boundary().unwrap(), epsilon = 1e-12);
        assert!(t.final_period_residual() < 1e-10);
    }

    #[test]
    fn continuation_inequality_examples() {
        let m = instance();
        let rows = continuation_inequality_check(&m, fr(0.0), fr(0.5), &[0.51, 0.99]).unwrap();
        assert_abs_diff_eq!(rows[0].lhs, 0.49 / 0.51, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[0].rhs, 0.75, epsilon = 1e-15);
        assert!(rows[0].violated);
        assert_abs_diff_eq!(rows[1].lhs, 1.0 / 99.0, epsilon = 1e-12);
        assert!(!rows[1].violated);
        assert!(continuation_inequality_check(&m, fr(0.5), fr(0.2), &[0.6]).is_err());
        assert!(continuation_inequality_check(&m, fr(0.0), fr(0.5), &[0.4]).is_err());
    }

    #[test]
    fn one_shot_first_order_residual_vanishes_at_myopic_boundary() {
        let m = instance();
        let q = m.myopic_boundary().unwrap();
        assert_abs_diff_eq!(first_order_residual(&m, 0.0, q, |_| 0.0, 1e-6), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(first_order_residual(&m, 0.0, 0.25, |_| 0.0, 1e-6), 1.0 - 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn path_constructor_validates() {
        assert!(FrontierPath::new(vec![0.0, 0.2, 0.2, 0.5]).is_ok());
        assert!(FrontierPath::new(vec![0.1, 0.2]).is_err());
        assert!(FrontierPath::new(vec![0.0, 0.3, 0.2]).is_err());
        assert!(FrontierPath::new(vec![]).is_err());
    }
}
