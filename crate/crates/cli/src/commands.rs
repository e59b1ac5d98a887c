//! The four subcommands. Each writes its artifacts under one directory.

use std::fs;
use std::path::Path;

use innovation_search::{
    backward_induction, classify_increments, compare_with_continuous, frontier_sequence, simulate_batch,
    value_iteration, DiscreteInstance, Frontier, FrontierPath, IncrementStatus, ModelParams, SearchError, SimConfig,
    ValueSolution,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::svg::{LineChart, Series};
use crate::table::{write_json, Cell, Table};
use crate::CliError;

pub const SOLVE_HORIZON: usize = 200;
pub const SIMULATE_HORIZON: usize = innovation_search::simulate::DEFAULT_HORIZON_CAP;
pub const ORACLE_HORIZON: usize = 2;
pub const NO_SEARCH: &str = "no search optimal";

fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn emit(cfg: &RunConfig, dir: &Path, stem: &str, table: &Table) -> Result<(), CliError> {
    if cfg.wants(Format::Csv) {
        table.write_csv(&dir.join(format!("{stem}.csv")))?;
    }
    if cfg.wants(Format::Json) {
        table.write_json(&dir.join(format!("{stem}.json")))?;
    }
    Ok(())
}

fn emit_svg(cfg: &RunConfig, dir: &Path, stem: &str, chart: &LineChart) -> Result<(), CliError> {
    if cfg.wants(Format::Svg) {
        let path = dir.join(format!("{stem}.svg"));
        fs::write(&path, chart.render()).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn solver_error(e: SearchError) -> CliError {
    match e {
        SearchError::NonConvergence { iterations, tail } => CliError::Solver(format!(
            "value iteration did not converge in {iterations} iterations; last sup-norm differences {tail:?}"
        )),
        other => CliError::Solver(other.to_string()),
    }
}

fn params_json(params: &ModelParams) -> Value {
    json!({
        "p": params.p(),
        "v": params.v(),
        "delta": params.delta(),
        "cost_family": params.cost().family().name(),
        "c0": params.cost().c0(),
        "k": params.cost().k(),
    })
}

fn status_name(s: IncrementStatus) -> &'static str {
    match s {
        IncrementStatus::Active => "active",
        IncrementStatus::Unresolved => "unresolved",
        IncrementStatus::Stalled => "stalled",
    }
}

/// Headline numbers of one solved instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub searched: bool,
    pub value_at_origin: f64,
    pub first_boundary: f64,
    pub limit: f64,
    pub cap: Option<f64>,
    pub myopic: Option<f64>,
    pub iterations: usize,
}

pub fn frontier_table(params: &ModelParams, solution: &ValueSolution, path: &FrontierPath) -> Table {
    let mut t = Table::new(&[
        "t",
        "l_prev",
        "l",
        "increment",
        "posterior",
        "success_probability",
        "period_cost",
        "marginal_benefit",
        "marginal_cost",
        "status",
    ]);
    let status = classify_increments(solution, path);
    let cost = params.cost();
    for (i, w) in path.boundaries().windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (Frontier::new(a).expect("path in [0,1)"), Frontier::new(b).expect("path in [0,1)"));
        t.push(vec![
            (i + 1).into(),
            a.into(),
            b.into(),
            (b - a).into(),
            params.posterior_feasible(fa).into(),
            params.success_probability(fa, fb).expect("ordered path").into(),
            cost.integral(a, b).expect("ordered path").into(),
            params.marginal_benefit(fa).into(),
            cost.density(b).expect("path in [0,1)").into(),
            status_name(status[i]).into(),
        ]);
    }
    t
}

pub fn value_table(solution: &ValueSolution) -> Table {
    let mut t = Table::new(&["l", "value", "policy"]);
    for ((&l, &w), &next) in solution.nodes().iter().zip(solution.values()).zip(solution.policy()) {
        t.push(vec![l.into(), w.into(), next.into()]);
    }
    t
}

pub fn solve(cfg: &RunConfig, dir: &Path) -> Result<SolveReport, CliError> {
    prepare(dir)?;
    let params = &cfg.params;
    let horizon = cfg.horizon.unwrap_or(SOLVE_HORIZON);
    if !params.feasible_to_search() {
        let empty = Table::new(&["t", "l_prev", "l", "increment"]);
        emit(cfg, dir, "frontier", &empty)?;
        write_json(
            &dir.join("summary.json"),
            &json!({
                "status": "no_search",
                "policy": "empty",
                "reason": NO_SEARCH,
                "params": params_json(params),
                "expected_prize": params.expected_prize(),
                "base_cost": params.cost().c0(),
                "value_at_origin": 0.0,
            }),
        )?;
        return Ok(SolveReport {
            searched: false,
            value_at_origin: 0.0,
            first_boundary: 0.0,
            limit: 0.0,
            cap: None,
            myopic: None,
            iterations: 0,
        });
    }

    let solution = value_iteration(params, &cfg.solver).map_err(solver_error)?;
    let path = frontier_sequence(&solution, horizon);
    let frontier = frontier_table(params, &solution, &path);
    emit(cfg, dir, "value", &value_table(&solution))?;
    emit(cfg, dir, "frontier", &frontier)?;

    let cap = solution.cap();
    let myopic = params.myopic_boundary();
    let report = SolveReport {
        searched: true,
        value_at_origin: solution.values()[0],
        first_boundary: solution.policy()[0],
        limit: path.last(),
        cap: Some(cap),
        myopic,
        iterations: solution.iterations(),
    };
    let max_residual = solution.bellman_residuals().into_iter().fold(0.0, f64::max);
    let stalled = classify_increments(&solution, &path)
        .iter()
        .filter(|s| **s == IncrementStatus::Stalled)
        .count();
    write_json(
        &dir.join("summary.json"),
        &json!({
            "status": "ok",
            "params": params_json(params),
            "grid_size": cfg.solver.grid_size,
            "nodes": solution.nodes().len(),
            "tol": cfg.solver.tol,
            "iterations": solution.iterations(),
            "value_at_origin": report.value_at_origin,
            "first_boundary": report.first_boundary,
            "myopic_boundary": myopic,
            "search_cap": cap,
            "accumulation_points": solution.grid().accumulation_points(),
            "horizon": horizon,
            "frontier_limit": report.limit,
            "stalled_increments": stalled,
            "path_value": path.discounted_value(params),
            "max_bellman_residual": max_residual,
            "sup_norm_history": solution.sup_norm_history(),
        }),
    )?;

    let t_axis: Vec<(f64, f64)> = path.boundaries().iter().enumerate().map(|(t, &l)| (t as f64, l)).collect();
    let flat = |y: f64| vec![(0.0, y), (horizon as f64, y)];
    let mut series = vec![Series::solid("frontier l_t", t_axis), Series::dashed("search cap", flat(cap))];
    if let Some(q) = myopic {
        series.push(Series::dashed("one-shot boundary", flat(q)));
    }
    emit_svg(
        cfg,
        dir,
        "frontier",
        &LineChart {
            title: "Searched frontier by period".into(),
            x_label: "period t".into(),
            y_label: "frontier l_t".into(),
            series,
        },
    )?;
    emit_svg(
        cfg,
        dir,
        "value",
        &LineChart {
            title: "Value of continued search".into(),
            x_label: "frontier l".into(),
            y_label: "W(l)".into(),
            series: vec![Series::solid(
                "W(l)",
                solution.nodes().iter().copied().zip(solution.values().iter().copied()).collect(),
            )],
        },
    )?;
    Ok(report)
}

pub fn simulate(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    prepare(dir)?;
    let params = &cfg.params;
    let horizon = cfg.horizon.unwrap_or(SIMULATE_HORIZON);
    let (path, value) = if params.feasible_to_search() {
        let solution = value_iteration(params, &cfg.solver).map_err(solver_error)?;
        (frontier_sequence(&solution, horizon), Some(solution.values()[0]))
    } else {
        (FrontierPath::new(vec![0.0]).expect("trivial path"), None)
    };
    let sim = SimConfig {
        runs: cfg.runs,
        horizon_cap: horizon,
        seed: cfg.seed,
        params: *params,
        path: path.clone(),
    };
    let stats = simulate_batch(&sim).map_err(|e| CliError::Config(e.to_string()))?;

    let mut table = Table::new(&[
        "t",
        "active_fraction",
        "analytic_active",
        "halfwidth_3sigma",
        "success_fraction",
        "lower_bound",
    ]);
    let bound = 1.0 - params.p();
    for t in 1..=horizon {
        table.push(vec![
            t.into(),
            stats.active_fraction[t - 1].into(),
            (1.0 - params.p() * path.frontier_after(t - 1)).into(),
            stats.confidence_halfwidths[t - 1].into(),
            stats.success_fraction[t - 1].into(),
            bound.into(),
        ]);
    }
    emit(cfg, dir, "simulate", &table)?;

    let below = (0..horizon)
        .filter(|&i| stats.active_fraction[i] < bound - stats.confidence_halfwidths[i])
        .count();
    let z = value.map(|w| (stats.mean_discounted_payoff - w) / stats.payoff_std_error);
    write_json(
        &dir.join("simulate_summary.json"),
        &json!({
            "status": if value.is_some() { "ok" } else { "no_search" },
            "reason": if value.is_some() { Value::Null } else { json!(NO_SEARCH) },
            "params": params_json(params),
            "runs": cfg.runs,
            "seed": cfg.seed,
            "horizon_cap": horizon,
            "mean_discounted_payoff": stats.mean_discounted_payoff,
            "payoff_std_error": stats.payoff_std_error,
            "value_at_origin": value.unwrap_or(0.0),
            "payoff_z_score": z.filter(|z| z.is_finite()),
            "censored_fraction": stats.censored_fraction,
            "periods_below_bound": below,
        }),
    )?;

    let axis = |f: &dyn Fn(usize) -> f64| (1..=horizon).map(|t| (t as f64, f(t))).collect::<Vec<_>>();
    emit_svg(
        cfg,
        dir,
        "active",
        &LineChart {
            title: "Probability that search is still active".into(),
            x_label: "period t".into(),
            y_label: "active fraction".into(),
            series: vec![
                Series::solid("simulated", axis(&|t| stats.active_fraction[t - 1])),
                Series::solid("1 - p l_(t-1)", axis(&|t| 1.0 - params.p() * path.frontier_after(t - 1))),
                Series::dashed("1 - p", vec![(1.0, bound), (horizon as f64, bound)]),
            ],
        },
    )
}

pub fn oracle(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let params = &cfg.params;
    let horizon = cfg.horizon.unwrap_or(ORACLE_HORIZON);
    let instance = DiscreteInstance::from_model(params, cfg.slots, horizon).map_err(|e| CliError::Config(e.to_string()))?;
    let required = instance.schedule_count();
    if required > cfg.budget as f64 {
        return Err(CliError::Budget(format!(
            "{} slots over {horizon} periods need {required:.3e} schedules, budget is {}",
            cfg.slots, cfg.budget
        )));
    }
    prepare(dir)?;
    let truncated = if params.feasible_to_search() {
        Some(backward_induction(params, horizon, &cfg.solver).map_err(solver_error)?)
    } else {
        None
    };
    let report = compare_with_continuous(&instance, truncated.as_ref(), cfg.budget).map_err(|e| match e {
        SearchError::Budget { .. } => CliError::Budget(e.to_string()),
        other => CliError::Solver(other.to_string()),
    })?;
    if report.discrete.near_ties > 1 {
        eprintln!(
            "note: {} schedules tie with the reported maximizer; the earliest is shown",
            report.discrete.near_ties
        );
    }

    let n = cfg.slots as f64;
    let mut table = Table::new(&["slot", "cell_start", "cell_end", "cost", "period"]);
    for (i, (&cost, period)) in instance
        .slot_costs()
        .iter()
        .zip(report.discrete.assignment.schedule())
        .enumerate()
    {
        table.push(vec![
            (i + 1).into(),
            (i as f64 / n).into(),
            ((i + 1) as f64 / n).into(),
            cost.into(),
            period.map(|t| t as u64).map_or(Cell::Text("never".into()), Cell::Int),
        ]);
    }
    emit(cfg, dir, "oracle", &table)?;
    let s = report.structure;
    write_json(
        &dir.join("oracle_summary.json"),
        &json!({
            "params": params_json(params),
            "slots": cfg.slots,
            "horizon": horizon,
            "assignment": report.discrete.assignment.to_string(),
            "value": report.discrete.value,
            "near_ties": report.discrete.near_ties,
            "evaluated": report.discrete.evaluated,
            "no_gaps": s.no_gaps,
            "increasing_order": s.increasing_order,
            "no_breaks": s.no_breaks,
            "continuous_value": report.continuous_value,
            "value_gap": report.value_gap,
            "discrete_frontier": report.discrete_frontier,
            "continuous_frontier": report.continuous_frontier,
            "frontier_deviation": report.frontier_deviation,
        }),
    )?;
    println!(
        "best {} value {:.10} flags no_gaps={} increasing_order={} no_breaks={} gap {:.3e}",
        report.discrete.assignment, report.discrete.value, s.no_gaps, s.increasing_order, s.no_breaks, report.value_gap
    );
    Ok(())
}

/// Parameter varied by a sweep; `Scale` multiplies `v`, `c0` and `k` together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    P,
    V,
    Delta,
    C0,
    K,
    Scale,
}

impl std::str::FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "p" => SweepParam::P,
            "v" => SweepParam::V,
            "delta" => SweepParam::Delta,
            "c0" => SweepParam::C0,
            "k" => SweepParam::K,
            "scale" => SweepParam::Scale,
            other => {
                return Err(CliError::Config(format!(
                    "param: unknown sweep parameter '{other}' (expected p, v, delta, c0, k or scale)"
                )))
            }
        })
    }
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::P => "p",
            SweepParam::V => "v",
            SweepParam::Delta => "delta",
            SweepParam::C0 => "c0",
            SweepParam::K => "k",
            SweepParam::Scale => "scale",
        }
    }

    pub fn apply(self, base: &ModelParams, x: f64) -> Result<ModelParams, SearchError> {
        let cost = base.cost();
        match self {
            SweepParam::P => base.with_p(x),
            SweepParam::V => base.with_v(x),
            SweepParam::Delta => base.with_delta(x),
            SweepParam::C0 => base.with_cost(innovation_search::CostModel::new(cost.family(), x, cost.k())?),
            SweepParam::K => base.with_cost(innovation_search::CostModel::new(cost.family(), cost.c0(), x)?),
            SweepParam::Scale => base.scaled(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// From an explicit list `a,b,c` or an inclusive linear grid `start,stop,count`.
    pub fn parse(param: &str, values: Option<&str>, range: Option<&str>) -> Result<Self, CliError> {
        let param: SweepParam = param.parse()?;
        let numbers = |raw: &str, what: &str| {
            raw.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Config(format!("{what}: cannot parse '{}': {e}", s.trim())))
                })
                .collect::<Result<Vec<f64>, _>>()
        };
        let values = match (values, range) {
            (Some(v), None) => numbers(v, "values")?,
            (None, Some(r)) => {
                let parts = numbers(r, "range")?;
                let [start, stop, count] = parts[..] else {
                    return Err(CliError::Config("range: expected start,stop,count".into()));
                };
                if !(count >= 1.0 && count.fract() == 0.0) {
                    return Err(CliError::Config("range: count must be a positive integer".into()));
                }
                let n = count as usize;
                if n == 1 {
                    vec![start]
                } else {
                    (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect()
                }
            }
            _ => return Err(CliError::Config("sweep needs exactly one of --values or --range".into())),
        };
        if values.is_empty() {
            return Err(CliError::Config("values: empty sweep".into()));
        }
        Ok(Self { param, values })
    }
}

pub fn sweep(cfg: &RunConfig, spec: &SweepSpec, dir: &Path) -> Result<(), CliError> {
    let instances = spec
        .values
        .iter()
        .map(|&x| {
            spec.param
                .apply(&cfg.params, x)
                .map_err(|e| CliError::Config(format!("{} = {x}: {e}", spec.param.name())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    prepare(dir)?;

    let results: Vec<Result<SolveReport, CliError>> = instances
        .par_iter()
        .enumerate()
        .map(|(i, params)| {
            let sub = dir.join("instances").join(format!("{i:03}_{}={}", spec.param.name(), spec.values[i]));
            let local = RunConfig {
                params: *params,
                ..cfg.clone()
            };
            solve(&local, &sub)
        })
        .collect();

    let mut table = Table::new(&[
        "index",
        "param",
        "value",
        "status",
        "value_at_origin",
        "first_boundary",
        "frontier_limit",
        "search_cap",
        "myopic_boundary",
        "iterations",
        "message",
    ]);
    let mut succeeded = 0;
    for (i, r) in results.iter().enumerate() {
        let head: Vec<Cell> = vec![i.into(), spec.param.name().into(), spec.values[i].into()];
        let tail: Vec<Cell> = match r {
            Ok(rep) => {
                succeeded += 1;
                vec![
                    if rep.searched { "ok" } else { "no_search" }.into(),
                    rep.value_at_origin.into(),
                    rep.first_boundary.into(),
                    rep.limit.into(),
                    rep.cap.into(),
                    rep.myopic.into(),
                    rep.iterations.into(),
                    if rep.searched { Cell::Empty } else { NO_SEARCH.into() },
                ]
            }
            Err(e) => vec![
                "error".into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                e.to_string().into(),
            ],
        };
        table.push(head.into_iter().chain(tail).collect());
    }
    emit(cfg, dir, "sweep", &table)?;
    let points: Vec<(f64, f64)> = results
        .iter()
        .zip(&spec.values)
        .filter_map(|(r, &x)| r.as_ref().ok().map(|rep| (x, rep.value_at_origin)))
        .collect();
    emit_svg(
        cfg,
        dir,
        "sweep",
        &LineChart {
            title: format!("Value at the origin across {}", spec.param.name()),
            x_label: spec.param.name().into(),
            y_label: "W(0)".into(),
            series: vec![Series::solid("W(0)", points)],
        },
    )?;
    if succeeded == 0 {
        return Err(CliError::Solver("every sweep instance failed; see the message column".into()));
    }
    Ok(())
}
