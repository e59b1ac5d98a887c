//! Problem instance and closed-form quantities.
//!
//! Projects are indexed by `j ∈ [0, 1)` in order of increasing marginal cost
//! `c(j)`. Under an increasing-interval policy the searched set is always a
//! prefix `[0, l)`, so every belief and payoff below is a function of the
//! frontier `l` alone.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SearchError};
use crate::roots::{bisect_increasing, EDGE_EPS, ROOT_TOL};

/// Parametric family of the cost density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostFamily {
    /// `c(j) = c0 + k·j/(1−j)`
    Reciprocal,
    /// `c(j) = c0 − k·ln(1−j)`
    Logarithmic,
}

impl CostFamily {
    pub fn name(self) -> &'static str {
        match self {
            CostFamily::Reciprocal => "reciprocal",
            CostFamily::Logarithmic => "logarithmic",
        }
    }
}

impl std::str::FromStr for CostFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reciprocal" => Ok(CostFamily::Reciprocal),
            "logarithmic" | "log" => Ok(CostFamily::Logarithmic),
            other => Err(format!(
                "unknown cost family `{other}` (expected reciprocal or logarithmic)"
            )),
        }
    }
}

impl std::fmt::Display for CostFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Continuous, strictly increasing cost density with `c(j) → ∞` as `j → 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    family: CostFamily,
    c0: f64,
    k: f64,
}

impl CostModel {
    pub fn new(family: CostFamily, c0: f64, k: f64) -> Result<Self> {
        if !(c0.is_finite() && c0 >= 0.0) {
            return Err(SearchError::Domain {
                name: "c0",
                value: c0,
                expected: "finite and >= 0",
            });
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(SearchError::Domain {
                name: "k",
                value: k,
                expected: "finite and > 0",
            });
        }
        Ok(Self { family, c0, k })
    }

    pub fn reciprocal(c0: f64, k: f64) -> Result<Self> {
        Self::new(CostFamily::Reciprocal, c0, k)
    }

    pub fn logarithmic(c0: f64, k: f64) -> Result<Self> {
        Self::new(CostFamily::Logarithmic, c0, k)
    }

    pub fn family(&self) -> CostFamily {
        self.family
    }

    /// Baseline cost `c(0)`.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Same family with `c0` and `k` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.family, self.c0 * factor, self.k * factor)
    }

    /// `c(j)`; fails outside `[0, 1)`.
    pub fn density(&self, j: f64) -> Result<f64> {
        check_unit("j", j)?;
        Ok(self.density_unchecked(j))
    }

    pub(crate) fn density_unchecked(&self, j: f64) -> f64 {
        match self.family {
            CostFamily::Reciprocal => self.c0 + self.k * j / (1.0 - j),
            CostFamily::Logarithmic => self.c0 - self.k * (-j).ln_1p(),
        }
    }

    /// `C([a, b)) = ∫_a^b c(j) dj` in closed form; requires `0 ≤ a ≤ b < 1`.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        check_order("a", a, "b", b)?;
        Ok(self.integral_unchecked(a, b))
    }

    /// Closed form written in terms of the width `d = b − a` so that short
    /// intervals near the top of the project set keep full relative precision.
    pub(crate) fn integral_unchecked(&self, a: f64, b: f64) -> f64 {
        let d = b - a;
        if d <= 0.0 {
            return 0.0;
        }
        let rest = 1.0 - a;
        let y = d / rest;
        let shape = match self.family {
            // ∫ j/(1−j) = −d − ln((1−b)/(1−a))
            CostFamily::Reciprocal => -d - (-y).ln_1p(),
            // ∫ −ln(1−j) = (1−b)ln(1−b) − (1−a)ln(1−a) + d
            CostFamily::Logarithmic => -d * rest.ln() + (rest - d) * (-y).ln_1p() + d,
        };
        self.c0 * d + self.k * shape
    }

    /// `∫_a^1 c(j) dj`, which is `+∞` for the reciprocal family.
    pub fn tail_integral(&self, a: f64) -> Result<f64> {
        check_unit("a", a)?;
        let rest = 1.0 - a;
        Ok(match self.family {
            CostFamily::Reciprocal => f64::INFINITY,
            CostFamily::Logarithmic => self.c0 * rest + self.k * (rest - rest * rest.ln()),
        })
    }
}

/// Economic primitives of one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    p: f64,
    v: f64,
    delta: f64,
    cost: CostModel,
}

impl ModelParams {
    pub fn new(p: f64, v: f64, delta: f64, cost: CostModel) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(SearchError::Domain {
                name: "p",
                value: p,
                expected: "strictly between 0 and 1",
            });
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(SearchError::Domain {
                name: "v",
                value: v,
                expected: "finite and > 0",
            });
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(SearchError::Domain {
                name: "delta",
                value: delta,
                expected: "strictly between 0 and 1",
            });
        }
        Ok(Self { p, v, delta, cost })
    }

    /// Prior probability that the innovation is feasible.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Prize value.
    pub fn v(&self) -> f64 {
        self.v
    }

    /// Discount factor.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn cost(&self) -> &CostModel {
        &self.cost
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(p, self.v, self.delta, self.cost)
    }

    pub fn with_v(&self, v: f64) -> Result<Self> {
        Self::new(self.p, v, self.delta, self.cost)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.p, self.v, delta, self.cost)
    }

    pub fn with_cost(&self, cost: CostModel) -> Result<Self> {
        Self::new(self.p, self.v, self.delta, cost)
    }

    /// Prize and both cost parameters multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.p, self.v * factor, self.delta, self.cost.scaled(factor)?)
    }

    /// Expected prize of the whole project set, `p·v`.
    pub fn expected_prize(&self) -> f64 {
        self.p * self.v
    }

    /// Posterior that the innovation is feasible after `[0, l)` failed:
    /// `(1−l)p / (1 − l·p)`.
    pub fn posterior_feasible(&self, l: Frontier) -> f64 {
        let l = l.get();
        (1.0 - l) * self.p / (1.0 - l * self.p)
    }

    /// Probability that searching `[l, l_next)` succeeds, conditional on
    /// failure so far: `p(l_next − l)/(1 − l·p)`.
    pub fn success_probability(&self, l: Frontier, l_next: Frontier) -> Result<f64> {
        check_order("l", l.get(), "l_next", l_next.get())?;
        Ok(self.success_probability_unchecked(l.get(), l_next.get()))
    }

    pub(crate) fn success_probability_unchecked(&self, l: f64, l_next: f64) -> f64 {
        self.p * (l_next - l) / (1.0 - l * self.p)
    }

    /// `1 − success_probability`, evaluated as `(1 − l_next·p)/(1 − l·p)`.
    pub(crate) fn survival_unchecked(&self, l: f64, l_next: f64) -> f64 {
        (1.0 - l_next * self.p) / (1.0 - l * self.p)
    }

    /// Whether any search is worthwhile: `p·v > c(0)`.
    pub fn feasible_to_search(&self) -> bool {
        self.expected_prize() > self.cost.c0()
    }

    /// One-shot optimal boundary `q*` solving `p·v = c(q*)`, or `None` when
    /// no search is worthwhile.
    pub fn myopic_boundary(&self) -> Option<f64> {
        if !self.feasible_to_search() {
            return None;
        }
        let target = self.expected_prize();
        let f = |j: f64| self.cost.density_unchecked(j) - target;
        Some(bisect_increasing(f, 0.0, 1.0 - EDGE_EPS, ROOT_TOL))
    }

    /// Boundary that solves the last-period condition from frontier `l`:
    /// `p·v/(1 − l·p) = c(l')`, found by bisection on `[l, 1 − ε]`.
    ///
    /// Returns `l` itself when the marginal project at `l` is already too costly.
    pub fn last_period_boundary(&self, l: Frontier) -> f64 {
        let l = l.get();
        let benefit = self.marginal_benefit_unchecked(l);
        let f = |j: f64| self.cost.density_unchecked(j) - benefit;
        bisect_increasing(f, l, 1.0 - EDGE_EPS, ROOT_TOL).max(l)
    }

    /// Conditional marginal benefit of the project at the frontier,
    /// `p·v/(1 − l·p)`.
    pub fn marginal_benefit(&self, l: Frontier) -> f64 {
        self.marginal_benefit_unchecked(l.get())
    }

    pub(crate) fn marginal_benefit_unchecked(&self, l: f64) -> f64 {
        self.expected_prize() / (1.0 - l * self.p)
    }

    /// Unconditional cost of the frontier project measured against `p·v`:
    /// `c(j)(1 − j·p) − p·v`. Negative where extending the frontier to `j`
    /// pays for itself.
    fn cap_gap(&self, j: f64) -> f64 {
        self.cost.density_unchecked(j) * (1.0 - j * self.p) - self.expected_prize()
    }

    /// Abscissae where `c(j)(1 − j·p)` crosses `p·v` from below, in increasing
    /// order. The last entry is the search cap. Frontier paths can only
    /// accumulate at these points.
    pub fn accumulation_points(&self) -> Result<Vec<f64>> {
        if !self.feasible_to_search() {
            return Err(SearchError::NoSearch {
                benefit: self.expected_prize(),
                base_cost: self.cost.c0(),
            });
        }
        let top = 1.0 - EDGE_EPS;
        if self.cap_gap(top) <= 0.0 {
            return Err(SearchError::CapUnresolved { edge: EDGE_EPS });
        }
        // Scan in u = 1 − j on a log grid: dense near j → 1 without
        // starving the bulk of the interval.
        const SCAN: usize = 4096;
        let log_top = EDGE_EPS.ln();
        let mut points = Vec::with_capacity(SCAN + 1);
        points.push(0.0);
        for i in 1..SCAN {
            let u = (log_top * i as f64 / SCAN as f64).exp();
            points.push(1.0 - u);
        }
        points.push(top);
        points.dedup();
        let mut roots = Vec::new();
        for pair in points.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if self.cap_gap(lo) <= 0.0 && self.cap_gap(hi) > 0.0 {
                roots.push(bisect_increasing(|j| self.cap_gap(j), lo, hi, ROOT_TOL));
            }
        }
        Ok(roots)
    }

    /// Search cap `j*`: the largest root of `c(j)(1 − j·p) = p·v`.
    ///
    /// Beyond `j*` every project costs more in expectation than its share of
    /// the prize whenever it is examined, so no optimal policy searches past it.
    pub fn search_upper_bound(&self) -> Result<f64> {
        let roots = self.accumulation_points()?;
        Ok(*roots.last().expect("cap gap changes sign on the scanned bracket"))
    }
}

/// Searched boundary `l ∈ [0, 1)`; the set `[0, l)` has been examined.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Frontier(f64);

impl Frontier {
    pub const ORIGIN: Frontier = Frontier(0.0);

    pub fn new(l: f64) -> Result<Self> {
        check_unit("l", l)?;
        Ok(Frontier(l))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(SearchError::Domain {
            name,
            value: x,
            expected: "in [0, 1)",
        })
    }
}

fn check_order(lower_name: &'static str, lower: f64, upper_name: &'static str, upper: f64) -> Result<()> {
    if lower <= upper {
        Ok(())
    } else {
        Err(SearchError::Ordering {
            lower_name,
            lower,
            upper_name,
            upper,
        })
    }
}
