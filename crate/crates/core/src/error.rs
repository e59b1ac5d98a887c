use thiserror::Error;

/// Errors raised by the model, solver, oracle and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    /// A scalar argument fell outside its legal domain.
    #[error("{name} = {value} is outside its domain: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// An ordered pair of frontier arguments was reversed.
    #[error("ordering violated: {lower_name} = {lower} must not exceed {upper_name} = {upper}")]
    Ordering {
        lower_name: &'static str,
        lower: f64,
        upper_name: &'static str,
        upper: f64,
    },

    /// A configuration field was rejected.
    #[error("invalid {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    /// `p·v ≤ c(0)`: searching is never worthwhile, so there is no search cap.
    #[error("no search is optimal: p·v = {benefit} does not exceed c(0) = {base_cost}")]
    NoSearch { benefit: f64, base_cost: f64 },

    /// The search cap lies closer to 1 than double precision can resolve.
    #[error("search cap is not bracketed below 1 - {edge:e}; the instance is not representable")]
    CapUnresolved { edge: f64 },

    /// Value iteration hit its iteration limit.
    #[error("value iteration did not converge after {iterations} iterations (last sup-norm differences: {tail:?})")]
    NonConvergence { iterations: usize, tail: Vec<f64> },

    /// Exhaustive enumeration would exceed the evaluation budget.
    #[error("enumeration needs {required} evaluations, over the budget of {limit}")]
    Budget { required: f64, limit: u64 },

    /// A diagnostic was requested where it is undefined.
    #[error("not applicable: {0}")]
    NotApplicable(&'static str),
}

pub type Result<T, E = SearchError> = std::result::Result<T, E>;
