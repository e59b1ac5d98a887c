//! Shared benchmark fixtures.

use innovation_search::{CostModel, ModelParams};

/// `p = 0.5, v = 2, δ = 0.9`, reciprocal costs `j/(1−j)`.
pub fn reference() -> ModelParams {
    ModelParams::new(0.5, 2.0, 0.9, CostModel::reciprocal(0.0, 1.0).expect("valid cost")).expect("valid params")
}

/// Same primitives with logarithmic costs `−ln(1−j)`.
pub fn logarithmic() -> ModelParams {
    ModelParams::new(0.5, 2.0, 0.9, CostModel::logarithmic(0.0, 1.0).expect("valid cost")).expect("valid params")
}
