//! Closed-form weights, Muckenhoupt constants and the two-sided growth class
//! of weight sequences.

mod expr;
pub mod field;
mod muckenhoupt;
mod spec;
mod xclass;

pub use expr::WeightExpr;
pub use field::{cell_averages, cell_moments, cell_moments_at, cube_averages, cube_moments, gauss_legendre01, CubeAverager, Avg, Moment};
pub use muckenhoupt::{
    a1_constant, ap_constant, ap_constant_family, reverse_holder_probe, same_constant_check, ConstantEstimate, ReverseHolderProbe,
    SameConstant, Witness,
};
pub use spec::{SampledWeights, WeightSequence, WeightSequenceDef, WeightSpec};
pub use xclass::{alpha_grid, pair_maxima, xclass_constants, xclass_fit, PairMaxima, PairWitness, XClassFit, XClassReport};

use serde::{Deserialize, Serialize};

/// Report record for a Muckenhoupt-type constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub weight: String,
    pub p: f64,
    pub family: String,
    pub constant: f64,
    pub witness_cube: Witness,
}
