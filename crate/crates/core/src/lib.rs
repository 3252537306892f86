//! AdaBoost as coordinate descent on the exponential loss, with
//! convergence-rate instrumentation, adversarial datasets, the
//! zero-loss/finite-loss decomposition and brute-force oracles.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod booster;
pub mod datasets;
pub mod decomposition;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod matrix;
pub mod oracle;
pub mod verify;

pub use booster::{run, BoostTrace, ReferenceTrace, RoundRecord, TerminalStatus, Variant};
pub use datasets::{parse_dataset, NamedInstance};
pub use decomposition::{decompose, near_optimal_solution, rate_constants, Decomposition, RateConstants};
pub use error::{Error, Result};
pub use matrix::{
    best_edge, distribution, edge, exp_loss, margins, set_loss, Combination, ExampleDistribution,
    ExampleSet, FeatureMatrix,
};
