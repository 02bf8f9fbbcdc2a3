//! CatCMA with margin for mixed continuous, integer and categorical
//! black-box optimization, and its bi-objective extension.

pub mod benchmarks;
pub mod categorical;
pub mod cma;
pub mod error;
pub mod margin;
pub mod multi_objective;
pub mod normal;
pub mod optimizer;
pub mod sampler;
pub mod space;

pub use benchmarks::{make_bi, make_single, optimum_of, Benchmark, BenchmarkSpec};
pub use categorical::CategoricalState;
pub use cma::{CmaHyperparameters, GaussianState};
pub use error::{Error, Result};
pub use margin::{MarginConfig, MarginMode};
pub use multi_objective::{ComoCatCmaWm, ComoSettings, ParetoArchive};
pub use optimizer::{CatCmaWm, Settings, StopReason, Variant};
pub use sampler::{enc, ThresholdTable};
pub use space::{MixedSolution, Objective, SearchSpace};
