//! Bi-objective indicators, the Pareto archive, and the Sofomore loop.

pub mod archive;
pub mod indicators;
pub mod sofomore;

pub use archive::ParetoArchive;
pub use indicators::{dominates, epf_distance, hvi, hypervolume_2d, uhvi, weakly_dominates, Point};
pub use sofomore::{box_transform, incumbent, ComoCatCmaWm, ComoSettings, Evaluated, Kernel};
