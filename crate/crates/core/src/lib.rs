//! Edit distances, geodesics and Fréchet means for merge trees.
//!
//! The crate is organised bottom-up:
//!
//! * [`tree`] — weighted trees, merge trees, ghosting/splitting, canonical forms;
//! * [`filtration`] — merge trees and persistence diagrams of piecewise-linear functions;
//! * [`edit`] — edits, edit paths and mappings between weighted trees;
//! * [`distance`] — the exact edit distance (solver + brute-force oracle) and truncation;
//! * [`geometry`] — geodesics, local constants, tangent vectors and Fréchet means;
//! * [`baselines`] — bottleneck/Wasserstein distances, coupling costs, the naive triplet distance;
//! * [`simulation`] — the peak-shift function family used for experiments.
//!
//! All floating-point comparisons use the absolute tolerance [`TOL`].

pub mod assignment;
pub mod baselines;
pub mod distance;
pub mod edit;
pub mod error;
pub mod filtration;
pub mod geometry;
pub mod mds;
pub mod random;
pub mod simulation;
pub mod tree;

pub use distance::{
    distance_matrix, edit_distance, edit_distance_oracle, merge_tree_distance, truncate,
    untruncate, DistanceResult, SolverConfig,
};
pub use edit::{Edit, EditPath, Mapping};
pub use error::{DistanceError, EditError, TreeError};
pub use filtration::{merge_tree_from_pl, persistence_diagram, PersistenceDiagram, PlFunction};
pub use tree::{MergeTree, VertexId, WeightedTree};

/// Absolute tolerance used for every equality test on weights, heights and costs.
pub const TOL: f64 = 1e-9;

/// `|a - b| <= TOL`.
#[inline]
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}
