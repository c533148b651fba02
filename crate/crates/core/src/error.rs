use std::fmt;

use thiserror::Error;

use crate::tree::VertexId;

/// A single structural or numeric problem found while validating a tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    LengthMismatch { parents: usize, values: usize },
    NoRoot,
    MultipleRoots(Vec<VertexId>),
    ParentOutOfRange { vertex: VertexId, parent: VertexId },
    Cycle { vertex: VertexId },
    NonFinite { vertex: VertexId },
    NonPositiveWeight { vertex: VertexId, weight: f64 },
    NonMonotoneHeight { child: VertexId, parent: VertexId, child_height: f64, parent_height: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "tree has no vertices"),
            Violation::LengthMismatch { parents, values } => {
                write!(f, "{parents} parent entries but {values} values")
            }
            Violation::NoRoot => write!(f, "no root (every vertex has a parent)"),
            Violation::MultipleRoots(r) => write!(f, "multiple roots: {r:?}"),
            Violation::ParentOutOfRange { vertex, parent } => {
                write!(f, "vertex {vertex} has unknown parent {parent}")
            }
            Violation::Cycle { vertex } => write!(f, "vertex {vertex} lies on a cycle"),
            Violation::NonFinite { vertex } => write!(f, "vertex {vertex} has a non-finite value"),
            Violation::NonPositiveWeight { vertex, weight } => {
                write!(f, "edge {vertex} has non-positive weight {weight}")
            }
            Violation::NonMonotoneHeight { child, parent, child_height, parent_height } => write!(
                f,
                "height of {parent} ({parent_height}) does not exceed height of its child {child} ({child_height})"
            ),
        }
    }
}

/// Every violation found in one input, in discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport(pub Vec<Violation>);

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl std::error::Error for ValidationReport {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("invalid tree: {0}")]
    Invalid(ValidationReport),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("operation not allowed on the root")]
    Root,
    #[error("vertex {vertex} is not of order two (it has {children} children)")]
    NotOrderTwo { vertex: VertexId, children: usize },
    #[error("cannot split edge {vertex} of weight {weight} at lower weight {lower}")]
    BadSplit { vertex: VertexId, weight: f64, lower: f64 },
    #[error("truncation level {level} is below the maximal height {max_height}")]
    TruncationTooLow { level: f64, max_height: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EditError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("shrink of edge {vertex} to non-positive weight {weight}")]
    NonPositiveShrink { vertex: VertexId, weight: f64 },
    #[error("inserted edge must have positive weight, got {0}")]
    NonPositiveInsert(f64),
    #[error("vertex {child} is not a child of {parent}")]
    NotAChild { parent: VertexId, child: VertexId },
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
    #[error("path order p must be >= 1, got {0}")]
    BadOrder(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("search budget of {budget} nodes exhausted")]
    BudgetExhausted { budget: u64 },
    #[error("oracle limited to {cap} edges per tree, got {edges}")]
    OracleTooLarge { cap: usize, edges: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Edit(#[from] EditError),
}
