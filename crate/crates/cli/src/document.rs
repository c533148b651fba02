//! The `mt-json/1` tree document.
//!
//! ```json
//! {"format": "mt-json/1", "kind": "merge", "name": "f",
//!  "nodes": [{"id": 0, "parent": 2, "height": 0.0}, …]}
//! ```
//!
//! Merge nodes carry a `height`; weighted nodes carry the `weight` of the edge to their
//! parent (`null` for the root). Ids are arbitrary distinct integers.

use std::collections::HashMap;
use std::path::Path;

use mted_core::{MergeTree, TreeError, WeightedTree};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

pub const FORMAT: &str = "mt-json/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Merge,
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Node {
    pub id: usize,
    pub parent: Option<usize>,
    #[serde(default)]
    pub height: Option<f64>,
    #[serde(default)]
    pub weight: Option<f64>,
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("id", &self.id)?;
        m.serialize_entry("parent", &self.parent)?;
        match self.height {
            Some(h) => m.serialize_entry("height", &h)?,
            None => m.serialize_entry("weight", &self.weight)?,
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub format: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tree {
    Merge(MergeTree),
    Weighted(WeightedTree),
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format tag {0:?}, expected \"mt-json/1\"")]
    Format(String),
    #[error("node id {0} appears twice")]
    DuplicateId(usize),
    #[error("node {node} has unknown parent {parent}")]
    UnknownParent { node: usize, parent: usize },
    #[error("node {node} is missing its {field}")]
    Missing { node: usize, field: &'static str },
    #[error("the root of a weighted tree has no weight (node {0})")]
    RootWeight(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

impl TreeDocument {
    /// Document with the tree's own vertex ids.
    pub fn from_merge(c: &MergeTree, name: Option<String>) -> Self {
        let nodes = c.vertices().map(|v| Node { id: v, parent: c.parent(v), height: Some(c.height(v)), weight: None }).collect();
        TreeDocument { format: FORMAT.into(), kind: Kind::Merge, name, nodes }
    }

    pub fn from_weighted(c: &WeightedTree, name: Option<String>) -> Self {
        let nodes = c
            .vertices()
            .map(|v| Node { id: v, parent: c.parent(v), height: None, weight: c.parent(v).map(|_| c.weight(v)) })
            .collect();
        TreeDocument { format: FORMAT.into(), kind: Kind::Weighted, name, nodes }
    }

    pub fn from_tree(t: &Tree, name: Option<String>) -> Self {
        match t {
            Tree::Merge(m) => Self::from_merge(m, name),
            Tree::Weighted(w) => Self::from_weighted(w, name),
        }
    }

    pub fn parse(s: &str) -> Result<Self, DocumentError> {
        let doc: TreeDocument = serde_json::from_str(s)?;
        if doc.format != FORMAT {
            return Err(DocumentError::Format(doc.format));
        }
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self, DocumentError> {
        let s = std::fs::read_to_string(path)
            .map_err(|source| DocumentError::Io { path: path.display().to_string(), source })?;
        Self::parse(&s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialise")
    }

    /// Validated tree; nodes are renumbered densely in document order.
    pub fn to_tree(&self) -> Result<Tree, DocumentError> {
        let mut index = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(DocumentError::DuplicateId(n.id));
            }
        }
        let parents = self
            .nodes
            .iter()
            .map(|n| match n.parent {
                None => Ok(None),
                Some(p) => index.get(&p).map(|&i| Some(i)).ok_or(DocumentError::UnknownParent { node: n.id, parent: p }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        match self.kind {
            Kind::Merge => {
                let heights = self
                    .nodes
                    .iter()
                    .map(|n| n.height.ok_or(DocumentError::Missing { node: n.id, field: "height" }))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Tree::Merge(MergeTree::new(&parents, &heights)?))
            }
            Kind::Weighted => {
                let weights = self
                    .nodes
                    .iter()
                    .map(|n| match (n.parent, n.weight) {
                        (None, None) => Ok(0.0),
                        (None, Some(_)) => Err(DocumentError::RootWeight(n.id)),
                        (Some(_), Some(w)) => Ok(w),
                        (Some(_), None) => Err(DocumentError::Missing { node: n.id, field: "weight" }),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Tree::Weighted(WeightedTree::new(&parents, &weights)?))
            }
        }
    }
}
