//! Coloured event trees.
//!
//! An [`EventTree`] is the validated form of a [`ModelDocument`]: a rooted tree
//! of chance, decision and leaf nodes whose edges carry labels, probabilities
//! (chance edges only) and optional utilities. Every non-leaf node belongs to
//! a stage; two edges share a colour when their sources share a stage and the
//! edges share a label.
//!
//! [`ModelDocument`]: crate::model_io::ModelDocument

pub(crate) mod stages;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

pub use stages::{infer_stages, Stage, StageKind, StagePartition};
pub use validate::{validate_tree, ValidationError, ValidationErrorKind, ValidationErrors};

/// Tree node, indexed in document declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StageId(pub usize);

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl std::str::FromStr for StageId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('s')
            .and_then(|n| n.parse().ok())
            .map(StageId)
            .ok_or_else(|| format!("`{s}` is not a stage id (expected s<N>)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Chance,
    Decision,
    Leaf { utility: f64 },
}

impl NodeKind {
    pub fn is_leaf(&self) -> bool {
        matches!(self, NodeKind::Leaf { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub name: String,
    pub kind: NodeKind,
    /// Line of the declaring `node`/`leaf` statement.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEdge {
    pub source: NodeId,
    pub target: NodeId,
    pub label: String,
    pub prob: Option<f64>,
    pub utility: Option<f64>,
    pub line: usize,
}

/// Type 1 graphs carry utilities on edges and collapse leaves into one sink;
/// Type 2 graphs keep utilities on leaves and give each distinct utility value
/// its own terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavour {
    Type1,
    Type2,
}

impl fmt::Display for Flavour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavour::Type1 => "type1",
            Flavour::Type2 => "type2",
        })
    }
}

/// Name of the utility variable in conditional-independence statements.
pub const UTILITY_VARIABLE: &str = "U";

/// Variable names attached to tree depths (`level <k> var=<name>`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Levels {
    names: BTreeMap<usize, String>,
}

impl Levels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, depth: usize, var: impl Into<String>) {
        self.names.insert(depth, var.into());
    }

    pub fn var(&self, depth: usize) -> Option<&str> {
        self.names.get(&depth).map(String::as_str)
    }

    pub fn depth_of(&self, var: &str) -> Option<usize> {
        self.names
            .iter()
            .find_map(|(d, v)| (v == var).then_some(*d))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> {
        self.names.iter().map(|(d, v)| (*d, v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

impl FromIterator<(usize, String)> for Levels {
    fn from_iter<I: IntoIterator<Item = (usize, String)>>(iter: I) -> Self {
        Levels {
            names: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventTree {
    nodes: Vec<TreeNode>,
    edges: Vec<TreeEdge>,
    root: NodeId,
    /// Outgoing edges per node, sorted by label.
    out_edges: Vec<Vec<EdgeId>>,
    parent: Vec<Option<EdgeId>>,
    depth: Vec<usize>,
    stages: StagePartition,
    flavour: Flavour,
    levels: Levels,
}

impl EventTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id.0]
    }

    pub fn edge(&self, id: EdgeId) -> &TreeEdge {
        &self.edges[id.0]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn out_edges(&self, id: NodeId) -> &[EdgeId] {
        &self.out_edges[id.0]
    }

    pub fn parent_edge(&self, id: NodeId) -> Option<EdgeId> {
        self.parent[id.0]
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.depth[id.0]
    }

    pub fn stages(&self) -> &StagePartition {
        &self.stages
    }

    /// Type 1 when any edge carries a utility, Type 2 otherwise.
    pub fn flavour(&self) -> Flavour {
        self.flavour
    }

    pub fn has_edge_utilities(&self) -> bool {
        self.edges.iter().any(|e| e.utility.is_some())
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    /// Nodes in breadth-first order from the root; parents precede children.
    pub fn breadth_first(&self) -> Vec<NodeId> {
        let mut order = vec![self.root];
        let mut i = 0;
        while i < order.len() {
            let n = order[i];
            order.extend(self.out_edges(n).iter().map(|&e| self.edge(e).target));
            i += 1;
        }
        order
    }

    /// Edges on the path from the root down to `id`.
    pub fn history(&self, id: NodeId) -> Vec<EdgeId> {
        let mut path = Vec::new();
        let mut cur = id;
        while let Some(e) = self.parent[cur.0] {
            path.push(e);
            cur = self.edges[e.0].source;
        }
        path.reverse();
        path
    }
}
