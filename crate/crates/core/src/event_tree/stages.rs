use super::{EventTree, NodeId, NodeKind, StageId};
use crate::numeric::tables_match;

/// What the members of a stage have in common.
#[derive(Debug, Clone, PartialEq)]
pub enum StageKind {
    /// Label → probability table, sorted by label; values are those of the
    /// first member.
    Chance(Vec<(String, f64)>),
    /// Sorted outgoing label set.
    Decision(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub kind: StageKind,
    /// Members in document order.
    pub members: Vec<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StagePartition {
    assignment: Vec<Option<StageId>>,
    stages: Vec<Stage>,
}

impl StagePartition {
    /// `None` for leaves.
    pub fn stage_of(&self, node: NodeId) -> Option<StageId> {
        self.assignment.get(node.0).copied().flatten()
    }

    pub fn stage(&self, id: StageId) -> &Stage {
        &self.stages[id.0]
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn same_stage(&self, a: NodeId, b: NodeId) -> bool {
        match (self.stage_of(a), self.stage_of(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }
}

/// Builds the stage key of a non-leaf node from its outgoing edges.
pub(crate) fn stage_key(tree: &EventTree, node: NodeId) -> Option<StageKind> {
    let edges = tree.out_edges(node);
    match tree.node(node).kind {
        NodeKind::Leaf { .. } => None,
        NodeKind::Chance => Some(StageKind::Chance(
            edges
                .iter()
                .map(|&e| {
                    let e = tree.edge(e);
                    (e.label.clone(), e.prob.unwrap_or(0.0))
                })
                .collect(),
        )),
        NodeKind::Decision => Some(StageKind::Decision(
            edges.iter().map(|&e| tree.edge(e).label.clone()).collect(),
        )),
    }
}

pub(crate) fn keys_match(a: &StageKind, b: &StageKind) -> bool {
    match (a, b) {
        (StageKind::Chance(x), StageKind::Chance(y)) => tables_match(x, y),
        (StageKind::Decision(x), StageKind::Decision(y)) => x == y,
        _ => false,
    }
}

/// Groups keys into stages: each key joins the first stage whose
/// representative matches, so ids are ordered by smallest member.
pub(crate) fn group_keys<T: Copy>(
    keyed: impl IntoIterator<Item = (T, StageKind)>,
) -> Vec<(StageKind, Vec<T>)> {
    let mut groups: Vec<(StageKind, Vec<T>)> = Vec::new();
    for (item, key) in keyed {
        match groups.iter_mut().find(|(k, _)| keys_match(k, &key)) {
            Some((_, members)) => members.push(item),
            None => groups.push((key, vec![item])),
        }
    }
    groups
}

/// Partitions the non-leaf nodes into stages.
///
/// Chance nodes share a stage when they have the same outgoing labels with
/// label-wise probabilities within [`PROB_TOLERANCE`]; decision nodes share a
/// stage when their label sets coincide. Nodes are visited in document order
/// and each joins the first compatible stage.
///
/// [`PROB_TOLERANCE`]: crate::numeric::PROB_TOLERANCE
pub fn infer_stages(tree: &EventTree) -> StagePartition {
    let keyed = tree
        .node_ids()
        .filter_map(|n| stage_key(tree, n).map(|k| (n, k)));
    let groups = group_keys(keyed);
    let mut assignment = vec![None; tree.nodes().len()];
    let stages = groups
        .into_iter()
        .enumerate()
        .map(|(i, (kind, members))| {
            for m in &members {
                assignment[m.0] = Some(StageId(i));
            }
            Stage { kind, members }
        })
        .collect();
    StagePartition { assignment, stages }
}
