//! Position partition of an event tree and construction of the CEG.
//!
//! Positions are found bottom-up: every non-leaf node gets a structural
//! signature built from its stage (chance) or its labels (decision) and, per
//! outgoing edge, the label, the edge-utility class and the class of the
//! child. Children are referred to by class id, so signatures stay small and
//! two nodes share a position exactly when their signatures are equal.

use std::collections::HashMap;

use thiserror::Error;

use crate::ceg::{Ceg, CegEdge, Position, PositionId, PositionKind};
use crate::event_tree::{EventTree, Flavour, NodeId, NodeKind, StageId};
use crate::numeric::{ValueClasses, UTILITY_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoalesceError {
    #[error("requested {requested} graph, but the model has {found} features")]
    FlavourMismatch { requested: Flavour, found: Flavour },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Child {
    Leaf(usize),
    Node(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Signature {
    Chance(StageId, Vec<(String, Option<usize>, Child)>),
    Decision(Vec<(String, Option<usize>, Child)>),
}

/// Partition of the non-leaf tree nodes into positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionPartition {
    /// Classes ordered by smallest member; members in document order.
    classes: Vec<Vec<NodeId>>,
    assignment: Vec<Option<usize>>,
}

impl PositionPartition {
    pub fn classes(&self) -> &[Vec<NodeId>] {
        &self.classes
    }

    /// `None` for leaves.
    pub fn class_of(&self, node: NodeId) -> Option<usize> {
        self.assignment.get(node.0).copied().flatten()
    }

    pub fn same_position(&self, a: NodeId, b: NodeId) -> bool {
        matches!((self.class_of(a), self.class_of(b)), (Some(x), Some(y)) if x == y)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Classes with more than one member.
    pub fn merged(&self) -> impl Iterator<Item = &[NodeId]> {
        self.classes
            .iter()
            .filter(|c| c.len() > 1)
            .map(Vec::as_slice)
    }
}

fn leaf_classes(tree: &EventTree) -> Vec<Option<usize>> {
    let mut classes = ValueClasses::new(UTILITY_TOLERANCE);
    tree.nodes()
        .iter()
        .map(|n| match n.kind {
            NodeKind::Leaf { utility } => Some(classes.classify(utility)),
            _ => None,
        })
        .collect()
}

/// Computes the position partition of a staged tree.
pub fn compute_positions(tree: &EventTree) -> PositionPartition {
    let leaf_class = leaf_classes(tree);
    let mut util_classes = ValueClasses::new(UTILITY_TOLERANCE);
    let edge_util: Vec<Option<usize>> = tree
        .edges()
        .iter()
        .map(|e| e.utility.map(|u| util_classes.classify(u)))
        .collect();

    let mut interned: HashMap<Signature, usize> = HashMap::new();
    let mut raw = vec![None; tree.nodes().len()];
    for node in tree.breadth_first().into_iter().rev() {
        let kind = tree.node(node).kind;
        if kind.is_leaf() {
            continue;
        }
        let entries = tree
            .out_edges(node)
            .iter()
            .map(|&e| {
                let edge = tree.edge(e);
                let child = match leaf_class[edge.target.0] {
                    Some(c) => Child::Leaf(c),
                    None => Child::Node(raw[edge.target.0].expect("children visited first")),
                };
                (edge.label.clone(), edge_util[e.0], child)
            })
            .collect();
        let sig = match kind {
            NodeKind::Chance => Signature::Chance(
                tree.stages().stage_of(node).expect("chance nodes are staged"),
                entries,
            ),
            _ => Signature::Decision(entries),
        };
        let next = interned.len();
        raw[node.0] = Some(*interned.entry(sig).or_insert(next));
    }

    // Renumber by smallest member in document order.
    let mut renumber: HashMap<usize, usize> = HashMap::new();
    let mut classes: Vec<Vec<NodeId>> = Vec::new();
    let mut assignment = vec![None; tree.nodes().len()];
    for node in tree.node_ids() {
        if let Some(r) = raw[node.0] {
            let id = *renumber.entry(r).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[id].push(node);
            assignment[node.0] = Some(id);
        }
    }
    PositionPartition {
        classes,
        assignment,
    }
}

fn common_depth(tree: &EventTree, members: &[NodeId]) -> Option<usize> {
    let d = tree.depth(members[0]);
    members.iter().all(|&m| tree.depth(m) == d).then_some(d)
}

/// Builds the chain event graph of `tree`.
///
/// Type 1 merges every leaf into one sink and moves leaf utilities onto the
/// incoming edges; Type 2 creates one utility terminal per distinct leaf
/// utility.
pub fn build_ceg(tree: &EventTree, flavour: Flavour) -> Result<Ceg, CoalesceError> {
    if flavour == Flavour::Type2 && tree.has_edge_utilities() {
        return Err(CoalesceError::FlavourMismatch {
            requested: Flavour::Type2,
            found: Flavour::Type1,
        });
    }
    let partition = compute_positions(tree);

    // (smallest member, position) for internal positions and terminals.
    let mut drafts: Vec<(NodeId, Position)> = partition
        .classes()
        .iter()
        .map(|members| {
            let rep = members[0];
            let kind = match tree.node(rep).kind {
                NodeKind::Chance => PositionKind::Chance,
                _ => PositionKind::Decision,
            };
            let position = Position {
                name: tree.node(rep).name.clone(),
                kind,
                stage: tree.stages().stage_of(rep),
                depth: common_depth(tree, members),
                members: members.clone(),
            };
            (rep, position)
        })
        .collect();

    let leaves: Vec<NodeId> = tree
        .node_ids()
        .filter(|&n| tree.node(n).kind.is_leaf())
        .collect();
    let mut sink = None;
    match flavour {
        Flavour::Type2 => {
            let mut values = ValueClasses::new(UTILITY_TOLERANCE);
            let mut groups: Vec<Vec<NodeId>> = Vec::new();
            for &leaf in &leaves {
                let NodeKind::Leaf { utility } = tree.node(leaf).kind else {
                    unreachable!()
                };
                let c = values.classify(utility);
                if c == groups.len() {
                    groups.push(Vec::new());
                }
                groups[c].push(leaf);
            }
            for (c, members) in groups.into_iter().enumerate() {
                drafts.push((
                    members[0],
                    Position {
                        name: tree.node(members[0]).name.clone(),
                        kind: PositionKind::Utility(values.representative(c)),
                        stage: None,
                        depth: common_depth(tree, &members),
                        members,
                    },
                ));
            }
        }
        Flavour::Type1 => {
            sink = Some(Position {
                name: "sink".to_string(),
                kind: PositionKind::Sink,
                stage: None,
                depth: common_depth(tree, &leaves),
                members: leaves,
            });
        }
    }
    drafts.sort_by_key(|(rep, _)| *rep);
    let mut positions: Vec<Position> = drafts.into_iter().map(|(_, p)| p).collect();
    if let Some(sink) = sink {
        positions.push(sink);
    }

    let mut position_of: HashMap<NodeId, PositionId> = HashMap::new();
    for (i, p) in positions.iter().enumerate() {
        for &m in &p.members {
            position_of.insert(m, PositionId(i));
        }
    }

    let mut edges = Vec::new();
    for (i, p) in positions.iter().enumerate() {
        if p.kind.is_terminal() {
            continue;
        }
        let rep = p.members[0];
        for &e in tree.out_edges(rep) {
            let edge = tree.edge(e);
            let leaf_utility = match tree.node(edge.target).kind {
                NodeKind::Leaf { utility } => Some(utility),
                _ => None,
            };
            let utility = match flavour {
                Flavour::Type2 => None,
                Flavour::Type1 if edge.utility.is_none() && leaf_utility.is_none() => None,
                Flavour::Type1 => Some(edge.utility.unwrap_or(0.0) + leaf_utility.unwrap_or(0.0)),
            };
            edges.push(CegEdge {
                source: PositionId(i),
                target: position_of[&edge.target],
                label: edge.label.clone(),
                prob: edge.prob,
                utility,
            });
        }
    }
    let root = position_of[&tree.root()];
    Ok(Ceg::new(positions, edges, root, flavour))
}
