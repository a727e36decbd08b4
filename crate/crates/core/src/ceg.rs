//! Chain event graphs: the quotient of an event tree under its position
//! partition. Parallel edges between two positions are kept as separate,
//! individually addressable edges.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::event_tree::stages::{group_keys, StageKind};
use crate::event_tree::{Flavour, NodeId, StageId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CegEdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositionKind {
    Chance,
    Decision,
    /// Single terminal of a Type 1 graph; its value is zero.
    Sink,
    /// Type 2 terminal holding one utility value.
    Utility(f64),
}

impl PositionKind {
    pub fn is_terminal(&self) -> bool {
        matches!(self, PositionKind::Sink | PositionKind::Utility(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Position {
    /// Name of the first member in document order (`sink` for a Type 1 sink).
    pub name: String,
    pub kind: PositionKind,
    pub stage: Option<StageId>,
    /// Tree depth shared by all members, if they agree.
    pub depth: Option<usize>,
    /// Tree nodes merged into this position, in document order.
    pub members: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CegEdge {
    pub source: PositionId,
    pub target: PositionId,
    pub label: String,
    pub prob: Option<f64>,
    pub utility: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ceg {
    positions: Vec<Position>,
    edges: Vec<CegEdge>,
    root: PositionId,
    flavour: Flavour,
    out_edges: Vec<Vec<CegEdgeId>>,
    in_edges: Vec<Vec<CegEdgeId>>,
    membership: BTreeMap<NodeId, PositionId>,
}

impl Ceg {
    /// Assembles a graph; edges are reordered by (source, label, target).
    pub(crate) fn new(
        positions: Vec<Position>,
        mut edges: Vec<CegEdge>,
        root: PositionId,
        flavour: Flavour,
    ) -> Ceg {
        edges.sort_by(|a, b| {
            (a.source, &a.label, a.target).cmp(&(b.source, &b.label, b.target))
        });
        let n = positions.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.source.0].push(CegEdgeId(i));
            in_edges[e.target.0].push(CegEdgeId(i));
        }
        let membership = positions
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.members.iter().map(move |&m| (m, PositionId(i))))
            .collect();
        Ceg {
            positions,
            edges,
            root,
            flavour,
            out_edges,
            in_edges,
            membership,
        }
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn position_ids(&self) -> impl Iterator<Item = PositionId> {
        (0..self.positions.len()).map(PositionId)
    }

    pub fn position(&self, id: PositionId) -> &Position {
        &self.positions[id.0]
    }

    pub fn edges(&self) -> &[CegEdge] {
        &self.edges
    }

    pub fn edge(&self, id: CegEdgeId) -> &CegEdge {
        &self.edges[id.0]
    }

    pub fn root(&self) -> PositionId {
        self.root
    }

    pub fn flavour(&self) -> Flavour {
        self.flavour
    }

    pub fn contains(&self, id: PositionId) -> bool {
        id.0 < self.positions.len()
    }

    pub fn out_edges(&self, id: PositionId) -> &[CegEdgeId] {
        &self.out_edges[id.0]
    }

    pub fn in_edges(&self, id: PositionId) -> &[CegEdgeId] {
        &self.in_edges[id.0]
    }

    /// Distinct child positions, `ch(w)`.
    pub fn children(&self, id: PositionId) -> BTreeSet<PositionId> {
        self.out_edges(id)
            .iter()
            .map(|&e| self.edges[e.0].target)
            .collect()
    }

    /// Distinct parent positions, `pa(w)`.
    pub fn parents(&self, id: PositionId) -> BTreeSet<PositionId> {
        self.in_edges(id)
            .iter()
            .map(|&e| self.edges[e.0].source)
            .collect()
    }

    pub fn find(&self, name: &str) -> Option<PositionId> {
        self.positions
            .iter()
            .position(|p| p.name == name)
            .map(PositionId)
    }

    /// Position a tree node was merged into, if it survives in this graph.
    pub fn position_of(&self, node: NodeId) -> Option<PositionId> {
        self.membership.get(&node).copied()
    }

    pub fn terminals(&self) -> impl Iterator<Item = PositionId> + '_ {
        self.position_ids()
            .filter(|&p| self.positions[p.0].kind.is_terminal())
    }

    /// Non-terminal positions.
    pub fn internal_positions(&self) -> impl Iterator<Item = PositionId> + '_ {
        self.position_ids()
            .filter(|&p| !self.positions[p.0].kind.is_terminal())
    }

    pub fn stage_members(&self, stage: StageId) -> Vec<PositionId> {
        self.position_ids()
            .filter(|&p| self.positions[p.0].stage == Some(stage))
            .collect()
    }

    pub fn stage_ids(&self) -> BTreeSet<StageId> {
        self.positions.iter().filter_map(|p| p.stage).collect()
    }

    /// Value of a terminal: its utility for Type 2, zero for a sink.
    pub fn terminal_value(&self, id: PositionId) -> Option<f64> {
        match self.positions[id.0].kind {
            PositionKind::Utility(u) => Some(u),
            PositionKind::Sink => Some(0.0),
            _ => None,
        }
    }

    /// Recomputes stage ids from the current outgoing edges. Positions are
    /// visited in id order and each joins the first compatible stage.
    pub(crate) fn restage(&mut self) {
        let keyed: Vec<(usize, StageKind)> = self
            .position_ids()
            .filter_map(|p| {
                let outs = self.out_edges(p);
                let key = match self.positions[p.0].kind {
                    PositionKind::Chance => StageKind::Chance(
                        outs.iter()
                            .map(|&e| {
                                let e = &self.edges[e.0];
                                (e.label.clone(), e.prob.unwrap_or(0.0))
                            })
                            .collect(),
                    ),
                    PositionKind::Decision => StageKind::Decision(
                        outs.iter().map(|&e| self.edges[e.0].label.clone()).collect(),
                    ),
                    _ => return None,
                };
                Some((p.0, key))
            })
            .collect();
        for p in &mut self.positions {
            p.stage = None;
        }
        for (i, (_, members)) in group_keys(keyed).into_iter().enumerate() {
            for m in members {
                self.positions[m].stage = Some(StageId(i));
            }
        }
    }
}

/// Plain-text structure dump: positions in id order, then edges.
impl fmt::Display for Ceg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "ceg {} root={} positions={} edges={}",
            self.flavour,
            self.positions[self.root.0].name,
            self.positions.len(),
            self.edges.len()
        )?;
        for p in &self.positions {
            match p.kind {
                PositionKind::Chance => writeln!(f, "position {} kind=chance", p.name)?,
                PositionKind::Decision => writeln!(f, "position {} kind=decision", p.name)?,
                PositionKind::Sink => writeln!(f, "sink {}", p.name)?,
                PositionKind::Utility(u) => writeln!(f, "terminal {} utility={u}", p.name)?,
            }
        }
        for e in &self.edges {
            write!(
                f,
                "edge {} -> {} label={}",
                self.positions[e.source.0].name, self.positions[e.target.0].name, e.label
            )?;
            if let Some(p) = e.prob {
                write!(f, " prob={p}")?;
            }
            if let Some(u) = e.utility {
                write!(f, " util={u}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Mutable working copy used by graph transformations. Removed positions and
/// edges become `None`; [`Draft::finish`] compacts ids while keeping order.
#[derive(Debug, Clone)]
pub(crate) struct Draft {
    pub positions: Vec<Option<Position>>,
    pub edges: Vec<Option<CegEdge>>,
    pub root: PositionId,
    pub flavour: Flavour,
}

impl Draft {
    pub fn from_ceg(ceg: &Ceg) -> Draft {
        Draft {
            positions: ceg.positions.iter().cloned().map(Some).collect(),
            edges: ceg.edges.iter().cloned().map(Some).collect(),
            root: ceg.root,
            flavour: ceg.flavour,
        }
    }

    pub fn live_edges(&self) -> impl Iterator<Item = (usize, &CegEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|e| (i, e)))
    }

    pub fn out_edge_ids(&self, p: PositionId) -> Vec<usize> {
        self.live_edges()
            .filter(|(_, e)| e.source == p)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn in_edge_ids(&self, p: PositionId) -> Vec<usize> {
        self.live_edges()
            .filter(|(_, e)| e.target == p)
            .map(|(i, _)| i)
            .collect()
    }

    /// Drops positions (and their edges) not reachable from the root.
    pub fn prune_unreachable(&mut self) {
        let mut seen = vec![false; self.positions.len()];
        let mut stack = vec![self.root];
        seen[self.root.0] = true;
        while let Some(p) = stack.pop() {
            for (_, e) in self.live_edges() {
                if e.source == p && !seen[e.target.0] {
                    seen[e.target.0] = true;
                    stack.push(e.target);
                }
            }
        }
        for (i, live) in seen.iter().enumerate() {
            if !live {
                self.positions[i] = None;
            }
        }
        for e in &mut self.edges {
            if e.as_ref().is_some_and(|e| !seen[e.source.0]) {
                *e = None;
            }
        }
    }

    pub fn finish(self) -> Ceg {
        let mut remap = vec![None; self.positions.len()];
        let mut positions = Vec::new();
        for (i, p) in self.positions.into_iter().enumerate() {
            if let Some(p) = p {
                remap[i] = Some(PositionId(positions.len()));
                positions.push(p);
            }
        }
        let edges = self
            .edges
            .into_iter()
            .flatten()
            .map(|mut e| {
                e.source = remap[e.source.0].expect("edge from removed position");
                e.target = remap[e.target.0].expect("edge into removed position");
                e
            })
            .collect();
        let root = remap[self.root.0].expect("root removed");
        let mut ceg = Ceg::new(positions, edges, root, self.flavour);
        ceg.restage();
        ceg
    }
}
