//! Maximum expected utility by local propagation over a CEG.
//!
//! Positions are swept in reverse topological order. A chance position takes
//! the probability-weighted sum of `child value + edge utility` over all of
//! its outgoing edges (parallel edges included); a decision position takes the
//! maximum of the same quantity. Terminal values are fixed up front: zero for
//! a Type 1 sink, the utility for a Type 2 terminal.

use std::collections::{BTreeMap, BinaryHeap};
use std::cmp::Reverse;

use thiserror::Error;

use crate::ceg::{Ceg, CegEdgeId, PositionId, PositionKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("graph contains a cycle")]
    CycleDetected,
    #[error("decision position `{0}` has no chosen edge")]
    MissingChoice(String),
    #[error("edge {edge} does not leave position `{position}`")]
    ForeignEdge { position: String, edge: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMark {
    Optimal,
    SubOptimal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationState {
    order: Vec<PositionId>,
    values: Vec<f64>,
    /// `Some` for edges leaving decision positions.
    marks: Vec<Option<EdgeMark>>,
}

impl PropagationState {
    pub fn value(&self, p: PositionId) -> f64 {
        self.values[p.0]
    }

    pub fn root_value(&self, ceg: &Ceg) -> f64 {
        self.values[ceg.root().0]
    }

    pub fn mark(&self, e: CegEdgeId) -> Option<EdgeMark> {
        self.marks[e.0]
    }

    /// Topological order used by the sweep.
    pub fn order(&self) -> &[PositionId] {
        &self.order
    }
}

/// Chosen edge per decision position plus the value achieved.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub choices: BTreeMap<PositionId, CegEdgeId>,
    pub value: f64,
}

/// Topological order with the root first and terminals last; ties go to the
/// smaller position id.
pub fn topo_order(ceg: &Ceg) -> Result<Vec<PositionId>, SolveError> {
    let n = ceg.positions().len();
    let mut indegree: Vec<usize> = ceg.position_ids().map(|p| ceg.in_edges(p).len()).collect();
    let key = |p: PositionId| Reverse((ceg.position(p).kind.is_terminal(), p));
    let mut ready: BinaryHeap<_> = ceg
        .position_ids()
        .filter(|p| indegree[p.0] == 0)
        .map(key)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, p))) = ready.pop() {
        order.push(p);
        for &e in ceg.out_edges(p) {
            let t = ceg.edge(e).target;
            indegree[t.0] -= 1;
            if indegree[t.0] == 0 {
                ready.push(key(t));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(SolveError::CycleDetected)
    }
}

fn edge_value(ceg: &Ceg, values: &[f64], e: CegEdgeId) -> f64 {
    let edge = ceg.edge(e);
    values[edge.target.0] + edge.utility.unwrap_or(0.0)
}

fn chance_value(ceg: &Ceg, values: &[f64], p: PositionId) -> f64 {
    ceg.out_edges(p)
        .iter()
        .map(|&e| ceg.edge(e).prob.unwrap_or(0.0) * edge_value(ceg, values, e))
        .sum()
}

/// Runs the backward sweep and marks strictly sub-optimal decision edges.
/// Every maximiser of a decision stays marked optimal.
pub fn propagate(ceg: &Ceg) -> Result<PropagationState, SolveError> {
    let order = topo_order(ceg)?;
    let mut values = vec![0.0; ceg.positions().len()];
    let mut marks = vec![None; ceg.edges().len()];
    for t in ceg.terminals() {
        values[t.0] = ceg.terminal_value(t).unwrap_or(0.0);
    }
    for &p in order.iter().rev() {
        match ceg.position(p).kind {
            PositionKind::Chance => values[p.0] = chance_value(ceg, &values, p),
            PositionKind::Decision => {
                let best = ceg
                    .out_edges(p)
                    .iter()
                    .map(|&e| edge_value(ceg, &values, e))
                    .fold(f64::NEG_INFINITY, f64::max);
                for &e in ceg.out_edges(p) {
                    marks[e.0] = Some(if edge_value(ceg, &values, e) < best {
                        EdgeMark::SubOptimal
                    } else {
                        EdgeMark::Optimal
                    });
                }
                values[p.0] = best;
            }
            PositionKind::Sink | PositionKind::Utility(_) => {}
        }
    }
    Ok(PropagationState {
        order,
        values,
        marks,
    })
}

/// Picks one optimal edge per decision position: smallest label, then
/// smallest edge id.
pub fn extract_strategy(state: &PropagationState, ceg: &Ceg) -> Strategy {
    let choices = ceg
        .position_ids()
        .filter(|&p| ceg.position(p).kind == PositionKind::Decision)
        .filter_map(|p| {
            ceg.out_edges(p)
                .iter()
                .copied()
                .filter(|&e| state.mark(e) == Some(EdgeMark::Optimal))
                .min_by(|&a, &b| (&ceg.edge(a).label, a).cmp(&(&ceg.edge(b).label, b)))
                .map(|e| (p, e))
        })
        .collect();
    Strategy {
        choices,
        value: state.root_value(ceg),
    }
}

/// Propagates and extracts the strategy in one call.
pub fn solve(ceg: &Ceg) -> Result<(PropagationState, Strategy), SolveError> {
    let state = propagate(ceg)?;
    let strategy = extract_strategy(&state, ceg);
    Ok((state, strategy))
}

/// Expected utility of following fixed choices at every decision position.
pub fn expected_utility(
    ceg: &Ceg,
    choices: &BTreeMap<PositionId, CegEdgeId>,
) -> Result<f64, SolveError> {
    let order = topo_order(ceg)?;
    let mut values = vec![0.0; ceg.positions().len()];
    for t in ceg.terminals() {
        values[t.0] = ceg.terminal_value(t).unwrap_or(0.0);
    }
    for &p in order.iter().rev() {
        let position = ceg.position(p);
        match position.kind {
            PositionKind::Chance => values[p.0] = chance_value(ceg, &values, p),
            PositionKind::Decision => {
                let &e = choices
                    .get(&p)
                    .ok_or_else(|| SolveError::MissingChoice(position.name.clone()))?;
                if !ceg.out_edges(p).contains(&e) {
                    return Err(SolveError::ForeignEdge {
                        position: position.name.clone(),
                        edge: e.0,
                    });
                }
                values[p.0] = edge_value(ceg, &values, e);
            }
            _ => {}
        }
    }
    Ok(values[ceg.root().0])
}
