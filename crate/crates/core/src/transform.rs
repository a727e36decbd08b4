//! Graph simplification: barren-node deletion, the parsimonious fixpoint, and
//! manipulation (forcing one outgoing edge and pruning what it cuts off).

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::ceg::{Ceg, CegEdge, Draft, PositionId, PositionKind};
use crate::event_tree::stages::{group_keys, StageKind};
use crate::event_tree::Flavour;
use crate::numeric::{ValueClasses, UTILITY_TOLERANCE};
use crate::solve::{topo_order, SolveError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("operation needs a type2 graph, found {0}")]
    FlavourMismatch(Flavour),
    #[error("unknown position `{0}`")]
    UnknownPosition(String),
    #[error("position `{position}` has no outgoing edge labelled `{label}`")]
    UnknownLabel { position: String, label: String },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Forces the edge labelled `choose` out of position `at`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manipulation {
    pub at: PositionId,
    pub choose: String,
}

impl Manipulation {
    /// Resolves a position by name.
    pub fn by_name(ceg: &Ceg, at: &str, choose: &str) -> Result<Self, TransformError> {
        let at = ceg
            .find(at)
            .ok_or_else(|| TransformError::UnknownPosition(at.to_string()))?;
        Ok(Manipulation {
            at,
            choose: choose.to_string(),
        })
    }
}

fn require_type2(ceg: &Ceg) -> Result<(), TransformError> {
    match ceg.flavour() {
        Flavour::Type2 => Ok(()),
        f => Err(TransformError::FlavourMismatch(f)),
    }
}

/// Deletes barren positions (exactly one distinct child) and returns the
/// simplified graph.
pub fn delete_barren(ceg: &Ceg) -> Result<Ceg, TransformError> {
    delete_barren_traced(ceg).map(|(g, _)| g)
}

/// Like [`delete_barren`], also returning the names of deleted positions in
/// deletion order.
///
/// Positions are visited once in topological order; children sets are read
/// from the graph as it is being edited. For each barren position `w` with
/// child `c`, every parent's edges into `w` are replaced by a single edge into
/// `c` whose label joins the replaced labels with `|` and whose probability
/// (for a chance parent) is their sum; then `w` and its edges are dropped.
/// Terminals are never deleted. A barren root hands the root role to its child.
pub fn delete_barren_traced(ceg: &Ceg) -> Result<(Ceg, Vec<String>), TransformError> {
    require_type2(ceg)?;
    let order = topo_order(ceg)?;
    let mut draft = Draft::from_ceg(ceg);
    let mut deleted = Vec::new();

    for p in order {
        let kind = draft.positions[p.0].as_ref().expect("visited once").kind;
        if kind.is_terminal() {
            continue;
        }
        let outs = draft.out_edge_ids(p);
        let children: BTreeSet<PositionId> = outs
            .iter()
            .map(|&e| draft.edges[e].as_ref().unwrap().target)
            .collect();
        if children.len() != 1 {
            continue;
        }
        let child = *children.first().unwrap();

        // In-edges grouped by parent, in edge order.
        let mut groups: Vec<(PositionId, Vec<usize>)> = Vec::new();
        for e in draft.in_edge_ids(p) {
            let src = draft.edges[e].as_ref().unwrap().source;
            match groups.iter_mut().find(|(s, _)| *s == src) {
                Some((_, ids)) => ids.push(e),
                None => groups.push((src, vec![e])),
            }
        }
        for (parent, ids) in groups {
            let parent_is_chance =
                draft.positions[parent.0].as_ref().unwrap().kind == PositionKind::Chance;
            let replaced: Vec<CegEdge> = ids
                .iter()
                .map(|&e| draft.edges[e].take().unwrap())
                .collect();
            let label = replaced
                .iter()
                .map(|e| e.label.as_str())
                .collect::<Vec<_>>()
                .join("|");
            let prob = parent_is_chance.then(|| {
                replaced[1..]
                    .iter()
                    .fold(replaced[0].prob.unwrap_or(0.0), |acc, e| {
                        acc + e.prob.unwrap_or(0.0)
                    })
            });
            draft.edges[ids[0]] = Some(CegEdge {
                source: parent,
                target: child,
                label,
                prob,
                utility: None,
            });
        }
        for e in outs {
            draft.edges[e] = None;
        }
        if draft.root == p {
            draft.root = child;
        }
        deleted.push(draft.positions[p.0].take().unwrap().name);
    }
    Ok((draft.finish(), deleted))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Signature {
    Terminal(usize),
    Chance(usize, Vec<(String, Option<usize>, usize)>),
    Decision(Vec<(String, Option<usize>, usize)>),
}

/// Merges positions of the graph whose futures are identical: same stage
/// (chance) or label set (decision), and per label the same edge utility and
/// the same child position. Returns the graph and the number of positions
/// removed by merging.
pub fn recoalesce(ceg: &Ceg) -> Result<(Ceg, usize), TransformError> {
    let order = topo_order(ceg)?;

    let chance_keys = ceg
        .position_ids()
        .filter(|&p| ceg.position(p).kind == PositionKind::Chance)
        .map(|p| {
            let table = ceg
                .out_edges(p)
                .iter()
                .map(|&e| (ceg.edge(e).label.clone(), ceg.edge(e).prob.unwrap_or(0.0)))
                .collect();
            (p, StageKind::Chance(table))
        });
    let mut table_class = HashMap::new();
    for (i, (_, members)) in group_keys(chance_keys).into_iter().enumerate() {
        for m in members {
            table_class.insert(m, i);
        }
    }

    let mut util_classes = ValueClasses::new(UTILITY_TOLERANCE);
    let mut interned: HashMap<Signature, usize> = HashMap::new();
    let mut class = vec![0usize; ceg.positions().len()];
    for &p in order.iter().rev() {
        let mut entries = || {
            ceg.out_edges(p)
                .iter()
                .map(|&e| {
                    let edge = ceg.edge(e);
                    (
                        edge.label.clone(),
                        edge.utility.map(|u| util_classes.classify(u)),
                        class[edge.target.0],
                    )
                })
                .collect::<Vec<_>>()
        };
        let sig = match ceg.position(p).kind {
            PositionKind::Chance => Signature::Chance(table_class[&p], entries()),
            PositionKind::Decision => Signature::Decision(entries()),
            _ => Signature::Terminal(p.0),
        };
        let next = interned.len();
        class[p.0] = *interned.entry(sig).or_insert(next);
    }

    let mut rep_of_class: HashMap<usize, PositionId> = HashMap::new();
    let mut rep = vec![PositionId(0); ceg.positions().len()];
    for p in ceg.position_ids() {
        rep[p.0] = *rep_of_class.entry(class[p.0]).or_insert(p);
    }
    let merged = ceg.position_ids().filter(|&p| rep[p.0] != p).count();
    if merged == 0 {
        return Ok((Draft::from_ceg(ceg).finish(), 0));
    }

    let mut draft = Draft::from_ceg(ceg);
    for p in ceg.position_ids() {
        let r = rep[p.0];
        if r == p {
            continue;
        }
        let gone = draft.positions[p.0].take().unwrap();
        let keep = draft.positions[r.0].as_mut().unwrap();
        keep.members.extend(gone.members);
        keep.members.sort();
        if keep.depth != gone.depth {
            keep.depth = None;
        }
    }
    for slot in &mut draft.edges {
        let Some(edge) = slot else { continue };
        if rep[edge.source.0] != edge.source {
            *slot = None;
        } else {
            edge.target = rep[edge.target.0];
        }
    }
    draft.root = rep[draft.root.0];
    Ok((draft.finish(), merged))
}

/// Alternates re-coalescence and barren deletion until neither changes the
/// graph.
pub fn parsimonize(ceg: &Ceg) -> Result<Ceg, TransformError> {
    require_type2(ceg)?;
    let mut current = ceg.clone();
    loop {
        let (merged_graph, merged) = recoalesce(&current)?;
        let (next, deleted) = delete_barren_traced(&merged_graph)?;
        current = next;
        if merged == 0 && deleted.is_empty() {
            return Ok(current);
        }
    }
}

/// Imposes the chosen edge: it becomes the only outgoing edge of `at` (with
/// probability one at a chance position), and positions reachable only
/// through the discarded edges are pruned. No other probability changes.
pub fn manipulate(ceg: &Ceg, m: &Manipulation) -> Result<Ceg, TransformError> {
    if !ceg.contains(m.at) {
        return Err(TransformError::UnknownPosition(format!("#{}", m.at.0)));
    }
    let position = ceg.position(m.at);
    let chosen = ceg
        .out_edges(m.at)
        .iter()
        .copied()
        .find(|&e| ceg.edge(e).label == m.choose)
        .ok_or_else(|| TransformError::UnknownLabel {
            position: position.name.clone(),
            label: m.choose.clone(),
        })?;
    let mut draft = Draft::from_ceg(ceg);
    for &e in ceg.out_edges(m.at) {
        if e != chosen {
            draft.edges[e.0] = None;
        }
    }
    if position.kind == PositionKind::Chance {
        draft.edges[chosen.0].as_mut().unwrap().prob = Some(1.0);
    }
    draft.prune_unreachable();
    Ok(draft.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalesce::build_ceg;
    use crate::event_tree::validate_tree;
    use crate::model_io::parse_model;
    use crate::solve::propagate;

    fn ceg(text: &str) -> Ceg {
        let tree = validate_tree(&parse_model(text).unwrap()).unwrap();
        let flavour = tree.flavour();
        build_ceg(&tree, flavour).unwrap()
    }

    fn value(g: &Ceg) -> f64 {
        propagate(g).unwrap().root_value(g)
    }

    const FORCED: &str = "\
node r kind=decision
node c kind=chance
node only kind=chance
leaf a utility=3
leaf b utility=5
leaf z utility=1
edge r c label=go
edge r z label=stop
edge c only label=sure prob=1
edge only a label=x prob=0.5
edge only b label=y prob=0.5
root r
";

    #[test]
    fn removes_single_child_chance_position() {
        let g = ceg(FORCED);
        let (out, deleted) = delete_barren_traced(&g).unwrap();
        assert_eq!(deleted, ["c"]);
        assert!(out.find("c").is_none());
        let go = out
            .edges()
            .iter()
            .find(|e| e.label == "go")
            .expect("parent rewired");
        assert_eq!(out.position(go.target).name, "only");
        assert_eq!(value(&out), value(&g));
    }

    #[test]
    fn merged_edges_join_labels_and_sum_probabilities() {
        let g = ceg(
            "node r kind=chance
node m kind=chance
leaf a utility=2
leaf b utility=2
leaf z utility=9
edge r m label=x prob=0.25
edge r z label=y prob=0.75
edge m a label=p prob=0.5
edge m b label=q prob=0.5
root r
",
        );
        // m has parallel edges into the single terminal for utility 2
        let out = delete_barren(&g).unwrap();
        assert!(out.find("m").is_none());
        let labels: Vec<_> = out.edges().iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, ["x", "y"]);

        // x and y coalesce, so r has two parallel edges into x
        let d = ceg(
            "node r kind=chance
node x kind=chance
node y kind=chance
leaf a utility=2
leaf b utility=2
leaf c utility=5
edge r x label=u prob=0.2
edge r y label=v prob=0.3
edge r c label=w prob=0.5
edge x a label=s prob=1
edge y b label=s prob=1
root r
",
        );
        let (out, deleted) = delete_barren_traced(&d).unwrap();
        assert_eq!(deleted, ["x"]);
        let edges: Vec<_> = out
            .edges()
            .iter()
            .map(|e| (e.label.as_str(), e.prob.unwrap()))
            .collect();
        assert_eq!(edges, [("u|v", 0.5), ("w", 0.5)]);
        let p = ceg(
            "node r kind=chance
leaf a utility=2
leaf b utility=2
edge r a label=u prob=0.3
edge r b label=v prob=0.7
root r
",
        );
        // barren root: the terminal becomes the whole graph
        let out = delete_barren(&p).unwrap();
        assert_eq!(out.positions().len(), 1);
        assert_eq!(value(&out), 2.0);
    }

    #[test]
    fn parallel_parent_edges_collapse_into_one() {
        let g = ceg(
            "node r kind=chance
node m1 kind=chance
node m2 kind=chance
node k kind=chance
leaf a utility=1
leaf b utility=1
leaf e utility=0
leaf f utility=7
edge r m1 label=x prob=0.2
edge r m2 label=y prob=0.8
edge m1 k label=s prob=1
edge m2 e label=s prob=0.5
edge m2 f label=t prob=0.5
edge k a label=p prob=0.1
edge k b label=q prob=0.9
root r
",
        );
        let (out, deleted) = delete_barren_traced(&g).unwrap();
        assert_eq!(deleted, ["m1", "k"]);
        let x = out.edges().iter().find(|e| e.label == "x").unwrap();
        assert_eq!(x.prob, Some(0.2));
        assert_eq!(out.position(x.target).kind, PositionKind::Utility(1.0));
        assert!((value(&out) - value(&g)).abs() < 1e-12);
    }

    #[test]
    fn fixpoint_without_barren_positions() {
        let g = ceg(
            "node r kind=decision
node c kind=chance
leaf a utility=3
leaf b utility=5
leaf z utility=1
edge r c label=go
edge r z label=stop
edge c a label=x prob=0.5
edge c b label=y prob=0.5
root r
",
        );
        let (out, deleted) = delete_barren_traced(&g).unwrap();
        assert!(deleted.is_empty());
        assert_eq!(out, g);
        assert_eq!(parsimonize(&g).unwrap(), g);
    }

    #[test]
    fn type1_is_rejected() {
        let g = ceg("node r kind=decision\nleaf a utility=0\nedge r a label=x util=2\nroot r\n");
        assert_eq!(
            delete_barren(&g),
            Err(TransformError::FlavourMismatch(Flavour::Type1))
        );
        assert_eq!(
            parsimonize(&g),
            Err(TransformError::FlavourMismatch(Flavour::Type1))
        );
    }

    #[test]
    fn parsimonize_merges_after_deletion() {
        // After deleting the forced nodes f1 and f2, c1 and c2 have identical
        // futures and merge; then r has a single child and is removed too.
        let g = ceg(
            "node r kind=decision
node f1 kind=chance
node f2 kind=chance
node c1 kind=chance
node c2 kind=chance
leaf a utility=1
leaf b utility=2
leaf a2 utility=1
leaf b2 utility=2
edge r f1 label=u
edge r f2 label=v
edge f1 c1 label=one prob=1
edge f2 c2 label=other prob=1
edge c1 a label=x prob=0.5
edge c1 b label=y prob=0.5
edge c2 a2 label=x prob=0.5
edge c2 b2 label=y prob=0.5
root r
",
        );
        let out = parsimonize(&g).unwrap();
        assert_eq!(out.internal_positions().count(), 1);
        assert_eq!(out.position(out.root()).name, "c1");
        assert_eq!(value(&out), value(&g));
        assert_eq!(parsimonize(&out).unwrap(), out);
    }

    #[test]
    fn manipulate_decision_prunes_alternative() {
        let g = ceg(FORCED);
        let m = Manipulation::by_name(&g, "r", "go").unwrap();
        let out = manipulate(&g, &m).unwrap();
        assert_eq!(out.out_edges(out.root()).len(), 1);
        assert!(out.terminals().all(|t| out.position(t).name != "z"));
        assert_eq!(value(&out), 4.0);
    }

    #[test]
    fn manipulate_chance_keeps_shared_children() {
        let g = ceg(
            "node r kind=chance
node x kind=chance
leaf a utility=1
leaf b utility=4
leaf c utility=1
edge r x label=left prob=0.5
edge r c label=right prob=0.5
edge x a label=p prob=0.3
edge x b label=q prob=0.7
root r
",
        );
        let m = Manipulation::by_name(&g, "r", "left").unwrap();
        let out = manipulate(&g, &m).unwrap();
        // terminal for utility 1 is still reachable through x
        assert!(out.find("a").is_some());
        let left = out.edges().iter().find(|e| e.label == "left").unwrap();
        assert_eq!(left.prob, Some(1.0));
        let q = out.edges().iter().find(|e| e.label == "q").unwrap();
        assert_eq!(q.prob, Some(0.7));
    }

    #[test]
    fn manipulate_errors() {
        let g = ceg(FORCED);
        assert_eq!(
            Manipulation::by_name(&g, "nowhere", "go"),
            Err(TransformError::UnknownPosition("nowhere".into()))
        );
        let m = Manipulation::by_name(&g, "r", "fly").unwrap();
        assert!(matches!(
            manipulate(&g, &m),
            Err(TransformError::UnknownLabel { .. })
        ));
    }
}
