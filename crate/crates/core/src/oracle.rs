//! Brute-force reference computations on the raw event tree.
//!
//! Nothing here touches the CEG code paths; the functions are meant to be
//! compared against the local propagation results.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::event_tree::{EdgeId, EventTree, NodeId, NodeKind};

/// Largest number of realised strategies [`enumerate_strategies`] will list.
pub const MAX_STRATEGIES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("tree has {0} pure strategies, more than the limit of {MAX_STRATEGIES}")]
    TooManyStrategies(u64),
}

/// A pure strategy restricted to the decision nodes it actually reaches.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeStrategy {
    pub choices: BTreeMap<NodeId, EdgeId>,
    pub expected_utility: f64,
}

fn edge_utility(tree: &EventTree, e: EdgeId) -> f64 {
    tree.edge(e).utility.unwrap_or(0.0)
}

/// Evaluates the tree bottom-up, resolving each decision node with `decide`.
fn evaluate_with(tree: &EventTree, mut decide: impl FnMut(NodeId, &[(EdgeId, f64)]) -> f64) -> f64 {
    let mut value = vec![0.0; tree.nodes().len()];
    for n in tree.breadth_first().into_iter().rev() {
        let outs = tree.out_edges(n);
        value[n.0] = match tree.node(n).kind {
            NodeKind::Leaf { utility } => utility,
            NodeKind::Chance => {
                let mut acc = 0.0;
                for &e in outs {
                    let edge = tree.edge(e);
                    acc += edge.prob.unwrap_or(0.0) * (value[edge.target.0] + edge_utility(tree, e));
                }
                acc
            }
            NodeKind::Decision => {
                let options: Vec<(EdgeId, f64)> = outs
                    .iter()
                    .map(|&e| (e, value[tree.edge(e).target.0] + edge_utility(tree, e)))
                    .collect();
                decide(n, &options)
            }
        };
    }
    value[tree.root().0]
}

/// Backward induction: expectation at chance nodes, maximum at decisions.
pub fn rollback(tree: &EventTree) -> f64 {
    evaluate_with(tree, |_, options| {
        options
            .iter()
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

/// Expected utility when every decision node follows `choose`.
pub fn evaluate_policy(tree: &EventTree, mut choose: impl FnMut(NodeId) -> EdgeId) -> f64 {
    evaluate_with(tree, |n, options| {
        let pick = choose(n);
        options
            .iter()
            .find(|(e, _)| *e == pick)
            .map(|(_, v)| *v)
            .expect("policy chose an edge that does not leave the node")
    })
}

/// Number of pure strategies that differ on reached decision nodes.
pub fn strategy_count(tree: &EventTree) -> u64 {
    let mut count = vec![1u64; tree.nodes().len()];
    for n in tree.breadth_first().into_iter().rev() {
        let children = tree.out_edges(n).iter().map(|&e| count[tree.edge(e).target.0]);
        count[n.0] = match tree.node(n).kind {
            NodeKind::Leaf { .. } => 1,
            NodeKind::Chance => children.fold(1, u64::saturating_mul),
            NodeKind::Decision => children.fold(0, u64::saturating_add),
        };
    }
    count[tree.root().0]
}

/// Number of assignments of one edge to every decision node in the tree,
/// reached or not.
pub fn assignment_count(tree: &EventTree) -> u64 {
    tree.node_ids()
        .filter(|&n| tree.node(n).kind == NodeKind::Decision)
        .map(|n| tree.out_edges(n).len() as u64)
        .fold(1, u64::saturating_mul)
}

type Partial = (Vec<(NodeId, EdgeId)>, f64);

/// Lists every pure strategy with its expected utility.
///
/// Child strategies are combined with the same arithmetic as [`rollback`], so
/// the maximum over the list equals the rollback value exactly.
pub fn enumerate_strategies(tree: &EventTree) -> Result<Vec<TreeStrategy>, OracleError> {
    let count = strategy_count(tree);
    if count > MAX_STRATEGIES {
        return Err(OracleError::TooManyStrategies(count));
    }
    let mut table: Vec<Vec<Partial>> = vec![Vec::new(); tree.nodes().len()];
    for n in tree.breadth_first().into_iter().rev() {
        let outs = tree.out_edges(n);
        table[n.0] = match tree.node(n).kind {
            NodeKind::Leaf { utility } => vec![(Vec::new(), utility)],
            NodeKind::Decision => {
                let mut list = Vec::new();
                for &e in outs {
                    let u = edge_utility(tree, e);
                    for (choices, v) in &table[tree.edge(e).target.0] {
                        let mut c = Vec::with_capacity(choices.len() + 1);
                        c.push((n, e));
                        c.extend_from_slice(choices);
                        list.push((c, v + u));
                    }
                }
                list
            }
            NodeKind::Chance => {
                let mut list: Vec<Partial> = vec![(Vec::new(), 0.0)];
                for &e in outs {
                    let edge = tree.edge(e);
                    let p = edge.prob.unwrap_or(0.0);
                    let u = edge_utility(tree, e);
                    let mut next = Vec::with_capacity(list.len() * table[edge.target.0].len());
                    for (choices, acc) in &list {
                        for (child_choices, v) in &table[edge.target.0] {
                            let mut c = choices.clone();
                            c.extend_from_slice(child_choices);
                            next.push((c, acc + p * (v + u)));
                        }
                    }
                    list = next;
                }
                list
            }
        };
        // Children are no longer needed once folded into their parent.
        for &e in outs {
            table[tree.edge(e).target.0] = Vec::new();
        }
    }
    Ok(std::mem::take(&mut table[tree.root().0])
        .into_iter()
        .map(|(choices, expected_utility)| TreeStrategy {
            choices: choices.into_iter().collect(),
            expected_utility,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_tree::validate_tree;
    use crate::model_io::parse_model;

    fn tree(text: &str) -> EventTree {
        validate_tree(&parse_model(text).unwrap()).unwrap()
    }

    const TEN_VS_EIGHT: &str = "\
node root kind=decision
node gamble kind=chance
leaf safe utility=10
leaf lose utility=0
leaf win utility=20
edge root safe label=a
edge root gamble label=b
edge gamble lose label=lo prob=0.6
edge gamble win label=hi prob=0.4
root root
";

    #[test]
    fn decision_against_gamble() {
        let t = tree(TEN_VS_EIGHT);
        assert_eq!(rollback(&t), 10.0);
        let all = enumerate_strategies(&t).unwrap();
        assert_eq!(all.len(), 2);
        let mut values: Vec<f64> = all.iter().map(|s| s.expected_utility).collect();
        values.sort_by(f64::total_cmp);
        assert_eq!(values, [8.0, 10.0]);
    }

    #[test]
    fn all_chance_tree_is_plain_expectation() {
        let t = tree(
            "node r kind=chance\nnode c kind=chance\nleaf a utility=4\nleaf b utility=8\nleaf z utility=1\n\
             edge r c label=x prob=0.5\nedge r z label=y prob=0.5\n\
             edge c a label=p prob=0.25\nedge c b label=q prob=0.75\nroot r\n",
        );
        let expected = 0.5 * (0.25 * 4.0 + 0.75 * 8.0) + 0.5 * 1.0;
        assert!((rollback(&t) - expected).abs() < 1e-12);
        assert_eq!(enumerate_strategies(&t).unwrap().len(), 1);
    }

    #[test]
    fn sequential_decisions_count() {
        let t = tree(
            "node r kind=decision
node da kind=decision
node db kind=decision
leaf a1 utility=1
leaf a2 utility=2
leaf b1 utility=3
leaf b2 utility=4
edge r da label=a
edge r db label=b
edge da a1 label=x
edge da a2 label=y
edge db b1 label=x
edge db b2 label=y
root r
",
        );
        assert_eq!(assignment_count(&t), 8);
        assert_eq!(strategy_count(&t), 4);
        let all = enumerate_strategies(&t).unwrap();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|s| s.choices.len() == 2));
        let best = all.iter().map(|s| s.expected_utility).fold(f64::MIN, f64::max);
        assert_eq!(best, rollback(&t));
    }

    #[test]
    fn edge_utilities_are_added() {
        let t = tree(
            "node r kind=decision\nnode c kind=chance\nleaf a utility=0\nleaf b utility=0\nleaf z utility=0\n\
             edge r c label=x util=1\nedge r z label=y util=1.5\n\
             edge c a label=p prob=0.5 util=2\nedge c b label=q prob=0.5\nroot r\n",
        );
        assert_eq!(rollback(&t), 2.0);
    }

    #[test]
    fn guard_on_strategy_count() {
        // 21 binary decisions reached in parallel: 2^21 > 10^6 strategies.
        let mut text = String::from("node r kind=chance\n");
        for i in 0..21 {
            text.push_str(&format!(
                "node d{i} kind=decision\nleaf l{i} utility=0\nleaf m{i} utility=1\n\
                 edge r d{i} label=o{i:02} prob={}\nedge d{i} l{i} label=x\nedge d{i} m{i} label=y\n",
                if i == 0 { 1.0 } else { 0.0 }
            ));
        }
        text.push_str("root r\n");
        let t = tree(&text);
        assert_eq!(
            enumerate_strategies(&t),
            Err(OracleError::TooManyStrategies(1 << 21))
        );
    }
}
