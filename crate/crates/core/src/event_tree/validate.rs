use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::{
    infer_stages, EdgeId, EventTree, Flavour, Levels, NodeId, NodeKind, StagePartition, TreeEdge,
    TreeNode,
};
use crate::model_io::{DeclaredKind, Declaration, ModelDocument};
use crate::numeric::PROB_TOLERANCE;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationErrorKind {
    #[error("no root declared")]
    MissingRoot,
    #[error("root `{0}` is not a declared node")]
    UnknownRoot(String),
    #[error("edge refers to undeclared node `{0}`")]
    DanglingEdge(String),
    #[error("edge out of `{source_node}` has no label")]
    MissingLabel { source_node: String },
    #[error("node `{0}` has more than one parent")]
    MultipleParents(String),
    #[error("root `{0}` has a parent")]
    RootHasParent(String),
    #[error("leaf `{0}` has outgoing edges")]
    EdgeFromLeaf(String),
    #[error("node `{0}` has no outgoing edges")]
    NoOutgoingEdges(String),
    #[error("probabilities out of `{node}` sum to {sum}")]
    ProbSumViolation { node: String, sum: f64 },
    #[error("probability {prob} out of `{node}` is outside [0, 1]")]
    ProbOutOfRange { node: String, prob: f64 },
    #[error("edge out of decision node `{0}` carries a probability")]
    ProbOnDecisionEdge(String),
    #[error("edge out of chance node `{0}` has no probability")]
    MissingProbOnChanceEdge(String),
    #[error("node `{node}` has two outgoing edges labelled `{label}`")]
    DuplicateLabel { node: String, label: String },
    #[error("node `{0}` is not reachable from the root")]
    UnreachableNode(String),
    #[error("expected `{first}` and `{second}` to share a stage")]
    StageExpectation { first: String, second: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ValidationError {
    pub line: usize,
    pub kind: ValidationErrorKind,
}

/// All violations found in a document, sorted by line.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

/// Checks a parsed document against the event-tree invariants and builds the
/// tree with its inferred stages. Reports every violation, not just the first.
pub fn validate_tree(doc: &ModelDocument) -> Result<EventTree, ValidationErrors> {
    let mut errors = Vec::new();
    let mut err = |line: usize, kind| errors.push(ValidationError { line, kind });

    let mut nodes = Vec::new();
    let mut index: HashMap<&str, NodeId> = HashMap::new();
    let mut root = None;
    let mut levels = Levels::new();
    for located in doc.iter() {
        let (id, kind) = match &located.decl {
            Declaration::Node { id, kind } => (
                id,
                match kind {
                    DeclaredKind::Chance => NodeKind::Chance,
                    DeclaredKind::Decision => NodeKind::Decision,
                },
            ),
            Declaration::Leaf { id, utility } => (id, NodeKind::Leaf { utility: *utility }),
            Declaration::Root { id } => {
                root = Some((id.as_str(), located.line));
                continue;
            }
            Declaration::Level { depth, var } => {
                levels.insert(*depth, var.clone());
                continue;
            }
            _ => continue,
        };
        if index.contains_key(id.as_str()) {
            continue;
        }
        index.insert(id, NodeId(nodes.len()));
        nodes.push(TreeNode {
            name: id.clone(),
            kind,
            line: located.line,
        });
    }

    let root = match root {
        None => {
            err(0, ValidationErrorKind::MissingRoot);
            None
        }
        Some((name, line)) => match index.get(name) {
            Some(&id) => Some(id),
            None => {
                err(line, ValidationErrorKind::UnknownRoot(name.to_string()));
                None
            }
        },
    };

    let mut edges = Vec::new();
    for located in doc.iter() {
        let Declaration::Edge {
            source,
            target,
            label,
            prob,
            util,
        } = &located.decl
        else {
            continue;
        };
        let line = located.line;
        let mut ok = true;
        for end in [source, target] {
            if !index.contains_key(end.as_str()) {
                err(line, ValidationErrorKind::DanglingEdge(end.clone()));
                ok = false;
            }
        }
        let Some(label) = label else {
            err(
                line,
                ValidationErrorKind::MissingLabel {
                    source_node: source.clone(),
                },
            );
            continue;
        };
        if !ok {
            continue;
        }
        edges.push(TreeEdge {
            source: index[source.as_str()],
            target: index[target.as_str()],
            label: label.clone(),
            prob: *prob,
            utility: *util,
            line,
        });
    }

    let n = nodes.len();
    let mut out_edges: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    let mut parent: Vec<Option<EdgeId>> = vec![None; n];
    for (i, e) in edges.iter().enumerate() {
        out_edges[e.source.0].push(EdgeId(i));
        match parent[e.target.0] {
            Some(_) => err(
                e.line,
                ValidationErrorKind::MultipleParents(nodes[e.target.0].name.clone()),
            ),
            None => parent[e.target.0] = Some(EdgeId(i)),
        }
    }
    if let Some(r) = root {
        if let Some(p) = parent[r.0] {
            err(
                edges[p.0].line,
                ValidationErrorKind::RootHasParent(nodes[r.0].name.clone()),
            );
        }
    }

    for (i, node) in nodes.iter().enumerate() {
        let outs = &out_edges[i];
        let name = &node.name;
        match node.kind {
            NodeKind::Leaf { .. } => {
                if let Some(&e) = outs.first() {
                    err(edges[e.0].line, ValidationErrorKind::EdgeFromLeaf(name.clone()));
                }
                continue;
            }
            _ if outs.is_empty() => {
                err(node.line, ValidationErrorKind::NoOutgoingEdges(name.clone()));
                continue;
            }
            _ => {}
        }
        let mut labels = HashSet::new();
        for &e in outs {
            let edge = &edges[e.0];
            if !labels.insert(edge.label.as_str()) {
                err(
                    edge.line,
                    ValidationErrorKind::DuplicateLabel {
                        node: name.clone(),
                        label: edge.label.clone(),
                    },
                );
            }
        }
        if node.kind == NodeKind::Decision {
            for &e in outs {
                if edges[e.0].prob.is_some() {
                    err(
                        edges[e.0].line,
                        ValidationErrorKind::ProbOnDecisionEdge(name.clone()),
                    );
                }
            }
            continue;
        }
        let mut sum = 0.0;
        let mut complete = true;
        for &e in outs {
            let edge = &edges[e.0];
            match edge.prob {
                None => {
                    err(
                        edge.line,
                        ValidationErrorKind::MissingProbOnChanceEdge(name.clone()),
                    );
                    complete = false;
                }
                Some(p) if !(0.0..=1.0).contains(&p) => {
                    err(
                        edge.line,
                        ValidationErrorKind::ProbOutOfRange {
                            node: name.clone(),
                            prob: p,
                        },
                    );
                    complete = false;
                }
                Some(p) => sum += p,
            }
        }
        if complete && (sum - 1.0).abs() > PROB_TOLERANCE {
            err(
                edges[outs[0].0].line,
                ValidationErrorKind::ProbSumViolation {
                    node: name.clone(),
                    sum,
                },
            );
        }
    }

    let mut depth = vec![usize::MAX; n];
    if let Some(r) = root {
        depth[r.0] = 0;
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            for &e in &out_edges[v.0] {
                let t = edges[e.0].target;
                if depth[t.0] == usize::MAX {
                    depth[t.0] = depth[v.0] + 1;
                    stack.push(t);
                }
            }
        }
        for (i, node) in nodes.iter().enumerate() {
            if depth[i] == usize::MAX {
                err(node.line, ValidationErrorKind::UnreachableNode(node.name.clone()));
            }
        }
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| e.line);
        return Err(ValidationErrors(errors));
    }
    let root = root.expect("root checked above");

    for outs in &mut out_edges {
        outs.sort_by(|a, b| edges[a.0].label.cmp(&edges[b.0].label));
    }
    let flavour = if edges.iter().any(|e| e.utility.is_some()) {
        Flavour::Type1
    } else {
        Flavour::Type2
    };
    let mut tree = EventTree {
        nodes,
        edges,
        root,
        out_edges,
        parent,
        depth,
        stages: StagePartition::default(),
        flavour,
        levels,
    };
    tree.stages = infer_stages(&tree);

    let mut expectation_errors: BTreeMap<usize, ValidationErrorKind> = BTreeMap::new();
    for located in doc.iter() {
        if let Declaration::ExpectStage { first, second } = &located.decl {
            let found = |name: &str| index.get(name).copied();
            let kind = match (found(first), found(second)) {
                (None, _) => Some(ValidationErrorKind::DanglingEdge(first.clone())),
                (_, None) => Some(ValidationErrorKind::DanglingEdge(second.clone())),
                (Some(a), Some(b)) if !tree.stages.same_stage(a, b) => {
                    Some(ValidationErrorKind::StageExpectation {
                        first: first.clone(),
                        second: second.clone(),
                    })
                }
                _ => None,
            };
            if let Some(kind) = kind {
                expectation_errors.insert(located.line, kind);
            }
        }
    }
    if !expectation_errors.is_empty() {
        return Err(ValidationErrors(
            expectation_errors
                .into_iter()
                .map(|(line, kind)| ValidationError { line, kind })
                .collect(),
        ));
    }
    Ok(tree)
}
