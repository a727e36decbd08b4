use std::fmt::Write;

use crate::ceg::{Ceg, PositionKind};
use crate::event_tree::{EventTree, NodeKind, StageId};

/// Fill colours for stages, indexed by stage id modulo the length.
pub const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
    "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f",
];

/// Graphs that can be rendered as Graphviz DOT text.
pub trait ToDot {
    fn to_dot(&self) -> String;
}

pub fn export_dot<G: ToDot + ?Sized>(graph: &G) -> String {
    graph.to_dot()
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_label(name: &str, utility: Option<f64>) -> String {
    let mut q = quote(name);
    if let Some(u) = utility {
        q.pop();
        write!(q, "\\nU={u}\"").unwrap();
    }
    q
}

fn edge_label(label: &str, prob: Option<f64>, utility: Option<f64>) -> String {
    let mut s = label.to_string();
    if let Some(p) = prob {
        write!(s, " p={p}").unwrap();
    }
    if let Some(u) = utility {
        write!(s, " u={u}").unwrap();
    }
    s
}

fn fill(stage: Option<StageId>) -> String {
    match stage {
        Some(s) => format!(", style=filled, fillcolor={}", quote(PALETTE[s.0 % PALETTE.len()])),
        None => String::new(),
    }
}

impl ToDot for EventTree {
    fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n  rankdir=LR;\n");
        for id in self.node_ids() {
            let node = self.node(id);
            let (shape, label) = match node.kind {
                NodeKind::Chance => ("ellipse", node_label(&node.name, None)),
                NodeKind::Decision => ("box", node_label(&node.name, None)),
                NodeKind::Leaf { utility } => ("diamond", node_label(&node.name, Some(utility))),
            };
            writeln!(
                out,
                "  n{} [label={}, shape={shape}{}];",
                id.0,
                label,
                fill(self.stages().stage_of(id))
            )
            .unwrap();
        }
        for e in self.edges() {
            writeln!(
                out,
                "  n{} -> n{} [label={}];",
                e.source.0,
                e.target.0,
                quote(&edge_label(&e.label, e.prob, e.utility))
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

impl ToDot for Ceg {
    fn to_dot(&self) -> String {
        let mut out = String::from("digraph ceg {\n  rankdir=LR;\n");
        for id in self.position_ids() {
            let p = self.position(id);
            let (shape, label) = match p.kind {
                PositionKind::Chance => ("ellipse", node_label(&p.name, None)),
                PositionKind::Decision => ("box", node_label(&p.name, None)),
                PositionKind::Sink => ("diamond", node_label(&p.name, None)),
                PositionKind::Utility(u) => ("diamond", node_label(&p.name, Some(u))),
            };
            writeln!(
                out,
                "  p{} [label={}, shape={shape}{}];",
                id.0,
                label,
                fill(p.stage)
            )
            .unwrap();
        }
        for e in self.edges() {
            writeln!(
                out,
                "  p{} -> p{} [label={}];",
                e.source.0,
                e.target.0,
                quote(&edge_label(&e.label, e.prob, e.utility))
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}
