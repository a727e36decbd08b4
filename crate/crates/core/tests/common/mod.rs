#![allow(dead_code)]

use std::fmt::Write;
use std::path::PathBuf;

use cegd::{build_ceg, parse_model, validate_tree, Ceg, EventTree};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap()
}

pub fn load_tree(text: &str) -> EventTree {
    validate_tree(&parse_model(text).unwrap()).unwrap()
}

pub fn load_ceg(text: &str) -> (EventTree, Ceg) {
    let tree = load_tree(text);
    let ceg = build_ceg(&tree, tree.flavour()).unwrap();
    (tree, ceg)
}

pub fn paper_example() -> (EventTree, Ceg) {
    load_ceg(&read_data("paper_example.ceg"))
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Deepest level that may hold non-leaf nodes is `max_depth - 1`.
    pub max_depth: usize,
    pub max_branching: usize,
    pub max_decision_levels: usize,
    /// Chance that a non-root node below the first level becomes a leaf early.
    pub early_leaf: f64,
    pub edge_utilities: bool,
    /// Gives every depth its own edge labels, so stages never span depths.
    pub depth_labels: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 6,
            max_branching: 3,
            max_decision_levels: 3,
            early_leaf: 0.15,
            edge_utilities: false,
            depth_labels: false,
        }
    }
}

const UTILITIES: [f64; 5] = [0.0, 1.0, 2.0, 5.0, 0.5];
const EDGE_UTILITIES: [f64; 4] = [-1.0, 0.0, 1.0, 2.5];

fn distribution(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let weights: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
    let total: u32 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|&w| w as f64 / total as f64).collect();
    let head: f64 = probs[..n - 1].iter().sum();
    probs[n - 1] = 1.0 - head;
    probs
}

/// Random stratified model: every depth holds one variable, chance or
/// decision, and small pools of distributions and utilities make repeated
/// subtrees (and hence coalescence) likely.
pub fn random_model(rng: &mut impl Rng, cfg: &GenConfig) -> String {
    let depth = rng.gen_range(1..=cfg.max_depth);
    let mut decision_levels = 0;
    let kinds: Vec<bool> = (0..depth)
        .map(|_| {
            let decide = decision_levels < cfg.max_decision_levels && rng.gen_bool(0.4);
            decision_levels += decide as usize;
            decide
        })
        .collect();
    // Each depth has a fixed branching and two candidate distributions.
    let branching: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=cfg.max_branching)).collect();
    let pools: Vec<Vec<Vec<f64>>> = branching
        .iter()
        .map(|&b| (0..2).map(|_| distribution(rng, b)).collect())
        .collect();
    let utilities: Vec<f64> = UTILITIES.choose_multiple(rng, 3).copied().collect();
    // Leaf utilities depend only on the labels at a few depths.
    let relevant: Vec<usize> = (0..depth).filter(|_| rng.gen_bool(0.4)).collect();

    let mut text = String::from("# cegd-model v1\n");
    for (d, decide) in kinds.iter().enumerate() {
        let prefix = if *decide { "D" } else { "X" };
        writeln!(text, "level {d} var={prefix}{d}").unwrap();
    }
    let mut decls = Vec::new();
    let mut edges = Vec::new();
    let mut counter = 0usize;
    let mut frontier = vec![(format!("n{counter}"), 0usize, Vec::<usize>::new())];
    counter += 1;
    let mut first = true;
    while let Some((name, d, path)) = frontier.pop() {
        let leaf = d == depth || (!first && d > 0 && rng.gen_bool(cfg.early_leaf));
        first = false;
        if leaf {
            let key: usize = relevant.iter().filter_map(|&r| path.get(r)).sum();
            let u = utilities[key % utilities.len()];
            decls.push(format!("leaf {name} utility={u}"));
            continue;
        }
        let decide = kinds[d];
        let kind = if decide { "decision" } else { "chance" };
        decls.push(format!("node {name} kind={kind}"));
        let probs = &pools[d][path.last().copied().unwrap_or(0) % 2];
        for (i, p) in probs.iter().enumerate() {
            let child = format!("n{counter}");
            counter += 1;
            let mut line = if cfg.depth_labels {
                format!("edge {name} {child} label={}{i}", (b'a' + d as u8) as char)
            } else {
                format!("edge {name} {child} label={i}")
            };
            if !decide {
                write!(line, " prob={p:?}").unwrap();
            }
            if cfg.edge_utilities && rng.gen_bool(0.5) {
                let u = EDGE_UTILITIES[rng.gen_range(0..EDGE_UTILITIES.len())];
                write!(line, " util={u}").unwrap();
            }
            edges.push(line);
            let mut child_path = path.clone();
            child_path.push(i);
            frontier.push((child, d + 1, child_path));
        }
    }
    for line in decls.iter().chain(&edges) {
        text.push_str(line);
        text.push('\n');
    }
    text.push_str("root n0\n");
    text
}

/// Reorders the edge declarations of a model without touching anything else.
pub fn shuffle_edges(rng: &mut impl Rng, text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let mut edges: Vec<&str> = lines.iter().copied().filter(|l| l.starts_with("edge ")).collect();
    edges.shuffle(rng);
    let mut edges = edges.into_iter();
    let mut out = String::new();
    for l in lines {
        let l = if l.starts_with("edge ") { edges.next().unwrap() } else { l };
        out.push_str(l);
        out.push('\n');
    }
    out
}

/// Reorders node and leaf declarations, which changes ids and names.
pub fn shuffle_nodes(rng: &mut impl Rng, text: &str) -> String {
    let is_node = |l: &str| l.starts_with("node ") || l.starts_with("leaf ");
    let lines: Vec<&str> = text.lines().collect();
    let mut nodes: Vec<&str> = lines.iter().copied().filter(|l| is_node(l)).collect();
    nodes.shuffle(rng);
    let mut nodes = nodes.into_iter();
    let mut out = String::new();
    for l in lines {
        let l = if is_node(l) { nodes.next().unwrap() } else { l };
        out.push_str(l);
        out.push('\n');
    }
    out
}
