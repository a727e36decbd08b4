//! Context-specific conditional independence read off positions, stages and
//! cuts of a CEG.
//!
//! A history is the set of `(variable, value)` pairs met on one root-to-position
//! path: every edge contributes the variable of its source's depth and its own
//! label. Variables come from the `level` declarations of the model.
//!
//! Statements print as `A ⊥ B | C`. Lists follow level order with `U` last; a
//! single item prints bare, longer lists are parenthesised and an empty list
//! prints as `∅`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ceg::{Ceg, PositionId, PositionKind};
use crate::event_tree::{Levels, StageId, UTILITY_VARIABLE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CiError {
    #[error("unknown position `{0}`")]
    UnknownPosition(String),
    #[error("unknown stage `{0}`")]
    UnknownStage(String),
    #[error("depth {0} has no `level` declaration")]
    UntaggedDepth(usize),
    #[error("`{0}` spans nodes from different depths")]
    MixedLevels(String),
    #[error("the given positions do not form a cut")]
    NotACut,
    #[error("`{0}` is not a decision variable")]
    NotADecisionVariable(String),
}

/// One conditioning variable, with its value when it is fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextItem {
    pub variable: String,
    pub value: Option<String>,
}

impl fmt::Display for ContextItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Some(v) => write!(f, "{}={v}", self.variable),
            None => f.write_str(&self.variable),
        }
    }
}

/// `independent ⊥ irrelevant | context`, each list in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiStatement {
    pub independent: Vec<String>,
    pub irrelevant: Vec<String>,
    pub context: Vec<ContextItem>,
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    match items {
        [] => f.write_str("∅"),
        [one] => write!(f, "{one}"),
        _ => {
            f.write_str("(")?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{item}")?;
            }
            f.write_str(")")
        }
    }
}

/// Canonical rendering of a variable list, as used in statements.
pub fn format_variables(vars: &[String]) -> String {
    struct List<'a>(&'a [String]);
    impl fmt::Display for List<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_list(f, self.0)
        }
    }
    List(vars).to_string()
}

impl fmt::Display for CiStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.independent)?;
        f.write_str(" ⊥ ")?;
        write_list(f, &self.irrelevant)?;
        f.write_str(" | ")?;
        write_list(f, &self.context)
    }
}

/// Positions meant to split every root-to-terminal path exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cut(pub BTreeSet<PositionId>);

impl Cut {
    /// Resolves position names; an item that names no position but reads as a
    /// stage id (`s3`) contributes every member of that stage.
    pub fn by_names<S: AsRef<str>>(ceg: &Ceg, items: &[S]) -> Result<Cut, CiError> {
        let mut set = BTreeSet::new();
        for item in items {
            let item = item.as_ref().trim();
            if let Some(p) = ceg.find(item) {
                set.insert(p);
                continue;
            }
            let stage: StageId = item
                .parse()
                .map_err(|_| CiError::UnknownPosition(item.to_string()))?;
            let members = ceg.stage_members(stage);
            if members.is_empty() {
                return Err(CiError::UnknownStage(item.to_string()));
            }
            set.extend(members);
        }
        Ok(Cut(set))
    }
}

/// Pseudo-depth used to sort the utility variable after every level.
const UTILITY_DEPTH: usize = usize::MAX;

type History = BTreeMap<usize, String>;

struct Analysis<'a> {
    ceg: &'a Ceg,
    levels: &'a Levels,
    histories: Vec<BTreeSet<History>>,
}

impl<'a> Analysis<'a> {
    fn new(ceg: &'a Ceg, levels: &'a Levels) -> Result<Self, CiError> {
        let order = crate::solve::topo_order(ceg).expect("CEGs are acyclic");
        let mut histories = vec![BTreeSet::new(); ceg.positions().len()];
        histories[ceg.root().0].insert(History::new());
        for p in order {
            if ceg.out_edges(p).is_empty() {
                continue;
            }
            let depth = depth_of(ceg, p)?;
            let current = std::mem::take(&mut histories[p.0]);
            for &e in ceg.out_edges(p) {
                let edge = ceg.edge(e);
                for h in &current {
                    let mut h = h.clone();
                    h.insert(depth, edge.label.clone());
                    histories[edge.target.0].insert(h);
                }
            }
            histories[p.0] = current;
        }
        Ok(Analysis {
            ceg,
            levels,
            histories,
        })
    }

    fn name(&self, depth: usize) -> Result<String, CiError> {
        if depth == UTILITY_DEPTH {
            return Ok(UTILITY_VARIABLE.to_string());
        }
        self.levels
            .var(depth)
            .map(str::to_string)
            .ok_or(CiError::UntaggedDepth(depth))
    }

    fn names(&self, depths: &BTreeSet<usize>) -> Result<Vec<String>, CiError> {
        depths.iter().map(|&d| self.name(d)).collect()
    }

    /// Depths of internal positions reachable from `p`, `p` included.
    fn downstream(&self, p: PositionId) -> Result<BTreeSet<usize>, CiError> {
        let mut seen = BTreeSet::from([p]);
        let mut stack = vec![p];
        let mut depths = BTreeSet::new();
        while let Some(q) = stack.pop() {
            if self.ceg.position(q).kind.is_terminal() {
                continue;
            }
            depths.insert(depth_of(self.ceg, q)?);
            for c in self.ceg.children(q) {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        Ok(depths)
    }

    /// Context and irrelevant sets when all histories are pooled: a variable
    /// taking two or more values is irrelevant, one present everywhere with
    /// a single value is fixed context.
    fn pooled(
        &self,
        histories: &[&History],
    ) -> Result<(Vec<String>, Vec<ContextItem>), CiError> {
        let mut irrelevant = BTreeSet::new();
        let mut context = Vec::new();
        for (depth, values) in values_by_depth(histories) {
            let present_everywhere = histories.iter().all(|h| h.contains_key(&depth));
            if values.len() > 1 {
                irrelevant.insert(depth);
            } else if present_everywhere {
                context.push(ContextItem {
                    variable: self.name(depth)?,
                    value: values.into_iter().next(),
                });
            }
        }
        Ok((self.names(&irrelevant)?, context))
    }

    fn member_histories(&self, members: &[PositionId]) -> Vec<(&History, PositionId)> {
        members
            .iter()
            .flat_map(|&m| self.histories[m.0].iter().map(move |h| (h, m)))
            .collect()
    }

    /// A variable is irrelevant to a set of positions when it varies across
    /// their histories yet never helps tell the positions apart: dropping it
    /// from every history still leaves each remaining history pointing at a
    /// single position.
    fn discriminating(
        &self,
        members: &[PositionId],
    ) -> Result<(BTreeSet<usize>, Vec<ContextItem>), CiError> {
        let tagged = self.member_histories(members);
        let all: Vec<&History> = tagged.iter().map(|(h, _)| *h).collect();
        let mut irrelevant = BTreeSet::new();
        let mut context = Vec::new();
        for (depth, values) in values_by_depth(&all) {
            if values.len() > 1 && !separates(&tagged, depth) {
                irrelevant.insert(depth);
                continue;
            }
            let present_everywhere = all.iter().all(|h| h.contains_key(&depth));
            if values.len() > 1 {
                context.push(ContextItem {
                    variable: self.name(depth)?,
                    value: None,
                });
            } else if present_everywhere {
                context.push(ContextItem {
                    variable: self.name(depth)?,
                    value: values.into_iter().next(),
                });
            }
        }
        Ok((irrelevant, context))
    }
}

fn depth_of(ceg: &Ceg, p: PositionId) -> Result<usize, CiError> {
    ceg.position(p)
        .depth
        .ok_or_else(|| CiError::MixedLevels(ceg.position(p).name.clone()))
}

fn values_by_depth(histories: &[&History]) -> BTreeMap<usize, BTreeSet<String>> {
    let mut values: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for h in histories {
        for (d, v) in h.iter() {
            values.entry(*d).or_default().insert(v.clone());
        }
    }
    values
}

/// Whether removing `depth` from the histories makes two positions collide.
fn separates(tagged: &[(&History, PositionId)], depth: usize) -> bool {
    let mut owner: BTreeMap<History, PositionId> = BTreeMap::new();
    for (h, p) in tagged {
        let mut key = (*h).clone();
        key.remove(&depth);
        if let Some(&q) = owner.get(&key) {
            if q != *p {
                return true;
            }
        } else {
            owner.insert(key, *p);
        }
    }
    false
}

fn check_position(ceg: &Ceg, w: PositionId) -> Result<(), CiError> {
    if ceg.contains(w) {
        Ok(())
    } else {
        Err(CiError::UnknownPosition(format!("#{}", w.0)))
    }
}

/// Statement carried by a single position: the variables at and below `w`,
/// together with `U`, are independent of the upstream variables whose value
/// does not matter for reaching `w`, given those that are fixed.
pub fn statement_from_position(
    ceg: &Ceg,
    w: PositionId,
    levels: &Levels,
) -> Result<CiStatement, CiError> {
    check_position(ceg, w)?;
    let analysis = Analysis::new(ceg, levels)?;
    let histories: Vec<&History> = analysis.histories[w.0].iter().collect();
    let (irrelevant, context) = analysis.pooled(&histories)?;
    let mut independent = analysis.downstream(w)?;
    independent.insert(UTILITY_DEPTH);
    Ok(CiStatement {
        independent: analysis.names(&independent)?,
        irrelevant,
        context,
    })
}

/// Statement carried by a stage: only the stage's own variable is
/// independent, and the histories of all member positions are pooled.
pub fn statement_from_stage(
    ceg: &Ceg,
    s: StageId,
    levels: &Levels,
) -> Result<CiStatement, CiError> {
    let members = ceg.stage_members(s);
    if members.is_empty() {
        return Err(CiError::UnknownStage(s.to_string()));
    }
    let analysis = Analysis::new(ceg, levels)?;
    let depths = members
        .iter()
        .map(|&m| depth_of(ceg, m))
        .collect::<Result<BTreeSet<_>, _>>()?;
    if depths.len() > 1 {
        return Err(CiError::MixedLevels(s.to_string()));
    }
    let histories: Vec<&History> = analysis
        .member_histories(&members)
        .into_iter()
        .map(|(h, _)| h)
        .collect();
    let (irrelevant, context) = analysis.pooled(&histories)?;
    Ok(CiStatement {
        independent: analysis.names(&depths)?,
        irrelevant,
        context,
    })
}

/// True when every root-to-terminal path meets the cut exactly once.
pub fn verify_cut(ceg: &Ceg, cut: &Cut) -> Result<bool, CiError> {
    for &p in &cut.0 {
        check_position(ceg, p)?;
    }
    let order = crate::solve::topo_order(ceg).expect("CEGs are acyclic");
    // Hit counts (capped at 2) realised by paths arriving at each position.
    let mut hits = vec![0u8; ceg.positions().len()];
    const ZERO: u8 = 1;
    const ONE: u8 = 2;
    const MORE: u8 = 4;
    let bump = |set: u8| -> u8 {
        let mut out = 0;
        if set & ZERO != 0 {
            out |= ONE;
        }
        if set & (ONE | MORE) != 0 {
            out |= MORE;
        }
        out
    };
    hits[ceg.root().0] = ZERO;
    for p in order {
        let arriving = hits[p.0];
        let leaving = if cut.0.contains(&p) {
            bump(arriving)
        } else {
            arriving
        };
        if ceg.out_edges(p).is_empty() {
            if leaving != ONE {
                return Ok(false);
            }
            continue;
        }
        for c in ceg.children(p) {
            hits[c.0] |= leaving;
        }
    }
    Ok(true)
}

/// Statement for a cut: upstream variables that never help tell the members
/// apart are irrelevant, the rest condition (with a value when fixed), and
/// `U` plus the variables below every member are independent.
pub fn statement_from_cut(ceg: &Ceg, cut: &Cut, levels: &Levels) -> Result<CiStatement, CiError> {
    if !verify_cut(ceg, cut)? {
        return Err(CiError::NotACut);
    }
    let analysis = Analysis::new(ceg, levels)?;
    let members: Vec<PositionId> = cut.0.iter().copied().collect();
    let (irrelevant, context) = analysis.discriminating(&members)?;

    let mut below: Option<BTreeSet<usize>> = None;
    for &m in &members {
        let mut d = analysis.downstream(m)?;
        if !ceg.position(m).kind.is_terminal() {
            d.remove(&depth_of(ceg, m)?);
        }
        below = Some(match below {
            None => d,
            Some(acc) => acc.intersection(&d).copied().collect(),
        });
    }
    let mut independent = below.unwrap_or_default();
    let upstream: BTreeSet<usize> = analysis
        .member_histories(&members)
        .iter()
        .flat_map(|(h, _)| h.keys().copied())
        .collect();
    independent.retain(|d| !upstream.contains(d));
    independent.insert(UTILITY_DEPTH);
    Ok(CiStatement {
        independent: analysis.names(&independent)?,
        irrelevant: analysis.names(&irrelevant)?,
        context,
    })
}

/// Upstream variables that do not affect which decision position is reached
/// at the depth of `decision`.
pub fn irrelevant_for_decision(
    ceg: &Ceg,
    decision: &str,
    levels: &Levels,
) -> Result<Vec<String>, CiError> {
    let not_decision = || CiError::NotADecisionVariable(decision.to_string());
    let depth = levels.depth_of(decision).ok_or_else(not_decision)?;
    let mut members = Vec::new();
    for p in ceg.internal_positions() {
        let position = ceg.position(p);
        if depth_of(ceg, p)? == depth {
            if position.kind != PositionKind::Decision {
                return Err(not_decision());
            }
            members.push(p);
        }
    }
    if members.is_empty() {
        return Err(not_decision());
    }
    let analysis = Analysis::new(ceg, levels)?;
    let (irrelevant, _) = analysis.discriminating(&members)?;
    analysis.names(&irrelevant)
}
