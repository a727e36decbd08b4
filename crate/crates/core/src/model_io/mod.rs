//! Reading and writing the line-oriented model format, DOT export and solve reports.
//!
//! A model file holds one declaration per line; `#` starts a comment:
//!
//! ```text
//! # cegd-model v1
//! level 0 var=D
//! node d kind=decision
//! node c kind=chance
//! leaf safe utility=10
//! leaf win utility=20
//! leaf lose utility=0
//! edge d safe label=a
//! edge d c label=b
//! edge c lose label=bad prob=0.6
//! edge c win label=good prob=0.4
//! root d
//! ```

mod dot;
mod parse;
mod report;

use std::fmt;

pub use dot::{export_dot, ToDot, PALETTE};
pub use parse::{parse_model, parse_model_bytes, ParseError, ParseErrorKind, ParseErrors};
pub use report::{parse_solve_report, ReportError, SolveReport};

/// Leading comment that marks the model format version.
pub const FORMAT_HEADER: &str = "# cegd-model v1";

/// Kind given in a `node` declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclaredKind {
    Chance,
    Decision,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Declaration {
    Level {
        depth: usize,
        var: String,
    },
    Node {
        id: String,
        kind: DeclaredKind,
    },
    Leaf {
        id: String,
        utility: f64,
    },
    Edge {
        source: String,
        target: String,
        label: Option<String>,
        prob: Option<f64>,
        util: Option<f64>,
    },
    Root {
        id: String,
    },
    ExpectStage {
        first: String,
        second: String,
    },
}

/// A declaration together with the 1-based line it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Located {
    pub line: usize,
    pub decl: Declaration,
}

/// Parsed model file, before any structural validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelDocument {
    pub declarations: Vec<Located>,
}

impl ModelDocument {
    pub fn iter(&self) -> impl Iterator<Item = &Located> {
        self.declarations.iter()
    }

    pub fn len(&self) -> usize {
        self.declarations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.declarations.is_empty()
    }
}

fn needs_quotes(label: &str) -> bool {
    label.is_empty()
        || label
            .chars()
            .any(|c| c.is_whitespace() || c == '"' || c == '#' || c == '\\')
}

fn write_label(f: &mut fmt::Formatter<'_>, label: &str) -> fmt::Result {
    if !needs_quotes(label) {
        return write!(f, "{label}");
    }
    f.write_str("\"")?;
    for c in label.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            _ => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for Declaration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Declaration::Level { depth, var } => write!(f, "level {depth} var={var}"),
            Declaration::Node { id, kind } => {
                let kind = match kind {
                    DeclaredKind::Chance => "chance",
                    DeclaredKind::Decision => "decision",
                };
                write!(f, "node {id} kind={kind}")
            }
            Declaration::Leaf { id, utility } => write!(f, "leaf {id} utility={utility:?}"),
            Declaration::Edge {
                source,
                target,
                label,
                prob,
                util,
            } => {
                write!(f, "edge {source} {target}")?;
                if let Some(label) = label {
                    f.write_str(" label=")?;
                    write_label(f, label)?;
                }
                if let Some(p) = prob {
                    write!(f, " prob={p:?}")?;
                }
                if let Some(u) = util {
                    write!(f, " util={u:?}")?;
                }
                Ok(())
            }
            Declaration::Root { id } => write!(f, "root {id}"),
            Declaration::ExpectStage { first, second } => {
                write!(f, "expect-stage {first} {second}")
            }
        }
    }
}

/// Pretty-prints one declaration per line behind the format header.
impl fmt::Display for ModelDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{FORMAT_HEADER}")?;
        for located in &self.declarations {
            writeln!(f, "{}", located.decl)?;
        }
        Ok(())
    }
}
