use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::{DeclaredKind, Declaration, Located, ModelDocument};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("duplicate declaration: {0}")]
    DuplicateDeclaration(String),
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("unsupported model format version `{0}`")]
    UnsupportedVersion(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

/// Every error found in a document, in line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
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

impl std::error::Error for ParseErrors {}

/// Parses raw bytes; invalid UTF-8 is reported as a syntax error on the
/// line where decoding fails.
pub fn parse_model_bytes(bytes: &[u8]) -> Result<ModelDocument, ParseErrors> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_model(text),
        Err(e) => {
            let line = bytes[..e.valid_up_to()]
                .iter()
                .filter(|&&b| b == b'\n')
                .count()
                + 1;
            Err(ParseErrors(vec![ParseError {
                line,
                kind: ParseErrorKind::Syntax("input is not valid UTF-8".into()),
            }]))
        }
    }
}

/// Parses a model file. Collects every error instead of stopping at the first.
pub fn parse_model(text: &str) -> Result<ModelDocument, ParseErrors> {
    let mut doc = ModelDocument::default();
    let mut errors = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut depths: HashMap<usize, usize> = HashMap::new();
    let mut vars: HashSet<String> = HashSet::new();
    let mut root_line: Option<usize> = None;
    let mut seen_content = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if !seen_content {
            if let Some(version) = raw.trim().strip_prefix("# cegd-model ") {
                if version.trim() != "v1" {
                    errors.push(ParseError {
                        line,
                        kind: ParseErrorKind::UnsupportedVersion(version.trim().to_string()),
                    });
                }
            }
        }
        let tokens = match tokenize(raw) {
            Ok(t) => t,
            Err(msg) => {
                errors.push(ParseError {
                    line,
                    kind: ParseErrorKind::Syntax(msg),
                });
                continue;
            }
        };
        if tokens.is_empty() {
            continue;
        }
        seen_content = true;
        let decl = match parse_declaration(&tokens) {
            Ok(d) => d,
            Err(kind) => {
                errors.push(ParseError { line, kind });
                continue;
            }
        };

        let duplicate = match &decl {
            Declaration::Node { id, .. } | Declaration::Leaf { id, .. } => ids
                .insert(id.clone(), line)
                .map(|prev| format!("node `{id}` already declared on line {prev}")),
            Declaration::Level { depth, var } => {
                if let Some(prev) = depths.insert(*depth, line) {
                    Some(format!("level {depth} already declared on line {prev}"))
                } else if !vars.insert(var.clone()) {
                    Some(format!("variable `{var}` names more than one level"))
                } else {
                    None
                }
            }
            Declaration::Root { .. } => match root_line {
                Some(prev) => Some(format!("root already declared on line {prev}")),
                None => {
                    root_line = Some(line);
                    None
                }
            },
            _ => None,
        };
        if let Some(msg) = duplicate {
            errors.push(ParseError {
                line,
                kind: ParseErrorKind::DuplicateDeclaration(msg),
            });
            continue;
        }
        doc.declarations.push(Located { line, decl });
    }

    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(ParseErrors(errors))
    }
}

#[derive(Debug, PartialEq)]
struct Token {
    /// Key for `key=value` tokens.
    key: Option<String>,
    value: String,
}

/// Splits a line into tokens, honouring double quotes in values and
/// stripping a trailing `#` comment.
fn tokenize(line: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.peek() {
            None | Some('#') => break,
            _ => {}
        }
        let mut key = None;
        let mut word = String::new();
        let mut quoted = false;
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() || c == '#' {
                break;
            }
            chars.next();
            if c == '=' && key.is_none() {
                if word.is_empty() {
                    return Err("`=` without a key".into());
                }
                key = Some(std::mem::take(&mut word));
                if chars.peek() == Some(&'"') {
                    chars.next();
                    word = read_quoted(&mut chars)?;
                    quoted = true;
                    if chars.peek().is_some_and(|c| !c.is_whitespace() && *c != '#') {
                        return Err("unexpected text after closing quote".into());
                    }
                    break;
                }
            } else if c == '"' {
                return Err("quotes are only allowed around a value".into());
            } else {
                word.push(c);
            }
        }
        if key.is_some() && word.is_empty() && !quoted {
            return Err(format!("missing value for `{}`", key.unwrap()));
        }
        tokens.push(Token { key, value: word });
    }
    Ok(tokens)
}

fn read_quoted(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> Result<String, String> {
    let mut out = String::new();
    loop {
        match chars.next() {
            None => return Err("unterminated string".into()),
            Some('"') => return Ok(out),
            Some('\\') => match chars.next() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(c) => return Err(format!("unknown escape `\\{c}`")),
                None => return Err("unterminated string".into()),
            },
            Some(c) => out.push(c),
        }
    }
}

fn syntax(msg: impl Into<String>) -> ParseErrorKind {
    ParseErrorKind::Syntax(msg.into())
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':'))
}

fn ident(tok: Option<&Token>, what: &str) -> Result<String, ParseErrorKind> {
    match tok {
        Some(Token { key: None, value }) if is_ident(value) => Ok(value.clone()),
        Some(Token { key: None, value }) => Err(syntax(format!("invalid {what} `{value}`"))),
        Some(Token { key: Some(k), .. }) => {
            Err(syntax(format!("expected {what}, found attribute `{k}=`")))
        }
        None => Err(syntax(format!("missing {what}"))),
    }
}

fn decimal(value: &str, key: &str) -> Result<f64, ParseErrorKind> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(syntax(format!("`{key}` expects a finite decimal, found `{value}`"))),
    }
}

/// Collects `key=value` attributes, rejecting unknown and repeated keys.
fn attributes<'a>(
    rest: &'a [Token],
    allowed: &[&str],
) -> Result<HashMap<&'a str, &'a str>, ParseErrorKind> {
    let mut out = HashMap::new();
    for tok in rest {
        let Some(key) = tok.key.as_deref() else {
            return Err(syntax(format!("unexpected token `{}`", tok.value)));
        };
        if !allowed.contains(&key) {
            return Err(syntax(format!("unknown attribute `{key}`")));
        }
        if out.insert(key, tok.value.as_str()).is_some() {
            return Err(syntax(format!("attribute `{key}` given twice")));
        }
    }
    Ok(out)
}

fn parse_declaration(tokens: &[Token]) -> Result<Declaration, ParseErrorKind> {
    let head = &tokens[0];
    if head.key.is_some() {
        return Err(syntax("declaration must start with a keyword"));
    }
    let args = &tokens[1..];
    match head.value.as_str() {
        "level" => {
            let depth_tok = ident(args.first(), "level depth")?;
            let depth = depth_tok
                .parse::<usize>()
                .map_err(|_| syntax(format!("level depth must be an integer, found `{depth_tok}`")))?;
            let attrs = attributes(&args[1..], &["var"])?;
            let var = attrs.get("var").ok_or_else(|| syntax("level needs var="))?;
            if !is_ident(var) {
                return Err(syntax(format!("invalid variable name `{var}`")));
            }
            Ok(Declaration::Level {
                depth,
                var: var.to_string(),
            })
        }
        "node" => {
            let id = ident(args.first(), "node identifier")?;
            let attrs = attributes(&args[1..], &["kind"])?;
            let kind = match attrs.get("kind").copied() {
                Some("chance") => DeclaredKind::Chance,
                Some("decision") => DeclaredKind::Decision,
                Some(other) => {
                    return Err(syntax(format!(
                        "kind must be `chance` or `decision`, found `{other}`"
                    )))
                }
                None => return Err(syntax("node needs kind=")),
            };
            Ok(Declaration::Node { id, kind })
        }
        "leaf" => {
            let id = ident(args.first(), "leaf identifier")?;
            let attrs = attributes(&args[1..], &["utility"])?;
            let utility = attrs
                .get("utility")
                .ok_or_else(|| syntax("leaf needs utility="))?;
            Ok(Declaration::Leaf {
                id,
                utility: decimal(utility, "utility")?,
            })
        }
        "edge" => {
            let source = ident(args.first(), "edge source")?;
            let target = ident(args.get(1), "edge target")?;
            let attrs = attributes(args.get(2..).unwrap_or(&[]), &["label", "prob", "util"])?;
            let prob = attrs.get("prob").map(|v| decimal(v, "prob")).transpose()?;
            let util = attrs.get("util").map(|v| decimal(v, "util")).transpose()?;
            Ok(Declaration::Edge {
                source,
                target,
                label: attrs.get("label").map(|s| s.to_string()),
                prob,
                util,
            })
        }
        "root" => {
            let id = ident(args.first(), "root identifier")?;
            if args.len() > 1 {
                return Err(syntax("root takes exactly one identifier"));
            }
            Ok(Declaration::Root { id })
        }
        "expect-stage" => {
            let first = ident(args.first(), "node identifier")?;
            let second = ident(args.get(1), "node identifier")?;
            if args.len() > 2 {
                return Err(syntax("expect-stage takes exactly two identifiers"));
            }
            Ok(Declaration::ExpectStage { first, second })
        }
        other => Err(ParseErrorKind::UnknownKeyword(other.to_string())),
    }
}
