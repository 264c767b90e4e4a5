//! Versioned text formats: `dhl-set v1`, `dhl-subtree v1`, `dhl-tree v1` and
//! `dhl-coloring v1`.
//!
//! Every format starts with a `<kind> v<version>` header line. Blank lines and
//! everything from `#` to the end of a line are ignored. Nodes are written as
//! `@` or as comma-separated digits; the compact digit-string form is accepted
//! on input when every branching number is at most 10.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dhl_core::counterexamples::MarkedTree;
use dhl_core::product::{element_at, Coloring, ProductSubset};
use dhl_core::{BranchingVector, ExplicitTree, Node, StrongSubtree, Tree, VectorStrongSubtree};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("expected a `{expected} v1` header, found `{found}`")]
    Header { expected: &'static str, found: String },
    #[error("unsupported {kind} version `{version}` (only v1 is understood)")]
    Version { kind: &'static str, version: String },
    #[error("{0}")]
    Invalid(String),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

/// Meaningful lines with their 1-based line numbers, comments stripped.
fn content_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect()
}

/// Checks the header and returns the remaining lines.
fn body<'a>(text: &'a str, kind: &'static str) -> Result<Vec<(usize, &'a str)>, FormatError> {
    let lines = content_lines(text);
    let Some(&(_, first)) = lines.first() else {
        return Err(FormatError::Header { expected: kind, found: String::new() });
    };
    let mut parts = first.split_whitespace();
    if parts.next() != Some(kind) {
        return Err(FormatError::Header { expected: kind, found: first.to_string() });
    }
    match (parts.next(), parts.next()) {
        (Some("v1"), None) => Ok(lines[1..].to_vec()),
        (Some(v), None) => Err(FormatError::Version { kind, version: v.to_string() }),
        _ => Err(FormatError::Header { expected: kind, found: first.to_string() }),
    }
}

/// Splits `key: value`; the key may contain spaces (`tree 0 level 1`).
fn key_value(line: usize, text: &str) -> Result<(&str, &str), FormatError> {
    let (k, v) = text.split_once(':').ok_or_else(|| syntax(line, "expected `key: value`"))?;
    Ok((k.trim(), v.trim()))
}

fn parse_usize(line: usize, text: &str, what: &str) -> Result<usize, FormatError> {
    text.parse().map_err(|_| syntax(line, format!("{what} `{text}` is not a non-negative integer")))
}

fn parse_list<T: std::str::FromStr>(line: usize, text: &str, what: &str) -> Result<Vec<T>, FormatError> {
    text.split_whitespace()
        .map(|t| t.parse().map_err(|_| syntax(line, format!("{what} `{t}` is not a non-negative integer"))))
        .collect()
}

fn parse_node(line: usize, text: &str, branching: u32, compact: bool) -> Result<Node, FormatError> {
    let t = Node::parse(text, compact).map_err(|e| syntax(line, e.to_string()))?;
    if let Some(&d) = t.digits().iter().find(|&&d| d >= branching) {
        return Err(syntax(line, format!("digit {d} of node {t} is not below the branching number {branching}")));
    }
    Ok(t)
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Unique `key: value` header fields, read until the first repeated-kind line.
struct Fields<'a> {
    seen: BTreeMap<&'a str, (usize, &'a str)>,
}

impl<'a> Fields<'a> {
    fn take(&mut self, key: &str) -> Option<(usize, &'a str)> {
        self.seen.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(usize, &'a str), FormatError> {
        self.take(key).ok_or_else(|| FormatError::Invalid(format!("missing `{key}:` line")))
    }
}

/// Separates single header fields from the repeated `level …:` style lines.
fn split_fields<'a>(
    lines: &[(usize, &'a str)],
    header_keys: &[&str],
) -> Result<(Fields<'a>, Vec<(usize, &'a str, &'a str)>), FormatError> {
    let mut seen = BTreeMap::new();
    let mut rest = Vec::new();
    for &(n, l) in lines {
        let (k, v) = key_value(n, l)?;
        if header_keys.contains(&k) {
            if seen.insert(k, (n, v)).is_some() {
                return Err(syntax(n, format!("repeated `{k}:` line")));
            }
        } else {
            rest.push((n, k, v));
        }
    }
    Ok((Fields { seen }, rest))
}

fn branching_from(line: usize, text: &str) -> Result<BranchingVector, FormatError> {
    let b: Vec<u32> = parse_list(line, text, "branching number")?;
    BranchingVector::new(b).map_err(|e| syntax(line, e.to_string()))
}

/// `level m` → `m`.
fn indexed(line: usize, key: &str, word: &str) -> Result<usize, FormatError> {
    let rest = key.strip_prefix(word).ok_or_else(|| syntax(line, format!("unexpected key `{key}`")))?;
    parse_usize(line, rest.trim(), word)
}

// ---------------------------------------------------------------- dhl-set

pub fn emit_set(d: &ProductSubset) -> String {
    let mut out = String::from("dhl-set v1\n");
    let _ = writeln!(out, "trees: {}", join(d.branching().as_slice()));
    let _ = writeln!(out, "height: {}", d.height());
    for m in 0..d.height() {
        let elements = d.level_elements(m).into_iter().map(|e| format!("({})", e.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("|")));
        let line = join(elements);
        if line.is_empty() {
            let _ = writeln!(out, "level {m}:");
        } else {
            let _ = writeln!(out, "level {m}: {line}");
        }
    }
    out
}

pub fn parse_set(text: &str) -> Result<ProductSubset, FormatError> {
    let lines = body(text, "dhl-set")?;
    let (mut fields, rest) = split_fields(&lines, &["trees", "height"])?;
    let (tl, tv) = fields.require("trees")?;
    let branching = branching_from(tl, tv)?;
    let (hl, hv) = fields.require("height")?;
    let height = parse_usize(hl, hv, "height")?;
    let compact = branching.compact_digits();
    let mut d = ProductSubset::empty(branching.clone(), height).map_err(|e| syntax(hl, e.to_string()))?;
    let mut done = vec![false; height];
    for (n, k, v) in rest {
        let m = indexed(n, k, "level")?;
        if m >= height {
            return Err(syntax(n, format!("level {m} is not below the height {height}")));
        }
        if std::mem::replace(&mut done[m], true) {
            return Err(syntax(n, format!("repeated `level {m}:` line")));
        }
        for token in v.split_whitespace() {
            let inner = token
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| syntax(n, format!("element `{token}` is not of the form (n1|…|nd)")))?;
            let parts: Vec<&str> = inner.split('|').collect();
            if parts.len() != branching.dim() {
                return Err(syntax(n, format!("element `{token}` has {} coordinates, expected {}", parts.len(), branching.dim())));
            }
            let element = parts
                .iter()
                .zip(branching.as_slice())
                .map(|(p, &b)| parse_node(n, p, b, compact))
                .collect::<Result<Vec<_>, _>>()?;
            if element.iter().any(|t| t.len() != m) {
                return Err(syntax(n, format!("element `{token}` does not lie on level {m}")));
            }
            if d.contains(&element) {
                return Err(syntax(n, format!("element `{token}` is listed twice")));
            }
            d.set(&element, true).map_err(|e| syntax(n, e.to_string()))?;
        }
    }
    Ok(d)
}

// ---------------------------------------------------------------- dhl-subtree

/// A vector strong subtree together with the branching numbers of its hosts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtreeFile {
    pub branching: BranchingVector,
    pub subtree: VectorStrongSubtree,
}

/// The lines after `trees:`, shared with report output.
pub fn subtree_body(s: &VectorStrongSubtree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "levelset: {}", join(s.level_set()));
    for (i, c) in s.coords().iter().enumerate() {
        for (j, level) in c.levels().iter().enumerate() {
            let _ = writeln!(out, "tree {i} level {j}: {}", join(level));
        }
    }
    out
}

pub fn emit_subtree(f: &SubtreeFile) -> String {
    let mut out = String::from("dhl-subtree v1\n");
    let _ = writeln!(out, "trees: {}", join(f.branching.as_slice()));
    out.push_str(&subtree_body(&f.subtree));
    out
}

/// Reads the node lists as given; whether they form a strong subtree is checked separately.
pub fn parse_subtree(text: &str) -> Result<SubtreeFile, FormatError> {
    let lines = body(text, "dhl-subtree")?;
    let (mut fields, rest) = split_fields(&lines, &["trees", "levelset"])?;
    let (tl, tv) = fields.require("trees")?;
    let branching = branching_from(tl, tv)?;
    let (ll, lv) = fields.require("levelset")?;
    let level_set: Vec<usize> = parse_list(ll, lv, "level")?;
    if level_set.is_empty() {
        return Err(syntax(ll, "empty level set"));
    }
    let compact = branching.compact_digits();
    let k = level_set.len();
    let mut levels: Vec<Vec<Option<Vec<Node>>>> = vec![vec![None; k]; branching.dim()];
    for (n, key, v) in rest {
        let words: Vec<&str> = key.split_whitespace().collect();
        let (i, j) = match words.as_slice() {
            ["tree", i, "level", j] => (parse_usize(n, i, "tree")?, parse_usize(n, j, "level")?),
            _ => return Err(syntax(n, format!("unexpected key `{key}`"))),
        };
        if i >= branching.dim() || j >= k {
            return Err(syntax(n, format!("`tree {i} level {j}` is out of range")));
        }
        let b = branching.as_slice()[i];
        let nodes = v.split_whitespace().map(|t| parse_node(n, t, b, compact)).collect::<Result<Vec<_>, _>>()?;
        if levels[i][j].replace(nodes).is_some() {
            return Err(syntax(n, format!("repeated `tree {i} level {j}:` line")));
        }
    }
    let mut coords = Vec::with_capacity(branching.dim());
    for (i, per) in levels.into_iter().enumerate() {
        let per = per
            .into_iter()
            .enumerate()
            .map(|(j, l)| l.ok_or_else(|| FormatError::Invalid(format!("missing `tree {i} level {j}:` line"))))
            .collect::<Result<Vec<_>, _>>()?;
        coords.push(StrongSubtree::new(level_set.clone(), per));
    }
    let subtree = VectorStrongSubtree::new(coords).map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(SubtreeFile { branching, subtree })
}

// ---------------------------------------------------------------- dhl-tree

pub fn emit_tree(m: &MarkedTree) -> String {
    let mut out = String::from("dhl-tree v1\n");
    let counts = m.tree.child_counts();
    let _ = writeln!(out, "height: {}", counts.len());
    for (j, c) in counts.iter().enumerate() {
        let _ = writeln!(out, "level {j}: {}", join(c));
    }
    for j in 0..counts.len() {
        let marked = m.marked_in_level(j);
        if !marked.is_empty() {
            let _ = writeln!(out, "marked level {j}: {}", join(&marked));
        }
    }
    out
}

/// An explicit tree; `marked level j:` lines are optional.
pub fn parse_tree(text: &str) -> Result<MarkedTree, FormatError> {
    let lines = body(text, "dhl-tree")?;
    let (mut fields, rest) = split_fields(&lines, &["height"])?;
    let (hl, hv) = fields.require("height")?;
    let height = parse_usize(hl, hv, "height")?;
    let mut counts: Vec<Option<Vec<u32>>> = vec![None; height];
    let mut marked_lines = Vec::new();
    for (n, key, v) in rest {
        if let Some(rest) = key.strip_prefix("marked") {
            let j = indexed(n, rest.trim(), "level")?;
            marked_lines.push((n, j, v));
            continue;
        }
        let j = indexed(n, key, "level")?;
        if j >= height {
            return Err(syntax(n, format!("level {j} is not below the height {height}")));
        }
        if counts[j].replace(parse_list(n, v, "child count")?).is_some() {
            return Err(syntax(n, format!("repeated `level {j}:` line")));
        }
    }
    let counts = counts
        .into_iter()
        .enumerate()
        .map(|(j, c)| c.ok_or_else(|| FormatError::Invalid(format!("missing `level {j}:` line"))))
        .collect::<Result<Vec<_>, _>>()?;
    let tree = ExplicitTree::from_child_counts(counts).map_err(|e| FormatError::Invalid(e.to_string()))?;
    let mut marked = Vec::new();
    let mut seen_levels = std::collections::BTreeSet::new();
    for (n, j, v) in marked_lines {
        if !seen_levels.insert(j) {
            return Err(syntax(n, format!("repeated `marked level {j}:` line")));
        }
        for token in v.split_whitespace() {
            let t = Node::parse(token, false).map_err(|e| syntax(n, e.to_string()))?;
            if t.len() != j || !tree.contains(&t) {
                return Err(syntax(n, format!("node {t} is not on level {j} of the tree")));
            }
            marked.push(t);
        }
    }
    MarkedTree::new(tree, marked).map_err(|e| FormatError::Invalid(e.to_string()))
}

// ---------------------------------------------------------------- dhl-coloring

pub fn emit_coloring(c: &Coloring) -> String {
    let mut out = String::from("dhl-coloring v1\n");
    let _ = writeln!(out, "trees: {}", join(c.branching().as_slice()));
    let _ = writeln!(out, "height: {}", c.height());
    let _ = writeln!(out, "colors: {}", c.colors());
    for m in 0..c.height() {
        let _ = writeln!(out, "level {m}: {}", join(c.level_colors(m)));
    }
    out
}

/// Colors are listed per level in lex order of the elements `(n1, …, nd)`.
pub fn parse_coloring(text: &str) -> Result<Coloring, FormatError> {
    let lines = body(text, "dhl-coloring")?;
    let (mut fields, rest) = split_fields(&lines, &["trees", "height", "colors"])?;
    let (tl, tv) = fields.require("trees")?;
    let branching = branching_from(tl, tv)?;
    let (hl, hv) = fields.require("height")?;
    let height = parse_usize(hl, hv, "height")?;
    let (cl, cv) = fields.require("colors")?;
    let colors = parse_usize(cl, cv, "color count")?;
    let colors = u32::try_from(colors).map_err(|_| syntax(cl, "too many colors"))?;
    let mut levels: Vec<Option<Vec<u32>>> = vec![None; height];
    for (n, key, v) in rest {
        let m = indexed(n, key, "level")?;
        if m >= height {
            return Err(syntax(n, format!("level {m} is not below the height {height}")));
        }
        if levels[m].replace(parse_list(n, v, "color")?).is_some() {
            return Err(syntax(n, format!("repeated `level {m}:` line")));
        }
    }
    let levels = levels
        .into_iter()
        .enumerate()
        .map(|(m, l)| l.ok_or_else(|| FormatError::Invalid(format!("missing `level {m}:` line"))))
        .collect::<Result<Vec<_>, _>>()?;
    Coloring::from_levels(branching, colors, levels).map_err(|e| FormatError::Invalid(e.to_string()))
}

/// Elements of level `m` in file order.
pub fn level_elements(branching: &BranchingVector, m: usize) -> Vec<Vec<Node>> {
    let size: usize = branching.as_slice().iter().map(|&b| (b as usize).pow(m as u32)).product();
    (0..size).map(|i| element_at(branching, m, i)).collect()
}
