//! Nodes, levels and densities for homogeneous trees `b^<N` and explicit finite trees.
//!
//! A node is the sequence of child indices on the path from the root. Within a
//! level, the derived `Ord` on [`Node`] is the lexicographical order; across
//! levels a proper prefix sorts before its extensions.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::rational::Rational;

/// A vertex addressed by its digit path; the empty path is the root.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Node(Vec<u32>);

impl Node {
    pub fn root() -> Self {
        Node(Vec::new())
    }

    pub fn from_digits(digits: Vec<u32>) -> Self {
        Node(digits)
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    /// Length of the node, i.e. its level in `b^<N`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` with `p` appended.
    pub fn child(&self, p: u32) -> Node {
        let mut digits = Vec::with_capacity(self.0.len() + 1);
        digits.extend_from_slice(&self.0);
        digits.push(p);
        Node(digits)
    }

    pub fn parent(&self) -> Option<Node> {
        let (_, init) = self.0.split_last()?;
        Some(Node(init.to_vec()))
    }

    /// `self ⊑ other` (end-extension, reflexive).
    pub fn is_prefix_of(&self, other: &Node) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn prefix(&self, len: usize) -> Node {
        Node(self.0[..len.min(self.0.len())].to_vec())
    }

    /// Base-`b` value of the digits: the lex rank of the node inside `b^len`.
    pub fn rank(&self, b: u32) -> usize {
        self.0.iter().fold(0usize, |acc, &d| acc * b as usize + d as usize)
    }

    /// Inverse of [`Node::rank`].
    pub fn from_rank(mut rank: usize, b: u32, len: usize) -> Node {
        let mut digits = alloc::vec![0u32; len];
        for slot in digits.iter_mut().rev() {
            *slot = (rank % b as usize) as u32;
            rank /= b as usize;
        }
        Node(digits)
    }

    /// Parses `@`, comma-separated decimals (`0,3,1`), or, when `compact` is
    /// set, a bare digit string (`031`).
    pub fn parse(text: &str, compact: bool) -> Result<Node, ParseNodeError> {
        let err = || ParseNodeError { input: String::from(text) };
        let text = text.trim();
        if text == "@" {
            return Ok(Node::root());
        }
        if text.is_empty() {
            return Err(err());
        }
        if text.contains(',') || !compact {
            let mut digits = Vec::new();
            for part in text.split(',') {
                if part.is_empty() || !part.bytes().all(|c| c.is_ascii_digit()) {
                    return Err(err());
                }
                digits.push(part.parse::<u32>().map_err(|_| err())?);
            }
            return Ok(Node(digits));
        }
        text.bytes()
            .map(|c| if c.is_ascii_digit() { Ok((c - b'0') as u32) } else { Err(err()) })
            .collect::<Result<Vec<_>, _>>()
            .map(Node)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("@");
        }
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl From<&[u32]> for Node {
    fn from(d: &[u32]) -> Self {
        Node(d.to_vec())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseNodeError {
    pub input: String,
}

impl fmt::Display for ParseNodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` is not a node (expected `@`, `0,3,1` or a digit string)", self.input)
    }
}

impl core::error::Error for ParseNodeError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeError {
    LevelOutOfRange { level: usize, height: usize },
    NodeNotInTree(Node),
    NodeAboveLevel { node: Node, level: usize },
    DirectionOutOfRange { node: Node, direction: u32, branching: u32 },
    BranchingTooSmall(u32),
    EmptyBranchingVector,
    Overflow,
    Malformed(String),
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::LevelOutOfRange { level, height } => {
                write!(f, "level {level} is outside a tree of height {height}")
            }
            TreeError::NodeNotInTree(t) => write!(f, "node {t} is not in the tree"),
            TreeError::NodeAboveLevel { node, level } => {
                write!(f, "node {node} has length {} > level {level}", node.len())
            }
            TreeError::DirectionOutOfRange { node, direction, branching } => {
                write!(f, "direction {direction} at node {node} exceeds branching {branching}")
            }
            TreeError::BranchingTooSmall(b) => write!(f, "branching number {b} is below 2"),
            TreeError::EmptyBranchingVector => f.write_str("branching vector is empty"),
            TreeError::Overflow => f.write_str("level size does not fit in 128 bits"),
            TreeError::Malformed(msg) => write!(f, "malformed tree: {msg}"),
        }
    }
}

impl core::error::Error for TreeError {}

/// Read access shared by the implicit and explicit trees.
pub trait Tree {
    /// Number of levels, `None` when unbounded.
    fn height(&self) -> Option<usize>;

    fn contains(&self, t: &Node) -> bool;

    /// Number of immediate successors of `t`.
    fn branching_at(&self, t: &Node) -> Result<u32, TreeError>;

    /// `|T(n)|`.
    fn level_size(&self, n: usize) -> Result<u128, TreeError>;

    /// `T(n)` in lex order.
    fn level_nodes(&self, n: usize) -> Result<Vec<Node>, TreeError>;

    /// `T(n) ∩ suc(t)` in lex order.
    fn successors_in_level(&self, t: &Node, n: usize) -> Result<Vec<Node>, TreeError>;

    /// `|T(n) ∩ suc(t)|`.
    fn successor_count(&self, t: &Node, n: usize) -> Result<u128, TreeError>;

    fn check_level(&self, n: usize) -> Result<(), TreeError> {
        match self.height() {
            Some(h) if n >= h => Err(TreeError::LevelOutOfRange { level: n, height: h }),
            _ => Ok(()),
        }
    }

    /// `t⌢p` for `p` below the branching at `t`.
    fn immediate_successor(&self, t: &Node, p: u32) -> Result<Node, TreeError> {
        let b = self.branching_at(t)?;
        if p >= b {
            return Err(TreeError::DirectionOutOfRange { node: t.clone(), direction: p, branching: b });
        }
        Ok(t.child(p))
    }
}

/// The tree `b^<N`, optionally truncated to `b^<height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Homogeneous {
    branching: u32,
    height: Option<usize>,
}

impl Homogeneous {
    pub fn new(branching: u32) -> Result<Self, TreeError> {
        if branching < 2 {
            return Err(TreeError::BranchingTooSmall(branching));
        }
        Ok(Homogeneous { branching, height: None })
    }

    pub fn truncated(branching: u32, height: usize) -> Result<Self, TreeError> {
        let mut t = Homogeneous::new(branching)?;
        t.height = Some(height);
        Ok(t)
    }

    pub fn branching(&self) -> u32 {
        self.branching
    }

    fn pow(&self, e: usize) -> Result<u128, TreeError> {
        (self.branching as u128).checked_pow(e as u32).ok_or(TreeError::Overflow)
    }
}

impl Tree for Homogeneous {
    fn height(&self) -> Option<usize> {
        self.height
    }

    fn contains(&self, t: &Node) -> bool {
        self.height.is_none_or(|h| t.len() < h) && t.digits().iter().all(|&d| d < self.branching)
    }

    fn branching_at(&self, t: &Node) -> Result<u32, TreeError> {
        if !self.contains(t) {
            return Err(TreeError::NodeNotInTree(t.clone()));
        }
        match self.height {
            Some(h) if t.len() + 1 == h => Ok(0),
            _ => Ok(self.branching),
        }
    }

    fn level_size(&self, n: usize) -> Result<u128, TreeError> {
        self.check_level(n)?;
        self.pow(n)
    }

    fn level_nodes(&self, n: usize) -> Result<Vec<Node>, TreeError> {
        self.successors_in_level(&Node::root(), n)
    }

    fn successors_in_level(&self, t: &Node, n: usize) -> Result<Vec<Node>, TreeError> {
        let count = self.successor_count(t, n)?;
        let gap = n - t.len();
        let count = usize::try_from(count).map_err(|_| TreeError::Overflow)?;
        let mut out = Vec::with_capacity(count);
        for r in 0..count {
            let tail = Node::from_rank(r, self.branching, gap);
            let mut digits = t.digits().to_vec();
            digits.extend_from_slice(tail.digits());
            out.push(Node::from_digits(digits));
        }
        Ok(out)
    }

    fn successor_count(&self, t: &Node, n: usize) -> Result<u128, TreeError> {
        self.check_level(n)?;
        if !self.contains(t) {
            return Err(TreeError::NodeNotInTree(t.clone()));
        }
        if t.len() > n {
            return Err(TreeError::NodeAboveLevel { node: t.clone(), level: n });
        }
        self.pow(n - t.len())
    }
}

/// A finite tree stored level by level; each node keeps its child count and
/// its children are `t⌢0, …, t⌢(c-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitTree {
    levels: Vec<Vec<(Node, u32)>>,
}

impl ExplicitTree {
    /// Builds a tree from per-level child counts listed in lex order of the
    /// level's nodes. The top level must be all zeros, every other count `>= 1`.
    pub fn from_child_counts(counts: Vec<Vec<u32>>) -> Result<Self, TreeError> {
        if counts.is_empty() {
            return Err(TreeError::Malformed("a tree needs at least one level".into()));
        }
        if counts[0].len() != 1 {
            return Err(TreeError::Malformed("level 0 must hold exactly the root".into()));
        }
        let height = counts.len();
        let mut levels: Vec<Vec<(Node, u32)>> = Vec::with_capacity(height);
        let mut current = alloc::vec![Node::root()];
        for (j, row) in counts.into_iter().enumerate() {
            if row.len() != current.len() {
                return Err(TreeError::Malformed(alloc::format!(
                    "level {j} lists {} counts for {} nodes",
                    row.len(),
                    current.len()
                )));
            }
            let top = j + 1 == height;
            if top && row.iter().any(|&c| c != 0) {
                return Err(TreeError::Malformed(alloc::format!("top level {j} must have zero child counts")));
            }
            if !top && row.contains(&0) {
                return Err(TreeError::Malformed(alloc::format!("level {j} has a node without children")));
            }
            let mut next = Vec::new();
            for (t, &c) in current.iter().zip(&row) {
                for p in 0..c {
                    next.push(t.child(p));
                }
            }
            levels.push(current.into_iter().zip(row).collect());
            current = next;
        }
        Ok(ExplicitTree { levels })
    }

    /// Builds a tree of the given height from a child-count rule.
    pub fn generate(height: usize, mut children: impl FnMut(&Node) -> u32) -> Result<Self, TreeError> {
        if height == 0 {
            return Err(TreeError::Malformed("a tree needs at least one level".into()));
        }
        let mut counts = Vec::with_capacity(height);
        let mut current = alloc::vec![Node::root()];
        for j in 0..height {
            let row: Vec<u32> = if j + 1 == height {
                alloc::vec![0; current.len()]
            } else {
                current.iter().map(&mut children).collect()
            };
            let mut next = Vec::new();
            for (t, &c) in current.iter().zip(&row) {
                for p in 0..c {
                    next.push(t.child(p));
                }
            }
            counts.push(row);
            current = next;
        }
        ExplicitTree::from_child_counts(counts)
    }

    pub fn child_counts(&self) -> Vec<Vec<u32>> {
        self.levels.iter().map(|l| l.iter().map(|(_, c)| *c).collect()).collect()
    }

    pub fn tree_height(&self) -> usize {
        self.levels.len()
    }

    fn find(&self, t: &Node) -> Option<&(Node, u32)> {
        let level = self.levels.get(t.len())?;
        level.binary_search_by(|(s, _)| s.cmp(t)).ok().map(|i| &level[i])
    }

    /// Index range of level `n` nodes extending `t`.
    fn successor_range(&self, t: &Node, n: usize) -> core::ops::Range<usize> {
        let level = &self.levels[n];
        let k = t.len();
        let lo = level.partition_point(|(s, _)| s.digits()[..k] < *t.digits());
        let hi = level.partition_point(|(s, _)| s.digits()[..k] <= *t.digits());
        lo..hi
    }

    /// Whether every node below level `up_to` has two incomparable successors.
    pub fn is_perfect_below(&self, up_to: usize) -> bool {
        (0..up_to.min(self.levels.len())).all(|j| {
            self.levels[j].iter().all(|(t, _)| self.has_split_above(t))
        })
    }

    fn has_split_above(&self, t: &Node) -> bool {
        // Incomparable successors exist iff some successor branches.
        (t.len()..self.levels.len().saturating_sub(1)).any(|j| {
            let range = self.successor_range(t, j);
            self.levels[j][range].iter().any(|(_, c)| *c >= 2)
        })
    }
}

impl Tree for ExplicitTree {
    fn height(&self) -> Option<usize> {
        Some(self.levels.len())
    }

    fn contains(&self, t: &Node) -> bool {
        self.find(t).is_some()
    }

    fn branching_at(&self, t: &Node) -> Result<u32, TreeError> {
        self.find(t).map(|(_, c)| *c).ok_or_else(|| TreeError::NodeNotInTree(t.clone()))
    }

    fn level_size(&self, n: usize) -> Result<u128, TreeError> {
        self.check_level(n)?;
        Ok(self.levels[n].len() as u128)
    }

    fn level_nodes(&self, n: usize) -> Result<Vec<Node>, TreeError> {
        self.check_level(n)?;
        Ok(self.levels[n].iter().map(|(t, _)| t.clone()).collect())
    }

    fn successors_in_level(&self, t: &Node, n: usize) -> Result<Vec<Node>, TreeError> {
        self.check_successor_query(t, n)?;
        let range = self.successor_range(t, n);
        Ok(self.levels[n][range].iter().map(|(s, _)| s.clone()).collect())
    }

    fn successor_count(&self, t: &Node, n: usize) -> Result<u128, TreeError> {
        self.check_successor_query(t, n)?;
        Ok(self.successor_range(t, n).len() as u128)
    }
}

impl ExplicitTree {
    fn check_successor_query(&self, t: &Node, n: usize) -> Result<(), TreeError> {
        self.check_level(n)?;
        if !self.contains(t) {
            return Err(TreeError::NodeNotInTree(t.clone()));
        }
        if t.len() > n {
            return Err(TreeError::NodeAboveLevel { node: t.clone(), level: n });
        }
        Ok(())
    }
}

/// Branching numbers `(b_1, …, b_d)` of a vector homogeneous tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BranchingVector(Vec<u32>);

impl BranchingVector {
    pub fn new(b: Vec<u32>) -> Result<Self, TreeError> {
        if b.is_empty() {
            return Err(TreeError::EmptyBranchingVector);
        }
        if let Some(&bad) = b.iter().find(|&&x| x < 2) {
            return Err(TreeError::BranchingTooSmall(bad));
        }
        Ok(BranchingVector(b))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `β = ∏ b_i`.
    pub fn product(&self) -> u128 {
        self.0.iter().map(|&b| b as u128).product()
    }

    /// One truncated homogeneous host per coordinate.
    pub fn hosts(&self, height: usize) -> Vec<Homogeneous> {
        self.0.iter().map(|&b| Homogeneous::truncated(b, height).expect("validated")).collect()
    }

    /// Whether every branching number is at most 10, so nodes may use the compact digit form.
    pub fn compact_digits(&self) -> bool {
        self.0.iter().all(|&b| b <= 10)
    }
}

/// A subset `F ⊆ T(n)`, sorted and duplicate free.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelSubset {
    level: usize,
    nodes: Vec<Node>,
}

impl LevelSubset {
    pub fn new<T: Tree + ?Sized>(tree: &T, level: usize, mut nodes: Vec<Node>) -> Result<Self, TreeError> {
        tree.check_level(level)?;
        nodes.sort();
        nodes.dedup();
        if let Some(bad) = nodes.iter().find(|t| t.len() != level || !tree.contains(t)) {
            return Err(TreeError::NodeNotInTree(bad.clone()));
        }
        Ok(LevelSubset { level, nodes })
    }

    /// Caller guarantees the nodes are sorted, distinct, and at `level`.
    pub fn from_sorted(level: usize, nodes: Vec<Node>) -> Self {
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(nodes.iter().all(|t| t.len() == level));
        LevelSubset { level, nodes }
    }

    pub fn full<T: Tree + ?Sized>(tree: &T, level: usize) -> Result<Self, TreeError> {
        Ok(LevelSubset { level, nodes: tree.level_nodes(level)? })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, t: &Node) -> bool {
        self.nodes.binary_search(t).is_ok()
    }

    /// `|F ∩ suc(t)|`.
    pub fn count_above(&self, t: &Node) -> usize {
        count_with_prefix(&self.nodes, t)
    }

    pub fn complement<T: Tree + ?Sized>(&self, tree: &T) -> Result<Self, TreeError> {
        let all = tree.level_nodes(self.level)?;
        Ok(LevelSubset { level: self.level, nodes: all.into_iter().filter(|t| !self.contains(t)).collect() })
    }

    /// `dens(F) = |F| / |T(n)|`.
    pub fn density<T: Tree + ?Sized>(&self, tree: &T) -> Result<Rational, TreeError> {
        density(tree, self)
    }
}

/// Number of nodes of a sorted same-length list that extend `prefix`.
pub fn count_with_prefix(sorted: &[Node], prefix: &Node) -> usize {
    let k = prefix.len();
    let lo = sorted.partition_point(|s| s.digits()[..k.min(s.len())] < *prefix.digits());
    let hi = sorted.partition_point(|s| s.digits()[..k.min(s.len())] <= *prefix.digits());
    hi - lo
}

/// `|F| / |T(n)|`.
pub fn density<T: Tree + ?Sized>(tree: &T, f: &LevelSubset) -> Result<Rational, TreeError> {
    let size = tree.level_size(f.level)?;
    Ok(Rational::from_counts(f.nodes.len() as u128, size))
}

/// `|F ∩ suc(t)| / |T(n) ∩ suc(t)|`.
pub fn relative_density<T: Tree + ?Sized>(tree: &T, f: &LevelSubset, t: &Node) -> Result<Rational, TreeError> {
    let total = tree.successor_count(t, f.level)?;
    Ok(Rational::from_counts(f.count_above(t) as u128, total))
}
