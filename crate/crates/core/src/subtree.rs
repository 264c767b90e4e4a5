//! Strong subtrees, vector strong subtrees, canonical isomorphisms and directed fans.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::tree::{Homogeneous, Node, Tree, TreeError};

/// A finite strong subtree: a level set plus the node set on each of its levels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrongSubtree {
    level_set: Vec<usize>,
    levels: Vec<Vec<Node>>,
}

impl StrongSubtree {
    /// Stores the data as given apart from sorting and deduplicating each level.
    /// No strong-subtree condition is checked; see [`validate_strong`].
    pub fn new(level_set: Vec<usize>, mut levels: Vec<Vec<Node>>) -> Self {
        for level in &mut levels {
            level.sort();
            level.dedup();
        }
        StrongSubtree { level_set, levels }
    }

    pub fn level_set(&self) -> &[usize] {
        &self.level_set
    }

    pub fn levels(&self) -> &[Vec<Node>] {
        &self.levels
    }

    pub fn level(&self, j: usize) -> &[Node] {
        &self.levels[j]
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn root(&self) -> Option<&Node> {
        self.levels.first().and_then(|l| l.first())
    }

    pub fn contains(&self, t: &Node) -> bool {
        self.levels.iter().any(|l| l.binary_search(t).is_ok())
    }

    /// Index `j` with `t ∈ S(j)` and the position of `t` inside `S(j)`.
    pub fn locate(&self, t: &Node) -> Option<(usize, usize)> {
        let j = self.level_set.iter().position(|&l| l == t.len())?;
        let i = self.levels.get(j)?.binary_search(t).ok()?;
        Some((j, i))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.levels.iter().flatten()
    }

    /// The first `h` levels.
    pub fn truncate(&self, h: usize) -> StrongSubtree {
        StrongSubtree {
            level_set: self.level_set[..h.min(self.level_set.len())].to_vec(),
            levels: self.levels[..h.min(self.levels.len())].to_vec(),
        }
    }

    /// Branching number of a subtree shaped like `b^<h`: `|S(j)| = b^j` for all `j`.
    /// Height-1 subtrees return `Ok(None)`.
    pub fn homogeneous_branching(&self) -> Result<Option<u32>, SubtreeError> {
        if self.levels.first().map(Vec::len) != Some(1) {
            return Err(SubtreeError::NotHomogeneous);
        }
        if self.levels.len() < 2 {
            return Ok(None);
        }
        let b = self.levels[1].len();
        let mut expected = 1usize;
        for level in &self.levels {
            if level.len() != expected {
                return Err(SubtreeError::NotHomogeneous);
            }
            expected = expected.checked_mul(b).ok_or(SubtreeError::NotHomogeneous)?;
        }
        u32::try_from(b).map(Some).map_err(|_| SubtreeError::NotHomogeneous)
    }

    fn branching_or(&self, fallback: u32) -> Result<u32, SubtreeError> {
        Ok(self.homogeneous_branching()?.unwrap_or(fallback))
    }
}

/// One strong subtree per coordinate, all sharing a level set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorStrongSubtree {
    coords: Vec<StrongSubtree>,
}

impl VectorStrongSubtree {
    pub fn new(coords: Vec<StrongSubtree>) -> Result<Self, SubtreeError> {
        let Some(first) = coords.first() else {
            return Err(SubtreeError::Empty);
        };
        if coords.iter().any(|c| c.level_set != first.level_set || c.height() != first.height()) {
            return Err(SubtreeError::LevelSetMismatch);
        }
        Ok(VectorStrongSubtree { coords })
    }

    pub fn single(s: StrongSubtree) -> Self {
        VectorStrongSubtree { coords: alloc::vec![s] }
    }

    pub fn coords(&self) -> &[StrongSubtree] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn level_set(&self) -> &[usize] {
        &self.coords[0].level_set
    }

    pub fn height(&self) -> usize {
        self.coords[0].height()
    }

    pub fn root(&self) -> Vec<Node> {
        self.coords.iter().map(|c| c.levels[0][0].clone()).collect()
    }

    /// `⊗S(j)` in lex order, coordinate 0 most significant.
    pub fn level_product(&self, j: usize) -> Vec<Vec<Node>> {
        product(&self.coords.iter().map(|c| c.level(j)).collect::<Vec<_>>())
    }

    pub fn truncate(&self, h: usize) -> VectorStrongSubtree {
        VectorStrongSubtree { coords: self.coords.iter().map(|c| c.truncate(h)).collect() }
    }

    /// Whether every element of the level product is accepted by `contains`.
    pub fn level_product_within(&self, mut contains: impl FnMut(&[Node]) -> bool) -> bool {
        (0..self.height()).all(|j| self.level_product(j).iter().all(|e| contains(e)))
    }
}

/// Cartesian product of node lists in lex order with the first list most significant.
pub fn product(lists: &[&[Node]]) -> Vec<Vec<Node>> {
    let mut out: Vec<Vec<Node>> = alloc::vec![Vec::new()];
    for list in lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for t in list.iter() {
                let mut e = prefix.clone();
                e.push(t.clone());
                next.push(e);
            }
        }
        out = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubtreeError {
    Empty,
    LevelSetMismatch,
    NotHomogeneous,
    BranchingMismatch { domain: u32, codomain: u32 },
    HeightMismatch { domain: usize, codomain: usize },
    DirectionOutOfRange { direction: u32, branching: u32 },
    HeightTooSmall(usize),
    NotInSubtree(Node),
    NotAtCommonLevel,
    NotAStrongSubtreeOf,
    StageMismatch(usize),
    WordLength { expected: usize, found: usize },
    Tree(TreeError),
}

impl fmt::Display for SubtreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubtreeError::Empty => f.write_str("vector subtree has no coordinates"),
            SubtreeError::LevelSetMismatch => f.write_str("coordinates do not share a level set"),
            SubtreeError::NotHomogeneous => f.write_str("subtree is not shaped like a homogeneous tree"),
            SubtreeError::BranchingMismatch { domain, codomain } => {
                write!(f, "branching {domain} does not match branching {codomain}")
            }
            SubtreeError::HeightMismatch { domain, codomain } => {
                write!(f, "height {domain} does not match height {codomain}")
            }
            SubtreeError::DirectionOutOfRange { direction, branching } => {
                write!(f, "direction {direction} is not below branching {branching}")
            }
            SubtreeError::HeightTooSmall(h) => write!(f, "operation needs height at least 2, got {h}"),
            SubtreeError::NotInSubtree(t) => write!(f, "node {t} is not in the subtree"),
            SubtreeError::NotAtCommonLevel => f.write_str("nodes do not share a level"),
            SubtreeError::NotAStrongSubtreeOf => f.write_str("subtree is not a strong subtree of the enclosing one"),
            SubtreeError::StageMismatch(n) => write!(f, "stage {n} does not start at the 0-cone of the previous one"),
            SubtreeError::WordLength { expected, found } => {
                write!(f, "word has length {found}, expected at most {expected}")
            }
            SubtreeError::Tree(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SubtreeError {}

impl From<TreeError> for SubtreeError {
    fn from(e: TreeError) -> Self {
        SubtreeError::Tree(e)
    }
}

/// A failed strong-subtree condition together with the offending data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// (a) the lowest level must be a single node.
    RootCount { found: usize },
    /// (b) the level set must be strictly increasing.
    LevelSetNotIncreasing,
    /// (b) one node list per level of the level set.
    LevelCount { level_set: usize, levels: usize },
    /// (b) a level beyond the host's height.
    LevelOutOfHost { level: usize },
    /// (b) a node that is not in the host level it is listed at.
    NodeNotInLevel { node: Node, level: usize },
    /// (b) a node with no predecessor in the previous subtree level.
    Orphan { node: Node },
    /// (c) an immediate successor of `node` with nothing above it.
    MissingDirection { node: Node, direction: u32 },
    /// (c) an immediate successor of `node` with more than one node above it.
    RepeatedDirection { node: Node, direction: u32, count: usize },
}

impl Violation {
    /// The condition letter: `'a'`, `'b'` or `'c'`.
    pub fn condition(&self) -> char {
        match self {
            Violation::RootCount { .. } => 'a',
            Violation::MissingDirection { .. } | Violation::RepeatedDirection { .. } => 'c',
            _ => 'b',
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) ", self.condition())?;
        match self {
            Violation::RootCount { found } => write!(f, "lowest level has {found} nodes, expected 1"),
            Violation::LevelSetNotIncreasing => f.write_str("level set is not strictly increasing"),
            Violation::LevelCount { level_set, levels } => {
                write!(f, "level set has {level_set} entries but {levels} node lists are given")
            }
            Violation::LevelOutOfHost { level } => write!(f, "level {level} is outside the host"),
            Violation::NodeNotInLevel { node, level } => write!(f, "node {node} is not in host level {level}"),
            Violation::Orphan { node } => write!(f, "node {node} extends no node of the previous level"),
            Violation::MissingDirection { node, direction } => {
                write!(f, "no node above immediate successor {direction} of {node}")
            }
            Violation::RepeatedDirection { node, direction, count } => {
                write!(f, "{count} nodes above immediate successor {direction} of {node}")
            }
        }
    }
}

/// Checks the three strong-subtree conditions against `host`, reporting every violation.
pub fn validate_strong<T: Tree + ?Sized>(host: &T, s: &StrongSubtree) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let k = s.level_set.len();
    if s.levels.len() != k {
        out.push(Violation::LevelCount { level_set: k, levels: s.levels.len() });
    }
    let found = s.levels.first().map_or(0, Vec::len);
    if found != 1 {
        out.push(Violation::RootCount { found });
    }
    if s.level_set.windows(2).any(|w| w[0] >= w[1]) {
        out.push(Violation::LevelSetNotIncreasing);
    }
    let mut structurally_ok = out.is_empty();
    for (j, nodes) in s.levels.iter().enumerate().take(k) {
        let level = s.level_set[j];
        if tree_level_missing(host, level) {
            out.push(Violation::LevelOutOfHost { level });
            structurally_ok = false;
            continue;
        }
        for t in nodes {
            if t.len() != level || !host.contains(t) {
                out.push(Violation::NodeNotInLevel { node: t.clone(), level });
                structurally_ok = false;
            }
        }
    }
    if !structurally_ok {
        return Err(out);
    }
    for j in 0..k.saturating_sub(1) {
        let lower = &s.levels[j];
        let upper = &s.levels[j + 1];
        for t in upper {
            if !lower.iter().any(|s| s.is_prefix_of(t)) {
                out.push(Violation::Orphan { node: t.clone() });
            }
        }
        for t in lower {
            let b = host.branching_at(t).unwrap_or(0);
            for p in 0..b {
                let count = crate::tree::count_with_prefix(upper, &t.child(p));
                if count == 0 {
                    out.push(Violation::MissingDirection { node: t.clone(), direction: p });
                } else if count > 1 {
                    out.push(Violation::RepeatedDirection { node: t.clone(), direction: p, count });
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn tree_level_missing<T: Tree + ?Sized>(host: &T, level: usize) -> bool {
    host.check_level(level).is_err()
}

/// Validates each coordinate against its host and the shared level set.
pub fn validate_vector<T: Tree>(hosts: &[T], s: &VectorStrongSubtree) -> Result<(), Vec<(usize, Violation)>> {
    let mut out = Vec::new();
    if hosts.len() != s.dim() {
        out.push((0, Violation::LevelCount { level_set: hosts.len(), levels: s.dim() }));
        return Err(out);
    }
    for (i, (host, c)) in hosts.iter().zip(&s.coords).enumerate() {
        if let Err(v) = validate_strong(host, c) {
            out.extend(v.into_iter().map(|v| (i, v)));
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// The level-, prefix- and lex-preserving bijection between two subtrees shaped like `b^<h`.
///
/// Both sides list level `j+1` as the concatenation of the direction blocks of
/// level `j`, so the map sends the `i`-th node of `A(j)` to the `i`-th node of `B(j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalMap {
    domain: StrongSubtree,
    codomain: StrongSubtree,
}

pub fn canonical_isomorphism(a: &StrongSubtree, b: &StrongSubtree) -> Result<CanonicalMap, SubtreeError> {
    if a.height() != b.height() {
        return Err(SubtreeError::HeightMismatch { domain: a.height(), codomain: b.height() });
    }
    let ba = a.homogeneous_branching()?;
    let bb = b.homogeneous_branching()?;
    if let (Some(x), Some(y)) = (ba, bb) {
        if x != y {
            return Err(SubtreeError::BranchingMismatch { domain: x, codomain: y });
        }
    }
    Ok(CanonicalMap { domain: a.clone(), codomain: b.clone() })
}

impl CanonicalMap {
    pub fn domain(&self) -> &StrongSubtree {
        &self.domain
    }

    pub fn codomain(&self) -> &StrongSubtree {
        &self.codomain
    }

    pub fn apply(&self, t: &Node) -> Option<Node> {
        let (j, i) = self.domain.locate(t)?;
        Some(self.codomain.levels[j][i].clone())
    }

    pub fn inverse(&self) -> CanonicalMap {
        CanonicalMap { domain: self.codomain.clone(), codomain: self.domain.clone() }
    }

    /// `next ∘ self`; requires `next` to start where `self` ends.
    pub fn then(&self, next: &CanonicalMap) -> Result<CanonicalMap, SubtreeError> {
        if self.codomain != next.domain {
            return Err(SubtreeError::NotAStrongSubtreeOf);
        }
        Ok(CanonicalMap { domain: self.domain.clone(), codomain: next.codomain.clone() })
    }

    /// All `(node, image)` pairs in the domain's level-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (&Node, &Node)> {
        self.domain.nodes().zip(self.codomain.nodes())
    }
}

/// `Z[p]`: the nodes of `Z` above the `p`-th immediate successor of its root.
pub fn subtree_at_direction(z: &StrongSubtree, p: u32) -> Result<StrongSubtree, SubtreeError> {
    if z.height() < 2 {
        return Err(SubtreeError::HeightTooSmall(z.height()));
    }
    let b = z.branching_or(0)?;
    if p >= b {
        return Err(SubtreeError::DirectionOutOfRange { direction: p, branching: b });
    }
    let mut levels = Vec::with_capacity(z.height() - 1);
    let mut block = 1usize;
    for j in 0..z.height() - 1 {
        let lo = p as usize * block;
        levels.push(z.levels[j + 1][lo..lo + block].to_vec());
        block *= b as usize;
    }
    Ok(StrongSubtree { level_set: z.level_set[1..].to_vec(), levels })
}

/// Vector form of [`subtree_at_direction`] with one direction per coordinate.
pub fn vector_at_direction(z: &VectorStrongSubtree, p: &[u32]) -> Result<VectorStrongSubtree, SubtreeError> {
    if p.len() != z.dim() {
        return Err(SubtreeError::WordLength { expected: z.dim(), found: p.len() });
    }
    let coords = z.coords.iter().zip(p).map(|(c, &q)| subtree_at_direction(c, q)).collect::<Result<_, _>>()?;
    Ok(VectorStrongSubtree { coords })
}

/// The `(z, Z)`-directed fan: the root of `Z` and the images of `z ∈ Z[0]` in every `Z[p]`.
pub fn directed_fan(z_node: &Node, z: &StrongSubtree) -> Result<StrongSubtree, SubtreeError> {
    if z.height() < 2 {
        return Err(SubtreeError::HeightTooSmall(z.height()));
    }
    let b = z.branching_or(0)? as usize;
    let (level, idx) = z.locate(z_node).ok_or_else(|| SubtreeError::NotInSubtree(z_node.clone()))?;
    if level == 0 {
        return Err(SubtreeError::NotInSubtree(z_node.clone()));
    }
    let block = b.pow(level as u32 - 1);
    if idx >= block {
        return Err(SubtreeError::NotInSubtree(z_node.clone()));
    }
    let top = (0..b).map(|p| z.levels[level][idx + p * block].clone()).collect();
    Ok(StrongSubtree {
        level_set: alloc::vec![z.level_set[0], z.level_set[level]],
        levels: alloc::vec![z.levels[0].clone(), top],
    })
}

/// The `(r, R)`-directed vector fan; `r` must lie in `⊗R[0̄]`.
pub fn directed_vector_fan(r: &[Node], z: &VectorStrongSubtree) -> Result<VectorStrongSubtree, SubtreeError> {
    if r.len() != z.dim() {
        return Err(SubtreeError::WordLength { expected: z.dim(), found: r.len() });
    }
    if r.iter().any(|t| t.len() != r[0].len()) {
        return Err(SubtreeError::NotAtCommonLevel);
    }
    let coords = r.iter().zip(&z.coords).map(|(t, c)| directed_fan(t, c)).collect::<Result<_, _>>()?;
    Ok(VectorStrongSubtree { coords })
}

/// Rewrites the nodes of `inner ⊆ outer` as words of `b^<h`, where `outer` is shaped like `b^<h`.
pub fn pull_back(outer: &StrongSubtree, inner: &StrongSubtree) -> Result<StrongSubtree, SubtreeError> {
    let b = outer.branching_or(2)?;
    let mut level_set = Vec::with_capacity(inner.height());
    let mut levels = Vec::with_capacity(inner.height());
    for (&l, nodes) in inner.level_set.iter().zip(&inner.levels) {
        let j = outer.level_set.iter().position(|&x| x == l);
        let Some(j) = j else {
            return Err(nodes.first().map_or(SubtreeError::NotAStrongSubtreeOf, |t| SubtreeError::NotInSubtree(t.clone())));
        };
        level_set.push(j);
        let mut words = Vec::with_capacity(nodes.len());
        for t in nodes {
            let i = outer.levels[j].binary_search(t).map_err(|_| SubtreeError::NotInSubtree(t.clone()))?;
            words.push(Node::from_rank(i, b, j));
        }
        levels.push(words);
    }
    Ok(StrongSubtree::new(level_set, levels))
}

/// Inverse of [`pull_back`]: sends words of `b^<h` to the corresponding nodes of `outer`.
pub fn push_forward(outer: &StrongSubtree, words: &StrongSubtree) -> Result<StrongSubtree, SubtreeError> {
    let b = outer.branching_or(2)?;
    let mut level_set = Vec::with_capacity(words.height());
    let mut levels = Vec::with_capacity(words.height());
    for (&j, ws) in words.level_set.iter().zip(&words.levels) {
        let level = outer.levels.get(j).ok_or(SubtreeError::NotAStrongSubtreeOf)?;
        level_set.push(outer.level_set[j]);
        let mut nodes = Vec::with_capacity(ws.len());
        for w in ws {
            nodes.push(level.get(w.rank(b)).ok_or_else(|| SubtreeError::NotInSubtree(w.clone()))?.clone());
        }
        levels.push(nodes);
    }
    Ok(StrongSubtree::new(level_set, levels))
}

/// Whether `inner` is a strong subtree of the strong subtree `outer` (with `outer`'s own tree order).
pub fn is_strong_subtree_of(outer: &StrongSubtree, inner: &StrongSubtree) -> bool {
    let Ok(b) = outer.branching_or(2) else { return false };
    let Ok(words) = pull_back(outer, inner) else { return false };
    let Ok(word_host) = Homogeneous::truncated(b, outer.height()) else { return false };
    validate_strong(&word_host, &words).is_ok()
}

pub fn is_vector_strong_subtree_of(outer: &VectorStrongSubtree, inner: &VectorStrongSubtree) -> bool {
    outer.dim() == inner.dim() && outer.coords.iter().zip(&inner.coords).all(|(o, i)| is_strong_subtree_of(o, i))
}

/// The initial tree `b^<h` as a strong subtree of itself.
pub fn initial_tree(b: u32, h: usize) -> StrongSubtree {
    let host = Homogeneous::new(b).expect("branching at least 2");
    let levels = (0..h).map(|j| host.level_nodes(j).expect("unbounded host")).collect();
    StrongSubtree { level_set: (0..h).collect(), levels }
}

/// Samples a strong subtree of `b^<n` of height `k`; `choose(m)` must return an index below `m`.
pub fn sample_strong(b: u32, n: usize, k: usize, mut choose: impl FnMut(usize) -> usize) -> StrongSubtree {
    assert!(k >= 1 && k <= n, "need 1 <= k <= n");
    // pick a k-subset of 0..n uniformly-ish by sequential selection
    let mut level_set = Vec::with_capacity(k);
    let mut next = 0;
    for j in 0..k {
        let slack = n - next - (k - j);
        let l = next + choose(slack + 1);
        level_set.push(l);
        next = l + 1;
    }
    let host = Homogeneous::new(b).expect("branching at least 2");
    let root_choices = host.level_nodes(level_set[0]).expect("unbounded host");
    let mut levels = alloc::vec![alloc::vec![root_choices[choose(root_choices.len())].clone()]];
    for j in 1..k {
        let mut level = Vec::new();
        for t in &levels[j - 1] {
            for p in 0..b {
                let cands = host.successors_in_level(&t.child(p), level_set[j]).expect("unbounded host");
                level.push(cands[choose(cands.len())].clone());
            }
        }
        levels.push(level);
    }
    StrongSubtree { level_set, levels }
}

/// Stage data for the embedding family: `s[0] = S_0` and `r[n] ⊆ S_n` with `S_{n+1} = R_n[0̄]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stages {
    s0: VectorStrongSubtree,
    r: Vec<VectorStrongSubtree>,
}

impl Stages {
    /// Checks that each `R_n` is a vector strong subtree of `S_n` and that `S_{n+1} = R_n[0̄]`.
    pub fn new(s0: VectorStrongSubtree, r: Vec<VectorStrongSubtree>) -> Result<Self, SubtreeError> {
        let mut s = s0.clone();
        for (n, rn) in r.iter().enumerate() {
            if !is_vector_strong_subtree_of(&s, rn) {
                return Err(SubtreeError::StageMismatch(n));
            }
            if rn.height() < 2 {
                return Err(SubtreeError::HeightTooSmall(rn.height()));
            }
            s = vector_at_direction(rn, &alloc::vec![0; rn.dim()])?;
        }
        Ok(Stages { s0, r })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `S_n` for `n <= len()`.
    pub fn s(&self, n: usize) -> VectorStrongSubtree {
        if n == 0 {
            self.s0.clone()
        } else {
            let r = &self.r[n - 1];
            vector_at_direction(r, &alloc::vec![0; r.dim()]).expect("checked in new")
        }
    }

    pub fn r(&self, n: usize) -> &VectorStrongSubtree {
        &self.r[n]
    }

    /// `CI(R_n[0̄], R_n[p])` per coordinate.
    pub fn step_maps(&self, n: usize, p: &[u32]) -> Result<Vec<CanonicalMap>, SubtreeError> {
        let r = &self.r[n];
        let zero = vector_at_direction(r, &alloc::vec![0; r.dim()])?;
        let target = vector_at_direction(r, p)?;
        zero.coords.iter().zip(&target.coords).map(|(a, b)| canonical_isomorphism(a, b)).collect()
    }

    /// `H_u` as a per-coordinate table on `⊗S_n` where `n = |u|`, built forward from the identity on `S_0`.
    pub fn embedding(&self, word: &[Vec<u32>]) -> Result<Embedding, SubtreeError> {
        if word.len() > self.r.len() {
            return Err(SubtreeError::WordLength { expected: self.r.len(), found: word.len() });
        }
        let mut maps: Vec<BTreeMap<Node, Node>> =
            self.s0.coords.iter().map(|c| c.nodes().map(|t| (t.clone(), t.clone())).collect()).collect();
        for (n, p) in word.iter().enumerate() {
            let steps = self.step_maps(n, p)?;
            maps = maps
                .iter()
                .zip(&steps)
                .map(|(h, ci)| ci.pairs().map(|(s, img)| (s.clone(), h[img].clone())).collect())
                .collect();
        }
        Ok(Embedding { maps })
    }

    /// `H_u(s)` computed by applying `CI(R_m[0̄], R_m[u_m])` for `m = |u|-1` down to `0`.
    pub fn apply_word(&self, word: &[Vec<u32>], s: &[Node]) -> Result<Vec<Node>, SubtreeError> {
        if word.len() > self.r.len() {
            return Err(SubtreeError::WordLength { expected: self.r.len(), found: word.len() });
        }
        let mut cur = s.to_vec();
        for (m, p) in word.iter().enumerate().rev() {
            let steps = self.step_maps(m, p)?;
            for (t, ci) in cur.iter_mut().zip(&steps) {
                *t = ci.apply(t).ok_or_else(|| SubtreeError::NotInSubtree(t.clone()))?;
            }
        }
        Ok(cur)
    }
}

/// The vector canonical embedding `H_u`, stored coordinate-wise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    maps: Vec<BTreeMap<Node, Node>>,
}

impl Embedding {
    pub fn apply(&self, s: &[Node]) -> Option<Vec<Node>> {
        s.iter().zip(&self.maps).map(|(t, m)| m.get(t).cloned()).collect()
    }

    pub fn coordinate(&self, i: usize) -> &BTreeMap<Node, Node> {
        &self.maps[i]
    }

    /// The image of `S_n` as a vector subtree.
    pub fn image(&self, domain: &VectorStrongSubtree) -> VectorStrongSubtree {
        let coords = domain
            .coords
            .iter()
            .zip(&self.maps)
            .map(|(c, m)| {
                StrongSubtree::new(
                    c.level_set.clone(),
                    c.levels.iter().map(|l| l.iter().map(|t| m[t].clone()).collect()).collect(),
                )
            })
            .collect();
        VectorStrongSubtree { coords }
    }
}

/// All words of length `n` over direction tuples `⊗b`, in lex order.
pub fn direction_words(branching: &[u32], n: usize) -> Vec<Vec<Vec<u32>>> {
    let letters: Vec<Vec<u32>> = branching.iter().fold(alloc::vec![Vec::new()], |acc, &b| {
        acc.into_iter()
            .flat_map(|prefix| {
                (0..b).map(move |p| {
                    let mut v = prefix.clone();
                    v.push(p);
                    v
                })
            })
            .collect()
    });
    let mut words = alloc::vec![Vec::new()];
    for _ in 0..n {
        words = words
            .into_iter()
            .flat_map(|w: Vec<Vec<u32>>| {
                letters.iter().map(move |l| {
                    let mut v = w.clone();
                    v.push(l.clone());
                    v
                })
            })
            .collect();
    }
    words
}
