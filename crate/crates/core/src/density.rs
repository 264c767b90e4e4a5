//! Dense level selections, the majority set, strong correlation, selection
//! refinement along a stage, and level-density profiles of node sets.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::fans::{root_fans, FanError};
use crate::product::ProductSubset;
use crate::rational::Rational;
use crate::subtree::{
    canonical_isomorphism, direction_words, initial_tree, is_vector_strong_subtree_of, vector_at_direction,
    StrongSubtree, SubtreeError, VectorStrongSubtree,
};
use crate::tree::{count_with_prefix, Homogeneous, LevelSubset, Node, Tree, TreeError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensityError {
    Malformed(String),
    WrongLevel { node: Node, expected: usize },
    NotASubtree,
    Subtree(SubtreeError),
    Fan(FanError),
    Tree(TreeError),
}

impl fmt::Display for DensityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityError::Malformed(m) => write!(f, "malformed selection: {m}"),
            DensityError::WrongLevel { node, expected } => {
                write!(f, "node {node} is not at target level {expected}")
            }
            DensityError::NotASubtree => f.write_str("subtree is not a vector strong subtree of the selection's source"),
            DensityError::Subtree(e) => write!(f, "{e}"),
            DensityError::Fan(e) => write!(f, "{e}"),
            DensityError::Tree(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DensityError {}

impl From<SubtreeError> for DensityError {
    fn from(e: SubtreeError) -> Self {
        DensityError::Subtree(e)
    }
}

impl From<FanError> for DensityError {
    fn from(e: FanError) -> Self {
        DensityError::Fan(e)
    }
}

impl From<TreeError> for DensityError {
    fn from(e: TreeError) -> Self {
        DensityError::Tree(e)
    }
}

/// Assigns to every element of `⊗source(j)` a subset of level `l_j` of the target tree `b_W^<N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSelection {
    source: VectorStrongSubtree,
    target_branching: u32,
    target_levels: Vec<usize>,
    sections: BTreeMap<Vec<Node>, Vec<Node>>,
}

impl LevelSelection {
    /// Elements missing from `sections` get the empty section.
    pub fn new(
        source: VectorStrongSubtree,
        target_branching: u32,
        target_levels: Vec<usize>,
        sections: BTreeMap<Vec<Node>, Vec<Node>>,
    ) -> Result<Self, DensityError> {
        if target_branching < 2 {
            return Err(TreeError::BranchingTooSmall(target_branching).into());
        }
        if target_levels.len() != source.height() {
            return Err(DensityError::Malformed(alloc::format!(
                "{} target levels for a source of height {}",
                target_levels.len(),
                source.height()
            )));
        }
        if target_levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DensityError::Malformed("target levels are not strictly increasing".into()));
        }
        let mut full = BTreeMap::new();
        for j in 0..source.height() {
            for e in source.level_product(j) {
                full.insert(e, Vec::new());
            }
        }
        for (e, mut nodes) in sections {
            let Some(slot) = full.get_mut(&e) else {
                return Err(DensityError::Malformed(alloc::format!("{e:?} is not a source element")));
            };
            let j = source.level_set().iter().position(|&l| l == e[0].len()).expect("source element");
            let l = target_levels[j];
            if let Some(bad) = nodes.iter().find(|w| w.len() != l || w.digits().iter().any(|&d| d >= target_branching)) {
                return Err(DensityError::WrongLevel { node: bad.clone(), expected: l });
            }
            nodes.sort();
            nodes.dedup();
            *slot = nodes;
        }
        Ok(LevelSelection { source, target_branching, target_levels, sections: full })
    }

    pub fn source(&self) -> &VectorStrongSubtree {
        &self.source
    }

    pub fn target_branching(&self) -> u32 {
        self.target_branching
    }

    pub fn target_levels(&self) -> &[usize] {
        &self.target_levels
    }

    pub fn sections(&self) -> &BTreeMap<Vec<Node>, Vec<Node>> {
        &self.sections
    }

    pub fn target_tree(&self) -> Homogeneous {
        Homogeneous::new(self.target_branching).expect("checked in new")
    }

    /// `D(e)`; empty for elements outside the source.
    pub fn section(&self, e: &[Node]) -> &[Node] {
        self.sections.get(e).map_or(&[], Vec::as_slice)
    }

    /// Source level index of an element.
    pub fn source_level_of(&self, e: &[Node]) -> Option<usize> {
        let l = e.first()?.len();
        self.source.level_set().iter().position(|&x| x == l)
    }

    /// Target level of the elements at host level `host_level` of the source.
    pub fn target_level_for(&self, host_level: usize) -> Option<usize> {
        let j = self.source.level_set().iter().position(|&x| x == host_level)?;
        Some(self.target_levels[j])
    }

    pub fn section_density(&self, e: &[Node]) -> Option<Rational> {
        let j = self.source_level_of(e)?;
        let size = (self.target_branching as u128).checked_pow(self.target_levels[j] as u32)?;
        Some(Rational::from_counts(self.section(e).len() as u128, size))
    }

    /// Whether every section has density at least `eps`.
    pub fn is_dense(&self, eps: &Rational) -> bool {
        self.sections.keys().all(|e| self.section_density(e).is_some_and(|d| &d >= eps))
    }
}

/// `D(t) = {w : (t, w) ∈ D}` where coordinate `target` of `D` plays the role of `W`.
pub fn section_selection(d: &ProductSubset, target: usize) -> Result<LevelSelection, DensityError> {
    let b = d.branching().as_slice();
    if b.len() < 2 || target >= b.len() {
        return Err(DensityError::Malformed("need at least one source coordinate besides the target".into()));
    }
    let n = d.height();
    let coords: Vec<StrongSubtree> =
        b.iter().enumerate().filter(|&(i, _)| i != target).map(|(_, &bi)| initial_tree(bi, n)).collect();
    let source = VectorStrongSubtree::new(coords)?;
    let mut sections: BTreeMap<Vec<Node>, Vec<Node>> = BTreeMap::new();
    for m in 0..n {
        for mut e in d.level_elements(m) {
            let w = e.remove(target);
            sections.entry(e).or_default().push(w);
        }
    }
    LevelSelection::new(source, b[target], (0..n).collect(), sections)
}

/// The majority set at one source level and the counts behind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MajorityReport {
    pub majority: LevelSubset,
    /// `|{z : w ∈ B(z)}|` for every `w` of the target level, in lex order of `w`.
    pub incidence: Vec<(Node, usize)>,
    pub sources: usize,
    pub density: Rational,
}

/// `C = {w ∈ W(l_n) : |{z ∈ ⊗Z(n) : w ∈ B(z)}| ≥ (η/2)|⊗Z(n)|}`.
pub fn fubini_majority(b: &LevelSelection, eta: &Rational, n: usize) -> Result<MajorityReport, DensityError> {
    if n >= b.source.height() {
        return Err(DensityError::Malformed(alloc::format!("source has no level {n}")));
    }
    let target = b.target_tree();
    let l = b.target_levels[n];
    let elements = b.source.level_product(n);
    let level = target.level_nodes(l)?;
    let mut counts: BTreeMap<&Node, usize> = level.iter().map(|w| (w, 0)).collect();
    for e in &elements {
        for w in b.section(e) {
            *counts.get_mut(w).expect("section checked in new") += 1;
        }
    }
    let half_eta_sources = eta * &Rational::from_counts(elements.len() as u128, 2);
    let incidence: Vec<(Node, usize)> = counts.into_iter().map(|(w, c)| (w.clone(), c)).collect();
    let majority_nodes: Vec<Node> = incidence
        .iter()
        .filter(|(_, c)| Rational::from(*c as u64) >= half_eta_sources)
        .map(|(w, _)| w.clone())
        .collect();
    let majority = LevelSubset::from_sorted(l, majority_nodes);
    let density = majority.density(&target)?;
    Ok(MajorityReport { majority, incidence, sources: elements.len(), density })
}

/// A fan of `R` rooted at the root of `R`, with `∩_{r ∈ ⊗F(1)} D(r)` precomputed.
#[derive(Clone, Debug)]
struct FanIntersection {
    fan: VectorStrongSubtree,
    level: usize,
    meet: Vec<Node>,
}

fn intersect_sorted(a: &[Node], b: &[Node]) -> Vec<Node> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// The target level of `R`'s root, after checking `R` against the selection's source.
fn root_target_level(d: &LevelSelection, r: &VectorStrongSubtree) -> Result<usize, DensityError> {
    if !is_vector_strong_subtree_of(&d.source, r) {
        return Err(DensityError::NotASubtree);
    }
    d.target_level_for(r.level_set()[0]).ok_or(DensityError::NotASubtree)
}

fn fan_intersections(d: &LevelSelection, r: &VectorStrongSubtree) -> Result<Vec<FanIntersection>, DensityError> {
    let mut out = Vec::new();
    for fan in root_fans(r)? {
        let level = d.target_level_for(fan.level_set()[1]).ok_or(DensityError::NotASubtree)?;
        let mut elements = fan.level_product(1).into_iter();
        let first = elements.next().expect("fans have a top level");
        let mut meet = d.section(&first).to_vec();
        for e in elements {
            meet = intersect_sorted(&meet, d.section(&e));
        }
        out.push(FanIntersection { fan, level, meet });
    }
    Ok(out)
}

fn relative_at(b_w: u32, meet: &[Node], level: usize, cone_top: &Node) -> Rational {
    let total = (b_w as u128).pow((level - cone_top.len()) as u32);
    Rational::from_counts(count_with_prefix(meet, cone_top) as u128, total)
}

fn min_over(b_w: u32, fans: &[FanIntersection], cone_top: &Node) -> Option<(Rational, usize)> {
    let mut best: Option<(Rational, usize)> = None;
    for (i, f) in fans.iter().enumerate() {
        let v = relative_at(b_w, &f.meet, f.level, cone_top);
        if best.as_ref().is_none_or(|(b, _)| &v < b) {
            best = Some((v, i));
        }
    }
    best
}

fn check_w(d: &LevelSelection, l_root: usize, w: &Node, p: Option<u32>) -> Result<(), DensityError> {
    if w.len() != l_root || w.digits().iter().any(|&x| x >= d.target_branching) {
        return Err(DensityError::WrongLevel { node: w.clone(), expected: l_root });
    }
    if p.is_some_and(|p| p >= d.target_branching) {
        return Err(TreeError::DirectionOutOfRange {
            node: w.clone(),
            direction: p.unwrap_or_default(),
            branching: d.target_branching,
        }
        .into());
    }
    Ok(())
}

/// The smallest relative density of `∩_{r ∈ ⊗F(1)} D(r)` at `w⌢p` over the fans
/// `F` of `R` rooted at `R`'s root, together with a fan attaining it.
/// `None` when `R` has height 1 and so has no fans.
pub fn min_fan_intersection_density(
    d: &LevelSelection,
    r: &VectorStrongSubtree,
    w: &Node,
    p: u32,
) -> Result<Option<(Rational, VectorStrongSubtree)>, DensityError> {
    let l_root = root_target_level(d, r)?;
    check_w(d, l_root, w, Some(p))?;
    let fans = fan_intersections(d, r)?;
    Ok(min_over(d.target_branching, &fans, &w.child(p)).map(|(v, i)| (v, fans[i].fan.clone())))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Correlation {
    /// Both conditions hold; `min` is the smallest fan density seen (`None` without fans).
    Correlated { min: Option<Rational> },
    /// `w ∉ D(r_0)`.
    NotInRootSection,
    /// The first direction whose minimal fan density is below the threshold.
    FanBelow { direction: u32, fan: VectorStrongSubtree, density: Rational },
}

impl Correlation {
    pub fn holds(&self) -> bool {
        matches!(self, Correlation::Correlated { .. })
    }
}

fn correlation_with(d: &LevelSelection, root: &[Node], fans: &[FanIntersection], w: &Node, theta: &Rational) -> Correlation {
    if d.section(root).binary_search(w).is_err() {
        return Correlation::NotInRootSection;
    }
    let mut overall: Option<Rational> = None;
    for p in 0..d.target_branching {
        if let Some((v, i)) = min_over(d.target_branching, fans, &w.child(p)) {
            if &v < theta {
                return Correlation::FanBelow { direction: p, fan: fans[i].fan.clone(), density: v };
            }
            overall = Some(overall.map_or(v.clone(), |o| o.min(v)));
        }
    }
    Correlation::Correlated { min: overall }
}

/// Whether `(R, w)` is strongly `θ`-correlated with respect to `D`, with a certificate when not.
pub fn is_strongly_correlated(
    d: &LevelSelection,
    r: &VectorStrongSubtree,
    w: &Node,
    theta: &Rational,
) -> Result<Correlation, DensityError> {
    let l_root = root_target_level(d, r)?;
    check_w(d, l_root, w, None)?;
    let fans = fan_intersections(d, r)?;
    Ok(correlation_with(d, &r.root(), &fans, w, theta))
}

/// `{w ∈ D(r_0) : (R, w) is strongly θ-correlated}`.
pub fn correlated_set(d: &LevelSelection, r: &VectorStrongSubtree, theta: &Rational) -> Result<LevelSubset, DensityError> {
    let l_root = root_target_level(d, r)?;
    let fans = fan_intersections(d, r)?;
    let root = r.root();
    let nodes = d
        .section(&root)
        .iter()
        .filter(|w| correlation_with(d, &root, &fans, w, theta).holds())
        .cloned()
        .collect();
    Ok(LevelSubset::from_sorted(l_root, nodes))
}

/// `D'(r) = ∩_p D(CI(R[0̄], R[p])(r))` on `⊗R[0̄]`.
pub fn refine_selection(d: &LevelSelection, r: &VectorStrongSubtree) -> Result<LevelSelection, DensityError> {
    if !is_vector_strong_subtree_of(&d.source, r) {
        return Err(DensityError::NotASubtree);
    }
    if r.height() < 2 {
        return Err(SubtreeError::HeightTooSmall(r.height()).into());
    }
    let branching: Vec<u32> = r
        .coords()
        .iter()
        .map(|c| c.homogeneous_branching().map(|b| b.unwrap_or(2)))
        .collect::<Result<_, _>>()?;
    let zero = vector_at_direction(r, &alloc::vec![0; r.dim()])?;
    let maps = direction_words(&branching, 1)
        .into_iter()
        .map(|word| {
            let target = vector_at_direction(r, &word[0])?;
            zero.coords().iter().zip(target.coords()).map(|(a, b)| canonical_isomorphism(a, b)).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, SubtreeError>>()?;
    let target_levels = zero
        .level_set()
        .iter()
        .map(|&l| d.target_level_for(l).ok_or(DensityError::NotASubtree))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sections = BTreeMap::new();
    for j in 0..zero.height() {
        for e in zero.level_product(j) {
            let mut meet: Option<Vec<Node>> = None;
            for ci in &maps {
                let image: Vec<Node> = e.iter().zip(ci).map(|(t, m)| m.apply(t).expect("node of R[0]")).collect();
                let sec = d.section(&image);
                meet = Some(match meet {
                    None => sec.to_vec(),
                    Some(m) => intersect_sorted(&m, sec),
                });
            }
            sections.insert(e, meet.unwrap_or_default());
        }
    }
    LevelSelection::new(zero, d.target_branching, target_levels, sections)
}

/// Finite-level density values of a subset of a level product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelDensities {
    pub level: usize,
    /// `|D ∩ ⊗T(n)| / |⊗T(n)|`.
    pub level_density: Rational,
    /// `|D ∩ ⊗(T↾n)| / |⊗(T↾n)|`.
    pub initial_density: Rational,
    /// `(1/|T(n)|) Σ_{t ∈ T(n)} |D ∩ {s ≤ t}| / (n+1)`, one-dimensional sets only.
    pub chain_density: Option<Rational>,
}

/// The three density sequences for `n = 0..height`.
pub fn level_density_profile(d: &ProductSubset) -> Vec<LevelDensities> {
    let one_dim = d.branching().dim() == 1;
    let mut out = Vec::with_capacity(d.height());
    let (mut count, mut size) = (0u128, 0u128);
    // chain counts |D ∩ {s ≤ t}| for the nodes of the previous level, in index order
    let mut chains: Vec<u64> = Vec::new();
    for n in 0..d.height() {
        let bits = d.level_bits(n);
        count += bits.iter().filter(|&&x| x).count() as u128;
        size += bits.len() as u128;
        let chain_density = if one_dim {
            let b = d.branching().as_slice()[0] as usize;
            let next: Vec<u64> = (0..bits.len())
                .map(|i| bits[i] as u64 + if n == 0 { 0 } else { chains[i / b] })
                .collect();
            let total: u128 = next.iter().map(|&c| c as u128).sum();
            chains = next;
            Some(Rational::from_counts(total, bits.len() as u128 * (n as u128 + 1)))
        } else {
            None
        };
        out.push(LevelDensities {
            level: n,
            level_density: d.level_density(n),
            initial_density: Rational::from_counts(count, size),
            chain_density,
        });
    }
    out
}
