//! Two non-homogeneous trees carrying dense sets that contain no strong subtree.
//!
//! The first widens level `k` to `l_k + 1` children and keeps the nodes with no
//! zero digit. The second is a perfect subtree of `2^<N` that branches fully
//! only at the levels `l_k` and, in between, only inside the cone of `1^{l_k+1}`.

use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::enumerate::{Budget, Containment, SearchOutcome, SearchSpace};
use crate::rational::{big_pow, Rational};
use crate::subtree::StrongSubtree;
use crate::tree::{ExplicitTree, Node, Tree, TreeError};

/// A finite tree with a marked node set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedTree {
    pub tree: ExplicitTree,
    marked: Vec<Node>,
}

impl MarkedTree {
    pub fn new(tree: ExplicitTree, mut marked: Vec<Node>) -> Result<Self, TreeError> {
        marked.sort();
        marked.dedup();
        if let Some(bad) = marked.iter().find(|t| !tree.contains(t)) {
            return Err(TreeError::NodeNotInTree(bad.clone()));
        }
        Ok(MarkedTree { tree, marked })
    }

    /// Marked nodes in node order.
    pub fn marked(&self) -> &[Node] {
        &self.marked
    }

    pub fn is_marked(&self, t: &Node) -> bool {
        self.marked.binary_search(t).is_ok()
    }

    /// Marked nodes of level `n`, in lex order.
    pub fn marked_in_level(&self, n: usize) -> Vec<Node> {
        let mut v: Vec<Node> = self.marked.iter().filter(|t| t.len() == n).cloned().collect();
        v.sort();
        v
    }

    /// `|D ∩ T(n)| / |T(n)|`.
    pub fn level_density(&self, n: usize) -> Result<Rational, TreeError> {
        let size = self.tree.level_size(n)?;
        Ok(Rational::from_counts(self.marked_in_level(n).len() as u128, size))
    }
}

impl Containment for MarkedTree {
    fn accepts(&self, _: &[Node], element: &[Node]) -> bool {
        element.len() == 1 && self.is_marked(&element[0])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaireInstance {
    pub epsilon: Rational,
    /// `l_0, …, l_{depth-1}`; level `k` nodes have `l_k + 1` children.
    pub widths: Vec<u64>,
    pub marked: MarkedTree,
}

/// `l_k = ⌈2^{k+1}/ε⌉ - 1`, so `Σ 1/(l_k + 1) ≤ Σ ε/2^{k+1} ≤ ε`.
pub fn baire_widths(epsilon: &Rational, depth: usize) -> Vec<u64> {
    (0..depth)
        .map(|k| {
            let v = &Rational::from(1u64 << (k + 1)) / epsilon;
            v.ceil_u64().expect("small widths") - 1
        })
        .collect()
}

/// The widened tree with levels `0..=depth` and `D` = non-empty nodes without a zero digit.
pub fn baire_example(epsilon: &Rational, depth: usize, max_level_size: u128) -> Result<BaireInstance, TreeError> {
    if !epsilon.is_positive() || epsilon > &Rational::one() {
        return Err(TreeError::Malformed("epsilon must lie in (0, 1]".into()));
    }
    let widths = baire_widths(epsilon, depth);
    let mut size: u128 = 1;
    for &l in &widths {
        size = size.checked_mul(l as u128 + 1).ok_or(TreeError::Overflow)?;
        if size > max_level_size {
            return Err(TreeError::Malformed(alloc::format!("level size {size} exceeds the limit {max_level_size}")));
        }
    }
    let tree = ExplicitTree::generate(depth + 1, |t| {
        u32::try_from(widths[t.len()] + 1).expect("width fits in u32")
    })?;
    let mut marked = Vec::new();
    for n in 1..=depth {
        marked.extend(tree.level_nodes(n)?.into_iter().filter(|t| t.digits().iter().all(|&d| d != 0)));
    }
    let marked = MarkedTree::new(tree, marked)?;
    Ok(BaireInstance { epsilon: epsilon.clone(), widths, marked })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CantorInstance {
    /// `l_0 = 0 < l_1 < … < l_K`.
    pub levels: Vec<usize>,
    /// `M_0 = 1, …, M_K`.
    pub sizes: Vec<BigUint>,
    pub marked: MarkedTree,
}

/// `(l_k)` and `(M_k)` for `k = 0..=stages`, each `l_{k+1}` minimal with
/// `2^x ≥ (2^{k+1} - 1)(2M_k - 1)` where `x = l_{k+1} - l_k - 1`.
pub fn cantor_parameters(stages: usize) -> (Vec<usize>, Vec<BigUint>) {
    let mut levels = alloc::vec![0usize];
    let mut sizes = alloc::vec![BigUint::from(1u32)];
    for k in 0..stages {
        let m = &sizes[k];
        let rest = (BigUint::from(2u32) * m) - 1u32;
        let need = (big_pow(2, k as u64 + 1) - 1u32) * &rest;
        let mut x = 0u64;
        while big_pow(2, x) < need {
            x += 1;
        }
        levels.push(levels[k] + x as usize + 1);
        sizes.push(rest + big_pow(2, x));
    }
    (levels, sizes)
}

/// The tree on levels `0..=l_K` and `D = ∪_{k<K} T(l_{k+1}) ∩ suc(1^{l_k+1})`.
pub fn cantor_example(stages: usize, max_level_size: u128) -> Result<CantorInstance, TreeError> {
    if stages == 0 {
        return Err(TreeError::Malformed("at least one stage is needed".into()));
    }
    let (levels, sizes) = cantor_parameters(stages);
    if sizes.iter().any(|m| m > &BigUint::from(max_level_size)) {
        return Err(TreeError::Malformed(alloc::format!("level sizes exceed the limit {max_level_size}")));
    }
    let top = *levels.last().expect("non-empty");
    let tree = ExplicitTree::generate(top + 1, |t| {
        let l = t.len();
        if levels.contains(&l) {
            return 2;
        }
        let k = levels.iter().rposition(|&x| x < l).expect("l_0 = 0 < l");
        let cone = Node::from_digits(alloc::vec![1; levels[k] + 1]);
        if cone.is_prefix_of(t) {
            2
        } else {
            1
        }
    })?;
    let mut marked = Vec::new();
    for k in 0..stages {
        let cone = Node::from_digits(alloc::vec![1; levels[k] + 1]);
        marked.extend(tree.successors_in_level(&cone, levels[k + 1])?);
    }
    let marked = MarkedTree::new(tree, marked)?;
    Ok(CantorInstance { levels, sizes, marked })
}

/// Density lower bound `1 - 2^{-k-1}` at level `l_{k+1}`.
pub fn cantor_density_bound(k: usize) -> Rational {
    let den = 1u128 << (k + 1);
    Rational::from_counts(den - 1, den)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoFanCertificate {
    /// Every marked node and every higher level was checked.
    None { depth: usize, roots: usize, pairs: usize },
    /// A height-2 strong subtree inside the marked set.
    Found(StrongSubtree),
}

/// Checks directly that no marked `t` has, on some higher level, a marked node
/// above each of its immediate successors.
pub fn verify_no_height2(m: &MarkedTree) -> Result<NoFanCertificate, TreeError> {
    let depth = m.tree.tree_height();
    let mut roots = 0;
    let mut pairs = 0;
    for t in m.marked() {
        roots += 1;
        let b = m.tree.branching_at(t)?;
        for level in t.len() + 1..depth {
            pairs += 1;
            let marked_level = m.marked_in_level(level);
            let mut top = Vec::with_capacity(b as usize);
            for p in 0..b {
                let cone = t.child(p);
                match marked_level.iter().find(|s| cone.is_prefix_of(s)) {
                    Some(s) => top.push(s.clone()),
                    None => break,
                }
            }
            if b > 0 && top.len() == b as usize {
                return Ok(NoFanCertificate::Found(StrongSubtree::new(
                    alloc::vec![t.len(), level],
                    alloc::vec![alloc::vec![t.clone()], top],
                )));
            }
        }
    }
    Ok(NoFanCertificate::None { depth, roots, pairs })
}

/// Height-`k` strong subtree search inside the marked set of an explicit tree.
pub fn marked_witness_search(m: &MarkedTree, k: usize, budget: Budget<'_>) -> Result<SearchOutcome, TreeError> {
    let hosts = core::slice::from_ref(&m.tree);
    let space = SearchSpace::new(hosts, m.tree.tree_height(), k)?;
    space.first(m, budget)
}

/// `Σ_{k<depth} 1/(l_k + 1)`.
pub fn baire_reciprocal_sum(widths: &[u64]) -> Rational {
    widths.iter().fold(Rational::zero(), |acc, &l| acc + Rational::from_counts(1, l as u128 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::Outcome;
    use crate::subtree::validate_strong;
    use alloc::vec;

    #[test]
    fn baire_widths_for_half() {
        assert_eq!(baire_widths(&Rational::from_counts(1, 2), 3), vec![3, 7, 15]);
        assert!(baire_reciprocal_sum(&baire_widths(&Rational::from_counts(1, 2), 6)) <= Rational::from_counts(1, 2));
    }

    #[test]
    fn baire_instance_densities() {
        let inst = baire_example(&Rational::from_counts(1, 2), 3, 1 << 20).unwrap();
        assert_eq!(inst.marked.level_density(1).unwrap(), Rational::from_counts(3, 4));
        for n in 1..=3 {
            assert!(inst.marked.level_density(n).unwrap() >= Rational::from_counts(1, 2));
        }
        assert!(!inst.marked.is_marked(&Node::root()));
        assert_eq!(inst.marked.tree.successors_in_level(&Node::from_digits(vec![2]), 2).unwrap().len(), 8);
        assert!(matches!(verify_no_height2(&inst.marked).unwrap(), NoFanCertificate::None { depth: 4, .. }));
    }

    #[test]
    fn cantor_parameters_two_stages() {
        let (l, m) = cantor_parameters(2);
        assert_eq!(l, vec![0, 1, 6]);
        assert_eq!(m, vec![BigUint::from(1u32), BigUint::from(2u32), BigUint::from(19u32)]);
    }

    #[test]
    fn cantor_instance_certificates() {
        let inst = cantor_example(2, 1 << 20).unwrap();
        for (k, &l) in inst.levels.iter().enumerate() {
            assert_eq!(BigUint::from(inst.marked.tree.level_size(l).unwrap()), inst.sizes[k]);
        }
        for k in 0..2 {
            assert!(inst.marked.level_density(inst.levels[k + 1]).unwrap() >= cantor_density_bound(k));
        }
        assert!(inst.marked.tree.is_perfect_below(inst.levels[1] + 1));
        assert_eq!(
            verify_no_height2(&inst.marked).unwrap(),
            NoFanCertificate::None { depth: 7, roots: inst.marked.marked().len(), pairs: 5 }
        );
        let out = marked_witness_search(&inst.marked, 2, Budget::unlimited()).unwrap();
        assert_eq!(out.outcome, Outcome::ExhaustedNone);
    }

    #[test]
    fn full_marking_is_caught() {
        let tree = ExplicitTree::generate(3, |_| 2).unwrap();
        let all: Vec<Node> = (0..3).flat_map(|n| tree.level_nodes(n).unwrap()).collect();
        let m = MarkedTree::new(tree.clone(), all).unwrap();
        let NoFanCertificate::Found(f) = verify_no_height2(&m).unwrap() else { panic!("expected a fan") };
        assert!(validate_strong(&tree, &f).is_ok());
        assert!(marked_witness_search(&m, 2, Budget::unlimited()).unwrap().witness_ref().is_some());
    }
}
