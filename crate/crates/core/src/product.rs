//! Subsets and colorings of the level product of `(b_1^<n, …, b_d^<n)`.
//!
//! Elements of level `m` are indexed in mixed radix with coordinate 0 most
//! significant, each coordinate contributing the lex rank of its node.

use alloc::vec::Vec;

use crate::enumerate::Containment;
use crate::rational::Rational;
use crate::tree::{BranchingVector, Node, TreeError};

fn level_len(branching: &BranchingVector, m: usize) -> Result<usize, TreeError> {
    branching.as_slice().iter().try_fold(1usize, |acc, &b| {
        (b as usize).checked_pow(m as u32).and_then(|x| acc.checked_mul(x)).ok_or(TreeError::Overflow)
    })
}

/// Index of `element` inside level `m`, or `None` if it is not a level-`m` element.
pub fn element_index(branching: &BranchingVector, element: &[Node]) -> Option<usize> {
    let b = branching.as_slice();
    if element.len() != b.len() {
        return None;
    }
    let m = element[0].len();
    let mut idx = 0usize;
    for (t, &bi) in element.iter().zip(b) {
        if t.len() != m || t.digits().iter().any(|&d| d >= bi) {
            return None;
        }
        idx = idx * (bi as usize).pow(m as u32) + t.rank(bi);
    }
    Some(idx)
}

/// Inverse of [`element_index`].
pub fn element_at(branching: &BranchingVector, m: usize, mut idx: usize) -> Vec<Node> {
    let b = branching.as_slice();
    let mut out = alloc::vec![Node::root(); b.len()];
    for (slot, &bi) in out.iter_mut().zip(b).rev() {
        let size = (bi as usize).pow(m as u32);
        *slot = Node::from_rank(idx % size, bi, m);
        idx /= size;
    }
    out
}

/// `D ⊆ ⊗(b_1^<n, …, b_d^<n)` stored as one membership vector per level.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductSubset {
    branching: BranchingVector,
    levels: Vec<Vec<bool>>,
}

impl ProductSubset {
    pub fn empty(branching: BranchingVector, height: usize) -> Result<Self, TreeError> {
        let levels = (0..height).map(|m| Ok(alloc::vec![false; level_len(&branching, m)?])).collect::<Result<_, _>>()?;
        Ok(ProductSubset { branching, levels })
    }

    pub fn full(branching: BranchingVector, height: usize) -> Result<Self, TreeError> {
        let levels = (0..height).map(|m| Ok(alloc::vec![true; level_len(&branching, m)?])).collect::<Result<_, _>>()?;
        Ok(ProductSubset { branching, levels })
    }

    /// Builds the subset from membership vectors, one per level, of the right lengths.
    pub fn from_levels(branching: BranchingVector, levels: Vec<Vec<bool>>) -> Result<Self, TreeError> {
        for (m, l) in levels.iter().enumerate() {
            if l.len() != level_len(&branching, m)? {
                return Err(TreeError::Malformed(alloc::format!("level {m} has {} entries", l.len())));
            }
        }
        Ok(ProductSubset { branching, levels })
    }

    /// Membership given by a predicate on elements.
    pub fn from_fn(
        branching: BranchingVector,
        height: usize,
        mut f: impl FnMut(usize, &[Node]) -> bool,
    ) -> Result<Self, TreeError> {
        let mut s = ProductSubset::empty(branching, height)?;
        for m in 0..height {
            for idx in 0..s.levels[m].len() {
                let e = element_at(&s.branching, m, idx);
                s.levels[m][idx] = f(m, &e);
            }
        }
        Ok(s)
    }

    pub fn branching(&self) -> &BranchingVector {
        &self.branching
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn level_bits(&self, m: usize) -> &[bool] {
        &self.levels[m]
    }

    pub fn level_bits_mut(&mut self, m: usize) -> &mut [bool] {
        &mut self.levels[m]
    }

    pub fn contains(&self, element: &[Node]) -> bool {
        let Some(m) = element.first().map(Node::len) else { return false };
        if m >= self.levels.len() {
            return false;
        }
        element_index(&self.branching, element).is_some_and(|i| self.levels[m][i])
    }

    /// Sets membership; returns an error for elements outside the product.
    pub fn set(&mut self, element: &[Node], member: bool) -> Result<(), TreeError> {
        let m = element.first().map_or(0, Node::len);
        let idx = element_index(&self.branching, element)
            .filter(|_| m < self.levels.len())
            .ok_or_else(|| TreeError::Malformed(alloc::format!("element {element:?} is outside the product")))?;
        self.levels[m][idx] = member;
        Ok(())
    }

    /// Elements of level `m` in index order.
    pub fn level_elements(&self, m: usize) -> Vec<Vec<Node>> {
        self.levels[m]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| element_at(&self.branching, m, i))
            .collect()
    }

    pub fn level_count(&self, m: usize) -> usize {
        self.levels[m].iter().filter(|&&b| b).count()
    }

    /// `|D ∩ ⊗T(m)| / |⊗T(m)|`.
    pub fn level_density(&self, m: usize) -> Rational {
        Rational::from_counts(self.level_count(m) as u128, self.levels[m].len() as u128)
    }

    /// Minimum of the level densities over all levels.
    pub fn min_level_density(&self) -> Rational {
        (0..self.height()).map(|m| self.level_density(m)).min().unwrap_or_else(Rational::one)
    }

    /// The same subset restricted to the first `height` levels.
    pub fn truncate(&self, height: usize) -> ProductSubset {
        ProductSubset { branching: self.branching.clone(), levels: self.levels[..height.min(self.height())].to_vec() }
    }
}

impl Containment for ProductSubset {
    fn accepts(&self, _: &[Node], element: &[Node]) -> bool {
        self.contains(element)
    }
}

/// A coloring of every level-product element below `height`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring {
    branching: BranchingVector,
    colors: u32,
    levels: Vec<Vec<u32>>,
}

impl Coloring {
    pub fn from_levels(branching: BranchingVector, colors: u32, levels: Vec<Vec<u32>>) -> Result<Self, TreeError> {
        for (m, l) in levels.iter().enumerate() {
            if l.len() != level_len(&branching, m)? {
                return Err(TreeError::Malformed(alloc::format!("level {m} has {} colors", l.len())));
            }
            if let Some(c) = l.iter().find(|&&c| c >= colors) {
                return Err(TreeError::Malformed(alloc::format!("color {c} is not below {colors}")));
            }
        }
        Ok(Coloring { branching, colors, levels })
    }

    pub fn from_fn(
        branching: BranchingVector,
        height: usize,
        colors: u32,
        mut f: impl FnMut(usize, &[Node]) -> u32,
    ) -> Result<Self, TreeError> {
        let mut levels = Vec::with_capacity(height);
        for m in 0..height {
            let len = level_len(&branching, m)?;
            levels.push((0..len).map(|i| f(m, &element_at(&branching, m, i))).collect());
        }
        Coloring::from_levels(branching, colors, levels)
    }

    pub fn branching(&self) -> &BranchingVector {
        &self.branching
    }

    pub fn colors(&self) -> u32 {
        self.colors
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn level_colors(&self, m: usize) -> &[u32] {
        &self.levels[m]
    }

    pub fn color(&self, element: &[Node]) -> Option<u32> {
        let m = element.first()?.len();
        let idx = element_index(&self.branching, element)?;
        self.levels.get(m).map(|l| l[idx])
    }
}

/// Accepts an element when it has the root element's color.
impl Containment for Coloring {
    fn accepts(&self, root: &[Node], element: &[Node]) -> bool {
        let c = self.color(root);
        c.is_some() && c == self.color(element)
    }
}
