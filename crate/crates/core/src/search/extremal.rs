//! `f(n,k)`: the largest minimum level density of a subset of the level
//! product of `(b_1^<n, …, b_d^<n)` that contains the level product of no
//! height-`k` vector strong subtree.
//!
//! Shrinking a level of an avoiding set keeps it avoiding, so `f(n,k) ≥ v`
//! holds iff some avoiding set has exactly `⌈v·|level m|⌉` elements on every
//! level `m`. Candidate values are tried from the top; each test fills levels
//! bottom-up and only checks subtrees whose top level is the one being filled.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{candidate_values, level_sizes};
use crate::enumerate::{Budget, Outcome, SearchSpace};
use crate::product::ProductSubset;
use crate::rational::Rational;
use crate::tree::{BranchingVector, Homogeneous, TreeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtremalOptions {
    /// Identify partial sets that differ by a digit permutation of the tree
    /// (one-dimensional products only; ignored otherwise).
    pub symmetry: bool,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        ExtremalOptions { symmetry: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extremal {
    pub value: Rational,
    /// An avoiding set whose minimum level density is `value`.
    pub witness: ProductSubset,
    /// Expansions spent in avoidance checks.
    pub expansions: u64,
}

/// Computes `f(n,k)`. `upper` is a known upper bound (for instance `f(n-1,k)`).
/// Returns `Ok(None)` when the budget runs out.
pub fn avoidance_extremal(
    branching: &BranchingVector,
    n: usize,
    k: usize,
    options: ExtremalOptions,
    upper: Option<Rational>,
    budget: Budget<'_>,
) -> Result<Option<Extremal>, TreeError> {
    if n == 0 || k == 0 {
        return Err(TreeError::Malformed("the extremal needs n >= 1 and k >= 1".into()));
    }
    let sizes = level_sizes(branching, n);
    let mut ctx = Ctx {
        hosts: branching.hosts(n),
        k,
        sizes: sizes.clone(),
        symmetry: options.symmetry && branching.dim() == 1,
        b: branching.as_slice()[0] as usize,
        budget,
        spent: 0,
        exhausted: false,
        failed: Vec::new(),
    };
    for v in candidate_values(&sizes) {
        if upper.as_ref().is_some_and(|u| &v > u) {
            continue;
        }
        let targets: Vec<usize> = sizes
            .iter()
            .map(|&s| {
                let c = (&v * &Rational::from(s as u64)).ceil_u64().expect("at most the level size");
                c as usize
            })
            .collect();
        let mut d = ProductSubset::empty(branching.clone(), n)?;
        ctx.failed = alloc::vec![BTreeSet::new(); n];
        let found = ctx.fill_level(&mut d, 0, &targets)?;
        if ctx.exhausted {
            return Ok(None);
        }
        if found {
            return Ok(Some(Extremal { value: v, witness: d, expansions: ctx.spent }));
        }
    }
    // the value 0 is always attained by the empty set
    unreachable!("the candidate list ends with 0")
}

struct Ctx<'a> {
    hosts: Vec<Homogeneous>,
    k: usize,
    sizes: Vec<usize>,
    symmetry: bool,
    b: usize,
    budget: Budget<'a>,
    spent: u64,
    exhausted: bool,
    /// Canonical keys of partial sets (levels `0..=m`) known not to extend.
    failed: Vec<BTreeSet<Vec<u8>>>,
}

impl Ctx<'_> {
    fn fill_level(&mut self, d: &mut ProductSubset, m: usize, targets: &[usize]) -> Result<bool, TreeError> {
        if m == self.sizes.len() {
            return Ok(true);
        }
        self.choose(d, m, 0, targets[m], targets)
    }

    fn choose(&mut self, d: &mut ProductSubset, m: usize, start: usize, need: usize, targets: &[usize]) -> Result<bool, TreeError> {
        if need == 0 {
            let key = self.key(d, m);
            if self.failed[m].contains(&key) {
                return Ok(false);
            }
            if self.fill_level(d, m + 1, targets)? {
                return Ok(true);
            }
            if !self.exhausted {
                self.failed[m].insert(key);
            }
            return Ok(false);
        }
        let size = self.sizes[m];
        for idx in start..=size - need {
            d.level_bits_mut(m)[idx] = true;
            let blocked = self.has_witness_with_top(d, m)?;
            if !blocked && self.choose(d, m, idx + 1, need - 1, targets)? {
                return Ok(true);
            }
            d.level_bits_mut(m)[idx] = false;
            if self.exhausted {
                return Ok(false);
            }
        }
        Ok(false)
    }

    fn has_witness_with_top(&mut self, d: &ProductSubset, m: usize) -> Result<bool, TreeError> {
        if m + 1 < self.k {
            return Ok(false);
        }
        let remaining = self.budget.max_expansions.map(|x| x.saturating_sub(self.spent));
        let space = SearchSpace::new(&self.hosts, m + 1, self.k)?.with_top_level(m);
        let out = space.first(d, Budget { max_expansions: remaining, stop: self.budget.stop })?;
        self.spent += out.stats.expansions;
        match out.outcome {
            Outcome::Witness(_) => Ok(true),
            Outcome::ExhaustedNone => Ok(false),
            Outcome::Unknown => {
                self.exhausted = true;
                Ok(true)
            }
        }
    }

    /// Key of the partial set on levels `0..=m`; with symmetry on, a canonical
    /// code invariant under digit permutations at every node.
    fn key(&self, d: &ProductSubset, m: usize) -> Vec<u8> {
        if !self.symmetry {
            return (0..=m).flat_map(|j| d.level_bits(j).iter().map(|&x| x as u8)).collect();
        }
        let mut codes: Vec<Vec<u8>> = d.level_bits(m).iter().map(|&x| alloc::vec![x as u8]).collect();
        for j in (0..m).rev() {
            let bits = d.level_bits(j);
            codes = (0..bits.len())
                .map(|i| {
                    let mut children: Vec<&Vec<u8>> = codes[i * self.b..(i + 1) * self.b].iter().collect();
                    children.sort();
                    let mut code = alloc::vec![bits[i] as u8, b'('];
                    for c in children {
                        code.extend_from_slice(c);
                    }
                    code.push(b')');
                    code
                })
                .collect();
        }
        codes.pop().expect("level 0 has one node")
    }
}
