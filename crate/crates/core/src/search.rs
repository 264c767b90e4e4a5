//! Witness searches, the avoidance extremal table, DHL numbers and the
//! one-dimensional extractor.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::enumerate::{Budget, SearchOutcome, SearchSpace};
use crate::product::{Coloring, ProductSubset};
use crate::rational::Rational;
use crate::tree::{BranchingVector, Homogeneous, TreeError};

mod extract;
mod extremal;

pub use extract::{extract_1d, ExtractError, ExtractReport, ExtractResult, StageRecord};
pub use extremal::{avoidance_extremal, Extremal, ExtremalOptions};

/// A height-`k` vector strong subtree whose level product is monochromatic.
pub fn hl_search(coloring: &Coloring, k: usize, budget: Budget<'_>) -> Result<SearchOutcome, TreeError> {
    let hosts = coloring.branching().hosts(coloring.height());
    SearchSpace::new(&hosts, coloring.height(), k)?.first(coloring, budget)
}

/// A height-`k` vector strong subtree whose level product lies inside `d`.
pub fn dhl_witness_search(d: &ProductSubset, k: usize, budget: Budget<'_>) -> Result<SearchOutcome, TreeError> {
    let hosts = d.branching().hosts(d.height());
    SearchSpace::new(&hosts, d.height(), k)?.first(d, budget)
}

/// Truncated hosts for a product subset, for callers that shard the search themselves.
pub fn hosts_for(d: &ProductSubset) -> Vec<Homogeneous> {
    d.branching().hosts(d.height())
}

/// The finite DHL number, or a lower bound when the table ran out first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DhlNumber {
    Exact(usize),
    AtLeast(usize),
}

impl fmt::Display for DhlNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DhlNumber::Exact(n) => write!(f, "N {n}"),
            DhlNumber::AtLeast(n) => write!(f, "N >= {n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DhlReport {
    pub number: DhlNumber,
    /// `(n, f(n,k))` for every computed `n`, starting at 1.
    pub table: Vec<(usize, Rational)>,
}

/// Least `N` with `f(n,k) < ε` for every `n > N`, read off the extremal table
/// for `n = 1..=n_budget`. Since `f` is non-increasing in `n` this is one less
/// than the first `n` with `f(n,k) < ε`.
pub fn dhl_number(
    epsilon: &Rational,
    k: usize,
    branching: &BranchingVector,
    n_budget: usize,
    options: ExtremalOptions,
    budget: Budget<'_>,
) -> Result<DhlReport, TreeError> {
    let mut table = Vec::new();
    let mut upper = Rational::one();
    for n in 1..=n_budget {
        let value = match avoidance_extremal(branching, n, k, options, Some(upper.clone()), budget)? {
            Some(ex) => ex.value,
            None => {
                let last = table.len();
                return Ok(DhlReport { number: DhlNumber::AtLeast(last), table });
            }
        };
        table.push((n, value.clone()));
        if &value < epsilon {
            return Ok(DhlReport { number: DhlNumber::Exact(n - 1), table });
        }
        upper = value;
    }
    Ok(DhlReport { number: DhlNumber::AtLeast(n_budget), table })
}

/// Every level-`m` element of the product, as a set of indices; used by the extremal search.
pub(crate) fn level_sizes(branching: &BranchingVector, n: usize) -> Vec<usize> {
    (0..n)
        .map(|m| branching.as_slice().iter().map(|&b| (b as usize).pow(m as u32)).product())
        .collect()
}

/// Distinct values `c / |level m|` in `[0, 1]`, largest first.
pub(crate) fn candidate_values(sizes: &[usize]) -> Vec<Rational> {
    let mut set = BTreeSet::new();
    for &s in sizes {
        for c in 0..=s {
            set.insert(Rational::from_counts(c as u128, s as u128));
        }
    }
    set.into_iter().rev().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::Outcome;
    use crate::tree::Node;
    use alloc::vec;

    fn bv(b: &[u32]) -> BranchingVector {
        BranchingVector::new(b.to_vec()).unwrap()
    }

    #[test]
    fn parity_coloring_has_no_two_level_witness() {
        let c = Coloring::from_fn(bv(&[2]), 2, 2, |m, _| (m % 2) as u32).unwrap();
        assert_eq!(hl_search(&c, 2, Budget::unlimited()).unwrap().outcome, Outcome::ExhaustedNone);
    }

    #[test]
    fn constant_coloring_gives_initial_tree() {
        let c = Coloring::from_fn(bv(&[2]), 3, 1, |_, _| 0).unwrap();
        let out = hl_search(&c, 2, Budget::unlimited()).unwrap();
        let w = out.witness_ref().unwrap();
        assert_eq!(w.level_set(), &[0, 1]);
    }

    #[test]
    fn full_set_contains_initial_tree() {
        let d = ProductSubset::full(bv(&[2, 2]), 3).unwrap();
        let out = dhl_witness_search(&d, 3, Budget::unlimited()).unwrap();
        assert_eq!(out.witness_ref().unwrap().level_set(), &[0, 1, 2]);
    }

    #[test]
    fn budget_gives_unknown() {
        let d = ProductSubset::from_fn(bv(&[2]), 5, |m, e| m < 4 || e[0] != Node::from_digits(vec![0; 4])).unwrap();
        let out = dhl_witness_search(&d, 5, Budget::expansions(5)).unwrap();
        assert_eq!(out.outcome, Outcome::Unknown);
    }

    #[test]
    fn dhl_numbers_small() {
        let b = bv(&[2]);
        let opts = ExtremalOptions::default();
        let r = dhl_number(&Rational::from_counts(1, 2), 1, &b, 4, opts, Budget::unlimited()).unwrap();
        assert_eq!(r.number, DhlNumber::Exact(0));
        let r = dhl_number(&Rational::one(), 2, &b, 4, opts, Budget::unlimited()).unwrap();
        assert_eq!(r.number, DhlNumber::Exact(1));
        assert_eq!(r.table, vec![(1, Rational::one()), (2, Rational::from_counts(1, 2))]);
        let r = dhl_number(&Rational::from_counts(1, 4), 2, &b, 2, opts, Budget::unlimited()).unwrap();
        assert_eq!(r.number, DhlNumber::AtLeast(2));
    }

    #[test]
    fn candidates_descend() {
        let c = candidate_values(&[1, 2, 4]);
        assert_eq!(c.first(), Some(&Rational::one()));
        assert_eq!(c.last(), Some(&Rational::zero()));
        assert_eq!(c.len(), 5);
    }
}
