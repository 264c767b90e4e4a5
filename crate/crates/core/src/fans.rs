//! Fans (height-2 strong subtrees) and their counts.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::enumerate::{AcceptAll, Budget, BudgetExceeded, SearchSpace};
use crate::rational::{big_pow, Rational};
use crate::subtree::{push_forward, StrongSubtree, SubtreeError, VectorStrongSubtree};
use crate::tree::{BranchingVector, Homogeneous, TreeError};

/// Vector fans of `(b_1^<N, …, b_d^<N)` whose top level is level `n`, in search order.
pub fn enumerate_fans(branching: &BranchingVector, n: usize, budget: Budget<'_>) -> Result<Vec<VectorStrongSubtree>, FanError> {
    if n == 0 {
        return Err(FanError::ZeroLevel);
    }
    let hosts = branching.hosts(n + 1);
    let space = SearchSpace::new(&hosts, n + 1, 2)?.with_top_level(n);
    let mut out = Vec::new();
    let done = space.for_each(&AcceptAll, budget, |f| {
        out.push(f.clone());
        true
    })?;
    if !done.complete {
        return Err(FanError::Budget(BudgetExceeded { expansions: done.expansions, produced: out.len() }));
    }
    Ok(out)
}

/// `Θ_n = Σ_{m<n} ∏_i b_i^m · (b_i^{n-m-1})^{b_i}`: root level `m`, a root
/// node, then one level-`n` node in each of the `b_i` direction cones.
pub fn theta(branching: &BranchingVector, n: usize) -> BigUint {
    let mut total = BigUint::zero();
    for m in 0..n as u64 {
        let mut term = BigUint::one();
        for &b in branching.as_slice() {
            let b = b as u64;
            term *= big_pow(b, m) * big_pow(b, (n as u64 - m - 1) * b);
        }
        total += term;
    }
    total
}

/// Checks `β^{n-1} ≤ Θ_n ≤ 2^{β^n}`; the upper comparison uses bit lengths so that `2^{β^n}` is never built.
pub fn theta_within_bounds(branching: &BranchingVector, n: usize) -> bool {
    if n == 0 {
        return false;
    }
    let th = theta(branching, n);
    let beta = branching.product();
    let lower = big_pow_u128(beta, n as u64 - 1);
    let exponent = big_pow_u128(beta, n as u64);
    let bits = BigUint::from(th.bits());
    // th < 2^bits, and th >= 2^(bits-1)
    let upper_ok = bits <= exponent || (bits == exponent.clone() + 1u32 && th == BigUint::one() << exponent_to_usize(&exponent));
    lower <= th && upper_ok
}

fn big_pow_u128(base: u128, e: u64) -> BigUint {
    let mut acc = BigUint::one();
    let b = BigUint::from(base);
    for _ in 0..e {
        acc *= &b;
    }
    acc
}

fn exponent_to_usize(e: &BigUint) -> usize {
    let digits = e.to_u64_digits();
    match digits.as_slice() {
        [] => 0,
        [x] => usize::try_from(*x).unwrap_or(usize::MAX),
        _ => usize::MAX,
    }
}

/// `θ_j = ε / (2 b_W Θ_j)` for `j = 1..=n_max`.
pub fn theta_sequence(branching: &BranchingVector, epsilon: &Rational, target_branching: u32, n_max: usize) -> Vec<Rational> {
    (1..=n_max)
        .map(|n| {
            let denom = BigUint::from(2u32 * target_branching) * theta(branching, n);
            epsilon * &Rational::from_big_counts(&BigUint::one(), &denom)
        })
        .collect()
}

/// Fans of the vector strong subtree `s` whose top level is level `j` of `s`.
pub fn fans_of(s: &VectorStrongSubtree, j: usize) -> Result<Vec<VectorStrongSubtree>, FanError> {
    let branching = word_branching(s)?;
    let words = enumerate_fans(&branching, j, Budget::unlimited())?;
    words.iter().map(|w| push_forward_vector(s, w)).collect()
}

/// Fans of `s` rooted at the root of `s`, top levels in increasing order.
pub fn root_fans(s: &VectorStrongSubtree) -> Result<Vec<VectorStrongSubtree>, FanError> {
    let mut out = Vec::new();
    for j in 1..s.height() {
        out.extend(fans_of(s, j)?.into_iter().filter(|f| f.level_set()[0] == s.level_set()[0]));
    }
    Ok(out)
}

fn word_branching(s: &VectorStrongSubtree) -> Result<BranchingVector, FanError> {
    let b = s
        .coords()
        .iter()
        .map(|c| c.homogeneous_branching().map(|b| b.unwrap_or(2)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BranchingVector::new(b)?)
}

fn push_forward_vector(s: &VectorStrongSubtree, w: &VectorStrongSubtree) -> Result<VectorStrongSubtree, FanError> {
    let coords: Vec<StrongSubtree> =
        s.coords().iter().zip(w.coords()).map(|(o, wc)| push_forward(o, wc)).collect::<Result<_, _>>()?;
    Ok(VectorStrongSubtree::new(coords)?)
}

/// A truncated host per coordinate, exposed for callers that enumerate fans themselves.
pub fn fan_hosts(branching: &BranchingVector, n: usize) -> Vec<Homogeneous> {
    branching.hosts(n + 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FanError {
    ZeroLevel,
    Budget(BudgetExceeded),
    Tree(TreeError),
    Subtree(SubtreeError),
}

impl core::fmt::Display for FanError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FanError::ZeroLevel => f.write_str("fans need a top level of at least 1"),
            FanError::Budget(e) => write!(f, "{e}"),
            FanError::Tree(e) => write!(f, "{e}"),
            FanError::Subtree(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for FanError {}

impl From<TreeError> for FanError {
    fn from(e: TreeError) -> Self {
        FanError::Tree(e)
    }
}

impl From<SubtreeError> for FanError {
    fn from(e: SubtreeError) -> Self {
        FanError::Subtree(e)
    }
}
