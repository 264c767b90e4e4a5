#![no_std]
//! Exact combinatorics of strong subtrees, fans and dense level selections on
//! finite homogeneous and explicit trees.

extern crate alloc;

pub mod counterexamples;
pub mod density;
pub mod enumerate;
pub mod fans;
pub mod product;
pub mod rational;
pub mod search;
pub mod subtree;
pub mod tree;

pub use enumerate::{Budget, Containment, Outcome, SearchOutcome};
pub use rational::Rational;
pub use subtree::{CanonicalMap, StrongSubtree, VectorStrongSubtree, Violation};
pub use tree::{BranchingVector, ExplicitTree, Homogeneous, LevelSubset, Node, Tree, TreeError};
