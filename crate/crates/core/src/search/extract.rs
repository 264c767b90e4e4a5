//! Greedy stage-by-stage extraction of a strong subtree of `b^<N` from dense levels.
//!
//! A node chosen at subtree level `j < K-1` must see relative density at least
//! `ε_j` above each of its immediate successors on every later provided level
//! still in play (at least `w_min` of them), where `ε_0 = ε²/8b⁴` and
//! `ε_{j+1} = ε_j²/8b⁴`. Nodes of one subtree level share a host level, and
//! within a candidate level each slot takes its lex-least admissible node.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use crate::rational::Rational;
use crate::subtree::{validate_strong, StrongSubtree};
use crate::tree::{relative_density, Homogeneous, LevelSubset, Node};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    pub stage: usize,
    pub level: usize,
    pub nodes: Vec<Node>,
    /// The threshold the nodes were checked against, `None` for the top stage.
    pub threshold: Option<Rational>,
    /// Provided levels the threshold was checked on.
    pub checked_levels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtractResult {
    Witness(StrongSubtree),
    /// No candidate level admitted a full stage.
    Failed { stage: usize, threshold: Option<Rational> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractReport {
    /// `ε_0, …, ε_{K-1}`.
    pub thresholds: Vec<Rational>,
    /// `⌈2b²/ε⌉`.
    pub window: BigUint,
    pub stages: Vec<StageRecord>,
    pub result: ExtractResult,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtractError {
    Malformed(String),
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::Malformed(m) => write!(f, "malformed extraction input: {m}"),
        }
    }
}

impl core::error::Error for ExtractError {}

/// `ε_0 = ε²/8b⁴` and `ε_{j+1} = ε_j²/8b⁴`, `count` terms.
pub fn stage_thresholds(epsilon: &Rational, b: u32, count: usize) -> Vec<Rational> {
    let scale = Rational::from(8 * (b as u64).pow(4));
    let mut out = Vec::with_capacity(count);
    let mut cur = epsilon.clone();
    for _ in 0..count {
        cur = &(&cur * &cur) / &scale;
        out.push(cur.clone());
    }
    out
}

/// `⌈2b²/ε⌉`.
pub fn window_size(epsilon: &Rational, b: u32) -> BigUint {
    let w = &Rational::from(2 * (b as u64).pow(2)) / epsilon;
    w.ceil().to_biguint().expect("positive")
}

pub fn extract_1d(
    b: u32,
    levels: &[LevelSubset],
    epsilon: &Rational,
    height: usize,
    w_min: usize,
) -> Result<ExtractReport, ExtractError> {
    let host = Homogeneous::new(b).map_err(|e| ExtractError::Malformed(alloc::format!("{e}")))?;
    if !epsilon.is_positive() || epsilon > &Rational::one() {
        return Err(ExtractError::Malformed("epsilon must lie in (0, 1]".into()));
    }
    if height == 0 {
        return Err(ExtractError::Malformed("target height must be at least 1".into()));
    }
    if levels.windows(2).any(|w| w[0].level() >= w[1].level()) {
        return Err(ExtractError::Malformed("levels are not strictly increasing".into()));
    }
    for l in levels {
        let dens = l.density(&host).map_err(|e| ExtractError::Malformed(alloc::format!("{e}")))?;
        if &dens < epsilon {
            return Err(ExtractError::Malformed(alloc::format!("level {} has density {dens} below {epsilon}", l.level())));
        }
    }
    let thresholds = stage_thresholds(epsilon, b, height);
    let window = window_size(epsilon, b);
    let mut stages: Vec<StageRecord> = Vec::new();
    let mut remaining: &[LevelSubset] = levels;
    let mut frontier: Vec<Node> = Vec::new();
    for stage in 0..height {
        let threshold = (stage + 1 < height).then(|| thresholds[stage].clone());
        let mut chosen = None;
        for (i, cand) in remaining.iter().enumerate() {
            let later = &remaining[i + 1..];
            if threshold.is_some() && later.len() < w_min {
                break;
            }
            let cone_tops: Vec<Node> = if stage == 0 {
                alloc::vec![Node::root()]
            } else {
                frontier.iter().flat_map(|t| (0..b).map(move |p| t.child(p))).collect()
            };
            let mut nodes = Vec::with_capacity(cone_tops.len());
            for top in &cone_tops {
                let pick = cand.nodes().iter().find(|s| {
                    top.is_prefix_of(s) && threshold.as_ref().is_none_or(|th| admissible(&host, s, b, later, th))
                });
                match pick {
                    Some(s) => nodes.push(s.clone()),
                    None => break,
                }
            }
            if nodes.len() == cone_tops.len() {
                chosen = Some((i, nodes));
                break;
            }
        }
        let Some((i, nodes)) = chosen else {
            return Ok(ExtractReport { thresholds, window, stages, result: ExtractResult::Failed { stage, threshold } });
        };
        let later = &remaining[i + 1..];
        stages.push(StageRecord {
            stage,
            level: remaining[i].level(),
            nodes: nodes.clone(),
            threshold,
            checked_levels: later.iter().map(LevelSubset::level).collect(),
        });
        frontier = nodes;
        remaining = later;
    }
    let s = StrongSubtree::new(
        stages.iter().map(|s| s.level).collect(),
        stages.iter().map(|s| s.nodes.clone()).collect(),
    );
    debug_assert!(validate_strong(&host, &s).is_ok());
    Ok(ExtractReport { thresholds, window, stages, result: ExtractResult::Witness(s) })
}

fn admissible(host: &Homogeneous, s: &Node, b: u32, later: &[LevelSubset], threshold: &Rational) -> bool {
    later.iter().all(|d| {
        (0..b).all(|p| relative_density(host, d, &s.child(p)).is_ok_and(|v| &v >= threshold))
    })
}
