//! Definition-level oracles. Nothing here uses the library's search,
//! validation, enumeration or canonical-map code; only `Node` and plain sets.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dhl_core::{Node, StrongSubtree, VectorStrongSubtree};

/// All nodes of `b^<n`, by length and then lex.
pub fn all_nodes(b: u32, n: usize) -> Vec<Node> {
    let mut out = vec![Node::root()];
    let mut frontier = vec![Node::root()];
    for _ in 1..n {
        let next: Vec<Node> = frontier.iter().flat_map(|t| (0..b).map(move |p| t.child(p))).collect();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    if n == 0 {
        out.clear();
    }
    out
}

pub fn level(b: u32, n: usize) -> Vec<Node> {
    all_nodes(b, n + 1).into_iter().filter(|t| t.len() == n).collect()
}

fn strictly_below(s: &Node, t: &Node) -> bool {
    s.len() < t.len() && t.digits()[..s.len()] == *s.digits()
}

/// Reads a node set as a tree under the prefix order and checks the three
/// strong-subtree conditions against a host whose branching at `t` is `branching(t)`.
/// Returns the levels when the set is a strong subtree.
pub fn strong_shape(branching: &dyn Fn(&Node) -> u32, nodes: &BTreeSet<Node>) -> Option<StrongSubtree> {
    if nodes.is_empty() {
        return None;
    }
    let mut by_level: BTreeMap<usize, Vec<Node>> = BTreeMap::new();
    for t in nodes {
        let depth = nodes.iter().filter(|s| strictly_below(s, t)).count();
        by_level.entry(depth).or_default().push(t.clone());
    }
    // a unique root
    if by_level.get(&0).map_or(0, Vec::len) != 1 {
        return None;
    }
    // every tree level inside one host level
    let mut level_set = Vec::new();
    let mut levels = Vec::new();
    for (j, (&depth, ts)) in by_level.iter().enumerate() {
        if depth != j || ts.iter().any(|t| t.len() != ts[0].len()) {
            return None;
        }
        level_set.push(ts[0].len());
        levels.push(ts.clone());
    }
    // one node above each immediate successor of every non-top node
    for j in 0..levels.len().saturating_sub(1) {
        for s in &levels[j] {
            for p in 0..branching(s) {
                let cone = s.child(p);
                let hits = levels[j + 1].iter().filter(|t| cone == **t || strictly_below(&cone, t)).count();
                if hits != 1 {
                    return None;
                }
            }
        }
    }
    Some(StrongSubtree::new(level_set, levels))
}

/// Every strong subtree of `b^<n` of height `k`, found by scanning node subsets of the right size.
pub fn brute_strong(b: u32, n: usize, k: usize) -> Vec<StrongSubtree> {
    let nodes = all_nodes(b, n);
    assert!(nodes.len() <= 24, "host too large for subset scanning");
    let size: usize = (0..k).map(|j| (b as usize).pow(j as u32)).sum();
    let mut out = Vec::new();
    for mask in 0u32..(1 << nodes.len()) {
        if mask.count_ones() as usize != size {
            continue;
        }
        let set: BTreeSet<Node> = (0..nodes.len()).filter(|i| mask >> i & 1 == 1).map(|i| nodes[i].clone()).collect();
        if let Some(s) = strong_shape(&|_| b, &set) {
            if s.height() == k {
                out.push(s);
            }
        }
    }
    out.sort_by_key(|x| sort_key(std::slice::from_ref(x)));
    out
}

/// Vector strong subtrees of `(b_1^<n, …, b_d^<n)` of height `k`: tuples of brute-force subtrees with equal level sets.
pub fn brute_vector(branching: &[u32], n: usize, k: usize) -> Vec<VectorStrongSubtree> {
    let lists: Vec<Vec<StrongSubtree>> = branching.iter().map(|&b| brute_strong(b, n, k)).collect();
    let mut tuples: Vec<Vec<StrongSubtree>> = vec![Vec::new()];
    for list in &lists {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                let first_levels = t.first().map(|f: &StrongSubtree| f.level_set().to_vec());
                list.iter()
                    .filter(move |s| first_levels.as_ref().is_none_or(|ls| ls == s.level_set()))
                    .map(move |s| {
                        let mut t = t.clone();
                        t.push(s.clone());
                        t
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    let mut out: Vec<VectorStrongSubtree> = tuples.into_iter().map(|t| VectorStrongSubtree::new(t).unwrap()).collect();
    out.sort_by_key(|v| sort_key(v.coords()));
    out
}

/// Level set, then per level the node lists of every coordinate.
pub fn sort_key(coords: &[StrongSubtree]) -> (Vec<usize>, Vec<Vec<Node>>) {
    let ls = coords[0].level_set().to_vec();
    let mut nodes = Vec::new();
    for j in 0..ls.len() {
        for c in coords {
            nodes.push(c.level(j).to_vec());
        }
    }
    (ls, nodes)
}

/// Every element of the level product of `v` at level `j`, by direct cartesian product.
pub fn level_elements(v: &VectorStrongSubtree, j: usize) -> Vec<Vec<Node>> {
    let mut out: Vec<Vec<Node>> = vec![Vec::new()];
    for c in v.coords() {
        out = out
            .into_iter()
            .flat_map(|e| {
                c.level(j).iter().map(move |t| {
                    let mut e = e.clone();
                    e.push(t.clone());
                    e
                })
            })
            .collect();
    }
    out
}

pub fn level_product_inside(v: &VectorStrongSubtree, mut inside: impl FnMut(&[Node]) -> bool) -> bool {
    (0..v.height()).all(|j| level_elements(v, j).iter().all(|e| inside(e)))
}

/// Fans of a one-dimensional strong subtree `r` rooted at its root, read off the
/// definition: a root and, on one later level of `r`, exactly one node of `r`
/// above each level-1 node of `r`.
pub fn root_fans_1d(r: &StrongSubtree) -> Vec<StrongSubtree> {
    let root = r.level(0)[0].clone();
    let mut out = Vec::new();
    if r.height() < 2 {
        return out;
    }
    let succ = r.level(1);
    for j in 1..r.height() {
        let cands = r.level(j);
        // one choice per level-1 node
        let mut picks: Vec<Vec<Node>> = vec![Vec::new()];
        for c in succ {
            let above: Vec<&Node> = cands.iter().filter(|t| *t == c || strictly_below(c, t)).collect();
            picks = picks
                .into_iter()
                .flat_map(|p| {
                    above.iter().map(move |t| {
                        let mut p = p.clone();
                        p.push((*t).clone());
                        p
                    })
                })
                .collect();
        }
        for top in picks {
            out.push(StrongSubtree::new(vec![r.level_set()[0], r.level_set()[j]], vec![vec![root.clone()], top]));
        }
    }
    out
}

/// Vector fans rooted at the root of `r`: per-coordinate fans with a common top level.
pub fn root_fans(r: &VectorStrongSubtree) -> Vec<VectorStrongSubtree> {
    let per: Vec<Vec<StrongSubtree>> = r.coords().iter().map(root_fans_1d).collect();
    let mut out = Vec::new();
    for top in r.level_set().iter().skip(1) {
        let mut tuples: Vec<Vec<StrongSubtree>> = vec![Vec::new()];
        for fans in &per {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    fans.iter().filter(|f| f.level_set()[1] == *top).map(move |f| {
                        let mut t = t.clone();
                        t.push(f.clone());
                        t
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|t| VectorStrongSubtree::new(t).unwrap()));
    }
    out
}

/// The majority rule counted directly: `w` is kept when at least `(η/2)·|sources|` sections contain it.
pub fn majority_count(sections: &[Vec<Node>], universe: &[Node], eta_num: u64, eta_den: u64) -> usize {
    let sources = sections.len() as u64;
    universe
        .iter()
        .filter(|w| {
            let c = sections.iter().filter(|s| s.contains(w)).count() as u64;
            2 * c * eta_den >= eta_num * sources
        })
        .count()
}
