//! Seeded instance generators and identity checks shared by the integration
//! tests and the acceptance run.

#![allow(dead_code)]

use std::collections::BTreeMap;

use dhl_core::density::{refine_selection, LevelSelection};
use dhl_core::subtree::{direction_words, initial_tree, sample_strong, subtree_at_direction, Stages};
use dhl_core::{BranchingVector, Node, Rational, StrongSubtree, VectorStrongSubtree};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn bv(b: &[u32]) -> BranchingVector {
    BranchingVector::new(b.to_vec()).unwrap()
}

pub fn r(p: u128, q: u128) -> Rational {
    Rational::from_counts(p, q)
}

pub fn stage_configurations(host_height: usize) -> Vec<Stages> {
    let s0 = VectorStrongSubtree::single(initial_tree(2, host_height));
    let mut out = Vec::new();
    for r0 in crate::oracle::brute_strong(2, host_height, 3).into_iter().chain(
        (4..=host_height).flat_map(|k| crate::oracle::brute_strong(2, host_height, k)),
    ) {
        let s1 = subtree_at_direction(&r0, 0).unwrap();
        // strong subtrees of S_1 of height at least 2, through word coordinates
        for k in 2..=s1.height() {
            for words in crate::oracle::brute_strong(2, s1.height(), k) {
                let r1 = dhl_core::subtree::push_forward(&s1, &words).unwrap();
                let st = Stages::new(
                    s0.clone(),
                    vec![VectorStrongSubtree::single(r0.clone()), VectorStrongSubtree::single(r1)],
                )
                .unwrap();
                out.push(st);
            }
        }
    }
    out
}

/// A strong subtree of `2^<N` with the given level set, digits drawn from `rng`.
pub fn sample_with_levels(rng: &mut ChaCha8Rng, level_set: &[usize]) -> StrongSubtree {
    let k = level_set.len();
    let mut levels = vec![vec![Node::from_digits((0..level_set[0]).map(|_| rng.gen_range(0..2)).collect())]];
    for j in 1..k {
        let mut next = Vec::new();
        for t in &levels[j - 1] {
            for p in 0..2 {
                let mut d = t.child(p).digits().to_vec();
                while d.len() < level_set[j] {
                    d.push(rng.gen_range(0..2));
                }
                next.push(Node::from_digits(d));
            }
        }
        levels.push(next);
    }
    StrongSubtree::new(level_set.to_vec(), levels)
}

pub fn single_source(h: usize) -> VectorStrongSubtree {
    VectorStrongSubtree::single(initial_tree(2, h))
}

/// A random selection on `source` with target levels `levels` and inclusion probability `q` in percent.
pub fn random_selection(rng: &mut ChaCha8Rng, source: VectorStrongSubtree, levels: Vec<usize>, q: u32) -> LevelSelection {
    let mut map = BTreeMap::new();
    for (j, &l) in levels.iter().enumerate() {
        let universe = crate::oracle::level(2, l);
        for e in source.level_product(j) {
            let pick: Vec<Node> = universe.iter().filter(|_| rng.gen_range(0..100) < q).cloned().collect();
            map.insert(e, pick);
        }
    }
    LevelSelection::new(source, 2, levels, map).unwrap()
}

pub fn random_levels(rng: &mut ChaCha8Rng, count: usize, max: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=max).collect();
    while v.len() > count {
        v.remove(rng.gen_range(0..v.len()));
    }
    v
}

pub struct Instance {
    pub d: LevelSelection,
    pub r: VectorStrongSubtree,
    pub w: Node,
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let h = 4;
    let dim = if rng.gen_bool(0.3) { 2 } else { 1 };
    let source = VectorStrongSubtree::new(vec![initial_tree(2, h); dim]).unwrap();
    let levels = random_levels(rng, h, 5);
    let q = [50, 70, 85, 95][rng.gen_range(0..4)];
    let d = random_selection(rng, source, levels.clone(), q);
    let k = rng.gen_range(2..=3);
    let first = sample_strong(2, h, k, |m| rng.gen_range(0..m));
    let mut coords = vec![first.clone()];
    for _ in 1..dim {
        coords.push(sample_with_levels(rng, first.level_set()));
    }
    let r = VectorStrongSubtree::new(coords).unwrap();
    let l_root = levels[r.level_set()[0]];
    let root_sec = d.section(&r.root()).to_vec();
    let w = if !root_sec.is_empty() && rng.gen_bool(0.8) {
        root_sec[rng.gen_range(0..root_sec.len())].clone()
    } else {
        let all = crate::oracle::level(2, l_root);
        all[rng.gen_range(0..all.len())].clone()
    };
    Instance { d, r, w }
}

/// Minimum fan density per direction, straight from the definition.
pub fn oracle_minima(inst: &Instance) -> Vec<Option<Rational>> {
    let fans = crate::oracle::root_fans(&inst.r);
    (0..2u32)
        .map(|p| {
            let cone = inst.w.child(p);
            fans.iter()
                .map(|f| {
                    let top = crate::oracle::level_elements(f, 1);
                    let l = inst.d.target_levels()[inst.d.source().level_set().iter().position(|&x| x == f.level_set()[1]).unwrap()];
                    let universe = crate::oracle::level(2, l);
                    let above: Vec<&Node> = universe.iter().filter(|t| cone.is_prefix_of(t)).collect();
                    let hits = above.iter().filter(|t| top.iter().all(|e| inst.d.section(e).contains(t))).count();
                    r(hits as u128, above.len() as u128)
                })
                .min()
        })
        .collect()
}

pub fn oracle_correlated(inst: &Instance, theta: &Rational) -> bool {
    inst.d.section(&inst.r.root()).contains(&inst.w)
        && oracle_minima(inst).iter().all(|m| m.as_ref().is_none_or(|v| v >= theta))
}

pub fn two_stage_identity(st: &Stages, d: &LevelSelection, dim: usize) {
    let d1 = refine_selection(d, st.r(0)).unwrap();
    let d2 = refine_selection(&d1, st.r(1)).unwrap();
    let s2 = st.s(2);
    assert_eq!(d2.source(), &s2);
    let words = direction_words(&vec![2; dim], 2);
    for j in 0..s2.height() {
        for e in crate::oracle::level_elements(&s2, j) {
            let mut meet: Option<Vec<Node>> = None;
            for u in &words {
                let image = st.apply_word(u, &e).unwrap();
                let sec = d.section(&image).to_vec();
                meet = Some(match meet {
                    None => sec,
                    Some(m) => m.into_iter().filter(|w| sec.contains(w)).collect(),
                });
            }
            assert_eq!(d2.section(&e), &meet.unwrap()[..]);
            assert!(d2.section(&e).iter().all(|w| d.section(&e).contains(w)));
        }
    }
}

/// Level-product elements of `(b_1^<n, …)` grouped by level, built from the oracle's node lists.
pub fn elements(b: &[u32], n: usize) -> Vec<Vec<Vec<Node>>> {
    (0..n)
        .map(|m| {
            let mut out: Vec<Vec<Node>> = vec![Vec::new()];
            for &bi in b {
                out = out
                    .into_iter()
                    .flat_map(|e| {
                        crate::oracle::level(bi, m).into_iter().map(move |t| {
                            let mut e = e.clone();
                            e.push(t);
                            e
                        })
                    })
                    .collect();
            }
            out
        })
        .collect()
}

/// The first subtree in lex order whose level product satisfies `inside`.
pub fn oracle_first(all: &[VectorStrongSubtree], inside: impl Fn(&VectorStrongSubtree) -> bool) -> Option<VectorStrongSubtree> {
    all.iter().find(|v| inside(v)).cloned()
}

/// `f(n,k)` by scanning every subset of the level product, using bitmasks.
pub fn extremal_oracle(b: &[u32], n: usize, k: usize) -> Rational {
    let levels = elements(b, n);
    let mut index = BTreeMap::new();
    let mut level_masks = Vec::new();
    for lvl in &levels {
        let mut mask = 0u64;
        for e in lvl {
            mask |= 1 << index.len();
            index.insert(e.clone(), index.len());
        }
        level_masks.push(mask);
    }
    let subtree_masks: Vec<u64> = crate::oracle::brute_vector(b, n, k)
        .iter()
        .map(|v| {
            (0..v.height())
                .flat_map(|j| crate::oracle::level_elements(v, j))
                .fold(0u64, |m, e| m | 1 << index[&e])
        })
        .collect();
    let total = index.len();
    assert!(total <= 22);
    let mut best = Rational::zero();
    for d in 0u64..1 << total {
        if subtree_masks.iter().any(|&s| s & !d == 0) {
            continue;
        }
        let min = level_masks
            .iter()
            .map(|&m| r((d & m).count_ones() as u128, m.count_ones() as u128))
            .min()
            .unwrap();
        if min > best {
            best = min;
        }
    }
    best
}

/// Two stages on `(2^<h, 2^<h)`: a sampled `R_0` of height 3 or 4 and an `R_1` inside `S_1`.
pub fn seeded_stages_2d(rng: &mut ChaCha8Rng, h: usize) -> Stages {
    let s0 = VectorStrongSubtree::new(vec![initial_tree(2, h), initial_tree(2, h)]).unwrap();
    let k0 = rng.gen_range(3..=4);
    let a = sample_strong(2, h, k0, |m| rng.gen_range(0..m));
    let b = sample_with_levels(rng, a.level_set());
    let r0 = VectorStrongSubtree::new(vec![a, b]).unwrap();
    let s1 = dhl_core::subtree::vector_at_direction(&r0, &[0, 0]).unwrap();
    let k1 = rng.gen_range(2..=s1.height());
    let w0 = sample_strong(2, s1.height(), k1, |m| rng.gen_range(0..m));
    let w1 = sample_with_levels(rng, w0.level_set());
    let r1 = VectorStrongSubtree::new(vec![
        dhl_core::subtree::push_forward(&s1.coords()[0], &w0).unwrap(),
        dhl_core::subtree::push_forward(&s1.coords()[1], &w1).unwrap(),
    ])
    .unwrap();
    Stages::new(s0, vec![r0, r1]).unwrap()
}

/// `H_{u⌢p} = H_u ∘ CI(S_{n+1}, S_{n+1}[p])` node-wise on `S_{n+1}`, for both the
/// stored embedding and direct word application.
pub fn check_composition(st: &Stages, branching: &[u32]) {
    for n in 0..st.len() {
        let next = st.s(n + 1);
        for u in direction_words(branching, n) {
            let hu = st.embedding(&u).unwrap();
            for p in direction_words(branching, 1) {
                let mut up = u.clone();
                up.push(p[0].clone());
                let hup = st.embedding(&up).unwrap();
                let ci = st.step_maps(n, &p[0]).unwrap();
                for j in 0..next.height() {
                    for e in crate::oracle::level_elements(&next, j) {
                        let moved: Vec<Node> = e.iter().zip(&ci).map(|(t, m)| m.apply(t).unwrap()).collect();
                        let via = hu.apply(&moved).unwrap();
                        assert_eq!(hup.apply(&e).unwrap(), via);
                        assert_eq!(st.apply_word(&up, &e).unwrap(), via);
                    }
                }
            }
        }
    }
}
