mod common;
mod oracle;

use std::collections::BTreeMap;

use dhl_core::density::{
    correlated_set, fubini_majority, is_strongly_correlated, level_density_profile, min_fan_intersection_density,
    refine_selection, section_selection, Correlation, LevelSelection,
};
use dhl_core::product::ProductSubset;
use dhl_core::subtree::{initial_tree, push_forward, sample_strong, Stages};
use dhl_core::tree::{density, relative_density};
use dhl_core::{BranchingVector, Homogeneous, LevelSubset, Node, Rational, Tree, VectorStrongSubtree};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    oracle_correlated, oracle_minima, random_instance, random_levels, random_selection, sample_with_levels, single_source,
    two_stage_identity, Instance,
};

fn node(s: &str) -> Node {
    Node::parse(s, true).unwrap()
}

fn r(p: u128, q: u128) -> Rational {
    Rational::from_counts(p, q)
}

fn arb_level_subset(b: u32, max_level: usize) -> impl Strategy<Value = (u32, LevelSubset)> {
    (2..=b, 0..=max_level)
        .prop_flat_map(|(b, n)| {
            let size = (b as usize).pow(n as u32);
            (Just(b), Just(n), proptest::collection::vec(any::<bool>(), size))
        })
        .prop_map(|(b, n, bits)| {
            let nodes = (0..bits.len()).filter(|&i| bits[i]).map(|i| Node::from_rank(i, b, n)).collect();
            (b, LevelSubset::new(&Homogeneous::new(b).unwrap(), n, nodes).unwrap())
        })
}

proptest! {
    #[test]
    fn complement_densities_sum_to_one((b, f) in arb_level_subset(4, 4)) {
        let host = Homogeneous::new(b).unwrap();
        let c = f.complement(&host).unwrap();
        prop_assert_eq!(density(&host, &f).unwrap() + density(&host, &c).unwrap(), Rational::one());
    }

    #[test]
    fn relative_density_averages_to_density((b, f) in arb_level_subset(3, 4), cut in 0usize..5) {
        let host = Homogeneous::new(b).unwrap();
        let l = cut.min(f.level());
        let nodes = host.level_nodes(l).unwrap();
        let mut sum = Rational::zero();
        for t in &nodes {
            sum = sum + relative_density(&host, &f, t).unwrap();
        }
        let avg = &sum / &Rational::from(nodes.len() as u64);
        prop_assert_eq!(avg, density(&host, &f).unwrap());
        prop_assert_eq!(relative_density(&host, &f, &Node::root()).unwrap(), density(&host, &f).unwrap());
    }

    #[test]
    fn successor_levels_are_sorted_and_sized(b in 2u32..5, n in 0usize..5, seed in any::<u64>()) {
        let host = Homogeneous::new(b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.gen_range(0..=n);
        let t = Node::from_digits((0..len).map(|_| rng.gen_range(0..b)).collect());
        let succ = host.successors_in_level(&t, n).unwrap();
        prop_assert_eq!(succ.len(), (b as usize).pow((n - len) as u32));
        prop_assert!(succ.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(succ.iter().all(|s| t.is_prefix_of(s) && s.len() == n));
    }
}

#[test]
fn relative_density_examples() {
    let host = Homogeneous::new(2).unwrap();
    let f = LevelSubset::new(&host, 2, vec![node("00"), node("01"), node("10")]).unwrap();
    assert_eq!(relative_density(&host, &f, &node("0")).unwrap(), Rational::one());
    assert_eq!(relative_density(&host, &f, &node("1")).unwrap(), r(1, 2));
    assert_eq!(density(&host, &LevelSubset::new(&host, 3, oracle::level(2, 3)[..5].to_vec()).unwrap()).unwrap(), r(5, 8));
}

/// Sections at source level `n` only, from a list of node subsets of the target level.
fn selection_at(n: usize, target_levels: Vec<usize>, sections: &[Vec<Node>]) -> LevelSelection {
    let source = single_source(n + 1);
    let elements = source.level_product(n);
    let map = elements.into_iter().zip(sections.iter().cloned()).collect();
    LevelSelection::new(source, 2, target_levels, map).unwrap()
}

fn subsets(universe: &[Node]) -> Vec<Vec<Node>> {
    (0u32..1 << universe.len())
        .map(|m| (0..universe.len()).filter(|i| m >> i & 1 == 1).map(|i| universe[i].clone()).collect())
        .collect()
}

#[test]
fn majority_bound_on_all_small_selections() {
    for eta in [r(1, 4), r(1, 2), r(3, 4), Rational::one()] {
        let (en, ed) = (eta.numer().try_into().unwrap(), eta.denom().try_into().unwrap());
        for (n, levels) in [(0usize, vec![2usize]), (1, vec![0, 2]), (2, vec![0, 1, 2])] {
            let universe = oracle::level(2, levels[n]);
            let all = subsets(&universe);
            let dense: Vec<&Vec<Node>> =
                all.iter().filter(|s| r(s.len() as u128, universe.len() as u128) >= eta).collect();
            let sources = 1usize << n;
            let mut idx = vec![0usize; sources];
            loop {
                let sections: Vec<Vec<Node>> = idx.iter().map(|&i| dense[i].clone()).collect();
                let b = selection_at(n, levels.clone(), &sections);
                assert!(b.source().level_product(n).iter().all(|e| b.section_density(e).unwrap() >= eta));
                let rep = fubini_majority(&b, &eta, n).unwrap();
                assert!(rep.density >= &eta / &Rational::from(2u64));
                assert_eq!(rep.majority.len(), oracle::majority_count(&sections, &universe, en, ed));
                // odometer over the dense subsets
                let mut k = 0;
                while k < sources {
                    idx[k] += 1;
                    if idx[k] < dense.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == sources {
                    break;
                }
            }
        }
    }
}

#[test]
fn majority_of_full_and_disjoint_sections() {
    let universe = oracle::level(2, 3);
    let full = selection_at(2, vec![0, 1, 3], &vec![universe.clone(); 4]);
    assert_eq!(fubini_majority(&full, &r(1, 2), 2).unwrap().majority.nodes(), &universe[..]);
    // 8 sources with pairwise disjoint singleton sections: each w is hit once, below (1/2)(1/2)8 = 2
    let source = single_source(4);
    let elements = source.level_product(3);
    let map: BTreeMap<Vec<Node>, Vec<Node>> =
        elements.into_iter().zip(universe.iter()).map(|(e, w)| (e, vec![w.clone()])).collect();
    let sel = LevelSelection::new(source, 2, vec![0, 1, 2, 3], map).unwrap();
    let rep = fubini_majority(&sel, &r(1, 2), 3).unwrap();
    assert!(rep.majority.is_empty());
    assert!(!sel.is_dense(&r(1, 2)));
}

proptest! {
    #[test]
    fn majority_bound_seeded(seed in any::<u64>(), eta_idx in 0usize..3, n in 0usize..3, l in 3usize..5) {
        let eta = [r(1, 4), r(1, 2), r(3, 4)][eta_idx].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let universe = oracle::level(2, l);
        let need = (&eta * &Rational::from(universe.len() as u64)).ceil_u64().unwrap() as usize;
        let sections: Vec<Vec<Node>> = (0..1usize << n)
            .map(|_| {
                let extra = rng.gen_range(0..=universe.len() - need);
                let mut pick: Vec<Node> = universe.clone();
                for i in (1..pick.len()).rev() {
                    pick.swap(i, rng.gen_range(0..=i));
                }
                pick.truncate(need + extra);
                pick
            })
            .collect();
        let mut levels: Vec<usize> = (0..n).collect();
        levels.push(l);
        let b = selection_at(n, levels, &sections);
        let rep = fubini_majority(&b, &eta, n).unwrap();
        prop_assert!(rep.density >= &eta / &Rational::from(2u64));
        let en = eta.numer().try_into().unwrap();
        let ed = eta.denom().try_into().unwrap();
        prop_assert_eq!(rep.majority.len(), oracle::majority_count(&sections, &universe, en, ed));
    }
}

#[test]
fn section_example() {
    let b = BranchingVector::new(vec![2, 2]).unwrap();
    let mut d = ProductSubset::empty(b, 2).unwrap();
    for e in [["@", "@"], ["0", "0"], ["1", "0"], ["1", "1"]] {
        d.set(&[node(e[0]), node(e[1])], true).unwrap();
    }
    let sel = section_selection(&d, 1).unwrap();
    assert_eq!(sel.section(&[Node::root()]), &[Node::root()]);
    assert_eq!(sel.section(&[node("0")]), &[node("0")]);
    assert_eq!(sel.section(&[node("1")]), &[node("0"), node("1")]);
    let full = ProductSubset::full(BranchingVector::new(vec![2, 3]).unwrap(), 3).unwrap();
    let sel = section_selection(&full, 1).unwrap();
    assert!(sel.sections().values().all(|s| r(s.len() as u128, 3u128.pow(s[0].len() as u32)) == Rational::one()));
}

#[test]
fn correlation_matches_definition_and_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let thetas = [r(1, 64), r(1, 16), r(1, 8), r(1, 4), r(1, 2), Rational::one()];
    for _ in 0..300 {
        let inst = random_instance(&mut rng);
        let minima = oracle_minima(&inst);
        for p in 0..2u32 {
            let ours = min_fan_intersection_density(&inst.d, &inst.r, &inst.w, p).unwrap().map(|x| x.0);
            assert_eq!(ours, minima[p as usize]);
        }
        let mut prev = true;
        for theta in &thetas {
            let c = is_strongly_correlated(&inst.d, &inst.r, &inst.w, theta).unwrap();
            assert_eq!(c.holds(), oracle_correlated(&inst, theta));
            // once it fails it keeps failing as the threshold grows
            assert!(prev || !c.holds());
            prev = c.holds();
            if let Correlation::FanBelow { direction, density, fan } = &c {
                assert!(density < theta);
                assert_eq!(Some(density.clone()), minima[*direction as usize]);
                assert!(oracle::root_fans(&inst.r).contains(fan));
            }
        }
        let same_root = inst.r.truncate(2);
        for theta in &thetas {
            if is_strongly_correlated(&inst.d, &inst.r, &inst.w, theta).unwrap().holds() {
                assert!(is_strongly_correlated(&inst.d, &same_root, &inst.w, theta).unwrap().holds());
            }
        }
    }
}

#[test]
fn correlated_sets_filter_the_root_section() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..60 {
        let inst = random_instance(&mut rng);
        let mut prev: Option<LevelSubset> = None;
        for theta in [r(1, 32), r(1, 8), r(1, 2), Rational::one()] {
            let g = correlated_set(&inst.d, &inst.r, &theta).unwrap();
            let expected: Vec<Node> = inst
                .d
                .section(&inst.r.root())
                .iter()
                .filter(|w| oracle_correlated(&Instance { d: inst.d.clone(), r: inst.r.clone(), w: (*w).clone() }, &theta))
                .cloned()
                .collect();
            assert_eq!(g.nodes(), &expected[..]);
            if let Some(p) = &prev {
                assert!(g.nodes().iter().all(|w| p.contains(w)));
            }
            prev = Some(g);
        }
    }
}

#[test]
fn correlation_certificates() {
    let source = single_source(3);
    let full: BTreeMap<Vec<Node>, Vec<Node>> = (0..3)
        .flat_map(|j| source.level_product(j).into_iter().map(move |e| (e, oracle::level(2, j))))
        .collect();
    let d = LevelSelection::new(source.clone(), 2, vec![0, 1, 2], full).unwrap();
    let c = is_strongly_correlated(&d, &source, &Node::root(), &Rational::one()).unwrap();
    assert!(c.holds());
    let mut holes: BTreeMap<Vec<Node>, Vec<Node>> = d.sections().clone();
    holes.insert(vec![Node::root()], vec![]);
    let d = LevelSelection::new(source.clone(), 2, vec![0, 1, 2], holes).unwrap();
    assert_eq!(is_strongly_correlated(&d, &source, &Node::root(), &r(1, 2)).unwrap(), Correlation::NotInRootSection);
}

#[test]
fn one_stage_refinement_is_a_two_way_meet() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let source = single_source(4);
        let levels = random_levels(&mut rng, 4, 6);
        let d = random_selection(&mut rng, source.clone(), levels, 80);
        let k = rng.gen_range(2..=4);
        let rr = VectorStrongSubtree::single(sample_strong(2, 4, k, |m| rng.gen_range(0..m)));
        let refined = refine_selection(&d, &rr).unwrap();
        let st = Stages::new(source, vec![rr.clone()]).unwrap();
        let one = st.step_maps(0, &[1]).unwrap();
        for j in 0..refined.source().height() {
            for e in refined.source().level_product(j) {
                let moved = vec![one[0].apply(&e[0]).unwrap()];
                let meet: Vec<Node> = d.section(&e).iter().filter(|w| d.section(&moved).contains(w)).cloned().collect();
                assert_eq!(refined.section(&e), &meet[..]);
            }
        }
    }
}

#[test]
fn two_stage_refinement_is_the_meet_over_embeddings() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    // every two-stage configuration inside 2^<4
    let source = single_source(4);
    for r0 in oracle::brute_strong(2, 4, 3).into_iter().chain(oracle::brute_strong(2, 4, 4)) {
        let s1 = dhl_core::subtree::subtree_at_direction(&r0, 0).unwrap();
        for k in 2..=s1.height() {
            for words in oracle::brute_strong(2, s1.height(), k) {
                let r1 = push_forward(&s1, &words).unwrap();
                let st = Stages::new(
                    source.clone(),
                    vec![VectorStrongSubtree::single(r0.clone()), VectorStrongSubtree::single(r1)],
                )
                .unwrap();
                let levels = random_levels(&mut rng, 4, 5);
                let d = random_selection(&mut rng, source.clone(), levels, 85);
                two_stage_identity(&st, &d, 1);
            }
        }
    }
    for _ in 0..40 {
        let src = VectorStrongSubtree::new(vec![initial_tree(2, 5), initial_tree(2, 5)]).unwrap();
        let a = sample_strong(2, 5, 3, |m| rng.gen_range(0..m));
        let b = sample_with_levels(&mut rng, a.level_set());
        let r0 = VectorStrongSubtree::new(vec![a, b]).unwrap();
        let s1 = dhl_core::subtree::vector_at_direction(&r0, &[0, 0]).unwrap();
        let st = Stages::new(src.clone(), vec![r0, s1]).unwrap();
        let levels = random_levels(&mut rng, 5, 6);
        let d = random_selection(&mut rng, src, levels, 90);
        two_stage_identity(&st, &d, 2);
    }
}

#[test]
fn refinement_density_bound_on_seeded_instances() {
    // if every w of a set G of level-l nodes is θ-correlated with (R, D), then each
    // refined section has density at least |G|·b·θ / b^(l+1)
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut checked = 0;
    for _ in 0..200 {
        let source = single_source(4);
        let levels = random_levels(&mut rng, 4, 6);
        let d = random_selection(&mut rng, source, levels.clone(), 90);
        let k = rng.gen_range(2..=4);
        let rr = VectorStrongSubtree::single(sample_strong(2, 4, k, |m| rng.gen_range(0..m)));
        let l = levels[rr.level_set()[0]];
        let mut theta: Option<Rational> = None;
        let mut g = Vec::new();
        for w in d.section(&rr.root()) {
            if let Correlation::Correlated { min: Some(m) } = is_strongly_correlated(&d, &rr, w, &r(1, 1024)).unwrap() {
                theta = Some(theta.map_or(m.clone(), |t| t.min(m)));
                g.push(w.clone());
            }
        }
        let Some(theta) = theta else { continue };
        let refined = refine_selection(&d, &rr).unwrap();
        let bound = &(&theta * &Rational::from(2 * g.len() as u64)) / &Rational::from(1u64 << (l + 1));
        for (e, sec) in refined.sections() {
            let j = refined.source_level_of(e).unwrap();
            let size = 1u128 << refined.target_levels()[j];
            assert!(r(sec.len() as u128, size) >= bound);
        }
        checked += 1;
    }
    assert!(checked > 20);
}

#[test]
fn profiles_of_simple_sets() {
    let b = BranchingVector::new(vec![2]).unwrap();
    for p in level_density_profile(&ProductSubset::full(b.clone(), 5).unwrap()) {
        assert_eq!(p.level_density, Rational::one());
        assert_eq!(p.initial_density, Rational::one());
        assert_eq!(p.chain_density, Some(Rational::one()));
    }
    for p in level_density_profile(&ProductSubset::empty(b.clone(), 5).unwrap()) {
        assert!(p.level_density.is_zero() && p.initial_density.is_zero());
        assert_eq!(p.chain_density, Some(Rational::zero()));
    }
}

/// `(1/|T(n)|) Σ_t |D ∩ {s ≤ t}| / (n+1)` by a double loop over nodes.
fn chain_oracle(d: &ProductSubset, n: usize) -> Rational {
    let top = oracle::level(2, n);
    let all = oracle::all_nodes(2, n + 1);
    let mut total = 0u128;
    for t in &top {
        total += all.iter().filter(|s| s.is_prefix_of(t) && d.contains(std::slice::from_ref(s))).count() as u128;
    }
    r(total, top.len() as u128 * (n as u128 + 1))
}

#[test]
fn chain_density_of_a_branch() {
    let b = BranchingVector::new(vec![2]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let branch: Vec<u32> = (0..6).map(|_| rng.gen_range(0..2)).collect();
        let d = ProductSubset::from_fn(b.clone(), 7, |m, e| e[0].digits() == &branch[..m]).unwrap();
        for p in level_density_profile(&d) {
            assert_eq!(p.chain_density, Some(chain_oracle(&d, p.level)));
        }
    }
}

proptest! {
    #[test]
    fn profile_values_match_direct_counts(seed in any::<u64>(), h in 1usize..6) {
        let b = BranchingVector::new(vec![2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = rng.gen_range(0..=100);
        let d = ProductSubset::from_fn(b, h, |_, _| rng.gen_range(0..100) < q).unwrap();
        let prof = level_density_profile(&d);
        let mut best = Rational::zero();
        for p in &prof {
            prop_assert_eq!(p.chain_density.clone(), Some(chain_oracle(&d, p.level)));
            if p.level_density > best {
                best = p.level_density.clone();
            }
            // the initial density is a weighted average of the level densities so far
            prop_assert!(best >= p.initial_density);
        }
    }
}
