mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taxoeval_core::alignment::{align, is_match, normalize_title, DEFAULT_ALIGNMENT_THRESHOLD};
use taxoeval_core::embedding::{renaming_cost, sim};
use taxoeval_core::hierarchy::{sem_path_cost, us_ted};
use taxoeval_core::partition::{
    ari, extend_e2e, homogeneity_completeness_v, leaf_scores, restrict_to_intersection, ContingencyTable,
};
use taxoeval_core::perturb::{contract_node, shuffle_siblings, split_leaf};
use taxoeval_core::soft_cardinality::{collect_labels, nsr_nsp_f1, soft_cardinality};
use taxoeval_core::synth::random_taxonomy;
use taxoeval_core::taxonomy::{parse_taxonomy, ParseMode};
use taxoeval_core::{CategoryHierarchy, EncoderSimilarity, HashEncoder};

fn hash() -> EncoderSimilarity<HashEncoder> {
    EncoderSimilarity::new(HashEncoder::default())
}

/// Label path of the first terminal node holding at least two papers.
fn splittable_leaf(node: &taxoeval_core::CategoryNode, prefix: &str) -> Option<String> {
    for c in node.children() {
        let path = if prefix.is_empty() { c.label().to_string() } else { format!("{prefix}>{}", c.label()) };
        if c.is_terminal() && c.papers().len() >= 2 {
            return Some(path);
        }
        if let Some(p) = splittable_leaf(c, &path) {
            return Some(p);
        }
    }
    None
}

fn h(t: &Tree) -> CategoryHierarchy {
    CategoryHierarchy::new(t.to_node())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn similarity_is_clipped_and_symmetric(a in "[a-z]{1,6}( [a-z]{1,6}){0,3}", b in "[a-z]{1,6}( [a-z]{1,6}){0,3}") {
        let p = hash();
        let s = sim(&a, &b, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, sim(&b, &a, &p).unwrap());
        prop_assert_eq!(sim(&a, &a, &p).unwrap(), 1.0);
        prop_assert_eq!(renaming_cost(&a, &a, &p).unwrap(), 0.0);
    }

    #[test]
    fn us_ted_symmetric_and_bounded(seed in any::<u64>(), n1 in 1usize..12, n2 in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = pool();
        let table = RandomSim::new(&mut rng, &labels).table();
        let a = random_tree(&mut rng, n1, &labels);
        let b = random_tree(&mut rng, n2, &labels);
        let ab = us_ted(&h(&a), &h(&b), &table).unwrap();
        let ba = us_ted(&h(&b), &h(&a), &table).unwrap();
        prop_assert!((ab.us_ted - ba.us_ted).abs() < 1e-9);
        prop_assert!(ab.us_ted >= 0.0 && ab.us_ted <= (n1 + n2) as f64);
        prop_assert!((0.0..=1.0).contains(&ab.us_nted));
        prop_assert_eq!(ab.node_counts, (n1, n2));
    }

    #[test]
    fn sibling_shuffles_are_invisible(seed in any::<u64>(), n in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = pool();
        let table = RandomSim::new(&mut rng, &labels).table();
        let t = random_tree(&mut rng, n, &labels);
        let other = random_tree(&mut rng, n, &labels);
        let shuffled = shuffle_tree(&mut rng, &t);
        prop_assert!(us_ted(&h(&t), &h(&shuffled), &table).unwrap().us_ted.abs() < 1e-9);
        let d1 = us_ted(&h(&other), &h(&t), &table).unwrap().us_ted;
        let d2 = us_ted(&h(&other), &h(&shuffled), &table).unwrap().us_ted;
        prop_assert!((d1 - d2).abs() < 1e-9);
    }

    #[test]
    fn path_cost_strictly_increases_in_lambda(seed in any::<u64>(), m in 1usize..5, extra in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = pool();
        let table = RandomSim::new(&mut rng, &labels).table();
        let s: Vec<String> = (0..m).map(|_| labels[rng.random_range(0..8)].clone()).collect();
        let t: Vec<String> = (0..m + extra).map(|_| labels[rng.random_range(0..8)].clone()).collect();
        let lo = sem_path_cost(&s, &t, 0.5, &table).unwrap();
        let hi = sem_path_cost(&s, &t, 1.5, &table).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn path_cost_orientation_is_irrelevant(seed in any::<u64>(), m in 1usize..6, n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = pool();
        let table = RandomSim::new(&mut rng, &labels).table();
        let s: Vec<String> = (0..m).map(|_| labels[rng.random_range(0..8)].clone()).collect();
        let t: Vec<String> = (0..n).map(|_| labels[rng.random_range(0..8)].clone()).collect();
        let a = sem_path_cost(&s, &t, 1.0, &table).unwrap();
        let b = sem_path_cost(&t, &s, 1.0, &table).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn ari_symmetric_and_relabel_invariant(seed in any::<u64>(), n in 2usize..40, k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_labels(&mut rng, n, k);
        let y = random_labels(&mut rng, n, k);
        let a = ari(&ContingencyTable::from_labels(&x, &y));
        let b = ari(&ContingencyTable::from_labels(&y, &x));
        let renamed: Vec<usize> = x.iter().map(|v| 100 - v).collect();
        let c = ari(&ContingencyTable::from_labels(&renamed, &y));
        prop_assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&a));
        prop_assert_eq!(ari(&ContingencyTable::from_labels(&x, &x)), 1.0);
    }

    #[test]
    fn v_measure_in_unit_interval(seed in any::<u64>(), n in 1usize..40, k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_labels(&mut rng, n, k);
        let y = random_labels(&mut rng, n, k);
        let v = homogeneity_completeness_v(&ContingencyTable::from_labels(&x, &y));
        for value in [v.homogeneity, v.completeness, v.v_measure] {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&value));
        }
        prop_assert_eq!(v.v_measure == 0.0, v.homogeneity * v.completeness == 0.0);
    }

    #[test]
    fn soft_cardinality_permutation_and_bound(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = pool();
        let table = RandomSim::new(&mut rng, &labels).table();
        let a: Vec<String> = (0..n).map(|_| labels[rng.random_range(0..8)].clone()).collect();
        let mut b = a.clone();
        b.reverse();
        let ca = soft_cardinality(&a, &table).unwrap();
        prop_assert!(ca <= n as f64 + 1e-12 && ca > 0.0);
        prop_assert!((ca - soft_cardinality(&b, &table).unwrap()).abs() < 1e-9);
        let r = nsr_nsp_f1(&a, &b, &table).unwrap();
        prop_assert!((r.nsr - 1.0).abs() < 1e-9 && (r.nsp - 1.0).abs() < 1e-9);
    }

    #[test]
    fn alignment_is_one_to_one_and_rule_abiding(seed in any::<u64>(), ne in 0usize..10, nm in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = ["deep", "graph", "learning", "survey", "neural", "agents", "retrieval"];
        let title = |rng: &mut ChaCha8Rng| {
            (0..rng.random_range(1..4)).map(|_| words[rng.random_range(0..words.len())]).collect::<Vec<_>>().join(" ")
        };
        let expert: Vec<String> = (0..ne).map(|_| title(&mut rng)).collect();
        let model: Vec<String> = (0..nm).map(|_| title(&mut rng)).collect();
        let p = hash();
        let a = align(&expert, &model, &p).unwrap();
        let es: BTreeSet<_> = a.pairs.iter().map(|x| &x.expert).collect();
        let ms: BTreeSet<_> = a.pairs.iter().map(|x| &x.model).collect();
        prop_assert_eq!(es.len(), a.len());
        prop_assert_eq!(ms.len(), a.len());
        for pair in &a.pairs {
            prop_assert!(is_match(&pair.expert, &pair.model, pair.score, DEFAULT_ALIGNMENT_THRESHOLD));
        }
        if !model.is_empty() {
            let drop = rng.random_range(0..model.len());
            let fewer: Vec<String> = model.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, m)| m.clone()).collect();
            prop_assert!(align(&expert, &fewer, &p).unwrap().len() <= a.len());
        }
    }

    #[test]
    fn taxonomy_counts_and_round_trip(seed in any::<u64>(), nodes in 1usize..20, papers in 0usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_taxonomy(&mut rng, "s", nodes, papers);
        let placed: usize = t.root().preorder().map(|n| n.papers().len()).sum();
        prop_assert_eq!(placed, t.assignment().len());
        let hier = t.hierarchy();
        prop_assert_eq!(hier.node_count(), t.category_count());
        prop_assert_eq!(t.root().subtree_size(), hier.node_count());
        prop_assert_eq!(collect_labels(&hier).len(), nodes);
        let back = parse_taxonomy(&t.to_json(), "s", ParseMode::Strict).unwrap().taxonomy;
        prop_assert_eq!(back.assignment(), t.assignment());
        prop_assert_eq!(back.hierarchy(), hier);
        for paper in t.paper_ids() {
            for path in t.ancestor_paths(paper.as_str()) {
                prop_assert!(!path.iter().any(|l| normalize_title(l) == paper));
            }
        }
    }

    #[test]
    fn perturbations_preserve_validity(seed in any::<u64>(), nodes in 2usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_taxonomy(&mut rng, "s", nodes, 30);
        let s = shuffle_siblings(&t, seed);
        prop_assert_eq!(s.assignment().len(), 30);
        prop_assert_eq!(us_ted(&s.hierarchy(), &t.hierarchy(), &hash()).unwrap().us_ted, 0.0);
        // Contract the first internal child with a unique label, if any.
        let children = t.root().children();
        let internal = children.iter().position(|c| {
            !c.is_terminal() && children.iter().filter(|o| o.label() == c.label()).count() == 1
        });
        if let Some(i) = internal {
            let label = children[i].label().to_string();
            let c = contract_node(&t, &label).unwrap();
            prop_assert_eq!(c.category_count(), t.category_count() - 1);
            prop_assert_eq!(c.assignment().len(), 30);
        }
    }

    #[test]
    fn splitting_never_lowers_homogeneity(seed in any::<u64>(), nodes in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_taxonomy(&mut rng, "s", nodes, 24);
        let universe: BTreeSet<_> = t.paper_ids().into_iter().collect();
        let before = leaf_scores(&t.assignment(), &t.assignment(), &universe).unwrap();
        let target = splittable_leaf(t.root(), "");
        if let Some(path) = target {
            if let Ok(split) = split_leaf(&t, &path, 2) {
                let after = leaf_scores(&t.assignment(), &split.assignment(), &universe).unwrap();
                prop_assert!(after.homogeneity.unwrap() >= before.homogeneity.unwrap() - 1e-12);
            }
        }
    }

    #[test]
    fn e2e_extension_keeps_model_clusters(seed in any::<u64>(), nodes in 1usize..10, drop in 0usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_taxonomy(&mut rng, "s", nodes, 20);
        let papers = t.paper_ids();
        let kept: Vec<_> = papers.iter().skip(drop).cloned().collect();
        let p = hash();
        let a = align(&papers, &kept, &p).unwrap();
        let view = restrict_to_intersection(&t.assignment(), &t.assignment(), &a);
        let universe: BTreeSet<_> = papers.iter().cloned().collect();
        let e2e = extend_e2e(&t.assignment(), &a, &universe);
        prop_assert_eq!(e2e.len(), papers.len());
        prop_assert!(e2e.category_count() >= view.model.category_count());
        let unretrieved = e2e.iter().filter(|(_, c)| *c == taxoeval_core::CategoryId::Unretrieved).count();
        prop_assert_eq!(unretrieved, papers.len() - a.len());
    }
}
