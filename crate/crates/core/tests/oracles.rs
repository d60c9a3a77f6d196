mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use taxoeval_core::hierarchy::{match_cost, sem_path_cost, us_ted};
use taxoeval_core::partition::{ari, ContingencyTable};
use taxoeval_core::{CategoryHierarchy, Similarity};

const TOL: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn us_ted_matches_enumeration(seed in any::<u64>(), n1 in 1usize..=6, n2 in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = pool();
        let sim = RandomSim::new(&mut rng, &labels);
        let table = sim.table();
        let a = random_tree(&mut rng, n1, &labels);
        let b = random_tree(&mut rng, n2, &labels);
        let got = us_ted(
            &CategoryHierarchy::new(a.to_node()),
            &CategoryHierarchy::new(b.to_node()),
            &table,
        ).unwrap().us_ted;
        let want = brute_force_ted(&a, &b, &|x, y| sim.get(x, y));
        prop_assert!((got - want).abs() < TOL, "got {got}, want {want}");
    }

    #[test]
    fn match_cost_matches_factorial(
        seed in any::<u64>(),
        m in 0usize..=6,
        n in 0usize..=6,
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairwise: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(0.0..5.0)).collect()).collect();
        let delete: Vec<f64> = (0..m).map(|_| rng.random_range(1..5) as f64).collect();
        let insert: Vec<f64> = (0..n).map(|_| rng.random_range(1..5) as f64).collect();
        let got = match_cost(&pairwise, &delete, &insert);
        let want = brute_force_match_cost(&pairwise, &delete, &insert);
        prop_assert!((got - want).abs() < TOL, "got {got}, want {want}");
    }

    #[test]
    fn path_cost_matches_subsets(
        seed in any::<u64>(),
        m in 1usize..=6,
        n in 1usize..=6,
        lambda in 0.0f64..3.0,
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = pool();
        let sim = RandomSim::new(&mut rng, &labels);
        let table = sim.table();
        let s: Vec<String> = (0..m).map(|_| labels[rng.random_range(0..labels.len())].clone()).collect();
        let t: Vec<String> = (0..n).map(|_| labels[rng.random_range(0..labels.len())].clone()).collect();
        let got = sem_path_cost(&s, &t, lambda, &table).unwrap();
        let want = brute_force_path_cost(&s, &t, lambda, &|x, y| sim.get(x, y));
        prop_assert!((got - want).abs() < TOL, "got {got}, want {want}");
    }

    #[test]
    fn ari_matches_pair_counting(
        x in prop::collection::vec(0usize..4, 0..=8),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_labels(&mut rng, x.len(), 4);
        let got = ari(&ContingencyTable::from_labels(&x, &y));
        let want = pair_counting_ari(&x, &y);
        prop_assert!((got - want).abs() < TOL, "got {got}, want {want}");
    }
}

#[test]
fn hash_encoder_trees_match_enumeration() {
    let provider = taxoeval_core::EncoderSimilarity::new(taxoeval_core::HashEncoder::default());
    let labels: Vec<String> = ["graph learning", "graph", "vision", "language model", "model", "agents"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let a = random_tree(&mut rng, 5, &labels);
        let b = random_tree(&mut rng, 4, &labels);
        let got = us_ted(
            &CategoryHierarchy::new(a.to_node()),
            &CategoryHierarchy::new(b.to_node()),
            &provider,
        )
        .unwrap()
        .us_ted;
        let want = brute_force_ted(&a, &b, &|x, y| provider.similarity(x, y).unwrap());
        assert!((got - want).abs() < TOL);
    }
}

#[test]
fn ari_on_singletons_example() {
    let x = [0usize, 0, 1, 1];
    let y = [0usize, 1, 2, 3];
    let got = ari(&ContingencyTable::from_labels(&x, &y));
    assert!((got - pair_counting_ari(&x, &y)).abs() < TOL);
    assert_eq!(got, 0.0);
}
