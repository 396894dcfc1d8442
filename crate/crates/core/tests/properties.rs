use std::collections::BTreeSet;

use patchem_core::arbiter::{
    arbitrate, AdapterError, Depiction, FingerprintEvaluator, FixedRecognizer, Recognizer, RecordRenderer,
};
use patchem_core::coreid::{rank_with_probabilities, TopkFlags};
use patchem_core::learn::{
    bayes_opt, boruta_select, train_forest, BorutaConfig, Classifier, FeatureMatrix, FeatureStatus, ForestParams,
    SearchSpace,
};
use patchem_core::simnet::{build_graph, network_features, SimilarityGraph};
use patchem_core::{ecfp, parse_smiles, Fingerprint};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS: &str = include_str!("../data/corpus.smi");

fn fingerprints(n: usize, seed: u64) -> Vec<(String, Fingerprint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lines: Vec<&str> = CORPUS.lines().filter(|l| !l.trim().is_empty()).collect();
    lines
        .choose_multiple(&mut rng, n)
        .enumerate()
        .map(|(i, s)| {
            (
                format!("m{i:02}"),
                ecfp(&parse_smiles(s.trim()).unwrap(), 2, 2048).unwrap(),
            )
        })
        .collect()
}

fn edge_set(g: &SimilarityGraph) -> BTreeSet<(String, String)> {
    g.edges()
        .iter()
        .map(|e| {
            let (a, b) = (&g.node_ids()[e.a], &g.node_ids()[e.b]);
            (a.min(b).clone(), a.max(b).clone())
        })
        .collect()
}

#[test]
fn node_features_do_not_depend_on_input_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..10 {
        let set = fingerprints(25, seed);
        let g = build_graph(&set, 0.4).unwrap();
        let base = network_features(&g);
        let mut shuffled = set.clone();
        shuffled.shuffle(&mut rng);
        let h = build_graph(&shuffled, 0.4).unwrap();
        assert_eq!(edge_set(&g), edge_set(&h));
        let moved = network_features(&h);
        for (j, (id, _)) in shuffled.iter().enumerate() {
            let i = set.iter().position(|(x, _)| x == id).unwrap();
            let (a, b) = (base[i].to_array(), moved[j].to_array());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-9, "{id}: {a:?} vs {b:?}");
            }
        }
    }
}

#[test]
fn adjacency_matrix_round_trips_to_edges() {
    for seed in 0..10 {
        let g = build_graph(&fingerprints(20, 100 + seed), 0.4).unwrap();
        let adj = g.adjacency();
        let mut from_matrix = BTreeSet::new();
        for (i, row) in adj.rows().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v == 1 && i < j {
                    from_matrix.insert((i, j));
                }
            }
        }
        let edges: BTreeSet<(usize, usize)> = g.edges().iter().map(|e| (e.a.min(e.b), e.a.max(e.b))).collect();
        assert_eq!(from_matrix, edges);
    }
}

#[test]
fn boruta_statuses_partition_the_real_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let columns: Vec<String> = (0..6).map(|j| format!("f{j}")).collect();
    let rows: Vec<Vec<f64>> = (0..120).map(|_| (0..6).map(|_| rng.gen::<f64>()).collect()).collect();
    let labels = rows.iter().map(|r| r[0] > 0.5).collect();
    let x = FeatureMatrix::new(columns.clone(), rows, Some(labels)).unwrap();
    let r = boruta_select(
        &x,
        &BorutaConfig {
            seed: 3,
            max_iter: 20,
            n_trees: 40,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(r.features, columns);
    assert_eq!(r.statuses.len(), 6);
    let total = r.confirmed().len() + r.rejected().len() + r.tentative().len();
    assert_eq!(total, 6);
    assert_eq!(r.statuses[0], FeatureStatus::Confirmed);
}

#[test]
fn single_deep_tree_memorizes_noiseless_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows: Vec<Vec<f64>> = (0..150).map(|_| (0..4).map(|_| rng.gen::<f64>()).collect()).collect();
    let labels: Vec<bool> = rows.iter().map(|r| (r[0] * 7.0).sin() + r[1] * r[2] > 0.3).collect();
    let x = FeatureMatrix::new((0..4).map(|j| format!("x{j}")).collect(), rows, Some(labels.clone())).unwrap();
    let params = ForestParams {
        n_trees: 1,
        mtry: Some(4),
        max_depth: None,
        min_leaf: 1,
        bootstrap: false,
        ..Default::default()
    };
    let f = train_forest(&x, &params, 1).unwrap();
    let p = f.predict_proba(&x).unwrap();
    for (p, y) in p.iter().zip(&labels) {
        assert_eq!(*p, if *y { 1.0 } else { 0.0 });
    }
}

#[test]
fn search_history_has_budget_length_and_stays_in_bounds() {
    let space = SearchSpace::default().continuous("a", -2.0, 3.0).integer("k", 1, 9);
    for budget in [1, 5, 17] {
        let r = bayes_opt(&space, budget, 4, |p| (p["a"] - 1.0).powi(2) + (p["k"] - 4.0).abs()).unwrap();
        assert_eq!(r.history.len(), budget);
        for t in &r.history {
            assert!((-2.0..=3.0).contains(&t.params["a"]));
            let k = t.params["k"];
            assert!((1.0..=9.0).contains(&k) && k.fract() == 0.0);
        }
        let best = r.history.iter().map(|t| t.objective).fold(f64::INFINITY, f64::min);
        assert_eq!(r.best.objective, best);
    }
}

proptest! {
    #[test]
    fn ranking_is_a_permutation(probs in prop::collection::vec(0.0f64..=1.0, 1..60), core in 0usize..60) {
        let ids: Vec<String> = (0..probs.len()).map(|i| format!("c{i:02}")).collect();
        let core = ids[core % ids.len()].clone();
        let r = rank_with_probabilities("P", &ids, &probs, Some(&core));
        let got: BTreeSet<&str> = r.ranking.iter().map(|c| c.compound_id.as_str()).collect();
        prop_assert_eq!(got.len(), ids.len());
        prop_assert!(r.ranking.windows(2).all(|w| w[0].probability >= w[1].probability));
        prop_assert!(r.ranking.iter().all(|c| (0.0..=1.0).contains(&c.probability)));
        prop_assert_eq!(&r.ranking[r.rank_of_core.unwrap() - 1].compound_id, &core);
    }

    #[test]
    fn topk_flags_are_nested(n in 1usize..500, rank in 1usize..500) {
        let rank = rank.min(n);
        let f = TopkFlags::from_rank(rank, n);
        prop_assert!(!f.top1 || f.top5);
        prop_assert!(!f.top5 || f.top10);
        prop_assert!(!f.top1pct || f.top5pct);
        prop_assert!(!f.top5pct || f.top10pct);
    }
}

fn output(i: u8) -> Result<String, AdapterError> {
    match i % 5 {
        0 => Ok("CCO".into()),
        1 => Ok("c1ccccc1O".into()),
        2 => Ok("C1CC".into()),
        3 => Err(AdapterError::Unreachable("down".into())),
        _ => Ok("CC(=O)N".into()),
    }
}

proptest! {
    #[test]
    fn arbiter_is_a_pure_function_of_adapter_outputs(codes in prop::collection::vec(0u8..5, 1..6), truth in 0u8..5) {
        let truth = ["CCO", "c1ccccc1O", "CC(=O)N", "CCCC", "O"][truth as usize];
        let make = || codes.iter().map(|&c| FixedRecognizer(output(c))).collect::<Vec<_>>();
        let (a, b) = (make(), make());
        let ra: Vec<&dyn Recognizer> = a.iter().map(|r| r as &dyn Recognizer).collect();
        let rb: Vec<&dyn Recognizer> = b.iter().map(|r| r as &dyn Recognizer).collect();
        let input = Depiction::record(truth);
        let first = arbitrate(&input, &ra, &RecordRenderer, &FingerprintEvaluator);
        let second = arbitrate(&input, &rb, &RecordRenderer, &FingerprintEvaluator);
        prop_assert_eq!(&first, &second);
        if let Ok(r) = first {
            prop_assert_eq!(r.candidates.len(), codes.len());
            let chosen = &r.candidates[r.selected_model - 1];
            prop_assert!(chosen.valid);
            prop_assert!(r.candidates.iter().filter(|c| c.valid).all(|c| c.similarity <= chosen.similarity));
        } else {
            prop_assert!(codes.iter().all(|c| c % 5 == 2 || c % 5 == 3));
        }
    }
}
