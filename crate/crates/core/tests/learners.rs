use patchem_core::learn::{
    boruta_select, train_boosted, train_forest, BoostedModel, BoostedParams, BorutaConfig, Classifier, EnsembleModel,
    FeatureMatrix, ForestModel, ForestParams, Tree,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn columns(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{j}")).collect()
}

fn noisy_blobs(seed: u64, n: usize) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let y = i % 2 == 0;
        let c = if y { 1.0 } else { -1.0 };
        rows.push(vec![
            c + rng.gen_range(-1.5..1.5),
            c + rng.gen_range(-1.5..1.5),
            rng.gen::<f64>(),
        ]);
        labels.push(y);
    }
    FeatureMatrix::new(columns(3), rows, Some(labels)).unwrap()
}

fn fixed_forest(value: f64) -> ForestModel {
    ForestModel {
        feature_columns: columns(1),
        params: ForestParams::default(),
        seed: 0,
        trees: vec![Tree::leaf(value)],
        importances: vec![0.0],
    }
}

fn fixed_boosted(prob: f64) -> BoostedModel {
    BoostedModel {
        feature_columns: columns(1),
        params: BoostedParams::default(),
        base_score: (prob / (1.0 - prob)).ln(),
        trees: Vec::new(),
        loss_history: Vec::new(),
    }
}

#[test]
fn ensemble_is_the_weighted_mean() {
    let e = EnsembleModel::new(fixed_forest(0.2), fixed_boosted(0.6), 0.5).unwrap();
    assert!((e.predict_row(&[0.0]) - 0.4).abs() < 1e-12);
    let e = EnsembleModel::new(fixed_forest(0.2), fixed_boosted(0.6), 1.0).unwrap();
    assert_eq!(e.predict_row(&[0.0]), 0.2);
}

#[test]
fn ensemble_of_identical_models_equals_either() {
    let x = noisy_blobs(1, 80);
    let f = train_forest(
        &x,
        &ForestParams {
            n_trees: 20,
            ..Default::default()
        },
        1,
    )
    .unwrap();
    let b = train_boosted(
        &x,
        &BoostedParams {
            rounds: 20,
            ..Default::default()
        },
    )
    .unwrap();
    let ff = EnsembleModel::new(f.clone(), b.clone(), 0.3).unwrap();
    let pf = f.predict_proba(&x).unwrap();
    let pb = b.predict_proba(&x).unwrap();
    let pe = ff.predict_proba(&x).unwrap();
    for ((e, f), b) in pe.iter().zip(&pf).zip(&pb) {
        assert!((e - (0.3 * f + 0.7 * b)).abs() < 1e-12);
        assert!(*e >= f.min(*b) - 1e-15 && *e <= f.max(*b) + 1e-15);
    }
    let forest_only = EnsembleModel::new(f.clone(), b, 1.0).unwrap();
    assert_eq!(forest_only.predict_proba(&x).unwrap(), pf);
}

#[test]
fn boosting_loss_never_rises() {
    for seed in 0..5 {
        let x = noisy_blobs(seed, 150);
        let m = train_boosted(&x, &BoostedParams::default()).unwrap();
        assert_eq!(m.loss_history.len(), 201);
        for w in m.loss_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} then {}", w[0], w[1]);
        }
    }
}

#[test]
fn forest_fits_separable_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let y = i < 100;
        let c = if y { 2.0 } else { -2.0 };
        rows.push(vec![c + rng.gen_range(-1.0..1.0), c + rng.gen_range(-1.0..1.0)]);
        labels.push(y);
    }
    let x = FeatureMatrix::new(columns(2), rows, Some(labels.clone())).unwrap();
    let f = train_forest(&x, &ForestParams::default(), 4).unwrap();
    let acc = f
        .predict_proba(&x)
        .unwrap()
        .iter()
        .zip(&labels)
        .filter(|(p, y)| (**p >= 0.5) == **y)
        .count() as f64
        / 200.0;
    assert!(acc >= 0.98);
}

fn noise_matrix(seed: u64, n: usize, p: usize, informative: bool) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.gen::<f64>()).collect()).collect();
    let labels = rows
        .iter()
        .map(|r| {
            if informative {
                r[0] + r[1] > 1.0
            } else {
                rng.gen_bool(0.5)
            }
        })
        .collect();
    FeatureMatrix::new(columns(p), rows, Some(labels)).unwrap()
}

#[test]
fn boruta_keeps_informative_columns() {
    let x = noise_matrix(21, 300, 8, true);
    let r = boruta_select(
        &x,
        &BorutaConfig {
            seed: 21,
            max_iter: 40,
            n_trees: 60,
            ..Default::default()
        },
    )
    .unwrap();
    let confirmed = r.confirmed();
    assert!(confirmed.contains(&"x0".to_string()) && confirmed.contains(&"x1".to_string()));
    assert!(r.rejected().len() >= 4);
}

#[test]
fn boruta_confirms_nothing_on_noise() {
    let x = noise_matrix(22, 200, 6, false);
    let r = boruta_select(
        &x,
        &BorutaConfig {
            seed: 22,
            max_iter: 40,
            n_trees: 60,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(r.confirmed().is_empty(), "{:?}", r.confirmed());
}
