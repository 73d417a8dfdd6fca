mod common;

use common::synth;
use nidt::features::{fit_importance, fit_scaler, select_top_k, transform, FeatureSelection, ForestConfig};
use nidt::matrix::FeatureMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Column `a` equals the label; `n1..n4` are uniform noise.
fn label_copy(rows: usize, seed: u64, duplicate: bool) -> (FeatureMatrix, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names = vec!["a".to_string()];
    if duplicate {
        names.push("a_copy".to_string());
    }
    names.extend((1..=4).map(|j| format!("n{j}")));
    let mut data = Vec::new();
    let mut y = Vec::new();
    for _ in 0..rows {
        let label: u8 = rng.gen_range(0..2);
        data.push(f64::from(label));
        if duplicate {
            data.push(f64::from(label));
        }
        for _ in 0..4 {
            data.push(rng.gen::<f64>());
        }
        y.push(label);
    }
    (FeatureMatrix::new(names, rows, data), y)
}

#[test]
fn label_column_scores_strictly_highest() {
    let (x, y) = label_copy(500, 1, false);
    let r = fit_importance(&x, &y, &ForestConfig::default()).unwrap();
    let ranked = r.ranked();
    assert_eq!(ranked[0].0, "a");
    assert!(ranked[0].1 > ranked[1].1);
    let total: f64 = r.scores.iter().sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn duplicated_column_shares_its_importance() {
    let (mut single, mut a, mut b) = (0.0, 0.0, 0.0);
    for seed in 0..10 {
        let config = ForestConfig { seed, ..ForestConfig::default() };
        let (x, y) = label_copy(500, seed, false);
        single += fit_importance(&x, &y, &config).unwrap().score("a").unwrap();
        let (x, y) = label_copy(500, seed, true);
        let r = fit_importance(&x, &y, &config).unwrap();
        a += r.score("a").unwrap();
        b += r.score("a_copy").unwrap();
    }
    let (single, pair) = (single / 10.0, (a + b) / 10.0);
    assert!((single - pair).abs() <= 0.05, "single {single}, pair {pair}");
    assert!((a - b).abs() / (a + b) < 0.25, "uneven split {a} vs {b}");
}

#[test]
fn argmax_survives_column_rescaling() {
    for seed in 0..5 {
        let (mut x, y) = synth::planted(300, 6, seed);
        let config = ForestConfig { seed, ..ForestConfig::default() };
        let before = fit_importance(&x, &y, &config).unwrap();
        for c in 0..x.cols() {
            x.scale_column(c, 10f64.powi(c as i32 - 3));
        }
        let after = fit_importance(&x, &y, &config).unwrap();
        assert_eq!(before.ranked()[0].0, "planted");
        assert_eq!(after.ranked()[0].0, "planted");
    }
}

#[test]
fn selection_then_scaling_on_planted_data() {
    let (x, y) = synth::planted(200, 4, 3);
    let r = fit_importance(&x, &y, &ForestConfig::default()).unwrap();
    let sel = select_top_k(&r, 3).unwrap();
    assert_eq!(sel.kept[0], "planted");
    assert!(!sel.kept.contains(&"constant".to_string()));
    let scaler = fit_scaler(&x, &sel).unwrap();
    let t = transform(&x, &sel, &scaler).unwrap();
    assert_eq!(t.names(), sel.kept.as_slice());
    assert!(t.data().iter().all(|v| (0.0..=1.0).contains(v)));

    let all = select_top_k(&r, x.cols()).unwrap();
    assert_eq!(all.k(), x.cols());
    assert!(select_top_k(&r, 0).is_err());
    assert!(select_top_k(&r, x.cols() + 1).is_err());
    let round = FeatureSelection::from_kv(&sel.to_kv()).unwrap();
    assert_eq!(round, sel);
}
