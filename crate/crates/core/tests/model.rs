use nidt::matrix::FeatureMatrix;
use nidt::model::{build, train, Family, Labeled, TrainConfig};

fn names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("f{i}")).collect()
}

#[test]
fn cnn_lstm_layer_table() {
    let m = build(Family::CnnLstm, 32, 0).unwrap();
    let rows: Vec<_> = m.arch.summary().into_iter().filter(|r| r.kind != "relu" && r.kind != "sigmoid").collect();
    let expected: &[(&str, &[usize], usize)] = &[
        ("conv1d", &[32, 64], 256),
        ("conv1d", &[32, 64], 12_352),
        ("maxpool1d", &[16, 64], 0),
        ("conv1d", &[16, 128], 24_704),
        ("conv1d", &[16, 128], 49_280),
        ("maxpool1d", &[8, 128], 0),
        ("conv1d", &[8, 256], 98_560),
        ("conv1d", &[8, 256], 196_864),
        ("maxpool1d", &[4, 256], 0),
        ("lstm", &[100], 142_800),
        ("dense", &[256], 25_856),
        ("dropout", &[256], 0),
        ("dense", &[128], 32_896),
        ("dropout", &[128], 0),
        ("dense", &[1], 129),
    ];
    assert_eq!(rows.len(), expected.len());
    for (row, (kind, shape, params)) in rows.iter().zip(expected) {
        assert_eq!(row.kind, *kind, "{}", row.name);
        assert_eq!(row.output_shape, *shape, "{}", row.name);
        assert_eq!(row.params, *params, "{}", row.name);
    }
    assert_eq!(m.arch.param_count(), 583_697);
    assert_eq!(m.network.param_count(), 583_697);
}

#[test]
fn same_seed_same_weights() {
    for family in [Family::Dnn, Family::Cnn, Family::CnnLstm] {
        let a = build(family, 16, 9).unwrap();
        let b = build(family, 16, 9).unwrap();
        let c = build(family, 16, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.network.params(), c.network.params());
    }
}

#[test]
fn loss_vanishes_on_repeated_example() {
    let row: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin().abs()).collect();
    let x = FeatureMatrix::from_rows(names(32), &vec![row; 64]);
    let y = vec![1u8; 64];
    let d = Labeled { x: &x, y: &y };
    let cfg = TrainConfig { batch_size: 64, max_epochs: 200, patience: 200, dropout_rate: 0.0, ..Default::default() };
    let (_, report) = train(build(Family::Dnn, 32, 5).unwrap(), d, d, &cfg).unwrap();
    let losses: Vec<f64> = report.epochs.iter().map(|e| e.train_loss).collect();
    assert!(losses.windows(2).all(|w| w[1] <= w[0]), "loss went up: {losses:?}");
    assert!(*losses.last().unwrap() < 1e-3, "final loss {}", losses.last().unwrap());
}

#[test]
fn cnn_lstm_trains_deterministically() {
    let rows: Vec<Vec<f64>> = (0..24)
        .map(|r| (0..8).map(|c| if r % 2 == 0 { 0.2 } else { 0.8 } + (c as f64) * 0.01).collect())
        .collect();
    let y: Vec<u8> = (0..24).map(|r| (r % 2) as u8).collect();
    let x = FeatureMatrix::from_rows(names(8), &rows);
    let d = Labeled { x: &x, y: &y };
    let cfg = TrainConfig { batch_size: 8, max_epochs: 4, patience: 4, ..Default::default() };
    let run = || train(build(Family::CnnLstm, 8, 1).unwrap(), d, d, &cfg).unwrap();
    let (m1, r1) = run();
    let (m2, r2) = run();
    assert_eq!(m1, m2);
    assert_eq!(r1.epochs, r2.epochs);
    assert!(r1.epochs[0].train_loss > r1.epochs.last().unwrap().train_loss);
}
