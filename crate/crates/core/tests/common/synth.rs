//! Synthetic datasets with known structure.

use nidt::dataset::{FieldValue, FlowRecord};
use nidt::matrix::FeatureMatrix;
use nidt::schema::Schema;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Schema with numeric columns `f0..f{d-1}` and a label.
pub fn numeric_schema(d: usize) -> Schema {
    let mut text = String::from("nidt-schema 1 synthetic\n");
    for j in 0..d {
        text.push_str(&format!("f{j} numeric\n"));
    }
    text.push_str("label label\n");
    Schema::parse(&text).unwrap()
}

/// Linearly separable records. Feature `j` is uniform on `[0, s_j)` with
/// per-column scales spanning several orders of magnitude; the label is the
/// sign of `w . (x / s - 0.5)` and points within a margin of the boundary are
/// rejected.
pub fn separable(n: usize, d: usize, seed: u64) -> (Schema, Vec<FlowRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scales: Vec<f64> = (0..d).map(|j| 10f64.powi((j % 5) as i32)).collect();
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut records = Vec::with_capacity(n);
    while records.len() < n {
        let u: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let z: f64 = u.iter().zip(&w).map(|(u, w)| w * (u - 0.5)).sum();
        if z.abs() < 0.5 {
            continue;
        }
        records.push(FlowRecord {
            values: u.iter().zip(&scales).map(|(u, s)| FieldValue::Num(u * s)).collect(),
            label: u8::from(z > 0.0),
            attack_cat: None,
        });
    }
    (numeric_schema(d), records)
}

/// Column 0 equals the label plus small noise, column 1 is constant, the
/// rest are pure noise.
pub fn planted(n: usize, noise_cols: usize, seed: u64) -> (FeatureMatrix, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = noise_cols + 2;
    let mut names = vec!["planted".to_string(), "constant".to_string()];
    names.extend((0..noise_cols).map(|j| format!("noise{j}")));
    let mut data = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let label: u8 = rng.gen_range(0..2);
        data.push(f64::from(label) + rng.gen_range(0.0..0.4));
        data.push(5.0);
        for _ in 0..noise_cols {
            data.push(rng.gen::<f64>());
        }
        y.push(label);
    }
    (FeatureMatrix::new(names, n, data), y)
}

/// `n` labels with the given attack fraction, in random order.
pub fn labels(n: usize, attack_fraction: f64, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| u8::from(rng.gen_bool(attack_fraction))).collect()
}

/// Brute-force Mann-Whitney statistic: P(score_pos > score_neg) + 0.5 P(tie).
pub fn mann_whitney(labels: &[u8], scores: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    num / pairs
}
