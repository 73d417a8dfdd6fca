use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::FeatureError;
use crate::matrix::FeatureMatrix;

/// Extremely-randomized-trees settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub trees: usize,
    /// Candidate features per node; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { trees: 100, max_features: None, min_samples_split: 2, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    pub names: Vec<String>,
    pub scores: Vec<f64>,
    pub tree_count: usize,
    pub seed: u64,
    /// No split happened anywhere (constant inputs or one class).
    pub degenerate: bool,
}

impl ImportanceReport {
    pub fn score(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.scores[i])
    }

    /// `(name, score)` pairs, highest first, ties by name.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> =
            self.names.iter().map(String::as_str).zip(self.scores.iter().copied()).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// `feature,score` CSV, sorted descending.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,score\n");
        for (n, s) in self.ranked() {
            out.push_str(&format!("{n},{s}\n"));
        }
        out
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Node {
    start: usize,
    end: usize,
}

/// Grows one tree over all rows and returns its un-normalized per-feature
/// weighted impurity decrease.
fn grow_tree(x: &FeatureMatrix, y: &[u8], k: usize, min_split: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = x.rows();
    let d = x.cols();
    let total = n as f64;
    let mut importance = vec![0.0; d];
    let mut idx: Vec<usize> = (0..n).collect();
    let mut features: Vec<usize> = (0..d).collect();
    let mut stack = vec![Node { start: 0, end: n }];

    while let Some(Node { start, end }) = stack.pop() {
        let len = end - start;
        let rows = &idx[start..end];
        let pos = rows.iter().filter(|&&r| y[r] == 1).count();
        if len < min_split || pos == 0 || pos == len {
            continue;
        }
        let parent = gini(pos, len);

        // Draw features without replacement until k non-constant ones have
        // been tried.
        features.shuffle(rng);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut tried = 0;
        for &f in &features {
            if tried == k {
                break;
            }
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                let v = x.get(r, f);
                (lo.min(v), hi.max(v))
            });
            if !(hi > lo) {
                continue;
            }
            tried += 1;
            let mut cut = lo + rng.gen::<f64>() * (hi - lo);
            if cut >= hi {
                cut = lo;
            }
            let (mut nl, mut pl) = (0usize, 0usize);
            for &r in rows {
                if x.get(r, f) <= cut {
                    nl += 1;
                    pl += y[r] as usize;
                }
            }
            let nr = len - nl;
            let pr = pos - pl;
            let child = (nl as f64 * gini(pl, nl) + nr as f64 * gini(pr, nr)) / len as f64;
            let decrease = parent - child;
            if best.map_or(true, |(_, _, d)| decrease > d) {
                best = Some((f, cut, decrease));
            }
        }
        let Some((f, cut, decrease)) = best else {
            continue;
        };
        importance[f] += (len as f64 / total) * decrease.max(0.0);

        let slice = &mut idx[start..end];
        let mut left = 0;
        for i in 0..slice.len() {
            if x.get(slice[i], f) <= cut {
                slice.swap(i, left);
                left += 1;
            }
        }
        stack.push(Node { start: start + left, end });
        stack.push(Node { start, end: start + left });
    }
    importance
}

/// Scores every column by mean Gini decrease over an extra-trees ensemble.
/// Tree `t` draws from its own RNG stream `(seed, t)`, so results do not
/// depend on how trees are scheduled across threads.
pub fn fit_importance(x: &FeatureMatrix, y: &[u8], config: &ForestConfig) -> Result<ImportanceReport, FeatureError> {
    if x.rows() != y.len() {
        return Err(FeatureError::Shape(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    if x.rows() < 2 {
        return Err(FeatureError::Shape("need at least 2 rows".into()));
    }
    if let Some(v) = y.iter().find(|&&v| v > 1) {
        return Err(FeatureError::Label(*v));
    }
    if config.trees == 0 {
        return Err(FeatureError::Config("trees must be positive".into()));
    }
    let d = x.cols();
    let k = config
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d.max(1));
    let min_split = config.min_samples_split.max(2);

    let per_tree: Vec<Vec<f64>> = (0..config.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64);
            grow_tree(x, y, k, min_split, &mut rng)
        })
        .collect();

    let mut scores = vec![0.0; d];
    for tree in &per_tree {
        for (s, v) in scores.iter_mut().zip(tree) {
            *s += v;
        }
    }
    let sum: f64 = scores.iter().sum();
    let degenerate = !(sum > 0.0);
    if !degenerate {
        scores.iter_mut().for_each(|s| *s /= sum);
    }
    Ok(ImportanceReport {
        names: x.names().to_vec(),
        scores,
        tree_count: config.trees,
        seed: config.seed,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(cols: &[&[f64]]) -> FeatureMatrix {
        let names = (0..cols.len()).map(|i| format!("c{i}")).collect();
        let rows: Vec<Vec<f64>> =
            (0..cols[0].len()).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        FeatureMatrix::from_rows(names, &rows)
    }

    #[test]
    fn constant_inputs_are_degenerate() {
        let x = matrix(&[&[1.0, 1.0, 1.0, 1.0], &[2.0, 2.0, 2.0, 2.0]]);
        let r = fit_importance(&x, &[0, 1, 0, 1], &ForestConfig::default()).unwrap();
        assert!(r.degenerate);
        assert!(r.scores.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn single_class_is_degenerate() {
        let x = matrix(&[&[1.0, 2.0, 3.0, 4.0]]);
        let r = fit_importance(&x, &[1, 1, 1, 1], &ForestConfig::default()).unwrap();
        assert!(r.degenerate);
    }

    #[test]
    fn scores_normalized_and_constant_zero() {
        let a = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let noise = [0.3, 0.1, 0.9, 0.5, 0.2, 0.7];
        let constant = [5.0; 6];
        let x = matrix(&[&a, &noise, &constant]);
        let y = [0, 1, 0, 1, 1, 0];
        let r = fit_importance(&x, &y, &ForestConfig { trees: 20, ..Default::default() }).unwrap();
        assert!((r.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(r.score("c2"), Some(0.0));
        assert!(r.scores.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        let x = matrix(&[&[1.0, 2.0]]);
        assert!(fit_importance(&x, &[0], &ForestConfig::default()).is_err());
        assert!(fit_importance(&x, &[0, 2], &ForestConfig::default()).is_err());
        let one = matrix(&[&[1.0]]);
        assert!(fit_importance(&one, &[0], &ForestConfig::default()).is_err());
    }

    #[test]
    fn csv_is_sorted_descending() {
        let r = ImportanceReport {
            names: vec!["b".into(), "a".into(), "c".into()],
            scores: vec![0.25, 0.25, 0.5],
            tree_count: 1,
            seed: 0,
            degenerate: false,
        };
        assert_eq!(r.to_csv(), "feature,score\nc,0.5\na,0.25\nb,0.25\n");
    }
}
