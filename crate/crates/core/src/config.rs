//! Run configuration: every tunable of the pipeline as one flat `key = value`
//! document. Precedence is defaults, then a config file, then `--set` flags.

use std::path::Path;
use std::str::FromStr;

use crate::dataset::SplitSpec;
use crate::features::ForestConfig;
use crate::kv::{KvDocument, KvError};
use crate::model::TrainConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    /// `unsw-nb15` for the built-in manifest, otherwise a manifest path.
    pub schema: String,
    pub split_ratios: [f64; 3],
    pub split_stratify: bool,
    pub k: usize,
    /// Clamp scaled values to [0, 1] at inference.
    pub clamp: bool,
    pub forest_trees: usize,
    /// `None` means ceil(sqrt(features)).
    pub forest_max_features: Option<usize>,
    pub forest_min_samples_split: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub dropout: f64,
    pub threshold: f64,
    /// 0 = all cores.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let split = SplitSpec::default();
        let forest = ForestConfig::default();
        let train = TrainConfig::default();
        Self {
            seed: 42,
            schema: "unsw-nb15".into(),
            split_ratios: split.ratios,
            split_stratify: split.stratify,
            k: crate::model::DEFAULT_INPUT_FEATURES,
            clamp: true,
            forest_trees: forest.trees,
            forest_max_features: forest.max_features,
            forest_min_samples_split: forest.min_samples_split,
            lr: train.lr,
            beta1: train.beta1,
            beta2: train.beta2,
            epsilon: train.epsilon,
            batch_size: train.batch_size,
            max_epochs: train.max_epochs,
            patience: train.patience,
            dropout: train.dropout_rate,
            threshold: crate::model::DEFAULT_THRESHOLD,
            threads: 0,
        }
    }
}

pub const KEYS: &[&str] = &[
    "seed",
    "schema",
    "split.train",
    "split.val",
    "split.test",
    "split.stratify",
    "features.k",
    "features.clamp",
    "forest.trees",
    "forest.max_features",
    "forest.min_samples_split",
    "train.lr",
    "train.beta1",
    "train.beta2",
    "train.epsilon",
    "train.batch_size",
    "train.max_epochs",
    "train.patience",
    "train.dropout",
    "eval.threshold",
    "threads",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, KvError> {
    value.parse().map_err(|_| KvError::Value { key: key.into(), value: value.into() })
}

impl RunConfig {
    /// Overrides one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), KvError> {
        let v = value.trim();
        match key {
            "seed" => self.seed = parse(key, v)?,
            "schema" => self.schema = v.to_string(),
            "split.train" => self.split_ratios[0] = parse(key, v)?,
            "split.val" => self.split_ratios[1] = parse(key, v)?,
            "split.test" => self.split_ratios[2] = parse(key, v)?,
            "split.stratify" => self.split_stratify = parse(key, v)?,
            "features.k" => self.k = parse(key, v)?,
            "features.clamp" => self.clamp = parse(key, v)?,
            "forest.trees" => self.forest_trees = parse(key, v)?,
            "forest.max_features" => {
                self.forest_max_features = if v == "auto" { None } else { Some(parse(key, v)?) }
            }
            "forest.min_samples_split" => self.forest_min_samples_split = parse(key, v)?,
            "train.lr" => self.lr = parse(key, v)?,
            "train.beta1" => self.beta1 = parse(key, v)?,
            "train.beta2" => self.beta2 = parse(key, v)?,
            "train.epsilon" => self.epsilon = parse(key, v)?,
            "train.batch_size" => self.batch_size = parse(key, v)?,
            "train.max_epochs" => self.max_epochs = parse(key, v)?,
            "train.patience" => self.patience = parse(key, v)?,
            "train.dropout" => self.dropout = parse(key, v)?,
            "eval.threshold" => self.threshold = parse(key, v)?,
            "threads" => self.threads = parse(key, v)?,
            _ => return Err(KvError::Unknown(key.to_string())),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), KvError> {
        let (k, v) = pair.split_once('=').ok_or(KvError::Syntax { line: 1 })?;
        self.set(k.trim(), v)
    }

    pub fn apply(&mut self, doc: &KvDocument) -> Result<(), KvError> {
        for (k, v) in doc.iter() {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_kv(doc: &KvDocument) -> Result<Self, KvError> {
        let mut c = Self::default();
        c.apply(doc)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Ok(Self::from_kv(&KvDocument::parse(&text)?)?)
    }

    /// Every key with its effective value, in [`KEYS`] order.
    pub fn to_kv(&self) -> KvDocument {
        let mut d = KvDocument::new();
        d.set("seed", self.seed);
        d.set("schema", &self.schema);
        d.set("split.train", self.split_ratios[0]);
        d.set("split.val", self.split_ratios[1]);
        d.set("split.test", self.split_ratios[2]);
        d.set("split.stratify", self.split_stratify);
        d.set("features.k", self.k);
        d.set("features.clamp", self.clamp);
        d.set("forest.trees", self.forest_trees);
        match self.forest_max_features {
            Some(m) => d.set("forest.max_features", m),
            None => d.set("forest.max_features", "auto"),
        }
        d.set("forest.min_samples_split", self.forest_min_samples_split);
        d.set("train.lr", self.lr);
        d.set("train.beta1", self.beta1);
        d.set("train.beta2", self.beta2);
        d.set("train.epsilon", self.epsilon);
        d.set("train.batch_size", self.batch_size);
        d.set("train.max_epochs", self.max_epochs);
        d.set("train.patience", self.patience);
        d.set("train.dropout", self.dropout);
        d.set("eval.threshold", self.threshold);
        d.set("threads", self.threads);
        d
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec { ratios: self.split_ratios, seed: self.seed, stratify: self.split_stratify }
    }

    pub fn forest_config(&self) -> ForestConfig {
        ForestConfig {
            trees: self.forest_trees,
            max_features: self.forest_max_features,
            min_samples_split: self.forest_min_samples_split,
            seed: self.seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            dropout_rate: self.dropout,
            seed: self.seed,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {0}")]
    Io(String),
    #[error(transparent)]
    Kv(#[from] KvError),
}
