//! Flow-record intrusion detection with a transferable CNN-LSTM classifier.
//!
//! The pipeline runs in two places. In the source domain, flow records are
//! loaded and split ([`dataset`]), scored and reduced with an extra-trees
//! ensemble and min-max scaled ([`features`]), and used to train one of three
//! network families ([`model`]) built from the layers in [`nn`]. The trained
//! network and every preprocessing step are then frozen into a single bundle
//! file ([`transfer`]) which a target domain loads for read-only scoring and
//! evaluation ([`eval`]).

pub mod config;
pub mod dataset;
pub mod eval;
pub mod features;
pub mod fsutil;
pub mod kv;
pub mod matrix;
pub mod model;
pub mod nn;
pub mod pipeline;
pub mod schema;
pub mod transfer;

pub use dataset::{FieldValue, FlowRecord, RawRow};
pub use matrix::{FeatureMatrix, LabelVector};
pub use schema::Schema;
