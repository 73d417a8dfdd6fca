use std::fmt;

use nidt::config::ConfigError;
use nidt::dataset::DatasetError;
use nidt::eval::EvalError;
use nidt::features::FeatureError;
use nidt::kv::KvError;
use nidt::model::ModelError;
use nidt::pipeline::PipelineError;
use nidt::schema::SchemaError;
use nidt::transfer::TransferError;

/// A failure reported as `error[<code>]: <message>` on one stderr line.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("usage", message)
    }

    pub fn in_file(self, path: &std::path::Path) -> Self {
        Self { message: format!("{}: {}", path.display(), self.message), ..self }
    }

    pub fn exit_code(&self) -> i32 {
        if self.code == "usage" {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Keep the report on one line whatever the underlying message holds.
        let msg = self.message.replace(['\n', '\r'], " ");
        write!(f, "error[{}]: {}", self.code, msg.trim())
    }
}

macro_rules! code {
    ($ty:ty, $code:literal) => {
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                Self::new($code, e.to_string())
            }
        }
    };
}

code!(std::io::Error, "io");
code!(SchemaError, "schema");
code!(FeatureError, "features");
code!(ModelError, "model");
code!(KvError, "config");
code!(ConfigError, "config");

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        let code = match e {
            DatasetError::Open { .. } | DatasetError::Io(_) => "io",
            _ => "data",
        };
        Self::new(code, e.to_string())
    }
}

impl From<TransferError> for CliError {
    fn from(e: TransferError) -> Self {
        match e {
            TransferError::Io(e) => e.into(),
            TransferError::Dataset(e) => e.into(),
            TransferError::Feature(e) => e.into(),
            TransferError::Model(e) => e.into(),
            e => Self::new("bundle", e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io(e) => e.into(),
            EvalError::Transfer(e) => e.into(),
            e => Self::new("eval", e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Dataset(e) => e.into(),
            PipelineError::Feature(e) => e.into(),
            PipelineError::Model(e) => e.into(),
            PipelineError::Transfer(e) => e.into(),
        }
    }
}
