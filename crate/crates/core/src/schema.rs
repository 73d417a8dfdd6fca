//! Column schema manifests.
//!
//! A manifest is a small text file that names every CSV column and says how
//! it is treated:
//!
//! ```text
//! # comment
//! nidt-schema 1 unsw-nb15
//! id ignore
//! proto categorical
//! sbytes numeric
//! attack_cat category
//! label label
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Manifest format version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// The UNSW-NB15 partition layout shipped with the crate.
pub const UNSW_NB15_MANIFEST: &str = include_str!("../../../schema/unsw_nb15.schema");

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("schema line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported schema version {0}")]
    Version(u32),
    #[error("schema has no header line")]
    MissingHeader,
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("schema must have exactly one label column (found {0})")]
    LabelCount(usize),
    #[error("schema has more than one category column")]
    CategoryCount,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` is not a feature column")]
    NotFeature(String),
    #[error("cannot read schema: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
    Category,
    Ignore,
}

impl ColumnKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "numeric" => Self::Numeric,
            "categorical" => Self::Categorical,
            "label" => Self::Label,
            "category" => Self::Category,
            "ignore" => Self::Ignore,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Numeric => "numeric",
            Self::Categorical => "categorical",
            Self::Label => "label",
            Self::Category => "category",
            Self::Ignore => "ignore",
        }
    }

    /// Columns stored in `FlowRecord::values`.
    pub fn is_value(self) -> bool {
        matches!(self, Self::Numeric | Self::Categorical | Self::Ignore)
    }

    /// Columns that enter the feature matrix.
    pub fn is_feature(self) -> bool {
        matches!(self, Self::Numeric | Self::Categorical)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub name: String,
    pub version: u32,
    pub columns: Vec<Column>,
}

impl Schema {
    pub fn unsw_nb15() -> Self {
        Self::parse(UNSW_NB15_MANIFEST).expect("bundled manifest is valid")
    }

    pub fn load(path: &Path) -> Result<Self, SchemaError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SchemaError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Build a schema programmatically. Validation is the same as for a
    /// parsed manifest.
    pub fn from_columns(
        name: impl Into<String>,
        columns: Vec<Column>,
    ) -> Result<Self, SchemaError> {
        let schema = Self { name: name.into(), version: SCHEMA_VERSION, columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let mut header: Option<(u32, String)> = None;
        let mut columns = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let first = parts.next().unwrap_or_default();
            if header.is_none() {
                if first != "nidt-schema" {
                    return Err(SchemaError::MissingHeader);
                }
                let version = parts
                    .next()
                    .and_then(|v| v.parse::<u32>().ok())
                    .ok_or_else(|| SchemaError::Syntax {
                        line: line_no,
                        msg: "expected `nidt-schema <version> <name>`".into(),
                    })?;
                if version != SCHEMA_VERSION {
                    return Err(SchemaError::Version(version));
                }
                let name = parts.next().unwrap_or("unnamed").to_string();
                if parts.next().is_some() {
                    return Err(SchemaError::Syntax { line: line_no, msg: "trailing tokens".into() });
                }
                header = Some((version, name));
                continue;
            }
            let kind_str = parts.next().ok_or_else(|| SchemaError::Syntax {
                line: line_no,
                msg: format!("column `{first}` has no kind"),
            })?;
            if parts.next().is_some() {
                return Err(SchemaError::Syntax { line: line_no, msg: "trailing tokens".into() });
            }
            let kind = ColumnKind::parse(kind_str).ok_or_else(|| SchemaError::Syntax {
                line: line_no,
                msg: format!("unknown column kind `{kind_str}`"),
            })?;
            columns.push(Column { name: first.to_string(), kind });
        }
        let (version, name) = header.ok_or(SchemaError::MissingHeader)?;
        let schema = Self { name, version, columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        let mut seen = std::collections::HashSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(SchemaError::DuplicateColumn(c.name.clone()));
            }
        }
        let labels = self.columns.iter().filter(|c| c.kind == ColumnKind::Label).count();
        if labels != 1 {
            return Err(SchemaError::LabelCount(labels));
        }
        if self.columns.iter().filter(|c| c.kind == ColumnKind::Category).count() > 1 {
            return Err(SchemaError::CategoryCount);
        }
        Ok(())
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Columns held in a record's value list, in schema order.
    pub fn value_columns(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| c.kind.is_value())
    }

    /// Index of `name` within the record value list.
    pub fn value_index(&self, name: &str) -> Option<usize> {
        self.value_columns().position(|c| c.name == name)
    }

    pub fn feature_columns(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| c.kind.is_feature())
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_columns().map(|c| c.name.clone()).collect()
    }

    pub fn categorical_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Categorical)
            .map(|c| c.name.clone())
            .collect()
    }

    pub fn label_column(&self) -> &str {
        self.columns
            .iter()
            .find(|c| c.kind == ColumnKind::Label)
            .map(|c| c.name.as_str())
            .expect("validated schema has a label column")
    }

    pub fn category_column(&self) -> Option<&str> {
        self.columns
            .iter()
            .find(|c| c.kind == ColumnKind::Category)
            .map(|c| c.name.as_str())
    }
}

impl fmt::Display for Schema {
    /// Writes the manifest text form; `Schema::parse` reads it back.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nidt-schema {} {}", self.version, self.name)?;
        for c in &self.columns {
            writeln!(f, "{} {}", c.name, c.kind.as_str())?;
        }
        Ok(())
    }
}
