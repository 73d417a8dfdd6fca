//! Flow-record ingestion, categorical encoding, and train/val/test splitting.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsutil::write_atomic;
use crate::kv::KvDocument;
use crate::matrix::{FeatureMatrix, LabelVector};
use crate::schema::{ColumnKind, Schema};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot open {path}: {source}")]
    Open { path: String, source: std::io::Error },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("header mismatch at column {index}: expected `{expected}`, found `{found}`")]
    Header { index: usize, expected: String, found: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: {msg}")]
    Csv { row: usize, msg: String },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    Numeric { row: usize, column: String, value: String },
    #[error("row {row}: label `{value}` is not 0 or 1")]
    Label { row: usize, value: String },
    #[error("row {row}: attack category `{category}` inconsistent with label {label}")]
    Category { row: usize, label: u8, category: String },
    #[error("column `{0}` is not in the schema")]
    UnknownColumn(String),
    #[error("column `{0}` is not categorical")]
    NotCategorical(String),
    #[error("no encoding for categorical column `{0}`")]
    MissingEncoding(String),
    #[error("invalid split: {0}")]
    Split(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValue {
    Num(f64),
    Text(String),
}

impl FieldValue {
    fn render(&self) -> String {
        match self {
            Self::Num(v) => v.to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

/// One labeled flow row. `values` holds every numeric, categorical and
/// ignored column of the schema, in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub values: Vec<FieldValue>,
    pub label: u8,
    pub attack_cat: Option<String>,
}

/// A row read for scoring, where the label may be absent.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub values: Vec<FieldValue>,
    pub label: Option<u8>,
}

pub trait RecordValues {
    fn values(&self) -> &[FieldValue];
}

impl RecordValues for FlowRecord {
    fn values(&self) -> &[FieldValue] {
        &self.values
    }
}

impl RecordValues for RawRow {
    fn values(&self) -> &[FieldValue] {
        &self.values
    }
}

impl From<FlowRecord> for RawRow {
    fn from(r: FlowRecord) -> Self {
        RawRow { values: r.values, label: Some(r.label) }
    }
}

fn parse_numeric(row: usize, column: &str, raw: &str) -> Result<f64, DatasetError> {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DatasetError::Numeric {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        }),
    }
}

fn parse_label(row: usize, raw: &str) -> Result<u8, DatasetError> {
    match raw {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(DatasetError::Label { row, value: raw.to_string() }),
    }
}

/// Empty and "Normal" both mean "no attack category".
fn parse_category(raw: &str) -> Option<String> {
    if raw.is_empty() || raw.eq_ignore_ascii_case("normal") {
        None
    } else {
        Some(raw.to_string())
    }
}

fn parse_value(row: usize, name: &str, kind: ColumnKind, raw: &str) -> Result<FieldValue, DatasetError> {
    Ok(match kind {
        ColumnKind::Numeric => FieldValue::Num(parse_numeric(row, name, raw)?),
        _ => FieldValue::Text(raw.to_string()),
    })
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader)
}

fn csv_err(row: usize, e: csv::Error) -> DatasetError {
    DatasetError::Csv { row, msg: e.to_string() }
}

/// Reads labeled records whose header must equal the schema column list.
pub fn read_records<R: Read>(reader: R, schema: &Schema) -> Result<Vec<FlowRecord>, DatasetError> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(|e| csv_err(0, e))?.clone();
    let expected: Vec<&str> = schema.column_names().collect();
    for (i, exp) in expected.iter().enumerate() {
        let found = header.get(i).unwrap_or("");
        if found != *exp {
            return Err(DatasetError::Header {
                index: i,
                expected: exp.to_string(),
                found: found.to_string(),
            });
        }
    }
    if header.len() > expected.len() {
        return Err(DatasetError::Header {
            index: expected.len(),
            expected: String::new(),
            found: header[expected.len()].to_string(),
        });
    }
    let has_category = schema.category_column().is_some();

    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let row = idx + 1;
        let rec = rec.map_err(|e| csv_err(row, e))?;
        let mut values = Vec::with_capacity(expected.len());
        let mut label = None;
        let mut attack_cat = None;
        for (col, raw) in schema.columns.iter().zip(rec.iter()) {
            match col.kind {
                ColumnKind::Label => label = Some(parse_label(row, raw)?),
                ColumnKind::Category => attack_cat = parse_category(raw),
                kind => values.push(parse_value(row, &col.name, kind, raw)?),
            }
        }
        let label = label.expect("schema has a label column");
        if has_category && (label == 1) != attack_cat.is_some() {
            return Err(DatasetError::Category {
                row,
                label,
                category: attack_cat.unwrap_or_default(),
            });
        }
        out.push(FlowRecord { values, label, attack_cat });
    }
    Ok(out)
}

pub fn load_csv(path: &Path, schema: &Schema) -> Result<Vec<FlowRecord>, DatasetError> {
    let file = std::fs::File::open(path)
        .map_err(|source| DatasetError::Open { path: path.display().to_string(), source })?;
    read_records(std::io::BufReader::new(file), schema)
}

/// Loads and concatenates several partition files in argument order.
pub fn load_csvs(paths: &[impl AsRef<Path>], schema: &Schema) -> Result<Vec<FlowRecord>, DatasetError> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(load_csv(p.as_ref(), schema)?);
    }
    Ok(all)
}

/// Reads rows for scoring. Columns are matched by header name; extra columns
/// are ignored, ignored-kind columns may be absent, and the label is optional.
pub fn read_raw_rows<R: Read>(reader: R, schema: &Schema) -> Result<Vec<RawRow>, DatasetError> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(|e| csv_err(0, e))?.clone();
    let find = |name: &str| header.iter().position(|h| h == name);

    let mut plan = Vec::new();
    for col in schema.value_columns() {
        let pos = find(&col.name);
        if pos.is_none() && col.kind != ColumnKind::Ignore {
            return Err(DatasetError::MissingColumn(col.name.clone()));
        }
        plan.push((col, pos));
    }
    let label_pos = find(schema.label_column());

    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let row = idx + 1;
        let rec = rec.map_err(|e| csv_err(row, e))?;
        let mut values = Vec::with_capacity(plan.len());
        for (col, pos) in &plan {
            let raw = pos.and_then(|p| rec.get(p)).unwrap_or("");
            values.push(parse_value(row, &col.name, col.kind, raw)?);
        }
        let label = match label_pos.and_then(|p| rec.get(p)) {
            Some("") | None => None,
            Some(raw) => Some(parse_label(row, raw)?),
        };
        out.push(RawRow { values, label });
    }
    Ok(out)
}

pub fn load_raw_csv(path: &Path, schema: &Schema) -> Result<Vec<RawRow>, DatasetError> {
    let file = std::fs::File::open(path)
        .map_err(|source| DatasetError::Open { path: path.display().to_string(), source })?;
    read_raw_rows(std::io::BufReader::new(file), schema)
}

pub fn write_records<W: Write>(writer: W, schema: &Schema, records: &[FlowRecord]) -> Result<(), DatasetError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(schema.column_names()).map_err(|e| csv_err(0, e))?;
    let mut fields = Vec::with_capacity(schema.columns.len());
    for (i, r) in records.iter().enumerate() {
        fields.clear();
        let mut values = r.values.iter();
        for col in &schema.columns {
            fields.push(match col.kind {
                ColumnKind::Label => r.label.to_string(),
                ColumnKind::Category => r.attack_cat.clone().unwrap_or_else(|| "Normal".into()),
                _ => values.next().map(FieldValue::render).unwrap_or_default(),
            });
        }
        wtr.write_record(&fields).map_err(|e| csv_err(i + 1, e))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, schema: &Schema, records: &[FlowRecord]) -> Result<(), DatasetError> {
    let mut buf = Vec::new();
    write_records(&mut buf, schema, records)?;
    write_atomic(path, &buf)?;
    Ok(())
}

/// Lexicographic integer codes for one categorical column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnEncoding {
    pub name: String,
    /// Distinct values, sorted; a value's code is its index.
    pub values: Vec<String>,
}

impl ColumnEncoding {
    /// Unseen values get the reserved code `values.len()`.
    pub fn code(&self, value: &str) -> usize {
        self.values
            .binary_search_by(|v| v.as_str().cmp(value))
            .unwrap_or(self.values.len())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingMap {
    pub columns: Vec<ColumnEncoding>,
}

impl EncodingMap {
    pub fn get(&self, column: &str) -> Option<&ColumnEncoding> {
        self.columns.iter().find(|c| c.name == column)
    }
}

pub fn fit_encoding<R: RecordValues>(
    records: &[R],
    schema: &Schema,
    categorical_columns: &[String],
) -> Result<EncodingMap, DatasetError> {
    let mut columns = Vec::with_capacity(categorical_columns.len());
    for name in categorical_columns {
        let pos = schema.position(name).ok_or_else(|| DatasetError::UnknownColumn(name.clone()))?;
        if schema.columns[pos].kind != ColumnKind::Categorical {
            return Err(DatasetError::NotCategorical(name.clone()));
        }
        let vi = schema.value_index(name).expect("categorical columns are value columns");
        let distinct: BTreeSet<&str> = records
            .iter()
            .filter_map(|r| match &r.values()[vi] {
                FieldValue::Text(s) => Some(s.as_str()),
                FieldValue::Num(_) => None,
            })
            .collect();
        columns.push(ColumnEncoding {
            name: name.clone(),
            values: distinct.into_iter().map(str::to_string).collect(),
        });
    }
    Ok(EncodingMap { columns })
}

/// Numeric design matrix over the schema's feature columns, categoricals
/// replaced by their codes.
pub fn feature_matrix<R: RecordValues>(
    records: &[R],
    schema: &Schema,
    encoding: &EncodingMap,
) -> Result<FeatureMatrix, DatasetError> {
    enum Plan<'a> {
        Num(usize),
        Code(usize, &'a ColumnEncoding),
    }
    let mut plans = Vec::new();
    let mut names = Vec::new();
    for col in schema.feature_columns() {
        let vi = schema.value_index(&col.name).expect("feature columns are value columns");
        plans.push(match col.kind {
            ColumnKind::Categorical => Plan::Code(
                vi,
                encoding.get(&col.name).ok_or_else(|| DatasetError::MissingEncoding(col.name.clone()))?,
            ),
            _ => Plan::Num(vi),
        });
        names.push(col.name.clone());
    }
    let mut data = Vec::with_capacity(records.len() * names.len());
    for (row, r) in records.iter().enumerate() {
        let vals = r.values();
        for (plan, name) in plans.iter().zip(&names) {
            data.push(match *plan {
                Plan::Num(i) => match &vals[i] {
                    FieldValue::Num(v) => *v,
                    FieldValue::Text(s) => parse_numeric(row + 1, name, s)?,
                },
                Plan::Code(i, enc) => match &vals[i] {
                    FieldValue::Text(s) => enc.code(s) as f64,
                    FieldValue::Num(v) => enc.code(&v.to_string()) as f64,
                },
            });
        }
    }
    Ok(FeatureMatrix::new(names, records.len(), data))
}

pub fn to_matrix(
    records: &[FlowRecord],
    schema: &Schema,
    encoding: &EncodingMap,
) -> Result<(FeatureMatrix, LabelVector), DatasetError> {
    let x = feature_matrix(records, schema, encoding)?;
    let y = records.iter().map(|r| r.label).collect();
    Ok((x, y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    /// (train, val, test) fractions.
    pub ratios: [f64; 3],
    pub seed: u64,
    pub stratify: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { ratios: [0.6, 0.2, 0.2], seed: 42, stratify: true }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.ratios.iter().any(|r| !(*r > 0.0)) {
            return Err(DatasetError::Split(format!("ratios must be positive: {:?}", self.ratios)));
        }
        let sum: f64 = self.ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DatasetError::Split(format!("ratios sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// (train, val, test) sizes: train is floored, test rounded to nearest,
    /// validation takes the remainder.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        let nf = n as f64;
        let train = ((nf * self.ratios[0]) + 1e-7).floor() as usize;
        let test = ((nf * self.ratios[2]).round() as usize).min(n - train.min(n));
        let train = train.min(n);
        [train, n - train - test, test]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Largest-remainder apportionment of `total` across classes in proportion
/// to their sizes.
fn apportion(class_sizes: &[usize], n: usize, total: usize) -> Vec<usize> {
    let quotas: Vec<f64> = class_sizes
        .iter()
        .map(|&c| c as f64 * total as f64 / n as f64)
        .collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut short = total - alloc.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if short == 0 {
            break;
        }
        if alloc[c] < class_sizes[c] {
            alloc[c] += 1;
            short -= 1;
        }
    }
    alloc
}

/// Seeded (optionally stratified) partition of row indices. Each returned
/// list is in ascending index order.
pub fn split_indices(labels: &[u8], spec: &SplitSpec) -> Result<SplitIndices, DatasetError> {
    spec.validate()?;
    let n = labels.len();
    if spec.stratify && n < 3 {
        return Err(DatasetError::Split(format!("{n} records cannot populate three stratified splits")));
    }
    let [n_train, _, n_test] = spec.sizes(n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());

    if spec.stratify {
        let classes: BTreeSet<u8> = labels.iter().copied().collect();
        let mut groups: Vec<Vec<usize>> = classes
            .iter()
            .map(|c| (0..n).filter(|&i| labels[i] == *c).collect())
            .collect();
        let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
        let train_alloc = apportion(&sizes, n, n_train);
        let rest: Vec<usize> = sizes.iter().zip(&train_alloc).map(|(s, t)| s - t).collect();
        let test_alloc = apportion_capped(&sizes, &rest, n, n_test);
        for (g, group) in groups.iter_mut().enumerate() {
            group.shuffle(&mut rng);
            let (a, b) = (train_alloc[g], train_alloc[g] + test_alloc[g]);
            train.extend_from_slice(&group[..a]);
            test.extend_from_slice(&group[a..b]);
            val.extend_from_slice(&group[b..]);
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..n_train + n_test]);
        val.extend_from_slice(&idx[n_train + n_test..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, val, test })
}

/// Like `apportion`, but never allocates more than `room[c]` to class `c`.
fn apportion_capped(class_sizes: &[usize], room: &[usize], n: usize, total: usize) -> Vec<usize> {
    let mut alloc = apportion(class_sizes, n, total);
    let mut excess = 0;
    for (a, r) in alloc.iter_mut().zip(room) {
        if *a > *r {
            excess += *a - *r;
            *a = *r;
        }
    }
    for (a, r) in alloc.iter_mut().zip(room) {
        let take = excess.min(r - *a);
        *a += take;
        excess -= take;
    }
    alloc
}

pub struct Splits<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub test: Vec<T>,
}

pub fn split(records: &[FlowRecord], spec: &SplitSpec) -> Result<Splits<FlowRecord>, DatasetError> {
    let labels: Vec<u8> = records.iter().map(|r| r.label).collect();
    let idx = split_indices(&labels, spec)?;
    let pick = |ix: &[usize]| ix.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    Ok(Splits { train: pick(&idx.train), val: pick(&idx.val), test: pick(&idx.test) })
}

/// Key-value sidecar describing how a split was produced.
pub fn split_provenance(spec: &SplitSpec, splits: &Splits<FlowRecord>) -> KvDocument {
    let mut doc = KvDocument::new();
    let attacks = |v: &[FlowRecord]| v.iter().filter(|r| r.label == 1).count();
    let total = splits.train.len() + splits.val.len() + splits.test.len();
    doc.set("seed", spec.seed);
    doc.set("stratify", spec.stratify);
    doc.set("ratio.train", spec.ratios[0]);
    doc.set("ratio.val", spec.ratios[1]);
    doc.set("ratio.test", spec.ratios[2]);
    doc.set("count.total", total);
    doc.set("count.train", splits.train.len());
    doc.set("count.val", splits.val.len());
    doc.set("count.test", splits.test.len());
    doc.set("attack.train", attacks(&splits.train));
    doc.set("attack.val", attacks(&splits.val));
    doc.set("attack.test", attacks(&splits.test));
    doc
}
