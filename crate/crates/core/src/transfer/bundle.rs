use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TransferError;
use crate::dataset::EncodingMap;
use crate::features::{FeatureSelection, ScalerParams};
use crate::fsutil::{fnv1a64, write_atomic};
use crate::model::{ArchitectureSpec, Model, ModelError};
use crate::nn::{LayerSpec, Network, Tensor};
use crate::schema::Schema;

pub const MAGIC: [u8; 4] = *b"NIDT";
pub const FORMAT_VERSION: u32 = 1;

/// The JSON part of a bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleHeader {
    pub architecture: ArchitectureSpec,
    pub selection: FeatureSelection,
    pub scaler: ScalerParams,
    pub encoding: EncodingMap,
    pub schema: Schema,
    /// Free-form provenance (seed, source dataset, chosen epoch, ...).
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub header: BundleHeader,
    pub model: Model,
}

impl Bundle {
    /// Assembles a bundle, refusing inconsistent parts: the selection must
    /// match the model input width, the scaler must cover the selection in
    /// order, and every selected feature must be a schema feature column.
    pub fn new(
        model: Model,
        selection: FeatureSelection,
        scaler: ScalerParams,
        encoding: EncodingMap,
        schema: Schema,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self, TransferError> {
        let header = BundleHeader { architecture: model.arch.clone(), selection, scaler, encoding, schema, metadata };
        check_header(&header)?;
        Ok(Self { header, model })
    }

    pub fn encode(&self) -> Vec<u8> {
        let json = serde_json::to_vec(&self.header).expect("header serializes");
        let params = self.model.network.params();
        let mut out = Vec::with_capacity(12 + json.len() + 4 + self.model.network.param_count() * 4);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        out.extend_from_slice(&(params.len() as u32).to_le_bytes());
        for t in params {
            out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
            for &d in t.shape() {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }
}

fn check_header(h: &BundleHeader) -> Result<(), TransferError> {
    let bad = |m: String| Err(TransferError::Inconsistent(m));
    if h.selection.k() != h.architecture.input_features {
        return bad(format!(
            "{} selected features but the model takes {} inputs",
            h.selection.k(),
            h.architecture.input_features
        ));
    }
    let scaled: Vec<&str> = h.scaler.columns.iter().map(|c| c.name.as_str()).collect();
    if scaled.iter().ne(h.selection.kept.iter()) {
        return bad("scaler columns do not match the selected features".into());
    }
    let features = h.schema.feature_names();
    for name in &h.selection.kept {
        if !features.contains(name) {
            return bad(format!("selected feature `{name}` is not a schema feature column"));
        }
    }
    for enc in &h.encoding.columns {
        if enc.values.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("encoding for `{}` is not sorted and distinct", enc.name));
        }
    }
    for name in h.schema.categorical_names() {
        if h.encoding.get(&name).is_none() {
            return bad(format!("no encoding for categorical column `{name}`"));
        }
    }
    Ok(())
}

/// Rejects anything but the architectures this crate builds, which also
/// bounds every layer size before any allocation.
fn check_architecture(arch: &ArchitectureSpec) -> Result<(), TransferError> {
    let rate = arch
        .layers
        .iter()
        .find_map(|l| match l {
            LayerSpec::Dropout { rate } => Some(*rate),
            _ => None,
        })
        .unwrap_or(0.0);
    if !(0.0..1.0).contains(&rate) {
        return Err(TransferError::HeaderSchema(format!("dropout rate {rate} outside [0, 1)")));
    }
    let canonical = ArchitectureSpec::new(arch.family, arch.input_features, rate)?;
    if &canonical != arch {
        return Err(TransferError::HeaderSchema(format!("unrecognized {} layer stack", arch.family)));
    }
    Ok(())
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], TransferError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len()).ok_or(TransferError::LengthMismatch {
            expected: self.pos as u64 + n as u64,
            actual: self.data.len() as u64,
        })?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, TransferError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

/// Parses a bundle from memory. Never panics on malformed input.
pub fn decode_bundle(data: &[u8]) -> Result<Bundle, TransferError> {
    if data.len() < 4 || data[..4] != MAGIC {
        return Err(TransferError::BadMagic);
    }
    let mut r = Reader { data, pos: 4 };
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(TransferError::UnsupportedVersion(version));
    }
    let header_len = r.u32()? as usize;
    let header: BundleHeader =
        serde_json::from_slice(r.take(header_len)?).map_err(|e| TransferError::HeaderSchema(e.to_string()))?;
    header.schema.validate().map_err(|e| TransferError::HeaderSchema(e.to_string()))?;
    if header.selection.k() != header.architecture.input_features {
        return Err(TransferError::Inconsistent(format!(
            "{} selected features but the model takes {} inputs",
            header.selection.k(),
            header.architecture.input_features
        )));
    }
    check_architecture(&header.architecture)?;
    check_header(&header)?;

    let expected = Network::<f32>::expected_param_shapes(&header.architecture.input_shape(), &header.architecture.layers)
        .map_err(ModelError::from)?;
    let count = r.u32()? as usize;
    if count != expected.len() {
        return Err(TransferError::Inconsistent(format!(
            "{count} weight tensors, architecture needs {}",
            expected.len()
        )));
    }
    let mut params = Vec::with_capacity(count);
    for (i, want) in expected.iter().enumerate() {
        let ndim = r.u32()? as usize;
        if ndim != want.len() {
            return Err(TransferError::Inconsistent(format!("tensor {i} has {ndim} dimensions, expected {}", want.len())));
        }
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(r.u32()? as usize);
        }
        if &shape != want {
            return Err(TransferError::Inconsistent(format!("tensor {i} has shape {shape:?}, expected {want:?}")));
        }
        let n: usize = shape.iter().product();
        let bytes = r.take(n * 4)?;
        let values = bytes.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes"))).collect();
        params.push(Tensor::new(shape, values).map_err(ModelError::from)?);
    }
    if r.pos != data.len() {
        return Err(TransferError::LengthMismatch { expected: r.pos as u64, actual: data.len() as u64 });
    }
    let network = Network::from_params(&header.architecture.input_shape(), &header.architecture.layers, params)
        .map_err(ModelError::from)?;
    let model = Model::from_parts(header.architecture.clone(), network)?;
    Ok(Bundle { header, model })
}

pub fn load_bundle(path: &Path) -> Result<Bundle, TransferError> {
    decode_bundle(&std::fs::read(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExportSummary {
    pub bytes: u64,
    /// FNV-1a 64 of the written file.
    pub digest: u64,
}

impl fmt::Display for ExportSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bytes, fnv1a64 {:016x}", self.bytes, self.digest)
    }
}

/// Writes the bundle atomically.
pub fn export_bundle(path: &Path, bundle: &Bundle) -> Result<ExportSummary, TransferError> {
    check_header(&bundle.header)?;
    let bytes = bundle.encode();
    write_atomic(path, &bytes)?;
    Ok(ExportSummary { bytes: bytes.len() as u64, digest: fnv1a64(&bytes) })
}
