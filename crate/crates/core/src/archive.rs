//! Binary model and gallery files.
//!
//! Layout: 8-byte magic, `u64` little-endian header length, a JSON header, then raw
//! little-endian `f64` payload. Quaternion matrices are stored as their four planes
//! (`w`, `x`, `y`, `z`), each row-major. Floats round-trip bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::baseline::{GrayFeature, RealEigenfaceModel};
use crate::error::{Error, Result};
use crate::matrix::QMatrix;
use crate::model::{EigenfaceModel, Mode, RelaxationVector};
use crate::recognize::FeatureMatrix;

const MODEL_MAGIC: &[u8; 8] = b"QFMODEL1";
const GALLERY_MAGIC: &[u8; 8] = b"QFGALRY1";
const FORMAT_VERSION: u32 = 1;

/// A trained model of any supported method.
#[derive(Clone, Debug, PartialEq)]
pub enum SavedModel {
    Color(EigenfaceModel),
    Gray(RealEigenfaceModel),
}

impl SavedModel {
    pub fn method(&self) -> &'static str {
        match self {
            SavedModel::Color(m) => m.mode().as_str(),
            SavedModel::Gray(_) => crate::baseline::METHOD,
        }
    }

    pub fn r(&self) -> usize {
        match self {
            SavedModel::Color(m) => m.r(),
            SavedModel::Gray(m) => m.r(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            SavedModel::Color(m) => m.dims(),
            SavedModel::Gray(m) => m.dims(),
        }
    }
}

/// Gallery features matching a [`SavedModel`].
#[derive(Clone, Debug, PartialEq)]
pub enum SavedGallery {
    Color(Vec<FeatureMatrix>),
    Gray(Vec<GrayFeature>),
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    format: u32,
    method: String,
    rows: usize,
    cols: usize,
    r: usize,
    labels: Vec<String>,
    relaxation: Vec<f64>,
    /// D for color models, eigenvalues for gray models.
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GalleryEntry {
    label: String,
    source: String,
}

#[derive(Serialize, Deserialize)]
struct GalleryHeader {
    format: u32,
    kind: String,
    rows: usize,
    r: usize,
    entries: Vec<GalleryEntry>,
}

fn container<H: Serialize>(magic: &[u8; 8], header: &H, payload: &[f64]) -> Result<Vec<u8>> {
    let json = serde_json::to_vec(header)?;
    let mut out = Vec::with_capacity(16 + json.len() + 8 * payload.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for v in payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

fn open_container<'a, H: Deserialize<'a>>(magic: &[u8; 8], bytes: &'a [u8]) -> Result<(H, Vec<f64>)> {
    let bad = |m: &str| Error::Archive(m.to_string());
    if bytes.len() < 16 || &bytes[..8] != magic {
        return Err(bad("bad magic"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let end = usize::try_from(len)
        .ok()
        .and_then(|l| l.checked_add(16))
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| bad("truncated header"))?;
    let header: H = serde_json::from_slice(&bytes[16..end])?;
    let body = &bytes[end..];
    if !body.len().is_multiple_of(8) {
        return Err(bad("payload is not a whole number of f64 values"));
    }
    let payload = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((header, payload))
}

fn push_qmatrix(out: &mut Vec<f64>, m: &QMatrix) {
    for plane in m.planes() {
        out.extend_from_slice(plane);
    }
}

/// Row-major copy of a real matrix.
fn push_real(out: &mut Vec<f64>, m: &DMatrix<f64>) {
    for r in 0..m.nrows() {
        out.extend(m.row(r).iter());
    }
}

struct Reader {
    data: Vec<f64>,
    pos: usize,
}

impl Reader {
    fn take(&mut self, n: usize) -> Result<&[f64]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| Error::Archive("payload too short".into()))?;
        let slice = &self.data[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn qmatrix(&mut self, rows: usize, cols: usize) -> Result<QMatrix> {
        let len = rows * cols;
        let planes = [
            self.take(len)?.to_vec(),
            self.take(len)?.to_vec(),
            self.take(len)?.to_vec(),
            self.take(len)?.to_vec(),
        ];
        QMatrix::from_planes(rows, cols, planes)
    }

    fn real(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        Ok(DMatrix::from_row_slice(rows, cols, self.take(rows * cols)?))
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Archive("trailing payload".into()));
        }
        Ok(())
    }
}

pub fn encode_model(model: &SavedModel) -> Result<Vec<u8>> {
    let (rows, cols) = model.dims();
    let mut payload = Vec::new();
    let header = match model {
        SavedModel::Color(m) => {
            push_qmatrix(&mut payload, m.mean());
            push_qmatrix(&mut payload, m.projection());
            ModelHeader {
                format: FORMAT_VERSION,
                method: m.mode().as_str().into(),
                rows,
                cols,
                r: m.r(),
                labels: m.labels().to_vec(),
                relaxation: m.relaxation().weights().to_vec(),
                weights: m.weights().to_vec(),
            }
        }
        SavedModel::Gray(m) => {
            push_real(&mut payload, &m.mean);
            push_real(&mut payload, &m.projection);
            ModelHeader {
                format: FORMAT_VERSION,
                method: crate::baseline::METHOD.into(),
                rows,
                cols,
                r: m.r(),
                labels: Vec::new(),
                relaxation: Vec::new(),
                weights: m.eigenvalues.clone(),
            }
        }
    };
    container(MODEL_MAGIC, &header, &payload)
}

pub fn decode_model(bytes: &[u8]) -> Result<SavedModel> {
    let (h, data): (ModelHeader, _) = open_container(MODEL_MAGIC, bytes)?;
    if h.format != FORMAT_VERSION {
        return Err(Error::Archive(format!("unsupported format version {}", h.format)));
    }
    if h.weights.len() != h.r {
        return Err(Error::Archive("weight count differs from r".into()));
    }
    let mut rd = Reader { data, pos: 0 };
    let model = if h.method == crate::baseline::METHOD {
        let mean = rd.real(h.rows, h.cols)?;
        let projection = rd.real(h.cols, h.r)?;
        SavedModel::Gray(RealEigenfaceModel {
            mean,
            projection,
            eigenvalues: h.weights,
        })
    } else {
        let mode: Mode = h.method.parse().map_err(|_| Error::Archive(format!("unknown method `{}`", h.method)))?;
        let mean = rd.qmatrix(h.rows, h.cols)?;
        let projection = rd.qmatrix(h.cols, h.r)?;
        SavedModel::Color(EigenfaceModel::from_parts(
            mode,
            mean,
            projection,
            h.weights,
            RelaxationVector::from_weights(h.relaxation)?,
            h.labels,
        )?)
    };
    rd.finish()?;
    Ok(model)
}

pub fn encode_gallery(gallery: &SavedGallery) -> Result<Vec<u8>> {
    let mut payload = Vec::new();
    let (kind, shape, entries) = match gallery {
        SavedGallery::Color(g) => {
            g.iter().for_each(|f| push_qmatrix(&mut payload, &f.features));
            let e = g.iter().map(|f| (f.label.clone(), f.source.clone(), f.features.shape()));
            ("color", g.first().map(|f| f.features.shape()), e.collect::<Vec<_>>())
        }
        SavedGallery::Gray(g) => {
            g.iter().for_each(|f| push_real(&mut payload, &f.features));
            let e = g.iter().map(|f| (f.label.clone(), f.source.clone(), f.features.shape()));
            ("gray", g.first().map(|f| f.features.shape()), e.collect::<Vec<_>>())
        }
    };
    let (rows, r) = shape.ok_or(Error::EmptyGallery)?;
    if entries.iter().any(|e| e.2 != (rows, r)) {
        return Err(Error::Archive("gallery features differ in shape".into()));
    }
    let header = GalleryHeader {
        format: FORMAT_VERSION,
        kind: kind.into(),
        rows,
        r,
        entries: entries
            .into_iter()
            .map(|(label, source, _)| GalleryEntry { label, source })
            .collect(),
    };
    container(GALLERY_MAGIC, &header, &payload)
}

pub fn decode_gallery(bytes: &[u8]) -> Result<SavedGallery> {
    let (h, data): (GalleryHeader, _) = open_container(GALLERY_MAGIC, bytes)?;
    if h.format != FORMAT_VERSION {
        return Err(Error::Archive(format!("unsupported format version {}", h.format)));
    }
    let mut rd = Reader { data, pos: 0 };
    let gallery = match h.kind.as_str() {
        "color" => SavedGallery::Color(
            h.entries
                .into_iter()
                .map(|e| {
                    Ok(FeatureMatrix {
                        features: rd.qmatrix(h.rows, h.r)?,
                        label: e.label,
                        source: e.source,
                    })
                })
                .collect::<Result<_>>()?,
        ),
        "gray" => SavedGallery::Gray(
            h.entries
                .into_iter()
                .map(|e| {
                    Ok(GrayFeature {
                        features: rd.real(h.rows, h.r)?,
                        label: e.label,
                        source: e.source,
                    })
                })
                .collect::<Result<_>>()?,
        ),
        other => return Err(Error::Archive(format!("unknown gallery kind `{other}`"))),
    };
    rd.finish()?;
    Ok(gallery)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::file(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::file(path, e))?;
    tmp.persist(path).map_err(|e| Error::file(path, e.error))?;
    Ok(())
}

pub fn save_model(path: &Path, model: &SavedModel) -> Result<()> {
    write_atomic(path, &encode_model(model)?)
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    decode_model(&fs::read(path).map_err(|e| Error::file(path, e))?)
}

pub fn save_gallery(path: &Path, gallery: &SavedGallery) -> Result<()> {
    write_atomic(path, &encode_gallery(gallery)?)
}

pub fn load_gallery(path: &Path) -> Result<SavedGallery> {
    decode_gallery(&fs::read(path).map_err(|e| Error::file(path, e))?)
}
