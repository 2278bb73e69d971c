//! Labeled color images encoded as pure quaternion matrices.

pub mod manifest;
pub mod pnm;
pub mod synth;

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::QMatrix;
use crate::quaternion::Quaternion;

pub use manifest::load_manifest;
pub use synth::{synth_dataset, SynthSpec};

/// BT.601 luma weights for R, G, B.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// An RGB image as an `height × width` pure quaternion matrix `R i + G j + B k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorImage {
    pixels: QMatrix,
}

impl ColorImage {
    /// Wraps a matrix after checking zero real parts and channels within `[0, 255]`.
    pub fn from_matrix(pixels: QMatrix) -> Result<Self> {
        if pixels.plane(0).iter().any(|&w| w != 0.0) {
            return Err(Error::Image("pixel with nonzero real part".into()));
        }
        if pixels.planes()[1..]
            .iter()
            .flatten()
            .any(|v| !(0.0..=255.0).contains(v))
        {
            return Err(Error::Image("channel value outside [0, 255]".into()));
        }
        Ok(Self { pixels })
    }

    /// From interleaved 8-bit RGB, row-major.
    pub fn from_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::Image(format!(
                "{} bytes for a {width}x{height} RGB image",
                rgb.len()
            )));
        }
        let pixels = QMatrix::from_fn(height, width, |r, c| {
            let p = &rgb[(r * width + c) * 3..][..3];
            Quaternion::pure(p[0] as f64, p[1] as f64, p[2] as f64)
        });
        Ok(Self { pixels })
    }

    /// Gray bytes replicated into all three channels.
    pub fn from_gray8(width: usize, height: usize, gray: &[u8]) -> Result<Self> {
        if gray.len() != width * height {
            return Err(Error::Image(format!(
                "{} bytes for a {width}x{height} gray image",
                gray.len()
            )));
        }
        let pixels = QMatrix::from_fn(height, width, |r, c| {
            let v = gray[r * width + c] as f64;
            Quaternion::pure(v, v, v)
        });
        Ok(Self { pixels })
    }

    pub fn from_pnm(img: &pnm::PnmImage) -> Result<Self> {
        match img.kind {
            pnm::PnmKind::Rgb => Self::from_rgb8(img.width, img.height, &img.data),
            pnm::PnmKind::Gray => Self::from_gray8(img.width, img.height, &img.data),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::file(path, e))?;
        let img = pnm::decode(&bytes)
            .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?;
        Self::from_pnm(&img)
    }

    pub fn width(&self) -> usize {
        self.pixels.cols()
    }

    pub fn height(&self) -> usize {
        self.pixels.rows()
    }

    pub fn pixels(&self) -> &QMatrix {
        &self.pixels
    }

    pub fn into_matrix(self) -> QMatrix {
        self.pixels
    }

    /// ITU-R BT.601 luma `0.299 R + 0.587 G + 0.114 B`.
    pub fn to_grayscale(&self) -> DMatrix<f64> {
        to_grayscale(&self.pixels)
    }
}

/// Luma of every pixel of a quaternion-encoded image; the real part is ignored.
pub fn to_grayscale(pixels: &QMatrix) -> DMatrix<f64> {
    let (rows, cols) = pixels.shape();
    DMatrix::from_fn(rows, cols, |r, c| {
        let q = pixels.get(r, c);
        LUMA[0] * q.x + LUMA[1] * q.y + LUMA[2] * q.z
    })
}

/// Clamps channels to `[0, 255]`, rounds, and interleaves as RGB bytes.
pub fn export_rgb8(pixels: &QMatrix) -> Vec<u8> {
    let to_byte = |v: f64| v.clamp(0.0, 255.0).round() as u8;
    let (rows, cols) = pixels.shape();
    let mut out = Vec::with_capacity(rows * cols * 3);
    for r in 0..rows {
        for c in 0..cols {
            let q = pixels.get(r, c);
            out.extend([to_byte(q.x), to_byte(q.y), to_byte(q.z)]);
        }
    }
    out
}

/// Encodes a quaternion image as a canonical P6 file.
pub fn encode_ppm(pixels: &QMatrix) -> Vec<u8> {
    pnm::encode(&pnm::PnmImage {
        kind: pnm::PnmKind::Rgb,
        width: pixels.cols(),
        height: pixels.rows(),
        data: export_rgb8(pixels),
    })
}

/// One encoded image with its class label and provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub image: QMatrix,
    pub label: String,
    pub source: String,
}

impl LabeledSample {
    pub fn new(image: QMatrix, label: impl Into<String>, source: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::InvalidArgument("empty label".into()));
        }
        Ok(Self {
            image,
            label,
            source: source.into(),
        })
    }
}

/// Sample indices belonging to one class, in insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassGroup {
    pub label: String,
    pub members: Vec<usize>,
}

/// Training samples partitioned into classes; every image shares one shape.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    samples: Vec<LabeledSample>,
    classes: Vec<ClassGroup>,
    dims: (usize, usize),
}

impl TrainingSet {
    /// Groups samples by label in order of first appearance.
    pub fn new(samples: Vec<LabeledSample>) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyTrainingSet)?;
        let dims = first.image.shape();
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::Image("zero-sized training image".into()));
        }
        let mut classes: Vec<ClassGroup> = Vec::new();
        for (idx, s) in samples.iter().enumerate() {
            check_dims(s, dims)?;
            match classes.iter_mut().find(|c| c.label == s.label) {
                Some(c) => c.members.push(idx),
                None => classes.push(ClassGroup {
                    label: s.label.clone(),
                    members: vec![idx],
                }),
            }
        }
        Ok(Self {
            samples,
            classes,
            dims,
        })
    }

    /// The same images with every sample in its own class.
    pub fn with_singleton_labels(&self) -> Self {
        let samples: Vec<LabeledSample> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| LabeledSample {
                label: format!("#{i}"),
                ..s.clone()
            })
            .collect();
        Self::new(samples).expect("already validated")
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn classes(&self) -> &[ClassGroup] {
        &self.classes
    }

    pub fn class_samples(&self, class: usize) -> impl Iterator<Item = &LabeledSample> {
        self.classes[class].members.iter().map(|&i| &self.samples[i])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.members.len()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.label.clone()).collect()
    }

    /// `(rows, cols)` = `(m, n)` shared by every image.
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Checks a query image against the training shape.
    pub fn check(&self, s: &LabeledSample) -> Result<()> {
        check_dims(s, self.dims)
    }
}

fn check_dims(s: &LabeledSample, expected: (usize, usize)) -> Result<()> {
    if s.image.shape() != expected {
        return Err(Error::InconsistentDimensions {
            source_name: s.source.clone(),
            got: s.image.shape(),
            expected,
        });
    }
    Ok(())
}

/// A training split plus the held-out samples.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub train: TrainingSet,
    pub test: Vec<LabeledSample>,
}
