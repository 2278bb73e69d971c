//! Browser bindings for three interactive views: the planar toy example, image
//! reconstruction against the number of eigenfaces, and the relaxation vector.
//!
//! The plain Rust functions carry the logic; the `#[wasm_bindgen]` wrappers only
//! convert errors.

pub mod faces;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qface::dataset::{export_rgb8, TrainingSet};
use qface::model::{relaxation_vector, train};
use qface::recognize::project;
use qface::reconstruct::{reconstruct, reconstruction_ratio};
use qface::toy::{toy_case_from_points, toy_points, Point, ToySpec};
use qface::{EigenfaceModel, Error, Mode, Result};

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Toy example points and results for plotting.
#[derive(Serialize)]
pub struct ToyView {
    pub seed: u64,
    pub relaxation: [f64; 2],
    pub direction_2dcpca: Point,
    pub direction_sr: Point,
    pub train_variance: [f64; 2],
    pub whole_variance: [f64; 2],
    pub train: [Vec<Point>; 2],
    pub test: [Vec<Point>; 2],
}

pub fn toy_view(seed: u64) -> Result<ToyView> {
    let points = toy_points(&ToySpec::default(), seed);
    let c = toy_case_from_points(seed, &points)?;
    Ok(ToyView {
        seed,
        relaxation: c.relaxation,
        direction_2dcpca: c.direction_2dcpca,
        direction_sr: c.direction_sr,
        train_variance: [c.train_variance_2dcpca, c.train_variance_sr],
        whole_variance: [c.whole_variance_2dcpca, c.whole_variance_sr],
        train: points.train,
        test: points.test,
    })
}

/// JSON-encoded [`ToyView`].
#[wasm_bindgen]
pub fn toy_json(seed: u64) -> std::result::Result<String, JsError> {
    let view = toy_view(seed).map_err(js)?;
    serde_json::to_string(&view).map_err(|e| JsError::new(&e.to_string()))
}

/// Softmax weights for the given per-class largest variances.
#[wasm_bindgen]
pub fn relaxation(lambda_max: Vec<f64>) -> std::result::Result<Vec<f64>, JsError> {
    relaxation_vector(&lambda_max)
        .map(|w| w.weights().to_vec())
        .map_err(js)
}

/// A trained full-rank model over a small face set.
#[wasm_bindgen]
pub struct Reconstructor {
    set: TrainingSet,
    model: EigenfaceModel,
}

impl Reconstructor {
    pub fn build(seed: u64, mode: Mode, size: usize) -> Result<Self> {
        let set = faces::face_set(seed, 5, 4, size)?;
        let model = train(&set, size, mode)?;
        Ok(Self { set, model })
    }

    /// RGBA pixels of the rank-`r` reconstruction and its ratio.
    pub fn reconstruction(&self, sample: usize, r: usize) -> Result<(Vec<u8>, f64)> {
        let s = self
            .set
            .samples()
            .get(sample)
            .ok_or_else(|| Error::InvalidArgument(format!("no sample {sample}")))?;
        let m = self.model.truncate(r)?;
        let rec = reconstruct(&project(&s.image, &m)?, &m)?;
        let ratio = reconstruction_ratio(&s.image, &rec, m.mean())?;
        Ok((rgba(&rec), ratio))
    }

    pub fn original(&self, sample: usize) -> Option<Vec<u8>> {
        self.set.samples().get(sample).map(|s| rgba(&s.image))
    }
}

fn rgba(img: &qface::QMatrix) -> Vec<u8> {
    export_rgb8(img)
        .chunks_exact(3)
        .flat_map(|p| [p[0], p[1], p[2], 255])
        .collect()
}

#[wasm_bindgen]
impl Reconstructor {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64, relaxed: bool) -> std::result::Result<Reconstructor, JsError> {
        let mode = if relaxed { Mode::Sr2dcpca } else { Mode::Twodcpca };
        Self::build(seed, mode, 32).map_err(js)
    }

    pub fn size(&self) -> usize {
        self.model.dims().1
    }

    pub fn samples(&self) -> usize {
        self.set.len()
    }

    pub fn max_r(&self) -> usize {
        self.model.r()
    }

    pub fn original_rgba(&self, sample: usize) -> Vec<u8> {
        self.original(sample).unwrap_or_default()
    }

    pub fn rgba(&self, sample: usize, r: usize) -> std::result::Result<Vec<u8>, JsError> {
        self.reconstruction(sample, r).map(|v| v.0).map_err(js)
    }

    pub fn ratio(&self, sample: usize, r: usize) -> std::result::Result<f64, JsError> {
        self.reconstruction(sample, r).map(|v| v.1).map_err(js)
    }
}
