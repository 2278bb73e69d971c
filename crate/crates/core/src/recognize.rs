//! Feature extraction and nearest-neighbor classification.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{LabeledSample, TrainingSet};
use crate::error::{Error, Result};
use crate::matrix::QMatrix;
use crate::model::EigenfaceModel;

/// Projection `P = (F − Ψ)V` of one image.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub features: QMatrix,
    pub label: String,
    pub source: String,
}

impl FeatureMatrix {
    /// Keeps the leading `r` principal component columns.
    pub fn truncate(&self, r: usize) -> Self {
        Self {
            features: self.features.columns(0..r),
            ..self.clone()
        }
    }
}

/// Outcome of one nearest-neighbor query.
#[derive(Clone, Debug, PartialEq)]
pub struct RecognitionResult {
    pub label: String,
    pub index: usize,
    pub distance: f64,
    pub distances: Vec<f64>,
}

fn check_dims(image: &QMatrix, dims: (usize, usize)) -> Result<()> {
    if image.shape() != dims {
        return Err(Error::DimensionMismatch {
            op: "project",
            left: image.shape(),
            right: dims,
        });
    }
    Ok(())
}

/// `(F − Ψ)V`.
pub fn project(image: &QMatrix, model: &EigenfaceModel) -> Result<QMatrix> {
    check_dims(image, model.dims())?;
    image.sub(model.mean())?.matmul(model.projection())
}

pub fn project_sample(sample: &LabeledSample, model: &EigenfaceModel) -> Result<FeatureMatrix> {
    Ok(FeatureMatrix {
        features: project(&sample.image, model)?,
        label: sample.label.clone(),
        source: sample.source.clone(),
    })
}

/// Gallery of every training image's feature matrix, in training order.
pub fn build_gallery(t: &TrainingSet, model: &EigenfaceModel) -> Result<Vec<FeatureMatrix>> {
    t.samples()
        .par_iter()
        .map(|s| project_sample(s, model))
        .collect()
}

/// `‖(P − Q) D‖_F` when weighted, `‖P − Q‖_F` otherwise.
pub fn d_norm_distance(p: &QMatrix, q: &QMatrix, d: &[f64], weighted: bool) -> Result<f64> {
    if p.shape() != q.shape() {
        return Err(Error::DimensionMismatch {
            op: "d_norm_distance",
            left: p.shape(),
            right: q.shape(),
        });
    }
    let diff = p.sub(q)?;
    if weighted {
        Ok(diff.scale_columns(d)?.fro_norm())
    } else {
        Ok(diff.fro_norm())
    }
}

/// Index of the smallest distance; the lowest index wins ties.
pub(crate) fn argmin(distances: &[f64]) -> Option<usize> {
    distances
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((i, d)),
        })
        .map(|(i, _)| i)
}

/// Nearest gallery entry under the mode's distance (D-norm for SR-2DCPCA).
pub fn classify(image: &QMatrix, model: &EigenfaceModel, gallery: &[FeatureMatrix]) -> Result<RecognitionResult> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let p = project(image, model)?;
    classify_features(&p, model, gallery)
}

pub fn classify_features(
    p: &QMatrix,
    model: &EigenfaceModel,
    gallery: &[FeatureMatrix],
) -> Result<RecognitionResult> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let weighted = model.mode().weighted();
    let distances = gallery
        .iter()
        .map(|g| d_norm_distance(&g.features, p, model.weights(), weighted))
        .collect::<Result<Vec<_>>>()?;
    let index = argmin(&distances).expect("non-empty");
    Ok(RecognitionResult {
        label: gallery[index].label.clone(),
        index,
        distance: distances[index],
        distances,
    })
}

/// One evaluated query.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub query: String,
    pub predicted: String,
    pub actual: String,
    pub distance: f64,
    pub correct: bool,
}

/// Accuracy over a labeled test list.
#[derive(Clone, Debug, Serialize)]
pub struct AccuracyReport {
    pub method: String,
    pub r: usize,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    /// `actual → predicted → count`.
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
    /// Mean wall-clock time per query in milliseconds. Machine dependent.
    pub mean_latency_ms: f64,
    #[serde(skip)]
    pub predictions: Vec<Prediction>,
}

impl AccuracyReport {
    pub(crate) fn from_predictions(method: &str, r: usize, predictions: Vec<Prediction>, elapsed_ms: f64) -> Self {
        let total = predictions.len();
        let correct = predictions.iter().filter(|p| p.correct).count();
        let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for p in &predictions {
            *confusion
                .entry(p.actual.clone())
                .or_default()
                .entry(p.predicted.clone())
                .or_default() += 1;
        }
        Self {
            method: method.to_string(),
            r,
            correct,
            total,
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
            confusion,
            mean_latency_ms: if total == 0 { 0.0 } else { elapsed_ms / total as f64 },
            predictions,
        }
    }
}

/// Classifies every test sample against the gallery.
pub fn evaluate(model: &EigenfaceModel, gallery: &[FeatureMatrix], test: &[LabeledSample]) -> Result<AccuracyReport> {
    let start = Instant::now();
    let predictions = test
        .par_iter()
        .map(|s| {
            let res = classify(&s.image, model, gallery)?;
            Ok(Prediction {
                query: s.source.clone(),
                correct: res.label == s.label,
                predicted: res.label,
                actual: s.label.clone(),
                distance: res.distance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    Ok(AccuracyReport::from_predictions(
        model.mode().as_str(),
        model.r(),
        predictions,
        elapsed,
    ))
}
