//! Grayscale 2DPCA baseline in real arithmetic.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::dataset::{to_grayscale, LabeledSample, TrainingSet};
use crate::eig::RANK_TOL;
use crate::error::{Error, Result};
use crate::recognize::{argmin, AccuracyReport, Prediction, RecognitionResult};

pub const METHOD: &str = "2dpca";

/// Real eigenface model trained on luma images.
#[derive(Clone, Debug, PartialEq)]
pub struct RealEigenfaceModel {
    pub mean: DMatrix<f64>,
    /// `n × r`, orthonormal columns.
    pub projection: DMatrix<f64>,
    /// Leading `r` eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

impl RealEigenfaceModel {
    pub fn r(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.mean.shape()
    }

    pub fn truncate(&self, r: usize) -> Result<Self> {
        if r == 0 || r > self.r() {
            return Err(Error::RankOutOfRange { r, max: self.r() });
        }
        Ok(Self {
            mean: self.mean.clone(),
            projection: self.projection.columns(0, r).into_owned(),
            eigenvalues: self.eigenvalues[..r].to_vec(),
        })
    }
}

/// A grayscale sample; the image is the BT.601 luma of the color sample.
#[derive(Clone, Debug, PartialEq)]
pub struct GraySample {
    pub image: DMatrix<f64>,
    pub label: String,
    pub source: String,
}

impl From<&LabeledSample> for GraySample {
    fn from(s: &LabeledSample) -> Self {
        Self {
            image: to_grayscale(&s.image),
            label: s.label.clone(),
            source: s.source.clone(),
        }
    }
}

pub fn grayscale_samples(samples: &[LabeledSample]) -> Vec<GraySample> {
    samples.iter().map(GraySample::from).collect()
}

/// Full descending spectrum and eigenvectors of `(1/ℓ) Σ (F − Ψ)ᵀ(F − Ψ)`.
pub fn covariance_2dpca(samples: &[GraySample]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let first = samples.first().ok_or(Error::EmptyTrainingSet)?;
    let (m, n) = first.image.shape();
    for s in samples {
        if s.image.shape() != (m, n) {
            return Err(Error::InconsistentDimensions {
                source_name: s.source.clone(),
                got: s.image.shape(),
                expected: (m, n),
            });
        }
    }
    let ell = samples.len() as f64;
    let mut mean = DMatrix::<f64>::zeros(m, n);
    for s in samples {
        mean += &s.image;
    }
    mean /= ell;
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for s in samples {
        let d = &s.image - &mean;
        cov += d.transpose() * &d;
    }
    cov /= ell;
    Ok((mean, cov))
}

/// Trains 2DPCA with `r` eigenfaces.
pub fn train_2dpca(samples: &[GraySample], r: usize) -> Result<RealEigenfaceModel> {
    let (mean, cov) = covariance_2dpca(samples)?;
    let n = cov.nrows();
    if r == 0 || r > n {
        return Err(Error::RankOutOfRange { r, max: n });
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let (lambda_1, lambda_r) = (values[0], values[r - 1]);
    if lambda_1 <= 0.0 || lambda_r <= RANK_TOL * lambda_1 {
        return Err(Error::RankDeficient {
            r,
            lambda_r,
            lambda_1,
        });
    }
    let mut projection = DMatrix::<f64>::zeros(n, r);
    for (dst, &src) in order.iter().take(r).enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        // sign gauge: first entry of largest magnitude is positive
        let max = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(p) = col.iter().find(|v| v.abs() >= max * (1.0 - 1e-12)) {
            if *p < 0.0 {
                col.neg_mut();
            }
        }
        projection.set_column(dst, &col);
    }
    Ok(RealEigenfaceModel {
        mean,
        projection,
        eigenvalues: values[..r].to_vec(),
    })
}

pub fn train_2dpca_set(t: &TrainingSet, r: usize) -> Result<RealEigenfaceModel> {
    train_2dpca(&grayscale_samples(t.samples()), r)
}

/// Feature matrix `(F − Ψ)V` of a grayscale image.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayFeature {
    pub features: DMatrix<f64>,
    pub label: String,
    pub source: String,
}

impl GrayFeature {
    pub fn truncate(&self, r: usize) -> Self {
        Self {
            features: self.features.columns(0, r).into_owned(),
            ..self.clone()
        }
    }
}

pub fn project_2dpca(image: &DMatrix<f64>, model: &RealEigenfaceModel) -> Result<DMatrix<f64>> {
    if image.shape() != model.dims() {
        return Err(Error::DimensionMismatch {
            op: "project_2dpca",
            left: image.shape(),
            right: model.dims(),
        });
    }
    Ok((image - &model.mean) * &model.projection)
}

pub fn build_gallery_2dpca(samples: &[GraySample], model: &RealEigenfaceModel) -> Result<Vec<GrayFeature>> {
    samples
        .iter()
        .map(|s| {
            Ok(GrayFeature {
                features: project_2dpca(&s.image, model)?,
                label: s.label.clone(),
                source: s.source.clone(),
            })
        })
        .collect()
}

/// Nearest gallery entry under the unweighted Frobenius distance.
pub fn classify_2dpca(
    image: &DMatrix<f64>,
    model: &RealEigenfaceModel,
    gallery: &[GrayFeature],
) -> Result<RecognitionResult> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let p = project_2dpca(image, model)?;
    let distances: Vec<f64> = gallery
        .iter()
        .map(|g| {
            if g.features.shape() != p.shape() {
                return Err(Error::DimensionMismatch {
                    op: "classify_2dpca",
                    left: g.features.shape(),
                    right: p.shape(),
                });
            }
            Ok((&g.features - &p).norm())
        })
        .collect::<Result<_>>()?;
    let index = argmin(&distances).expect("non-empty");
    Ok(RecognitionResult {
        label: gallery[index].label.clone(),
        index,
        distance: distances[index],
        distances,
    })
}

pub fn evaluate_2dpca(
    model: &RealEigenfaceModel,
    gallery: &[GrayFeature],
    test: &[GraySample],
) -> Result<AccuracyReport> {
    let start = Instant::now();
    let predictions = test
        .par_iter()
        .map(|s| {
            let res = classify_2dpca(&s.image, model, gallery)?;
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
    Ok(AccuracyReport::from_predictions(METHOD, model.r(), predictions, elapsed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synth::{synth_dataset, SynthSpec};

    fn gray(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64, label: &str) -> GraySample {
        GraySample {
            image: DMatrix::from_fn(rows, cols, f),
            label: label.into(),
            source: label.into(),
        }
    }

    #[test]
    fn single_sample_is_rank_deficient() {
        let s = vec![gray(3, 3, |r, c| (r + c) as f64, "a")];
        assert!(matches!(train_2dpca(&s, 1), Err(Error::RankDeficient { .. })));
        assert!(matches!(train_2dpca(&[], 1), Err(Error::EmptyTrainingSet)));
    }

    #[test]
    fn recovers_dominant_column_direction() {
        // Column 2 varies with amplitude 10, the others with amplitude 1.
        let samples: Vec<GraySample> = (0..6)
            .map(|s| {
                let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                gray(4, 3, move |r, c| {
                    let amp = if c == 2 { 10.0 } else { 1.0 };
                    sign * amp * ((r + 1) as f64) * (1.0 + 0.1 * c as f64 * s as f64)
                }, "x")
            })
            .collect();
        let m = train_2dpca(&samples, 1).unwrap();
        let v = m.projection.column(0);
        assert!(v[2] > 0.99, "{v}");
        assert!((m.projection.transpose() * &m.projection - DMatrix::identity(1, 1)).norm() < 1e-10);
    }

    #[test]
    fn classifies_gallery_members_and_breaks_ties_low() {
        let spec: SynthSpec = "classes=3,per=3,w=6,h=5,noise=2".parse().unwrap();
        let ds = synth_dataset(&spec, 61).unwrap();
        let train = grayscale_samples(ds.train.samples());
        let m = train_2dpca(&train, 3).unwrap();
        let gallery = build_gallery_2dpca(&train, &m).unwrap();
        for (i, s) in train.iter().enumerate() {
            let res = classify_2dpca(&s.image, &m, &gallery).unwrap();
            assert_eq!((res.index, res.distance), (i, 0.0));
        }
        let twin = vec![gallery[1].clone(), gallery[1].clone()];
        assert_eq!(classify_2dpca(&train[1].image, &m, &twin).unwrap().index, 0);
        assert!(matches!(classify_2dpca(&train[0].image, &m, &[]), Err(Error::EmptyGallery)));
    }

    #[test]
    fn separable_set_is_fully_recognized() {
        let spec: SynthSpec = "classes=5,per=3,w=8,h=8,noise=2,gap=40,test=3".parse().unwrap();
        let ds = synth_dataset(&spec, 62).unwrap();
        let train = grayscale_samples(ds.train.samples());
        let test = grayscale_samples(&ds.test);
        let m = train_2dpca(&train, 4).unwrap();
        let gallery = build_gallery_2dpca(&train, &m).unwrap();
        let rep = evaluate_2dpca(&m, &gallery, &test).unwrap();
        assert_eq!(rep.accuracy, 1.0);
        assert_eq!(rep.method, METHOD);
    }
}
