//! Command-level routines shared by the CLI, the acceptance suite and the demo.
//!
//! Every CSV produced here is a pure function of its inputs; floats are printed in
//! shortest round-trip form.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::archive::{SavedGallery, SavedModel};
use crate::baseline::{self, build_gallery_2dpca, evaluate_2dpca, grayscale_samples, train_2dpca};
use crate::dataset::{LabeledSample, TrainingSet};
use crate::error::{Error, Result};
use crate::model::{train_with_report, Mode};
use crate::recognize::{build_gallery, evaluate, AccuracyReport};
use crate::reconstruct::{reconstruction_report, ReconstructionReport};

/// A recognition method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Color(Mode),
    Gray,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Color(Mode::Sr2dcpca), Method::Color(Mode::Twodcpca), Method::Gray];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Color(m) => m.as_str(),
            Method::Gray => baseline::METHOD,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == baseline::METHOD {
            return Ok(Method::Gray);
        }
        s.parse::<Mode>()
            .map(Method::Color)
            .map_err(|_| Error::InvalidArgument(format!("unknown method `{s}` (sr-2dcpca, 2dcpca, 2dpca)")))
    }
}

/// Inclusive range of eigenface counts, written `A..B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RRange {
    pub start: usize,
    pub end: usize,
}

impl RRange {
    pub fn single(r: usize) -> Self {
        Self { start: r, end: r }
    }

    pub fn iter(self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }

    /// Errors unless `1 ≤ start ≤ end ≤ n`.
    pub fn check(self, n: usize) -> Result<()> {
        if self.start == 0 || self.start > self.end {
            return Err(Error::InvalidArgument(format!("empty r-range {self}")));
        }
        if self.end > n {
            return Err(Error::RankOutOfRange { r: self.end, max: n });
        }
        Ok(())
    }
}

impl fmt::Display for RRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for RRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("r-range must look like A..B, got `{s}`"));
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let b = b.strip_prefix('=').unwrap_or(b);
        Ok(Self {
            start: a.trim().parse().map_err(|_| bad())?,
            end: b.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// Summary of one training run, written next to the model file.
#[derive(Clone, Debug, Serialize)]
pub struct TrainLog {
    pub method: String,
    pub r: usize,
    pub samples: usize,
    pub classes: usize,
    pub dims: (usize, usize),
    /// Full descending spectrum of the training covariance.
    pub spectrum: Vec<f64>,
    /// `λ_max(N_a)` per class (SR-2DCPCA only).
    pub lambda_max: Vec<f64>,
    pub relaxation: Vec<f64>,
    pub labels: Vec<String>,
    /// Machine dependent.
    pub wall_ms: f64,
}

/// Trains `method` with `r` eigenfaces and builds the gallery.
pub fn train_method(t: &TrainingSet, r: usize, method: Method) -> Result<(SavedModel, SavedGallery, TrainLog)> {
    let start = Instant::now();
    let (model, gallery, spectrum, lambda_max, relaxation) = match method {
        Method::Color(mode) => {
            let (m, rep) = train_with_report(t, r, mode)?;
            let gallery = build_gallery(t, &m)?;
            let w = m.relaxation().weights().to_vec();
            (SavedModel::Color(m), SavedGallery::Color(gallery), rep.spectrum, rep.lambda_max, w)
        }
        Method::Gray => {
            let gray = grayscale_samples(t.samples());
            let full = full_gray_spectrum(&gray)?;
            let m = train_2dpca(&gray, r)?;
            let gallery = build_gallery_2dpca(&gray, &m)?;
            (SavedModel::Gray(m), SavedGallery::Gray(gallery), full, Vec::new(), Vec::new())
        }
    };
    let log = TrainLog {
        method: method.as_str().into(),
        r,
        samples: t.len(),
        classes: t.class_count(),
        dims: t.dims(),
        spectrum,
        lambda_max,
        relaxation,
        labels: t.labels(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((model, gallery, log))
}

fn full_gray_spectrum(gray: &[baseline::GraySample]) -> Result<Vec<f64>> {
    let (_, cov) = baseline::covariance_2dpca(gray)?;
    let mut v: Vec<f64> = cov.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

/// Accuracy of a trained model at every `r` in `range`, truncating rather than retraining.
pub fn accuracy_sweep_model(
    model: &SavedModel,
    t: &TrainingSet,
    test: &[LabeledSample],
    range: RRange,
) -> Result<Vec<AccuracyReport>> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("test split is empty".into()));
    }
    for s in test {
        t.check(s)?;
    }
    range.check(model.r())?;
    match model {
        SavedModel::Color(full) => {
            let gallery = build_gallery(t, full)?;
            range
                .iter()
                .map(|r| {
                    let m = full.truncate(r)?;
                    let g: Vec<_> = gallery.iter().map(|f| f.truncate(r)).collect();
                    evaluate(&m, &g, test)
                })
                .collect()
        }
        SavedModel::Gray(full) => {
            let gallery = build_gallery_2dpca(&grayscale_samples(t.samples()), full)?;
            let queries = grayscale_samples(test);
            range
                .iter()
                .map(|r| {
                    let m = full.truncate(r)?;
                    let g: Vec<_> = gallery.iter().map(|f| f.truncate(r)).collect();
                    evaluate_2dpca(&m, &g, &queries)
                })
                .collect()
        }
    }
}

/// Trains once at `range.end` and evaluates every `r` in `range`.
pub fn accuracy_sweep(
    t: &TrainingSet,
    test: &[LabeledSample],
    method: Method,
    range: RRange,
) -> Result<Vec<AccuracyReport>> {
    range.check(t.dims().1)?;
    let model = match method {
        Method::Color(mode) => SavedModel::Color(train_with_report(t, range.end, mode)?.0),
        Method::Gray => SavedModel::Gray(train_2dpca(&grayscale_samples(t.samples()), range.end)?),
    };
    accuracy_sweep_model(&model, t, test, range)
}

/// `r,method,accuracy`.
pub fn accuracy_csv(reports: &[AccuracyReport]) -> String {
    let mut out = String::from("r,method,accuracy\n");
    for rep in reports {
        writeln!(out, "{},{},{}", rep.r, rep.method, rep.accuracy).expect("write to string");
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `method,r,query,predicted,actual,distance,correct`, one row per query per report.
pub fn predictions_csv(reports: &[AccuracyReport]) -> String {
    let mut out = String::from("method,r,query,predicted,actual,distance,correct\n");
    for rep in reports {
        for p in &rep.predictions {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                rep.method,
                rep.r,
                csv_field(&p.query),
                csv_field(&p.predicted),
                csv_field(&p.actual),
                p.distance,
                p.correct
            )
            .expect("write to string");
        }
    }
    out
}

/// Per-method summary for benchmark reports.
#[derive(Clone, Debug, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub best_r: usize,
    pub best_accuracy: f64,
    /// Machine dependent.
    pub mean_latency_ms: f64,
}

pub fn summarize(reports: &[AccuracyReport]) -> Vec<MethodSummary> {
    let mut out: Vec<MethodSummary> = Vec::new();
    for rep in reports {
        match out.iter_mut().find(|s| s.method == rep.method) {
            Some(s) => {
                if rep.accuracy > s.best_accuracy {
                    s.best_accuracy = rep.accuracy;
                    s.best_r = rep.r;
                }
                s.mean_latency_ms += rep.mean_latency_ms;
            }
            None => out.push(MethodSummary {
                method: rep.method.clone(),
                best_r: rep.r,
                best_accuracy: rep.accuracy,
                mean_latency_ms: rep.mean_latency_ms,
            }),
        }
    }
    for s in &mut out {
        let n = reports.iter().filter(|r| r.method == s.method).count();
        s.mean_latency_ms /= n as f64;
    }
    out
}

/// Reconstruction of every training sample at each `r` in `range`.
pub fn reconstruction_sweep(t: &TrainingSet, mode: Mode, range: RRange) -> Result<Vec<ReconstructionReport>> {
    range.check(t.dims().1)?;
    let full = train_with_report(t, range.end, mode)?.0;
    reconstruction_sweep_model(t, &full, range)
}

pub fn reconstruction_sweep_model(
    t: &TrainingSet,
    full: &crate::model::EigenfaceModel,
    range: RRange,
) -> Result<Vec<ReconstructionReport>> {
    range.check(full.r())?;
    range
        .iter()
        .map(|r| reconstruction_report(t, &full.truncate(r)?))
        .collect()
}

/// `sample,r,ratio,residual`. An undefined ratio (image equal to the mean) prints `NaN`.
pub fn reconstruction_csv(t: &TrainingSet, reports: &[ReconstructionReport]) -> String {
    let mut out = String::from("sample,r,ratio,residual\n");
    for (i, s) in t.samples().iter().enumerate() {
        for rep in reports {
            writeln!(out, "{},{},{},{}", csv_field(&s.source), rep.r, rep.ratios[i], rep.residuals[i])
                .expect("write to string");
        }
    }
    out
}
