//! Training: mean image, covariances, relaxation vector and eigenface extraction.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledSample, TrainingSet};
use crate::eig::{self, heig, HermitianEigen};
use crate::error::{Error, Result};
use crate::matrix::QMatrix;

/// Which covariance the eigenfaces are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Relaxed covariance `G_w`, D-weighted classifier.
    #[serde(rename = "sr-2dcpca")]
    Sr2dcpca,
    /// Total covariance `G_t`, unweighted classifier.
    #[serde(rename = "2dcpca")]
    Twodcpca,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Sr2dcpca => "sr-2dcpca",
            Mode::Twodcpca => "2dcpca",
        }
    }

    /// Whether the nearest-neighbor search uses the D-norm.
    pub fn weighted(self) -> bool {
        self == Mode::Sr2dcpca
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sr-2dcpca" | "sr" => Ok(Mode::Sr2dcpca),
            "2dcpca" => Ok(Mode::Twodcpca),
            _ => Err(Error::InvalidArgument(format!("unknown mode `{s}`"))),
        }
    }
}

/// Per-class relaxation factors `w_a`, positive and summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelaxationVector(Vec<f64>);

impl RelaxationVector {
    /// `w_a = 1/x` for every class.
    pub fn uniform(classes: usize) -> Self {
        Self(vec![1.0 / classes as f64; classes])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn from_weights(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::Archive("relaxation weights must be positive".into()));
        }
        Ok(Self(w))
    }
}

/// Softmax of the per-class largest within-class eigenvalues.
///
/// Evaluated as `exp(λ_a − max λ) / Σ exp(λ_b − max λ)` so large variances cannot
/// overflow.
pub fn relaxation_vector(lambda_max: &[f64]) -> Result<RelaxationVector> {
    if lambda_max.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if lambda_max.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite class variance".into()));
    }
    let top = lambda_max.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = lambda_max.iter().map(|&l| (l - top).exp()).collect();
    let total: f64 = exps.iter().sum();
    let w: Vec<f64> = exps.iter().map(|e| e / total).collect();
    // Underflowed classes keep the smallest positive weight so w_a > 0 holds.
    Ok(RelaxationVector(
        w.into_iter().map(|v| v.max(f64::MIN_POSITIVE)).collect(),
    ))
}

/// `Ψ = (1/ℓ) Σ F_s`.
pub fn mean_image(t: &TrainingSet) -> QMatrix {
    mean_of(t.samples().iter())
}

/// Accumulated as `F_1 + Σ (F_s − F_1) / ℓ`, which is exact when all samples coincide.
fn mean_of<'a>(samples: impl Iterator<Item = &'a LabeledSample>) -> QMatrix {
    let mut samples = samples.peekable();
    let first = samples.peek().expect("non-empty").image.clone();
    let mut count = 0usize;
    let mut offset = QMatrix::zeros(first.rows(), first.cols());
    for s in samples {
        count += 1;
        offset.axpy(1.0, &s.image.sub(&first).expect("training shapes agree")).expect("same shape");
    }
    let mut mean = first;
    mean.axpy(1.0 / count as f64, &offset).expect("same shape");
    mean
}

/// `Σ (F − c)*(F − c)` over `samples`, each term computed in parallel and summed in order.
fn scatter(samples: &[&LabeledSample], center: &QMatrix) -> QMatrix {
    let n = center.cols();
    let terms: Vec<QMatrix> = samples
        .par_iter()
        .map(|s| {
            let d = s.image.sub(center).expect("training shapes agree");
            d.adjoint_matmul(&d).expect("shapes agree")
        })
        .collect();
    let mut acc = QMatrix::zeros(n, n);
    for t in &terms {
        acc.axpy(1.0, t).expect("n x n");
    }
    acc
}

/// `G_t = (1/ℓ) Σ (F_s − Ψ)*(F_s − Ψ)`.
pub fn covariance_total(t: &TrainingSet) -> QMatrix {
    let psi = mean_image(t);
    let all: Vec<&LabeledSample> = t.samples().iter().collect();
    scatter(&all, &psi).scale(1.0 / t.len() as f64)
}

/// `N_a = (1/ℓ_a) Σ (F_s^a − Ψ_a)*(F_s^a − Ψ_a)` around the class mean `Ψ_a`.
pub fn within_class_covariance(t: &TrainingSet, class: usize) -> QMatrix {
    let members: Vec<&LabeledSample> = t.class_samples(class).collect();
    let psi_a = mean_of(members.iter().copied());
    scatter(&members, &psi_a).scale(1.0 / members.len() as f64)
}

/// `λ_max(N_a)` for every class, in class order.
pub fn class_max_eigenvalues(t: &TrainingSet) -> Result<Vec<f64>> {
    (0..t.class_count())
        .map(|a| eig::max_eigenvalue(&within_class_covariance(t, a)))
        .collect()
}

/// Relaxed covariance `G_w = Σ_a (w_a/ℓ_a) Σ_s (F_s^a − Ψ)*(F_s^a − Ψ)` with the global mean `Ψ`.
///
/// The per-sample factors `w_a/ℓ_a` sum to one, so they already average the scatter
/// terms: with one sample per class (or a single class) this is exactly `G_t`. A further
/// `1/ℓ` prefactor would only rescale the spectrum; see [`class_decomposition`].
pub fn covariance_relaxed(t: &TrainingSet, w: &RelaxationVector) -> Result<QMatrix> {
    if w.len() != t.class_count() {
        return Err(Error::ClassCountMismatch {
            got: w.len(),
            expected: t.class_count(),
        });
    }
    let psi = mean_image(t);
    let n = t.dims().1;
    let mut g = QMatrix::zeros(n, n);
    for (a, &w_a) in w.weights().iter().enumerate() {
        let members: Vec<&LabeledSample> = t.class_samples(a).collect();
        let s = scatter(&members, &psi);
        g.axpy(w_a / members.len() as f64, &s)?;
    }
    Ok(g)
}

/// `J(V) = trace(V* G V)` for a frame with orthonormal columns.
pub fn total_scatter(v: &QMatrix, g: &QMatrix) -> Result<f64> {
    let residual = v.orthonormality_residual();
    if residual > 1e-8 {
        return Err(Error::NotOrthonormal { residual });
    }
    let vgv = v.adjoint_matmul(&g.matmul(v)?)?;
    Ok(vgv.trace().w)
}

/// Trained eigenface subspace and classifier weighting.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenfaceModel {
    mode: Mode,
    mean: QMatrix,
    projection: QMatrix,
    weights: Vec<f64>,
    relaxation: RelaxationVector,
    labels: Vec<String>,
}

impl EigenfaceModel {
    /// Validated constructor used by deserialization.
    pub fn from_parts(
        mode: Mode,
        mean: QMatrix,
        projection: QMatrix,
        weights: Vec<f64>,
        relaxation: RelaxationVector,
        labels: Vec<String>,
    ) -> Result<Self> {
        let n = mean.cols();
        let r = weights.len();
        if projection.shape() != (n, r) || r == 0 {
            return Err(Error::Archive(format!(
                "projection is {:?}, expected ({n}, {r})",
                projection.shape()
            )));
        }
        if weights.iter().any(|&d| !(d.is_finite() && d > 0.0)) || weights.windows(2).any(|p| p[0] < p[1]) {
            return Err(Error::Archive("D must be positive and descending".into()));
        }
        if relaxation.len() != labels.len() {
            return Err(Error::ClassCountMismatch {
                got: relaxation.len(),
                expected: labels.len(),
            });
        }
        Ok(Self {
            mode,
            mean,
            projection,
            weights,
            relaxation,
            labels,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `Ψ`, the training mean.
    pub fn mean(&self) -> &QMatrix {
        &self.mean
    }

    /// `V`, `n × r` with orthonormal columns.
    pub fn projection(&self) -> &QMatrix {
        &self.projection
    }

    /// `diag(D) = (λ_1, …, λ_r)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn relaxation(&self) -> &RelaxationVector {
        &self.relaxation
    }

    /// Class labels in the order of the relaxation weights.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn r(&self) -> usize {
        self.weights.len()
    }

    /// `(m, n)` of the images this model accepts.
    pub fn dims(&self) -> (usize, usize) {
        self.mean.shape()
    }

    /// The same model keeping only the leading `r` eigenfaces.
    pub fn truncate(&self, r: usize) -> Result<Self> {
        if r == 0 || r > self.r() {
            return Err(Error::RankOutOfRange { r, max: self.r() });
        }
        Ok(Self {
            projection: self.projection.columns(0..r),
            weights: self.weights[..r].to_vec(),
            ..self.clone()
        })
    }
}

/// Intermediate quantities of a training run.
#[derive(Clone, Debug)]
pub struct CovarianceReport {
    /// The covariance the eigenfaces come from (`G_w` or `G_t`).
    pub covariance: QMatrix,
    /// `N_a` per class.
    pub within: Vec<QMatrix>,
    /// `λ_max(N_a)` per class.
    pub lambda_max: Vec<f64>,
    /// Full descending spectrum of `covariance`.
    pub spectrum: Vec<f64>,
    /// `ε_r = Σ_{s≤r} λ_s`.
    pub epsilon: f64,
}

/// Trains with `r` eigenfaces. In 2DCPCA mode labels are ignored.
pub fn train(t: &TrainingSet, r: usize, mode: Mode) -> Result<EigenfaceModel> {
    train_with_report(t, r, mode).map(|(m, _)| m)
}

pub fn train_with_report(
    t: &TrainingSet,
    r: usize,
    mode: Mode,
) -> Result<(EigenfaceModel, CovarianceReport)> {
    let n = t.dims().1;
    if r == 0 || r > n {
        return Err(Error::RankOutOfRange { r, max: n });
    }
    let (covariance, relaxation, within, lambda_max) = match mode {
        Mode::Sr2dcpca => {
            let within: Vec<QMatrix> = (0..t.class_count())
                .map(|a| within_class_covariance(t, a))
                .collect();
            let lambda_max = within
                .iter()
                .map(eig::max_eigenvalue)
                .collect::<Result<Vec<_>>>()?;
            let w = relaxation_vector(&lambda_max)?;
            (covariance_relaxed(t, &w)?, w, within, lambda_max)
        }
        Mode::Twodcpca => (
            covariance_total(t),
            RelaxationVector::uniform(t.class_count()),
            Vec::new(),
            Vec::new(),
        ),
    };
    let eigen: HermitianEigen = heig(&covariance)?;
    let (projection, weights) = eigen.top_r(r)?;
    let epsilon = weights.iter().sum();
    let model = EigenfaceModel {
        mode,
        mean: mean_image(t),
        projection,
        weights,
        relaxation,
        labels: t.labels(),
    };
    let report = CovarianceReport {
        covariance,
        within,
        lambda_max,
        spectrum: eigen.values,
        epsilon,
    };
    Ok((model, report))
}

/// Splits `G_w = A + ρ X X*` around class `b`: `A` holds the other classes,
/// `X = [(F_1^b − Ψ)* | … | (F_{ℓ_b}^b − Ψ)*]` and `ρ = w_b / ℓ_b`.
///
/// Dividing all three of `G_w`, `A` and `ρ` by `ℓ` gives the `1/ℓ`-normalized form in
/// which the variance bound `Σλ_s(A) ≤ ε ≤ Σλ_s(A) + (r w_b/ℓ)‖X‖₂²` is usually stated.
pub fn class_decomposition(
    t: &TrainingSet,
    w: &RelaxationVector,
    b: usize,
) -> Result<(QMatrix, QMatrix, f64)> {
    if w.len() != t.class_count() {
        return Err(Error::ClassCountMismatch {
            got: w.len(),
            expected: t.class_count(),
        });
    }
    if b >= t.class_count() {
        return Err(Error::InvalidArgument(format!("class {b} out of range")));
    }
    let psi = mean_image(t);
    let n = t.dims().1;
    let mut a_mat = QMatrix::zeros(n, n);
    for (a, &w_a) in w.weights().iter().enumerate() {
        if a == b {
            continue;
        }
        let members: Vec<&LabeledSample> = t.class_samples(a).collect();
        a_mat.axpy(w_a / members.len() as f64, &scatter(&members, &psi))?;
    }
    let mut x: Option<QMatrix> = None;
    for s in t.class_samples(b) {
        let block = s.image.sub(&psi)?.conj_transpose();
        x = Some(match x {
            Some(prev) => prev.hcat(&block)?,
            None => block,
        });
    }
    let ell_b = t.classes()[b].members.len() as f64;
    Ok((a_mat, x.expect("classes are non-empty"), w.weights()[b] / ell_b))
}
