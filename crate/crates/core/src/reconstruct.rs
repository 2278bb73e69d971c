//! Image reconstruction from feature matrices and the reconstruction ratio.
//!
//! For an orthonormal frame `V` with unitary complement `V⊥`,
//! `‖P V* − (F − Ψ)‖ = ‖(F − Ψ) V⊥‖`. Ratios are measured on mean-removed images:
//! `Ratio = 1 − ‖R − F‖_F / ‖F − Ψ‖_F`, which is the uncentered formula when `Ψ = 0`.

use rayon::prelude::*;

use crate::dataset::TrainingSet;
use crate::error::{Error, Result};
use crate::matrix::{inner, vec_norm, QMatrix};
use crate::model::EigenfaceModel;
use crate::quaternion::Quaternion;
use crate::recognize::project;

/// `R = P V* + Ψ`.
pub fn reconstruct(features: &QMatrix, model: &EigenfaceModel) -> Result<QMatrix> {
    let expected = (model.dims().0, model.r());
    if features.shape() != expected {
        return Err(Error::DimensionMismatch {
            op: "reconstruct",
            left: features.shape(),
            right: expected,
        });
    }
    features
        .matmul(&model.projection().conj_transpose())?
        .add(model.mean())
}

/// `1 − ‖R − F‖_F / ‖F − Ψ‖_F`.
pub fn reconstruction_ratio(image: &QMatrix, reconstruction: &QMatrix, mean: &QMatrix) -> Result<f64> {
    let denom = image.sub(mean)?.fro_norm();
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(1.0 - reconstruction.sub(image)?.fro_norm() / denom)
}

/// Completes `V` (`n × r`, orthonormal columns) to a unitary `[V, V⊥]` by pivoted
/// modified Gram–Schmidt over the canonical basis.
pub fn orthonormal_complement(v: &QMatrix) -> Result<QMatrix> {
    let residual = v.orthonormality_residual();
    if residual > 1e-10 {
        return Err(Error::NotOrthonormal { residual });
    }
    let (n, r) = v.shape();
    let mut basis: Vec<Vec<Quaternion>> = (0..r).map(|c| v.column(c)).collect();
    let project_out = |x: &mut Vec<Quaternion>, basis: &[Vec<Quaternion>]| {
        for _ in 0..2 {
            for y in basis {
                let c = inner(y, x);
                for (xi, yi) in x.iter_mut().zip(y) {
                    *xi -= *yi * c;
                }
            }
        }
    };
    let mut candidates: Vec<Vec<Quaternion>> = (0..n)
        .map(|k| {
            let mut e = vec![Quaternion::ZERO; n];
            e[k] = Quaternion::ONE;
            project_out(&mut e, &basis);
            e
        })
        .collect();
    let mut complement = Vec::with_capacity(n - r);
    while complement.len() < n - r {
        let (best, nrm) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, vec_norm(c)))
            .fold((usize::MAX, 0.0), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
        if best == usize::MAX || nrm < 1e-10 {
            return Err(Error::NotOrthonormal { residual: nrm });
        }
        let mut x = candidates.swap_remove(best);
        project_out(&mut x, &basis);
        let nrm = vec_norm(&x);
        let x: Vec<Quaternion> = x.into_iter().map(|q| q / nrm).collect();
        for c in &mut candidates {
            project_out(c, std::slice::from_ref(&x));
        }
        basis.push(x.clone());
        complement.push(x);
    }
    QMatrix::from_columns(n, &complement)
}

/// Per-sample reconstruction quality at a fixed `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionReport {
    pub r: usize,
    pub ratios: Vec<f64>,
    /// `‖R_s − F_s‖_F`.
    pub residuals: Vec<f64>,
}

/// Reconstructs every training sample with `model` (already truncated to the desired `r`).
pub fn reconstruction_report(t: &TrainingSet, model: &EigenfaceModel) -> Result<ReconstructionReport> {
    let rows = t
        .samples()
        .par_iter()
        .map(|s| {
            let rec = reconstruct(&project(&s.image, model)?, model)?;
            let residual = rec.sub(&s.image)?.fro_norm();
            let ratio = match reconstruction_ratio(&s.image, &rec, model.mean()) {
                Ok(v) => v,
                Err(Error::ZeroNorm) => f64::NAN,
                Err(e) => return Err(e),
            };
            Ok((ratio, residual))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ratios, residuals) = rows.into_iter().unzip();
    Ok(ReconstructionReport {
        r: model.r(),
        ratios,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synth::{synth_dataset, SynthSpec};
    use crate::model::{train, Mode};
    use crate::testutil::{projector_distance, random_orthonormal, rng};

    fn data() -> crate::dataset::Dataset {
        let spec: SynthSpec = "classes=3,per=3,w=6,h=7,noise=8,gap=30".parse().unwrap();
        synth_dataset(&spec, 51).unwrap()
    }

    #[test]
    fn full_rank_reconstruction_is_exact() {
        let ds = data();
        let m = train(&ds.train, 6, Mode::Sr2dcpca).unwrap();
        for s in ds.train.samples() {
            let rec = reconstruct(&project(&s.image, &m).unwrap(), &m).unwrap();
            assert!(rec.max_abs_diff(&s.image).unwrap() <= 1e-10 * s.image.fro_norm());
            assert!((reconstruction_ratio(&s.image, &rec, m.mean()).unwrap() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn zero_features_give_the_mean() {
        let ds = data();
        let m = train(&ds.train, 3, Mode::Twodcpca).unwrap();
        let rec = reconstruct(&QMatrix::zeros(7, 3), &m).unwrap();
        assert_eq!(&rec, m.mean());
        assert!(reconstruct(&QMatrix::zeros(7, 2), &m).is_err());
        assert!(matches!(
            reconstruction_ratio(m.mean(), &rec, m.mean()),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn residual_equals_complement_energy() {
        let ds = data();
        let full = train(&ds.train, 6, Mode::Sr2dcpca).unwrap();
        for r in 1..6 {
            let m = full.truncate(r).unwrap();
            let perp = orthonormal_complement(m.projection()).unwrap();
            for s in ds.train.samples() {
                let centered = s.image.sub(m.mean()).unwrap();
                let rec = reconstruct(&project(&s.image, &m).unwrap(), &m).unwrap();
                let lhs = rec.sub(&s.image).unwrap().fro_norm();
                let rhs = centered.matmul(&perp).unwrap().fro_norm();
                assert!((lhs - rhs).abs() <= 1e-10 * centered.fro_norm());
            }
        }
    }

    #[test]
    fn ratio_is_monotone_in_r() {
        let ds = data();
        let full = train(&ds.train, 6, Mode::Twodcpca).unwrap();
        let reports: Vec<_> = (1..=6)
            .map(|r| reconstruction_report(&ds.train, &full.truncate(r).unwrap()).unwrap())
            .collect();
        for pair in reports.windows(2) {
            for (a, b) in pair[0].ratios.iter().zip(&pair[1].ratios) {
                assert!(*b >= *a - 1e-12);
            }
        }
        assert!(reports[5].ratios.iter().all(|v| (v - 1.0).abs() <= 1e-8));
    }

    #[test]
    fn complement_examples() {
        let id = QMatrix::identity(3);
        assert_eq!(orthonormal_complement(&id).unwrap().shape(), (3, 0));
        let e1 = id.columns(0..1);
        let perp = orthonormal_complement(&e1).unwrap();
        assert!(projector_distance(&perp, &id.columns(1..3)) <= 1e-14);

        let mut rng = rng(52);
        for (n, r) in [(5, 2), (6, 1), (4, 3)] {
            let v = random_orthonormal(&mut rng, n, r);
            let u = v.hcat(&orthonormal_complement(&v).unwrap()).unwrap();
            assert!(u.orthonormality_residual() <= 1e-10);
        }
        assert!(orthonormal_complement(&id.scale(2.0)).is_err());
    }
}
