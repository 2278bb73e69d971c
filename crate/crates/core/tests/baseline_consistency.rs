use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use qface::baseline::{build_gallery_2dpca, classify_2dpca, grayscale_samples, train_2dpca, GraySample};
use qface::dataset::{LabeledSample, TrainingSet};
use qface::model::{train, Mode};
use qface::recognize::{build_gallery, classify};
use qface::testutil::{projector_distance, rng};
use qface::{QMatrix, Quaternion};

fn ranking(d: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    idx
}

#[test]
fn real_singletons_match_2dpca_subspace() {
    let mut rng = rng(301);
    for _ in 0..10 {
        let (m, n, l) = (rng.random_range(2..6), rng.random_range(2..6), rng.random_range(3..7));
        let reals: Vec<DMatrix<f64>> = (0..l)
            .map(|_| DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal) * 10.0))
            .collect();
        let samples = reals
            .iter()
            .enumerate()
            .map(|(s, d)| {
                let q = QMatrix::from_fn(m, n, |r, c| Quaternion::real(d[(r, c)]));
                LabeledSample::new(q, format!("s{s}"), format!("s{s}")).unwrap()
            })
            .collect();
        let t = TrainingSet::new(samples).unwrap();
        let gray: Vec<GraySample> = reals
            .iter()
            .enumerate()
            .map(|(s, d)| GraySample { image: d.clone(), label: format!("s{s}"), source: format!("s{s}") })
            .collect();
        let r = rng.random_range(1..=n);
        let sr = train(&t, r, Mode::Sr2dcpca).unwrap();
        let base = train_2dpca(&gray, r).unwrap();
        let v = QMatrix::from_fn(n, r, |i, j| Quaternion::real(base.projection[(i, j)]));
        assert!(projector_distance(sr.projection(), &v) <= 1e-8);
    }
}

#[test]
fn true_grayscale_rankings_agree() {
    let mut rng = rng(302);
    let (m, n) = (6, 5);
    let samples: Vec<LabeledSample> = (0..12)
        .map(|s| {
            let img = QMatrix::from_fn(m, n, |_, _| {
                let g: f64 = rng.random_range(0.0..255.0);
                Quaternion::pure(g, g, g)
            });
            LabeledSample::new(img, format!("c{}", s % 4), format!("s{s}")).unwrap()
        })
        .collect();
    let (train_set, queries) = samples.split_at(8);
    let t = TrainingSet::new(train_set.to_vec()).unwrap();
    let r = 3;
    let color = train(&t, r, Mode::Twodcpca).unwrap();
    let color_gallery = build_gallery(&t, &color).unwrap();
    let gray_train = grayscale_samples(t.samples());
    let gray = train_2dpca(&gray_train, r).unwrap();
    let gray_gallery = build_gallery_2dpca(&gray_train, &gray).unwrap();
    for q in queries {
        let a = classify(&q.image, &color, &color_gallery).unwrap();
        let b = classify_2dpca(&grayscale_samples(std::slice::from_ref(q))[0].image, &gray, &gray_gallery).unwrap();
        assert_eq!(ranking(&a.distances), ranking(&b.distances));
        for (x, y) in a.distances.iter().zip(&b.distances) {
            assert!((x - 3f64.sqrt() * y).abs() <= 1e-9 * x.max(1.0));
        }
    }
}
