//! Small parametric color "faces" for the reconstruction explorer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qface::dataset::{LabeledSample, TrainingSet};
use qface::{QMatrix, Quaternion, Result};

struct Identity {
    skin: [f64; 3],
    hair: [f64; 3],
    background: [f64; 3],
    head: [f64; 2],
    eye_gap: f64,
}

fn jitter(rng: &mut impl Rng, c: [f64; 3], spread: f64) -> [f64; 3] {
    c.map(|v| (v + rng.random_range(-spread..spread)).clamp(0.0, 255.0))
}

fn identity(rng: &mut impl Rng) -> Identity {
    Identity {
        skin: jitter(rng, [205.0, 160.0, 130.0], 40.0),
        hair: jitter(rng, [70.0, 50.0, 35.0], 60.0),
        background: jitter(rng, [120.0, 150.0, 190.0], 70.0),
        head: [rng.random_range(0.28..0.36), rng.random_range(0.36..0.44)],
        eye_gap: rng.random_range(0.11..0.16),
    }
}

fn render(id: &Identity, size: usize, shift: [f64; 2], light: f64, rng: &mut impl Rng) -> QMatrix {
    let s = size as f64;
    QMatrix::from_fn(size, size, |r, c| {
        let (x, y) = ((c as f64 + 0.5) / s - 0.5 - shift[0], (r as f64 + 0.5) / s - 0.5 - shift[1]);
        let head = (x / id.head[0]).powi(2) + (y / id.head[1]).powi(2);
        let eye = |ex: f64| ((x - ex).powi(2) + (y + 0.06).powi(2)).sqrt() < 0.04;
        let mut px = if head > 1.0 {
            id.background.map(|v| v * (0.8 + 0.4 * (r as f64 / s)))
        } else if y < -0.6 * id.head[1] {
            id.hair
        } else if eye(-id.eye_gap) || eye(id.eye_gap) {
            [30.0, 25.0, 25.0]
        } else if (y - 0.17).abs() < 0.025 && x.abs() < 0.1 {
            [170.0, 60.0, 70.0]
        } else {
            id.skin
        };
        px = px.map(|v| (v * light + rng.random_range(-6.0..6.0)).clamp(0.0, 255.0));
        Quaternion::pure(px[0], px[1], px[2])
    })
}

/// `classes × per` square images of side `size`.
pub fn face_set(seed: u64, classes: usize, per: usize, size: usize) -> Result<TrainingSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<Identity> = (0..classes).map(|_| identity(&mut rng)).collect();
    let mut samples = Vec::with_capacity(classes * per);
    for (a, id) in ids.iter().enumerate() {
        for s in 0..per {
            let shift = [rng.random_range(-0.04..0.04), rng.random_range(-0.04..0.04)];
            let light = rng.random_range(0.85..1.15);
            let img = render(id, size, shift, light, &mut rng);
            samples.push(LabeledSample::new(img, format!("face{a}"), format!("face{a}/{s}"))?);
        }
    }
    TrainingSet::new(samples)
}
