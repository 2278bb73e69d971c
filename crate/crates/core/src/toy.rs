//! Two-class planar toy example.
//!
//! Points are `1 × 2` real matrices pushed through the quaternion pipeline. Each class
//! is an anisotropic Gaussian; half of every class trains and the rest is held out. The
//! held-out points of the noisier class are drawn with a wider spread than its training
//! points, so the training sample underrepresents that class's variation.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{LabeledSample, TrainingSet};
use crate::eig::heig;
use crate::error::Result;
use crate::matrix::QMatrix;
use crate::model::{class_max_eigenvalues, covariance_relaxed, covariance_total, relaxation_vector};

pub type Point = [f64; 2];

/// One Gaussian class of the generator.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyClass {
    pub mean: Point,
    /// Standard deviations along the major and minor axes.
    pub std: [f64; 2],
    /// Angle of the major axis in radians.
    pub angle: f64,
    /// Spread multiplier for held-out points.
    pub test_spread: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToySpec {
    pub classes: [ToyClass; 2],
    pub per_class: usize,
    pub train_per_class: usize,
}

impl Default for ToySpec {
    fn default() -> Self {
        Self {
            classes: [
                ToyClass {
                    mean: [-0.8, 0.0],
                    std: [1.75, 0.55],
                    angle: 0.35,
                    test_spread: 1.8,
                },
                ToyClass {
                    mean: [0.8, 0.4],
                    std: [1.5, 0.55],
                    angle: 1.25,
                    test_spread: 1.0,
                },
            ],
            per_class: 200,
            train_per_class: 100,
        }
    }
}

/// Generated points, split per class.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyPoints {
    pub train: [Vec<Point>; 2],
    pub test: [Vec<Point>; 2],
}

impl ToyPoints {
    pub fn all(&self) -> Vec<Point> {
        self.train
            .iter()
            .chain(&self.test)
            .flat_map(|v| v.iter().copied())
            .collect()
    }
}

pub fn toy_points(spec: &ToySpec, seed: u64) -> ToyPoints {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |c: &ToyClass, spread: f64| -> Point {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        let (u, v) = (a * c.std[0] * spread, b * c.std[1] * spread);
        let (s, co) = c.angle.sin_cos();
        [c.mean[0] + co * u - s * v, c.mean[1] + s * u + co * v]
    };
    let mut train: [Vec<Point>; 2] = Default::default();
    let mut test: [Vec<Point>; 2] = Default::default();
    for (k, c) in spec.classes.iter().enumerate() {
        for i in 0..spec.per_class {
            if i < spec.train_per_class {
                train[k].push(draw(c, 1.0));
            } else {
                test[k].push(draw(c, c.test_spread));
            }
        }
    }
    ToyPoints { train, test }
}

/// One row of the variance table.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyCase {
    pub seed: u64,
    pub relaxation: [f64; 2],
    pub direction_2dcpca: Point,
    pub direction_sr: Point,
    pub train_variance_2dcpca: f64,
    pub train_variance_sr: f64,
    /// Mean squared projection of the centered whole set.
    pub whole_variance_2dcpca: f64,
    pub whole_variance_sr: f64,
    /// The same, as `vᵀ C v` with `C` the whole-set covariance.
    pub whole_quadratic_2dcpca: f64,
    pub whole_quadratic_sr: f64,
}

fn point_matrix(p: &Point) -> QMatrix {
    QMatrix::from_real(1, 2, p).expect("1x2")
}

fn leading_direction(g: &QMatrix) -> Result<Point> {
    let (v, _) = heig(g)?.top_r(1)?;
    // Real symmetric input with the gauge fixed gives a real eigenvector.
    Ok([v.get(0, 0).w, v.get(1, 0).w])
}

fn mean_point(points: &[Point]) -> Point {
    let n = points.len() as f64;
    let s = points.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
    [s[0] / n, s[1] / n]
}

fn covariance(points: &[Point]) -> [[f64; 2]; 2] {
    let m = mean_point(points);
    let n = points.len() as f64;
    let mut c = [[0.0; 2]; 2];
    for p in points {
        let d = [p[0] - m[0], p[1] - m[1]];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] += d[i] * d[j] / n;
            }
        }
    }
    c
}

fn projected_variance(points: &[Point], v: &Point) -> f64 {
    let m = mean_point(points);
    let n = points.len() as f64;
    points
        .iter()
        .map(|p| ((p[0] - m[0]) * v[0] + (p[1] - m[1]) * v[1]).powi(2))
        .sum::<f64>()
        / n
}

fn quadratic(c: &[[f64; 2]; 2], v: &Point) -> f64 {
    (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| v[i] * c[i][j] * v[j])
        .sum()
}

/// Runs both methods on given points.
pub fn toy_case_from_points(seed: u64, points: &ToyPoints) -> Result<ToyCase> {
    let samples = points
        .train
        .iter()
        .enumerate()
        .flat_map(|(k, pts)| {
            pts.iter()
                .enumerate()
                .map(move |(i, p)| LabeledSample::new(point_matrix(p), format!("class{k}"), format!("class{k}/{i}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let t = TrainingSet::new(samples)?;
    let g_t = covariance_total(&t);
    let w = relaxation_vector(&class_max_eigenvalues(&t)?)?;
    let g_w = covariance_relaxed(&t, &w)?;
    let d_2dcpca = leading_direction(&g_t)?;
    let d_sr = leading_direction(&g_w)?;

    let all = points.all();
    let c_all = covariance(&all);
    let train_var = |v: &Point| -> f64 {
        let q = QMatrix::from_real(2, 1, v).expect("2x1");
        q.adjoint_matmul(&g_t.matmul(&q).expect("2x2 * 2x1")).expect("1x1").get(0, 0).w
    };
    Ok(ToyCase {
        seed,
        relaxation: [w.weights()[0], w.weights()[1]],
        direction_2dcpca: d_2dcpca,
        direction_sr: d_sr,
        train_variance_2dcpca: train_var(&d_2dcpca),
        train_variance_sr: train_var(&d_sr),
        whole_variance_2dcpca: projected_variance(&all, &d_2dcpca),
        whole_variance_sr: projected_variance(&all, &d_sr),
        whole_quadratic_2dcpca: quadratic(&c_all, &d_2dcpca),
        whole_quadratic_sr: quadratic(&c_all, &d_sr),
    })
}

pub fn toy_case(spec: &ToySpec, seed: u64) -> Result<ToyCase> {
    toy_case_from_points(seed, &toy_points(spec, seed))
}

/// CSV table with one row per case.
pub fn toy_table(cases: &[ToyCase]) -> String {
    let mut out = String::from(
        "case,seed,w1,w2,dir_2dcpca_x,dir_2dcpca_y,dir_sr_x,dir_sr_y,\
         train_var_2dcpca,train_var_sr,whole_var_2dcpca,whole_var_sr\n",
    );
    for (i, c) in cases.iter().enumerate() {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            i + 1,
            c.seed,
            c.relaxation[0],
            c.relaxation[1],
            c.direction_2dcpca[0],
            c.direction_2dcpca[1],
            c.direction_sr[0],
            c.direction_sr[1],
            c.train_variance_2dcpca,
            c.train_variance_sr,
            c.whole_variance_2dcpca,
            c.whole_variance_sr
        )
        .expect("write to string");
    }
    out
}
