//! Random instance generators shared by unit, integration and acceptance tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{inner, vec_norm, QMatrix};
use crate::quaternion::Quaternion;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_quaternion(rng: &mut impl Rng) -> Quaternion {
    Quaternion::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// Entries with i.i.d. standard normal components.
pub fn random_qmatrix(rng: &mut impl Rng, rows: usize, cols: usize) -> QMatrix {
    QMatrix::from_fn(rows, cols, |_, _| random_quaternion(rng))
}

pub fn random_real_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> QMatrix {
    QMatrix::from_fn(rows, cols, |_, _| Quaternion::real(rng.sample(StandardNormal)))
}

/// `(A + A*) / 2` for a random square `A`.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> QMatrix {
    random_qmatrix(rng, n, n).hermitian_part().expect("square")
}

/// `X X*` with `X` of shape `n × k`.
pub fn random_psd(rng: &mut impl Rng, n: usize, k: usize) -> QMatrix {
    let x = random_qmatrix(rng, n, k);
    x.matmul(&x.conj_transpose()).expect("shapes agree")
}

/// A random `n × r` matrix with orthonormal quaternion columns (Gram–Schmidt on Gaussian columns).
pub fn random_orthonormal(rng: &mut impl Rng, n: usize, r: usize) -> QMatrix {
    let mut cols: Vec<Vec<Quaternion>> = Vec::with_capacity(r);
    while cols.len() < r {
        let mut x = random_qmatrix(rng, n, 1).column(0);
        for _ in 0..2 {
            for y in &cols {
                let c = inner(y, &x);
                for (xi, yi) in x.iter_mut().zip(y) {
                    *xi -= *yi * c;
                }
            }
        }
        let nrm = vec_norm(&x);
        if nrm > 1e-8 {
            cols.push(x.into_iter().map(|q| q / nrm).collect());
        }
    }
    QMatrix::from_columns(n, &cols).expect("column lengths agree")
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> QMatrix {
    random_orthonormal(rng, n, n)
}

/// `‖V1 V1* − V2 V2*‖_F`, the distance between the column spans of two orthonormal frames.
pub fn projector_distance(v1: &QMatrix, v2: &QMatrix) -> f64 {
    let p1 = v1.matmul(&v1.conj_transpose()).expect("shapes agree");
    let p2 = v2.matmul(&v2.conj_transpose()).expect("shapes agree");
    p1.sub(&p2).expect("same shape").fro_norm()
}
