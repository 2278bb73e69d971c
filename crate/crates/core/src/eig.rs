//! Eigendecomposition of Hermitian quaternion matrices through the complex adjoint.
//!
//! χ(G) is Hermitian with every eigenvalue doubled. The adjoint spectrum is sorted in
//! descending order and every other value is kept. Each quaternion eigenvalue cluster
//! is then given an orthonormal quaternion basis recovered from the adjoint eigenvectors.

use crate::adjoint::{from_adjoint_vector, hermitian_jacobi, ComplexAdjoint};
use crate::error::{Error, Result};
use crate::matrix::{inner, vec_norm, QMatrix};
use crate::quaternion::Quaternion;

/// Relative tolerance on `‖G − G*‖_F` accepted by [`heig`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative gap below which eigenvalues are treated as one cluster.
pub const CLUSTER_TOL: f64 = 1e-9;
/// `λ_r ≤ RANK_TOL · λ_1` is rank deficient.
pub const RANK_TOL: f64 = 1e-12;
const ABS_FLOOR: f64 = 1e-14;

/// Spectrum and unitary eigenvectors of a Hermitian quaternion matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Real eigenvalues, descending.
    pub values: Vec<f64>,
    /// `n × n`, column `s` pairs with `values[s]`.
    pub vectors: QMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// The `r` leading eigenvectors and eigenvalues `(V, diag(D))`.
    pub fn top_r(&self, r: usize) -> Result<(QMatrix, Vec<f64>)> {
        let n = self.dim();
        if r == 0 || r > n {
            return Err(Error::RankOutOfRange { r, max: n });
        }
        let lambda_1 = self.values[0];
        let lambda_r = self.values[r - 1];
        if lambda_1 <= 0.0 || lambda_r <= RANK_TOL * lambda_1 {
            return Err(Error::RankDeficient {
                r,
                lambda_r,
                lambda_1,
            });
        }
        Ok((self.vectors.columns(0..r), self.values[..r].to_vec()))
    }
}

fn check_hermitian(g: &QMatrix) -> Result<f64> {
    let (rows, cols) = g.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let norm = g.fro_norm();
    let deviation = g.hermitian_deviation();
    let tolerance = (HERMITIAN_TOL * norm).max(ABS_FLOOR);
    if deviation > tolerance || !deviation.is_finite() {
        return Err(Error::NotHermitian {
            deviation,
            tolerance,
        });
    }
    Ok(norm)
}

/// Keeps every other adjoint eigenvalue after checking that partners coincide.
fn deduplicate(adjoint_values: &[f64], norm: f64) -> Result<Vec<f64>> {
    let tol = (CLUSTER_TOL * norm).max(ABS_FLOOR);
    adjoint_values
        .chunks_exact(2)
        .map(|pair| {
            let gap = (pair[0] - pair[1]).abs();
            if gap > tol {
                Err(Error::AdjointPairing { gap })
            } else {
                Ok(pair[0])
            }
        })
        .collect()
}

/// Eigenvalues only, descending.
pub fn eigenvalues(g: &QMatrix) -> Result<Vec<f64>> {
    let norm = check_hermitian(g)?;
    let chi = ComplexAdjoint::from_qmatrix(&g.hermitian_part()?);
    let eig = hermitian_jacobi(chi.as_matrix(), false)?;
    deduplicate(&eig.values, norm)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(g: &QMatrix) -> Result<f64> {
    Ok(eigenvalues(g)?.first().copied().unwrap_or(0.0))
}

/// Full eigendecomposition `G v_s = v_s λ_s` of a Hermitian quaternion matrix.
pub fn heig(g: &QMatrix) -> Result<HermitianEigen> {
    let norm = check_hermitian(g)?;
    let n = g.rows();
    let chi = ComplexAdjoint::from_qmatrix(&g.hermitian_part()?);
    let eig = hermitian_jacobi(chi.as_matrix(), true)?;
    let values = deduplicate(&eig.values, norm)?;

    let gap_tol = (CLUSTER_TOL * norm).max(ABS_FLOOR);
    let mut columns: Vec<Vec<Quaternion>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end - 1] - values[end] < gap_tol {
            end += 1;
        }
        let candidates = (2 * start..2 * end)
            .map(|c| from_adjoint_vector(&eig.vectors.column(c)))
            .collect::<Result<Vec<_>>>()?;
        let basis = cluster_basis(candidates, end - start, &columns)?;
        columns.extend(basis);
        start = end;
    }
    for col in &mut columns {
        fix_gauge(col);
    }
    Ok(HermitianEigen {
        values,
        vectors: QMatrix::from_columns(n, &columns)?,
    })
}

/// Subtracts the components of `x` along each (orthonormal) vector in `basis`.
fn orthogonalize(x: &mut [Quaternion], basis: &[Vec<Quaternion>]) {
    for y in basis {
        let c = inner(y, x);
        for (xi, yi) in x.iter_mut().zip(y) {
            *xi -= *yi * c;
        }
    }
}

/// Picks `size` orthonormal quaternion vectors spanning the same right H-module as the
/// candidates, greedily taking the candidate with the largest residual each step.
fn cluster_basis(
    mut candidates: Vec<Vec<Quaternion>>,
    size: usize,
    previous: &[Vec<Quaternion>],
) -> Result<Vec<Vec<Quaternion>>> {
    for c in &mut candidates {
        orthogonalize(c, previous);
    }
    let mut basis: Vec<Vec<Quaternion>> = Vec::with_capacity(size);
    while basis.len() < size {
        let (best, nrm) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, vec_norm(c)))
            .fold((usize::MAX, 0.0), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
        if best == usize::MAX || nrm < 1e-6 {
            return Err(Error::AdjointPairing { gap: nrm });
        }
        let mut v = candidates.swap_remove(best);
        // second pass against the cluster so far and the earlier clusters
        orthogonalize(&mut v, &basis);
        orthogonalize(&mut v, previous);
        let nrm = vec_norm(&v);
        let v: Vec<Quaternion> = v.into_iter().map(|q| q / nrm).collect();
        for c in &mut candidates {
            orthogonalize(c, std::slice::from_ref(&v));
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Right-multiplies by a unit quaternion so the first entry of largest modulus is real
/// and positive.
fn fix_gauge(v: &mut [Quaternion]) {
    let max = v.iter().map(|q| q.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|q| q.norm() >= max * (1.0 - 1e-12))
        .expect("max exists");
    let p = v[pivot];
    let unit = p.conj() / p.norm();
    for q in v.iter_mut() {
        *q *= unit;
    }
    v[pivot] = Quaternion::real(v[pivot].w);
}
