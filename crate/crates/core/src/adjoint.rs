//! Complex adjoint embedding χ and a cyclic Jacobi solver for Hermitian complex matrices.
//!
//! For `Q = A + Bj` with `A = Q0 + Q1 i` and `B = Q2 + Q3 i`,
//!
//! ```text
//! χ(Q) = [  A   B ]
//!        [ -B̄   Ā ]
//! ```
//!
//! χ is an injective algebra homomorphism with `χ(Q*) = χ(Q)^H`, so the spectrum of
//! a Hermitian quaternion matrix is the spectrum of χ(Q) with every eigenvalue doubled.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::QMatrix;
use crate::quaternion::Quaternion;

const MAX_SWEEPS: usize = 80;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "complex matmul",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// χ(Q): the `2m × 2n` complex representation of an `m × n` quaternion matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexAdjoint(CMatrix);

impl ComplexAdjoint {
    pub fn from_qmatrix(q: &QMatrix) -> Self {
        let (m, n) = q.shape();
        let mut out = CMatrix::zeros(2 * m, 2 * n);
        for r in 0..m {
            for c in 0..n {
                let (a, b) = q.get(r, c).complex_pair();
                out[(r, c)] = a;
                out[(r, n + c)] = b;
                out[(m + r, c)] = -b.conj();
                out[(m + r, n + c)] = a.conj();
            }
        }
        Self(out)
    }

    /// Inverse of χ. Reads the `A` and `B` blocks and rejects matrices that are not
    /// in the image of χ.
    pub fn to_qmatrix(&self) -> Result<QMatrix> {
        let c = &self.0;
        if !c.rows.is_multiple_of(2) || !c.cols.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "adjoint must have even dimensions, got {}x{}",
                c.rows, c.cols
            )));
        }
        let (m, n) = (c.rows / 2, c.cols / 2);
        let scale = c.fro_norm().max(1.0);
        let mut q = QMatrix::zeros(m, n);
        for r in 0..m {
            for col in 0..n {
                let a = c[(r, col)];
                let b = c[(r, n + col)];
                let off = (c[(m + r, col)] + b.conj()).norm() + (c[(m + r, n + col)] - a.conj()).norm();
                if off > 1e-12 * scale {
                    return Err(Error::InvalidArgument(
                        "matrix is not a quaternion complex adjoint".into(),
                    ));
                }
                q.set(r, col, Quaternion::from_complex_pair(a, b));
            }
        }
        Ok(q)
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn matmul(&self, other: &ComplexAdjoint) -> Result<ComplexAdjoint> {
        Ok(Self(self.0.matmul(&other.0)?))
    }

    pub fn adjoint(&self) -> ComplexAdjoint {
        Self(self.0.adjoint())
    }

    pub fn fro_norm(&self) -> f64 {
        self.0.fro_norm()
    }

    pub fn max_abs_diff(&self, other: &ComplexAdjoint) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    /// `(χ + χ^H) / 2`.
    pub fn hermitian_part(&self) -> ComplexAdjoint {
        let h = self.0.adjoint();
        let data = self
            .0
            .data
            .iter()
            .zip(&h.data)
            .map(|(a, b)| (a + b) * 0.5)
            .collect();
        Self(CMatrix {
            rows: self.0.rows,
            cols: self.0.cols,
            data,
        })
    }
}

/// Maps an eigenvector `[u; v]` of χ(Q) to the quaternion vector `u − v̄ j`,
/// which satisfies `Q x = x λ` for the same real `λ`.
pub fn from_adjoint_vector(v: &[Complex64]) -> Result<Vec<Quaternion>> {
    if !v.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "adjoint vector length {} is odd",
            v.len()
        )));
    }
    let n = v.len() / 2;
    Ok((0..n)
        .map(|k| Quaternion::from_complex_pair(v[k], -v[n + k].conj()))
        .collect())
}

/// Eigenpairs of a complex Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct ComplexEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`. Empty when not requested.
    pub vectors: CMatrix,
}

/// Cyclic Jacobi eigensolver for a Hermitian complex matrix.
///
/// Only the Hermitian part is meaningful; callers symmetrize first. Ties in the
/// eigenvalue ordering keep the diagonal index order.
pub fn hermitian_jacobi(h: &CMatrix, want_vectors: bool) -> Result<ComplexEigen> {
    if h.rows != h.cols {
        return Err(Error::NotSquare {
            rows: h.rows,
            cols: h.cols,
        });
    }
    let n = h.rows;
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)].im = 0.0;
    }
    let mut v = if want_vectors {
        CMatrix::identity(n)
    } else {
        CMatrix::zeros(0, 0)
    };
    let fro = a.fro_norm();
    let tol = f64::EPSILON * fro;

    let mut converged = fro == 0.0 || n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q, want_vectors);
            }
        }
        converged = off_diagonal_norm(&a) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = if want_vectors {
        let mut out = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            for r in 0..n {
                out[(r, dst)] = v[(r, src)];
            }
        }
        out
    } else {
        v
    };
    Ok(ComplexEigen { values, vectors })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let mut s = 0.0;
    for r in 0..a.rows {
        for c in 0..a.cols {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One two-sided rotation `A ← Uᴴ A U` that annihilates `a_pq`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, want_vectors: bool) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let n = a.rows;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Phase-rotate a_pq onto the positive real axis, then apply a real rotation.
    let phase = (apq / g).conj();
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let upp = Complex64::new(c, 0.0);
    let upq = Complex64::new(s, 0.0);
    let uqp = phase * -s;
    let uqq = phase * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    if want_vectors {
        for k in 0..n {
            let vkp = v[(k, p)];
            let vkq = v[(k, q)];
            v[(k, p)] = vkp * upp + vkq * uqp;
            v[(k, q)] = vkp * upq + vkq * uqq;
        }
    }
}
