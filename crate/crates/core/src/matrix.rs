//! Dense quaternion matrices stored as four real row-major planes.

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Work (output entries × inner length) above which `matmul` fans out over rows.
const PAR_THRESHOLD: usize = 1 << 15;

/// An `rows × cols` quaternion matrix `Q = Q0 + Q1 i + Q2 j + Q3 k`.
///
/// Each real component `Qs` is kept in its own row-major plane.
#[derive(Clone, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    planes: [Vec<f64>; 4],
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let n = rows * cols;
        Self {
            rows,
            cols,
            planes: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.planes[0][i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Builds a matrix from its four component planes (row-major, each `rows * cols` long).
    pub fn from_planes(rows: usize, cols: usize, planes: [Vec<f64>; 4]) -> Result<Self> {
        if planes.iter().any(|p| p.len() != rows * cols) {
            return Err(Error::InvalidArgument(format!(
                "plane length does not match {rows}x{cols}"
            )));
        }
        Ok(Self { rows, cols, planes })
    }

    /// Real matrix embedded in the quaternions.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let mut m = Self::zeros(rows, cols);
        m.planes[0].copy_from_slice(data);
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<Quaternion>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    /// Column vector from a slice.
    pub fn from_column(v: &[Quaternion]) -> Self {
        Self::from_fn(v.len(), 1, |i, _| v[i])
    }

    /// Assembles a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<Quaternion>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("column length mismatch".into()));
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    /// Component plane `s` (0 = real, 1 = i, 2 = j, 3 = k).
    #[inline]
    pub fn plane(&self, s: usize) -> &[f64] {
        &self.planes[s]
    }

    #[inline]
    pub fn planes(&self) -> &[Vec<f64>; 4] {
        &self.planes
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Quaternion {
        let idx = r * self.cols + c;
        Quaternion::new(
            self.planes[0][idx],
            self.planes[1][idx],
            self.planes[2][idx],
            self.planes[3][idx],
        )
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, q: Quaternion) {
        let idx = r * self.cols + c;
        self.planes[0][idx] = q.w;
        self.planes[1][idx] = q.x;
        self.planes[2][idx] = q.y;
        self.planes[3][idx] = q.z;
    }

    pub fn column(&self, c: usize) -> Vec<Quaternion> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row(&self, r: usize) -> Vec<Quaternion> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    /// Copy of the columns in `range`.
    pub fn columns(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.cols, "column range out of bounds");
        let (start, width) = (range.start, range.len());
        Self::from_fn(self.rows, width, |r, c| self.get(r, start + c))
    }

    /// `[self, other]`.
    pub fn hcat(&self, other: &QMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(self.mismatch("hcat", other));
        }
        let c0 = self.cols;
        Ok(Self::from_fn(self.rows, c0 + other.cols, |r, c| {
            if c < c0 {
                self.get(r, c)
            } else {
                other.get(r, c - c0)
            }
        }))
    }

    fn mismatch(&self, op: &'static str, other: &QMatrix) -> Error {
        Error::DimensionMismatch {
            op,
            left: self.shape(),
            right: other.shape(),
        }
    }

    fn zip_planes(&self, other: &QMatrix, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(self.mismatch(op, other));
        }
        let planes = std::array::from_fn(|s| {
            self.planes[s]
                .iter()
                .zip(&other.planes[s])
                .map(|(&a, &b)| f(a, b))
                .collect()
        });
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            planes,
        })
    }

    pub fn add(&self, other: &QMatrix) -> Result<Self> {
        self.zip_planes(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &QMatrix) -> Result<Self> {
        self.zip_planes(other, "sub", |a, b| a - b)
    }

    /// In-place `self += other * s` for real `s`.
    pub fn axpy(&mut self, s: f64, other: &QMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(self.mismatch("axpy", other));
        }
        for p in 0..4 {
            for (a, &b) in self.planes[p].iter_mut().zip(&other.planes[p]) {
                *a += s * b;
            }
        }
        Ok(())
    }

    pub fn scale(&self, s: f64) -> Self {
        let planes = std::array::from_fn(|p| self.planes[p].iter().map(|v| v * s).collect());
        Self {
            rows: self.rows,
            cols: self.cols,
            planes,
        }
    }

    /// Multiplies column `t` by the real `d[t]`, i.e. `A·diag(d)`.
    pub fn scale_columns(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "scale_columns",
                left: self.shape(),
                right: (d.len(), d.len()),
            });
        }
        let mut out = self.clone();
        for p in 0..4 {
            for row in out.planes[p].chunks_mut(self.cols.max(1)) {
                for (v, s) in row.iter_mut().zip(d) {
                    *v *= s;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose `A*`, with `(A*)_{ab} = conj(A_{ba})`.
    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// Plain transpose without conjugation.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Quaternion matrix product. Each output entry is accumulated in index order,
    /// so results do not depend on the thread count.
    pub fn matmul(&self, other: &QMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(self.mismatch("matmul", other));
        }
        let (m, n) = (self.rows, other.cols);
        let row_product = |i: usize| -> Vec<Quaternion> {
            (0..n).map(|j| self.row_dot_col(i, other, j)).collect()
        };
        let rows: Vec<Vec<Quaternion>> = if m * n * self.cols >= PAR_THRESHOLD {
            (0..m).into_par_iter().map(row_product).collect()
        } else {
            (0..m).map(row_product).collect()
        };
        let mut out = Self::zeros(m, n);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, q) in row.into_iter().enumerate() {
                out.set(i, j, q);
            }
        }
        Ok(out)
    }

    #[inline]
    fn row_dot_col(&self, i: usize, other: &QMatrix, j: usize) -> Quaternion {
        let [aw, ax, ay, az] = &self.planes;
        let [bw, bx, by, bz] = &other.planes;
        let (mut w, mut x, mut y, mut z) = (0.0, 0.0, 0.0, 0.0);
        let arow = i * self.cols;
        for k in 0..self.cols {
            let a = arow + k;
            let b = k * other.cols + j;
            let (a0, a1, a2, a3) = (aw[a], ax[a], ay[a], az[a]);
            let (b0, b1, b2, b3) = (bw[b], bx[b], by[b], bz[b]);
            w += a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3;
            x += a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2;
            y += a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1;
            z += a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0;
        }
        Quaternion::new(w, x, y, z)
    }

    /// `A* B` without materializing `A*`.
    pub fn adjoint_matmul(&self, other: &QMatrix) -> Result<Self> {
        self.conj_transpose().matmul(other)
    }

    /// Matrix-vector product `A v`.
    pub fn mul_vec(&self, v: &[Quaternion]) -> Result<Vec<Quaternion>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                (0..self.cols).fold(Quaternion::ZERO, |acc, c| acc + self.get(r, c) * v[c])
            })
            .collect())
    }

    pub fn fro_norm_sqr(&self) -> f64 {
        self.planes.iter().flatten().map(|v| v * v).sum()
    }

    /// Frobenius norm `sqrt(Σ |a_st|²)`.
    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sqr().sqrt()
    }

    /// Largest singular value, via the largest eigenvalue of `A*A`.
    pub fn spectral_norm(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let gram = if self.cols <= self.rows {
            self.adjoint_matmul(self).expect("shapes agree")
        } else {
            self.matmul(&self.conj_transpose()).expect("shapes agree")
        };
        let adj = crate::adjoint::ComplexAdjoint::from_qmatrix(&gram).hermitian_part();
        let eig = crate::adjoint::hermitian_jacobi(adj.as_matrix(), false)
            .expect("Jacobi converges on Hermitian input");
        eig.values
            .first()
            .copied()
            .unwrap_or(0.0)
            .max(0.0)
            .sqrt()
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> Quaternion {
        (0..self.rows.min(self.cols)).fold(Quaternion::ZERO, |acc, i| acc + self.get(i, i))
    }

    /// Largest entrywise quaternion modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &QMatrix) -> Result<f64> {
        let d = self.sub(other)?;
        Ok((0..d.rows)
            .flat_map(|r| (0..d.cols).map(move |c| (r, c)))
            .map(|(r, c)| d.get(r, c).norm())
            .fold(0.0, f64::max))
    }

    /// `‖A − A*‖_F`.
    pub fn hermitian_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.sub(&self.conj_transpose()).expect("square").fro_norm()
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.add(&self.conj_transpose())?.scale(0.5))
    }

    pub fn is_real(&self) -> bool {
        self.planes[1..].iter().flatten().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.planes.iter().flatten().all(|v| v.is_finite())
    }

    /// `‖V*V − I‖_F`.
    pub fn orthonormality_residual(&self) -> f64 {
        let gram = self.adjoint_matmul(self).expect("shapes agree");
        gram.sub(&QMatrix::identity(self.cols)).expect("square").fro_norm()
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Quaternion inner product `u* v`.
pub fn inner(u: &[Quaternion], v: &[Quaternion]) -> Quaternion {
    u.iter()
        .zip(v)
        .fold(Quaternion::ZERO, |acc, (a, b)| acc + a.conj() * *b)
}

pub fn vec_norm(v: &[Quaternion]) -> f64 {
    v.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}
