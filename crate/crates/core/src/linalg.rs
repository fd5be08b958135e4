//! Small dense linear algebra: row-major matrices, LU with partial pivoting,
//! Jacobi eigenvalues for symmetric matrices, and the rank-3/rank-4 arrays
//! that carry mass-matrix derivatives.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math::abs;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices. Panics if rows have unequal length.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `uᵀ A v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(self.mul_vec(v)).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: f64, other: &Matrix) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        crate::math::norm_inf(&self.data)
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max(abs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut b = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                b[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        b
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization `P A = L U` with partial (row) pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors a square matrix. A pivot smaller than `n·ε·max|A|` is treated
    /// as singular.
    pub fn factor(a: &Matrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::DimensionMismatch {
                context: "LU factorization",
                expected: a.rows,
                found: a.cols,
            });
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = (n as f64) * f64::EPSILON * a.max_abs();

        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, abs(lu[i * n + k])))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > threshold) {
                return Err(Error::SingularMatrix { column: k, pivot });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.n;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// ∞-norm condition number estimate `‖A‖∞ ‖A⁻¹‖∞`, or infinity when singular.
pub fn condition_inf(a: &Matrix) -> f64 {
    let row_sum = |m: &Matrix| {
        (0..m.rows)
            .map(|i| m.row(i).iter().map(|x| abs(*x)).sum::<f64>())
            .fold(0.0, f64::max)
    };
    match Lu::factor(a) {
        Ok(lu) => row_sum(a) * row_sum(&lu.inverse()),
        Err(_) => f64::INFINITY,
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.rows;
    let mut m = a.clone();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off <= 1e-30 * (m.max_abs() * m.max_abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (abs(theta) + crate::math::sqrt(theta * theta + 1.0));
                let c = 1.0 / crate::math::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Rank-3 array `D[γ][α][β] = ∂_γ M_αβ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, g: usize, a: usize, b: usize) -> f64 {
        self.data[(g * self.n + a) * self.n + b]
    }

    #[inline]
    pub fn set(&mut self, g: usize, a: usize, b: usize, v: f64) {
        let n = self.n;
        self.data[(g * n + a) * n + b] = v;
    }

    /// Sets `D[g][a][b]` and `D[g][b][a]`.
    pub fn set_sym(&mut self, g: usize, a: usize, b: usize, v: f64) {
        self.set(g, a, b, v);
        self.set(g, b, a, v);
    }

    /// The matrix `∂_γ M` for a fixed `γ`.
    pub fn slice(&self, g: usize) -> Matrix {
        let n = self.n;
        Matrix {
            rows: n,
            cols: n,
            data: self.data[g * n * n..(g + 1) * n * n].to_vec(),
        }
    }

    /// Vector `w_γ = Σ_αβ D[γ][α][β] u^α u^β`.
    pub fn quadratic(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|g| {
                let mut s = 0.0;
                for a in 0..self.n {
                    for b in 0..self.n {
                        s += self.get(g, a, b) * u[a] * u[b];
                    }
                }
                s
            })
            .collect()
    }

    /// Matrix `C[γ][δ] = Σ_β D[γ][δ][β] v^β`.
    pub fn contract_last(&self, v: &[f64]) -> Matrix {
        let n = self.n;
        let mut c = Matrix::zeros(n, n);
        for g in 0..n {
            for d in 0..n {
                c[(g, d)] = (0..n).map(|b| self.get(g, d, b) * v[b]).sum();
            }
        }
        c
    }
}

/// Rank-4 array `D2[γ][δ][α][β] = ∂_γ ∂_δ M_αβ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, g: usize, d: usize, a: usize, b: usize) -> f64 {
        let n = self.n;
        self.data[((g * n + d) * n + a) * n + b]
    }

    #[inline]
    pub fn set(&mut self, g: usize, d: usize, a: usize, b: usize, v: f64) {
        let n = self.n;
        self.data[((g * n + d) * n + a) * n + b] = v;
    }

    /// Sets the entry and all its images under the (γ,δ) and (α,β) swaps.
    pub fn set_sym(&mut self, g: usize, d: usize, a: usize, b: usize, v: f64) {
        self.set(g, d, a, b, v);
        self.set(d, g, a, b, v);
        self.set(g, d, b, a, v);
        self.set(d, g, b, a, v);
    }

    /// Matrix `Q[γ][δ] = Σ_αβ D2[γ][δ][α][β] u^α u^β`.
    pub fn quadratic(&self, u: &[f64]) -> Matrix {
        let n = self.n;
        let mut q = Matrix::zeros(n, n);
        for g in 0..n {
            for d in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += self.get(g, d, a, b) * u[a] * u[b];
                    }
                }
                q[(g, d)] = s;
            }
        }
        q
    }
}
