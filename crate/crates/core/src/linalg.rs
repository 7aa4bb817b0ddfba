//! Dense real linear algebra.
//!
//! Everything in the crate goes through the two decompositions defined here:
//! a cyclic Jacobi eigensolver for symmetric matrices and a one-sided Jacobi
//! SVD for rectangular ones. Both are deterministic: rotations are applied in
//! a fixed order and equal eigenvalues keep the column order produced by the
//! sweeps (stable sort), so identical inputs give bit-identical factors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when validating symmetry of user input.
pub const SYM_TOL: f64 = 1e-8;

/// Sweep limit for both Jacobi solvers.
pub const MAX_SWEEPS: usize = 100;

/// Tolerance for `‖UᵀU − I‖_F`, scaled by the dimension.
pub const ORTHO_TOL: f64 = 1e-8;

/// Dense row-major real matrix. Serializes as `{"rows", "cols", "data"}`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        Matrix::new(raw.rows, raw.cols, raw.data)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.6e} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting empty shapes and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::input(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::input(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "entry ({}, {}) is not finite",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix::from_raw(rows, cols, data)
    }

    /// Rectangular matrix with `x` on its main diagonal.
    pub fn diag_rect(rows: usize, cols: usize, x: &[f64]) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for (i, &v) in x.iter().enumerate().take(rows.min(cols)) {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Row-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Matrix product. Panics on incompatible shapes; public entry points
    /// check dimensions before calling it.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        self.map(|a| a * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix::from_raw(self.rows, self.cols, self.data.iter().map(|&a| f(a)).collect())
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Matrix::from_raw(self.rows, self.cols, data)
    }

    /// Frobenius inner product `tr(AᵀB)`.
    pub fn inner(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// `(A + Aᵀ)/2` for a square matrix.
    pub fn symmetric_part(&self) -> Matrix {
        assert!(self.is_square());
        Matrix::from_fn(self.rows, self.cols, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    /// `‖UᵀU − I‖_F`.
    pub fn orthogonality_residual(&self) -> f64 {
        let gram = self.transpose().matmul(self);
        gram.sub(&Matrix::identity(self.cols)).frobenius_norm()
    }

    /// Sum of squared off-diagonal entries, square-rooted.
    pub fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    s += self.get(i, j).powi(2);
                }
            }
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Validated dense real symmetric matrix.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SymMatrix(Matrix);

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym{:?}", self.0)
    }
}

impl SymMatrix {
    /// Validates symmetry with relative tolerance [`SYM_TOL`] and averages
    /// the two triangles. Inputs outside the tolerance are rejected.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        SymMatrix::from_matrix(Matrix::new(n, n, data)?)
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::input(format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        if !m.is_finite() {
            return Err(Error::input("symmetric matrix has non-finite entries"));
        }
        let bound = SYM_TOL * (1.0 + m.max_abs());
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                let d = (m.get(i, j) - m.get(j, i)).abs();
                if d > bound {
                    return Err(Error::input(format!(
                        "matrix is not symmetric: |X[{i}][{j}] - X[{j}][{i}]| = {d:e} exceeds {bound:e}"
                    )));
                }
            }
        }
        Ok(SymMatrix(m.symmetric_part()))
    }

    /// Symmetrizes without validation; for results of internal arithmetic.
    pub(crate) fn symmetrized(m: Matrix) -> Self {
        SymMatrix(m.symmetric_part())
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(Matrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.sub(&other.0))
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(self.0.scale(s))
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.zip_with(&other.0, |a, b| a + s * b))
    }

    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.0.inner(&other.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }
}

/// `U Diag(λ) Uᵀ` with `λ` nonincreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct EigDecomp {
    pub u: Matrix,
    pub lambda: Vec<f64>,
}

impl EigDecomp {
    pub fn reconstruct(&self) -> SymMatrix {
        reassemble(&self.u, &self.lambda)
    }
}

/// `U Diag_rect(σ) Vᵀ` with `σ` nonincreasing and nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdDecomp {
    pub u: Matrix,
    pub v: Matrix,
    pub sigma: Vec<f64>,
}

impl SvdDecomp {
    pub fn reconstruct(&self) -> Matrix {
        self.reassemble(&self.sigma)
    }

    /// `U Diag_rect(y) Vᵀ` for another vector of singular values.
    pub fn reassemble(&self, y: &[f64]) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut us = Matrix::zeros(m, n);
        for i in 0..m {
            for (k, &yk) in y.iter().enumerate() {
                us.set(i, k, self.u.get(i, k) * yk);
            }
        }
        us.matmul(&self.v.transpose())
    }
}

/// `U Diag(y) Uᵀ`, symmetrized.
pub fn reassemble(u: &Matrix, y: &[f64]) -> SymMatrix {
    let n = u.rows();
    assert_eq!(y.len(), u.cols());
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..y.len()).map(|k| u.get(i, k) * y[k] * u.get(j, k)).sum();
            out.set(i, j, s);
            out.set(j, i, s);
        }
    }
    SymMatrix(out)
}

/// Stable permutation sorting `values` in nonincreasing order.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

/// Symmetric eigendecomposition by cyclic Jacobi with threshold sweeps.
pub fn eig_sym(x: &SymMatrix) -> Result<EigDecomp> {
    let n = x.dim();
    let mut a = x.as_matrix().clone();
    if !a.is_finite() {
        return Err(Error::input("eigensolver input has non-finite entries"));
    }
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();

    let mut converged = scale == 0.0 || n == 1;
    for sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = a.off_diagonal_norm();
        if off <= 1e-16 * scale {
            converged = true;
            break;
        }
        // Early sweeps only annihilate large elements.
        let threshold = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    continue;
                }
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    let np = c * akp - s * akq;
                    let nq = s * akp + c * akq;
                    a.set(k, p, np);
                    a.set(p, k, np);
                    a.set(k, q, nq);
                    a.set(q, k, nq);
                }
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        let off = a.off_diagonal_norm();
        if off > 1e-16 * scale {
            return Err(Error::Convergence {
                what: format!("Jacobi eigensolver after {MAX_SWEEPS} sweeps"),
                residual: off,
            });
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let order = descending_order(&diag);
    let lambda = order.iter().map(|&i| diag[i]).collect();
    let u = Matrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(EigDecomp { u, lambda })
}

/// Singular value decomposition by one-sided Jacobi.
pub fn svd(x: &Matrix) -> Result<SvdDecomp> {
    if !x.is_finite() {
        return Err(Error::input("SVD input has non-finite entries"));
    }
    if x.rows() >= x.cols() {
        svd_tall(x)
    } else {
        let t = svd_tall(&x.transpose())?;
        Ok(SvdDecomp {
            u: t.v,
            v: t.u,
            sigma: t.sigma,
        })
    }
}

fn svd_tall(x: &Matrix) -> Result<SvdDecomp> {
    let (m, n) = x.shape();
    let mut w = x.clone();
    let mut v = Matrix::identity(n);

    let mut converged = false;
    let mut worst = 0.0f64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for k in 0..m {
                    let wp = w.get(k, p);
                    let wq = w.get(k, q);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let rel = gamma.abs() / (alpha * beta).sqrt();
                worst = worst.max(rel);
                if rel <= 1e-15 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let wp = w.get(k, p);
                    let wq = w.get(k, q);
                    w.set(k, p, c * wp - s * wq);
                    w.set(k, q, s * wp + c * wq);
                }
                for k in 0..n {
                    let vp = v.get(k, p);
                    let vq = v.get(k, q);
                    v.set(k, p, c * vp - s * vq);
                    v.set(k, q, s * vp + c * vq);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            what: format!("one-sided Jacobi SVD after {MAX_SWEEPS} sweeps"),
            residual: worst,
        });
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|k| w.get(k, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    let order = descending_order(&norms);
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let v = Matrix::from_fn(n, n, |i, j| v.get(i, order[j]));

    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = (m.max(n) as f64) * f64::EPSILON * smax;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (j, &s) in sigma.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            basis.push((0..m).map(|k| w.get(k, order[j]) / s).collect());
        } else {
            break;
        }
    }
    complete_orthonormal_basis(&mut basis, m);
    let u = Matrix::from_fn(m, m, |i, j| basis[j][i]);
    Ok(SvdDecomp { u, v, sigma })
}

/// Extends an orthonormal family in `R^m` to a basis by Gram-Schmidt over
/// the standard basis vectors, in index order.
fn complete_orthonormal_basis(basis: &mut Vec<Vec<f64>>, m: usize) {
    for e in 0..m {
        if basis.len() == m {
            break;
        }
        let mut cand = vec![0.0; m];
        cand[e] = 1.0;
        for _ in 0..2 {
            for b in basis.iter() {
                let d: f64 = b.iter().zip(&cand).map(|(x, y)| x * y).sum();
                for (c, x) in cand.iter_mut().zip(b) {
                    *c -= d * x;
                }
            }
        }
        let norm = cand.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cand.iter_mut().for_each(|c| *c /= norm);
            basis.push(cand);
        }
    }
}

fn check_orthogonal(u: &Matrix, n: usize) -> Result<()> {
    if u.shape() != (n, n) {
        return Err(Error::dim(format!(
            "orthogonal factor must be {n}x{n}, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let r = u.orthogonality_residual();
    if r > ORTHO_TOL * n as f64 {
        return Err(Error::input(format!(
            "matrix is not orthogonal: ||U^T U - I||_F = {r:e}"
        )));
    }
    Ok(())
}

/// The conjugation action `U.X = U X Uᵀ`.
pub fn conjugate(u: &Matrix, x: &SymMatrix) -> Result<SymMatrix> {
    check_orthogonal(u, x.dim())?;
    Ok(SymMatrix::symmetrized(u.matmul(x.as_matrix()).matmul(&u.transpose())))
}

/// Action of an orthogonal pair on rectangular matrices: `U X Vᵀ`.
pub fn conjugate_rect(u: &Matrix, v: &Matrix, x: &Matrix) -> Result<Matrix> {
    check_orthogonal(u, x.rows())?;
    check_orthogonal(v, x.cols())?;
    Ok(u.matmul(x).matmul(&v.transpose()))
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::dim(format!(
            "commutator needs equal square matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.matmul(b).sub(&b.matmul(a)))
}

pub fn diag_embed(x: &[f64]) -> Result<SymMatrix> {
    if x.is_empty() {
        return Err(Error::input("cannot embed an empty vector"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("diagonal entries must be finite"));
    }
    let n = x.len();
    Ok(SymMatrix(Matrix::diag_rect(n, n, x)))
}

pub fn diag_extract(x: &SymMatrix) -> Vec<f64> {
    (0..x.dim()).map(|i| x.get(i, i)).collect()
}

pub(crate) fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}
