//! Seeded random generators for matrices, used by the oracles and tests.
//!
//! Orthogonal matrices are drawn from the Haar measure by Gram-Schmidt on a
//! Gaussian matrix.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{reassemble, Matrix, SymMatrix};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

pub fn rect<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Matrix {
    Matrix::from_fn(m, n, |_, _| gaussian(rng))
}

/// Symmetric matrix with i.i.d. standard normal upper triangle.
pub fn symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymMatrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = gaussian(rng);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    SymMatrix::symmetrized(m)
}

/// Skew-symmetric matrix with i.i.d. standard normal upper triangle.
pub fn skew<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = gaussian(rng);
            m.set(i, j, v);
            m.set(j, i, -v);
        }
    }
    m
}

pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let g = rect(rng, n, n);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut c = g.column(j);
        for _ in 0..2 {
            for b in &cols {
                let d: f64 = b.iter().zip(&c).map(|(x, y)| x * y).sum();
                c.iter_mut().zip(b).for_each(|(ci, bi)| *ci -= d * bi);
            }
        }
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.iter_mut().for_each(|x| *x /= norm);
        cols.push(c);
    }
    Matrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `Q Diag(spectrum) Qᵀ` for a random orthogonal `Q`.
pub fn with_spectrum<R: Rng + ?Sized>(rng: &mut R, spectrum: &[f64]) -> SymMatrix {
    let q = orthogonal(rng, spectrum.len());
    reassemble(&q, spectrum)
}

/// Random signed permutation applied to `x`.
pub fn signed_permutation<R: Rng + ?Sized>(rng: &mut R, x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    out.shuffle(rng);
    for v in out.iter_mut() {
        if rng.random::<bool>() {
            *v = -*v;
        }
    }
    out
}
