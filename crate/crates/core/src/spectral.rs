//! Spectral functions `F = f∘λ` on symmetric matrices.
//!
//! Every operation diagonalizes its argument once, `X = U Diag(λ) Uᵀ`, does
//! the work on the eigenvalue vector with the underlying symmetric function,
//! and conjugates the result back with the same `U`:
//!
//! * envelope: `(f∘λ)_α(X) = f_α(λ(X))`
//! * prox: `U Diag(y) Uᵀ` with `y ∈ P_α f(λ(X))`
//! * gradient / subgradient: `U Diag(v) Uᵀ` with `v ∈ ∂f(λ(X))`
//! * Hessian: diagonal block `∇²f(a)[diag B̃]`, off-diagonal entries scaled by
//!   divided differences of `∇f(a)`, in the rotated frame `B̃ = Uᵀ B U`.
//!
//! Nothing is cached between calls.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, reassemble, Matrix, SymMatrix};
use crate::symmetric::{self, SymmetricFunction};

/// Default relative threshold under which two eigenvalues use the
/// coincident-eigenvalue branch of the Hessian formula.
pub const DEFAULT_EIG_TOL: f64 = 1e-7;

#[derive(Clone)]
pub struct SpectralFunction {
    f: Arc<dyn SymmetricFunction>,
    eig_tol: f64,
}

impl fmt::Debug for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralFunction")
            .field("f", &self.f.name())
            .field("eig_tol", &self.eig_tol)
            .finish()
    }
}

/// Proximal point of a spectral function together with the data it was
/// assembled from.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxResultMat {
    pub point: SymMatrix,
    pub envelope_value: f64,
    /// Orthogonal `U` with `X = U Diag(λ(X)) Uᵀ` and `point = U Diag(eigen_prox) Uᵀ`.
    pub diagonalizer: Matrix,
    pub eigen_prox: Vec<f64>,
    pub alpha: f64,
}

impl SpectralFunction {
    pub fn new<F: SymmetricFunction + 'static>(f: F) -> Self {
        SpectralFunction::from_arc(Arc::new(f))
    }

    pub fn from_arc(f: Arc<dyn SymmetricFunction>) -> Self {
        SpectralFunction {
            f,
            eig_tol: DEFAULT_EIG_TOL,
        }
    }

    /// Sets the relative eigenvalue-coincidence threshold; the absolute
    /// threshold at `X` is `eig_tol·(1 + ‖X‖_F)`.
    pub fn with_eig_tol(mut self, eig_tol: f64) -> Result<Self> {
        if !(eig_tol > 0.0) || !eig_tol.is_finite() {
            return Err(Error::input(format!("eig_tol must be positive, got {eig_tol}")));
        }
        self.eig_tol = eig_tol;
        Ok(self)
    }

    pub fn symmetric(&self) -> &dyn SymmetricFunction {
        self.f.as_ref()
    }

    pub fn symmetric_arc(&self) -> Arc<dyn SymmetricFunction> {
        Arc::clone(&self.f)
    }

    pub fn eig_tol(&self) -> f64 {
        self.eig_tol
    }

    fn diagonalize(&self, x: &SymMatrix) -> Result<(Matrix, Vec<f64>)> {
        self.f.check_dim(x.dim())?;
        let e = eig_sym(x)?;
        Ok((e.u, e.lambda))
    }

    /// `f(λ(X))`, possibly `+inf`.
    pub fn value(&self, x: &SymMatrix) -> Result<f64> {
        let (_, lambda) = self.diagonalize(x)?;
        Ok(self.f.value(&lambda))
    }

    pub fn prox(&self, x: &SymMatrix, alpha: f64) -> Result<ProxResultMat> {
        let (u, lambda) = self.diagonalize(x)?;
        let p = symmetric::prox(self.f.as_ref(), &lambda, alpha)?;
        Ok(ProxResultMat {
            point: reassemble(&u, &p.point),
            envelope_value: p.envelope_value,
            diagonalizer: u,
            eigen_prox: p.point,
            alpha,
        })
    }

    /// `(f∘λ)_α(X) = f_α(λ(X))`; `α = 0` gives `F(X)`.
    pub fn envelope(&self, x: &SymMatrix, alpha: f64) -> Result<f64> {
        let (_, lambda) = self.diagonalize(x)?;
        symmetric::envelope(self.f.as_ref(), &lambda, alpha)
    }

    pub fn gradient(&self, x: &SymMatrix) -> Result<SymMatrix> {
        let (u, lambda) = self.diagonalize(x)?;
        let g = symmetric::gradient(self.f.as_ref(), &lambda)?;
        Ok(reassemble(&u, &g))
    }

    /// `U Diag(v) Uᵀ` for the diagonalizer of `X`. The caller is responsible
    /// for `v ∈ ∂f(λ(X))`; see [`crate::verify`] for membership checks.
    pub fn subgradient_lift(&self, x: &SymMatrix, v: &[f64]) -> Result<SymMatrix> {
        if v.len() != x.dim() {
            return Err(Error::dim(format!(
                "subgradient vector has {} entries, matrix is {}x{}",
                v.len(),
                x.dim(),
                x.dim()
            )));
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("subgradient vector has non-finite entries"));
        }
        let (u, _) = self.diagonalize(x)?;
        Ok(reassemble(&u, v))
    }

    /// `∇²F(X)[B]` for `F` twice continuously differentiable near `X`.
    pub fn hessian_apply(&self, x: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
        let n = x.dim();
        if b.dim() != n {
            return Err(Error::dim(format!(
                "direction is {}x{}, matrix is {n}x{n}",
                b.dim(),
                b.dim()
            )));
        }
        let (u, a) = self.diagonalize(x)?;
        let grad = symmetric::gradient(self.f.as_ref(), &a)?;
        let hess = symmetric::hessian(self.f.as_ref(), &a)?;
        let tol = self.eig_tol * (1.0 + x.frobenius_norm());

        let bt = u.transpose().matmul(b.as_matrix()).matmul(&u);
        let mut z = Matrix::zeros(n, n);
        for i in 0..n {
            let d: f64 = (0..n).map(|j| hess.get(i, j) * bt.get(j, j)).sum();
            z.set(i, i, d);
            for j in (i + 1)..n {
                let coef = if (a[i] - a[j]).abs() < tol {
                    hess.get(i, i) - hess.get(i, j)
                } else {
                    (grad[i] - grad[j]) / (a[i] - a[j])
                };
                let v = coef * 0.5 * (bt.get(i, j) + bt.get(j, i));
                z.set(i, j, v);
                z.set(j, i, v);
            }
        }
        Ok(SymMatrix::symmetrized(u.matmul(&z).matmul(&u.transpose())))
    }

    /// `∇F_α(X) = (X − P_α F(X))/α`, valid for convex `f`.
    pub fn moreau_smoothing_gradient(&self, x: &SymMatrix, alpha: f64) -> Result<SymMatrix> {
        if !self.f.capabilities().convex {
            return Err(Error::capability(format!(
                "envelope gradient formula needs a convex function, {} is not",
                self.f.name()
            )));
        }
        let p = self.prox(x, alpha)?;
        Ok(x.sub(&p.point).scale(1.0 / alpha))
    }
}
