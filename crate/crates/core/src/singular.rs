//! Singular-value functions `F = f∘σ` on real `m×n` matrices.
//!
//! `f` must be absolutely symmetric (invariant under signed permutations),
//! so that `F(UXVᵀ) = F(X)` for orthogonal `U`, `V`. Operations mirror the
//! spectral lift with the SVD in place of the eigendecomposition.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix, SvdDecomp};
use crate::sample;
use crate::symmetric::{self, SymmetricFunction, TIE_TOL};

/// Number of random signed-permutation probes run at construction.
pub const SYMMETRY_PROBES: usize = 20;
const PROBE_TOL: f64 = 1e-9;
const PROBE_SEED: u64 = 0x5eed_0f51;

#[derive(Clone)]
pub struct SingularFunction {
    f: Arc<dyn SymmetricFunction>,
    rows: usize,
    cols: usize,
}

impl fmt::Debug for SingularFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SingularFunction")
            .field("f", &self.f.name())
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularProx {
    pub point: Matrix,
    pub envelope_value: f64,
    pub singular_prox: Vec<f64>,
    pub u: Matrix,
    pub v: Matrix,
    pub alpha: f64,
}

impl SingularFunction {
    pub fn new<F: SymmetricFunction + 'static>(f: F, rows: usize, cols: usize) -> Result<Self> {
        SingularFunction::from_arc(Arc::new(f), rows, cols)
    }

    /// Rejects `f` unless it is flagged absolutely symmetric and passes
    /// [`SYMMETRY_PROBES`] seeded signed-permutation probes.
    pub fn from_arc(f: Arc<dyn SymmetricFunction>, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::input("singular function needs positive dimensions"));
        }
        if !f.capabilities().absolutely_symmetric {
            return Err(Error::capability(format!(
                "{} is not absolutely symmetric and cannot be composed with singular values",
                f.name()
            )));
        }
        let p = rows.min(cols);
        f.check_dim(p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        for probe in 0..SYMMETRY_PROBES {
            let scale = if probe % 2 == 0 { 1.0 } else { 0.1 };
            let x: Vec<f64> = sample::vector(&mut rng, p).iter().map(|v| v * scale).collect();
            let y = sample::signed_permutation(&mut rng, &x);
            let (fx, fy) = (f.value(&x), f.value(&y));
            let same = if fx.is_finite() || fy.is_finite() {
                (fx - fy).abs() <= PROBE_TOL * (1.0 + fx.abs())
            } else {
                fx == fy
            };
            if !same {
                return Err(Error::capability(format!(
                    "{} failed the signed-permutation probe: f(x) = {fx}, f(Px) = {fy}",
                    f.name()
                )));
            }
        }
        Ok(SingularFunction { f, rows, cols })
    }

    pub fn symmetric(&self) -> &dyn SymmetricFunction {
        self.f.as_ref()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn decompose(&self, x: &Matrix) -> Result<SvdDecomp> {
        if x.shape() != (self.rows, self.cols) {
            return Err(Error::dim(format!(
                "expected a {}x{} matrix, got {}x{}",
                self.rows,
                self.cols,
                x.rows(),
                x.cols()
            )));
        }
        svd(x)
    }

    pub fn value(&self, x: &Matrix) -> Result<f64> {
        Ok(self.f.value(&self.decompose(x)?.sigma))
    }

    pub fn prox(&self, x: &Matrix, alpha: f64) -> Result<SingularProx> {
        let d = self.decompose(x)?;
        let p = symmetric::prox(self.f.as_ref(), &d.sigma, alpha)?;
        let smax = d.sigma.first().copied().unwrap_or(0.0);
        if let Some(i) = p.point.iter().position(|&y| y < -1e-12 * (1.0 + smax)) {
            return Err(Error::Contract(format!(
                "prox of {} mapped nonnegative singular values to a negative component \
                 (y[{i}] = {})",
                self.f.name(),
                p.point[i]
            )));
        }
        Ok(SingularProx {
            point: d.reassemble(&p.point),
            envelope_value: p.envelope_value,
            singular_prox: p.point,
            u: d.u,
            v: d.v,
            alpha,
        })
    }

    /// `(f∘σ)_α(X) = f_α(σ(X))`; `α = 0` gives `F(X)`.
    pub fn envelope(&self, x: &Matrix, alpha: f64) -> Result<f64> {
        let d = self.decompose(x)?;
        symmetric::envelope(self.f.as_ref(), &d.sigma, alpha)
    }

    /// `U Diag(∇f(σ)) Vᵀ`, defined when the singular values are distinct
    /// and positive.
    pub fn gradient(&self, x: &Matrix) -> Result<Matrix> {
        let d = self.decompose(x)?;
        let s = &d.sigma;
        let tol = TIE_TOL * (1.0 + s.first().copied().unwrap_or(0.0));
        if s.windows(2).any(|w| w[0] - w[1] < tol) {
            return Err(Error::nonsmooth("repeated singular values"));
        }
        if s.last().is_some_and(|&v| v < tol) {
            return Err(Error::nonsmooth("zero singular value"));
        }
        let g = symmetric::gradient(self.f.as_ref(), s)?;
        Ok(d.reassemble(&g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric::Catalog;

    fn cat(s: &str) -> Catalog {
        s.parse().unwrap()
    }

    #[test]
    fn rejects_non_absolutely_symmetric() {
        for s in ["max", "orthant", "neg_log", "trace", "box:0,1", "sum_k_largest:1"] {
            assert!(
                matches!(SingularFunction::new(cat(s), 2, 3), Err(Error::Capability(_))),
                "{s}"
            );
        }
        for s in ["l1:1", "quadratic", "max_abs", "box:-1,1", "sum_k_largest_abs:2"] {
            assert!(SingularFunction::new(cat(s), 2, 3).is_ok(), "{s}");
        }
    }

    #[derive(Debug)]
    struct Liar;

    impl SymmetricFunction for Liar {
        fn name(&self) -> String {
            "liar".into()
        }
        fn capabilities(&self) -> symmetric::Capabilities {
            symmetric::Capabilities {
                absolutely_symmetric: true,
                ..Default::default()
            }
        }
        fn value(&self, x: &[f64]) -> f64 {
            x.iter().sum()
        }
    }

    #[test]
    fn probes_catch_a_false_flag() {
        assert!(matches!(SingularFunction::new(Liar, 3, 3), Err(Error::Capability(_))));
    }

    #[test]
    fn value_examples() {
        let nuc = SingularFunction::new(cat("l1:1"), 2, 2).unwrap();
        let x = Matrix::diag_rect(2, 2, &[2.0, -3.0]);
        assert!((nuc.value(&x).unwrap() - 5.0).abs() < 1e-15);
        let op = SingularFunction::new(Catalog::Max.on_magnitudes(), 3, 2).unwrap();
        assert_eq!(op.value(&Matrix::zeros(3, 2)).unwrap(), 0.0);
        assert!(matches!(nuc.value(&Matrix::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn svt_on_diagonal_input() {
        let nuc = SingularFunction::new(cat("l1:1"), 2, 2).unwrap();
        let p = nuc.prox(&Matrix::diag_rect(2, 2, &[3.0, 0.5]), 1.0).unwrap();
        assert!(p.point.sub(&Matrix::diag_rect(2, 2, &[2.0, 0.0])).max_abs() < 1e-15);
        assert!((p.envelope_value - 2.625).abs() < 1e-15);
    }

    #[test]
    fn zero_function_prox_is_identity() {
        let zero = SingularFunction::new(cat("l1:0"), 3, 4).unwrap();
        let x = Matrix::from_fn(3, 4, |i, j| (i as f64 - 1.0) * (j as f64 + 0.5).sin());
        let p = zero.prox(&x, 2.0).unwrap();
        assert!(p.point.sub(&x).max_abs() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let q = SingularFunction::new(Catalog::Quadratic, 3, 2).unwrap();
        let x = Matrix::from_fn(3, 2, |i, j| 1.0 + i as f64 * 2.0 - j as f64 * 0.7 + (i * j) as f64);
        assert!(q.gradient(&x).unwrap().sub(&x).max_abs() < 1e-12);

        let nuc = SingularFunction::new(cat("l1:1"), 2, 2).unwrap();
        let g = nuc.gradient(&Matrix::diag_rect(2, 2, &[3.0, 1.0])).unwrap();
        assert!(g.sub(&Matrix::identity(2)).max_abs() < 1e-15);

        assert!(matches!(
            nuc.gradient(&Matrix::diag_rect(2, 2, &[1.0, 1.0])),
            Err(Error::Nonsmooth(_))
        ));
        assert!(matches!(
            nuc.gradient(&Matrix::diag_rect(2, 2, &[1.0, 0.0])),
            Err(Error::Nonsmooth(_))
        ));
    }
}
