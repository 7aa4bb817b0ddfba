//! Executable checks for subgradients, the eigenvalue trace inequality, and
//! independent numerical oracles (finite differences, brute-force prox).
//!
//! Subgradient membership is decided from the curve
//! `φ(α) = f_α(x + αv)`. It always satisfies `φ(α) ≤ f(x) + α|v|²/2`;
//! equality at some `α > 0` certifies a proximal subgradient, and a one-sided
//! slope `φ'(0+) = |v|²/2` certifies a Fréchet subgradient.
//!
//! The oracles here are test infrastructure. Production code paths never call
//! them.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, Matrix, SymMatrix};
use crate::sample;
use crate::singular::SingularFunction;
use crate::spectral::SpectralFunction;
use crate::symmetric::{self, SymmetricFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `φ(α) = f(x) + α|v|²/2` holds on a tail of the grid.
    ProximalMember,
    /// The slope limit equals `|v|²/2` but the proximal line fails.
    FrechetMember,
    /// The slope limit settles strictly below `|v|²/2`.
    Rejected,
    Inconclusive,
}

impl Verdict {
    /// Proximal subgradients are Fréchet subgradients.
    pub fn is_frechet(self) -> bool {
        matches!(self, Verdict::ProximalMember | Verdict::FrechetMember)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeConfig {
    /// Tolerance on `|(φ(α) − f(x))/α − |v|²/2|`, relative to `1 + |f(x)|`.
    pub line_tol: f64,
    /// Tolerance on the extrapolated slope.
    pub slope_tol: f64,
}

impl Default for SlopeConfig {
    fn default() -> Self {
        SlopeConfig {
            line_tol: 1e-8,
            slope_tol: 1e-4,
        }
    }
}

/// `α₀·2⁻ᵏ` for `k = 0..=12`, `α₀ = 1`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=12).map(|k| 0.5f64.powi(k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeReport {
    pub alpha_grid: Vec<f64>,
    pub phi_values: Vec<f64>,
    pub f_at_x: f64,
    /// `|v|²/2`, the slope a subgradient must attain.
    pub target_slope: f64,
    /// Difference quotients `(φ(α) − f(x))/α`.
    pub quotients: Vec<f64>,
    /// First-order Richardson extrapolants of the quotients.
    pub extrapolated: Vec<f64>,
    /// Second-order extrapolant at the smallest `α`.
    pub limit_estimate: f64,
    pub limit_uncertainty: f64,
    /// Largest grid `α` from which the proximal line holds for all smaller
    /// grid values (at least two of them).
    pub proximal_alpha: Option<f64>,
    /// `max_α (φ(α) − f(x))/α − |v|²/2`; nonpositive up to rounding.
    pub upper_bound_excess: f64,
    pub verdict: Verdict,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::input("alpha grid needs at least three values"));
    }
    if grid.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::input("alpha grid values must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::input("alpha grid must be strictly decreasing"));
    }
    Ok(())
}

fn classify(f_at_x: f64, target_slope: f64, grid: &[f64], phi_values: Vec<f64>, cfg: &SlopeConfig) -> SlopeReport {
    let quotients: Vec<f64> = grid
        .iter()
        .zip(&phi_values)
        .map(|(&a, &phi)| (phi - f_at_x) / a)
        .collect();

    // φ(α) = f(x) + α|v|²/2, checked as a quotient so that curves touching
    // the line to high order in α are not mistaken for it
    let line_tol = cfg.line_tol * (1.0 + f_at_x.abs());
    let on_line: Vec<bool> = quotients.iter().map(|q| (q - target_slope).abs() <= line_tol).collect();
    let proximal_alpha = on_line
        .iter()
        .position(|&b| b)
        .filter(|&first| first + 1 < on_line.len() && on_line[first..].iter().all(|&b| b))
        .map(|first| grid[first]);

    let upper_bound_excess = quotients
        .iter()
        .map(|q| q - target_slope)
        .fold(f64::NEG_INFINITY, f64::max);

    // Neville table in α → 0: first level removes the O(α) term, second the O(α²)
    let level = |prev: &[f64], j: usize| -> Vec<f64> {
        (1..prev.len())
            .map(|i| {
                let k = i + j - 1;
                let (far, near) = (grid[k - j], grid[k]);
                prev[i] + (prev[i] - prev[i - 1]) * near / (far - near)
            })
            .collect()
    };
    let extrapolated = level(&quotients, 1);
    let second = level(&extrapolated, 2);
    let limit_estimate = *second.last().expect("grid has at least three values");
    let uncertainty = if second.len() >= 2 {
        (second[second.len() - 1] - second[second.len() - 2])
            .abs()
            .max((extrapolated[extrapolated.len() - 1] - limit_estimate).abs())
    } else {
        (extrapolated[extrapolated.len() - 1] - limit_estimate).abs()
    };

    let verdict = if proximal_alpha.is_some() {
        Verdict::ProximalMember
    } else if !limit_estimate.is_finite() || !uncertainty.is_finite() {
        Verdict::Inconclusive
    } else if uncertainty <= cfg.slope_tol && (limit_estimate - target_slope).abs() <= cfg.slope_tol {
        Verdict::FrechetMember
    } else if limit_estimate + uncertainty < target_slope - cfg.slope_tol {
        Verdict::Rejected
    } else {
        Verdict::Inconclusive
    };

    SlopeReport {
        alpha_grid: grid.to_vec(),
        phi_values,
        f_at_x,
        target_slope,
        quotients,
        extrapolated,
        limit_estimate,
        limit_uncertainty: uncertainty,
        proximal_alpha,
        upper_bound_excess,
        verdict,
    }
}

/// Tests `v ∈ ∂f(x)` through the envelope curve `φ(α) = f_α(x + αv)`.
pub fn subgradient_test(
    f: &dyn SymmetricFunction,
    x: &[f64],
    v: &[f64],
    alpha_grid: &[f64],
    cfg: &SlopeConfig,
) -> Result<SlopeReport> {
    check_grid(alpha_grid)?;
    if x.len() != v.len() {
        return Err(Error::dim(format!(
            "point has {} coordinates, direction has {}",
            x.len(),
            v.len()
        )));
    }
    if !f.capabilities().has_prox {
        return Err(Error::capability(format!(
            "envelope of {} is unavailable (no proximal map)",
            f.name()
        )));
    }
    let fx = f.value(x);
    if !fx.is_finite() {
        return Err(Error::input(format!("f(x) must be finite, got {fx}")));
    }
    let phi = alpha_grid
        .iter()
        .map(|&a| {
            let shifted: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| xi + a * vi).collect();
            symmetric::envelope(f, &shifted, a)
        })
        .collect::<Result<Vec<_>>>()?;
    let target = 0.5 * v.iter().map(|c| c * c).sum::<f64>();
    Ok(classify(fx, target, alpha_grid, phi, cfg))
}

/// Matrix version: `φ(α) = (f∘λ)_α(X + αV)` evaluated on matrices.
pub fn lifted_subgradient_test(
    big_f: &SpectralFunction,
    x: &SymMatrix,
    v: &SymMatrix,
    alpha_grid: &[f64],
    cfg: &SlopeConfig,
) -> Result<SlopeReport> {
    check_grid(alpha_grid)?;
    if x.dim() != v.dim() {
        return Err(Error::dim(format!(
            "matrix is {0}x{0}, direction is {1}x{1}",
            x.dim(),
            v.dim()
        )));
    }
    if !big_f.symmetric().capabilities().has_prox {
        return Err(Error::capability(format!(
            "envelope of {} is unavailable (no proximal map)",
            big_f.symmetric().name()
        )));
    }
    let fx = big_f.value(x)?;
    if !fx.is_finite() {
        return Err(Error::input(format!("F(X) must be finite, got {fx}")));
    }
    let phi = alpha_grid
        .iter()
        .map(|&a| big_f.envelope(&x.axpy(a, v), a))
        .collect::<Result<Vec<_>>>()?;
    let target = 0.5 * v.frobenius_norm().powi(2);
    Ok(classify(fx, target, alpha_grid, phi, cfg))
}

/// Runs the vector test on `(λ(X), v)` and the matrix test on
/// `(X, U Diag(v) Uᵀ)`.
pub fn lifted_pair_test(
    big_f: &SpectralFunction,
    x: &SymMatrix,
    v: &[f64],
    alpha_grid: &[f64],
    cfg: &SlopeConfig,
) -> Result<(SlopeReport, SlopeReport)> {
    let lambda = eig_sym(x)?.lambda;
    let vec_report = subgradient_test(big_f.symmetric(), &lambda, v, alpha_grid, cfg)?;
    let lifted = big_f.subgradient_lift(x, v)?;
    let mat_report = lifted_subgradient_test(big_f, x, &lifted, alpha_grid, cfg)?;
    Ok((vec_report, mat_report))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    /// `|λ(X) − λ(Y)|`
    pub lhs: f64,
    /// `|X − Y|_F`
    pub rhs: f64,
    pub gap: f64,
    pub equality: bool,
    /// `U` with `UᵀXU`, `UᵀYU` diagonal and both diagonals nonincreasing.
    pub joint_diagonalizer: Option<Matrix>,
}

/// Compares `|λ(X) − λ(Y)|` against `|X − Y|` and, in the equality case,
/// recovers a simultaneous ordered diagonalizer.
pub fn trace_inequality(x: &SymMatrix, y: &SymMatrix) -> Result<TraceReport> {
    if x.dim() != y.dim() {
        return Err(Error::dim(format!(
            "matrices are {0}x{0} and {1}x{1}",
            x.dim(),
            y.dim()
        )));
    }
    let ex = eig_sym(x)?;
    let ly = eig_sym(y)?.lambda;
    let lhs = ex
        .lambda
        .iter()
        .zip(&ly)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let rhs = x.sub(y).frobenius_norm();
    let gap = rhs - lhs;
    let mut equality = gap <= 1e-8 * (1.0 + rhs);
    let joint_diagonalizer = if equality {
        ordered_joint_diagonalizer(x, y, &ex.u, &ex.lambda)?
    } else {
        None
    };
    if joint_diagonalizer.is_none() {
        equality = false;
    }
    Ok(TraceReport {
        lhs,
        rhs,
        gap,
        equality,
        joint_diagonalizer,
    })
}

/// Diagonalizes `X`, then diagonalizes `Y` inside each eigenspace of `X`.
/// Returns `None` unless the result diagonalizes both with nonincreasing
/// diagonals.
fn ordered_joint_diagonalizer(x: &SymMatrix, y: &SymMatrix, u: &Matrix, lambda: &[f64]) -> Result<Option<Matrix>> {
    let n = x.dim();
    let cluster_tol = 1e-8 * (1.0 + x.frobenius_norm());
    let mut w = u.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && lambda[end - 1] - lambda[end] <= cluster_tol {
            end += 1;
        }
        let k = end - start;
        if k > 1 {
            let block = Matrix::from_fn(n, k, |i, j| u.get(i, start + j));
            let inner = block.transpose().matmul(y.as_matrix()).matmul(&block);
            let q = eig_sym(&SymMatrix::symmetrized(inner))?.u;
            let rotated = block.matmul(&q);
            for i in 0..n {
                for j in 0..k {
                    w.set(i, start + j, rotated.get(i, j));
                }
            }
        }
        start = end;
    }
    let wt = w.transpose();
    let dx = wt.matmul(x.as_matrix()).matmul(&w);
    let dy = wt.matmul(y.as_matrix()).matmul(&w);
    let tol_x = 1e-8 * (1.0 + x.frobenius_norm());
    let tol_y = 1e-8 * (1.0 + y.frobenius_norm());
    let diagonal = dx.off_diagonal_norm() <= tol_x && dy.off_diagonal_norm() <= tol_y;
    let sorted =
        (1..n).all(|i| dx.get(i - 1, i - 1) >= dx.get(i, i) - tol_x && dy.get(i - 1, i - 1) >= dy.get(i, i) - tol_y);
    Ok(if diagonal && sorted { Some(w) } else { None })
}

/// A finite-difference estimate with a Richardson error estimate
/// `|D(h) − D(2h)|/3`.
#[derive(Clone, Debug, PartialEq)]
pub struct FdEstimate<T> {
    pub value: T,
    pub step: f64,
    pub error_estimate: f64,
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::input(format!("{what} is not finite at a perturbed point")))
    }
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::input(format!("step must be positive, got {step}")));
    }
    Ok(())
}

fn fd_gradient_once(big_f: &SpectralFunction, x: &SymMatrix, h: f64) -> Result<Matrix> {
    let n = x.dim();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut e = Matrix::zeros(n, n);
            e.set(i, j, 1.0);
            e.set(j, i, 1.0);
            let e = SymMatrix::symmetrized(e);
            let plus = finite(big_f.value(&x.axpy(h, &e))?, "value")?;
            let minus = finite(big_f.value(&x.axpy(-h, &e))?, "value")?;
            // d/dt F(X + tE) = ⟨∇F, E⟩ = 2∇F_ij off the diagonal
            let d = if i == j {
                (plus - minus) / (2.0 * h)
            } else {
                (plus - minus) / (4.0 * h)
            };
            g.set(i, j, d);
            g.set(j, i, d);
        }
    }
    Ok(g)
}

/// Central differences of `F` over the symmetric coordinate basis.
pub fn fd_gradient(big_f: &SpectralFunction, x: &SymMatrix, step: f64) -> Result<FdEstimate<SymMatrix>> {
    check_step(step)?;
    let g1 = fd_gradient_once(big_f, x, step)?;
    let g2 = fd_gradient_once(big_f, x, 2.0 * step)?;
    Ok(FdEstimate {
        error_estimate: g1.sub(&g2).max_abs() / 3.0,
        value: SymMatrix::symmetrized(g1),
        step,
    })
}

fn fd_hessian_once(big_f: &SpectralFunction, x: &SymMatrix, b: &SymMatrix, h: f64) -> Result<SymMatrix> {
    let gp = big_f.gradient(&x.axpy(h, b))?;
    let gm = big_f.gradient(&x.axpy(-h, b))?;
    Ok(gp.sub(&gm).scale(0.5 / h))
}

/// Central differences of the lifted gradient along `B`.
pub fn fd_hessian_apply(
    big_f: &SpectralFunction,
    x: &SymMatrix,
    b: &SymMatrix,
    step: f64,
) -> Result<FdEstimate<SymMatrix>> {
    check_step(step)?;
    if b.dim() != x.dim() {
        return Err(Error::dim("direction and matrix differ in size"));
    }
    let h1 = fd_hessian_once(big_f, x, b, step)?;
    let h2 = fd_hessian_once(big_f, x, b, 2.0 * step)?;
    Ok(FdEstimate {
        error_estimate: h1.sub(&h2).as_matrix().max_abs() / 3.0,
        value: h1,
        step,
    })
}

/// Entrywise central differences of a singular-value function.
pub fn fd_gradient_rect(g: &SingularFunction, x: &Matrix, step: f64) -> Result<FdEstimate<Matrix>> {
    check_step(step)?;
    let once = |h: f64| -> Result<Matrix> {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp.set(i, j, x.get(i, j) + h);
                xm.set(i, j, x.get(i, j) - h);
                let d = finite(g.value(&xp)?, "value")? - finite(g.value(&xm)?, "value")?;
                out.set(i, j, d / (2.0 * h));
            }
        }
        Ok(out)
    };
    let g1 = once(step)?;
    let g2 = once(2.0 * step)?;
    Ok(FdEstimate {
        error_estimate: g1.sub(&g2).max_abs() / 3.0,
        value: g1,
        step,
    })
}

/// Result of a brute-force proximal computation.
#[derive(Clone, Debug, PartialEq)]
pub struct BruteProx<T> {
    pub point: T,
    pub objective: f64,
    pub evaluations: usize,
}

struct Budget {
    used: usize,
    limit: usize,
}

impl Budget {
    fn spend(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(Error::Convergence {
                what: format!("brute-force prox: evaluation budget of {} exhausted", self.limit),
                residual: f64::NAN,
            });
        }
        Ok(())
    }
}

/// Starts in [`brute_prox_mat`]: the tied point, `X` itself, a random spectrum.
const BRUTE_STARTS: usize = 3;

/// Relative objective gain below which a search counts as stalled.
const GAIN_TOL: f64 = 1e-13;
const MAX_CYCLES: usize = 400;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn eval_at(obj: &dyn Fn(&[f64]) -> f64, p: &[f64], d: &[f64], t: f64) -> f64 {
    let q: Vec<f64> = p.iter().zip(d).map(|(a, b)| a + t * b).collect();
    let v = obj(&q);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `t ↦ obj(p + t·d)` by expanding a bracket from `±step`, then
/// golden section. Returns the best `(t, value)` seen, `t = 0` included.
fn line_min(
    obj: &dyn Fn(&[f64]) -> f64,
    p: &[f64],
    fp: f64,
    d: &[f64],
    step: f64,
    budget: &mut Budget,
) -> Result<(f64, f64)> {
    let mut best = (0.0, fp);
    let mut eval = |t: f64, best: &mut (f64, f64)| -> Result<f64> {
        budget.spend()?;
        let v = eval_at(obj, p, d, t);
        if v < best.1 {
            *best = (t, v);
        }
        Ok(v)
    };
    let gp = eval(step, &mut best)?;
    let gm = eval(-step, &mut best)?;
    let (mut a, mut b) = (-step, step);
    if gp < fp || gm < fp {
        let sign = if gp <= gm { 1.0 } else { -1.0 };
        let (mut prev, mut t, mut gt) = (0.0, step, gp.min(gm));
        for _ in 0..60 {
            let g2 = eval(sign * 2.0 * t, &mut best)?;
            if g2 >= gt {
                break;
            }
            prev = t;
            t *= 2.0;
            gt = g2;
        }
        (a, b) = if sign > 0.0 { (prev, 2.0 * t) } else { (-2.0 * t, -prev) };
    }
    let width = 1e-6 * (b - a);
    let mut c = b - INV_PHI * (b - a);
    let mut e = a + INV_PHI * (b - a);
    let mut gc = eval(c, &mut best)?;
    let mut ge = eval(e, &mut best)?;
    while b - a > width {
        if gc < ge || (gc == ge && gc.is_infinite()) {
            b = e;
            e = c;
            ge = gc;
            c = b - INV_PHI * (b - a);
            gc = eval(c, &mut best)?;
        } else {
            a = c;
            c = e;
            gc = ge;
            e = a + INV_PHI * (b - a);
            ge = eval(e, &mut best)?;
        }
    }
    Ok(best)
}

/// Cyclic line minimization along `fixed` directions and `n_random` fresh
/// random directions per cycle. Stops after two cycles without a relative
/// gain above [`GAIN_TOL`], or after [`MAX_CYCLES`].
#[allow(clippy::too_many_arguments)]
fn pattern_search<R: Rng + ?Sized>(
    obj: &dyn Fn(&[f64]) -> f64,
    p0: Vec<f64>,
    fixed: &[(Vec<f64>, f64)],
    n_random: usize,
    random_step: f64,
    budget: &mut Budget,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    let dim = p0.len();
    let mut p = p0;
    budget.spend()?;
    let mut fp = obj(&p);
    let mut steps: Vec<f64> = fixed
        .iter()
        .map(|(_, s)| *s)
        .chain(std::iter::repeat_n(random_step, n_random))
        .collect();
    let floor: Vec<f64> = steps.iter().map(|s| 1e-13 * s).collect();
    let mut quiet = 0;
    for _ in 0..MAX_CYCLES {
        if quiet == 2 {
            break;
        }
        let start = fp;
        let random: Vec<Vec<f64>> = (0..n_random)
            .map(|_| {
                let mut d = sample::vector(rng, dim);
                let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
                d.iter_mut().for_each(|c| *c /= norm);
                d
            })
            .collect();
        let dirs = fixed.iter().map(|(d, _)| d).chain(random.iter());
        for (k, d) in dirs.enumerate() {
            let (t, v) = line_min(obj, &p, fp, d, steps[k], budget)?;
            if v < fp {
                p.iter_mut().zip(d).for_each(|(a, b)| *a += t * b);
                fp = v;
                steps[k] = (2.0 * t.abs()).max(floor[k]);
            } else {
                steps[k] = (0.5 * steps[k]).max(floor[k]);
            }
        }
        if start - fp <= GAIN_TOL * (1.0 + fp.abs()) {
            quiet += 1;
        } else {
            quiet = 0;
        }
    }
    Ok((p, fp))
}

/// Unit vectors with entries in `{−1, 0, 1}` (first nonzero entry `+1`).
/// Every manifold of the form `{yᵢ = ±yⱼ, yᵢ = c}` has a tangent space
/// spanned by such vectors. Above four coordinates only the pairs and `𝟙`
/// are kept.
fn signed_generators(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if n <= 4 {
        let total = 3usize.pow(n as u32);
        for code in 1..total {
            let mut c = code;
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    let digit = c % 3;
                    c /= 3;
                    [0.0, 1.0, -1.0][digit]
                })
                .collect();
            if v.iter().find(|x| **x != 0.0) == Some(&1.0) {
                out.push(v);
            }
        }
    } else {
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            out.push(e);
            for j in (i + 1)..n {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    e[j] = s;
                    out.push(e);
                }
            }
        }
        out.push(vec![1.0; n]);
    }
    for v in &mut out {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= norm);
    }
    out
}

/// The `t` on a coarse scan minimizing `obj(t·𝟙)`; a convex permutation-invariant
/// domain always meets the diagonal.
fn best_diagonal(obj: &dyn Fn(f64) -> f64, scale: f64) -> Option<f64> {
    (-64..=64)
        .map(|k| scale * k as f64 / 16.0)
        .map(|t| (t, obj(t)))
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t, _)| t)
}

/// Minimizes `f(y) + |y − x|²/(2α)` over `R^n` without using `f`'s proximal map.
pub fn brute_prox_vec<R: Rng + ?Sized>(
    f: &dyn SymmetricFunction,
    x: &[f64],
    alpha: f64,
    budget: usize,
    rng: &mut R,
) -> Result<BruteProx<Vec<f64>>> {
    if !(alpha > 0.0) {
        return Err(Error::input("alpha must be positive"));
    }
    let n = x.len();
    let obj = |y: &[f64]| f.value(y) + y.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (2.0 * alpha);
    let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())) + alpha;
    let fixed: Vec<(Vec<f64>, f64)> = signed_generators(n).into_iter().map(|d| (d, scale)).collect();
    let mut starts = Vec::new();
    if let Some(t) = best_diagonal(&|t| obj(&vec![t; n]), scale) {
        starts.push(vec![t; n]);
    }
    if obj(x).is_finite() {
        starts.push(x.to_vec());
    }
    let mut b = Budget { used: 0, limit: budget };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in starts {
        let (p, v) = pattern_search(&obj, s, &fixed, n, scale, &mut b, rng)?;
        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
            best = Some((p, v));
        }
    }
    let (point, objective) =
        best.ok_or_else(|| Error::input("brute-force prox found no start with a finite objective"))?;
    Ok(BruteProx {
        point,
        objective,
        evaluations: b.used,
    })
}

/// `q0 · Π_{i<j} G_ij(θ_ij)` with plane rotations `G_ij`.
fn givens_product(q0: &Matrix, theta: &[f64]) -> Matrix {
    let n = q0.rows();
    let mut q = q0.clone();
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let (s, c) = theta[k].sin_cos();
            for r in 0..n {
                let (a, b) = (q.get(r, i), q.get(r, j));
                q.set(r, i, c * a - s * b);
                q.set(r, j, s * a + c * b);
            }
            k += 1;
        }
    }
    q
}

/// Isometric coordinates on symmetric matrices: diagonal entries, then
/// `√2·Y_ij` for `i < j`.
fn sym_to_coords(y: &SymMatrix) -> Vec<f64> {
    let n = y.dim();
    let mut c: Vec<f64> = (0..n).map(|i| y.get(i, i)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            c.push(std::f64::consts::SQRT_2 * y.get(i, j));
        }
    }
    c
}

fn coords_to_sym(c: &[f64], n: usize) -> SymMatrix {
    let mut m = Matrix::zeros(n, n);
    let mut k = n;
    for i in 0..n {
        m.set(i, i, c[i]);
        for j in (i + 1)..n {
            let v = c[k] / std::f64::consts::SQRT_2;
            m.set(i, j, v);
            m.set(j, i, v);
            k += 1;
        }
    }
    SymMatrix::symmetrized(m)
}

fn sort_desc(y: &[f64]) -> Vec<f64> {
    let mut s = y.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Columns of `q` reordered so that they match `y` sorted in decreasing order.
fn sorted_frame(q: &Matrix, y: &[f64]) -> Matrix {
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&a, &b| y[b].total_cmp(&y[a]));
    Matrix::from_fn(q.rows(), q.cols(), |i, j| q.get(i, idx[j]))
}

/// Replaces the basis of each cluster of (nearly) equal eigenvalues by a
/// random one. The matrix is unchanged but a stalled search gets new
/// coordinate directions.
fn randomize_within_clusters<R: Rng + ?Sized>(u: &Matrix, lambda: &[f64], rng: &mut R) -> Matrix {
    let n = lambda.len();
    let tol = 1e-9 * (1.0 + lambda.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut out = u.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && lambda[end - 1] - lambda[end] <= tol {
            end += 1;
        }
        let k = end - start;
        if k > 1 {
            let r = sample::orthogonal(rng, k);
            for i in 0..n {
                for j in 0..k {
                    let v: f64 = (0..k).map(|l| u.get(i, start + l) * r.get(l, j)).sum();
                    out.set(i, start + j, v);
                }
            }
        }
        start = end;
    }
    out
}

/// Minimizes `F(Y) + |Y − X|²/(2α)` over all symmetric `Y`, for `n ≤ 4`.
///
/// Two searches alternate. One runs over `Y = Q Diag(y) Qᵀ` with `Q` a
/// product of plane rotations applied to the current frame; there every tie
/// or zero manifold of `F` is flat in `y`, so iterates can slide along kinks.
/// The other searches the entries of `Y` directly, where the problem is
/// convex, which escapes the spurious stationary points of the first
/// parameterization. Every reported objective is attained by the returned
/// point, so the result can only overestimate the minimum.
pub fn brute_prox_mat<R: Rng + ?Sized>(
    big_f: &SpectralFunction,
    x: &SymMatrix,
    alpha: f64,
    budget: usize,
    rng: &mut R,
) -> Result<BruteProx<SymMatrix>> {
    if !(alpha > 0.0) {
        return Err(Error::input("alpha must be positive"));
    }
    let n = x.dim();
    let m = n * (n - 1) / 2;
    let objective_at =
        |y: &SymMatrix| big_f.value(y).unwrap_or(f64::INFINITY) + y.sub(x).frobenius_norm().powi(2) / (2.0 * alpha);
    let f = big_f.symmetric();
    let obj_at_spectrum = |y: &[f64], q: &Matrix| {
        f.value(y) + crate::linalg::reassemble(q, y).sub(x).frobenius_norm().powi(2) / (2.0 * alpha)
    };
    let scale = 1.0 + x.frobenius_norm() + alpha;
    let mut spectral_dirs: Vec<(Vec<f64>, f64)> = signed_generators(n)
        .into_iter()
        .map(|mut d| {
            d.resize(n + m, 0.0);
            (d, scale)
        })
        .collect();
    for k in 0..m {
        let mut d = vec![0.0; n + m];
        d[n + k] = 1.0;
        spectral_dirs.push((d, 0.5));
    }
    let entry_dirs: Vec<(Vec<f64>, f64)> = (0..n + m)
        .map(|k| {
            let mut d = vec![0.0; n + m];
            d[k] = 1.0;
            (d, scale)
        })
        .collect();

    let mut b = Budget { used: 0, limit: budget };
    let t0 = best_diagonal(&|t| objective_at(&SymMatrix::identity(n).scale(t)), scale)
        .ok_or_else(|| Error::input("brute-force prox found no start with a finite objective"))?;
    let mut overall: Option<(Matrix, Vec<f64>, f64)> = None;
    for start in 0..BRUTE_STARTS {
        // starts: the tied point t0·𝟙, Y = X itself, a random spectrum
        let (mut q0, mut y) = match start {
            0 => (sample::orthogonal(rng, n), vec![t0; n]),
            1 if objective_at(x).is_finite() => {
                let e = eig_sym(x)?;
                (e.u, e.lambda)
            }
            _ => {
                // shrink toward the tied point until the start is feasible
                let d = sample::vector(rng, n);
                let mut r = 0.5 * scale;
                let mut y: Vec<f64> = d.iter().map(|v| t0 + r * v).collect();
                while !f.value(&y).is_finite() && r > 1e-6 * scale {
                    r *= 0.5;
                    y = d.iter().map(|v| t0 + r * v).collect();
                }
                if !f.value(&y).is_finite() {
                    y = vec![t0; n];
                }
                (sample::orthogonal(rng, n), y)
            }
        };
        let mut fy = f64::INFINITY;
        let mut quiet = 0;
        for _ in 0..60 {
            // F(Q Diag(y) Qᵀ) = f(y) by definition, without eigen-solve rounding
            let obj = |p: &[f64]| {
                let y = crate::linalg::reassemble(&givens_product(&q0, &p[n..]), &p[..n]);
                f.value(&p[..n]) + y.sub(x).frobenius_norm().powi(2) / (2.0 * alpha)
            };
            let mut p0 = y.clone();
            p0.resize(n + m, 0.0);
            let (p, v) = pattern_search(&obj, p0, &spectral_dirs, n + m, 1.0, &mut b, rng)?;
            q0 = givens_product(&q0, &p[n..]);
            y = p[..n].to_vec();
            let current = crate::linalg::reassemble(&q0, &y);
            let (mut gain, mut best) = (fy - v, v);

            let direct = |c: &[f64]| objective_at(&coords_to_sym(c, n));
            let (c, v) = pattern_search(&direct, sym_to_coords(&current), &entry_dirs, n + m, scale, &mut b, rng)?;
            let e = eig_sym(&coords_to_sym(&c, n))?;
            let v_spectral = obj_at_spectrum(&e.lambda, &e.u);
            if v < best && v_spectral.is_finite() {
                gain = gain.max(fy - v_spectral);
                best = v_spectral;
                y = e.lambda.clone();
                q0 = e.u;
            }
            let lambda_now = sort_desc(&y);
            q0 = randomize_within_clusters(&sorted_frame(&q0, &y), &lambda_now, rng);
            y = lambda_now;
            fy = best;
            if gain <= GAIN_TOL * (1.0 + v.abs()) {
                quiet += 1;
                if quiet == 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if overall.as_ref().is_none_or(|o| fy < o.2) {
            overall = Some((q0, y, fy));
        }
    }
    let (q0, y, fy) = overall.expect("at least one start");
    Ok(BruteProx {
        point: crate::linalg::reassemble(&q0, &y),
        objective: fy,
        evaluations: b.used,
    })
}

/// Replaces `U[:, S]` by `U[:, S] R` for a random orthogonal `R`.
fn rotate_columns(u: &mut Matrix, cols: &[usize], r: &Matrix) {
    let snapshot = u.clone();
    for i in 0..u.rows() {
        for (j, &cj) in cols.iter().enumerate() {
            let v: f64 = cols
                .iter()
                .enumerate()
                .map(|(l, &cl)| snapshot.get(i, cl) * r.get(l, j))
                .sum();
            u.set(i, cj, v);
        }
    }
}

/// Normalizes a factorization `P Diag_rect(s) Qᵀ` to `s ≥ 0` nonincreasing,
/// then re-randomizes the frames inside every cluster of tied values. The
/// product is unchanged.
fn refresh_rect_frames<R: Rng + ?Sized>(p: &Matrix, q: &Matrix, s: &[f64], rng: &mut R) -> (Matrix, Matrix, Vec<f64>) {
    let (m, n, k) = (p.rows(), q.rows(), s.len());
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| s[b].abs().total_cmp(&s[a].abs()));
    let mut pp = p.clone();
    let mut qq = q.clone();
    for (j, &i) in idx.iter().enumerate() {
        let sign = if s[i] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..m {
            pp.set(r, j, sign * p.get(r, i));
        }
        for r in 0..n {
            qq.set(r, j, q.get(r, i));
        }
    }
    let sv: Vec<f64> = idx.iter().map(|&i| s[i].abs()).collect();
    let tol = 1e-9 * (1.0 + sv.first().copied().unwrap_or(0.0));
    let mut start = 0;
    while start < k && sv[start] > tol {
        let mut end = start + 1;
        while end < k && sv[end - 1] - sv[end] <= tol && sv[end] > tol {
            end += 1;
        }
        if end - start > 1 {
            let cols: Vec<usize> = (start..end).collect();
            let r = sample::orthogonal(rng, cols.len());
            rotate_columns(&mut pp, &cols, &r);
            rotate_columns(&mut qq, &cols, &r);
        }
        start = end;
    }
    // zero values: the left and right null frames rotate independently
    let left: Vec<usize> = (start..m).collect();
    let right: Vec<usize> = (start..n).collect();
    if left.len() > 1 {
        let r = sample::orthogonal(rng, left.len());
        rotate_columns(&mut pp, &left, &r);
    }
    if right.len() > 1 {
        let r = sample::orthogonal(rng, right.len());
        rotate_columns(&mut qq, &right, &r);
    }
    (pp, qq, sv)
}

/// Minimizes `F(Y) + |Y − X|²/(2α)` over `m × n` matrices for a singular
/// lift, with the same alternation as [`brute_prox_mat`]: a search over
/// `Y = P Diag_rect(s) Qᵀ` (plane rotations on both frames, `F = f(s)`
/// evaluated directly) and a direct search over the entries.
pub fn brute_prox_rect<R: Rng + ?Sized>(
    big_f: &SingularFunction,
    x: &Matrix,
    alpha: f64,
    budget: usize,
    rng: &mut R,
) -> Result<BruteProx<Matrix>> {
    if !(alpha > 0.0) {
        return Err(Error::input("alpha must be positive"));
    }
    let (m, n) = x.shape();
    if (m, n) != big_f.shape() {
        return Err(Error::dim(format!(
            "brute-force prox: input is {m}x{n}, function expects {}x{}",
            big_f.shape().0,
            big_f.shape().1
        )));
    }
    let k = m.min(n);
    let (am, an) = (m * (m - 1) / 2, n * (n - 1) / 2);
    let dim = k + am + an;
    let f = big_f.symmetric();
    let objective_at =
        |y: &Matrix| big_f.value(y).unwrap_or(f64::INFINITY) + y.sub(x).frobenius_norm().powi(2) / (2.0 * alpha);
    let assemble = |p: &Matrix, q: &Matrix, s: &[f64]| {
        let mut ps = Matrix::zeros(m, n);
        for i in 0..m {
            for (j, &sj) in s.iter().enumerate() {
                ps.set(i, j, p.get(i, j) * sj);
            }
        }
        ps.matmul(&q.transpose())
    };
    let scale = 1.0 + x.frobenius_norm() + alpha;
    let mut spectral_dirs: Vec<(Vec<f64>, f64)> = signed_generators(k)
        .into_iter()
        .map(|mut d| {
            d.resize(dim, 0.0);
            (d, scale)
        })
        .collect();
    for j in k..dim {
        let mut d = vec![0.0; dim];
        d[j] = 1.0;
        spectral_dirs.push((d, 0.5));
    }
    let entry_dirs: Vec<(Vec<f64>, f64)> = (0..m * n)
        .map(|j| {
            let mut d = vec![0.0; m * n];
            d[j] = 1.0;
            (d, scale)
        })
        .collect();

    let mut b = Budget { used: 0, limit: budget };
    let mut overall: Option<(Matrix, f64)> = None;
    for start in 0..BRUTE_STARTS {
        let (mut p0, mut q0, mut s) = match start {
            0 => (sample::orthogonal(rng, m), sample::orthogonal(rng, n), vec![0.0; k]),
            1 => {
                let d = crate::linalg::svd(x)?;
                (d.u, d.v, d.sigma)
            }
            _ => {
                let s = sample::vector(rng, k).iter().map(|v| 0.5 * scale * v.abs()).collect();
                (sample::orthogonal(rng, m), sample::orthogonal(rng, n), s)
            }
        };
        if !f.value(&s).is_finite() {
            continue;
        }
        let mut fy = f64::INFINITY;
        let mut quiet = 0;
        for _ in 0..60 {
            let obj = |c: &[f64]| {
                let p = givens_product(&p0, &c[k..k + am]);
                let q = givens_product(&q0, &c[k + am..]);
                f.value(&c[..k]) + assemble(&p, &q, &c[..k]).sub(x).frobenius_norm().powi(2) / (2.0 * alpha)
            };
            let mut c0 = s.clone();
            c0.resize(dim, 0.0);
            let (c, v) = pattern_search(&obj, c0, &spectral_dirs, dim, 1.0, &mut b, rng)?;
            p0 = givens_product(&p0, &c[k..k + am]);
            q0 = givens_product(&q0, &c[k + am..]);
            s = c[..k].to_vec();
            let (mut gain, mut best) = (fy - v, v);

            let current = assemble(&p0, &q0, &s);
            let direct = |e: &[f64]| objective_at(&Matrix::from_fn(m, n, |i, j| e[i * n + j]));
            let entries: Vec<f64> = (0..m * n).map(|j| current.get(j / n, j % n)).collect();
            let (e, v_direct) = pattern_search(&direct, entries, &entry_dirs, m * n, scale, &mut b, rng)?;
            if v_direct < best {
                let d = crate::linalg::svd(&Matrix::from_fn(m, n, |i, j| e[i * n + j]))?;
                let v_spectral =
                    f.value(&d.sigma) + assemble(&d.u, &d.v, &d.sigma).sub(x).frobenius_norm().powi(2) / (2.0 * alpha);
                if v_spectral.is_finite() {
                    gain = gain.max(fy - v_spectral);
                    best = v_spectral;
                    (p0, q0, s) = (d.u, d.v, d.sigma);
                }
            }
            (p0, q0, s) = refresh_rect_frames(&p0, &q0, &s, rng);
            fy = best;
            if gain <= GAIN_TOL * (1.0 + best.abs()) {
                quiet += 1;
                if quiet == 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if overall.as_ref().is_none_or(|o| fy < o.1) {
            overall = Some((assemble(&p0, &q0, &s), fy));
        }
    }
    let (point, objective) =
        overall.ok_or_else(|| Error::input("brute-force prox found no start with a finite objective"))?;
    Ok(BruteProx {
        point,
        objective,
        evaluations: b.used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag_embed;
    use crate::symmetric::{Capabilities, Catalog};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cat(s: &str) -> Catalog {
        s.parse().unwrap()
    }

    fn sym(n: usize, d: &[f64]) -> SymMatrix {
        SymMatrix::new(n, d.to_vec()).unwrap()
    }

    fn cfg() -> SlopeConfig {
        SlopeConfig::default()
    }

    #[test]
    fn quadratic_at_origin_is_proximal() {
        let r = subgradient_test(
            &Catalog::Quadratic,
            &[0.0, 0.0],
            &[0.0, 0.0],
            &default_alpha_grid(),
            &cfg(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::ProximalMember);
        assert!(r.phi_values.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn absolute_value_envelope_slopes() {
        let abs = cat("l1:1");
        // |v| ≤ 1: φ(α) = α v²/2 exactly
        let r = subgradient_test(&abs, &[0.0], &[0.5], &default_alpha_grid(), &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::ProximalMember);
        for (a, phi) in r.alpha_grid.iter().zip(&r.phi_values) {
            assert!((phi - 0.125 * a).abs() < 1e-16);
        }
        assert_eq!(r.proximal_alpha, Some(1.0));

        // v = 2: φ(α) = 2α − α/2, slope 1.5 < 2
        let r = subgradient_test(&abs, &[0.0], &[2.0], &default_alpha_grid(), &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Rejected);
        assert!((r.limit_estimate - 1.5).abs() < 1e-12);
        assert!(r.upper_bound_excess <= 1e-10);
    }

    #[test]
    fn proximal_line_persists_below_the_first_passing_alpha() {
        // f = |x| at x = 1 with v = 1: x ∈ P_α f(x + α) for every α
        let abs = cat("l1:1");
        let r = subgradient_test(&abs, &[1.0], &[1.0], &default_alpha_grid(), &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::ProximalMember);
        // f = |x| at x = 0.25, v = 1 and the grid starting at 1: the shifted
        // point 0.25 + α stays positive, so the line holds everywhere
        let r = subgradient_test(&abs, &[0.25], &[1.0], &default_alpha_grid(), &cfg()).unwrap();
        assert_eq!(r.proximal_alpha, Some(1.0));
    }

    /// `f(x) = −Σ|xᵢ|^{3/2}`: at 0 the zero vector is a Fréchet subgradient but
    /// not a proximal one.
    #[derive(Debug)]
    struct NegPow;

    impl SymmetricFunction for NegPow {
        fn name(&self) -> String {
            "neg_pow".into()
        }
        fn capabilities(&self) -> Capabilities {
            Capabilities {
                has_prox: true,
                absolutely_symmetric: true,
                ..Default::default()
            }
        }
        fn value(&self, x: &[f64]) -> f64 {
            -x.iter().map(|v| v.abs().powf(1.5)).sum::<f64>()
        }
        fn prox_point(&self, x: &[f64], alpha: f64) -> Result<Vec<f64>> {
            // per coordinate: minimize −|y|^{3/2} + (y − x)²/(2α) over y with
            // the sign of x, by golden section on the magnitude
            Ok(x.iter()
                .map(|&xi| {
                    let g = |t: f64| -t.powf(1.5) + (t - xi.abs()).powi(2) / (2.0 * alpha);
                    let (mut a, mut b) = (0.0, xi.abs() + 4.0 * alpha + 1.0);
                    for _ in 0..200 {
                        let c = b - INV_PHI * (b - a);
                        let d = a + INV_PHI * (b - a);
                        if g(c) < g(d) {
                            b = d;
                        } else {
                            a = c;
                        }
                    }
                    let t = 0.5 * (a + b);
                    if xi < 0.0 {
                        -t
                    } else {
                        t
                    }
                })
                .collect())
        }
    }

    #[test]
    fn frechet_but_not_proximal() {
        let r = subgradient_test(&NegPow, &[0.0], &[0.0], &default_alpha_grid(), &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::FrechetMember, "{r:?}");
        assert!(r.proximal_alpha.is_none());
    }

    #[test]
    fn bad_inputs() {
        let g = default_alpha_grid();
        assert!(matches!(
            subgradient_test(&Catalog::NegLog, &[-1.0], &[0.0], &g, &cfg()),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            subgradient_test(&cat("kth_largest:1"), &[1.0], &[0.0], &g, &cfg()),
            Err(Error::Capability(_))
        ));
        assert!(matches!(
            subgradient_test(&Catalog::Quadratic, &[1.0], &[0.0], &[1.0, 2.0, 0.5], &cfg()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn lifted_gradient_is_a_subgradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = sample::with_spectrum(&mut rng, &[2.0, 1.0, 0.5]);
        let f = SpectralFunction::new(Catalog::NegLog);
        let g = f.gradient(&x).unwrap();
        let r = lifted_subgradient_test(&f, &x, &g, &default_alpha_grid(), &cfg()).unwrap();
        assert!(r.verdict.is_frechet(), "{r:?}");

        let shifted = g.add(&SymMatrix::identity(3).scale(3.0));
        let r = lifted_subgradient_test(&f, &x, &shifted, &default_alpha_grid(), &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Rejected, "{r:?}");
    }

    #[test]
    fn lifted_and_vector_verdicts_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = SpectralFunction::new(cat("l1:1"));
        let x = sample::with_spectrum(&mut rng, &[1.5, 0.0, -2.0]);
        for v in [[1.0, 0.3, -1.0], [1.0, 2.0, -1.0], [0.0, 0.0, 0.0]] {
            let (a, b) = lifted_pair_test(&f, &x, &v, &default_alpha_grid(), &cfg()).unwrap();
            assert_eq!(a.verdict, b.verdict, "{v:?}");
        }
    }

    #[test]
    fn trace_examples() {
        let r = trace_inequality(&diag_embed(&[1.0, 0.0]).unwrap(), &diag_embed(&[0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!((r.rhs - 2f64.sqrt()).abs() < 1e-15);
        assert!(!r.equality && r.joint_diagonalizer.is_none());

        let r = trace_inequality(&diag_embed(&[2.0, 1.0]).unwrap(), &diag_embed(&[1.0, 0.0]).unwrap()).unwrap();
        assert!(r.equality);
        assert_eq!(r.joint_diagonalizer.unwrap(), Matrix::identity(2));

        let r = trace_inequality(&sym(2, &[0.0, 1.0, 1.0, 0.0]), &SymMatrix::identity(2)).unwrap();
        assert!(r.equality);
        assert!((r.lhs - 2.0).abs() < 1e-14 && (r.rhs - 2.0).abs() < 1e-14);

        assert!(matches!(
            trace_inequality(&SymMatrix::identity(2), &SymMatrix::identity(3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn joint_diagonalizer_inside_repeated_eigenspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = sample::orthogonal(&mut rng, 3);
        let x = crate::linalg::reassemble(&q, &[2.0, 2.0, -1.0]);
        let y = crate::linalg::reassemble(&q, &[3.0, 1.0, 0.0]);
        let r = trace_inequality(&x, &y).unwrap();
        assert!(r.equality);
        let w = r.joint_diagonalizer.unwrap();
        let dy = w.transpose().matmul(y.as_matrix()).matmul(&w);
        assert!(dy.off_diagonal_norm() < 1e-10);
    }

    #[test]
    fn fd_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = sample::symmetric(&mut rng, 3);
        let tr = SpectralFunction::new(Catalog::Trace);
        let g = fd_gradient(&tr, &x, 1e-4).unwrap();
        assert!(g.value.sub(&SymMatrix::identity(3)).as_matrix().max_abs() < 1e-9);

        let q = SpectralFunction::new(Catalog::Quadratic);
        let b = sample::symmetric(&mut rng, 3);
        let h = fd_hessian_apply(&q, &x, &b, 1e-4).unwrap();
        assert!(h.value.sub(&b).as_matrix().max_abs() < 1e-6);
    }

    #[test]
    fn brute_prox_psd_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = SpectralFunction::new(Catalog::Orthant);
        let x = sym(2, &[0.0, 2.0, 2.0, 0.0]);
        let r = brute_prox_mat(&f, &x, 1.0, 200_000, &mut rng).unwrap();
        assert!(
            r.point.sub(&sym(2, &[1.0, 1.0, 1.0, 1.0])).as_matrix().max_abs() < 1e-4,
            "{r:?}"
        );
        assert!((r.objective - 2.0).abs() < 1e-6);
    }

    #[test]
    fn brute_prox_vec_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for f in [cat("l1:0.5"), Catalog::Max, Catalog::NegLog, cat("box:-1,0.5")] {
            let x = [0.7, -1.2, 0.1];
            let exact = symmetric::prox(&f, &x, 0.8).unwrap();
            let r = brute_prox_vec(&f, &x, 0.8, 200_000, &mut rng).unwrap();
            assert!(
                (r.objective - exact.envelope_value).abs() < 1e-8,
                "{f}: {r:?} vs {exact:?}"
            );
        }
    }

    #[test]
    fn brute_prox_reports_budget_exhaustion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = brute_prox_vec(&Catalog::Quadratic, &[1.0, 2.0], 1.0, 50, &mut rng);
        assert!(matches!(r, Err(Error::Convergence { .. })));
    }
}
