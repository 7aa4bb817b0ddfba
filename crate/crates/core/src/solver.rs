//! Small proximal-gradient solvers for `loss(X) + w·R(X)` where `R` is a
//! spectral or singular-value function.
//!
//! Both catalog losses have a 1-Lipschitz gradient, so the default step is 1
//! and there is no line search; traces are deterministic.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::singular::SingularFunction;
use crate::spectral::SpectralFunction;
use crate::symmetric::{Catalog, SymmetricFunction};

/// Lipschitz constant of the gradient of both catalog losses.
pub const LOSS_LIPSCHITZ: f64 = 1.0;

/// Slack allowed in the monotone-objective invariant.
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum Loss {
    /// `½|X − M|²`
    FrobeniusDenoise { target: Matrix },
    /// `½|P_Ω(X − D)|²`; `mask` holds 1 on observed entries and 0 elsewhere.
    MaskedCompletion { mask: Matrix, data: Matrix },
}

impl Loss {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Loss::FrobeniusDenoise { target } => target.shape(),
            Loss::MaskedCompletion { data, .. } => data.shape(),
        }
    }

    pub fn value(&self, x: &Matrix) -> f64 {
        0.5 * self.gradient(x).frobenius_norm().powi(2)
    }

    pub fn gradient(&self, x: &Matrix) -> Matrix {
        match self {
            Loss::FrobeniusDenoise { target } => x.sub(target),
            Loss::MaskedCompletion { mask, data } => Matrix::from_fn(x.rows(), x.cols(), |i, j| {
                mask.get(i, j) * (x.get(i, j) - data.get(i, j))
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Loss::MaskedCompletion { mask, data } = self {
            if mask.shape() != data.shape() {
                return Err(Error::dim("mask and data differ in shape"));
            }
            if mask.data().iter().any(|&m| m != 0.0 && m != 1.0) {
                return Err(Error::input("mask entries must be 0 or 1"));
            }
        }
        Ok(())
    }

    fn is_symmetric(&self) -> bool {
        let sym = |m: &Matrix| SymMatrix::from_matrix(m.clone()).is_ok();
        match self {
            Loss::FrobeniusDenoise { target } => sym(target),
            Loss::MaskedCompletion { mask, data } => sym(mask) && sym(data),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Regularizer {
    Spectral(SpectralFunction),
    Singular(SingularFunction),
}

impl Regularizer {
    pub fn symmetric(&self) -> &dyn SymmetricFunction {
        match self {
            Regularizer::Spectral(f) => f.symmetric(),
            Regularizer::Singular(f) => f.symmetric(),
        }
    }

    fn as_sym(x: &Matrix) -> Result<SymMatrix> {
        SymMatrix::from_matrix(x.clone())
    }

    pub fn value(&self, x: &Matrix) -> Result<f64> {
        match self {
            Regularizer::Spectral(f) => f.value(&Self::as_sym(x)?),
            Regularizer::Singular(f) => f.value(x),
        }
    }

    pub fn prox(&self, x: &Matrix, alpha: f64) -> Result<Matrix> {
        match self {
            Regularizer::Spectral(f) => Ok(f.prox(&Self::as_sym(x)?, alpha)?.point.into_matrix()),
            Regularizer::Singular(f) => Ok(f.prox(x, alpha)?.point),
        }
    }

    pub fn envelope(&self, x: &Matrix, alpha: f64) -> Result<f64> {
        match self {
            Regularizer::Spectral(f) => f.envelope(&Self::as_sym(x)?, alpha),
            Regularizer::Singular(f) => f.envelope(x, alpha),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub loss: Loss,
    pub regularizer: Regularizer,
    pub weight: f64,
    /// Fixed step, at most `1/L`.
    pub step: f64,
    pub max_iters: usize,
    /// Stop once `|X_{k+1} − X_k|_F ≤ tol`.
    pub tol: f64,
}

impl ProblemSpec {
    /// Step `1/L`, 10 000 iterations, tolerance `1e-12`.
    pub fn new(loss: Loss, regularizer: Regularizer, weight: f64) -> Result<Self> {
        let p = ProblemSpec {
            loss,
            regularizer,
            weight,
            step: 1.0 / LOSS_LIPSCHITZ,
            max_iters: 10_000,
            tol: 1e-12,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        if !(self.weight >= 0.0) || !self.weight.is_finite() {
            return Err(Error::input(format!(
                "weight must be finite and nonnegative, got {}",
                self.weight
            )));
        }
        if !(self.step > 0.0) || self.step > 1.0 / LOSS_LIPSCHITZ {
            return Err(Error::input(format!(
                "step must lie in (0, 1/L] = (0, {}], got {}",
                1.0 / LOSS_LIPSCHITZ,
                self.step
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::input("tolerance must be nonnegative"));
        }
        if self.max_iters == 0 {
            return Err(Error::input("max_iters must be positive"));
        }
        if !self.regularizer.symmetric().capabilities().has_prox {
            return Err(Error::capability(format!(
                "regularizer {} has no proximal map",
                self.regularizer.symmetric().name()
            )));
        }
        match &self.regularizer {
            Regularizer::Spectral(_) => {
                let (m, n) = self.loss.shape();
                if m != n || !self.loss.is_symmetric() {
                    return Err(Error::input(
                        "a spectral regularizer needs symmetric loss data (and a symmetric mask)",
                    ));
                }
            }
            Regularizer::Singular(f) => {
                if f.shape() != self.loss.shape() {
                    return Err(Error::dim(format!(
                        "regularizer acts on {:?} matrices, loss data is {:?}",
                        f.shape(),
                        self.loss.shape()
                    )));
                }
            }
        }
        Ok(())
    }

    /// `loss(X) + w·R(X)`; a zero weight ignores `R` entirely.
    pub fn objective(&self, x: &Matrix) -> Result<f64> {
        let reg = if self.weight == 0.0 {
            0.0
        } else {
            self.weight * self.regularizer.value(x)?
        };
        Ok(self.loss.value(x) + reg)
    }

    /// `loss(X) + w·R_α(X)`.
    pub fn smoothed_objective(&self, x: &Matrix, alpha: f64) -> Result<f64> {
        let reg = if self.weight == 0.0 {
            0.0
        } else {
            self.weight * self.regularizer.envelope(x, alpha)?
        };
        Ok(self.loss.value(x) + reg)
    }

    fn check_start(&self, x0: &Matrix) -> Result<()> {
        if x0.shape() != self.loss.shape() {
            return Err(Error::dim(format!(
                "start point is {}x{}, problem is {:?}",
                x0.rows(),
                x0.cols(),
                self.loss.shape()
            )));
        }
        if !x0.is_finite() {
            return Err(Error::input("start point has non-finite entries"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveTrace {
    /// Objective after each iteration.
    pub objectives: Vec<f64>,
    /// `|X_{k+1} − X_k|_F` for each iteration.
    pub residuals: Vec<f64>,
    pub final_point: Matrix,
    pub iterations: usize,
    pub converged: bool,
}

impl SolveTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// One `iteration,objective,residual` line per iteration.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,objective,residual\n");
        for (k, (o, r)) in self.objectives.iter().zip(&self.residuals).enumerate() {
            let _ = writeln!(out, "{},{:.16e},{:.16e}", k + 1, o, r);
        }
        out
    }

    pub fn final_objective(&self) -> f64 {
        self.objectives.last().copied().unwrap_or(f64::NAN)
    }
}

fn finite_objective(v: f64, k: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Divergence(format!("objective is {v} at iteration {k}")))
    }
}

/// `X_{k+1} = P_{t·w}R(X_k − t∇loss(X_k))`.
pub fn prox_gradient_solve(p: &ProblemSpec, x0: &Matrix) -> Result<SolveTrace> {
    p.validate()?;
    p.check_start(x0)?;
    let mut x = x0.clone();
    let mut trace = SolveTrace {
        objectives: Vec::new(),
        residuals: Vec::new(),
        final_point: x0.clone(),
        iterations: 0,
        converged: false,
    };
    for k in 1..=p.max_iters {
        let forward = x.sub(&p.loss.gradient(&x).scale(p.step));
        let next = if p.weight == 0.0 {
            forward
        } else {
            p.regularizer.prox(&forward, p.step * p.weight)?
        };
        let residual = next.sub(&x).frobenius_norm();
        let obj = finite_objective(p.objective(&next)?, k)?;
        x = next;
        trace.objectives.push(obj);
        trace.residuals.push(residual);
        trace.iterations = k;
        if residual <= p.tol {
            trace.converged = true;
            break;
        }
    }
    trace.final_point = x;
    Ok(trace)
}

/// Gradient descent on `loss + w·R_α` with
/// `∇(w·R_α)(X) = w(X − P_α R(X))/α` and step `min(t, 1/(L + w/α))`.
/// Objectives in the trace are the smoothed ones.
pub fn envelope_smoothing_solve(p: &ProblemSpec, x0: &Matrix, alpha: f64) -> Result<SolveTrace> {
    p.validate()?;
    p.check_start(x0)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::input(format!("alpha must be positive, got {alpha}")));
    }
    if !p.regularizer.symmetric().capabilities().convex {
        return Err(Error::capability(format!(
            "envelope smoothing needs a convex regularizer, {} is not",
            p.regularizer.symmetric().name()
        )));
    }
    let step = p.step.min(1.0 / (LOSS_LIPSCHITZ + p.weight / alpha));
    let mut x = x0.clone();
    let mut trace = SolveTrace {
        objectives: Vec::new(),
        residuals: Vec::new(),
        final_point: x0.clone(),
        iterations: 0,
        converged: false,
    };
    for k in 1..=p.max_iters {
        let mut grad = p.loss.gradient(&x);
        if p.weight != 0.0 {
            let px = p.regularizer.prox(&x, alpha)?;
            grad = grad.add(&x.sub(&px).scale(p.weight / alpha));
        }
        let next = x.sub(&grad.scale(step));
        let residual = next.sub(&x).frobenius_norm();
        let obj = finite_objective(p.smoothed_objective(&next, alpha)?, k)?;
        x = next;
        trace.objectives.push(obj);
        trace.residuals.push(residual);
        trace.iterations = k;
        if residual <= p.tol {
            trace.converged = true;
            break;
        }
    }
    trace.final_point = x;
    Ok(trace)
}

/// `|X − P_{t·w}R(X − t∇loss(X))|_F`, zero exactly at minimizers of convex
/// instances.
pub fn fixed_point_residual(p: &ProblemSpec, x: &Matrix) -> Result<f64> {
    let forward = x.sub(&p.loss.gradient(x).scale(p.step));
    let next = if p.weight == 0.0 {
        forward
    } else {
        p.regularizer.prox(&forward, p.step * p.weight)?
    };
    Ok(next.sub(x).frobenius_norm())
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossConfig {
    FrobeniusDenoise { target: Matrix },
    MaskedCompletion { mask: Matrix, data: Matrix },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lift {
    #[default]
    Spectral,
    Singular,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerConfig {
    /// Catalog grammar, e.g. `"l1:tau=1"`.
    #[serde(rename = "fn")]
    pub function: String,
    #[serde(default)]
    pub lift: Lift,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    ProxGradient,
    EnvelopeSmoothing { alpha: f64 },
}

/// JSON problem description:
///
/// ```json
/// {
///   "loss": {"kind": "frobenius_denoise", "target": {"rows": 2, "cols": 2, "data": [3, 0, 0, -1]}},
///   "regularizer": {"fn": "l1:tau=1", "lift": "spectral", "weight": 2},
///   "method": {"kind": "prox_gradient"},
///   "max_iters": 500,
///   "tol": 1e-12
/// }
/// ```
///
/// `regularizer.lift` defaults to `spectral`, `method` to prox-gradient,
/// `step` to `1/L`, and `x0` to the zero matrix.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub loss: LossConfig,
    pub regularizer: RegularizerConfig,
    #[serde(default)]
    pub method: Option<MethodConfig>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub x0: Option<Matrix>,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("problem config: {e}")))
    }

    pub fn build(&self) -> Result<(ProblemSpec, Matrix, MethodConfig)> {
        let loss = match &self.loss {
            LossConfig::FrobeniusDenoise { target } => Loss::FrobeniusDenoise { target: target.clone() },
            LossConfig::MaskedCompletion { mask, data } => Loss::MaskedCompletion {
                mask: mask.clone(),
                data: data.clone(),
            },
        };
        let f: Catalog = self.regularizer.function.parse()?;
        let (m, n) = loss.shape();
        let regularizer = match self.regularizer.lift {
            Lift::Spectral => Regularizer::Spectral(SpectralFunction::new(f)),
            Lift::Singular => Regularizer::Singular(SingularFunction::from_arc(Arc::new(f), m, n)?),
        };
        let mut p = ProblemSpec::new(loss, regularizer, self.regularizer.weight)?;
        if let Some(step) = self.step {
            p.step = step;
        }
        if let Some(k) = self.max_iters {
            p.max_iters = k;
        }
        if let Some(tol) = self.tol {
            p.tol = tol;
        }
        p.validate()?;
        let x0 = self.x0.clone().unwrap_or_else(|| Matrix::zeros(m, n));
        Ok((p, x0, self.method.clone().unwrap_or(MethodConfig::ProxGradient)))
    }

    /// Builds the problem and runs the configured method.
    pub fn solve(&self) -> Result<SolveTrace> {
        let (p, x0, method) = self.build()?;
        match method {
            MethodConfig::ProxGradient => prox_gradient_solve(&p, &x0),
            MethodConfig::EnvelopeSmoothing { alpha } => envelope_smoothing_solve(&p, &x0, alpha),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(r: usize, c: usize, d: &[f64]) -> Matrix {
        Matrix::new(r, c, d.to_vec()).unwrap()
    }

    fn spectral(s: &str) -> Regularizer {
        Regularizer::Spectral(SpectralFunction::new(s.parse::<Catalog>().unwrap()))
    }

    fn denoise(target: Matrix, reg: Regularizer, w: f64) -> ProblemSpec {
        ProblemSpec::new(Loss::FrobeniusDenoise { target }, reg, w).unwrap()
    }

    fn assert_monotone(t: &SolveTrace) {
        for w in t.objectives.windows(2) {
            assert!(w[1] <= w[0] + MONOTONE_SLACK, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn nuclear_denoise_is_one_prox_step() {
        let p = denoise(mat(2, 2, &[3.0, 0.0, 0.0, -1.0]), spectral("l1:1"), 2.0);
        let t = prox_gradient_solve(&p, &Matrix::zeros(2, 2)).unwrap();
        assert!(t.converged);
        assert!(t.final_point.sub(&mat(2, 2, &[1.0, 0.0, 0.0, 0.0])).max_abs() < 1e-6);
        assert!(t.iterations <= 2);
        assert!((t.final_objective() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn nearest_psd() {
        let p = denoise(mat(2, 2, &[0.0, 2.0, 2.0, 0.0]), spectral("orthant"), 1.0);
        let t = prox_gradient_solve(&p, &Matrix::zeros(2, 2)).unwrap();
        assert!(t.final_point.sub(&mat(2, 2, &[1.0, 1.0, 1.0, 1.0])).max_abs() < 1e-12);
        assert!(fixed_point_residual(&p, &t.final_point).unwrap() <= p.tol);
    }

    #[test]
    fn zero_weight_returns_target() {
        let target = mat(2, 2, &[0.3, -1.0, -1.0, 2.0]);
        let p = denoise(target.clone(), spectral("l1:1"), 0.0);
        let t = prox_gradient_solve(&p, &Matrix::identity(2)).unwrap();
        assert_eq!(t.final_point, target);
    }

    #[test]
    fn smoothing_approaches_the_nonsmooth_optimum() {
        let mut p = denoise(mat(2, 2, &[3.0, 0.0, 0.0, -1.0]), spectral("l1:1"), 2.0);
        p.max_iters = 200_000;
        let exact = prox_gradient_solve(&p, &Matrix::zeros(2, 2)).unwrap().final_objective();
        let mut prev_gap = f64::INFINITY;
        for alpha in [1e-1, 1e-2, 1e-3] {
            let t = envelope_smoothing_solve(&p, &Matrix::zeros(2, 2), alpha).unwrap();
            assert!(t.converged, "alpha {alpha}");
            assert_monotone(&t);
            let gap = p.objective(&t.final_point).unwrap() - exact;
            assert!(gap >= -1e-12 && gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap <= 1e-3, "{prev_gap}");
    }

    #[test]
    fn smoothing_with_zero_function_is_gradient_descent() {
        let target = mat(2, 2, &[1.0, 2.0, 2.0, -3.0]);
        let mut p = denoise(target.clone(), spectral("l1:0"), 1.0);
        p.step = 0.5;
        let t = envelope_smoothing_solve(&p, &Matrix::zeros(2, 2), 1.0).unwrap();
        // X_{k} = (1 − 2^{-k}) M for step 1/2 on ½|X − M|²
        let first = t.objectives[0];
        assert!((first - 0.5 * target.scale(0.5).frobenius_norm().powi(2)).abs() < 1e-14);
        assert!(t.final_point.sub(&target).max_abs() < 1e-11);
    }

    #[test]
    fn psd_smoothing_objective_is_distance() {
        let target = mat(2, 2, &[0.0, 2.0, 2.0, 0.0]);
        let p = denoise(target, spectral("orthant"), 1.0);
        let x = mat(2, 2, &[0.5, -1.0, -1.0, 0.0]);
        let xs = SymMatrix::from_matrix(x.clone()).unwrap();
        let proj = SpectralFunction::new(Catalog::Orthant).prox(&xs, 1.0).unwrap().point;
        let expected = p.loss.value(&x) + 0.5 * xs.sub(&proj).frobenius_norm().powi(2);
        assert!((p.smoothed_objective(&x, 1.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn monotone_on_singular_denoise() {
        let target = Matrix::from_fn(3, 4, |i, j| ((i * 4 + j) as f64).sin() * 2.0);
        let reg = Regularizer::Singular(SingularFunction::new("l1:1".parse::<Catalog>().unwrap(), 3, 4).unwrap());
        let mut p = denoise(target, reg, 0.7);
        p.step = 0.3;
        let t = prox_gradient_solve(&p, &Matrix::zeros(3, 4)).unwrap();
        assert!(t.converged);
        assert_monotone(&t);
    }

    #[test]
    fn rejects_bad_problems() {
        let t = mat(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let base = Loss::FrobeniusDenoise { target: t.clone() };
        assert!(matches!(
            ProblemSpec::new(base.clone(), spectral("l1:1"), -1.0),
            Err(Error::Input(_))
        ));
        let mut p = ProblemSpec::new(base.clone(), spectral("l1:1"), 1.0).unwrap();
        p.step = 1.5;
        assert!(matches!(p.validate(), Err(Error::Input(_))));
        assert!(matches!(
            ProblemSpec::new(base.clone(), spectral("kth_largest:1"), 1.0),
            Err(Error::Capability(_))
        ));
        let rect = Loss::FrobeniusDenoise {
            target: Matrix::zeros(2, 3),
        };
        assert!(matches!(
            ProblemSpec::new(rect, spectral("l1:1"), 1.0),
            Err(Error::Input(_))
        ));
        let p = ProblemSpec::new(base, spectral("max"), 1.0).unwrap();
        assert!(matches!(
            envelope_smoothing_solve(&p, &Matrix::zeros(3, 3), 1.0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn divergence_is_reported() {
        // the first iterate is 5e299, whose squared distance overflows
        let p = denoise(mat(1, 1, &[1e300]), spectral("quadratic"), 1.0);
        let r = prox_gradient_solve(&p, &Matrix::zeros(1, 1));
        assert!(matches!(r, Err(Error::Divergence(_))));
    }

    #[test]
    fn config_round_trip() {
        let cfg = ProblemConfig::from_json(
            r#"{
                "loss": {"kind": "frobenius_denoise", "target": {"rows": 2, "cols": 2, "data": [3, 0, 0, -1]}},
                "regularizer": {"fn": "l1:tau=1", "weight": 2},
                "max_iters": 50
            }"#,
        )
        .unwrap();
        let t = cfg.solve().unwrap();
        assert!(t.final_point.sub(&mat(2, 2, &[1.0, 0.0, 0.0, 0.0])).max_abs() < 1e-12);
        let csv = t.to_csv();
        assert!(csv.starts_with("iteration,objective,residual\n1,"));
        let json: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(json["final_point"]["rows"], 2);

        assert!(matches!(ProblemConfig::from_json("{}"), Err(Error::Input(_))));
        let bad = r#"{"loss": {"kind": "frobenius_denoise", "target": {"rows": 2, "cols": 2, "data": [1]}},
                      "regularizer": {"fn": "l1", "weight": 1}}"#;
        assert!(matches!(ProblemConfig::from_json(bad), Err(Error::Input(_))));
    }
}
