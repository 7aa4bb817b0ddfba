//! Permutation-invariant functions on `R^n` and their proximal maps.
//!
//! [`SymmetricFunction`] is the behavioral interface consumed by the spectral
//! and singular-value lifts. [`Catalog`] provides the concrete instances with
//! closed-form or one-dimensional-solvable proximal maps.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dist2, Matrix};

/// Relative gap below which two coordinates count as tied when deciding
/// whether a gradient is unique.
pub const TIE_TOL: f64 = 1e-8;

/// Relative slack for membership in the domain of an indicator. Eigenvalues
/// of a projected matrix come back from the eigensolver with rounding noise,
/// so an exact test would report `+inf` for points that are feasible.
pub const FEAS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Capabilities {
    pub has_gradient: bool,
    pub has_hessian: bool,
    pub has_prox: bool,
    pub absolutely_symmetric: bool,
    pub convex: bool,
}

/// A function `f: R^n -> R ∪ {+inf}` with `f(πx) = f(x)` for every
/// coordinate permutation `π`.
///
/// Only `value` is mandatory. The other evaluations return
/// [`Error::Capability`] unless the implementation advertises them in
/// [`capabilities`](SymmetricFunction::capabilities).
pub trait SymmetricFunction: fmt::Debug + Send + Sync {
    fn name(&self) -> String;

    fn capabilities(&self) -> Capabilities;

    /// Rejects dimensions the parameters cannot accommodate (e.g. `k > n`).
    fn check_dim(&self, _n: usize) -> Result<()> {
        Ok(())
    }

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Result<Vec<f64>> {
        Err(Error::capability(format!("{} has no gradient", self.name())))
    }

    fn hessian(&self, _x: &[f64]) -> Result<Matrix> {
        Err(Error::capability(format!("{} has no Hessian", self.name())))
    }

    /// One minimizer of `f(y) + |y − x|²/(2α)` for `α > 0`.
    ///
    /// Implementations must map nonincreasing `x` to nonincreasing output so
    /// that lifted proximal points can be reassembled with the diagonalizer
    /// of the input.
    fn prox_point(&self, _x: &[f64], _alpha: f64) -> Result<Vec<f64>> {
        Err(Error::capability(format!("{} has no proximal map", self.name())))
    }
}

/// Proximal point and Moreau envelope value at one `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProxResultVec {
    pub point: Vec<f64>,
    pub envelope_value: f64,
    pub alpha: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::input(format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(())
}

fn check_point(f: &dyn SymmetricFunction, x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::input("point must have at least one coordinate"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("point has non-finite coordinates"));
    }
    f.check_dim(x.len())
}

/// Proximal map with the matching envelope value.
pub fn prox(f: &dyn SymmetricFunction, x: &[f64], alpha: f64) -> Result<ProxResultVec> {
    check_alpha(alpha)?;
    check_point(f, x)?;
    if !f.capabilities().has_prox {
        return Err(Error::capability(format!("{} has no proximal map", f.name())));
    }
    let point = f.prox_point(x, alpha)?;
    if point.len() != x.len() {
        return Err(Error::Contract(format!(
            "prox of {} returned {} coordinates for an input of {}",
            f.name(),
            point.len(),
            x.len()
        )));
    }
    let envelope_value = f.value(&point) + dist2(&point, x).powi(2) / (2.0 * alpha);
    Ok(ProxResultVec {
        point,
        envelope_value,
        alpha,
    })
}

/// Moreau envelope `f_α(x)`, with `f_0 = f`.
pub fn envelope(f: &dyn SymmetricFunction, x: &[f64], alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        check_point(f, x)?;
        return Ok(f.value(x));
    }
    Ok(prox(f, x, alpha)?.envelope_value)
}

pub fn gradient(f: &dyn SymmetricFunction, x: &[f64]) -> Result<Vec<f64>> {
    check_point(f, x)?;
    if !f.capabilities().has_gradient {
        return Err(Error::capability(format!("{} has no gradient", f.name())));
    }
    f.gradient(x)
}

pub fn hessian(f: &dyn SymmetricFunction, x: &[f64]) -> Result<Matrix> {
    check_point(f, x)?;
    if !f.capabilities().has_hessian {
        return Err(Error::capability(format!("{} has no Hessian", f.name())));
    }
    f.hessian(x)
}

/// The built-in function catalog.
#[derive(Clone, Debug, PartialEq)]
pub enum Catalog {
    /// `½|x|²`
    Quadratic,
    /// `τ Σ|xᵢ|`
    ScaledL1 { tau: f64 },
    /// Indicator of `x ≥ 0`.
    Orthant,
    /// Indicator of `[l, u]ⁿ`.
    Box { lower: f64, upper: f64 },
    /// `−Σ log xᵢ`
    NegLog,
    /// `maxᵢ xᵢ`
    Max,
    /// Sum of the `k` largest coordinates.
    SumKLargest { k: usize },
    /// The `k`-th largest coordinate. Nonconvex; no proximal map.
    KthLargest { k: usize },
    /// `Σ xᵢ`
    Trace,
    /// `maxᵢ |xᵢ|`, the absolutely symmetric version of `Max`.
    MaxAbs,
    /// Sum of the `k` largest `|xᵢ|`.
    SumKLargestAbs { k: usize },
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn tie_bound(x: &[f64]) -> f64 {
    TIE_TOL * (1.0 + max_abs(x))
}

/// Indices of `x` in nonincreasing order of value (stable).
fn order_desc(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    idx
}

/// Checks that the `k` largest entries of `vals` are separated from the rest
/// and, for `strict_above`, that the `k`-th is separated from the `(k−1)`-th.
fn separated(vals: &[f64], order: &[usize], k: usize, strict_above: bool, tol: f64) -> bool {
    let n = vals.len();
    let kth = vals[order[k - 1]];
    if k < n && kth - vals[order[k]] < tol {
        return false;
    }
    if strict_above && k > 1 && vals[order[k - 2]] - kth < tol {
        return false;
    }
    true
}

/// Finds the shift `μ` with `Σ clamp(zᵢ − μ, 0, 1) = k` by bisection,
/// then solves the piecewise-linear equation exactly on the final active set.
fn capped_shift(z: &[f64], k: f64, lo: f64, hi: f64) -> f64 {
    let count = |mu: f64| z.iter().map(|&zi| (zi - mu).clamp(0.0, 1.0)).sum::<f64>();
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid) > k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    let (mut free_sum, mut free, mut ones) = (0.0, 0usize, 0usize);
    for &zi in z {
        let t = zi - mu;
        if t >= 1.0 {
            ones += 1;
        } else if t > 0.0 {
            free += 1;
            free_sum += zi;
        }
    }
    if free > 0 {
        let exact = (free_sum + ones as f64 - k) / free as f64;
        // accept only if the active set is unchanged
        let consistent = z.iter().all(|&zi| {
            let a = zi - mu;
            let b = zi - exact;
            (a >= 1.0) == (b >= 1.0) && (a > 0.0) == (b > 0.0)
        });
        if consistent {
            return exact;
        }
    }
    mu
}

/// Enforces `y` nonincreasing along the nonincreasing order of `x`.
/// The exact prox is monotone; rounding at clamp boundaries can break this
/// by an ulp.
fn enforce_monotone(x: &[f64], y: &mut [f64]) {
    let order = order_desc(x);
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        if y[b] > y[a] {
            y[b] = y[a];
        }
    }
}

/// `prox_{α·sum_k}(x) = x − α·Π_C(x/α)` with `C = {0 ≤ w ≤ 1, Σw = k}`.
fn prox_sum_k_largest(x: &[f64], k: usize, alpha: f64) -> Vec<f64> {
    let n = x.len();
    if k == n {
        return x.iter().map(|v| v - alpha).collect();
    }
    let z: Vec<f64> = x.iter().map(|v| v / alpha).collect();
    let zmin = z.iter().copied().fold(f64::INFINITY, f64::min);
    let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mu = capped_shift(&z, k as f64, zmin - 1.0, zmax);
    let mut y: Vec<f64> = x
        .iter()
        .zip(&z)
        .map(|(&xi, &zi)| {
            let t = zi - mu;
            if t >= 1.0 {
                xi - alpha
            } else if t > 0.0 {
                alpha * mu
            } else {
                xi
            }
        })
        .collect();
    enforce_monotone(x, &mut y);
    y
}

/// Prox of the sum of the `k` largest magnitudes via projection onto
/// `{|w|_∞ ≤ 1, |w|_1 ≤ k}`; the shift is bracketed on `[0, max|z|]`.
fn prox_sum_k_largest_abs(x: &[f64], k: usize, alpha: f64) -> Vec<f64> {
    let z: Vec<f64> = x.iter().map(|v| (v / alpha).abs()).collect();
    let total: f64 = z.iter().map(|zi| zi.min(1.0)).sum();
    let mu = if total <= k as f64 {
        0.0
    } else {
        let zmax = z.iter().copied().fold(0.0, f64::max);
        capped_shift(&z, k as f64, 0.0, zmax)
    };
    let mut y: Vec<f64> = x
        .iter()
        .zip(&z)
        .map(|(&xi, &zi)| {
            let t = zi - mu;
            let mag = if t >= 1.0 {
                xi.abs() - alpha
            } else if t > 0.0 {
                alpha * mu
            } else {
                xi.abs()
            };
            mag.max(0.0).copysign(xi)
        })
        .collect();
    enforce_monotone(x, &mut y);
    y
}

fn neg_log_prox(x: f64, alpha: f64) -> f64 {
    // positive root of y² − xy − α = 0, written to avoid cancellation
    let r = (x * x + 4.0 * alpha).sqrt();
    if x >= 0.0 {
        0.5 * (x + r)
    } else {
        2.0 * alpha / (r - x)
    }
}

impl Catalog {
    /// The function catalog accepted by [`FromStr`], with parameter names.
    pub const NAMES: &'static [&'static str] = &[
        "quadratic",
        "l1:tau",
        "orthant",
        "box:l,u",
        "neg_log",
        "max",
        "sum_k_largest:k",
        "kth_largest:k",
        "trace",
        "max_abs",
        "sum_k_largest_abs:k",
    ];

    fn validate(self) -> Result<Self> {
        match &self {
            Catalog::ScaledL1 { tau } if !(tau.is_finite() && *tau >= 0.0) => {
                Err(Error::input(format!("l1 needs tau >= 0, got {tau}")))
            }
            Catalog::Box { lower, upper } if !(lower.is_finite() && upper.is_finite() && lower <= upper) => Err(
                Error::input(format!("box needs finite l <= u, got l={lower}, u={upper}")),
            ),
            Catalog::SumKLargest { k } | Catalog::KthLargest { k } | Catalog::SumKLargestAbs { k } if *k == 0 => {
                Err(Error::input("k must be at least 1"))
            }
            _ => Ok(self),
        }
    }

    pub fn scaled_l1(tau: f64) -> Result<Self> {
        Catalog::ScaledL1 { tau }.validate()
    }

    pub fn boxed(lower: f64, upper: f64) -> Result<Self> {
        Catalog::Box { lower, upper }.validate()
    }

    pub fn sum_k_largest(k: usize) -> Result<Self> {
        Catalog::SumKLargest { k }.validate()
    }

    pub fn kth_largest(k: usize) -> Result<Self> {
        Catalog::KthLargest { k }.validate()
    }

    /// The absolutely symmetric function that agrees with `self` on the
    /// nonnegative orthant, when one exists in the catalog. Used to lift
    /// `max` and `sum_k_largest` through singular values (operator and Ky Fan
    /// norms).
    pub fn on_magnitudes(&self) -> Catalog {
        match self {
            Catalog::Max => Catalog::MaxAbs,
            Catalog::SumKLargest { k } => Catalog::SumKLargestAbs { k: *k },
            other => other.clone(),
        }
    }

    fn k(&self) -> Option<usize> {
        match self {
            Catalog::SumKLargest { k } | Catalog::KthLargest { k } | Catalog::SumKLargestAbs { k } => Some(*k),
            _ => None,
        }
    }

    fn in_box(&self, x: &[f64], lower: f64, upper: f64) -> bool {
        let tol = FEAS_TOL * (1.0 + max_abs(x).max(lower.abs()).max(upper.abs()));
        x.iter().all(|&v| v >= lower - tol && v <= upper + tol)
    }
}

impl fmt::Display for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Catalog::Quadratic => write!(f, "quadratic"),
            Catalog::ScaledL1 { tau } => write!(f, "l1:tau={tau}"),
            Catalog::Orthant => write!(f, "orthant"),
            Catalog::Box { lower, upper } => write!(f, "box:l={lower},u={upper}"),
            Catalog::NegLog => write!(f, "neg_log"),
            Catalog::Max => write!(f, "max"),
            Catalog::SumKLargest { k } => write!(f, "sum_k_largest:k={k}"),
            Catalog::KthLargest { k } => write!(f, "kth_largest:k={k}"),
            Catalog::Trace => write!(f, "trace"),
            Catalog::MaxAbs => write!(f, "max_abs"),
            Catalog::SumKLargestAbs { k } => write!(f, "sum_k_largest_abs:k={k}"),
        }
    }
}

/// Parses `name[:params]` where params are comma-separated and either
/// positional (`box:0,1`) or `key=value` (`box:l=0,u=1`).
impl FromStr for Catalog {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (spec, None),
        };
        let keys: &[&str] = match name {
            "l1" => &["tau"],
            "box" => &["l", "u"],
            "sum_k_largest" | "kth_largest" | "sum_k_largest_abs" => &["k"],
            "quadratic" | "orthant" | "neg_log" | "max" | "trace" | "max_abs" => &[],
            _ => {
                return Err(Error::input(format!(
                    "unknown function '{name}'; expected one of {}",
                    Catalog::NAMES.join(" | ")
                )))
            }
        };
        let mut values: Vec<Option<String>> = vec![None; keys.len()];
        if let Some(rest) = rest {
            for (pos, item) in rest.split(',').enumerate() {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let (slot, raw) = match item.split_once('=') {
                    Some((key, v)) => {
                        let key = key.trim();
                        let key = match (name, key) {
                            ("box", "lower") => "l",
                            ("box", "upper") => "u",
                            _ => key,
                        };
                        let slot = keys
                            .iter()
                            .position(|k| *k == key)
                            .ok_or_else(|| Error::input(format!("function '{name}' has no parameter '{key}'")))?;
                        (slot, v.trim())
                    }
                    None => {
                        if pos >= keys.len() {
                            return Err(Error::input(format!("too many parameters for '{name}'")));
                        }
                        (pos, item)
                    }
                };
                values[slot] = Some(raw.to_string());
            }
        }
        let get_f64 = |i: usize| -> Result<f64> {
            let raw = values[i]
                .as_deref()
                .ok_or_else(|| Error::input(format!("'{name}' needs parameter '{}'", keys[i])))?;
            raw.parse::<f64>()
                .map_err(|_| Error::input(format!("parameter '{}' is not a number: {raw}", keys[i])))
        };
        let get_usize = |i: usize| -> Result<usize> {
            let raw = values[i]
                .as_deref()
                .ok_or_else(|| Error::input(format!("'{name}' needs parameter '{}'", keys[i])))?;
            raw.parse::<usize>()
                .map_err(|_| Error::input(format!("parameter '{}' must be a positive integer: {raw}", keys[i])))
        };
        let f = match name {
            "quadratic" => Catalog::Quadratic,
            "l1" => Catalog::ScaledL1 {
                tau: if values[0].is_some() { get_f64(0)? } else { 1.0 },
            },
            "orthant" => Catalog::Orthant,
            "box" => Catalog::Box {
                lower: get_f64(0)?,
                upper: get_f64(1)?,
            },
            "neg_log" => Catalog::NegLog,
            "max" => Catalog::Max,
            "sum_k_largest" => Catalog::SumKLargest { k: get_usize(0)? },
            "kth_largest" => Catalog::KthLargest { k: get_usize(0)? },
            "trace" => Catalog::Trace,
            "max_abs" => Catalog::MaxAbs,
            "sum_k_largest_abs" => Catalog::SumKLargestAbs { k: get_usize(0)? },
            _ => unreachable!(),
        };
        f.validate()
    }
}

impl SymmetricFunction for Catalog {
    fn name(&self) -> String {
        self.to_string()
    }

    fn capabilities(&self) -> Capabilities {
        let smooth = Capabilities {
            has_gradient: true,
            has_hessian: true,
            has_prox: true,
            absolutely_symmetric: false,
            convex: true,
        };
        match self {
            Catalog::Quadratic | Catalog::ScaledL1 { .. } | Catalog::MaxAbs | Catalog::SumKLargestAbs { .. } => {
                Capabilities {
                    absolutely_symmetric: true,
                    ..smooth
                }
            }
            Catalog::Box { lower, upper } => Capabilities {
                absolutely_symmetric: *lower == -*upper,
                ..smooth
            },
            Catalog::KthLargest { .. } => Capabilities {
                has_prox: false,
                convex: false,
                ..smooth
            },
            Catalog::Orthant | Catalog::NegLog | Catalog::Max | Catalog::SumKLargest { .. } | Catalog::Trace => smooth,
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        match self.k() {
            Some(k) if k > n => Err(Error::input(format!("{self} needs k <= n, got k={k} for n={n}"))),
            _ => Ok(()),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Catalog::Quadratic => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            Catalog::ScaledL1 { tau } => tau * x.iter().map(|v| v.abs()).sum::<f64>(),
            Catalog::Orthant => {
                let tol = FEAS_TOL * (1.0 + max_abs(x));
                if x.iter().all(|&v| v >= -tol) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Catalog::Box { lower, upper } => {
                if self.in_box(x, *lower, *upper) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Catalog::NegLog => {
                if x.iter().all(|&v| v > 0.0) {
                    -x.iter().map(|v| v.ln()).sum::<f64>()
                } else {
                    f64::INFINITY
                }
            }
            Catalog::Max => x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Catalog::MaxAbs => max_abs(x),
            Catalog::SumKLargest { k } => {
                if *k > x.len() {
                    return f64::NAN;
                }
                order_desc(x).iter().take(*k).map(|&i| x[i]).sum()
            }
            Catalog::SumKLargestAbs { k } => {
                if *k > x.len() {
                    return f64::NAN;
                }
                let a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                order_desc(&a).iter().take(*k).map(|&i| a[i]).sum()
            }
            Catalog::KthLargest { k } => {
                if *k > x.len() {
                    return f64::NAN;
                }
                x[order_desc(x)[k - 1]]
            }
            Catalog::Trace => x.iter().sum(),
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        let tol = tie_bound(x);
        match self {
            Catalog::Quadratic => Ok(x.to_vec()),
            Catalog::ScaledL1 { tau } => {
                if *tau == 0.0 {
                    return Ok(vec![0.0; n]);
                }
                if let Some(i) = x.iter().position(|v| v.abs() < tol) {
                    return Err(Error::nonsmooth(format!(
                        "l1 is not differentiable where a coordinate vanishes (x[{i}] = {})",
                        x[i]
                    )));
                }
                Ok(x.iter().map(|v| tau * v.signum()).collect())
            }
            Catalog::Orthant => {
                if x.iter().all(|&v| v > tol) {
                    Ok(vec![0.0; n])
                } else {
                    Err(Error::nonsmooth(
                        "orthant indicator is differentiable only in the open orthant",
                    ))
                }
            }
            Catalog::Box { lower, upper } => {
                if x.iter().all(|&v| v > lower + tol && v < upper - tol) {
                    Ok(vec![0.0; n])
                } else {
                    Err(Error::nonsmooth("box indicator is differentiable only in the open box"))
                }
            }
            Catalog::NegLog => {
                if x.iter().all(|&v| v > 0.0) {
                    Ok(x.iter().map(|v| -1.0 / v).collect())
                } else {
                    Err(Error::nonsmooth(
                        "neg_log is differentiable only on the open positive orthant",
                    ))
                }
            }
            Catalog::Max | Catalog::SumKLargest { .. } | Catalog::KthLargest { .. } => {
                let k = self.k().unwrap_or(1);
                let order = order_desc(x);
                let strict_above = matches!(self, Catalog::KthLargest { .. });
                if !separated(x, &order, k, strict_above, tol) {
                    return Err(Error::nonsmooth(format!(
                        "{self} is not differentiable: tie at the {k}-th largest coordinate"
                    )));
                }
                let mut g = vec![0.0; n];
                if strict_above {
                    g[order[k - 1]] = 1.0;
                } else {
                    order.iter().take(k).for_each(|&i| g[i] = 1.0);
                }
                Ok(g)
            }
            Catalog::MaxAbs | Catalog::SumKLargestAbs { .. } => {
                let k = self.k().unwrap_or(1);
                let a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                let order = order_desc(&a);
                if !separated(&a, &order, k, false, tol) || a[order[k - 1]] < tol {
                    return Err(Error::nonsmooth(format!(
                        "{self} is not differentiable: tie or zero at the {k}-th largest magnitude"
                    )));
                }
                let mut g = vec![0.0; n];
                order.iter().take(k).for_each(|&i| g[i] = x[i].signum());
                Ok(g)
            }
            Catalog::Trace => Ok(vec![1.0; n]),
        }
    }

    fn hessian(&self, x: &[f64]) -> Result<Matrix> {
        let n = x.len();
        match self {
            Catalog::Quadratic => Ok(Matrix::identity(n)),
            Catalog::NegLog => {
                self.gradient(x)?;
                let d: Vec<f64> = x.iter().map(|v| 1.0 / (v * v)).collect();
                Ok(Matrix::diag_rect(n, n, &d))
            }
            Catalog::Trace => Ok(Matrix::zeros(n, n)),
            // locally affine wherever the gradient exists
            _ => {
                self.gradient(x)?;
                Ok(Matrix::zeros(n, n))
            }
        }
    }

    fn prox_point(&self, x: &[f64], alpha: f64) -> Result<Vec<f64>> {
        let y = match self {
            Catalog::Quadratic => x.iter().map(|v| v / (1.0 + alpha)).collect(),
            Catalog::ScaledL1 { tau } => {
                let t = tau * alpha;
                x.iter().map(|v| (v.abs() - t).max(0.0).copysign(*v)).collect()
            }
            Catalog::Orthant => x.iter().map(|v| v.max(0.0)).collect(),
            Catalog::Box { lower, upper } => x.iter().map(|v| v.clamp(*lower, *upper)).collect(),
            Catalog::NegLog => x.iter().map(|&v| neg_log_prox(v, alpha)).collect(),
            Catalog::Max => prox_sum_k_largest(x, 1, alpha),
            Catalog::SumKLargest { k } => prox_sum_k_largest(x, *k, alpha),
            Catalog::MaxAbs => prox_sum_k_largest_abs(x, 1, alpha),
            Catalog::SumKLargestAbs { k } => prox_sum_k_largest_abs(x, *k, alpha),
            Catalog::Trace => x.iter().map(|v| v - alpha).collect(),
            Catalog::KthLargest { .. } => {
                return Err(Error::capability(format!(
                    "{self} has no proximal map (set-valued, no closed form)"
                )))
            }
        };
        Ok(y)
    }
}
