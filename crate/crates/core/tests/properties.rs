//! Randomized invariants across modules. Inputs are drawn from a seeded
//! generator so that proptest shrinks over seeds and sizes.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use speclift::linalg::{commutator, conjugate, eig_sym, svd, SymMatrix};
use speclift::singular::SingularFunction;
use speclift::solver::{fixed_point_residual, prox_gradient_solve, Loss, ProblemSpec, Regularizer};
use speclift::symmetric::{self, SymmetricFunction};
use speclift::verify::{self, SlopeConfig};
use speclift::{sample, Catalog, Matrix, SpectralFunction};

const PROX_FNS: [&str; 10] = [
    "quadratic",
    "l1:tau=0.7",
    "orthant",
    "box:l=-0.5,u=1",
    "neg_log",
    "max",
    "sum_k_largest:k=2",
    "trace",
    "max_abs",
    "sum_k_largest_abs:k=2",
];

fn cat(i: usize) -> Catalog {
    PROX_FNS[i % PROX_FNS.len()].parse().unwrap()
}

/// Smallest dimension the `k = 2` entries accept.
fn min_dim(i: usize) -> usize {
    if PROX_FNS[i % PROX_FNS.len()].contains("k=2") {
        2
    } else {
        1
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn prox_is_permutation_equivariant(seed: u64, fi in 0usize..10, n in 1usize..7, alpha in 0.05f64..10.0) {
        let mut r = rng(seed);
        let f = cat(fi);
        prop_assume!(n >= min_dim(fi));
        let x: Vec<f64> = sample::vector(&mut r, n).iter().map(|v| 2.0 * v).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, r.random_range(0..=i));
        }
        let px: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let a = symmetric::prox(&f, &x, alpha).unwrap().point;
        let b = symmetric::prox(&f, &px, alpha).unwrap().point;
        for (k, &i) in perm.iter().enumerate() {
            prop_assert!((b[k] - a[i]).abs() <= 1e-10, "{} at {k}: {} vs {}", f.name(), b[k], a[i]);
        }
    }

    #[test]
    fn prox_is_nonexpansive(seed: u64, fi in 0usize..10, n in 1usize..7, alpha in 0.05f64..10.0) {
        let mut r = rng(seed);
        let f = cat(fi);
        prop_assume!(n >= min_dim(fi));
        let x: Vec<f64> = sample::vector(&mut r, n).iter().map(|v| 2.0 * v).collect();
        let y: Vec<f64> = sample::vector(&mut r, n).iter().map(|v| 2.0 * v).collect();
        let px = symmetric::prox(&f, &x, alpha).unwrap().point;
        let py = symmetric::prox(&f, &y, alpha).unwrap().point;
        prop_assert!(dist(&px, &py) <= dist(&x, &y) + 1e-9);
    }

    #[test]
    fn prox_preserves_order(seed: u64, fi in 0usize..10, n in 1usize..7, alpha in 0.05f64..10.0) {
        let mut r = rng(seed);
        let f = cat(fi);
        prop_assume!(n >= min_dim(fi));
        let x: Vec<f64> = sample::vector(&mut r, n).iter().map(|v| 2.0 * v).collect();
        let p = symmetric::prox(&f, &x, alpha).unwrap().point;
        for i in 0..n {
            for j in 0..n {
                if x[i] > x[j] {
                    prop_assert!(p[i] >= p[j] - 1e-10);
                }
            }
        }
    }

    #[test]
    fn envelope_beats_random_probes(seed: u64, fi in 0usize..10, n in 1usize..6, alpha in 0.05f64..10.0) {
        let mut r = rng(seed);
        let f = cat(fi);
        prop_assume!(n >= min_dim(fi));
        let x: Vec<f64> = sample::vector(&mut r, n).iter().map(|v| 2.0 * v).collect();
        let p = symmetric::prox(&f, &x, alpha).unwrap();
        let fp = f.value(&p.point);
        let consistency = fp + dist(&p.point, &x).powi(2) / (2.0 * alpha);
        prop_assert!((p.envelope_value - consistency).abs() <= 1e-10 * (1.0 + consistency.abs()));
        for k in 0..1000 {
            let s = 10f64.powi(-(k % 5));
            let z: Vec<f64> = p.point.iter().map(|v| v + s * sample::gaussian(&mut r)).collect();
            let fz = f.value(&z);
            if fz.is_finite() {
                prop_assert!(p.envelope_value <= fz + dist(&z, &x).powi(2) / (2.0 * alpha) + 1e-8);
            }
        }
    }

    #[test]
    fn envelope_is_monotone_in_alpha(seed: u64, fi in 0usize..10, n in 1usize..6, a in 0.05f64..5.0, b in 0.05f64..5.0) {
        let mut r = rng(seed);
        let f = cat(fi);
        prop_assume!(n >= min_dim(fi));
        let x: Vec<f64> = sample::vector(&mut r, n).iter().map(|v| 2.0 * v).collect();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let e_lo = symmetric::envelope(&f, &x, lo).unwrap();
        let e_hi = symmetric::envelope(&f, &x, hi).unwrap();
        prop_assert!(e_hi <= e_lo + 1e-10 * (1.0 + e_lo.abs()));
        let fx = f.value(&x);
        prop_assert!(!fx.is_finite() || e_lo <= fx + 1e-10 * (1.0 + fx.abs()));
    }

    #[test]
    fn slope_quotient_never_exceeds_the_bound(seed: u64, fi in 0usize..10, n in 1usize..5) {
        let mut r = rng(seed);
        let f = cat(fi);
        prop_assume!(n >= min_dim(fi));
        // a feasible base point: any prox output lies in the domain
        let z: Vec<f64> = sample::vector(&mut r, n).iter().map(|v| 2.0 * v).collect();
        let x = symmetric::prox(&f, &z, 1.0).unwrap().point;
        let v: Vec<f64> = sample::vector(&mut r, n).iter().map(|e| 3.0 * e).collect();
        let rep = verify::subgradient_test(&f, &x, &v, &verify::default_alpha_grid(), &SlopeConfig::default()).unwrap();
        prop_assert!(rep.upper_bound_excess <= 1e-10, "{}", rep.upper_bound_excess);
    }
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn eigenvalues_are_lipschitz_and_invariant(seed: u64, n in 1usize..12) {
        let mut r = rng(seed);
        let x = sample::symmetric(&mut r, n);
        let y = sample::symmetric(&mut r, n);
        let (lx, ly) = (eig_sym(&x).unwrap().lambda, eig_sym(&y).unwrap().lambda);
        prop_assert!(dist(&lx, &ly) <= x.sub(&y).frobenius_norm() + 1e-9);
        let u = sample::orthogonal(&mut r, n);
        let lu = eig_sym(&conjugate(&u, &x).unwrap()).unwrap().lambda;
        for (a, b) in lu.iter().zip(&lx) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn svd_agrees_with_eig_on_psd(seed: u64, n in 1usize..10) {
        let mut r = rng(seed);
        let spec: Vec<f64> = (0..n).map(|_| r.random_range(0.0..3.0)).collect();
        let x = sample::with_spectrum(&mut r, &spec);
        let s = svd(x.as_matrix()).unwrap().sigma;
        let l = eig_sym(&x).unwrap().lambda;
        for (a, b) in s.iter().zip(&l) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn singular_values_are_lipschitz(seed: u64, m in 1usize..7, n in 1usize..7) {
        let mut r = rng(seed);
        let (a, b) = (sample::rect(&mut r, m, n), sample::rect(&mut r, m, n));
        let (sa, sb) = (svd(&a).unwrap().sigma, svd(&b).unwrap().sigma);
        prop_assert!(dist(&sa, &sb) <= a.sub(&b).frobenius_norm() + 1e-9);
    }

    #[test]
    fn spectral_prox_commutes(seed: u64, fi in 0usize..10, n in 1usize..7, alpha in 0.05f64..10.0) {
        let mut r = rng(seed);
        let f = SpectralFunction::new(cat(fi));
        prop_assume!(n >= min_dim(fi));
        let x = sample::symmetric(&mut r, n).scale(2.0);
        let p = f.prox(&x, alpha).unwrap();
        let c = commutator(x.as_matrix(), p.point.as_matrix()).unwrap();
        prop_assert!(c.frobenius_norm() <= 1e-8);
    }

    #[test]
    fn hessian_is_a_symmetric_form(seed: u64, fi in 0usize..3, n in 1usize..6) {
        let mut r = rng(seed);
        let f = SpectralFunction::new(["quadratic", "trace", "neg_log"][fi].parse::<Catalog>().unwrap());
        let spec: Vec<f64> = (0..n).map(|_| r.random_range(0.3..3.0)).collect();
        let x = sample::with_spectrum(&mut r, &spec);
        let (b, c) = (sample::symmetric(&mut r, n), sample::symmetric(&mut r, n));
        let hb = f.hessian_apply(&x, &b).unwrap();
        let hc = f.hessian_apply(&x, &c).unwrap();
        prop_assert!((hb.inner(&c) - b.inner(&hc)).abs() <= 1e-8);
    }
}

/// Spectral envelope on 2×2 matrices against a grid over eigenvalue pairs and
/// a rotation angle.
#[test]
fn envelope_matches_two_by_two_grid() {
    let mut r = rng(77);
    for (fi, name) in PROX_FNS.iter().enumerate() {
        let f = SpectralFunction::new(cat(fi));
        let x = sample::symmetric(&mut r, 2);
        let alpha = 1.0;
        let obj = |a: f64, b: f64, t: f64| {
            let (s, c) = t.sin_cos();
            let u = Matrix::new(2, 2, vec![c, -s, s, c]).unwrap();
            let y = speclift::linalg::reassemble(&u, &[a, b]);
            f.symmetric().value(&[a, b]) + y.sub(&x).frobenius_norm().powi(2) / (2.0 * alpha)
        };
        // coarse grid, then two refinements around the best cell
        let (mut ca, mut cb, mut ct) = (0.0, 0.0, 0.0);
        let (mut ha, mut ht) = (4.0, std::f64::consts::FRAC_PI_2);
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let steps = 40;
            let (mut na, mut nb, mut nt) = (ca, cb, ct);
            for i in 0..=steps {
                let a = ca - ha + 2.0 * ha * i as f64 / steps as f64;
                for j in 0..=steps {
                    let b = cb - ha + 2.0 * ha * j as f64 / steps as f64;
                    for k in 0..=steps {
                        let t = ct - ht + 2.0 * ht * k as f64 / steps as f64;
                        let v = obj(a, b, t);
                        if v < best {
                            (best, na, nb, nt) = (v, a, b, t);
                        }
                    }
                }
            }
            (ca, cb, ct) = (na, nb, nt);
            ha *= 0.1;
            ht *= 0.1;
        }
        let env = f
            .envelope(&SymMatrix::new(2, x.as_matrix().data().to_vec()).unwrap(), alpha)
            .unwrap();
        assert!((env - best).abs() <= 1e-4, "{name}: envelope {env} vs grid {best}");
    }
}

#[test]
fn solver_stops_at_a_fixed_point() {
    let mut r = rng(88);
    for fi in [1usize, 2, 3, 5, 8] {
        let x = sample::symmetric(&mut r, 3).into_matrix();
        let reg = Regularizer::Spectral(SpectralFunction::new(cat(fi)));
        let p = ProblemSpec::new(Loss::FrobeniusDenoise { target: x }, reg, 0.7).unwrap();
        let t = prox_gradient_solve(&p, &Matrix::zeros(3, 3)).unwrap();
        assert!(t.converged);
        assert!(fixed_point_residual(&p, &t.final_point).unwrap() <= p.tol);
    }
}

#[test]
fn rectangular_brute_prox_matches_svt() {
    let mut r = rng(99);
    let nuc = SingularFunction::new("l1:tau=1".parse::<Catalog>().unwrap(), 2, 3).unwrap();
    for _ in 0..5 {
        let x = sample::rect(&mut r, 2, 3).scale(2.0);
        let b = verify::brute_prox_rect(&nuc, &x, 0.5, 2_000_000, &mut r).unwrap();
        let p = nuc.prox(&x, 0.5).unwrap();
        assert!((b.objective - p.envelope_value).abs() <= 1e-8);
        assert!(b.point.sub(&p.point).max_abs() <= 1e-4);
    }
}
