//! Randomized invariants across the public API.

use crate::model_spaces::{ct_c, s_c, v_cn, w_c};
use crate::norm_numeric::{polar_transform_numeric, SEEDS_2D};
use crate::poisson::{self, BallKind, GridProblem};
use crate::radial_ode::{solve_q, OdeParams};
use crate::randers::MinkowskiNorm;
use crate::special::{sigma_bessel_form, sigma_from_potential, SigmaParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn randers_2d() -> impl Strategy<Value = MinkowskiNorm> {
    (0.5f64..2.0, 0.5f64..2.0, 0.0..PI, 0.0f64..0.95, 0.0..2.0 * PI).prop_map(|(l1, l2, t, b, phi)| {
        let (c, s) = (t.cos(), t.sin());
        let h = [l1 * c * c + l2 * s * s, (l1 - l2) * c * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c];
        let dir = [phi.cos(), phi.sin()];
        let unit = MinkowskiNorm::new(2, &h, &[0.0, 0.0]).unwrap();
        let scale = unit.eval_dual(&dir);
        MinkowskiNorm::new(2, &h, &[b * dir[0] / scale, b * dir[1] / scale]).unwrap()
    })
}

fn vec2() -> impl Strategy<Value = [f64; 2]> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_filter("nonzero", |(a, b)| a * a + b * b > 1e-6).prop_map(|(a, b)| [a, b])
}

proptest! {
    #[test]
    fn norm_is_positively_homogeneous(f in randers_2d(), y in vec2(), t in 0.001f64..1000.0) {
        let ty = [t * y[0], t * y[1]];
        prop_assert!((f.eval(&ty) - t * f.eval(&y)).abs() <= 1e-13 * t * f.eval(&y));
        prop_assert!((f.eval_dual(&ty) - t * f.eval_dual(&y)).abs() <= 1e-13 * t * f.eval_dual(&y));
    }

    #[test]
    fn triangle_inequality(f in randers_2d(), a in vec2(), b in vec2()) {
        let s = [a[0] + b[0], a[1] + b[1]];
        prop_assert!(f.eval(&s) <= (f.eval(&a) + f.eval(&b)) * (1.0 + 1e-14));
        prop_assert!(f.eval_dual(&s) <= (f.eval_dual(&a) + f.eval_dual(&b)) * (1.0 + 1e-14));
    }

    #[test]
    fn symmetrization_averages_squares(f in randers_2d(), y in vec2()) {
        let neg = [-y[0], -y[1]];
        let avg = 0.5 * (f.eval(&y).powi(2) + f.eval(&neg).powi(2));
        prop_assert!((f.eval_sym(&y).powi(2) - avg).abs() <= 1e-12 * avg);
    }

    #[test]
    fn dual_sandwich(f in randers_2d(), a in vec2()) {
        let r = f.reversibility();
        let (fd, fs) = (f.eval_dual(&a), f.eval_sym_dual(&a));
        prop_assert!(fs >= fd / ((1.0 + r * r) / 2.0).sqrt() * (1.0 - 1e-12));
        prop_assert!(fs <= fd / ((1.0 + 1.0 / (r * r)) / 2.0).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn legendre_identities(f in randers_2d(), a in vec2()) {
        let j = f.legendre(&a).unwrap();
        let fd = f.eval_dual(&a);
        prop_assert!((f.eval(&j) - fd).abs() <= 1e-10 * fd);
        prop_assert!((a[0] * j[0] + a[1] * j[1] - fd * fd).abs() <= 1e-10 * fd * fd);
    }

    #[test]
    fn uniformity_times_reversibility_squared_is_one(f in randers_2d()) {
        let (r, l) = (f.reversibility(), f.uniformity());
        prop_assert!((l * r * r - 1.0).abs() <= 1e-12);
        prop_assert!(r >= 1.0 && l > 0.0 && l <= 1.0);
    }

    #[test]
    fn dual_matches_numeric_polar_transform(f in randers_2d(), a in vec2()) {
        let numeric = polar_transform_numeric(|y| f.eval(y), &a, SEEDS_2D).unwrap();
        prop_assert!((numeric - f.eval_dual(&a)).abs() <= 1e-6 * f.eval_dual(&a));
    }

    #[test]
    fn hyperbolic_cotangent_exceeds_flat(c in -4.0f64..-1e-3, r in 1e-3f64..20.0) {
        prop_assert!(ct_c(c, r).unwrap() > 1.0 / r);
        let h = 1e-5 * r;
        let ds = (s_c(c, r + h).unwrap() - s_c(c, r - h).unwrap()) / (2.0 * h);
        prop_assert!((ds / s_c(c, r).unwrap() - ct_c(c, r).unwrap()).abs() <= 1e-7 * ct_c(c, r).unwrap());
    }

    #[test]
    fn model_volume_is_increasing(c in -2.0f64..=0.0, n in 2usize..6, rho in 0.01f64..3.0, d in 0.001f64..1.0) {
        prop_assert!(v_cn(c, n, rho + d).unwrap() > v_cn(c, n, rho).unwrap());
    }

    #[test]
    fn hyperbolic_disc_area(rho in 0.01f64..4.0) {
        // V_{−1,2}(ρ) = 2π(cosh ρ − 1)
        let exact = 2.0 * PI * (rho.cosh() - 1.0);
        prop_assert!((v_cn(-1.0, 2, rho).unwrap() / exact - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn flat_potential(n in 2usize..7, r in 0.01f64..5.0) {
        let w = w_c(0.0, n, r).unwrap();
        prop_assert!((w - r * r / (2.0 * n as f64)).abs() <= 1e-12 * (1.0 + w));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn radial_solution_is_linear_in_lambda(n in 3usize..6, frac in 0.0f64..0.95, c in -1.0f64..=0.0, lambda in 0.1f64..10.0) {
        let mu = frac * (n as f64 - 2.0).powi(2) / 4.0;
        let p = OdeParams::new(n, mu, c, 1.0).unwrap();
        let a = solve_q(&p).unwrap();
        let b = solve_q(&p.with_lambda(lambda)).unwrap();
        let dev = a.f.iter().zip(&b.f).map(|(x, y)| (y - lambda * x).abs()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-10 * lambda * a.max_f());
    }

    #[test]
    fn radial_solution_is_eps_robust(n in 3usize..6, frac in 0.0f64..0.95, c in -1.0f64..=0.0, rho in 0.5f64..2.0) {
        let mu = frac * (n as f64 - 2.0).powi(2) / 4.0;
        let p = OdeParams::new(n, mu, c, rho).unwrap();
        let a = solve_q(&p).unwrap();
        let b = solve_q(&p.with_eps(p.eps / 2.0)).unwrap();
        for k in 0..32 {
            let r = rho * (0.01 + 0.99 * k as f64 / 31.0);
            prop_assert!((a.eval(r).unwrap() - b.eval(r).unwrap()).abs() <= 1e-8 * a.max_f());
        }
        prop_assert!((a.energy - b.energy).abs() <= 1e-8 * a.energy);
        let (min_f, max_fp) = a.shape();
        prop_assert!(min_f >= -1e-12 * a.max_f() && max_fp <= 1e-12 * a.max_f());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn discrete_energy_is_uniformly_convex(seed in any::<u64>()) {
        let p = GridProblem::randers(0.5, 1.0, BallKind::Forward, 65).unwrap();
        let dom = poisson::build_domain(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..dom.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..dom.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ts: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
        let rep = poisson::convexity_probe(&p, &dom, &u, &v, &ts).unwrap();
        prop_assert!(rep.max_excess <= 1e-12 * rep.scale, "excess {}", rep.max_excess);
        prop_assert!(rep.midpoint_gap >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn grid_solution_is_unique_and_nonnegative(b in 0.0f64..0.6, backward in any::<bool>(), seed in any::<u64>()) {
        let ball = if backward { BallKind::Backward } else { BallKind::Forward };
        let p = GridProblem::randers(b, 1.0, ball, 65).unwrap();
        let dom = poisson::build_domain(&p).unwrap();
        let a = poisson::solve(&p, &dom).unwrap();
        let c = poisson::solve_random_init(&p, &dom, seed).unwrap();
        prop_assert!(a.monotone() && c.monotone());
        let diff = a.u.iter().zip(&c.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-6, "two starts differ by {diff}");
        prop_assert!(a.u.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn backward_mask_reflects_forward(b in 0.0f64..0.9, phi in 0.0..2.0 * PI) {
        let norm = MinkowskiNorm::new(2, &[1.0, 0.0, 0.0, 1.0], &[b * phi.cos(), b * phi.sin()]).unwrap();
        let f = GridProblem::new(norm.clone(), [0.0, 0.0], 1.0, BallKind::Forward, 65).unwrap();
        let g = GridProblem::new(norm, [0.0, 0.0], 1.0, BallKind::Backward, 65).unwrap();
        let (df, dg) = (poisson::build_domain(&f).unwrap(), poisson::build_domain(&g).unwrap());
        let (mf, mg) = (df.mask(), dg.mask());
        let n = df.n;
        prop_assert_eq!(df.h, dg.h);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(mf[i * n + j], mg[(n - 1 - i) * n + (n - 1 - j)]);
            }
        }
    }
}

#[test]
fn euclidean_grid_error_is_second_order() {
    let errs: Vec<f64> = [81, 161]
        .iter()
        .map(|&n| {
            let p = GridProblem::randers(0.0, 1.0, BallKind::Forward, n).unwrap();
            let dom = poisson::build_domain(&p).unwrap();
            poisson::forward_error(&p, &dom, &poisson::solve(&p, &dom).unwrap().u)
        })
        .collect();
    let order = (errs[0] / errs[1]).log2();
    assert!(order >= 1.0, "observed order {order}");
}

#[test]
fn energy_decreases_along_the_iteration() {
    let p = GridProblem::randers(0.3, 1.0, BallKind::Backward, 81).unwrap();
    let dom = poisson::build_domain(&p).unwrap();
    let s = poisson::solve(&p, &dom).unwrap();
    assert!(s.monotone());
    assert!(s.energy < 0.0);
}

#[test]
fn printed_half_order_bessel_form_misses_the_potential_solution() {
    let sp = SigmaParams::new(3, 0.0, -1.0, 1.0).unwrap();
    let worst = [0.05, 0.1, 0.25, 0.5, 0.75]
        .iter()
        .map(|&r| {
            let w = sigma_from_potential(&sp, r).unwrap();
            (sigma_bessel_form(0.5, 1.0, r).unwrap() - w).abs() / w
        })
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "{worst}");
}
