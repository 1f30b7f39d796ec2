//! Sampling-based cross-checks for Minkowski norms: numeric duals, constants and unit-ball volumes.

use crate::error::{Error, Result};
use crate::linalg::min_gen_eig_2x2;
use crate::numeric::{golden_max, golden_min};
use crate::quadrature::{integrate, QuadOptions};
use crate::randers::{unit_ball_volume, MinkowskiNorm};
use std::f64::consts::PI;

/// Default seed counts for sphere searches in 2-D and 3-D.
pub const SEEDS_2D: usize = 256;
pub const SEEDS_3D: usize = 2048;

fn dir2(t: f64) -> [f64; 2] {
    [t.cos(), t.sin()]
}

/// Quasi-uniform points on `S²` (Fibonacci lattice).
fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Supremum of a continuous 0-homogeneous `g` over the unit sphere of `R^dim` (dim 2 or 3):
/// uniform seeding followed by golden-section refinement around the best seed.
pub fn sphere_sup<G: FnMut(&[f64]) -> f64>(dim: usize, samples: usize, mut g: G) -> Result<f64> {
    match dim {
        2 => {
            let step = 2.0 * PI / samples as f64;
            let (mut best_t, mut best) = (0.0, f64::NEG_INFINITY);
            for k in 0..samples {
                let t = k as f64 * step;
                let v = g(&dir2(t));
                if v > best {
                    best = v;
                    best_t = t;
                }
            }
            let (_, refined) = golden_max(|t| g(&dir2(t)), best_t - step, best_t + step, 1e-13);
            Ok(best.max(refined))
        }
        3 => {
            let pts = fibonacci_sphere(samples);
            let mut best_p = pts[0];
            let mut best = f64::NEG_INFINITY;
            for p in &pts {
                let v = g(p);
                if v > best {
                    best = v;
                    best_p = *p;
                }
            }
            // tangent frame at the best seed
            let a = if best_p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let d = a[0] * best_p[0] + a[1] * best_p[1] + a[2] * best_p[2];
            let u = normalized([a[0] - d * best_p[0], a[1] - d * best_p[1], a[2] - d * best_p[2]]);
            let w = [
                best_p[1] * u[2] - best_p[2] * u[1],
                best_p[2] * u[0] - best_p[0] * u[2],
                best_p[0] * u[1] - best_p[1] * u[0],
            ];
            let mut s = 0.0;
            let mut t = 0.0;
            let mut width = 4.0 * (4.0 * PI / samples as f64).sqrt();
            let at = |s: f64, t: f64| {
                normalized([
                    best_p[0] + s * u[0] + t * w[0],
                    best_p[1] + s * u[1] + t * w[1],
                    best_p[2] + s * u[2] + t * w[2],
                ])
            };
            for _ in 0..40 {
                let (ns, _) = golden_max(|x| g(&at(x, t)), s - width, s + width, 1e-13);
                s = ns;
                let (nt, v) = golden_max(|x| g(&at(s, x)), t - width, t + width, 1e-13);
                t = nt;
                best = best.max(v);
                width *= 0.6;
                if width < 1e-9 {
                    break;
                }
            }
            Ok(best)
        }
        _ => Err(Error::UnsupportedCase(format!("sphere search in dimension {dim}"))),
    }
}

/// Numeric polar transform `sup_{y≠0} α(y) / F(y)`.
pub fn polar_transform_numeric<F: Fn(&[f64]) -> f64>(f_eval: F, alpha: &[f64], samples: usize) -> Result<f64> {
    if samples < 64 {
        return Err(Error::InvalidArgument("at least 64 samples are required".into()));
    }
    let mut degenerate = false;
    let sup = sphere_sup(alpha.len(), samples, |y| {
        let fy = f_eval(y);
        if !(fy > 0.0) {
            degenerate = true;
            return f64::NEG_INFINITY;
        }
        alpha.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / fy
    })?;
    if degenerate {
        return Err(Error::DegenerateNorm("norm vanishes on a nonzero direction".into()));
    }
    Ok(sup.max(0.0))
}

/// Numeric reversibility `sup F(y)/F(−y)`.
pub fn reversibility_numeric<F: Fn(&[f64]) -> f64>(f_eval: F, dim: usize, samples: usize) -> Result<f64> {
    sphere_sup(dim, samples, |y| {
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        f_eval(y) / f_eval(&neg)
    })
}

/// Numeric uniformity `inf_{v,w,y} g_v(y,y)/g_w(y,y)` of a 2-D Randers norm.
pub fn uniformity_numeric(norm: &MinkowskiNorm, samples: usize) -> Result<f64> {
    if norm.dim() != 2 {
        return Err(Error::UnsupportedCase("numeric uniformity is implemented in 2-D".into()));
    }
    let tensor = |t: f64| {
        let g = norm.fundamental_tensor(&dir2(t));
        [g[0], g[1], g[2], g[3]]
    };
    let tensors: Vec<[f64; 4]> = (0..samples).map(|k| tensor(2.0 * PI * k as f64 / samples as f64)).collect();
    let (mut iv, mut iw, mut best) = (0, 0, f64::INFINITY);
    for (i, gv) in tensors.iter().enumerate() {
        for (j, gw) in tensors.iter().enumerate() {
            let l = min_gen_eig_2x2(*gv, *gw);
            if l < best {
                best = l;
                iv = i;
                iw = j;
            }
        }
    }
    let step = 2.0 * PI / samples as f64;
    let mut tv = iv as f64 * step;
    let mut tw = iw as f64 * step;
    let mut width = step;
    for _ in 0..30 {
        let (a, _) = golden_min(|t| min_gen_eig_2x2(tensor(t), tensor(tw)), tv - width, tv + width, 1e-12);
        tv = a;
        let (b, v) = golden_min(|t| min_gen_eig_2x2(tensor(tv), tensor(t)), tw - width, tw + width, 1e-12);
        tw = b;
        best = best.min(v);
        width *= 0.7;
    }
    Ok(best)
}

/// Coordinate volume of the unit ball `{F < 1}` by polar quadrature (2-D or 3-D).
pub fn unit_ball_volume_numeric(norm: &MinkowskiNorm) -> Result<f64> {
    let opts = QuadOptions::with_tol(1e-13, 1e-12);
    match norm.dim() {
        2 => {
            let r = integrate(|t| 0.5 / norm.eval(&dir2(t)).powi(2), 0.0, 2.0 * PI, opts)?;
            Ok(r.value)
        }
        3 => {
            let outer = |theta: f64| -> Result<f64> {
                let (st, ct) = theta.sin_cos();
                let inner = integrate(
                    |phi: f64| {
                        let (sp, cp) = phi.sin_cos();
                        let y = [ct * sp, st * sp, cp];
                        sp / (3.0 * norm.eval(&y).powi(3))
                    },
                    0.0,
                    PI,
                    opts,
                )?;
                Ok(inner.value)
            };
            // propagate inner failures through the outer integrand
            let mut failure = None;
            let r = integrate(
                |t| match outer(t) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                0.0,
                2.0 * PI,
                opts,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            Ok(r?.value)
        }
        d => Err(Error::UnsupportedCase(format!("unit-ball quadrature in dimension {d}"))),
    }
}

/// Hausdorff density `ω_n / Vol(B(1))` from the numeric unit-ball volume.
pub fn hausdorff_density_numeric(norm: &MinkowskiNorm) -> Result<f64> {
    Ok(unit_ball_volume(norm.dim()) / unit_ball_volume_numeric(norm)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randers::RandersStructure;

    fn norm(b: &[f64]) -> MinkowskiNorm {
        RandersStructure::randers_euclidean(b).unwrap().at(&vec![0.0; b.len()]).unwrap()
    }

    #[test]
    fn euclidean_polar_transform() {
        let e = |y: &[f64]| (y[0] * y[0] + y[1] * y[1]).sqrt();
        let v = polar_transform_numeric(e, &[3.0, 4.0], SEEDS_2D).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
        let v2 = polar_transform_numeric(e, &[6.0, 8.0], SEEDS_2D).unwrap();
        assert!((v2 - 2.0 * v).abs() < 1e-12);
    }

    #[test]
    fn randers_polar_transform_matches_closed_form() {
        let n = norm(&[0.5, 0.0]);
        let v = polar_transform_numeric(|y| n.eval(y), &[1.0, 0.0], SEEDS_2D).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        let n3 = norm(&[0.2, -0.3, 0.1]);
        let a = [0.4, 1.0, -0.7];
        let v3 = polar_transform_numeric(|y| n3.eval(y), &a, SEEDS_3D).unwrap();
        assert!((v3 - n3.eval_dual(&a)).abs() < 1e-9 * n3.eval_dual(&a));
    }

    #[test]
    fn degenerate_norm_detected() {
        let r = polar_transform_numeric(|y: &[f64]| y[0].max(0.0), &[1.0, 0.0], 64);
        assert!(matches!(r, Err(Error::DegenerateNorm(_))));
        assert!(polar_transform_numeric(|y: &[f64]| y[0].abs(), &[1.0, 0.0], 10).is_err());
    }

    #[test]
    fn numeric_constants_match_closed_forms() {
        let n = norm(&[0.7 * 0.6, 0.7 * 0.8]);
        let r = reversibility_numeric(|y| n.eval(y), 2, 10_000).unwrap();
        assert!((r - n.reversibility()).abs() < 1e-3);
        let l = uniformity_numeric(&n, SEEDS_2D).unwrap();
        assert!((l - n.uniformity()).abs() < 1e-3 * n.uniformity());
    }

    #[test]
    fn ball_volume_matches_ellipse_area() {
        let n = norm(&[0.3, 0.0]);
        let a = unit_ball_volume_numeric(&n).unwrap();
        assert!((a - PI / 0.91f64.powf(1.5)).abs() < 1e-10);
        let n3 = norm(&[0.0, 0.0, 0.4]);
        let d = hausdorff_density_numeric(&n3).unwrap();
        assert!((d - n3.hausdorff_density()).abs() < 1e-9);
    }
}
