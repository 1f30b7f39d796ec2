//! Constant-curvature model quantities and the Finsler–Poincaré disc.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::randers::{unit_ball_volume, RandersStructure};
use std::f64::consts::PI;

const SERIES_CUTOFF: f64 = 1e-4;

fn check_curvature(c: f64) -> Result<()> {
    if c.is_finite() && c <= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("curvature c = {c} must be finite and non-positive")))
    }
}

/// `s_c(r)`: `r` for `c = 0`, `sinh(√−c r)/√−c` for `c < 0`.
pub fn s_c(c: f64, r: f64) -> Result<f64> {
    check_curvature(c)?;
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("s_c needs r ≥ 0, got {r}")));
    }
    Ok(s_c_unchecked(c, r))
}

#[inline]
pub(crate) fn s_c_unchecked(c: f64, r: f64) -> f64 {
    if c == 0.0 {
        r
    } else {
        let k = (-c).sqrt();
        (k * r).sinh() / k
    }
}

/// `ct_c(r) = s_c'(r)/s_c(r)`.
pub fn ct_c(c: f64, r: f64) -> Result<f64> {
    check_curvature(c)?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("ct_c needs r > 0, got {r}")));
    }
    Ok(r_ct_c(c, r) / r)
}

/// `r·ct_c(r)`, equal to `x coth x` with `x = √−c r`; bounded near 0.
#[inline]
pub(crate) fn r_ct_c(c: f64, r: f64) -> f64 {
    if c == 0.0 {
        return 1.0;
    }
    let x = (-c).sqrt() * r;
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        1.0 + x2 / 3.0 - x2 * x2 / 45.0
    } else {
        x / x.tanh()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("dimension n = {n} must be at least 2")))
    }
}

/// Volume `n ω_n ∫₀^ρ s_c^{n−1}` of a geodesic ball of radius ρ in the model space.
pub fn v_cn(c: f64, n: usize, rho: f64) -> Result<f64> {
    check_curvature(c)?;
    check_n(n)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {rho}")));
    }
    let omega = unit_ball_volume(n);
    if c == 0.0 {
        return Ok(omega * rho.powi(n as i32));
    }
    let m = (n - 1) as i32;
    let opts = QuadOptions::with_tol(0.0, 1e-13);
    let r = integrate(|t| s_c_unchecked(c, t).powi(m), 0.0, rho, opts)?;
    Ok(n as f64 * omega * r.value)
}

/// `∫₀^s s_c(t)^{n−1} dt`, closed form in the Euclidean case.
fn inner_volume(c: f64, n: usize, s: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(s.powi(n as i32) / n as f64);
    }
    let m = (n - 1) as i32;
    let opts = QuadOptions::with_tol(0.0, 1e-14);
    Ok(integrate(|t| s_c_unchecked(c, t).powi(m), 0.0, s, opts)?.value)
}

/// `w_c'(r) = s_c(r)^{1−n} ∫₀^r s_c^{n−1}`.
pub fn w_c_prime(c: f64, n: usize, r: f64) -> Result<f64> {
    check_curvature(c)?;
    check_n(n)?;
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("w_c needs r ≥ 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(inner_volume(c, n, r)? / s_c_unchecked(c, r).powi(n as i32 - 1))
}

/// Radial potential `w_c(r) = ∫₀^r s_c^{1−n}(s) ∫₀^s s_c^{n−1}(t) dt ds`, with `Δ w_c(d) = 1`.
pub fn w_c(c: f64, n: usize, r: f64) -> Result<f64> {
    check_curvature(c)?;
    check_n(n)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("w_c needs finite r ≥ 0, got {r}")));
    }
    if c == 0.0 {
        return Ok(r * r / (2.0 * n as f64));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let mut failure = None;
    let opts = QuadOptions::with_tol(0.0, 1e-13);
    let res = integrate(
        |s| match w_c_prime(c, n, s) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        r,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(res?.value)
}

/// Finsler-Laplacian `(n−1) ct_c(r)` of the distance function on the model space.
pub fn radial_laplacian(c: f64, n: usize, r: f64) -> Result<f64> {
    check_n(n)?;
    Ok((n - 1) as f64 * ct_c(c, r)?)
}

fn check_disc(r: f64) -> Result<()> {
    if (0.0..2.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Domain(format!("disc radius r = {r} must lie in [0, 2)")))
    }
}

/// The disc norm of `V = p ∂_r + q ∂_θ` at polar point `(r, θ)`.
pub fn poincare_metric(r: f64, p: f64, q: f64) -> Result<f64> {
    check_disc(r)?;
    let r2 = r * r;
    Ok(4.0 * (p * p + r2 * q * q).sqrt() / (4.0 - r2) + 16.0 * p * r / (16.0 - r2 * r2))
}

/// `d_F(0, x) = log((4+r²)/(2−r)²)`.
pub fn poincare_dist_from_origin(r: f64) -> Result<f64> {
    check_disc(r)?;
    Ok((4.0 + r * r).ln() - 2.0 * (2.0 - r).ln())
}

/// `d_F(x, 0) = log((2+r)²/(4+r²))`.
pub fn poincare_dist_to_origin(r: f64) -> Result<f64> {
    check_disc(r)?;
    Ok(2.0 * (2.0 + r).ln() - (4.0 + r * r).ln())
}

/// Hausdorff density of the disc in polar coordinates, `16r(4−r²)/(4+r²)³` w.r.t. `dr dθ`.
pub fn poincare_density(r: f64) -> Result<f64> {
    check_disc(r)?;
    Ok(16.0 * r * (4.0 - r * r) / (4.0 + r * r).powi(3))
}

/// Pointwise reversibility `((2+r)/(2−r))²`.
pub fn poincare_reversibility(r: f64) -> Result<f64> {
    check_disc(r)?;
    Ok(((2.0 + r) / (2.0 - r)).powi(2))
}

/// Radial derivative of `d_F(0, ·)`: `Dd = 4(2+r)/((2−r)(4+r²)) dr`.
pub fn poincare_dist_derivative(r: f64) -> Result<f64> {
    check_disc(r)?;
    Ok(4.0 * (2.0 + r) / ((2.0 - r) * (4.0 + r * r)))
}

/// `F*(x, ±Dd_F(0,x))` from the closed form and from the Randers dual.
#[derive(Debug, Clone, Copy)]
pub struct DualAlongDistance {
    pub closed_form: f64,
    pub from_dual: f64,
}

pub fn poincare_dual_along_distance(r: f64, sign: i32) -> Result<DualAlongDistance> {
    check_disc(r)?;
    if !(r > 0.0) {
        return Err(Error::Domain("the distance is not differentiable at the origin".into()));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidArgument(format!("sign must be ±1, got {sign}")));
    }
    let closed_form = if sign == 1 { 1.0 } else { poincare_reversibility(r)? };
    // Dd is radial; evaluate at (r, 0) where dr = dx
    let alpha = [sign as f64 * poincare_dist_derivative(r)?, 0.0];
    let from_dual = RandersStructure::poincare_disc().eval_f_dual(&[r, 0.0], &alpha)?;
    Ok(DualAlongDistance { closed_form, from_dual })
}

/// Euclidean radius of the forward ball `B⁺(0, ρ)`, i.e. the inverse of `d_F(0, ·)`.
pub fn poincare_forward_radius(rho: f64) -> Result<f64> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("radius must be finite and non-negative, got {rho}")));
    }
    let em1 = rho.exp_m1();
    let e = em1 + 1.0;
    Ok(2.0 * em1 / (e + (2.0 * e - 1.0).sqrt()))
}

/// `Vol_F(B⁺(0, ρ))` on the disc by radial quadrature of the density.
pub fn poincare_forward_ball_volume(rho: f64) -> Result<f64> {
    let big_r = poincare_forward_radius(rho)?;
    let opts = QuadOptions::with_tol(0.0, 1e-13);
    let v = integrate(|r| 16.0 * r * (4.0 - r * r) / (4.0 + r * r).powi(3), 0.0, big_r, opts)?;
    Ok(2.0 * PI * v.value)
}

/// Total volume of the disc, by quadrature.
pub fn poincare_total_volume() -> Result<f64> {
    let v = integrate(|r| 16.0 * r * (4.0 - r * r) / (4.0 + r * r).powi(3), 0.0, 2.0, QuadOptions::default())?;
    Ok(2.0 * PI * v.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_function_examples() {
        assert_eq!(ct_c(0.0, 2.0).unwrap(), 0.5);
        assert!((s_c(-1.0, 0.7).unwrap() - 0.7f64.sinh()).abs() < 1e-15);
        assert!((ct_c(-1.0, 40.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(ct_c(0.0, 0.0).is_err());
        assert!(s_c(0.5, 1.0).is_err());
    }

    #[test]
    fn ct_series_branch_is_continuous() {
        let c = -4.0;
        let r = 0.5 * SERIES_CUTOFF;
        let lo = r_ct_c(c, r * 0.999_999);
        let hi = r_ct_c(c, r * 1.000_001);
        assert!((lo - hi).abs() < 1e-12);
        let x: f64 = 2.0 * r * 0.999;
        let direct = 2.0 * (x.cosh() / x.sinh());
        assert!((ct_c(c, r * 0.999).unwrap() - direct).abs() / direct < 1e-12);
    }

    #[test]
    fn volume_examples() {
        let v = v_cn(0.0, 3, 2.0).unwrap();
        assert!((v - 4.0 * PI / 3.0 * 8.0).abs() < 1e-12);
        let v = v_cn(-1.0, 3, 1.0).unwrap();
        assert!((v - PI * (2f64.sinh() - 2.0)).abs() < 1e-12);
        let small = v_cn(-1.0, 4, 1e-3).unwrap() / (unit_ball_volume(4) * 1e-12);
        assert!((small - 1.0).abs() < 1e-6);
    }

    #[test]
    fn w_c_examples() {
        assert!((w_c(0.0, 3, 0.8).unwrap() - 0.64 / 6.0).abs() < 1e-16);
        assert_eq!(w_c(-1.0, 3, 0.0).unwrap(), 0.0);
        let r = 1.3;
        let h = 1e-5;
        let lap = |s: f64| {
            let wp = w_c_prime(-1.0, 3, s).unwrap();
            let wpp = (w_c_prime(-1.0, 3, s + h).unwrap() - w_c_prime(-1.0, 3, s - h).unwrap()) / (2.0 * h);
            wpp + 2.0 * ct_c(-1.0, s).unwrap() * wp
        };
        assert!((lap(r) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn disc_examples() {
        assert!((poincare_reversibility(1.0).unwrap() - 9.0).abs() < 1e-15);
        assert!((poincare_dist_from_origin(1.0).unwrap() - 5f64.ln()).abs() < 1e-15);
        assert!((poincare_dist_to_origin(2.0 - 1e-12).unwrap() - 2f64.ln()).abs() < 1e-10);
        assert!(poincare_dist_from_origin(2.0 - 1e-12).unwrap() > 50.0);
        assert!(poincare_density(2.0).is_err());
        let d = poincare_dual_along_distance(1.0, -1).unwrap();
        assert!((d.closed_form - 9.0).abs() < 1e-15 && (d.from_dual - 9.0).abs() < 1e-12);
    }

    #[test]
    fn disc_metric_matches_cartesian_structure() {
        let s = RandersStructure::poincare_disc();
        let (r, t): (f64, f64) = (1.2, 0.4);
        let (p, q) = (0.3, -0.9);
        let x = [r * t.cos(), r * t.sin()];
        let y = [p * t.cos() - r * q * t.sin(), p * t.sin() + r * q * t.cos()];
        let a = poincare_metric(r, p, q).unwrap();
        let b = s.eval_f(&x, &y).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn forward_radius_inverts_distance() {
        for rho in [1e-6, 1e-3, 0.5, 3.0] {
            let r = poincare_forward_radius(rho).unwrap();
            let d = poincare_dist_from_origin(r).unwrap();
            assert!((d - rho).abs() < 1e-14 * rho.max(1.0), "{rho}");
        }
    }

    #[test]
    fn density_matches_randers_closed_form() {
        let s = RandersStructure::poincare_disc();
        let r = 0.9;
        let d = s.hausdorff_density(&[r, 0.0]).unwrap() * r;
        assert!((d - poincare_density(r).unwrap()).abs() < 1e-14);
    }
}
