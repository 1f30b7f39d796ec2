//! Integrals of `u = −exp(−d_F(0,x)/4)` on the Finsler–Poincaré disc and the pointwise
//! norm-equivalence inequality.

use super::{fit_growth, CheckReport, Provenance, SuiteOptions};
use crate::error::{Error, Result};
use crate::model_spaces::{
    poincare_density, poincare_dist_derivative, poincare_dist_from_origin, poincare_dual_along_distance,
    poincare_reversibility,
};
use crate::quadrature::{integrate, QuadOptions};
use crate::randers::{MinkowskiNorm, RandersStructure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, SQRT_2};

/// Four-decimal value printed for `‖u‖²_{F_s}`.
pub const NORM_SQ_FS_ROUNDED: f64 = 0.1877;

/// The printed closed form `π/5 + (π/16)√(2√2−2) ln(…) + (π/8)√(2√2+2) arctan(…)`.
pub fn norm_sq_fs_closed_form() -> f64 {
    let a = (-2.0 + 2.0 * SQRT_2).sqrt();
    let b = (2.0 + 2.0 * SQRT_2).sqrt();
    let log_arg = 5.0 + 4.0 * SQRT_2 + 4.0 * (4.0 - 2.0 * SQRT_2).sqrt() + 6.0 * a;
    PI / 5.0 + PI / 16.0 * a * log_arg.ln() + PI / 8.0 * b * ((b - a) / (SQRT_2 - 2.0)).atan()
}

/// Value of [`norm_sq_fs_closed_form`].
pub const NORM_SQ_FS_CLOSED_FORM: f64 = 0.180_731_418_737_851_5;

fn opts() -> QuadOptions {
    QuadOptions::with_tol(0.0, 1e-14)
}

/// `2π ∫_a^b g(r) dr`; every integrand here is rotationally symmetric.
fn disc_integral<G: FnMut(f64) -> f64>(g: G, a: f64, b: f64) -> Result<f64> {
    Ok(2.0 * PI * integrate(g, a, b, opts())?.value)
}

fn disc_integral_fallible<G: FnMut(f64) -> Result<f64>>(mut g: G, a: f64, b: f64) -> Result<f64> {
    let mut failure = None;
    let v = disc_integral(
        |r| match g(r) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    v
}

/// `e^{−d_F(0,x)/2}` at radius `r`.
fn weight(r: f64) -> Result<f64> {
    Ok((-0.5 * poincare_dist_from_origin(r)?).exp())
}

/// `F*²(x, ±Dd_F(0,x))` through the general Randers co-metric at `(r, 0)`.
fn dual_sq_along_distance(r: f64, sign: f64) -> Result<f64> {
    let alpha = [sign * poincare_dist_derivative(r)?, 0.0];
    let f = RandersStructure::poincare_disc().eval_f_dual(&[r, 0.0], &alpha)?;
    Ok(f * f)
}

/// Printed radial integrand of `I₋`, `r(2+r)⁵ / ((4+r²)^{7/2}(2−r)²)`.
fn i_minus_integrand(r: f64) -> f64 {
    r * (2.0 + r).powi(5) / ((4.0 + r * r).powf(3.5) * (2.0 - r).powi(2))
}

/// `2π ∫₀^{2−δ}` of the `I₋` integrand.
pub fn i_minus_partial(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::InvalidArgument(format!("δ = {delta} must lie in (0, 2)")));
    }
    disc_integral(i_minus_integrand, 0.0, 2.0 - delta)
}

const DIVERGENCE_DELTAS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

fn divergence_fit<G: Fn(f64) -> Result<f64>>(partial: G) -> Result<super::GrowthFit> {
    let x: Vec<f64> = DIVERGENCE_DELTAS.iter().map(|d| 1.0 / d).collect();
    let y = DIVERGENCE_DELTAS.iter().map(|&d| partial(d)).collect::<Result<Vec<f64>>>()?;
    Ok(fit_growth(&x, &y))
}

/// `F_s*²(x, Du) · density` at radius `r`.
fn fs_integrand(r: f64) -> Result<f64> {
    let du = 0.25 * (-0.25 * poincare_dist_from_origin(r)?).exp() * poincare_dist_derivative(r)?;
    let fs = RandersStructure::poincare_disc().eval_f_sym_dual(&[r, 0.0], &[du, 0.0])?;
    Ok(fs * fs * poincare_density(r)?)
}

/// The gradient integral `∫ F_s*²(Du) dm` of `‖u‖²_{F_s}`, by quadrature.
fn norm_sq_fs() -> Result<f64> {
    disc_integral_fallible(fs_integrand, 0.0, 2.0)
}

pub fn poincare_sharpness_suite(o: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let s = o.tol_scale;
    let mut out = Vec::new();

    let printed_plus = disc_integral(|r| r * (2.0 - r).powi(2) * (2.0 + r) / (4.0 + r * r).powf(3.5), 0.0, 2.0)?;
    out.push(
        CheckReport::value("poincare.I_plus", PI / 30.0, Provenance::Paper, printed_plus, 1e-9 * s)
            .with_notes("printed radial integrand"),
    );
    let dual_plus = disc_integral_fallible(
        |r| Ok(weight(r)? * dual_sq_along_distance(r, 1.0)? * poincare_density(r)? / 16.0),
        0.0,
        2.0,
    )?;
    out.push(
        CheckReport::value("poincare.I_plus_dual", PI / 30.0, Provenance::Paper, dual_plus, 1e-9 * s)
            .with_notes("integrand from the Randers co-metric and the volume form"),
    );
    let i = disc_integral_fallible(|r| Ok(weight(r)? * poincare_density(r)?), 0.0, 2.0)?;
    out.push(CheckReport::value("poincare.I", 8.0 * PI / 15.0, Provenance::Paper, i, 1e-9 * s));
    out.push(CheckReport::value("poincare.norm_sq_F", 17.0 * PI / 30.0, Provenance::Paper, printed_plus + i, 1e-9 * s));

    let fs = norm_sq_fs()?;
    out.push(
        CheckReport::value("poincare.norm_sq_Fs", norm_sq_fs_closed_form(), Provenance::Derived, fs, 1e-9 * s)
            .with_notes("quadrature of F_s*²(Du) against the printed closed form"),
    );
    let rounded = (fs * 1e4).round() / 1e4;
    out.push(
        CheckReport::value("poincare.norm_sq_Fs_rounded", NORM_SQ_FS_ROUNDED, Provenance::Paper, rounded, 1e-12)
            .with_notes(format!("unrounded quadrature {fs:.12}")),
    );

    // printed I₋ integrand against the co-metric route, pointwise
    let mut worst: f64 = 0.0;
    for k in 1..200 {
        let r = 1.99 * k as f64 / 200.0;
        let via_dual = weight(r)? * dual_sq_along_distance(r, -1.0)? * poincare_density(r)? / 16.0;
        worst = worst.max((via_dual - i_minus_integrand(r)).abs() / i_minus_integrand(r));
    }
    out.push(CheckReport::bound("poincare.I_minus_integrand", Provenance::Derived, worst, 1e-9 * s));

    let fit = divergence_fit(i_minus_partial)?;
    out.push(CheckReport::divergent("poincare.I_minus", Provenance::Paper, &fit, 1e-3 * s));

    let mut worst_plus: f64 = 0.0;
    let mut worst_minus: f64 = 0.0;
    for k in 1..100 {
        let r = 1.98 * k as f64 / 100.0;
        let p = poincare_dual_along_distance(r, 1)?;
        let m = poincare_dual_along_distance(r, -1)?;
        worst_plus = worst_plus.max((p.from_dual - p.closed_form).abs());
        worst_minus = worst_minus.max((m.from_dual - m.closed_form).abs() / m.closed_form);
    }
    out.push(CheckReport::bound("poincare.dual_of_distance_plus", Provenance::Paper, worst_plus, 1e-9 * s));
    out.push(CheckReport::bound("poincare.dual_of_distance_minus", Provenance::Paper, worst_minus, 1e-9 * s));
    Ok(out)
}

/// Worst relative violation of `((1+r²)/2)^{−1/2} F* ≤ F_s* ≤ ((1+r⁻²)/2)^{−1/2} F*`.
fn sandwich_violation(norm: &MinkowskiNorm, r_f: f64, alpha: &[f64]) -> f64 {
    let fd = norm.eval_dual(alpha);
    let fs = norm.eval_sym_dual(alpha);
    let lower = fd / ((1.0 + r_f * r_f) / 2.0).sqrt();
    let upper = fd / ((1.0 + 1.0 / (r_f * r_f)) / 2.0).sqrt();
    ((lower - fs) / fd).max((fs - upper) / fd)
}

fn unit_dir(rng: &mut ChaCha8Rng) -> [f64; 2] {
    let t = rng.gen_range(0.0..2.0 * PI);
    [t.cos(), t.sin()]
}

pub fn norm_equivalence_suite(bs: &[f64], o: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let s = o.tol_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut out = Vec::new();
    for &b in bs {
        let e = unit_dir(&mut rng);
        let norm = MinkowskiNorm::new(2, &[1.0, 0.0, 0.0, 1.0], &[b * e[0], b * e[1]])?;
        let r_f = norm.reversibility();
        let mut worst = f64::NEG_INFINITY;
        let mut spread: f64 = 0.0;
        for _ in 0..o.samples {
            let d = unit_dir(&mut rng);
            let scale = rng.gen_range(0.1..10.0);
            let alpha = [scale * d[0], scale * d[1]];
            worst = worst.max(sandwich_violation(&norm, r_f, &alpha));
            let fd = norm.eval_dual(&alpha);
            spread = spread.max((fd - norm.eval_sym_dual(&alpha)).abs() / fd);
        }
        let id = format!("norm_equivalence.b{b:.1}");
        out.push(
            CheckReport::bound(format!("{id}.sandwich"), Provenance::Derived, worst, 1e-12 * s)
                .with_notes(format!("{} samples, r_F = {r_f:.6}", o.samples)),
        );
        if b == 0.0 {
            out.push(CheckReport::bound(format!("{id}.all_equal"), Provenance::Trivial, spread, 1e-14 * s));
        }
    }

    // disc: pointwise with the local constant where it stays below 10⁶
    let disc = RandersStructure::poincare_disc();
    let mut worst = f64::NEG_INFINITY;
    let mut sampled = 0;
    let r_max = 2.0 - 4.0 / 1e3;
    for _ in 0..o.samples {
        let r = r_max * rng.gen::<f64>().sqrt();
        let t = unit_dir(&mut rng);
        let x = [r * t[0], r * t[1]];
        let r_f = poincare_reversibility(r)?;
        if r_f >= 1e6 {
            continue;
        }
        let norm = disc.at(&x)?;
        let d = unit_dir(&mut rng);
        worst = worst.max(sandwich_violation(&norm, r_f, &d));
        sampled += 1;
    }
    out.push(
        CheckReport::bound("norm_equivalence.disc.sandwich", Provenance::Derived, worst, 1e-12 * s)
            .with_notes(format!("{sampled} points with local r_F < 1e6")),
    );
    let rev = divergence_fit(|d| poincare_reversibility(2.0 - d.sqrt()))?;
    out.push(
        CheckReport::divergent("norm_equivalence.disc.r_F", Provenance::Paper, &rev, 1e-3 * s)
            .with_notes("global reversibility is effectively infinite; excluded from pointwise sampling"),
    );
    let fs = norm_sq_fs()?;
    let fs_near = disc_integral_fallible(fs_integrand, 0.0, 2.0 - 1e-5)?;
    out.push(
        CheckReport::value("norm_equivalence.disc.norm_sq_Fs_finite", fs, Provenance::Paper, fs_near, 1e-8 * s)
            .with_notes(format!("partial integral to 2 − 1e-5 against the full value {fs:.12}")),
    );
    let i = disc_integral_fallible(|r| Ok(weight(r)? * poincare_density(r)?), 0.0, 2.0)?;
    let neg = divergence_fit(|d| Ok(i_minus_partial(d)? + i))?;
    out.push(CheckReport::divergent("norm_equivalence.disc.norm_sq_neg_u_F", Provenance::Paper, &neg, 1e-3 * s));
    Ok(out)
}
