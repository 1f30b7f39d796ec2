//! Rayleigh quotients of the Hardy sharpness family `ψ·max(ε, |x|)^{−γ}` on `Rⁿ`.

use super::{fit_growth, CheckReport, Provenance, SuiteOptions};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

pub(super) const DEFAULT_EPS: [f64; 7] = [1e-10, 1e-15, 1e-20, 1e-25, 1e-30, 1e-35, 1e-40];

/// Quintic smoothstep cutoff: 1 on `[0, r_cut]`, 0 from `R_cut` on, C² at both ends.
fn cutoff(r: f64, r_cut: f64, big_r: f64) -> (f64, f64) {
    if r <= r_cut {
        return (1.0, 0.0);
    }
    if r >= big_r {
        return (0.0, 0.0);
    }
    let w = big_r - r_cut;
    let t = (r - r_cut) / w;
    let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
    (1.0 - s, -ds)
}

/// Numerator and denominator of the quotient `∫|∇v|² / ∫v²/|x|²` (common sphere area dropped).
#[derive(Debug, Clone, Copy)]
pub struct HardyQuotient {
    pub eps: f64,
    pub gradient: f64,
    pub weighted: f64,
    pub quotient: f64,
}

pub fn hardy_quotient(n: usize, r_cut: f64, big_r: f64, eps: f64) -> Result<HardyQuotient> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n = {n} must be at least 3")));
    }
    if !(r_cut > 0.0 && r_cut < big_r && big_r.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 < r_cut = {r_cut} < R_cut = {big_r}")));
    }
    if !(eps > 0.0 && eps < r_cut) {
        return Err(Error::InvalidArgument(format!("ε = {eps} must lie in (0, r_cut)")));
    }
    let gamma = (n as f64 - 2.0) / 2.0;
    let m = n as i32;
    let opts = QuadOptions::with_tol(0.0, 1e-13);

    // core ball: v ≡ ε^{−γ}
    let core = eps.powf(m as f64 - 2.0 - 2.0 * gamma) / (m as f64 - 2.0);
    // annulus ε < r < r_cut, integrated in t = ln r
    let (t0, t1) = (eps.ln(), r_cut.ln());
    let ann_grad = integrate(
        |t| {
            let r = t.exp();
            gamma * gamma * r.powf(m as f64 - 2.0 * gamma - 2.0)
        },
        t0,
        t1,
        opts,
    )?
    .value;
    let ann_weight = integrate(
        |t| {
            let r = t.exp();
            r.powf(m as f64 - 2.0 * gamma - 2.0)
        },
        t0,
        t1,
        opts,
    )?
    .value;
    // cutoff shell
    let v = |r: f64| {
        let (psi, dpsi) = cutoff(r, r_cut, big_r);
        let u = r.powf(-gamma);
        (psi * u, dpsi * u - gamma * psi * u / r)
    };
    let shell_grad = integrate(|r| v(r).1.powi(2) * r.powi(m - 1), r_cut, big_r, opts)?.value;
    let shell_weight = integrate(|r| v(r).0.powi(2) * r.powi(m - 3), r_cut, big_r, opts)?.value;

    let gradient = ann_grad + shell_grad;
    let weighted = core + ann_weight + shell_weight;
    Ok(HardyQuotient { eps, gradient, weighted, quotient: gradient / weighted })
}

/// Quotients over `eps`, the lower bound `(n−2)²/4` at each, monotonicity in `ε`, and the
/// intercept of the fit `quotient ≈ γ² + C / ln(r_cut/ε)`.
pub fn hardy_quotient_suite(
    n: usize,
    r_cut: f64,
    big_r: f64,
    eps: &[f64],
    o: &SuiteOptions,
) -> Result<Vec<CheckReport>> {
    if eps.len() < 3 {
        return Err(Error::InvalidArgument("at least three ε values are needed for the fit".into()));
    }
    let s = o.tol_scale;
    let mu_bar = (n as f64 - 2.0).powi(2) / 4.0;
    let qs = eps.iter().map(|&e| hardy_quotient(n, r_cut, big_r, e)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let prov = if n == 3 { Provenance::Paper } else { Provenance::Trivial };
    for q in &qs {
        out.push(
            CheckReport::bound(format!("hardy.n{n}.above_mu_bar.eps{:e}", q.eps), prov, mu_bar - q.quotient, 0.0)
                .with_notes(format!("quotient {:.12}", q.quotient)),
        );
    }
    // quotients must decrease as ε shrinks
    let mut sorted: Vec<&HardyQuotient> = qs.iter().collect();
    sorted.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let rise = sorted.windows(2).map(|w| w[1].quotient - w[0].quotient).fold(f64::NEG_INFINITY, f64::max);
    out.push(CheckReport::bound(format!("hardy.n{n}.decreasing"), Provenance::Derived, rise, 1e-8 * s));

    let x: Vec<f64> = qs.iter().map(|q| 1.0 / (r_cut / q.eps).ln()).collect();
    let y: Vec<f64> = qs.iter().map(|q| q.quotient).collect();
    let fit = fit_growth(&x, &y);
    out.push(
        CheckReport::value(format!("hardy.n{n}.intercept"), mu_bar, prov, fit.intercept, 0.02 * mu_bar * s)
            .with_notes(format!("slope {:.6e}, r² {:.9}", fit.slope, fit.r2)),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_is_continuous_and_monotone() {
        let (r0, r1) = (0.5, 1.0);
        assert_eq!(cutoff(0.5, r0, r1), (1.0, 0.0));
        assert!(cutoff(1.0 - 1e-12, r0, r1).0 < 1e-30);
        let mut last = 1.0;
        for k in 0..=100 {
            let (p, d) = cutoff(0.5 + 0.005 * k as f64, r0, r1);
            assert!(p <= last && d <= 0.0);
            last = p;
        }
    }

    #[test]
    fn annulus_parts_match_logarithms() {
        // with the cutoff contributions removed, the parts are γ² L and L + 1/(n−2)
        let a = hardy_quotient(3, 0.5, 1.0, 1e-4).unwrap();
        let b = hardy_quotient(3, 0.5, 1.0, 1e-6).unwrap();
        let dl = (1e-4f64 / 1e-6).ln();
        assert!((b.gradient - a.gradient - 0.25 * dl).abs() < 1e-10);
        assert!((b.weighted - a.weighted - dl).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(hardy_quotient(2, 0.5, 1.0, 1e-3).is_err());
        assert!(hardy_quotient(3, 0.5, 0.4, 1e-3).is_err());
        assert!(hardy_quotient(3, 0.5, 1.0, 0.6).is_err());
    }
}
