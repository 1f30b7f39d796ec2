//! Volume identities: Randers unit balls, model-space geodesic balls and small disc balls.

use super::{CheckReport, Provenance, SuiteOptions};
use crate::error::Result;
use crate::model_spaces::{poincare_forward_ball_volume, v_cn};
use crate::norm_numeric::unit_ball_volume_numeric;
use crate::randers::MinkowskiNorm;
use std::f64::consts::PI;

/// Geodesic ball volumes with elementary antiderivatives, `(c, n, ρ) ↦ Vol`.
fn model_ball_volume(c: f64, n: usize, rho: f64) -> Option<f64> {
    let k = (-c).sqrt();
    match (c == 0.0, n) {
        (true, 2) => Some(PI * rho * rho),
        (true, 3) => Some(4.0 / 3.0 * PI * rho.powi(3)),
        (false, 2) => Some(2.0 * PI * ((k * rho).cosh() - 1.0) / (k * k)),
        (false, 3) => Some(PI * ((2.0 * k * rho).sinh() - 2.0 * k * rho) / k.powi(3)),
        _ => None,
    }
}

pub fn volume_identity_suite(o: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let s = o.tol_scale;
    let mut out = Vec::new();
    for k in 0..10 {
        let b = k as f64 / 10.0;
        let norm = MinkowskiNorm::new(2, &[1.0, 0.0, 0.0, 1.0], &[b, 0.0])?;
        let area = unit_ball_volume_numeric(&norm)?;
        let expected = PI / (1.0 - b * b).powf(1.5);
        let prov = if k == 0 { Provenance::Trivial } else { Provenance::Derived };
        out.push(CheckReport::value(format!("volume.randers_ball.b{b:.1}"), expected, prov, area, 1e-6 * s));
        // Vol_F(B⁺(x, ρ)) = σ_F · ρ² · area(B(1))
        for rho in [0.5, 2.0] {
            let vol = norm.hausdorff_density() * rho * rho * area;
            out.push(CheckReport::value(
                format!("volume.minkowski_ball.b{b:.1}.rho{rho}"),
                PI * rho * rho,
                Provenance::Paper,
                vol,
                1e-6 * s * rho * rho,
            ));
        }
    }
    for (c, n) in [(0.0, 2), (0.0, 3), (-1.0, 2), (-1.0, 3), (-0.25, 2), (-0.5, 3)] {
        for rho in [0.1, 1.0, 3.0] {
            let oracle = model_ball_volume(c, n, rho).expect("tabulated case");
            let ratio = v_cn(c, n, rho)? / oracle;
            out.push(CheckReport::value(
                format!("volume.model_ratio.c{c}.n{n}.rho{rho}"),
                1.0,
                Provenance::Derived,
                ratio,
                1e-10 * s,
            ));
        }
    }
    let disc_ratio = |rho: f64| -> Result<f64> { Ok(poincare_forward_ball_volume(rho)? / v_cn(-0.25, 2, rho)?) };
    let trend = [1e-1, 1e-2, 1e-4]
        .iter()
        .map(|&r| Ok(format!("ρ={r:e}: {:.9}", disc_ratio(r)?)))
        .collect::<Result<Vec<_>>>()?;
    out.push(
        CheckReport::value("volume.disc_small_ball", 1.0, Provenance::Derived, disc_ratio(1e-3)?, 1e-4 * s)
            .with_notes(format!("ratio at ρ=1e-3; trend {}", trend.join(", "))),
    );
    Ok(out)
}
