//! Adaptive Gauss–Kronrod quadrature and a few fixed-grid rules.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 4000 }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions { abs_tol, rel_tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel; returns (kronrod estimate, |K15 − G7|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = hw * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * hw, ((k - g) * hw).abs())
}

/// Globally adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, intervals: 0 });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut count = 1;
    loop {
        if !total.is_finite() {
            return Err(Error::AccuracyFailure("non-finite integrand".into()));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            break;
        }
        if count >= opts.max_intervals {
            return Err(Error::AccuracyFailure(format!(
                "quadrature did not converge on [{a}, {b}]: estimate {total}, error {err}"
            )));
        }
        let s = heap.pop().expect("heap is never empty");
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            // interval exhausted at machine precision; keep its contribution
            heap.push(Segment { error: 0.0, ..s });
            err -= s.error;
            continue;
        }
        let (v1, e1) = gk15(&mut f, s.a, m);
        let (v2, e2) = gk15(&mut f, m, s.b);
        total += v1 + v2 - s.value;
        err += e1 + e2 - s.error;
        heap.push(Segment { a: s.a, b: m, value: v1, error: e1 });
        heap.push(Segment { a: m, b: s.b, value: v2, error: e2 });
        count += 1;
    }
    // re-sum to shed accumulated update roundoff
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult { value, error, intervals: count })
}

/// Adaptive integral with default tolerances, returning only the value.
pub fn quad<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    integrate(f, a, b, QuadOptions::default()).map(|r| r.value)
}

/// Composite Simpson rule on uniformly spaced samples (odd length ≥ 3).
/// An even sample count falls back to a trailing trapezoid-corrected panel.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (y[0] + y[1]),
        _ if n % 2 == 1 => {
            let mut s = y[0] + y[n - 1];
            for (i, v) in y.iter().enumerate().take(n - 1).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s * h / 3.0
        }
        _ => {
            // Simpson on the first n-3 intervals, 3/8 rule on the last three
            let head = simpson(&y[..n - 3], h);
            let t = &y[n - 4..];
            head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_panel_is_exact_through_degree_22() {
        for deg in 0..=22 {
            let (v, _) = gk15(&mut |x: f64| x.powi(deg), -1.0, 1.0);
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((v - exact).abs() < 1e-15, "degree {deg}: {v} vs {exact}");
        }
        let (v, _) = gk15(&mut |x: f64| x.powi(24), -1.0, 1.0);
        assert!((v - 2.0 / 25.0).abs() > 1e-12);
    }

    #[test]
    fn gauss_weights_are_exact_through_degree_13() {
        for deg in (0..=13).step_by(2) {
            let mut g = WG[3] * if deg == 0 { 1.0 } else { 0.0 };
            for j in 0..3 {
                g += 2.0 * WG[j] * XGK[2 * j + 1].powi(deg);
            }
            assert!((g - 2.0 / (deg as f64 + 1.0)).abs() < 1e-15, "degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = quad(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        let v = quad(|x: f64| x.ln(), 0.0, 1.0).unwrap();
        assert!((v + 1.0).abs() < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = quad(|x: f64| x.exp(), 0.0, 2.0).unwrap();
        let b = quad(|x: f64| x.exp(), 2.0, 0.0).unwrap();
        assert!((a + b).abs() < 1e-13);
        assert!((a - (2f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn simpson_exact_for_cubics() {
        for n in [3usize, 4, 7, 10] {
            let h = 1.0 / (n - 1) as f64;
            let y: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((simpson(&y, h) - 0.25).abs() < 1e-14, "n={n}");
        }
    }
}
