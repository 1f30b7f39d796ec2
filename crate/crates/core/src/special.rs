//! Special functions: Γ, modified Bessel functions, generalized hypergeometric series,
//! and closed-form solutions of the radial problem.

use crate::error::{Error, Result};
use crate::model_spaces;
use crate::quadrature::{integrate, QuadOptions};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) by the Lanczos approximation (g = 7), with reflection for x < 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = LANCZOS[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Taylor coefficients of `1/Γ(1+z) = Σ c_j z^j`, j = 0..25.
const RECIP_GAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// `1/Γ(1+z)` for `|z| ≤ 1/2` from the reciprocal-gamma series.
fn recip_gamma_1p(z: f64) -> f64 {
    RECIP_GAMMA.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

/// Temme's auxiliary functions `(γ₁, γ₂, 1/Γ(1+μ), 1/Γ(1−μ))` for `|μ| ≤ 1/2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+z) = Σ_j c_j z^j: even j feed γ₂, odd j feed −γ₁, so no cancellation at μ → 0
    let mu2 = mu * mu;
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    let mut pw = 1.0;
    for j in 0..RECIP_GAMMA.len() / 2 {
        gam2 += RECIP_GAMMA[2 * j] * pw;
        gam1 -= RECIP_GAMMA[2 * j + 1] * pw;
        pw *= mu2;
    }
    (gam1, gam2, recip_gamma_1p(mu), recip_gamma_1p(-mu))
}

/// Values and derivatives of `I_ν(x)` and `K_ν(x)`.
#[derive(Debug, Clone, Copy)]
pub struct BesselIK {
    pub i: f64,
    pub k: f64,
    pub ip: f64,
    pub kp: f64,
}

const BESSEL_EPS: f64 = 1e-16;
const BESSEL_MAXIT: usize = 100_000;
/// Below this argument `I_ν` is summed from its power series.
pub const I_SERIES_MAX_X: f64 = 25.0;

fn check_bessel_args(nu: f64, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be positive, got {x}")));
    }
    if !(0.0..=10.0).contains(&nu) {
        return Err(Error::Domain(format!("Bessel order must lie in [0, 10], got {nu}")));
    }
    Ok(())
}

/// Temme series (x < 2) or Steed continued fraction (x ≥ 2) for `K`, continued
/// fraction plus Wronskian for `I`.
fn bessel_ik_temme(nu: f64, x: f64) -> Result<BesselIK> {
    let fpmin = 1e-300;
    let nl = (nu + 0.5) as i64;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let mut h = (nu * xi).max(fpmin);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..BESSEL_MAXIT {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < BESSEL_EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::AccuracyFailure("Bessel continued fraction did not converge".into()));
    }
    let mut ril = fpmin;
    let mut ripl = h * ril;
    let ril1 = ril;
    let rip1 = ripl;
    let mut fact = nu * xi;
    for _ in (1..=nl).rev() {
        let ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
    }
    let f = ripl / ril;
    let (mut rkmu, mut rk1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < BESSEL_EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < BESSEL_EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut cc = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..BESSEL_MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            cc *= dd / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = cc * ff;
            sum += del;
            sum1 += cc * (p - fi * ff);
            if del.abs() < sum.abs() * BESSEL_EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::AccuracyFailure("Temme series did not converge".into()));
        }
        rkmu = sum;
        rk1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut ok = false;
        for i in 2..BESSEL_MAXIT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < BESSEL_EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::AccuracyFailure("Steed continued fraction did not converge".into()));
        }
        h *= a1;
        rkmu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        rk1 = rkmu * (xmu + x + 0.5 - h) * xi;
    }
    let rkmup = xmu * xi * rkmu - rk1;
    let rimu = xi / (f * rkmu - rkmup);
    let i = rimu * ril1 / ril;
    let ip = rimu * rip1 / ril;
    for j in 1..=nl {
        let rktemp = (xmu + j as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = rktemp;
    }
    Ok(BesselIK { i, k: rkmu, ip, kp: nu * xi * rkmu - rk1 })
}

/// Power series `I_ν(x) = (x/2)^ν Σ (x²/4)^k / (k! Γ(ν+k+1))`; all terms positive.
fn bessel_i_series(nu: f64, x: f64) -> f64 {
    let z = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= z / (k * (nu + k));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    (0.5 * x).powf(nu) / gamma(nu + 1.0) * sum
}

/// `I_ν, K_ν` and derivatives for `ν ∈ [0, 10]`, `x > 0`.
pub fn bessel_ik(nu: f64, x: f64) -> Result<BesselIK> {
    check_bessel_args(nu, x)?;
    let mut r = bessel_ik_temme(nu, x)?;
    if x <= I_SERIES_MAX_X {
        let i = bessel_i_series(nu, x);
        // I' = I_{ν+1} + (ν/x) I_ν
        let ip = bessel_i_series(nu + 1.0, x) + nu / x * i;
        r.i = i;
        r.ip = ip;
    }
    Ok(r)
}

pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_ik(nu, x)?.i)
}

pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    check_bessel_args(nu, x)?;
    Ok(bessel_ik_temme(nu, x)?.k)
}

/// Double-double arithmetic for the extended-precision series check.
mod dd {
    #[derive(Debug, Clone, Copy)]
    pub struct Dd(pub f64, pub f64);

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    impl Dd {
        pub fn from(a: f64) -> Dd {
            Dd(a, 0.0)
        }
        pub fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.0, o.0);
            let (t, f) = two_sum(self.1, o.1);
            let (s, e) = quick_two_sum(s, e + t);
            let (s, e) = quick_two_sum(s, e + f);
            Dd(s, e)
        }
        pub fn mul(self, o: Dd) -> Dd {
            let (p, e) = two_prod(self.0, o.0);
            let (s, e) = quick_two_sum(p, e + self.0 * o.1 + self.1 * o.0);
            Dd(s, e)
        }
        pub fn div(self, o: Dd) -> Dd {
            let q1 = self.0 / o.0;
            let r = self.add(o.mul(Dd::from(q1)).neg());
            let q2 = r.0 / o.0;
            let r = r.add(o.mul(Dd::from(q2)).neg());
            let q3 = r.0 / o.0;
            let (s, e) = quick_two_sum(q1, q2);
            Dd(s, e).add(Dd::from(q3))
        }
        pub fn neg(self) -> Dd {
            Dd(-self.0, -self.1)
        }
        pub fn abs_hi(self) -> f64 {
            self.0.abs()
        }
        pub fn to_f64(self) -> f64 {
            self.0 + self.1
        }
    }
}

fn check_pfq_params(b: &[f64]) -> Result<()> {
    for &bj in b {
        if bj <= 0.0 && bj == bj.round() {
            return Err(Error::Pole(format!("lower parameter {bj} is a non-positive integer")));
        }
    }
    Ok(())
}

const PFQ_MAX_TERMS: usize = 10_000;

/// Generalized hypergeometric series `pFq(a; b; z)` for `p ≤ q` (entire).
pub fn hyp_pfq(a: &[f64], b: &[f64], z: f64) -> Result<f64> {
    check_pfq_params(b)?;
    if a.len() > b.len() {
        return Err(Error::UnsupportedCase("only p ≤ q series are supported".into()));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut quiet = 0;
    for k in 0..PFQ_MAX_TERMS {
        let kf = k as f64;
        let num: f64 = a.iter().map(|ai| ai + kf).product();
        let den: f64 = b.iter().map(|bj| bj + kf).product();
        term *= num / den * z / (kf + 1.0);
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() < 1e-16 * sum.abs() {
            quiet += 1;
            if quiet >= 5 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::AccuracyFailure("hypergeometric series did not converge".into()))
}

/// `pFq` with terms and partial sums carried in double-double arithmetic.
pub fn hyp_pfq_extended(a: &[f64], b: &[f64], z: f64) -> Result<f64> {
    use dd::Dd;
    check_pfq_params(b)?;
    if a.len() > b.len() {
        return Err(Error::UnsupportedCase("only p ≤ q series are supported".into()));
    }
    let mut term = Dd::from(1.0);
    let mut sum = Dd::from(1.0);
    let zz = Dd::from(z);
    let mut quiet = 0;
    for k in 0..PFQ_MAX_TERMS {
        let kf = Dd::from(k as f64);
        let mut num = Dd::from(1.0);
        for ai in a {
            num = num.mul(Dd::from(*ai).add(kf));
        }
        let mut den = Dd::from(1.0);
        for bj in b {
            den = den.mul(Dd::from(*bj).add(kf));
        }
        den = den.mul(Dd::from(k as f64 + 1.0));
        term = term.mul(num).mul(zz).div(den);
        sum = sum.add(term);
        if term.abs_hi() == 0.0 {
            return Ok(sum.to_f64());
        }
        if term.abs_hi() < 1e-32 * sum.abs_hi() {
            quiet += 1;
            if quiet >= 5 {
                return Ok(sum.to_f64());
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::AccuracyFailure("hypergeometric series did not converge".into()))
}

/// `₃F₄(a; b; z)`.
pub fn hyp3f4(a: [f64; 3], b: [f64; 4], z: f64) -> Result<f64> {
    hyp_pfq(&a, &b, z)
}

/// Largest `r` accepted by [`h_func`].
pub const H_MAX_R: f64 = 5.0;

fn h_func_with(nu: f64, r: f64, pfq: fn(&[f64], &[f64], f64) -> Result<f64>) -> Result<f64> {
    if !(nu > 0.0 && nu <= 0.5) {
        return Err(Error::Domain(format!("H needs ν in (0, 1/2], got {nu}")));
    }
    if !(r > 0.0 && r <= H_MAX_R) {
        return Err(Error::Domain(format!("H needs r in (0, {H_MAX_R}], got {r}")));
    }
    let snp = (nu * PI).sin();
    let g = gamma(nu);
    let ik = bessel_ik(nu, r)?;
    let z = r * r;
    let f_plus =
        pfq(&[0.75 + nu / 2.0, 1.25 + nu / 2.0, 1.25 + nu / 2.0], &[1.5, 1.0 + nu, 1.5 + nu, 2.25 + nu / 2.0], z)?;
    let f_minus =
        pfq(&[0.75 - nu / 2.0, 1.25 - nu / 2.0, 1.25 - nu / 2.0], &[1.5, 1.0 - nu, 1.5 - nu, 2.25 - nu / 2.0], z)?;
    let pre = 2.0 * nu / ((25.0 - 4.0 * nu * nu) * snp * g * r.sinh());
    let t1 = (5.0 - 2.0 * nu)
        * f_plus
        * (2f64.powf(nu - 2.0) * snp * ik.k + 2f64.powf(-nu - 1.0) * PI * ik.i)
        * r.powf(3.0 + nu);
    let t2 = nu * (5.0 + 2.0 * nu) * 2f64.powf(nu - 1.0) * f_minus * g * g * snp * ik.i * r.powf(3.0 - nu);
    Ok(pre * (t1 - t2))
}

/// The function `H(ν, r)` of the `c = −1`, `n = 3` closed form, evaluated as printed.
pub fn h_func(nu: f64, r: f64) -> Result<f64> {
    h_func_with(nu, r, hyp_pfq)
}

/// [`h_func`] with both hypergeometric series summed in double-double arithmetic.
pub fn h_func_extended(nu: f64, r: f64) -> Result<f64> {
    h_func_with(nu, r, hyp_pfq_extended)
}

/// Parameters `(n, μ, c, ρ)` of the radial problem with derived exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaParams {
    pub n: usize,
    pub mu: f64,
    pub c: f64,
    pub rho: f64,
}

impl SigmaParams {
    pub fn new(n: usize, mu: f64, c: f64, rho: f64) -> Result<Self> {
        let p = SigmaParams { n, mu, c, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidArgument(format!("n = {} must be at least 3", self.n)));
        }
        if !(self.mu >= 0.0 && self.mu < self.mu_bar()) {
            return Err(Error::InvalidArgument(format!("μ = {} must lie in [0, {})", self.mu, self.mu_bar())));
        }
        if !(self.c <= 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidArgument(format!("c = {} must be non-positive", self.c)));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidArgument(format!("ρ = {} must be positive", self.rho)));
        }
        Ok(())
    }

    /// Hardy constant `(n−2)²/4`.
    pub fn mu_bar(&self) -> f64 {
        let m = self.n as f64 - 2.0;
        0.25 * m * m
    }

    pub fn nu(&self) -> f64 {
        (self.mu_bar() - self.mu).sqrt()
    }

    /// Finite-energy Frobenius exponent `−√μ̄ + ν`.
    pub fn alpha_plus(&self) -> f64 {
        -self.mu_bar().sqrt() + self.nu()
    }
}

/// Which closed form [`sigma_closed`] uses for a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormCase {
    Flat,
    HyperbolicNoPotential,
    HyperbolicBessel,
}

pub fn closed_form_case(p: &SigmaParams) -> Option<ClosedFormCase> {
    if p.c == 0.0 {
        Some(ClosedFormCase::Flat)
    } else if p.mu == 0.0 {
        Some(ClosedFormCase::HyperbolicNoPotential)
    } else if p.c == -1.0 && p.n == 3 {
        Some(ClosedFormCase::HyperbolicBessel)
    } else {
        None
    }
}

/// The `c < 0`, `μ = 0` double integral `∫_r^ρ sinh(ks)^{1−n} ∫₀^s sinh(kt)^{n−1} dt ds`.
fn sigma_double_integral(n: usize, c: f64, rho: f64, r: f64) -> Result<f64> {
    let k = (-c).sqrt();
    let m = n as i32 - 1;
    let inner_opts = QuadOptions::with_tol(0.0, 1e-14);
    let mut failure = None;
    let outer = integrate(
        |s| match integrate(|t| (k * t).sinh().powi(m), 0.0, s, inner_opts) {
            Ok(v) => v.value / (k * s).sinh().powi(m),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        r,
        rho,
        QuadOptions::with_tol(0.0, 1e-13),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(outer?.value)
}

/// Closed-form `σ_{μ,ρ,c}(r)` for the three solvable families.
pub fn sigma_closed(p: &SigmaParams, r: f64) -> Result<f64> {
    p.validate()?;
    if !(r > 0.0 && r <= p.rho) {
        return Err(Error::Domain(format!("r = {r} must lie in (0, ρ = {}]", p.rho)));
    }
    match closed_form_case(p) {
        Some(ClosedFormCase::Flat) => {
            let a = p.alpha_plus();
            let denom = p.mu + 2.0 * p.n as f64;
            Ok((p.rho * p.rho * (r / p.rho).powf(a) - r * r) / denom)
        }
        Some(ClosedFormCase::HyperbolicNoPotential) => sigma_double_integral(p.n, p.c, p.rho, r),
        Some(ClosedFormCase::HyperbolicBessel) => sigma_bessel_form(p.nu(), p.rho, r),
        None => Err(Error::UnsupportedCase(format!("no closed form for n = {}, μ = {}, c = {}", p.n, p.mu, p.c))),
    }
}

/// The `c = −1`, `n = 3` Bessel form `H(ν,ρ)·√r sinh ρ I_ν(r) / (√ρ sinh r I_ν(ρ)) − H(ν,r)`.
pub fn sigma_bessel_form(nu: f64, rho: f64, r: f64) -> Result<f64> {
    let ratio = (r.sqrt() * rho.sinh() * bessel_i(nu, r)?) / (rho.sqrt() * r.sinh() * bessel_i(nu, rho)?);
    Ok(h_func(nu, rho)? * ratio - h_func(nu, r)?)
}

/// Reference value `w_c(ρ) − w_c(r)` from the model-space potential.
pub fn sigma_from_potential(p: &SigmaParams, r: f64) -> Result<f64> {
    Ok(model_spaces::w_c(p.c, p.n, p.rho)? - model_spaces::w_c(p.c, p.n, r)?)
}
