//! Singular radial two-point problem
//! `f'' + (n−1) ct_c(r) f' + μ f / r² + λ = 0` on `(0, ρ)`, `f(ρ) = 0`, finite energy.
//!
//! Solved in `t = ln r` as `f = f_part + a·f_hom`, both integrated from a small
//! startup radius with Frobenius data and superposed on a shared output grid.

use crate::error::{Error, Result};
use crate::model_spaces::r_ct_c;
use crate::special::SigmaParams;

/// Solver parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeParams {
    pub sigma: SigmaParams,
    /// Startup radius.
    pub eps: f64,
    /// Number of output nodes, geometrically spaced on `[eps, ρ]`.
    pub grid_n: usize,
    /// Relative tolerance of the adaptive integrator.
    pub rk_tol: f64,
    /// Scale of the constant source term (1 for the problem proper).
    pub lambda: f64,
}

impl OdeParams {
    pub fn new(n: usize, mu: f64, c: f64, rho: f64) -> Result<Self> {
        let sigma = SigmaParams::new(n, mu, c, rho)?;
        Ok(OdeParams { sigma, eps: 1e-6 * rho, grid_n: 4096, rk_tol: 1e-12, lambda: 1.0 })
    }

    pub fn with_grid(mut self, grid_n: usize) -> Self {
        self.grid_n = grid_n;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_tol(mut self, rk_tol: f64) -> Self {
        self.rk_tol = rk_tol;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.sigma.validate()?;
        let rho = self.sigma.rho;
        if !(self.eps > 0.0 && self.eps < rho / 100.0) {
            return Err(Error::InvalidArgument(format!("eps = {} must lie in (0, ρ/100)", self.eps)));
        }
        if self.grid_n < 64 {
            return Err(Error::InvalidArgument(format!("grid_n = {} must be at least 64", self.grid_n)));
        }
        if !(self.rk_tol > 0.0 && self.rk_tol < 1e-3) {
            return Err(Error::InvalidArgument(format!("rk_tol = {} out of range", self.rk_tol)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be finite".into()));
        }
        Ok(())
    }
}

/// Solved profile on the output grid.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub params: OdeParams,
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    /// `f'(r)`.
    pub fp: Vec<f64>,
    /// Amplitude of the homogeneous solution in the superposition.
    pub a_hom: f64,
    /// `∫₀^ρ f'² r^{n−1} dr`.
    pub energy: f64,
    pub residual_max: f64,
    /// Accepted integrator steps.
    pub steps: usize,
}

type State = [f64; 7];

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

struct System {
    n1: f64,
    mu: f64,
    c: f64,
    lambda: f64,
}

impl System {
    /// `y = [f_hom, f_hom_t, f_part, f_part_t, E_pp, E_ph, E_hh]` as functions of `t = ln r`,
    /// where the `E` entries accumulate the energy moments `∫ u_t v_t r^{n−2} dt`.
    fn rhs(&self, t: f64, y: &State) -> State {
        let r = t.exp();
        let damp = self.n1 * r_ct_c(self.c, r) - 1.0;
        let w = r.powf(self.n1 - 1.0);
        [
            y[1],
            -damp * y[1] - self.mu * y[0],
            y[3],
            -damp * y[3] - self.mu * y[2] - self.lambda * r * r,
            y[3] * y[3] * w,
            y[3] * y[1] * w,
            y[1] * y[1] * w,
        ]
    }
}

fn axpy(y: &State, h: f64, ks: &[State], coef: &[f64]) -> State {
    let mut out = *y;
    for (k, a) in ks.iter().zip(coef) {
        if *a != 0.0 {
            for i in 0..7 {
                out[i] += h * a * k[i];
            }
        }
    }
    out
}

/// Integrate from `t0` to every node of `nodes` (increasing), recording the state there.
fn integrate_to_nodes(sys: &System, y0: State, t0: f64, nodes: &[f64], tol: f64) -> Result<(Vec<State>, usize)> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y);
    let mut h = (nodes.last().copied().unwrap_or(t0) - t0).abs() * 1e-4;
    let mut steps = 0usize;
    for &target in nodes {
        while target - t > 1e-14 * target.abs().max(1.0) {
            let hh = h.min(target - t);
            let mut ks: [State; 7] = [[0.0; 7]; 7];
            ks[0] = k1;
            for s in 1..7 {
                let ys = axpy(&y, hh, &ks[..s], &A[s][..s]);
                ks[s] = sys.rhs(t + C[s] * hh, &ys);
            }
            let y_new = axpy(&y, hh, &ks[..6], &A[6][..6]);
            // error measured per (value, derivative) pair, relative to the pair's size
            let mut err: f64 = 0.0;
            for pair in [0usize, 2] {
                let mut e0 = 0.0;
                let mut e1 = 0.0;
                for s in 0..7 {
                    e0 += E[s] * ks[s][pair];
                    e1 += E[s] * ks[s][pair + 1];
                }
                let size = y[pair].abs().max(y_new[pair].abs()) + y[pair + 1].abs().max(y_new[pair + 1].abs());
                let scale = tol * size + 1e-300;
                err = err.max((hh * e0).abs() / scale).max((hh * e1).abs() / scale);
            }
            if !err.is_finite() {
                return Err(Error::AccuracyFailure("non-finite state in radial integration".into()));
            }
            if err <= 1.0 {
                t += hh;
                y = y_new;
                k1 = ks[6];
                steps += 1;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // do not let a node-clipped step shrink the working step size
                if hh >= h * 0.999 {
                    h *= fac;
                } else {
                    h = h.max(hh * fac);
                }
            } else {
                h = hh * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::AccuracyFailure("integrator step size underflow".into()));
                }
            }
            if steps > 50_000_000 {
                return Err(Error::AccuracyFailure("integrator step limit exceeded".into()));
            }
        }
        t = target;
        out.push(y);
    }
    Ok((out, steps))
}

/// Solve the two-point problem for `p`.
pub fn solve_q(p: &OdeParams) -> Result<RadialSolution> {
    p.validate()?;
    let sp = &p.sigma;
    let (n, mu, rho, eps) = (sp.n as f64, sp.mu, sp.rho, p.eps);
    let alpha = sp.alpha_plus();
    let sys = System { n1: n - 1.0, mu, c: sp.c, lambda: p.lambda };
    let t0 = eps.ln();
    let t1 = rho.ln();
    let m = p.grid_n;
    let dt = (t1 - t0) / (m - 1) as f64;
    let nodes: Vec<f64> = (0..m).map(|i| if i == m - 1 { t1 } else { t0 + dt * i as f64 }).collect();
    let denom = mu + 2.0 * n;
    let fh0 = eps.powf(alpha);
    let fp0 = -p.lambda * eps * eps / denom;
    let y0 = [fh0, alpha * fh0, fp0, 2.0 * fp0, 0.0, 0.0, 0.0];
    let (states, steps) = integrate_to_nodes(&sys, y0, t0, &nodes[1..], p.rk_tol)?;
    let mut all = Vec::with_capacity(m);
    all.push(y0);
    all.extend(states);
    let end = all[m - 1];
    if !(end[0].is_finite() && end[0] != 0.0) {
        return Err(Error::DegenerateBvp("homogeneous solution vanishes at ρ".into()));
    }
    let a = -end[2] / end[0];
    let mut r = Vec::with_capacity(m);
    let mut f = Vec::with_capacity(m);
    let mut fp = Vec::with_capacity(m);
    for (i, y) in all.iter().enumerate() {
        let ri = if i == m - 1 { rho } else { nodes[i].exp() };
        let val = if i == m - 1 { 0.0 } else { y[2] + a * y[0] };
        let der_t = y[3] + a * y[1];
        r.push(ri);
        f.push(val);
        fp.push(der_t / ri);
    }
    let tail = {
        let l = p.lambda;
        let mut s = 4.0 * l * l / (denom * denom) * eps.powf(n + 2.0) / (n + 2.0);
        if alpha != 0.0 {
            s += alpha * alpha * a * a * eps.powf(2.0 * alpha + n - 2.0) / (2.0 * alpha + n - 2.0);
            s -= 4.0 * alpha * a * l / denom * eps.powf(alpha + n) / (alpha + n);
        }
        s
    };
    let energy = end[4] + 2.0 * a * end[5] + a * a * end[6] + tail;
    let mut sol = RadialSolution { params: *p, r, f, fp, a_hom: a, energy, residual_max: 0.0, steps };
    sol.residual_max = residual_check(&sol, p);
    Ok(sol)
}

/// Energy of a solved profile.
pub fn energy_integral(sol: &RadialSolution) -> f64 {
    sol.energy
}

/// Normalized ODE residual at every node. The grid is uniform in `t = ln r`, so `f''` comes
/// from a five-point difference of `r f'` in `t` (one-sided at the two nodes next to each
/// end). Each residual is divided by `|f''| + |(n−1) ct_c f'| + |μ f / r²| + |λ|`.
pub fn residual_profile(sol: &RadialSolution, p: &OdeParams) -> Vec<f64> {
    let (n1, mu, c, lambda) = (p.sigma.n as f64 - 1.0, p.sigma.mu, p.sigma.c, p.lambda);
    let r = &sol.r;
    let m = r.len();
    if m < 5 {
        return vec![f64::NAN; m];
    }
    let dt = (r[m - 1].ln() - r[0].ln()) / (m - 1) as f64;
    let g = |i: usize| r[i] * sol.fp[i];
    let g_t = |i: usize| {
        let w: [f64; 5] = match i {
            0 => [-25.0, 48.0, -36.0, 16.0, -3.0],
            1 => [-3.0, -10.0, 18.0, -6.0, 1.0],
            _ if i == m - 2 => [-1.0, 6.0, -18.0, 10.0, 3.0],
            _ if i == m - 1 => [3.0, -16.0, 36.0, -48.0, 25.0],
            _ => [1.0, -8.0, 0.0, 8.0, -1.0],
        };
        let start = i.clamp(2, m - 3) - 2;
        (0..5).map(|k| w[k] * g(start + k)).sum::<f64>() / (12.0 * dt)
    };
    (0..m)
        .map(|i| {
            let ri = r[i];
            // f'' = (f_tt − f_t)/r² with f_t = r f'
            let fpp = (g_t(i) - g(i)) / (ri * ri);
            let t1 = n1 * r_ct_c(c, ri) / ri * sol.fp[i];
            let t2 = mu * sol.f[i] / (ri * ri);
            let scale = fpp.abs() + t1.abs() + t2.abs() + lambda.abs();
            if scale > 0.0 {
                (fpp + t1 + t2 + lambda).abs() / scale
            } else {
                0.0
            }
        })
        .collect()
}

/// Largest entry of [`residual_profile`].
pub fn residual_check(sol: &RadialSolution, p: &OdeParams) -> f64 {
    residual_profile(sol, p).into_iter().fold(0.0, f64::max)
}

impl RadialSolution {
    /// Value at radius `r ∈ [r_min, ρ]` by cubic Hermite interpolation in `ln r`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let (lo, hi) = (self.r[0], *self.r.last().unwrap());
        if !(r >= lo * (1.0 - 1e-14) && r <= hi * (1.0 + 1e-14)) {
            return Err(Error::Domain(format!("r = {r} outside the solved range [{lo}, {hi}]")));
        }
        let t = r.ln();
        let t0 = lo.ln();
        let m = self.r.len();
        let dt = (hi.ln() - t0) / (m - 1) as f64;
        let i = (((t - t0) / dt).floor() as usize).min(m - 2);
        let (ta, tb) = (self.r[i].ln(), self.r[i + 1].ln());
        let h = tb - ta;
        let s = ((t - ta) / h).clamp(0.0, 1.0);
        let (fa, fb) = (self.f[i], self.f[i + 1]);
        let (da, db) = (self.fp[i] * self.r[i] * h, self.fp[i + 1] * self.r[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        Ok((2.0 * s3 - 3.0 * s2 + 1.0) * fa + (s3 - 2.0 * s2 + s) * da + (-2.0 * s3 + 3.0 * s2) * fb + (s3 - s2) * db)
    }

    pub fn max_f(&self) -> f64 {
        self.f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Smallest value and largest derivative over the grid, for sign and monotonicity checks.
    pub fn shape(&self) -> (f64, f64) {
        let min_f = self.f.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let max_fp = self.fp.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
        (min_f, max_fp)
    }
}

/// Outcome of the curvature/radius ordering scan.
#[derive(Debug, Clone, Default)]
pub struct MonotonicityReport {
    /// Largest `σ_{c₁} − σ_{c₂}` over pairs `c₁ ≤ c₂`, relative to `max σ`.
    pub c_violation: f64,
    /// Largest `σ_{ρ₁} − σ_{ρ₂}` over pairs `ρ₁ ≤ ρ₂`, relative to `max σ`.
    pub rho_violation: f64,
    /// Most negative value of any profile, relative to its maximum.
    pub min_value: f64,
    /// Largest derivative of any profile, relative to its maximum value.
    pub max_slope: f64,
    pub pairs: usize,
}

impl MonotonicityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.c_violation <= tol && self.rho_violation <= tol && self.min_value >= -tol && self.max_slope <= tol
    }
}

/// Compare solutions across the `(c, ρ)` lattice for fixed `(n, μ)`.
pub fn sigma_monotonicity_scan(
    n: usize,
    mu: f64,
    rhos: &[f64],
    cs: &[f64],
    grid_n: usize,
) -> Result<MonotonicityReport> {
    let mut sols = Vec::new();
    for &rho in rhos {
        let mut row = Vec::new();
        for &c in cs {
            let p = OdeParams::new(n, mu, c, rho)?.with_grid(grid_n);
            row.push(solve_q(&p)?);
        }
        sols.push(row);
    }
    let mut rep = MonotonicityReport::default();
    for row in &sols {
        for s in row {
            let (min_f, max_fp) = s.shape();
            let scale = s.max_f();
            rep.min_value = rep.min_value.min(min_f / scale);
            rep.max_slope = rep.max_slope.max(max_fp / scale);
        }
    }
    // curvature ordering at fixed ρ, node by node on the shared grid
    for row in &sols {
        for (i, a) in cs.iter().enumerate() {
            for (j, b) in cs.iter().enumerate() {
                if a <= b && i != j {
                    let (lo, hi) = (&row[i], &row[j]);
                    let scale = hi.max_f().max(lo.max_f());
                    let v = lo.f.iter().zip(&hi.f).fold(f64::NEG_INFINITY, |m, (x, y)| m.max(x - y));
                    rep.c_violation = rep.c_violation.max(v / scale);
                    rep.pairs += 1;
                }
            }
        }
    }
    // radius ordering at fixed c, on the smaller ball
    for (ci, _) in cs.iter().enumerate() {
        for (i, r1) in rhos.iter().enumerate() {
            for (j, r2) in rhos.iter().enumerate() {
                if r1 <= r2 && i != j {
                    let (small, big) = (&sols[i][ci], &sols[j][ci]);
                    let scale = big.max_f();
                    let start = big.r[0];
                    let mut v = f64::NEG_INFINITY;
                    for (k, &r) in small.r.iter().enumerate() {
                        if r >= start {
                            v = v.max(small.f[k] - big.eval(r)?);
                        }
                    }
                    rep.rho_violation = rep.rho_violation.max(v / scale);
                    rep.pairs += 1;
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::sigma_closed;

    #[test]
    fn flat_example_value() {
        let sol = solve_q(&OdeParams::new(3, 0.0, 0.0, 1.0).unwrap()).unwrap();
        assert!((sol.eval(0.5).unwrap() - 0.125).abs() < 1e-12);
        assert!((sol.energy - 1.0 / 45.0).abs() < 1e-12);
    }

    #[test]
    fn matches_closed_form_n4() {
        let mu = 0.9 * 1.0;
        let p = OdeParams::new(4, mu, 0.0, 2.0).unwrap();
        let sol = solve_q(&p).unwrap();
        let sp = p.sigma;
        for r in [0.02, 0.3, 1.0, 1.9] {
            let want = sigma_closed(&sp, r).unwrap();
            assert!((sol.eval(r).unwrap() - want).abs() < 1e-8 * want.abs(), "r={r}");
        }
    }

    #[test]
    fn boundary_and_shape() {
        let sol = solve_q(&OdeParams::new(5, 1.0, -0.7, 1.3).unwrap()).unwrap();
        assert_eq!(*sol.f.last().unwrap(), 0.0);
        let (min_f, max_fp) = sol.shape();
        assert!(min_f >= -1e-10 * sol.max_f());
        assert!(max_fp <= 0.0);
    }

    #[test]
    fn residual_of_constant_is_one() {
        let p = OdeParams::new(3, 0.1, 0.0, 1.0).unwrap().with_grid(128);
        let mut sol = solve_q(&p).unwrap();
        sol.f.iter_mut().for_each(|v| *v = 1.0);
        sol.fp.iter_mut().for_each(|v| *v = 0.0);
        assert!((residual_check(&sol, &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_finite_close_to_critical() {
        let sol = solve_q(&OdeParams::new(3, 0.24, 0.0, 1.0).unwrap()).unwrap();
        assert!(sol.energy.is_finite() && sol.energy > 0.0);
    }

    #[test]
    fn rejects_bad_params() {
        let p = OdeParams::new(3, 0.0, 0.0, 1.0).unwrap();
        assert!(solve_q(&p.with_grid(10)).is_err());
        assert!(solve_q(&p.with_eps(0.5)).is_err());
        assert!(OdeParams::new(3, 0.3, 0.0, 1.0).is_err());
    }

    #[test]
    fn eval_outside_range_fails() {
        let sol = solve_q(&OdeParams::new(3, 0.0, 0.0, 1.0).unwrap().with_grid(64)).unwrap();
        assert!(sol.eval(1.5).is_err());
        assert!(sol.eval(1e-9).is_err());
    }

    #[test]
    fn degenerate_lattice_is_equal() {
        let rep = sigma_monotonicity_scan(3, 0.0, &[1.0], &[-1.0, 0.0], 512).unwrap();
        assert!(rep.passes(1e-10), "{rep:?}");
    }
}
