//! Finite-difference energy minimization for `Δ(−u) = 1`, `u = 0` on the boundary, on
//! forward and backward balls of a 2-D Minkowski–Randers norm.
//!
//! The discrete energy sums, over every grid cell and every interior corner of the cell,
//! `h²/4 · ½F*²(−g)` where `g` collects the one-sided differences along the two cell edges
//! meeting at that corner. An edge that leaves the ball is cut at the boundary crossing,
//! found by bisection, and the difference uses the Dirichlet value there.

use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::randers::MinkowskiNorm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const EXTERIOR: u32 = u32::MAX;

/// Smallest cut fraction used in a stencil; nearer crossings move the boundary by at most `h/100`.
pub const MIN_CUT: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallKind {
    Forward,
    Backward,
}

impl std::str::FromStr for BallKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(BallKind::Forward),
            "backward" => Ok(BallKind::Backward),
            other => Err(Error::InvalidArgument(format!("unknown ball kind '{other}'"))),
        }
    }
}

/// A 2-D Dirichlet problem on a metric ball, discretized with `n` nodes per axis.
#[derive(Debug, Clone)]
pub struct GridProblem {
    pub norm: MinkowskiNorm,
    pub center: [f64; 2],
    pub rho: f64,
    pub ball: BallKind,
    pub n: usize,
}

impl GridProblem {
    pub fn new(norm: MinkowskiNorm, center: [f64; 2], rho: f64, ball: BallKind, n: usize) -> Result<Self> {
        let p = GridProblem { norm, center, rho, ball, n };
        p.validate()?;
        Ok(p)
    }

    /// Randers norm `|y| + b·y₁` centred at the origin.
    pub fn randers(b: f64, rho: f64, ball: BallKind, n: usize) -> Result<Self> {
        let norm = MinkowskiNorm::new(2, &[1.0, 0.0, 0.0, 1.0], &[b, 0.0])?;
        GridProblem::new(norm, [0.0, 0.0], rho, ball, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.norm.dim() != 2 {
            return Err(Error::InvalidArgument("the grid solver is two-dimensional".into()));
        }
        if self.n < 65 || self.n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("N must be odd and at least 65, got {}", self.n)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {}", self.rho)));
        }
        if !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("ball centre must be finite".into()));
        }
        Ok(())
    }

    /// `F(x − x₀)` for forward balls, `F(x₀ − x)` for backward balls.
    pub fn ball_distance(&self, x: [f64; 2]) -> f64 {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        match self.ball {
            BallKind::Forward => self.norm.eval(&d),
            BallKind::Backward => self.norm.eval(&[-d[0], -d[1]]),
        }
    }

    /// `F(x − x₀)`, the argument of the radial profiles.
    pub fn forward_distance(&self, x: [f64; 2]) -> f64 {
        self.norm.eval(&[x[0] - self.center[0], x[1] - self.center[1]])
    }

    /// Half-width of a square box centred at `x₀` containing the ball.
    fn half_width(&self) -> f64 {
        let sign = match self.ball {
            BallKind::Forward => 1.0,
            BallKind::Backward => -1.0,
        };
        let reach = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
            .iter()
            .map(|e: &[f64; 2]| self.norm.eval_dual(&[sign * e[0], sign * e[1]]))
            .fold(0.0, f64::max);
        // a few extra percent so the outermost ring is exterior
        self.rho * reach * 1.02
    }
}

#[derive(Debug, Clone, Copy)]
struct CornerTerm {
    c: u32,
    nx: u32,
    ny: u32,
    kx: f64,
    ky: f64,
}

/// Interior nodes, their numbering, and the per-corner difference stencils.
#[derive(Debug, Clone)]
pub struct Domain {
    pub n: usize,
    pub h: f64,
    origin: [f64; 2],
    index: Vec<u32>,
    nodes: Vec<[usize; 2]>,
    terms: Vec<CornerTerm>,
    diag: Vec<f64>,
}

impl Domain {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Grid indices `(i, j)` of interior node `k`.
    pub fn node(&self, k: usize) -> [usize; 2] {
        self.nodes[k]
    }

    pub fn coord(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    pub fn node_coord(&self, k: usize) -> [f64; 2] {
        let [i, j] = self.nodes[k];
        self.coord(i, j)
    }

    /// Interior index of grid node `(i, j)`, if it is interior.
    pub fn interior_index(&self, i: usize, j: usize) -> Option<usize> {
        let v = self.index[i * self.n + j];
        (v != EXTERIOR).then_some(v as usize)
    }

    /// Boolean mask in row-major `(i, j)` order.
    pub fn mask(&self) -> Vec<bool> {
        self.index.iter().map(|v| *v != EXTERIOR).collect()
    }
}

/// Classifies grid nodes and records the cut fraction of every edge that leaves the ball.
pub fn build_domain(p: &GridProblem) -> Result<Domain> {
    p.validate()?;
    let n = p.n;
    let half = p.half_width();
    let h = 2.0 * half / (n - 1) as f64;
    let origin = [p.center[0] - half, p.center[1] - half];
    let coord = |i: usize, j: usize| [origin[0] + i as f64 * h, origin[1] + j as f64 * h];

    let mut index = vec![EXTERIOR; n * n];
    let mut nodes = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if p.ball_distance(coord(i, j)) < p.rho {
                index[i * n + j] = nodes.len() as u32;
                nodes.push([i, j]);
            }
        }
    }
    if nodes.is_empty() {
        return Err(Error::Domain("the discrete ball has no interior nodes".into()));
    }
    if nodes.iter().any(|&[i, j]| i == 0 || j == 0 || i == n - 1 || j == n - 1) {
        return Err(Error::Domain("the ball touches the edge of the grid box".into()));
    }

    // fraction of the edge from x in direction e that stays inside the ball
    let cut = |x: [f64; 2], e: [f64; 2]| -> f64 {
        let f = |t: f64| p.ball_distance([x[0] + t * h * e[0], x[1] + t * h * e[1]]) - p.rho;
        bisect(f, 0.0, 1.0, 1e-15).unwrap_or(1.0)
    };

    let mut terms = Vec::with_capacity(4 * nodes.len());
    for (k, &[i, j]) in nodes.iter().enumerate() {
        let x = coord(i, j);
        // each interior node is a corner of the four cells around it
        for (si, sj) in [(1i64, 1i64), (-1, 1), (1, -1), (-1, -1)] {
            let ni = (i as i64 + si) as usize;
            let nj = (j as i64 + sj) as usize;
            let edge = |other: u32, e: [f64; 2], s: f64| -> (u32, f64) {
                if other != EXTERIOR {
                    (other, s / h)
                } else {
                    let t = cut(x, e).max(MIN_CUT);
                    (EXTERIOR, s * (2.0 * t).sqrt() / (t * h))
                }
            };
            let (nx, kx) = edge(index[ni * n + j], [si as f64, 0.0], si as f64);
            let (ny, ky) = edge(index[i * n + nj], [0.0, sj as f64], sj as f64);
            terms.push(CornerTerm { c: k as u32, nx, ny, kx, ky });
        }
    }

    let mut diag = vec![0.0; nodes.len()];
    for t in &terms {
        diag[t.c as usize] += t.kx * t.kx + t.ky * t.ky;
        if t.nx != EXTERIOR {
            diag[t.nx as usize] += t.kx * t.kx;
        }
        if t.ny != EXTERIOR {
            diag[t.ny as usize] += t.ky * t.ky;
        }
    }
    let scale = h * h / 4.0;
    diag.iter_mut().for_each(|d| *d *= scale);

    Ok(Domain { n, h, origin, index, nodes, terms, diag })
}

fn corner_gradient(t: &CornerTerm, u: &[f64]) -> [f64; 2] {
    let uc = u[t.c as usize];
    let ux = if t.nx == EXTERIOR { 0.0 } else { u[t.nx as usize] };
    let uy = if t.ny == EXTERIOR { 0.0 } else { u[t.ny as usize] };
    [t.kx * (ux - uc), t.ky * (uy - uc)]
}

/// Dirichlet part `Σ h²/4 · ½F*²(−g)`.
pub fn dirichlet_energy(norm: &MinkowskiNorm, dom: &Domain, u: &[f64]) -> f64 {
    let mut grad = [0.0; 2];
    let w = dom.h * dom.h / 8.0;
    dom.terms
        .iter()
        .map(|t| {
            let g = corner_gradient(t, u);
            w * norm.dual_sq_grad(&[-g[0], -g[1]], &mut grad)
        })
        .sum()
}

/// Discrete energy `Σ h²/4 · ½F*²(−g) − h² Σ u`.
pub fn energy(norm: &MinkowskiNorm, dom: &Domain, u: &[f64]) -> f64 {
    dirichlet_energy(norm, dom, u) - dom.h * dom.h * u.iter().sum::<f64>()
}

/// Co-metric of a 2-D Randers norm with its data unpacked for the inner loops.
struct Dual2 {
    h_inv: [f64; 3],
    beta_sharp: [f64; 2],
    s: f64,
}

impl Dual2 {
    fn new(norm: &MinkowskiNorm) -> Self {
        let h = norm.h();
        let det = h[0] * h[3] - h[1] * h[2];
        let h_inv = [h[3] / det, -h[1] / det, h[0] / det];
        let b = norm.beta();
        let beta_sharp = [h_inv[0] * b[0] + h_inv[1] * b[1], h_inv[1] * b[0] + h_inv[2] * b[1]];
        let b2 = b[0] * beta_sharp[0] + b[1] * beta_sharp[1];
        Dual2 { h_inv, beta_sharp, s: 1.0 - b2 }
    }

    /// `F*²(α)` and its gradient.
    #[inline]
    fn sq_grad(&self, a: [f64; 2]) -> (f64, [f64; 2]) {
        let ha = [self.h_inv[0] * a[0] + self.h_inv[1] * a[1], self.h_inv[1] * a[0] + self.h_inv[2] * a[1]];
        let aa = (a[0] * ha[0] + a[1] * ha[1]).max(0.0);
        let ab = a[0] * self.beta_sharp[0] + a[1] * self.beta_sharp[1];
        let q = ab * ab + self.s * aa;
        if q <= 0.0 {
            return (0.0, [0.0, 0.0]);
        }
        let sq = q.sqrt();
        let f = ((sq - ab) / self.s).max(0.0);
        let c = 2.0 * f / self.s;
        let g = [
            c * ((ab * self.beta_sharp[0] + self.s * ha[0]) / sq - self.beta_sharp[0]),
            c * ((ab * self.beta_sharp[1] + self.s * ha[1]) / sq - self.beta_sharp[1]),
        ];
        (f * f, g)
    }
}

/// Energy and its gradient with respect to the interior values.
pub fn energy_grad(norm: &MinkowskiNorm, dom: &Domain, u: &[f64], out: &mut [f64]) -> f64 {
    energy_grad_with(&Dual2::new(norm), dom, u, out)
}

fn energy_grad_with(dual: &Dual2, dom: &Domain, u: &[f64], out: &mut [f64]) -> f64 {
    let h2 = dom.h * dom.h;
    let w = h2 / 8.0;
    out.iter_mut().for_each(|g| *g = -h2);
    let mut e = 0.0;
    for t in &dom.terms {
        let g = corner_gradient(t, u);
        let (f2, d) = dual.sq_grad([-g[0], -g[1]]);
        e += w * f2;
        let ax = -w * d[0] * t.kx;
        let ay = -w * d[1] * t.ky;
        out[t.c as usize] -= ax + ay;
        if t.nx != EXTERIOR {
            out[t.nx as usize] += ax;
        }
        if t.ny != EXTERIOR {
            out[t.ny as usize] += ay;
        }
    }
    e - h2 * u.iter().sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Gradient,
    Stalled,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub stall_tol: f64,
    pub stall_window: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iter: 200_000, grad_tol: 1e-9, stall_tol: 1e-12, stall_window: 20 }
    }
}

/// Nodal solution values with solver diagnostics.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub u: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    /// Sup-norm of the diagonally scaled energy gradient, in units of `u`.
    pub residual: f64,
    pub stop: StopReason,
    pub energy_history: Vec<f64>,
}

impl GridSolution {
    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `true` when the recorded energies never increase.
    pub fn monotone(&self) -> bool {
        self.energy_history.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Minimizes the discrete energy starting from `u = 0`.
pub fn solve(p: &GridProblem, dom: &Domain) -> Result<GridSolution> {
    solve_from(p, dom, vec![0.0; dom.len()], SolveOptions::default())
}

/// Minimizes from a seeded random positive initial field.
pub fn solve_random_init(p: &GridProblem, dom: &Domain, seed: u64) -> Result<GridSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = 0.5 * p.rho * p.rho;
    let u0 = (0..dom.len()).map(|_| amp * rng.gen::<f64>()).collect();
    solve_from(p, dom, u0, SolveOptions::default())
}

/// Diagonally preconditioned nonlinear conjugate gradients (Polak–Ribière+). Each step
/// length comes from a two-point secant estimate of the directional derivative followed
/// by Armijo backtracking, so the energy decreases monotonically.
pub fn solve_from(p: &GridProblem, dom: &Domain, u0: Vec<f64>, opts: SolveOptions) -> Result<GridSolution> {
    if u0.len() != dom.len() {
        return Err(Error::InvalidArgument("initial field does not match the domain".into()));
    }
    crate::error::ensure_finite("initial field", &u0)?;
    let m = dom.len();
    let dual = Dual2::new(&p.norm);
    let eval = |u: &[f64], g: &mut [f64]| energy_grad_with(&dual, dom, u, g);
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let precondition = |g: &[f64]| -> Vec<f64> { g.iter().zip(&dom.diag).map(|(a, d)| a / d).collect() };

    let mut u = u0;
    let mut g = vec![0.0; m];
    let mut e = eval(&u, &mut g);
    let mut z = precondition(&g);
    let mut dir: Vec<f64> = z.iter().map(|v| -v).collect();
    let mut gz = dot(&g, &z);
    let mut history = vec![e];
    let mut trial = vec![0.0; m];
    let mut g_trial = vec![0.0; m];
    let mut step = 1.0;

    for iter in 0..opts.max_iter {
        let residual = sup(&z);
        if residual <= opts.grad_tol * (1.0 + sup(&u)) {
            return finish(u, e, iter, residual, StopReason::Gradient, history);
        }
        let w = opts.stall_window;
        if history.len() > w && history[history.len() - 1 - w] - e <= opts.stall_tol * e.abs() {
            return finish(u, e, iter, residual, StopReason::Stalled, history);
        }
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            dir.iter_mut().zip(&z).for_each(|(d, v)| *d = -v);
            slope = -gz;
        }
        let probe = |a: f64, trial: &mut [f64], g_trial: &mut [f64]| {
            for k in 0..m {
                trial[k] = u[k] + a * dir[k];
            }
            eval(trial, g_trial)
        };
        let e_probe = probe(step, &mut trial, &mut g_trial);
        let slope_probe = dot(&g_trial, &dir);
        let probe_ok = e_probe <= e + 1e-4 * step * slope;
        let mut alpha = if slope_probe > slope { step * slope / (slope - slope_probe) } else { 2.0 * step };
        let mut e_new = probe(alpha, &mut trial, &mut g_trial);
        let mut tries = 0;
        while !(e_new <= e + 1e-4 * alpha * slope) {
            alpha = if probe_ok && tries == 0 { step } else { 0.5 * alpha.min(step) };
            e_new = probe(alpha, &mut trial, &mut g_trial);
            tries += 1;
            if tries > 60 {
                // no representable decrease along this direction
                return finish(u, e, iter, residual, StopReason::Stalled, history);
            }
        }
        step = alpha;
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut g, &mut g_trial);
        e = e_new;
        history.push(e);
        let z_new = precondition(&g);
        let gz_new = dot(&g, &z_new);
        let beta = ((gz_new - dot(&g_trial, &z_new)) / gz).max(0.0);
        for k in 0..m {
            dir[k] = -z_new[k] + beta * dir[k];
        }
        z = z_new;
        gz = gz_new;
    }
    Err(Error::AccuracyFailure(format!("grid solver did not converge in {} iterations", opts.max_iter)))
}

fn finish(
    u: Vec<f64>,
    energy: f64,
    iterations: usize,
    residual: f64,
    stop: StopReason,
    energy_history: Vec<f64>,
) -> Result<GridSolution> {
    let max = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let min = u.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-9 * max {
        return Err(Error::AccuracyFailure(format!("discrete solution has a negative value {min:e}")));
    }
    Ok(GridSolution { u, energy, iterations, residual, stop, energy_history })
}

/// `(ρ² − F(x−x₀)²)/4`, the exact solution on a forward ball.
pub fn forward_profile(p: &GridProblem, x: [f64; 2]) -> f64 {
    let f = p.forward_distance(x);
    (p.rho * p.rho - f * f) / 4.0
}

/// Sup-norm error against the forward-ball profile, relative to the profile maximum.
pub fn forward_error(p: &GridProblem, dom: &Domain, u: &[f64]) -> f64 {
    let mut err = 0.0f64;
    let mut peak = 0.0f64;
    for (k, v) in u.iter().enumerate() {
        let ex = forward_profile(p, dom.node_coord(k));
        err = err.max((v - ex).abs());
        peak = peak.max(ex.abs());
    }
    err / peak
}

/// `((ρ/r_F)² − F²)₊/4` and `((r_F ρ)² − F²)/4` at `x`, with `F = F(x − x₀)`.
pub fn sandwich_bounds(p: &GridProblem, x: [f64; 2]) -> (f64, f64) {
    let r = p.norm.reversibility();
    let f = p.forward_distance(x);
    let lo = ((p.rho / r).powi(2) - f * f).max(0.0) / 4.0;
    let hi = ((r * p.rho).powi(2) - f * f) / 4.0;
    (lo, hi)
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub nodes: usize,
    /// `min (u − lower)` over interior nodes.
    pub lower_slack: f64,
    /// `min (upper − u)` over interior nodes.
    pub upper_slack: f64,
    pub min_u: f64,
    /// Interior nodes where the lower bound is positive.
    pub lower_active: usize,
}

impl SandwichReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower_slack >= -slack && self.upper_slack >= -slack && self.min_u >= 0.0
    }
}

pub fn backward_sandwich(p: &GridProblem, dom: &Domain, u: &[f64]) -> SandwichReport {
    let mut rep = SandwichReport {
        nodes: u.len(),
        lower_slack: f64::INFINITY,
        upper_slack: f64::INFINITY,
        min_u: f64::INFINITY,
        lower_active: 0,
    };
    for (k, v) in u.iter().enumerate() {
        let (lo, hi) = sandwich_bounds(p, dom.node_coord(k));
        rep.lower_slack = rep.lower_slack.min(v - lo);
        rep.upper_slack = rep.upper_slack.min(hi - v);
        rep.min_u = rep.min_u.min(*v);
        if lo > 0.0 {
            rep.lower_active += 1;
        }
    }
    rep
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub uniformity: f64,
    /// Largest `E(tu+(1−t)v) − [tE(u)+(1−t)E(v) − l_F t(1−t) Q(v−u)]` over the probed `t`.
    pub max_excess: f64,
    /// `[E(u)+E(v)]/2 − E((u+v)/2)`.
    pub midpoint_gap: f64,
    /// Scale of the energies involved, for relative comparisons.
    pub scale: f64,
}

/// Uniform convexity of the Dirichlet energy along the segment from `v` to `u`.
pub fn convexity_probe(p: &GridProblem, dom: &Domain, u: &[f64], v: &[f64], ts: &[f64]) -> Result<ConvexityReport> {
    if u.len() != dom.len() || v.len() != dom.len() {
        return Err(Error::InvalidArgument("grid functions do not match the domain".into()));
    }
    let l = p.norm.uniformity();
    let e = |w: &[f64]| dirichlet_energy(&p.norm, dom, w);
    let (eu, ev) = (e(u), e(v));
    let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let q = e(&diff);
    let mut max_excess = f64::NEG_INFINITY;
    for &t in ts {
        let mix: Vec<f64> = u.iter().zip(v).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let excess = e(&mix) - (t * eu + (1.0 - t) * ev - l * t * (1.0 - t) * q);
        max_excess = max_excess.max(excess);
    }
    let mid: Vec<f64> = u.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect();
    let midpoint_gap = 0.5 * (eu + ev) - e(&mid);
    Ok(ConvexityReport { uniformity: l, max_excess, midpoint_gap, scale: eu.abs().max(ev.abs()).max(q.abs()) })
}

/// One exported node: grid indices, coordinates, value and sandwich bounds.
#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

pub fn grid_rows(p: &GridProblem, dom: &Domain, u: &[f64]) -> Vec<GridRow> {
    u.iter()
        .enumerate()
        .map(|(k, &v)| {
            let [i, j] = dom.node(k);
            let x = dom.coord(i, j);
            let (lo, hi) = sandwich_bounds(p, x);
            GridRow { i, j, x: x[0], y: x[1], u: v, lower_bound: lo, upper_bound: hi }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_has_zero_energy() {
        let p = GridProblem::randers(0.3, 1.0, BallKind::Forward, 65).unwrap();
        let d = build_domain(&p).unwrap();
        assert_eq!(energy(&p.norm, &d, &vec![0.0; d.len()]), 0.0);
    }

    #[test]
    fn gradient_matches_differences() {
        let p = GridProblem::randers(0.4, 1.0, BallKind::Backward, 65).unwrap();
        let d = build_domain(&p).unwrap();
        let u: Vec<f64> = (0..d.len()).map(|k| 0.05 + 0.01 * ((k * 7919) % 13) as f64).collect();
        let mut g = vec![0.0; d.len()];
        energy_grad(&p.norm, &d, &u, &mut g);
        for k in [0, d.len() / 3, d.len() / 2, d.len() - 1] {
            let mut a = u.clone();
            let mut b = u.clone();
            a[k] += 1e-6;
            b[k] -= 1e-6;
            let fd = (energy(&p.norm, &d, &a) - energy(&p.norm, &d, &b)) / 2e-6;
            assert!((fd - g[k]).abs() < 1e-7 * (1.0 + g[k].abs()), "{fd} vs {}", g[k]);
        }
    }

    #[test]
    fn euclidean_masks_coincide_and_backward_reflects() {
        let f = build_domain(&GridProblem::randers(0.0, 1.0, BallKind::Forward, 65).unwrap()).unwrap();
        let b = build_domain(&GridProblem::randers(0.0, 1.0, BallKind::Backward, 65).unwrap()).unwrap();
        assert_eq!(f.mask(), b.mask());
        let f = build_domain(&GridProblem::randers(0.3, 1.0, BallKind::Forward, 65).unwrap()).unwrap();
        let b = build_domain(&GridProblem::randers(0.3, 1.0, BallKind::Backward, 65).unwrap()).unwrap();
        let n = f.n;
        for i in 0..n {
            for j in 0..n {
                assert_eq!(f.interior_index(i, j).is_some(), b.interior_index(n - 1 - i, n - 1 - j).is_some());
            }
        }
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(GridProblem::randers(0.3, 1.0, BallKind::Forward, 64).is_err());
        assert!(GridProblem::randers(0.3, 1.0, BallKind::Forward, 33).is_err());
        assert!(GridProblem::randers(0.3, -1.0, BallKind::Forward, 65).is_err());
        assert!(GridProblem::randers(1.2, 1.0, BallKind::Forward, 65).is_err());
        assert!("sideways".parse::<BallKind>().is_err());
    }

    #[test]
    fn euclidean_parallelogram_identity() {
        let p = GridProblem::randers(0.0, 1.0, BallKind::Forward, 65).unwrap();
        let d = build_domain(&p).unwrap();
        let u: Vec<f64> = (0..d.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        let v: Vec<f64> = (0..d.len()).map(|k| (k as f64 * 0.11).cos()).collect();
        let r = convexity_probe(&p, &d, &u, &v, &[0.1, 0.5, 0.9]).unwrap();
        assert!(r.max_excess.abs() < 1e-12 * r.scale);
    }
}
