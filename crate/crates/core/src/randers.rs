//! Randers norms `F(x, y) = √(yᵀ h(x) y) + β_x(y)`, their duals and derived constants.

use crate::error::{ensure_finite, Error, Result};
use crate::linalg;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Field of Riemannian metrics and one-forms: `x ↦ (h(x) row-major, β(x))`.
pub type FieldFn = dyn Fn(&[f64]) -> Result<(Vec<f64>, Vec<f64>)> + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    MinkowskiRanders,
    PoincareDisc,
    Euclidean,
    Custom,
}

/// JSON form of a structure: `{"dim", "kind", "b", "h"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDescriptor {
    pub dim: usize,
    pub kind: StructureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<Vec<f64>>>,
}

#[derive(Clone)]
enum Field {
    Constant(MinkowskiNorm),
    PoincareDisc,
    Custom(Arc<FieldFn>),
}

/// A Randers structure on an open subset of `Rⁿ`. Immutable and cheap to clone.
#[derive(Clone)]
pub struct RandersStructure {
    dim: usize,
    kind: StructureKind,
    field: Field,
}

impl fmt::Debug for RandersStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandersStructure").field("dim", &self.dim).field("kind", &self.kind).finish()
    }
}

fn identity(dim: usize) -> Vec<f64> {
    let mut h = vec![0.0; dim * dim];
    for i in 0..dim {
        h[i * dim + i] = 1.0;
    }
    h
}

impl RandersStructure {
    pub fn euclidean(dim: usize) -> Self {
        let norm = MinkowskiNorm::new(dim, &identity(dim), &vec![0.0; dim]).expect("identity is valid");
        RandersStructure { dim, kind: StructureKind::Euclidean, field: Field::Constant(norm) }
    }

    /// Translation-invariant Randers norm with metric `h` (row-major) and one-form `b`.
    pub fn minkowski(h: &[f64], b: &[f64]) -> Result<Self> {
        let dim = b.len();
        let norm = MinkowskiNorm::new(dim, h, b)?;
        Ok(RandersStructure { dim, kind: StructureKind::MinkowskiRanders, field: Field::Constant(norm) })
    }

    /// Minkowski–Randers norm `|y| + b·y` over the Euclidean metric.
    pub fn randers_euclidean(b: &[f64]) -> Result<Self> {
        Self::minkowski(&identity(b.len()), b)
    }

    /// The Finsler–Poincaré disc on `B²(0, 2)`.
    pub fn poincare_disc() -> Self {
        RandersStructure { dim: 2, kind: StructureKind::PoincareDisc, field: Field::PoincareDisc }
    }

    /// Structure with user supplied fields; validated lazily at every evaluation.
    pub fn custom(dim: usize, field: Arc<FieldFn>) -> Self {
        RandersStructure { dim, kind: StructureKind::Custom, field: Field::Custom(field) }
    }

    pub fn from_descriptor(d: &StructureDescriptor) -> Result<Self> {
        if d.dim == 0 {
            return Err(Error::InvalidArgument("dim must be positive".into()));
        }
        let h_flat = match &d.h {
            Some(rows) => {
                if rows.len() != d.dim || rows.iter().any(|r| r.len() != d.dim) {
                    return Err(Error::InvalidArgument(format!("h must be {0}x{0}", d.dim)));
                }
                rows.concat()
            }
            None => identity(d.dim),
        };
        let b = d.b.clone().unwrap_or_else(|| vec![0.0; d.dim]);
        if b.len() != d.dim {
            return Err(Error::InvalidArgument(format!("b must have {} components", d.dim)));
        }
        match d.kind {
            StructureKind::Euclidean => {
                if b.iter().any(|v| *v != 0.0) || d.h.is_some() {
                    return Err(Error::InvalidArgument("euclidean structure takes no b or h".into()));
                }
                Ok(Self::euclidean(d.dim))
            }
            StructureKind::MinkowskiRanders => Self::minkowski(&h_flat, &b),
            StructureKind::PoincareDisc => {
                if d.dim != 2 || d.b.is_some() || d.h.is_some() {
                    return Err(Error::InvalidArgument("poincare_disc is 2-D with no b or h".into()));
                }
                Ok(Self::poincare_disc())
            }
            StructureKind::Custom => {
                Err(Error::InvalidArgument("custom structures can only be built programmatically".into()))
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: StructureDescriptor = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::from_descriptor(&d)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    pub fn is_minkowski(&self) -> bool {
        matches!(self.field, Field::Constant(_))
    }

    /// The Minkowski norm on the tangent space at `x`.
    pub fn at(&self, x: &[f64]) -> Result<MinkowskiNorm> {
        if x.len() != self.dim {
            return Err(Error::InvalidArgument(format!("point must have {} coordinates", self.dim)));
        }
        ensure_finite("base point", x)?;
        match &self.field {
            Field::Constant(n) => Ok(n.clone()),
            Field::PoincareDisc => {
                let (h, b) = poincare_fields(x)?;
                MinkowskiNorm::new(2, &h, &b)
            }
            Field::Custom(f) => {
                let (h, b) = f(x)?;
                MinkowskiNorm::new(self.dim, &h, &b)
            }
        }
    }

    pub fn eval_f(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.at(x)?.eval_checked(y)
    }

    pub fn eval_f_dual(&self, x: &[f64], alpha: &[f64]) -> Result<f64> {
        self.at(x)?.eval_dual_checked(alpha)
    }

    pub fn eval_f_sym(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let n = self.at(x)?;
        n.check_vec(y)?;
        Ok(n.eval_sym(y))
    }

    pub fn eval_f_sym_dual(&self, x: &[f64], alpha: &[f64]) -> Result<f64> {
        let n = self.at(x)?;
        n.check_vec(alpha)?;
        Ok(n.eval_sym_dual(alpha))
    }

    pub fn legendre(&self, x: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
        self.at(x)?.legendre(alpha)
    }

    pub fn reversibility(&self, x: &[f64]) -> Result<f64> {
        Ok(self.at(x)?.reversibility())
    }

    pub fn uniformity(&self, x: &[f64]) -> Result<f64> {
        Ok(self.at(x)?.uniformity())
    }

    pub fn hausdorff_density(&self, x: &[f64]) -> Result<f64> {
        Ok(self.at(x)?.hausdorff_density())
    }
}

fn poincare_fields(x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 >= 4.0 {
        return Err(Error::Domain(format!("point ({}, {}) lies outside the disc of radius 2", x[0], x[1])));
    }
    let a = 16.0 / ((4.0 - r2) * (4.0 - r2));
    let c = 16.0 / (16.0 - r2 * r2);
    Ok((vec![a, 0.0, 0.0, a], vec![c * x[0], c * x[1]]))
}

/// A Randers norm on a single tangent space, with its co-metric precomputed.
#[derive(Debug, Clone)]
pub struct MinkowskiNorm {
    dim: usize,
    h: Vec<f64>,
    h_inv: Vec<f64>,
    beta: Vec<f64>,
    beta_sharp: Vec<f64>,
    b2: f64,
    sqrt_det_h: f64,
}

impl MinkowskiNorm {
    pub fn new(dim: usize, h: &[f64], beta: &[f64]) -> Result<Self> {
        if dim == 0 || beta.len() != dim || h.len() != dim * dim {
            return Err(Error::InvalidArgument("dimension mismatch in metric data".into()));
        }
        ensure_finite("metric", h)?;
        ensure_finite("one-form", beta)?;
        let l = linalg::cholesky(h, dim)?;
        let h_inv = linalg::inverse_spd(&l, dim);
        let beta_sharp = linalg::mat_vec(&h_inv, dim, beta);
        let b2 = linalg::dot(beta, &beta_sharp);
        if !(b2 < 1.0) {
            return Err(Error::InvalidStructure(format!("‖β‖_h = {} is not below 1", b2.sqrt())));
        }
        let sqrt_det_h = (0..dim).map(|i| l[i * dim + i]).product();
        Ok(MinkowskiNorm { dim, h: h.to_vec(), h_inv, beta: beta.to_vec(), beta_sharp, b2, sqrt_det_h })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `‖β‖_h`.
    pub fn beta_norm(&self) -> f64 {
        self.b2.sqrt()
    }

    fn check_vec(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::InvalidArgument(format!("expected {} components", self.dim)));
        }
        ensure_finite("components", v)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        linalg::quad_form(&self.h, self.dim, y, y).max(0.0).sqrt() + linalg::dot(&self.beta, y)
    }

    pub fn eval_checked(&self, y: &[f64]) -> Result<f64> {
        self.check_vec(y)?;
        Ok(self.eval(y))
    }

    /// `(h*(α,β), ‖α‖²_{h*})`.
    fn dual_parts(&self, alpha: &[f64]) -> (f64, f64) {
        let ab = linalg::dot(alpha, &self.beta_sharp);
        let aa = linalg::quad_form(&self.h_inv, self.dim, alpha, alpha).max(0.0);
        (ab, aa)
    }

    pub fn eval_dual(&self, alpha: &[f64]) -> f64 {
        let (ab, aa) = self.dual_parts(alpha);
        let s = 1.0 - self.b2;
        (((ab * ab + s * aa).sqrt() - ab) / s).max(0.0)
    }

    pub fn eval_dual_checked(&self, alpha: &[f64]) -> Result<f64> {
        self.check_vec(alpha)?;
        Ok(self.eval_dual(alpha))
    }

    pub fn eval_sym(&self, y: &[f64]) -> f64 {
        let by = linalg::dot(&self.beta, y);
        (linalg::quad_form(&self.h, self.dim, y, y) + by * by).max(0.0).sqrt()
    }

    pub fn eval_sym_dual(&self, alpha: &[f64]) -> f64 {
        let (ab, aa) = self.dual_parts(alpha);
        (aa - ab * ab / (1.0 + self.b2)).max(0.0).sqrt()
    }

    /// `F*²(α)` and its gradient `2 J*(α)`, written into `grad`.
    pub fn dual_sq_grad(&self, alpha: &[f64], grad: &mut [f64]) -> f64 {
        let (ab, aa) = self.dual_parts(alpha);
        let s = 1.0 - self.b2;
        let q = ab * ab + s * aa;
        if q <= 0.0 {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return 0.0;
        }
        let sq = q.sqrt();
        let fd = ((sq - ab) / s).max(0.0);
        let n = self.dim;
        for ((g, row), bs) in grad.iter_mut().zip(self.h_inv.chunks_exact(n)).zip(&self.beta_sharp) {
            let dfi = ((ab * bs + s * linalg::dot(row, alpha)) / sq - bs) / s;
            *g = 2.0 * fd * dfi;
        }
        fd * fd
    }

    /// Legendre transform `J*(α) = ∇(½F*²)(α)` in closed form.
    pub fn legendre(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        self.check_vec(alpha)?;
        if alpha.iter().all(|a| *a == 0.0) {
            return Err(Error::UndefinedDirection("Legendre transform at the zero covector".into()));
        }
        let mut g = vec![0.0; self.dim];
        self.dual_sq_grad(alpha, &mut g);
        g.iter_mut().for_each(|v| *v *= 0.5);
        Ok(g)
    }

    /// Legendre transform by central differences of `½F*²` with relative step `1e-6·‖α‖`.
    pub fn legendre_fd(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        self.check_vec(alpha)?;
        let norm = linalg::dot(alpha, alpha).sqrt();
        if norm == 0.0 {
            return Err(Error::UndefinedDirection("Legendre transform at the zero covector".into()));
        }
        let step = 1e-6 * norm;
        let mut a = alpha.to_vec();
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let orig = a[i];
            a[i] = orig + step;
            let fp = self.eval_dual(&a);
            a[i] = orig - step;
            let fm = self.eval_dual(&a);
            a[i] = orig;
            out[i] = 0.25 * (fp * fp - fm * fm) / step;
        }
        Ok(out)
    }

    /// Reversibility `(1+b)/(1−b)` with `b = ‖β‖_h`.
    pub fn reversibility(&self) -> f64 {
        let b = self.beta_norm();
        (1.0 + b) / (1.0 - b)
    }

    /// Uniformity `((1−b)/(1+b))²`.
    pub fn uniformity(&self) -> f64 {
        let b = self.beta_norm();
        let t = (1.0 - b) / (1.0 + b);
        t * t
    }

    /// Hausdorff density `(1−b²)^{(n+1)/2} √det h`.
    pub fn hausdorff_density(&self) -> f64 {
        (1.0 - self.b2).powf(0.5 * (self.dim as f64 + 1.0)) * self.sqrt_det_h
    }

    /// Fundamental tensor `g_y = Hess(½F²)(y)` (row-major), `y ≠ 0`.
    pub fn fundamental_tensor(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let hy = linalg::mat_vec(&self.h, n, y);
        let a = linalg::quad_form(&self.h, n, y, y).sqrt();
        let f = a + linalg::dot(&self.beta, y);
        let l: Vec<f64> = (0..n).map(|i| hy[i] / a + self.beta[i]).collect();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = f / a * (self.h[i * n + j] - hy[i] * hy[j] / (a * a)) + l[i] * l[j];
            }
        }
        g
    }
}

/// Volume of the Euclidean unit ball in `Rⁿ`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> RandersStructure {
        RandersStructure::randers_euclidean(&[0.5, 0.0]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let s = half();
        let o = [0.0, 0.0];
        assert!((s.eval_f(&o, &[1.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
        assert!((s.eval_f(&o, &[-1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((s.reversibility(&o).unwrap() - 3.0).abs() < 1e-14);
        assert!((s.uniformity(&o).unwrap() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn dual_examples() {
        let s = half();
        let o = [0.0, 0.0];
        assert!((s.eval_f_dual(&o, &[1.0, 0.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.eval_f_dual(&o, &[-1.0, 0.0]).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(s.eval_f_dual(&o, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn symmetrized_example() {
        let s = half();
        let v = s.eval_f_sym(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((v - 5f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn legendre_example_and_fd_agreement() {
        let n = half().at(&[0.0, 0.0]).unwrap();
        let j = n.legendre(&[1.0, 0.0]).unwrap();
        assert!((j[0] - 4.0 / 9.0).abs() < 1e-15 && j[1].abs() < 1e-15);
        assert!((n.eval(&j) - 2.0 / 3.0).abs() < 1e-14);
        let jf = n.legendre_fd(&[0.3, -0.8]).unwrap();
        let jc = n.legendre(&[0.3, -0.8]).unwrap();
        for i in 0..2 {
            assert!((jf[i] - jc[i]).abs() < 1e-8);
        }
        assert!(n.legendre(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn invalid_structures_rejected() {
        assert!(matches!(RandersStructure::randers_euclidean(&[0.6, 0.8]), Err(Error::InvalidStructure(_))));
        assert!(RandersStructure::minkowski(&[1.0, 0.0, 0.0, -1.0], &[0.0, 0.0]).is_err());
        let s = half();
        assert!(matches!(s.eval_f(&[0.0, 0.0], &[f64::NAN, 0.0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(RandersStructure::poincare_disc().eval_f(&[2.0, 0.0], &[1.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn descriptor_round_trip() {
        let s = RandersStructure::from_json(r#"{"dim":2,"kind":"minkowski_randers","b":[0.3,0]}"#).unwrap();
        assert_eq!(s.kind(), StructureKind::MinkowskiRanders);
        assert!((s.eval_f(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - 1.3).abs() < 1e-15);
        assert!(RandersStructure::from_json(r#"{"dim":2,"kind":"custom"}"#).is_err());
        assert!(RandersStructure::from_json(r#"{"dim":2,"kind":"euclidean","x":1}"#).is_err());
        let d = RandersStructure::from_json(r#"{"dim":2,"kind":"poincare_disc"}"#).unwrap();
        assert!(!d.is_minkowski());
    }

    #[test]
    fn randers_density_closed_form() {
        let s = RandersStructure::randers_euclidean(&[0.3, 0.0]).unwrap();
        let d = s.hausdorff_density(&[0.0, 0.0]).unwrap();
        assert!((d - 0.91f64.powf(1.5)).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn custom_field_is_validated_per_point() {
        let s = RandersStructure::custom(2, Arc::new(|x: &[f64]| Ok((vec![1.0, 0.0, 0.0, 1.0], vec![x[0], 0.0]))));
        assert!(s.eval_f(&[0.5, 0.0], &[1.0, 0.0]).is_ok());
        assert!(matches!(s.eval_f(&[1.5, 0.0], &[1.0, 0.0]), Err(Error::InvalidStructure(_))));
    }

    #[test]
    fn fundamental_tensor_is_hessian() {
        let n = RandersStructure::randers_euclidean(&[0.4, -0.2]).unwrap().at(&[0.0, 0.0]).unwrap();
        let y = [0.7, 0.3];
        let g = n.fundamental_tensor(&y);
        let e = 1e-4;
        let half_sq = |v: &[f64]| 0.5 * n.eval(v).powi(2);
        let shifted = |di: f64, dj: f64, i: usize, j: usize| {
            let mut p = y;
            p[i] += di;
            p[j] += dj;
            half_sq(&p)
        };
        for i in 0..2 {
            for j in 0..2 {
                let fd = (shifted(e, e, i, j) - shifted(e, -e, i, j) - shifted(-e, e, i, j) + shifted(-e, -e, i, j))
                    / (4.0 * e * e);
                assert!((fd - g[i * 2 + j]).abs() < 1e-6, "{i}{j}: {fd} vs {}", g[i * 2 + j]);
            }
        }
    }
}
