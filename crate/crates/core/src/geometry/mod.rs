//! Model 4-manifolds: flat T⁴, round S⁴ and conformal deformations of either.

mod field;
pub mod sphere;
pub mod torus;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use field::ScalarField;
use sphere::{HarmonicMode, SphereGrid};
use torus::{FourierMode, TorusGrid};

use crate::error::{Error, Result};

/// A point of the model. Torus points carry periodic coordinates in [0, 2πr)⁴;
/// sphere points are unit vectors of ℝ⁵ (the radius lives on the manifold).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointOnM {
    Torus([f64; 4]),
    Sphere([f64; 5]),
}

impl PointOnM {
    /// Sphere point from hyperspherical angles (θ₁, θ₂, θ₃, φ).
    pub fn sphere_from_angles(t1: f64, t2: f64, t3: f64, phi: f64) -> Self {
        let (s1, s2, s3) = (t1.sin(), t2.sin(), t3.sin());
        PointOnM::Sphere([
            s1 * s2 * s3 * phi.cos(),
            s1 * s2 * s3 * phi.sin(),
            s1 * s2 * t3.cos(),
            s1 * t2.cos(),
            t1.cos(),
        ])
    }

    pub fn angles(&self) -> Option<[f64; 4]> {
        match self {
            PointOnM::Sphere(x) => {
                let r1 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
                let r2 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let r3 = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let mut phi = x[1].atan2(x[0]);
                if phi < 0.0 {
                    phi += 2.0 * PI;
                }
                Some([r1.atan2(x[4]), r2.atan2(x[3]), r3.atan2(x[2]), phi])
            }
            PointOnM::Torus(_) => None,
        }
    }

    pub fn north() -> Self {
        PointOnM::Sphere([0.0, 0.0, 0.0, 0.0, 1.0])
    }

    pub fn antipode(&self) -> Option<Self> {
        match self {
            PointOnM::Sphere(x) => Some(PointOnM::Sphere([-x[0], -x[1], -x[2], -x[3], -x[4]])),
            PointOnM::Torus(_) => None,
        }
    }
}

/// Tangent vectors: coordinate vectors on the torus (fifth slot zero),
/// ambient vectors orthogonal to the base point on the sphere.
pub type Tangent = [f64; 5];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Torus,
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisMode {
    Fourier(FourierMode),
    Harmonic(HarmonicMode),
}

impl BasisMode {
    pub fn is_constant(&self) -> bool {
        match self {
            BasisMode::Fourier(m) => m.norm_sq() == 0,
            BasisMode::Harmonic(h) => h.l1 == 0,
        }
    }
}

/// One term a·e_i of a conformal factor expanded in the base basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorTerm {
    pub mode: usize,
    pub amplitude: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldSpec {
    /// "torus", "sphere" or "conformal"
    pub kind: String,
    pub resolution: i64,
    #[serde(default)]
    pub radius: Option<f64>,
    /// base kind for "conformal"
    #[serde(default)]
    pub base: Option<String>,
    #[serde(default)]
    pub conformal_factor: Option<Vec<FactorTerm>>,
}

pub(crate) enum Grid {
    Torus(TorusGrid),
    Sphere(SphereGrid),
}

pub(crate) struct Conformal {
    pub w: Vec<f64>,
}

pub struct ModelManifold {
    pub(crate) grid: Grid,
    pub(crate) nodes: Vec<PointOnM>,
    pub(crate) weights: Vec<f64>,
    pub(crate) conformal: Option<Conformal>,
    scalar_curvature: Vec<f64>,
    ricci_sq: Vec<f64>,
    laplace_scalar: Vec<f64>,
    weyl_sq: Vec<f64>,
    volume: f64,
    euler: i32,
}

impl std::fmt::Debug for ModelManifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelManifold")
            .field("kind", &self.kind())
            .field("resolution", &self.resolution())
            .field("radius", &self.radius())
            .field("conformal", &self.conformal.is_some())
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl ModelManifold {
    pub fn build(spec: &ManifoldSpec) -> Result<Arc<Self>> {
        if spec.resolution <= 0 {
            return Err(Error::InvalidSpec(format!("non-positive resolution {}", spec.resolution)));
        }
        if spec.resolution < 4 {
            return Err(Error::InvalidSpec(format!("resolution {} below 4", spec.resolution)));
        }
        let radius = spec.radius.unwrap_or(1.0);
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSpec(format!("radius {radius} must be positive")));
        }
        let res = spec.resolution as usize;
        match spec.kind.as_str() {
            "torus" => Ok(Self::torus(res, radius)),
            "sphere" => Ok(Self::sphere(res, radius)),
            "conformal" => {
                let base = match spec.base.as_deref() {
                    Some("torus") => Self::torus(res, radius),
                    Some("sphere") => Self::sphere(res, radius),
                    other => return Err(Error::InvalidSpec(format!("unknown conformal base {other:?}"))),
                };
                let terms = spec.conformal_factor.clone().unwrap_or_default();
                let mut coeffs = vec![0.0; base.basis_len()];
                for t in terms {
                    if t.mode >= coeffs.len() {
                        return Err(Error::InvalidSpec(format!("factor mode {} out of range", t.mode)));
                    }
                    coeffs[t.mode] += t.amplitude;
                }
                let w = ScalarField::from_coefficients(&base, coeffs)?;
                base.conformal_rescale(&w)
            }
            other => Err(Error::InvalidSpec(format!("unknown manifold kind '{other}'"))),
        }
    }

    pub fn torus(n: usize, radius: f64) -> Arc<Self> {
        let g = TorusGrid::new(n, radius);
        let count = g.node_count();
        let nodes = (0..count).map(|i| PointOnM::Torus(g.node(i))).collect();
        let weights = vec![g.cell_weight(); count];
        let volume = g.volume();
        Arc::new(ModelManifold {
            grid: Grid::Torus(g),
            nodes,
            weights,
            conformal: None,
            scalar_curvature: vec![0.0; count],
            ricci_sq: vec![0.0; count],
            laplace_scalar: vec![0.0; count],
            weyl_sq: vec![0.0; count],
            volume,
            euler: 0,
        })
    }

    pub fn sphere(degree: usize, radius: f64) -> Arc<Self> {
        let g = SphereGrid::new(degree, radius);
        let count = g.node_count();
        let nodes = (0..count).map(|i| PointOnM::Sphere(g.node(i))).collect();
        let weights: Vec<f64> = (0..count).map(|i| g.node_weight(i)).collect();
        let volume = g.volume();
        let a2 = radius * radius;
        Arc::new(ModelManifold {
            grid: Grid::Sphere(g),
            nodes,
            weights,
            conformal: None,
            scalar_curvature: vec![12.0 / a2; count],
            // Ric = (3/a²) g, so |Ric|² = 4·9/a⁴
            ricci_sq: vec![36.0 / (a2 * a2); count],
            laplace_scalar: vec![0.0; count],
            weyl_sq: vec![0.0; count],
            volume,
            euler: 2,
        })
    }

    pub fn kind(&self) -> Kind {
        match self.grid {
            Grid::Torus(_) => Kind::Torus,
            Grid::Sphere(_) => Kind::Sphere,
        }
    }

    pub fn is_conformal(&self) -> bool {
        self.conformal.is_some()
    }

    pub fn resolution(&self) -> usize {
        match &self.grid {
            Grid::Torus(g) => g.n,
            Grid::Sphere(g) => g.degree,
        }
    }

    pub fn radius(&self) -> f64 {
        match &self.grid {
            Grid::Torus(g) => g.radius,
            Grid::Sphere(g) => g.radius,
        }
    }

    pub fn nodes(&self) -> &[PointOnM] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Quadrature weights of the (possibly rescaled) volume form.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Analytic volume: (2πr)⁴, 8π²a⁴/3, or the quadrature of e^{4w} for conformal models.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn euler_characteristic(&self) -> i32 {
        self.euler
    }

    pub fn scalar_curvature(&self) -> &[f64] {
        &self.scalar_curvature
    }

    pub fn ricci_norm_sq(&self) -> &[f64] {
        &self.ricci_sq
    }

    pub fn laplacian_of_scalar_curvature(&self) -> &[f64] {
        &self.laplace_scalar
    }

    pub fn weyl_sq(&self) -> &[f64] {
        &self.weyl_sq
    }

    /// Ricci = c·g on the unscaled models.
    pub fn einstein_constant(&self) -> Option<f64> {
        if self.is_conformal() {
            return None;
        }
        match self.kind() {
            Kind::Torus => Some(0.0),
            Kind::Sphere => Some(3.0 / self.radius().powi(2)),
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        PI * self.radius()
    }

    pub fn basis_len(&self) -> usize {
        match &self.grid {
            Grid::Torus(g) => g.modes.len(),
            Grid::Sphere(g) => g.modes.len(),
        }
    }

    pub fn basis_mode(&self, i: usize) -> BasisMode {
        match &self.grid {
            Grid::Torus(g) => BasisMode::Fourier(g.modes[i]),
            Grid::Sphere(g) => BasisMode::Harmonic(g.modes[i]),
        }
    }

    /// Eigenvalue of the base Laplacian (geometer's sign, ≤ 0) on basis mode i.
    pub fn laplace_eigenvalue(&self, i: usize) -> f64 {
        match &self.grid {
            Grid::Torus(g) => -(g.modes[i].norm_sq() as f64) / (g.radius * g.radius),
            Grid::Sphere(g) => {
                let l = g.modes[i].l1 as f64;
                -l * (l + 3.0) / (g.radius * g.radius)
            }
        }
    }

    /// Degree of basis mode i: |k|² on the torus, l on the sphere.
    pub fn mode_degree(&self, i: usize) -> u64 {
        match &self.grid {
            Grid::Torus(g) => g.modes[i].norm_sq() as u64,
            Grid::Sphere(g) => g.modes[i].l1 as u64,
        }
    }

    pub fn find_fourier_mode(&self, k: [i32; 4], sine: bool) -> Option<usize> {
        match &self.grid {
            Grid::Torus(g) => g.find_mode(k, sine),
            Grid::Sphere(_) => None,
        }
    }

    pub fn find_harmonic(&self, l1: u32, l2: u32, l3: u32, m: i32) -> Option<usize> {
        match &self.grid {
            Grid::Sphere(g) => g.find_mode(HarmonicMode { l1, l2, l3, m }),
            Grid::Torus(_) => None,
        }
    }

    /// Basis coefficients of node values, orthonormal for the base metric.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        match &self.grid {
            Grid::Torus(g) => g.analyze(values),
            Grid::Sphere(g) => g.analyze(values),
        }
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        match &self.grid {
            Grid::Torus(g) => g.synthesize(coeffs),
            Grid::Sphere(g) => g.synthesize(coeffs),
        }
    }

    /// Value of basis mode i at an arbitrary point.
    pub fn eval_mode(&self, i: usize, p: &PointOnM) -> f64 {
        match (&self.grid, p) {
            (Grid::Torus(g), PointOnM::Torus(x)) => g.eval_mode(&g.modes[i], x),
            (Grid::Sphere(g), PointOnM::Sphere(x)) => g.eval_mode(&g.modes[i], x),
            _ => f64::NAN,
        }
    }

    pub fn integrate(&self, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        Ok(self.integrate_values(u.values()))
    }

    pub(crate) fn integrate_values(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    pub(crate) fn check(&self, u: &ScalarField) -> Result<()> {
        if std::ptr::eq(self, Arc::as_ptr(u.manifold())) {
            Ok(())
        } else {
            Err(Error::ManifoldMismatch)
        }
    }

    fn check_point(&self, p: &PointOnM) -> Result<()> {
        match (self.kind(), p) {
            (Kind::Torus, PointOnM::Torus(_)) | (Kind::Sphere, PointOnM::Sphere(_)) => Ok(()),
            _ => Err(Error::ManifoldMismatch),
        }
    }

    fn require_base_metric(&self, what: &str) -> Result<()> {
        if self.is_conformal() {
            Err(Error::Unsupported(format!("{what} on a conformally rescaled model")))
        } else {
            Ok(())
        }
    }

    /// Wrap coordinates into the fundamental domain (torus) or renormalize (sphere).
    pub fn canonicalize(&self, p: &PointOnM) -> PointOnM {
        match *p {
            PointOnM::Torus(x) => {
                let l = 2.0 * PI * self.radius();
                let mut y = [0.0; 4];
                for a in 0..4 {
                    y[a] = x[a].rem_euclid(l);
                    if y[a] >= l {
                        y[a] = 0.0;
                    }
                }
                PointOnM::Torus(y)
            }
            PointOnM::Sphere(x) => {
                let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                PointOnM::Sphere([x[0] / n, x[1] / n, x[2] / n, x[3] / n, x[4] / n])
            }
        }
    }

    pub fn geodesic_distance(&self, p: &PointOnM, q: &PointOnM) -> Result<f64> {
        self.require_base_metric("geodesic distance")?;
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.dist(p, q))
    }

    /// Unchecked distance for internal hot loops.
    pub(crate) fn dist(&self, p: &PointOnM, q: &PointOnM) -> f64 {
        match (p, q) {
            (PointOnM::Torus(x), PointOnM::Torus(y)) => {
                let l = 2.0 * PI * self.radius();
                let mut s = 0.0;
                for a in 0..4 {
                    let mut d = (x[a] - y[a]).rem_euclid(l);
                    if d > 0.5 * l {
                        d = l - d;
                    }
                    s += d * d;
                }
                s.sqrt()
            }
            (PointOnM::Sphere(x), PointOnM::Sphere(y)) => {
                let mut dm = 0.0;
                let mut dp = 0.0;
                for a in 0..5 {
                    dm += (x[a] - y[a]).powi(2);
                    dp += (x[a] + y[a]).powi(2);
                }
                let (dm, dp) = (dm.sqrt(), dp.sqrt());
                // chord formulas are well conditioned near 0 and near π respectively
                let ang = if dm <= dp {
                    2.0 * (0.5 * dm).min(1.0).asin()
                } else {
                    PI - 2.0 * (0.5 * dp).min(1.0).asin()
                };
                ang * self.radius()
            }
            _ => f64::NAN,
        }
    }

    /// log_p(q): tangent vector at p of length dist(p, q) pointing to q.
    pub(crate) fn log_map(&self, p: &PointOnM, q: &PointOnM) -> Tangent {
        match (p, q) {
            (PointOnM::Torus(x), PointOnM::Torus(y)) => {
                let l = 2.0 * PI * self.radius();
                let mut v = [0.0; 5];
                for a in 0..4 {
                    let mut d = (y[a] - x[a]).rem_euclid(l);
                    if d > 0.5 * l {
                        d -= l;
                    }
                    v[a] = d;
                }
                v
            }
            (PointOnM::Sphere(x), PointOnM::Sphere(y)) => {
                let c: f64 = (0..5).map(|a| x[a] * y[a]).sum();
                let mut w = [0.0; 5];
                for a in 0..5 {
                    w[a] = y[a] - c * x[a];
                }
                let nw = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                if nw < 1e-300 {
                    return [0.0; 5];
                }
                let theta = self.dist(p, q) / self.radius();
                let s = theta * self.radius() / nw;
                w.map(|v| v * s)
            }
            _ => [f64::NAN; 5],
        }
    }

    pub(crate) fn exp_map(&self, p: &PointOnM, v: &Tangent) -> PointOnM {
        match p {
            PointOnM::Torus(x) => self.canonicalize(&PointOnM::Torus([x[0] + v[0], x[1] + v[1], x[2] + v[2], x[3] + v[3]])),
            PointOnM::Sphere(x) => {
                let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if nv == 0.0 {
                    return *p;
                }
                let th = nv / self.radius();
                let (s, c) = th.sin_cos();
                let mut y = [0.0; 5];
                for a in 0..5 {
                    y[a] = c * x[a] + s * v[a] / nv;
                }
                self.canonicalize(&PointOnM::Sphere(y))
            }
        }
    }

    /// Orthonormal frame of T_pM.
    pub(crate) fn tangent_frame(&self, p: &PointOnM) -> [Tangent; 4] {
        match p {
            PointOnM::Torus(_) => {
                let mut f = [[0.0; 5]; 4];
                for (a, e) in f.iter_mut().enumerate() {
                    e[a] = 1.0;
                }
                f
            }
            PointOnM::Sphere(x) => {
                let mut out: Vec<Tangent> = Vec::with_capacity(4);
                let mut basis: Vec<usize> = (0..5).collect();
                // start from the axes least aligned with x
                basis.sort_by(|&a, &b| x[a].abs().partial_cmp(&x[b].abs()).unwrap());
                for &e in &basis {
                    let mut v = [0.0; 5];
                    v[e] = 1.0;
                    let c: f64 = x[e];
                    for a in 0..5 {
                        v[a] -= c * x[a];
                    }
                    for w in &out {
                        let d: f64 = (0..5).map(|a| v[a] * w[a]).sum();
                        for a in 0..5 {
                            v[a] -= d * w[a];
                        }
                    }
                    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if n > 1e-6 {
                        out.push(v.map(|a| a / n));
                    }
                    if out.len() == 4 {
                        break;
                    }
                }
                [out[0], out[1], out[2], out[3]]
            }
        }
    }

    /// Intrinsic weighted center of mass by fixed-point iteration on the exponential chart.
    pub fn riemannian_center(&self, points: &[PointOnM], weights: &[f64]) -> Result<PointOnM> {
        self.require_base_metric("riemannian center")?;
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::Precondition("need matching non-empty points and weights".into()));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::Precondition("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!("weights sum to {total}, not 1")));
        }
        for p in points {
            self.check_point(p)?;
        }
        let mut spread: f64 = 0.0;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                spread = spread.max(self.dist(&points[i], &points[j]));
            }
        }
        let limit = self.injectivity_radius() / 4.0;
        if spread >= limit {
            return Err(Error::SpreadTooLarge { spread, limit });
        }
        Ok(self.center_unchecked(points, weights))
    }

    pub(crate) fn center_unchecked(&self, points: &[PointOnM], weights: &[f64]) -> PointOnM {
        let total: f64 = weights.iter().sum();
        let start = points
            .iter()
            .zip(weights)
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(p, _)| *p)
            .unwrap();
        let mut c = start;
        for _ in 0..50 {
            let mut g = [0.0; 5];
            for (p, &w) in points.iter().zip(weights) {
                let v = self.log_map(&c, p);
                for a in 0..5 {
                    g[a] += w / total * v[a];
                }
            }
            c = self.exp_map(&c, &g);
            if g.iter().map(|a| a * a).sum::<f64>().sqrt() < 1e-12 {
                break;
            }
        }
        c
    }

    /// New manifold with metric e^{2w}g; its volume element is e^{4w}dV_g.
    pub fn conformal_rescale(self: &Arc<Self>, w: &ScalarField) -> Result<Arc<Self>> {
        self.check(w)?;
        if self.is_conformal() {
            return Err(Error::Unsupported("rescaling an already rescaled model".into()));
        }
        let wv = w.values().to_vec();
        let count = self.nodes.len();
        let weights: Vec<f64> = self.weights.iter().zip(&wv).map(|(b, w)| b * (4.0 * w).exp()).collect();
        let volume: f64 = weights.iter().sum();
        let grid = match &self.grid {
            Grid::Torus(g) => Grid::Torus(TorusGrid::new(g.n, g.radius)),
            Grid::Sphere(g) => Grid::Sphere(SphereGrid::new(g.degree, g.radius)),
        };
        let (scalar, ricci_sq, lap_r) = match &self.grid {
            Grid::Torus(g) => conformal_flat_curvature(g, &wv),
            Grid::Sphere(_) => (vec![f64::NAN; count], vec![f64::NAN; count], vec![f64::NAN; count]),
        };
        Ok(Arc::new(ModelManifold {
            grid,
            nodes: self.nodes.clone(),
            weights,
            conformal: Some(Conformal { w: wv }),
            scalar_curvature: scalar,
            ricci_sq,
            laplace_scalar: lap_r,
            // |W|² dV is pointwise conformally invariant and vanishes on both bases
            weyl_sq: vec![0.0; count],
            volume,
            euler: self.euler,
        }))
    }

    pub(crate) fn conformal_factor(&self) -> Option<&[f64]> {
        self.conformal.as_ref().map(|c| c.w.as_slice())
    }

    pub(crate) fn torus_grid(&self) -> Option<&TorusGrid> {
        match &self.grid {
            Grid::Torus(g) => Some(g),
            Grid::Sphere(_) => None,
        }
    }

    /// Laplacian of the current metric applied to node values.
    pub fn laplacian_values(&self, v: &[f64]) -> Result<Vec<f64>> {
        match (&self.grid, &self.conformal) {
            (_, None) => {
                let c = self.analyze(v);
                let c: Vec<f64> = c.iter().enumerate().map(|(i, a)| a * self.laplace_eigenvalue(i)).collect();
                Ok(self.synthesize(&c))
            }
            (Grid::Torus(g), Some(cf)) => Ok(conformal_torus_laplacian(g, &cf.w, v)),
            (Grid::Sphere(_), Some(_)) => Err(Error::Unsupported("Laplacian of a rescaled sphere".into())),
        }
    }
}

pub(crate) fn grad(g: &TorusGrid, v: &[f64]) -> [Vec<f64>; 4] {
    [
        g.derivative(v, [1, 0, 0, 0]),
        g.derivative(v, [0, 1, 0, 0]),
        g.derivative(v, [0, 0, 1, 0]),
        g.derivative(v, [0, 0, 0, 1]),
    ]
}

fn flat_laplacian(g: &TorusGrid, v: &[f64]) -> Vec<f64> {
    g.radial_multiplier(v, |k2| -k2)
}

/// Δ_{e^{2w}δ} f = e^{−2w}(Δf + 2∇w·∇f).
pub(crate) fn conformal_torus_laplacian(g: &TorusGrid, w: &[f64], f: &[f64]) -> Vec<f64> {
    let lf = flat_laplacian(g, f);
    let gw = grad(g, w);
    let gf = grad(g, f);
    (0..f.len())
        .map(|i| {
            let dot: f64 = (0..4).map(|a| gw[a][i] * gf[a][i]).sum();
            (-2.0 * w[i]).exp() * (lf[i] + 2.0 * dot)
        })
        .collect()
}

/// Coordinate components of Ric for e^{2w}δ: −2(w_ij − w_i w_j) − (Δw + 2|∇w|²)δ_ij.
pub(crate) fn conformal_flat_ricci(g: &TorusGrid, w: &[f64]) -> Vec<[[f64; 4]; 4]> {
    let gw = grad(g, w);
    let lw = flat_laplacian(g, w);
    let mut hess = vec![vec![Vec::new(); 4]; 4];
    for a in 0..4 {
        for b in a..4 {
            let mut o = [0u32; 4];
            o[a] += 1;
            o[b] += 1;
            hess[a][b] = g.derivative(w, o);
        }
    }
    (0..w.len())
        .map(|i| {
            let g2: f64 = (0..4).map(|a| gw[a][i] * gw[a][i]).sum();
            let mut r = [[0.0; 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    r[a][b] = -2.0 * (hess[lo][hi][i] - gw[a][i] * gw[b][i]);
                    if a == b {
                        r[a][b] -= lw[i] + 2.0 * g2;
                    }
                }
            }
            r
        })
        .collect()
}

fn conformal_flat_curvature(g: &TorusGrid, w: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let gw = grad(g, w);
    let lw = flat_laplacian(g, w);
    let scalar: Vec<f64> = (0..w.len())
        .map(|i| {
            let g2: f64 = (0..4).map(|a| gw[a][i] * gw[a][i]).sum();
            (-2.0 * w[i]).exp() * (-6.0 * lw[i] - 6.0 * g2)
        })
        .collect();
    let ric = conformal_flat_ricci(g, w);
    let ricci_sq: Vec<f64> = ric
        .iter()
        .zip(w)
        .map(|(r, wi)| (-4.0 * wi).exp() * r.iter().flatten().map(|v| v * v).sum::<f64>())
        .collect();
    let lap_r = conformal_torus_laplacian(g, w, &scalar);
    (scalar, ricci_sq, lap_r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes() {
        let t = ModelManifold::torus(8, 1.0);
        assert_eq!(t.node_count(), 4096);
        let v: f64 = t.weights().iter().sum();
        assert!((v - (2.0 * PI).powi(4)).abs() < 1e-9);
        let s = ModelManifold::sphere(12, 1.0);
        let v: f64 = s.weights().iter().sum();
        assert!((v / (8.0 * PI * PI / 3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spec_rejections() {
        let bad = |kind: &str, res: i64| ManifoldSpec { kind: kind.into(), resolution: res, radius: None, base: None, conformal_factor: None };
        assert!(ModelManifold::build(&bad("torus", 0)).is_err());
        assert!(ModelManifold::build(&bad("torus", 3)).is_err());
        assert!(ModelManifold::build(&bad("klein", 8)).is_err());
        assert!(ModelManifold::build(&bad("sphere", 4)).is_ok());
    }

    #[test]
    fn sphere_distances() {
        let s = ModelManifold::sphere(4, 1.0);
        let p = PointOnM::north();
        let q = p.antipode().unwrap();
        assert!((s.geodesic_distance(&p, &q).unwrap() - PI).abs() < 1e-12);
        assert_eq!(s.geodesic_distance(&p, &p).unwrap(), 0.0);
        let t = ModelManifold::torus(4, 1.0);
        assert!(t.geodesic_distance(&p, &PointOnM::Torus([0.0; 4])).is_err());
        let d = t.geodesic_distance(&PointOnM::Torus([0.0; 4]), &PointOnM::Torus([PI, 0.0, 0.0, 0.0])).unwrap();
        assert!((d - PI).abs() < 1e-12);
    }

    #[test]
    fn angles_roundtrip() {
        let p = PointOnM::sphere_from_angles(0.7, 1.1, 2.0, 4.0);
        let a = p.angles().unwrap();
        assert!((a[0] - 0.7).abs() < 1e-12 && (a[1] - 1.1).abs() < 1e-12);
        assert!((a[2] - 2.0).abs() < 1e-12 && (a[3] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn center_on_sphere_follows_geodesic() {
        let s = ModelManifold::sphere(4, 1.0);
        let p = PointOnM::sphere_from_angles(0.5, 0.3, 1.0, 0.2);
        let PointOnM::Sphere(x) = p else { unreachable!() };
        let frame = s.tangent_frame(&p);
        let q = s.exp_map(&p, &frame[1].map(|v| 0.2 * v));
        let c = s.riemannian_center(&[p, q], &[0.3, 0.7]).unwrap();
        let want = s.exp_map(&p, &frame[1].map(|v| 0.14 * v));
        assert!(s.dist(&c, &want) < 1e-9);
        let _ = x;
    }

    #[test]
    fn center_refuses_spread() {
        let s = ModelManifold::sphere(4, 1.0);
        let p = PointOnM::north();
        let q = p.antipode().unwrap();
        assert!(matches!(s.riemannian_center(&[p, q], &[0.5, 0.5]), Err(Error::SpreadTooLarge { .. })));
    }
}
