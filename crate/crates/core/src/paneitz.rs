//! Paneitz operator, Q-curvature, the invariant k_P, spectrum and the reflected operator P⁺.
//!
//! Sign conventions. Δ is the geometer's Laplacian (≤ 0). The divergence term of
//! the operator is taken either as written, P = Δ² + div((⅔R g − 2Ric)∇) (`Literal`,
//! the default: on the unit S⁴ it gives (−Δ)(−Δ − 2), first nonzero eigenvalue 8),
//! or with the opposite sign (`Covariant`: P = Δ² − div(…), eigenvalue 24 on the
//! first harmonics). Only `Covariant` satisfies the conformal law P̃ = e^{−4w}P and
//! the Q transformation law; the audits that rely on them select it explicitly.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{conformal_flat_ricci, conformal_torus_laplacian, grad, BasisMode, Kind, ModelManifold, PointOnM, ScalarField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    #[default]
    Literal,
    Covariant,
}

impl SignConvention {
    /// Sign in front of div((⅔R g − 2Ric)∇·).
    fn divergence_sign(self) -> f64 {
        match self {
            SignConvention::Literal => 1.0,
            SignConvention::Covariant => -1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorSpec {
    /// "geometric" or "synthetic"
    #[serde(default = "default_mode")]
    pub mode: String,
    /// (basis mode index, eigenvalue); torus overrides act on the whole ±k pair
    #[serde(default)]
    pub overrides: Vec<(usize, f64)>,
    /// multiplies the geometric Q field
    #[serde(default)]
    pub q_scale: Option<f64>,
    /// rescales Q so that k_P hits this value (uniform Q when the geometric Q vanishes)
    #[serde(default)]
    pub kp_target: Option<f64>,
    #[serde(default)]
    pub convention: SignConvention,
}

fn default_mode() -> String {
    "geometric".into()
}

impl Default for OperatorSpec {
    fn default() -> Self {
        OperatorSpec { mode: default_mode(), overrides: Vec::new(), q_scale: None, kp_target: None, convention: SignConvention::Literal }
    }
}

#[derive(Clone, Copy, Debug)]
enum QRule {
    Geometric,
    Scale(f64),
    Target(f64),
}

pub struct OperatorModel {
    manifold: Arc<ModelManifold>,
    convention: SignConvention,
    synthetic: bool,
    /// eigenvalue per basis mode; None on rescaled models
    symbol: Option<Vec<f64>>,
    /// (mode, λ − λ_geometric) where the symbol departs from the geometric one
    deltas: Vec<(usize, f64)>,
    q_rule: QRule,
    spectrum: OnceLock<Arc<SpectrumDecomposition>>,
    curvature: OnceLock<Arc<CurvatureData>>,
}

impl std::fmt::Debug for OperatorModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorModel")
            .field("synthetic", &self.synthetic)
            .field("convention", &self.convention)
            .finish()
    }
}

/// Gap below which a non-constant eigenvalue counts as a kernel element.
const KERNEL_GAP: f64 = 1e-10;

fn geometric_symbol(m: &ModelManifold, conv: SignConvention) -> Vec<f64> {
    let c = m.einstein_constant().unwrap_or(0.0);
    let r = 4.0 * c;
    let kappa = 2.0 / 3.0 * r - 2.0 * c;
    let s = conv.divergence_sign();
    (0..m.basis_len())
        .map(|i| {
            let mu = -m.laplace_eigenvalue(i);
            // Δ²u + s·κ·Δu with Δ = −μ
            mu * mu - s * kappa * mu
        })
        .collect()
}

impl OperatorModel {
    pub fn geometric(m: &Arc<ModelManifold>, convention: SignConvention) -> Arc<Self> {
        let symbol = if m.is_conformal() { None } else { Some(geometric_symbol(m, convention)) };
        Arc::new(OperatorModel {
            manifold: m.clone(),
            convention,
            synthetic: false,
            symbol,
            deltas: Vec::new(),
            q_rule: QRule::Geometric,
            spectrum: OnceLock::new(),
            curvature: OnceLock::new(),
        })
    }

    /// Geometric symbol with prescribed eigenvalues on selected basis modes.
    pub fn synthetic(m: &Arc<ModelManifold>, overrides: &[(usize, f64)], convention: SignConvention) -> Result<Arc<Self>> {
        Self::with_rules(m, overrides, convention, QRule::Geometric, true)
    }

    fn with_rules(
        m: &Arc<ModelManifold>,
        overrides: &[(usize, f64)],
        convention: SignConvention,
        q_rule: QRule,
        synthetic: bool,
    ) -> Result<Arc<Self>> {
        if m.is_conformal() {
            return Err(Error::Unsupported("synthetic operators on rescaled models".into()));
        }
        let geo = geometric_symbol(m, convention);
        let mut symbol = geo.clone();
        for &(i, lam) in overrides {
            if i >= symbol.len() {
                return Err(Error::InvalidSpec(format!("override mode {i} out of range")));
            }
            let mode = m.basis_mode(i);
            if mode.is_constant() {
                if lam != 0.0 {
                    return Err(Error::InvalidSpec("constant mode must keep eigenvalue 0".into()));
                }
                continue;
            }
            if lam.abs() <= KERNEL_GAP {
                return Err(Error::InvalidSpec(format!("zero eigenvalue prescribed on non-constant mode {i}")));
            }
            for j in override_group(m, i) {
                symbol[j] = lam;
            }
        }
        for (i, &l) in symbol.iter().enumerate() {
            if !m.basis_mode(i).is_constant() && l.abs() <= KERNEL_GAP {
                return Err(Error::InvalidSpec(format!("kernel larger than constants at mode {i}")));
            }
        }
        let deltas = symbol
            .iter()
            .zip(&geo)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (a, b))| (i, a - b))
            .collect();
        Ok(Arc::new(OperatorModel {
            manifold: m.clone(),
            convention,
            synthetic,
            symbol: Some(symbol),
            deltas,
            q_rule,
            spectrum: OnceLock::new(),
            curvature: OnceLock::new(),
        }))
    }

    pub fn from_spec(m: &Arc<ModelManifold>, spec: &OperatorSpec) -> Result<Arc<Self>> {
        let q_rule = match (spec.q_scale, spec.kp_target) {
            (Some(_), Some(_)) => return Err(Error::InvalidSpec("q_scale and kp_target are exclusive".into())),
            (Some(s), None) => QRule::Scale(s),
            (None, Some(k)) => QRule::Target(k),
            (None, None) => QRule::Geometric,
        };
        match spec.mode.as_str() {
            "geometric" => {
                if !spec.overrides.is_empty() {
                    return Err(Error::InvalidSpec("overrides need mode 'synthetic'".into()));
                }
                if matches!(q_rule, QRule::Geometric) {
                    Ok(Self::geometric(m, spec.convention))
                } else {
                    Self::with_rules(m, &[], spec.convention, q_rule, false)
                }
            }
            "synthetic" => Self::with_rules(m, &spec.overrides, spec.convention, q_rule, true),
            other => Err(Error::InvalidSpec(format!("unknown operator mode '{other}'"))),
        }
    }

    pub fn manifold(&self) -> &Arc<ModelManifold> {
        &self.manifold
    }

    pub fn convention(&self) -> SignConvention {
        self.convention
    }

    pub fn is_synthetic(&self) -> bool {
        self.synthetic
    }

    /// Diagonal action on basis coefficients (unscaled models only).
    pub fn symbol(&self) -> Option<&[f64]> {
        self.symbol.as_deref()
    }

    pub fn symbol_deltas(&self) -> &[(usize, f64)] {
        &self.deltas
    }

    /// c in ⟨Pu,u⟩ = ∫(Δu)² + c|∇u|² for the geometric part on Einstein backgrounds.
    pub fn gradient_coefficient(&self) -> f64 {
        let c = self.manifold.einstein_constant().unwrap_or(0.0);
        let kappa = 2.0 / 3.0 * 4.0 * c - 2.0 * c;
        -self.convention.divergence_sign() * kappa
    }

    fn check(&self, u: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.manifold, u.manifold()) {
            Ok(())
        } else {
            Err(Error::ManifoldMismatch)
        }
    }

    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        self.check(u)?;
        match &self.symbol {
            Some(sym) => {
                let c: Vec<f64> = u.coefficients().iter().zip(sym).map(|(a, l)| a * l).collect();
                ScalarField::from_coefficients(&self.manifold, c)
            }
            None => self.apply_rescaled(u),
        }
    }

    fn apply_rescaled(&self, u: &ScalarField) -> Result<ScalarField> {
        let m = &self.manifold;
        let w = m.conformal_factor().expect("rescaled model");
        match m.torus_grid() {
            Some(g) => {
                let lap = |f: &[f64]| conformal_torus_laplacian(g, w, f);
                let bi = lap(&lap(u.values()));
                let scal = m.scalar_curvature();
                let ric = conformal_flat_ricci(g, w);
                let gu = grad(g, u.values());
                // X_a = A_ab ∂_b u with A = ⅔R̃e^{2w}δ − 2Ric̃ (coordinate components)
                let mut flux: [Vec<f64>; 4] = Default::default();
                for (a, fa) in flux.iter_mut().enumerate() {
                    *fa = (0..w.len())
                        .map(|i| {
                            let mut s = 2.0 / 3.0 * scal[i] * (2.0 * w[i]).exp() * gu[a][i];
                            for b in 0..4 {
                                s -= 2.0 * ric[i][a][b] * gu[b][i];
                            }
                            s
                        })
                        .collect();
                }
                let mut div = vec![0.0; w.len()];
                for (a, fa) in flux.iter().enumerate() {
                    let mut o = [0u32; 4];
                    o[a] = 1;
                    for (d, v) in div.iter_mut().zip(g.derivative(fa, o)) {
                        *d += v;
                    }
                }
                let s = self.convention.divergence_sign();
                let vals = (0..w.len()).map(|i| bi[i] + s * (-4.0 * w[i]).exp() * div[i]).collect();
                ScalarField::from_values(m, vals)
            }
            None => {
                // rescaled sphere: defined through P̃ = e^{−4w}P on the round metric
                let base = ModelManifold::sphere(m.resolution(), m.radius());
                let sym = geometric_symbol(&base, self.convention);
                let c: Vec<f64> = m.analyze(u.values()).iter().zip(&sym).map(|(a, l)| a * l).collect();
                let pv = m.synthesize(&c);
                let vals = pv.iter().zip(w).map(|(p, wi)| p * (-4.0 * wi).exp()).collect();
                ScalarField::from_values(m, vals)
            }
        }
    }

    /// ⟨Pu, v⟩.
    pub fn pairing(&self, u: &ScalarField, v: &ScalarField) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        match &self.symbol {
            Some(sym) => Ok(u
                .coefficients()
                .iter()
                .zip(v.coefficients())
                .zip(sym)
                .map(|((a, b), l)| a * b * l)
                .sum()),
            None => self.apply(u)?.inner(v),
        }
    }

    /// ⟨Pu, v⟩ assembled at the nodes as ∫ v·Pu dV.
    pub fn pairing_nodal(&self, u: &ScalarField, v: &ScalarField) -> Result<f64> {
        self.apply(u)?.inner(v)
    }

    pub fn curvature(&self) -> Result<Arc<CurvatureData>> {
        if let Some(c) = self.curvature.get() {
            return Ok(c.clone());
        }
        let geo = q_curvature(&self.manifold)?;
        let data = match self.q_rule {
            QRule::Geometric => geo,
            QRule::Scale(s) => CurvatureData::from_field(geo.q.scale(s), geo.weyl_integral),
            QRule::Target(k) => {
                if geo.k_p.abs() > 1e-12 {
                    let s = k / geo.k_p;
                    CurvatureData::from_field(geo.q.scale(s), geo.weyl_integral)
                } else {
                    let q = ScalarField::constant(&self.manifold, k / self.manifold.volume());
                    CurvatureData::from_field(q, geo.weyl_integral)
                }
            }
        };
        let data = Arc::new(data);
        let _ = self.curvature.set(data.clone());
        Ok(data)
    }

    /// The n lowest eigenpairs of the operator.
    pub fn spectrum(&self, n: usize) -> Result<Arc<SpectrumDecomposition>> {
        let full = self.full_spectrum()?;
        if n > full.eigenvalues.len() {
            return Err(Error::Precondition(format!("{n} eigenpairs requested, basis has {}", full.eigenvalues.len())));
        }
        if n == full.eigenvalues.len() {
            return Ok(full);
        }
        Ok(Arc::new(SpectrumDecomposition {
            manifold: full.manifold.clone(),
            eigenvalues: full.eigenvalues[..n].to_vec(),
            modes: full.modes[..n].to_vec(),
            k_bar: full.k_bar,
            negative_modes: full.negative_modes.clone(),
            negative_values: full.negative_values.clone(),
            residual: full.residual,
        }))
    }

    /// The whole diagonalized spectrum, cached.
    pub fn full_spectrum(&self) -> Result<Arc<SpectrumDecomposition>> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s.clone());
        }
        let sym = self
            .symbol
            .as_ref()
            .ok_or_else(|| Error::Unsupported("spectrum of a rescaled model".into()))?;
        let mut order: Vec<usize> = (0..sym.len()).collect();
        order.sort_by(|&a, &b| sym[a].partial_cmp(&sym[b]).unwrap().then(a.cmp(&b)));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| sym[i]).collect();
        let k_bar = eigenvalues.iter().filter(|&&l| l < 0.0).count();
        // residual audit on the lowest modes through the operator itself
        let mut residual: f64 = 0.0;
        for &i in order.iter().take(16) {
            let v = ScalarField::mode(&self.manifold, i);
            let pv = self.apply(&v)?;
            let r = pv.axpy(-sym[i], &v)?.sup_norm();
            residual = residual.max(r / (1.0 + sym[i].abs()));
        }
        if residual > 1e-8 {
            return Err(Error::Eigensolver { residual });
        }
        let s = Arc::new(SpectrumDecomposition {
            manifold: self.manifold.clone(),
            negative_modes: order[..k_bar].to_vec(),
            negative_values: eigenvalues[..k_bar].to_vec(),
            eigenvalues,
            modes: order,
            k_bar,
            residual,
        });
        let _ = self.spectrum.set(s.clone());
        Ok(s)
    }

    /// P⁺u = Pu − 2Σ_{i≤k̄} λᵢ(∫u v̂ᵢ)v̂ᵢ.
    pub fn apply_plus(&self, u: &ScalarField) -> Result<ScalarField> {
        let spec = self.full_spectrum()?;
        let mut c: Vec<f64> = self.apply(u)?.coefficients().to_vec();
        let uc = u.coefficients();
        for (&i, &l) in spec.negative_modes.iter().zip(&spec.negative_values) {
            c[i] -= 2.0 * l * uc[i];
        }
        ScalarField::from_coefficients(&self.manifold, c)
    }

    /// ⟨P⁺u, u⟩ = ⟨Pu,u⟩ + 2Σ|λᵢ|αᵢ².
    pub fn plus_quadratic(&self, u: &ScalarField) -> Result<f64> {
        let spec = self.full_spectrum()?;
        let uc = u.coefficients();
        let mut q = self.pairing(u, u)?;
        for (&i, &l) in spec.negative_modes.iter().zip(&spec.negative_values) {
            q += 2.0 * l.abs() * uc[i] * uc[i];
        }
        Ok(q)
    }
}

fn override_group(m: &ModelManifold, i: usize) -> Vec<usize> {
    match m.basis_mode(i) {
        BasisMode::Fourier(f) => {
            let mut g = vec![m.find_fourier_mode(f.k, false).unwrap()];
            if let Some(s) = m.find_fourier_mode(f.k, true) {
                g.push(s);
            }
            g
        }
        BasisMode::Harmonic(_) => vec![i],
    }
}

pub struct SpectrumDecomposition {
    manifold: Arc<ModelManifold>,
    /// ascending
    pub eigenvalues: Vec<f64>,
    /// basis mode index of each eigenfield
    pub modes: Vec<usize>,
    pub k_bar: usize,
    negative_modes: Vec<usize>,
    negative_values: Vec<f64>,
    /// worst relative residual ‖Pv − λv‖∞ over the audited modes
    pub residual: f64,
}

impl std::fmt::Debug for SpectrumDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectrumDecomposition")
            .field("len", &self.eigenvalues.len())
            .field("k_bar", &self.k_bar)
            .finish()
    }
}

impl SpectrumDecomposition {
    pub fn eigenfield(&self, i: usize) -> ScalarField {
        ScalarField::mode(&self.manifold, self.modes[i])
    }

    pub fn eval(&self, i: usize, p: &PointOnM) -> f64 {
        self.manifold.eval_mode(self.modes[i], p)
    }

    /// Basis indices spanning V.
    pub fn negative_modes(&self) -> &[usize] {
        &self.negative_modes
    }

    pub fn negative_values(&self) -> &[f64] {
        &self.negative_values
    }

    /// (eigenvalue, multiplicity) clusters, relative tolerance 1e-9.
    pub fn multiplicities(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &l in &self.eigenvalues {
            match out.last_mut() {
                Some((v, c)) if (l - *v).abs() <= 1e-9 * (1.0 + v.abs()) => *c += 1,
                _ => out.push((l, 1)),
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub q: ScalarField,
    pub k_p: f64,
    pub weyl_integral: f64,
    /// Some(Q) when Q is constant
    pub uniform: Option<f64>,
}

impl CurvatureData {
    pub fn from_field(q: ScalarField, weyl_integral: f64) -> Self {
        let k_p = q.integral();
        let v = q.values();
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let uniform = if hi - lo <= 1e-14 * (1.0 + hi.abs()) { Some(0.5 * (lo + hi)) } else { None };
        CurvatureData { q, k_p, weyl_integral, uniform }
    }

    /// Q at an arbitrary point (spectral interpolation when Q is not constant).
    pub fn q_at(&self, p: &PointOnM) -> f64 {
        if let Some(c) = self.uniform {
            return c;
        }
        let m = self.q.manifold();
        self.q
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > 1e-15)
            .map(|(i, c)| c * m.eval_mode(i, p))
            .sum()
    }
}

/// Q = −(1/12)(ΔR − R² + 3|Ric|²) from the manifold's curvature data.
pub fn q_curvature(m: &Arc<ModelManifold>) -> Result<CurvatureData> {
    let q = if m.is_conformal() && m.kind() == Kind::Sphere {
        // Q̃ = e^{−4w}(½Pw + Q) with the covariant operator on the round metric
        let w = m.conformal_factor().unwrap();
        let base = ModelManifold::sphere(m.resolution(), m.radius());
        let sym = geometric_symbol(&base, SignConvention::Covariant);
        let c: Vec<f64> = base.analyze(w).iter().zip(&sym).map(|(a, l)| a * l).collect();
        let pw = base.synthesize(&c);
        let q0 = 3.0 / m.radius().powi(4);
        let vals = pw.iter().zip(w).map(|(p, wi)| (-4.0 * wi).exp() * (0.5 * p + q0)).collect();
        ScalarField::from_values(m, vals)?
    } else {
        let r = m.scalar_curvature();
        let lr = m.laplacian_of_scalar_curvature();
        let ric = m.ricci_norm_sq();
        let vals = (0..m.node_count())
            .map(|i| -(lr[i] - r[i] * r[i] + 3.0 * ric[i]) / 12.0)
            .collect();
        ScalarField::from_values(m, vals)?
    };
    let weyl = m.integrate_values(m.weyl_sq());
    Ok(CurvatureData::from_field(q, weyl))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussBonnetReport {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

/// ∫(Q + |W|²/8) dV against 4π²χ.
pub fn gauss_bonnet_audit(m: &Arc<ModelManifold>) -> Result<GaussBonnetReport> {
    let c = q_curvature(m)?;
    let lhs = c.k_p + c.weyl_integral / 8.0;
    let rhs = 4.0 * PI * PI * m.euler_characteristic() as f64;
    Ok(GaussBonnetReport { lhs, rhs, defect: (lhs - rhs).abs() })
}

/// Position of k_P relative to the bands (8kπ², 8(k+1)π²).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KpBand {
    Band(u32),
    BoundaryForbidden(u32),
}

/// `tol` is relative to 8π².
pub fn kp_band(k_p: f64, tol: f64) -> KpBand {
    let unit = 8.0 * PI * PI;
    let x = k_p / unit;
    let nearest = x.round();
    if nearest >= 1.0 && (x - nearest).abs() <= tol {
        return KpBand::BoundaryForbidden(nearest as u32);
    }
    KpBand::Band(x.floor().max(0.0) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_symbol_is_k_fourth() {
        let m = ModelManifold::torus(4, 1.0);
        let op = OperatorModel::geometric(&m, SignConvention::Literal);
        let i = m.find_fourier_mode([1, 1, 0, 0], true).unwrap();
        let v = ScalarField::mode(&m, i);
        let pv = op.apply(&v).unwrap();
        assert!(pv.axpy(-4.0, &v).unwrap().sup_norm() < 1e-10);
        let one = ScalarField::constant(&m, 1.0);
        assert!(op.apply(&one).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn sphere_first_eigenvalues_by_convention() {
        let m = ModelManifold::sphere(4, 1.0);
        let lit = OperatorModel::geometric(&m, SignConvention::Literal);
        let cov = OperatorModel::geometric(&m, SignConvention::Covariant);
        let i = m.find_harmonic(1, 1, 1, 1).unwrap();
        assert!((lit.symbol().unwrap()[i] - 8.0).abs() < 1e-12);
        assert!((cov.symbol().unwrap()[i] - 24.0).abs() < 1e-12);
    }

    #[test]
    fn synthetic_override_pairs_cos_and_sin() {
        let m = ModelManifold::torus(4, 1.0);
        let i = m.find_fourier_mode([1, 0, 0, 0], false).unwrap();
        let op = OperatorModel::synthetic(&m, &[(i, -2.0)], SignConvention::Literal).unwrap();
        let s = op.full_spectrum().unwrap();
        assert_eq!(s.k_bar, 2);
        assert_eq!(s.eigenvalues[0], -2.0);
        assert!(OperatorModel::synthetic(&m, &[(i, 0.0)], SignConvention::Literal).is_err());
        assert!(OperatorModel::synthetic(&m, &[(0, 1.0)], SignConvention::Literal).is_err());
    }

    #[test]
    fn plus_operator_flips_negative_modes() {
        let m = ModelManifold::torus(4, 1.0);
        let i = m.find_fourier_mode([1, 0, 0, 0], false).unwrap();
        let op = OperatorModel::synthetic(&m, &[(i, -2.0)], SignConvention::Literal).unwrap();
        let v = ScalarField::mode(&m, i);
        let pv = op.apply_plus(&v).unwrap();
        assert!(pv.axpy(-2.0, &v).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn bands() {
        let u = 8.0 * PI * PI;
        assert_eq!(kp_band(1.5 * u, 0.02), KpBand::Band(1));
        assert_eq!(kp_band(u, 0.02), KpBand::BoundaryForbidden(1));
        assert_eq!(kp_band(0.0, 0.02), KpBand::Band(0));
        assert_eq!(kp_band(0.5 * u, 0.02), KpBand::Band(0));
    }
}
