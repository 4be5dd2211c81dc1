//! The map Ψ̂ from the low sublevel of II into M_k, and Ψ into A_{k,k̄}.

use serde::{Deserialize, Serialize};

use super::homotopy::{cutoff, Homotopy};
use super::strata::{density_fit, stratum_fit};
use super::{bary_distance, Barycenter, MetricConfig};
use crate::error::{Error, Result};
use crate::functional::{energy, v_component, EnergyField};
use crate::geometry::ModelManifold;
use crate::measure::WeightedCloud;
use crate::paneitz::{CurvatureData, OperatorModel};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeConfig {
    /// ε₁
    pub eps1: f64,
    /// ε_{j+1} = ε_j² / ratio
    pub ratio: f64,
    /// L̂: inputs must satisfy II(u) ≤ −L̂
    pub sublevel: Option<f64>,
    pub metric: MetricConfig,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig { eps1: 0.2, ratio: 50.0, sublevel: None, metric: MetricConfig::default() }
    }
}

impl CascadeConfig {
    /// ε₁ ≫ ε₂ ≫ … ≫ ε_k.
    pub fn scales(&self, k: usize) -> Vec<f64> {
        let mut out = vec![self.eps1];
        while out.len() < k {
            let e = *out.last().unwrap();
            out.push(e * e / self.ratio);
        }
        out.truncate(k);
        out
    }
}

/// What the cascade saw; emitted as JSON for debugging.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiTrace {
    pub scales: Vec<f64>,
    /// fitted distance of the density to M_i, i = 1..k
    pub distances: Vec<f64>,
    pub cutoffs: Vec<f64>,
    /// chosen stratum j
    pub level: usize,
    /// no level had cutoff 1 and the top stratum was used
    pub fallback: bool,
    pub sigma: Barycenter,
}

/// Ψ̂ on a normalized density: P_j at the first level with f_j = 1, then
/// T̂_{j−1}^{f_{j−1}}, …, T̂_1^{f_1}.
pub fn psi_hat_density(m: &ModelManifold, f: &WeightedCloud, k: usize, cfg: &CascadeConfig) -> Result<(Barycenter, PsiTrace)> {
    if k == 0 {
        return Err(Error::Precondition("Ψ̂ needs k ≥ 1".into()));
    }
    let scales = cfg.scales(k);
    let mut fits = Vec::with_capacity(k);
    let mut distances = Vec::with_capacity(k);
    let mut cutoffs = Vec::with_capacity(k);
    let mut level = None;
    for (i, &e) in scales.iter().enumerate() {
        let fit = density_fit(m, f, i + 1)?;
        let c = cutoff(fit.distance, e, 2.0 * e);
        distances.push(fit.distance);
        cutoffs.push(c);
        fits.push(fit);
        if c == 1.0 {
            level = Some(i + 1);
            break;
        }
    }
    let fallback = level.is_none();
    let j = level.unwrap_or(k);
    let mut sigma = fits[j - 1].sigma.clone();
    for i in (1..j).rev() {
        let eta = if i == 1 { (2.0 * scales[0]).sqrt() } else { (2.0 * scales[i - 1]).sqrt().min(scales[i - 2] / 2.0) };
        let anchor = stratum_fit(m, &sigma, i, &cfg.metric)?.sigma;
        sigma = Homotopy::with_anchor(m, &sigma, anchor, eta).hat(cutoffs[i - 1]);
    }
    let trace = PsiTrace { scales, distances, cutoffs, level: j, fallback, sigma: sigma.clone() };
    Ok((sigma, trace))
}

fn norm(s: &[f64]) -> f64 {
    s.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_sublevel<F: EnergyField>(op: &OperatorModel, q: &CurvatureData, u: &F, cfg: &CascadeConfig) -> Result<()> {
    if let Some(l) = cfg.sublevel {
        let e = energy(op, q, u)?.total;
        if e > -l {
            return Err(Error::NotInSublevel { energy: e, threshold: -l });
        }
    }
    Ok(())
}

pub fn psi_hat<F: EnergyField>(op: &OperatorModel, q: &CurvatureData, u: &F, k: usize, cfg: &CascadeConfig) -> Result<(Barycenter, PsiTrace)> {
    let s = s_vector(op, u)?;
    if norm(&s) > 1.0 {
        return Err(Error::Precondition(format!("‖û‖ = {:.3e} exceeds 1", norm(&s))));
    }
    check_sublevel(op, q, u, cfg)?;
    psi_hat_density(u.manifold(), &u.density(), k, cfg)
}

/// s(u)ᵢ = ∫u v̂ᵢ over the negative eigenfields.
pub fn s_vector<F: EnergyField>(op: &OperatorModel, u: &F) -> Result<Vec<f64>> {
    v_component(op, u)
}

/// A point of A_{k,k̄}; `sigma` is absent in the k = 0 regime, where Ψ lands on the sphere.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AkkPoint {
    pub sigma: Option<Barycenter>,
    pub s: Vec<f64>,
}

pub fn psi<F: EnergyField>(op: &OperatorModel, q: &CurvatureData, u: &F, k: usize, cfg: &CascadeConfig) -> Result<AkkPoint> {
    let s = s_vector(op, u)?;
    let r = norm(&s);
    if k == 0 {
        if r == 0.0 {
            return Err(Error::UndefinedDirection);
        }
        return Ok(AkkPoint { sigma: None, s: s.iter().map(|v| v / r).collect() });
    }
    if r <= 1.0 {
        let (sigma, _) = psi_hat(op, q, u, k, cfg)?;
        return Ok(AkkPoint { sigma: Some(sigma), s });
    }
    check_sublevel(op, q, u, cfg)?;
    Ok(AkkPoint { sigma: Some(Barycenter::collapsed(u.manifold())), s: s.iter().map(|v| v / r).collect() })
}

/// |s − s'| + (1 − max(|s|, |s'|))₊ · dist(σ, σ'): the cone distance that forgets σ on |s| = 1.
pub fn akk_distance(m: &ModelManifold, a: &AkkPoint, b: &AkkPoint, metric: &MetricConfig) -> Result<f64> {
    if a.s.len() != b.s.len() {
        return Err(Error::Precondition("s vectors differ in length".into()));
    }
    let ds = norm(&a.s.iter().zip(&b.s).map(|(x, y)| x - y).collect::<Vec<_>>());
    let weight = (1.0 - norm(&a.s).max(norm(&b.s))).max(0.0);
    let db = match (&a.sigma, &b.sigma) {
        (Some(x), Some(y)) if weight > 0.0 => bary_distance(m, x, y, metric)?,
        _ => 0.0,
    };
    Ok(ds + weight * db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointOnM;

    #[test]
    fn scales_shrink_geometrically() {
        let s = CascadeConfig::default().scales(3);
        assert_eq!(s.len(), 3);
        assert!((s[1] - 0.0008).abs() < 1e-15);
        assert!((s[2] - 0.0008f64.powi(2) / 50.0).abs() < 1e-18);
    }

    #[test]
    fn two_atom_cloud_is_recovered() {
        let m = ModelManifold::sphere(4, 1.0);
        let a = PointOnM::north();
        let b = PointOnM::sphere_from_angles(std::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0);
        let f = WeightedCloud::new(vec![a, b], vec![0.5, 0.5]);
        let (sigma, trace) = psi_hat_density(&m, &f, 2, &CascadeConfig::default()).unwrap();
        assert_eq!(trace.level, 2);
        assert_eq!(sigma.len(), 2);
    }

    #[test]
    fn small_satellite_collapses_to_one_atom() {
        let m = ModelManifold::sphere(4, 1.0);
        let a = PointOnM::north();
        let b = PointOnM::sphere_from_angles(std::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0);
        let f = WeightedCloud::new(vec![a, b], vec![0.95, 0.05]);
        let (sigma, trace) = psi_hat_density(&m, &f, 2, &CascadeConfig::default()).unwrap();
        assert_eq!(trace.level, 1);
        assert_eq!(sigma.len(), 1);
        assert!(m.dist(&sigma.atoms[0], &a) < 1e-9);
    }

    #[test]
    fn akk_distance_forgets_sigma_on_the_sphere() {
        let m = ModelManifold::torus(4, 1.0);
        let x = AkkPoint { sigma: Some(Barycenter::dirac(PointOnM::Torus([0.0; 4]))), s: vec![1.0, 0.0] };
        let y = AkkPoint { sigma: Some(Barycenter::dirac(PointOnM::Torus([1.0, 0.0, 0.0, 0.0]))), s: vec![1.0, 0.0] };
        assert_eq!(akk_distance(&m, &x, &y, &MetricConfig::default()).unwrap(), 0.0);
    }
}
