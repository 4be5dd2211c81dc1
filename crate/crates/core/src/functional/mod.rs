//! The functional II and its ρ-family, Euler–Lagrange residuals, volume normalization,
//! Adams-type checks and the concentration detector.

mod concentration;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use concentration::{audit_verdict, concentration_detect, detect_with, union_mass, CoveringNet, ConcentrationStatus, ConcentrationVerdict};

use crate::bubbles::TestField;
use crate::error::{Error, Result};
use crate::geometry::{ModelManifold, PointOnM, ScalarField};
use crate::measure::WeightedCloud;
use crate::paneitz::{CurvatureData, OperatorModel};

/// Anything the functional can be evaluated on: node fields and bubble test fields.
pub trait EnergyField: Clone {
    fn manifold(&self) -> &Arc<ModelManifold>;
    /// ⟨P u, u⟩
    fn quadratic(&self, op: &OperatorModel) -> Result<f64>;
    /// ∫ Q u dV
    fn q_integral(&self, q: &CurvatureData) -> Result<f64>;
    /// log ∫ e^{4u} dV
    fn log_exp_integral(&self) -> f64;
    fn mean(&self) -> f64;
    /// ∫ u e_i dV against basis mode i
    fn mode_projection(&self, i: usize) -> f64;
    /// normalized e^{4u}dV
    fn density(&self) -> WeightedCloud;
    fn shifted(&self, c: f64) -> Self;
}

impl EnergyField for ScalarField {
    fn manifold(&self) -> &Arc<ModelManifold> {
        ScalarField::manifold(self)
    }
    fn quadratic(&self, op: &OperatorModel) -> Result<f64> {
        op.pairing(self, self)
    }
    fn q_integral(&self, q: &CurvatureData) -> Result<f64> {
        self.inner(&q.q)
    }
    fn log_exp_integral(&self) -> f64 {
        ScalarField::log_exp_integral(self)
    }
    fn mean(&self) -> f64 {
        ScalarField::mean(self)
    }
    fn mode_projection(&self, i: usize) -> f64 {
        self.coefficients()[i]
    }
    fn density(&self) -> WeightedCloud {
        WeightedCloud::from_field(self)
    }
    fn shifted(&self, c: f64) -> Self {
        self.shift(c)
    }
}

impl EnergyField for TestField {
    fn manifold(&self) -> &Arc<ModelManifold> {
        TestField::manifold(self)
    }
    fn quadratic(&self, op: &OperatorModel) -> Result<f64> {
        TestField::quadratic(self, op)
    }
    fn q_integral(&self, q: &CurvatureData) -> Result<f64> {
        TestField::q_integral(self, q)
    }
    fn log_exp_integral(&self) -> f64 {
        TestField::log_exp_integral(self)
    }
    fn mean(&self) -> f64 {
        TestField::mean(self)
    }
    fn mode_projection(&self, i: usize) -> f64 {
        TestField::mode_projection(self, i)
    }
    fn density(&self) -> WeightedCloud {
        TestField::density(self)
    }
    fn shifted(&self, c: f64) -> Self {
        TestField::shifted(self, c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub quadratic: f64,
    pub linear: f64,
    pub logterm: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(quadratic: f64, linear: f64, logterm: f64) -> Self {
        EnergyBreakdown { quadratic, linear, logterm, total: quadratic + linear + logterm }
    }
}

/// II(u) = ⟨Pu,u⟩ + 4∫Qu − k_P log∫e^{4u}.
pub fn energy<F: EnergyField>(op: &OperatorModel, q: &CurvatureData, u: &F) -> Result<EnergyBreakdown> {
    energy_rho(op, q, u, 1.0)
}

/// II_ρ(u) = ⟨Pu,u⟩ + 4ρ∫Qu − ρk_P log∫e^{4u}.
pub fn energy_rho<F: EnergyField>(op: &OperatorModel, q: &CurvatureData, u: &F, rho: f64) -> Result<EnergyBreakdown> {
    let quad = u.quadratic(op)?;
    let lin = u.q_integral(q)?;
    let log = u.log_exp_integral();
    if !log.is_finite() {
        return Err(Error::Precondition("∫e^{4u} is not finite".into()));
    }
    Ok(EnergyBreakdown::new(quad, 4.0 * rho * lin, -rho * q.k_p * log))
}

/// The three ρ-independent pieces (⟨Pu,u⟩, ∫Qu, log∫e^{4u}) for sweeping ρ cheaply.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnergyParts {
    pub quadratic: f64,
    pub q_integral: f64,
    pub log_mass: f64,
    pub k_p: f64,
}

impl EnergyParts {
    pub fn of<F: EnergyField>(op: &OperatorModel, q: &CurvatureData, u: &F) -> Result<Self> {
        Ok(EnergyParts { quadratic: u.quadratic(op)?, q_integral: u.q_integral(q)?, log_mass: u.log_exp_integral(), k_p: q.k_p })
    }

    pub fn at(&self, rho: f64) -> f64 {
        self.quadratic + 4.0 * rho * self.q_integral - rho * self.k_p * self.log_mass
    }
}

/// II_ρ/ρ − II_ρ'/ρ' − (1/ρ − 1/ρ')⟨Pu,u⟩, which vanishes identically.
pub fn rho_identity_defect(parts: &EnergyParts, rho: f64, rho2: f64) -> f64 {
    parts.at(rho) / rho - parts.at(rho2) / rho2 - (1.0 / rho - 1.0 / rho2) * parts.quadratic
}

/// P u + 2ρQ − 2ρk_P e^{4u}/∫e^{4u}.
pub fn euler_residual(op: &OperatorModel, q: &CurvatureData, u: &ScalarField, rho: f64) -> Result<ScalarField> {
    let pu = op.apply(u)?;
    pu.same_manifold(&q.q)?;
    let log = u.log_exp_integral();
    let vals = pu
        .values()
        .iter()
        .zip(q.q.values())
        .zip(u.values())
        .map(|((p, qv), v)| p + 2.0 * rho * qv - 2.0 * rho * q.k_p * (4.0 * v - log).exp())
        .collect();
    ScalarField::from_values(u.manifold(), vals)
}

/// u − ¼ log∫e^{4u}, so that ∫e^{4u'} = 1.
pub fn normalize_volume<F: EnergyField>(u: &F) -> F {
    let mut v = u.shifted(-0.25 * u.log_exp_integral());
    // one correction pass absorbs the rounding of the first shift
    let r = v.log_exp_integral();
    if r != 0.0 {
        v = v.shifted(-0.25 * r);
    }
    v
}

/// ⟨P⁺u, u⟩ = ⟨Pu,u⟩ + 2Σ|λᵢ|αᵢ².
pub fn plus_quadratic<F: EnergyField>(op: &OperatorModel, u: &F) -> Result<f64> {
    let spec = op.full_spectrum()?;
    let mut q = u.quadratic(op)?;
    for (&i, &l) in spec.negative_modes().iter().zip(spec.negative_values()) {
        let a = u.mode_projection(i);
        q += 2.0 * l.abs() * a * a;
    }
    Ok(q)
}

/// log∫e^{4(u − ū)} − ⟨P⁺u,u⟩/8π².
pub fn adams_gap<F: EnergyField>(op: &OperatorModel, u: &F) -> Result<f64> {
    let lhs = u.log_exp_integral() - 4.0 * u.mean();
    Ok(lhs - plus_quadratic(op, u)? / (8.0 * PI * PI))
}

/// Coefficients αᵢ = ∫u v̂ᵢ of the component û in V.
pub fn v_component<F: EnergyField>(op: &OperatorModel, u: &F) -> Result<Vec<f64>> {
    let spec = op.full_spectrum()?;
    Ok(spec.negative_modes().iter().map(|&i| u.mode_projection(i)).collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Region {
    pub center: PointOnM,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    Applicable,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImprovedAdamsReport {
    pub status: HypothesisStatus,
    /// ∫_{Ωᵢ}e^{4u}/∫e^{4u}
    pub masses: Vec<f64>,
    pub alpha_sq: f64,
    pub log_term: f64,
    pub quadratic: f64,
    /// log∫e^{4(u−ū)} − ⟨Pu,u⟩/(8(ℓ+1)π² − ε̃)
    pub improved_gap: f64,
    pub plain_gap: f64,
}

/// Checks the hypotheses of the improved inequality on balls Ω₁…Ω_{ℓ+1} and reports its ratio.
pub fn improved_adams_check<F: EnergyField>(
    op: &OperatorModel,
    u: &F,
    regions: &[Region],
    delta0: f64,
    gamma0: f64,
    s_bound: f64,
    eps_tilde: f64,
) -> Result<ImprovedAdamsReport> {
    let m = u.manifold();
    let n = regions.len();
    if n == 0 {
        return Err(Error::Precondition("need at least one region".into()));
    }
    if !(gamma0 > 0.0 && gamma0 < 1.0 / n as f64) {
        return Err(Error::Precondition(format!("γ₀ = {gamma0} outside (0, 1/{n})")));
    }
    for i in 0..n {
        for j in i + 1..n {
            let gap = m.geodesic_distance(&regions[i].center, &regions[j].center)? - regions[i].radius - regions[j].radius;
            if gap < 0.0 {
                return Err(Error::Precondition(format!("regions {i} and {j} overlap")));
            }
            if gap < delta0 {
                return Err(Error::Precondition(format!("regions {i} and {j} closer than δ₀ = {delta0}")));
            }
        }
    }
    let dens = u.density();
    let masses: Vec<f64> = regions
        .iter()
        .map(|r| dens.integrate(|p| if m.dist(p, &r.center) < r.radius { 1.0 } else { 0.0 }))
        .collect();
    let alpha_sq: f64 = v_component(op, u)?.iter().map(|a| a * a).sum();
    let log_term = u.log_exp_integral() - 4.0 * u.mean();
    let quadratic = u.quadratic(op)?;
    let ok = masses.iter().all(|&w| w >= gamma0) && alpha_sq <= s_bound;
    let denom = 8.0 * n as f64 * PI * PI - eps_tilde;
    Ok(ImprovedAdamsReport {
        status: if ok { HypothesisStatus::Applicable } else { HypothesisStatus::NotApplicable },
        masses,
        alpha_sq,
        log_term,
        quadratic,
        improved_gap: log_term - quadratic / denom,
        plain_gap: adams_gap(op, u)?,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum SublevelOutcome {
    NotInSublevel { energy: f64 },
    HypothesisViolated { v_norm: f64 },
    Points { energy: f64, verdict: ConcentrationVerdict },
}

/// For II(u) ≤ −L and ‖û‖ ≤ S, locates k points carrying all but ε of e^{4u}.
#[allow(clippy::too_many_arguments)]
pub fn sublevel_concentration<F: EnergyField>(
    op: &OperatorModel,
    q: &CurvatureData,
    u: &F,
    k: usize,
    s_bound: f64,
    eps: f64,
    r: f64,
    l_threshold: f64,
) -> Result<SublevelOutcome> {
    let e = energy(op, q, u)?.total;
    if e > -l_threshold {
        return Ok(SublevelOutcome::NotInSublevel { energy: e });
    }
    let v_norm = v_component(op, u)?.iter().map(|a| a * a).sum::<f64>().sqrt();
    if v_norm > s_bound {
        return Ok(SublevelOutcome::HypothesisViolated { v_norm });
    }
    let verdict = concentration_detect(u.manifold(), &u.density(), k, eps, r)?;
    Ok(SublevelOutcome::Points { energy: e, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paneitz::SignConvention;

    #[test]
    fn round_sphere_zero_field() {
        let m = ModelManifold::sphere(6, 1.0);
        let op = OperatorModel::geometric(&m, SignConvention::Literal);
        let q = op.curvature().unwrap();
        let u = ScalarField::zeros(&m);
        let e = energy(&op, &q, &u).unwrap();
        let want = -8.0 * PI * PI * (8.0 * PI * PI / 3.0f64).ln();
        assert!((e.total - want).abs() < 1e-6);
        let r = euler_residual(&op, &q, &u, 1.0).unwrap();
        assert!(r.sup_norm() < 1e-8);
    }

    #[test]
    fn normalization_of_constant() {
        let m = ModelManifold::sphere(4, 1.0);
        let u = normalize_volume(&ScalarField::constant(&m, 5.0));
        let want = -0.25 * (8.0 * PI * PI / 3.0f64).ln();
        assert!((u.values()[0] - want).abs() < 1e-12);
        assert!(u.log_exp_integral().abs() < 1e-12);
    }

    #[test]
    fn gap_of_constant_is_log_volume() {
        let m = ModelManifold::torus(4, 1.0);
        let op = OperatorModel::geometric(&m, SignConvention::Literal);
        let g = adams_gap(&op, &ScalarField::constant(&m, 2.0)).unwrap();
        assert!((g - m.volume().ln()).abs() < 1e-10);
    }
}
