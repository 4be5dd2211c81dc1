//! Palais–Smale diagnostics: the direct boundedness argument for k_P < 8π², and
//! the weak-limit step that passes the equation to the limit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{euler_residual, v_component};
use crate::geometry::ScalarField;
use crate::paneitz::{CurvatureData, OperatorModel};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PsCheckConfig {
    /// bound on |II'(u)[û]|/‖û‖_∞ on the second half of the sequence
    pub v_tol: f64,
    /// allowed growth of ‖u − ū‖ from the first to the second half
    pub plateau: f64,
}

impl Default for PsCheckConfig {
    fn default() -> Self {
        PsCheckConfig { v_tol: 1e-3, plateau: 1.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveBound {
    V,
    Complement,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsBoundReport {
    pub v_norms: Vec<f64>,
    /// |II'(u)[û]| / ‖û‖_∞, zero when û vanishes
    pub v_tests: Vec<f64>,
    /// ‖u − ū‖_{L²}
    pub oscillations: Vec<f64>,
    /// 1/8π² − 1/k_P: the exponent in the complement estimate as α → 1, ε → 0
    pub exponent_coefficient: f64,
    pub v_bound_holds: bool,
    pub complement_bound_holds: bool,
    pub active: ActiveBound,
    pub bounded: bool,
}

fn v_part(op: &OperatorModel, u: &ScalarField) -> Result<(ScalarField, Vec<f64>)> {
    let spec = op.full_spectrum()?;
    let a = v_component(op, u)?;
    let mut c = vec![0.0; u.manifold().basis_len()];
    for (&i, &ai) in spec.negative_modes().iter().zip(&a) {
        c[i] = ai;
    }
    Ok((ScalarField::from_coefficients(u.manifold(), c)?, a))
}

pub fn direct_ps_bound_check(op: &OperatorModel, q: &CurvatureData, seq: &[ScalarField], cfg: &PsCheckConfig) -> Result<PsBoundReport> {
    if q.k_p >= 8.0 * PI * PI * (1.0 - 1e-9) {
        return Err(Error::Precondition(format!("not applicable: k_P = {:.4} ≥ 8π²", q.k_p)));
    }
    if seq.is_empty() {
        return Err(Error::Precondition("empty sequence".into()));
    }
    let mut v_norms = Vec::new();
    let mut v_tests = Vec::new();
    let mut osc = Vec::new();
    for u in seq {
        let (hat, a) = v_part(op, u)?;
        let r = euler_residual(op, q, u, 1.0)?;
        let sup = hat.sup_norm();
        v_norms.push(a.iter().map(|x| x * x).sum::<f64>().sqrt());
        v_tests.push(if sup > 0.0 { (2.0 * r.inner(&hat)?).abs() / sup } else { 0.0 });
        osc.push(u.shift(-u.mean()).l2_norm());
    }
    let half = seq.len() / 2;
    let late = &v_tests[half..];
    let v_bound_holds = late.iter().all(|t| *t <= cfg.v_tol);
    let exponent_coefficient = 1.0 / (8.0 * PI * PI) - 1.0 / q.k_p;
    let complement_bound_holds = exponent_coefficient < 0.0;
    let early = osc[..half.max(1)].iter().cloned().fold(0.0, f64::max);
    let later = osc[half..].iter().cloned().fold(0.0, f64::max);
    let plateau = later <= cfg.plateau * early + 1e-12;
    let last = seq.len() - 1;
    let active = if v_norms[last] >= osc[last] - v_norms[last] { ActiveBound::V } else { ActiveBound::Complement };
    Ok(PsBoundReport {
        v_norms,
        v_tests,
        oscillations: osc,
        exponent_coefficient,
        v_bound_holds,
        complement_bound_holds,
        active,
        bounded: v_bound_holds && complement_bound_holds && plateau,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct WeakLimitConfig {
    /// number of basis modes in the test battery (constant first)
    pub tests: usize,
    /// required final gap in ∫f_l v − ∫f₀ v
    pub gap_tol: f64,
    pub residual_tol: f64,
}

impl Default for WeakLimitConfig {
    fn default() -> Self {
        WeakLimitConfig { tests: 16, gap_tol: 1e-6, residual_tol: 1e-7 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeakLimitReport {
    /// per sequence element, max over the battery of |∫e^{4u_l}v/∫e^{4u_l} − ∫e^{4u₀}v/∫e^{4u₀}|
    pub gaps: Vec<f64>,
    pub limit_residual: f64,
    pub converges: bool,
    pub residual_ok: bool,
}

fn moments(u: &ScalarField, tests: usize) -> Vec<f64> {
    let m = u.manifold();
    let log = u.log_exp_integral();
    let f = u.map(|v| (4.0 * v - log).exp());
    let c = f.coefficients();
    (0..tests.min(m.basis_len())).map(|i| c[i]).collect()
}

pub fn weak_limit_check(op: &OperatorModel, q: &CurvatureData, seq: &[ScalarField], u0: &ScalarField, rho: f64, cfg: &WeakLimitConfig) -> Result<WeakLimitReport> {
    if seq.is_empty() {
        return Err(Error::Precondition("empty sequence".into()));
    }
    let base = moments(u0, cfg.tests);
    let gaps: Vec<f64> = seq
        .iter()
        .map(|u| moments(u, cfg.tests).iter().zip(&base).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();
    let limit_residual = euler_residual(op, q, u0, rho)?.sup_norm();
    let last = *gaps.last().unwrap();
    let converges = last <= cfg.gap_tol && last <= gaps[0] + 1e-15;
    Ok(WeakLimitReport { gaps, limit_residual, converges, residual_ok: limit_residual <= cfg.residual_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ModelManifold;

    #[test]
    fn constant_sequence_is_bounded_and_converges() {
        let m = ModelManifold::torus(4, 1.0);
        let op = OperatorModel::geometric(&m, Default::default());
        let spec = crate::paneitz::OperatorSpec { kp_target: Some(4.0 * PI * PI), ..Default::default() };
        let op2 = OperatorModel::from_spec(&m, &spec).unwrap();
        let q = op2.curvature().unwrap();
        let u = ScalarField::constant(&m, -0.25 * m.volume().ln());
        let seq = vec![u.clone(); 4];
        let r = direct_ps_bound_check(&op, &q, &seq, &PsCheckConfig::default()).unwrap();
        assert!(r.bounded);
        let w = weak_limit_check(&op, &q, &seq, &u, 1.0, &WeakLimitConfig::default()).unwrap();
        assert!(w.converges && w.residual_ok);
    }

    #[test]
    fn supercritical_total_curvature_is_not_applicable() {
        let m = ModelManifold::sphere(4, 1.0);
        let op = OperatorModel::geometric(&m, Default::default());
        let q = op.curvature().unwrap();
        assert!(direct_ps_bound_check(&op, &q, &[ScalarField::zeros(&m)], &PsCheckConfig::default()).is_err());
    }
}
