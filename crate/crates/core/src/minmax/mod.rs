//! The min-max scheme over the cone on A_{k,k̄}: the initial path tΦ(z), a refined
//! upper estimate of the min-max value, Struwe's monotonicity monitor, and the solver.

mod diagnostics;
mod manufacture;
mod solver;

use serde::{Deserialize, Serialize};

pub use diagnostics::{direct_ps_bound_check, weak_limit_check, ActiveBound, PsBoundReport, PsCheckConfig, WeakLimitConfig, WeakLimitReport};
pub use manufacture::{manufacture, manufacture_profile, ExpCosProfile, Manufactured};
pub use solver::{
    check_forbidden, continuation, flow_solve, holder_proxy, warm_start_constant, Iterate, SolveConfig, SolveReport, SolveStatus, StepKind,
};

use crate::barycenter::{AkkPoint, Barycenter};
use crate::bubbles::{big_phi, TestField, TestMapConfig};
use crate::error::{Error, Result};
use crate::functional::{energy_rho, EnergyField};
use crate::paneitz::{kp_band, CurvatureData, KpBand, OperatorModel};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathConfig {
    /// barycenters sampled from M_k
    pub sigmas: Vec<Barycenter>,
    /// sampled s ∈ B̄^k̄; ignored entries are padded when k̄ = 0
    #[serde(default)]
    pub s_samples: Vec<Vec<f64>>,
    pub t_steps: usize,
    pub test_map: TestMapConfig,
}

#[derive(Clone, Debug)]
pub struct PathNode {
    /// None at the cone point
    pub z: Option<AkkPoint>,
    pub t: f64,
    pub field: TestField,
}

impl PathNode {
    pub fn is_boundary(&self) -> bool {
        self.t == 1.0
    }
}

/// Sampled map from the cone Â_{k,k̄} into test fields.
#[derive(Clone, Debug)]
pub struct PathSimplex {
    pub k: u32,
    pub k_bar: usize,
    pub nodes: Vec<PathNode>,
}

/// π̄(z, t) = tΦ_{S̄,λ̄}(z) sampled on the configured z and a uniform t grid.
pub fn initial_path(op: &OperatorModel, q: &CurvatureData, cfg: &PathConfig) -> Result<PathSimplex> {
    let k = match kp_band(q.k_p, 1e-9) {
        KpBand::Band(k) => k,
        KpBand::BoundaryForbidden(j) => return Err(Error::Forbidden { rho: 1.0, value: q.k_p, multiple: j }),
    };
    if cfg.t_steps == 0 {
        return Err(Error::InvalidSpec("need at least one t step".into()));
    }
    let m = op.manifold();
    let k_bar = op.full_spectrum()?.k_bar;
    let mut zs: Vec<(AkkPoint, TestField)> = Vec::new();
    let samples: Vec<Vec<f64>> = if k_bar == 0 { vec![Vec::new()] } else { cfg.s_samples.clone() };
    if k >= 1 {
        for sg in &cfg.sigmas {
            if sg.len() > k as usize {
                return Err(Error::Precondition(format!("σ has {} atoms, k = {k}", sg.len())));
            }
            for s in &samples {
                let f = big_phi(op, &cfg.test_map, Some(sg), s)?;
                zs.push((AkkPoint { sigma: Some(sg.clone()), s: s.clone() }, f));
            }
        }
    } else if k_bar >= 1 {
        for s in &samples {
            let n = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n == 0.0 {
                return Err(Error::UndefinedDirection);
            }
            let s: Vec<f64> = s.iter().map(|v| v / n).collect();
            let f = big_phi(op, &cfg.test_map, None, &s)?;
            zs.push((AkkPoint { sigma: None, s }, f));
        }
    }
    let mut nodes = vec![PathNode { z: None, t: 0.0, field: TestField::new(m, Vec::new(), None, 0.0)? }];
    for (z, f) in zs {
        for i in 1..=cfg.t_steps {
            let t = i as f64 / cfg.t_steps as f64;
            let field = if i == cfg.t_steps { f.clone() } else { f.scaled(t) };
            nodes.push(PathNode { z: Some(z.clone()), t, field });
        }
    }
    Ok(PathSimplex { k, k_bar, nodes })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineConfig {
    /// downhill steps per interior node
    pub budget: usize,
    /// highest basis degree moved by the refinement
    pub degree: u64,
    pub step: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig { budget: 4, degree: 2, step: 0.5 }
    }
}

/// ∂II_ρ/∂c_i along basis mode i: 2λᵢ∫u eᵢ + 4ρ∫Q eᵢ − 4ρk_P∫e^{4u}eᵢ/∫e^{4u}.
fn mode_gradient(op: &OperatorModel, q: &CurvatureData, u: &TestField, rho: f64, modes: &[usize], sym: &[f64]) -> Vec<f64> {
    let m = op.manifold();
    let dens = u.density();
    let qc = q.q.coefficients();
    modes
        .iter()
        .map(|&i| {
            let e = dens.integrate(|p| m.eval_mode(i, p));
            2.0 * sym[i] * u.mode_projection(i) + 4.0 * rho * qc[i] - 4.0 * rho * q.k_p * e
        })
        .collect()
}

/// Preconditioned downhill steps on the low modes of every interior node; t = 1 nodes are never moved.
pub fn refine_path(op: &OperatorModel, q: &CurvatureData, path: &PathSimplex, rho: f64, cfg: &RefineConfig) -> Result<PathSimplex> {
    let m = op.manifold();
    let sym = op.symbol().ok_or_else(|| Error::Unsupported("path refinement on rescaled models".into()))?.to_vec();
    let modes: Vec<usize> = (0..m.basis_len()).filter(|&i| {
        let d = m.mode_degree(i);
        d >= 1 && d <= cfg.degree
    }).collect();
    let mut out = path.clone();
    for node in out.nodes.iter_mut().filter(|n| !n.is_boundary()) {
        let mut e = energy_rho(op, q, &node.field, rho)?.total;
        for _ in 0..cfg.budget {
            let g = mode_gradient(op, q, &node.field, rho, &modes, &sym);
            let mut tau = cfg.step;
            let mut moved = false;
            for _ in 0..20 {
                let mut trial = node.field.clone();
                for (&i, gi) in modes.iter().zip(&g) {
                    trial = trial.plus_mode(i, -tau * gi / (sym[i].abs() + 1.0));
                }
                let te = energy_rho(op, q, &trial, rho)?.total;
                if te < e {
                    node.field = trial;
                    e = te;
                    moved = true;
                    break;
                }
                tau *= 0.5;
            }
            if !moved {
                break;
            }
        }
    }
    Ok(out)
}

fn node_energies<F: EnergyField>(op: &OperatorModel, q: &CurvatureData, fields: impl Iterator<Item = F>, rho: f64) -> Result<Vec<f64>> {
    fields.map(|f| energy_rho(op, q, &f, rho).map(|e| e.total)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinmaxEstimate {
    pub rho: f64,
    /// sup of II_ρ over the refined path
    pub estimate: f64,
    /// sup of II_ρ over the initial path
    pub unrefined: f64,
    /// max of II_ρ over the t = 1 nodes
    pub boundary_max: f64,
    pub node_energies: Vec<f64>,
}

pub fn minmax_value_estimate(op: &OperatorModel, q: &CurvatureData, path: &PathSimplex, rho: f64, cfg: &RefineConfig) -> Result<MinmaxEstimate> {
    let before = node_energies(op, q, path.nodes.iter().map(|n| n.field.clone()), rho)?;
    let refined = refine_path(op, q, path, rho, cfg)?;
    let after = node_energies(op, q, refined.nodes.iter().map(|n| n.field.clone()), rho)?;
    let boundary_max = path
        .nodes
        .iter()
        .zip(&before)
        .filter(|(n, _)| n.is_boundary())
        .map(|(_, e)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MinmaxEstimate {
        rho,
        estimate: after.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        unrefined: before.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        boundary_max,
        node_energies: after,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub rhos: Vec<f64>,
    pub estimates: Vec<f64>,
    /// slopes of est/ρ between neighbouring grid points
    pub increments: Vec<f64>,
    /// noise band per increment
    pub bands: Vec<f64>,
    /// smallest C ≥ 0 making est/ρ − Cρ non-increasing up to noise
    pub c: f64,
    /// steps that still increase beyond noise against the tested C
    pub violations: Vec<usize>,
    pub tested_c: f64,
}

/// `noise[i]` is the estimator uncertainty at ρᵢ; `prescribed` tests a given C instead of the fitted one.
pub fn monotonicity_monitor(rhos: &[f64], estimates: &[f64], noise: &[f64], prescribed: Option<f64>) -> Result<MonotonicityReport> {
    if rhos.len() < 3 || rhos.len() != estimates.len() || noise.len() != rhos.len() {
        return Err(Error::Precondition("need at least 3 matching grid points".into()));
    }
    let mut idx: Vec<usize> = (0..rhos.len()).collect();
    idx.sort_by(|a, b| rhos[*a].total_cmp(&rhos[*b]));
    let r: Vec<f64> = idx.iter().map(|&i| rhos[i]).collect();
    let e: Vec<f64> = idx.iter().map(|&i| estimates[i]).collect();
    let n: Vec<f64> = idx.iter().map(|&i| noise[i].abs()).collect();
    let mut increments = Vec::new();
    let mut bands = Vec::new();
    for i in 0..r.len() - 1 {
        let dr = r[i + 1] - r[i];
        if dr <= 0.0 {
            return Err(Error::Precondition("repeated ρ".into()));
        }
        increments.push((e[i + 1] / r[i + 1] - e[i] / r[i]) / dr);
        bands.push((n[i] / r[i] + n[i + 1] / r[i + 1]) / dr);
    }
    let c = increments.iter().zip(&bands).map(|(g, b)| g - b).fold(0.0, f64::max);
    let tested_c = prescribed.unwrap_or(c);
    let violations = increments
        .iter()
        .zip(&bands)
        .enumerate()
        .filter(|(_, (g, b))| **g - tested_c > **b + 1e-12 * (1.0 + g.abs()))
        .map(|(i, _)| i)
        .collect();
    Ok(MonotonicityReport { rhos: r, estimates: e, increments, bands, c, violations, tested_c })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LRule {
    /// L = −II(Φ(σ, 0)) at λ̄/2
    HalfScale,
    /// L = −0.4·max boundary II_ρ, used when the half-scale value misses the window
    Boundary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LCalibration {
    pub l: f64,
    pub rule: LRule,
    pub half_scale_value: Option<f64>,
    pub boundary_max: f64,
}

/// Picks the sublevel constant L so that the boundary of the path sits below −2L.
pub fn calibrate_l(op: &OperatorModel, q: &CurvatureData, path: &PathSimplex, cfg: &PathConfig, rhos: &[f64]) -> Result<LCalibration> {
    let mut boundary_max = f64::NEG_INFINITY;
    for &rho in rhos {
        for n in path.nodes.iter().filter(|n| n.is_boundary()) {
            boundary_max = boundary_max.max(energy_rho(op, q, &n.field, rho)?.total);
        }
    }
    let half_scale_value = match (path.k, cfg.sigmas.first()) {
        (k, Some(sg)) if k >= 1 => {
            let mut tm = cfg.test_map.clone();
            tm.lambda_bar = (tm.lambda_bar / 2.0).max(1.0);
            let f = big_phi(op, &tm, Some(sg), &vec![0.0; path.k_bar])?;
            Some(-energy_rho(op, q, &f, 1.0)?.total)
        }
        _ => None,
    };
    if let Some(l) = half_scale_value {
        if l > 0.0 && boundary_max < -2.0 * l {
            return Ok(LCalibration { l, rule: LRule::HalfScale, half_scale_value, boundary_max });
        }
    }
    if boundary_max >= 0.0 {
        return Err(Error::Precondition(format!("boundary energy {boundary_max:.3} is not negative; raise λ̄ or S̄")));
    }
    Ok(LCalibration { l: -0.4 * boundary_max, rule: LRule::Boundary, half_scale_value, boundary_max })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketReport {
    pub calibration: LCalibration,
    /// sup of the initial path over the ρ grid
    pub l_bar: f64,
    pub lower_guard: f64,
    pub estimates: Vec<MinmaxEstimate>,
    /// estimates at half the refinement budget, for the noise band
    pub half_budget: Vec<f64>,
    pub in_bracket: Vec<bool>,
    pub boundary_ok: bool,
    pub monotonicity: MonotonicityReport,
}

/// Runs the estimate over the ρ grid and checks −L/2 < Π̄_ρ ≤ L̄ together with monotonicity.
pub fn minmax_bracket(op: &OperatorModel, q: &CurvatureData, cfg: &PathConfig, refine: &RefineConfig, rhos: &[f64]) -> Result<BracketReport> {
    let path = initial_path(op, q, cfg)?;
    let calibration = calibrate_l(op, q, &path, cfg, rhos)?;
    let mut estimates = Vec::new();
    let mut half_budget = Vec::new();
    let half = RefineConfig { budget: refine.budget / 2, ..refine.clone() };
    for &rho in rhos {
        estimates.push(minmax_value_estimate(op, q, &path, rho, refine)?);
        half_budget.push(minmax_value_estimate(op, q, &path, rho, &half)?.estimate);
    }
    let l_bar = estimates.iter().map(|e| e.unrefined).fold(f64::NEG_INFINITY, f64::max);
    let lower_guard = -calibration.l / 2.0;
    let in_bracket = estimates.iter().map(|e| e.estimate > lower_guard && e.estimate <= l_bar).collect();
    let boundary_ok = estimates.iter().all(|e| e.boundary_max < -2.0 * calibration.l);
    let est: Vec<f64> = estimates.iter().map(|e| e.estimate).collect();
    let noise: Vec<f64> = est.iter().zip(&half_budget).map(|(a, b)| (a - b).abs()).collect();
    let monotonicity = monotonicity_monitor(rhos, &est, &noise, None)?;
    Ok(BracketReport { calibration, l_bar, lower_guard, estimates, half_budget, in_bracket, boundary_ok, monotonicity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ModelManifold;

    #[test]
    fn constant_estimates_need_no_c() {
        let r = monotonicity_monitor(&[0.95, 1.0, 1.05], &[-3.0, -3.0, -3.0], &[0.0; 3], None).unwrap();
        // est/ρ increases when est < 0 is constant, so C is the largest slope of −3/ρ
        assert!(r.c > 0.0 && r.violations.is_empty());
        let z = monotonicity_monitor(&[0.95, 1.0, 1.05], &[0.0; 3], &[0.0; 3], None).unwrap();
        assert_eq!(z.c, 0.0);
    }

    #[test]
    fn prescribed_c_flags_increase() {
        let r = monotonicity_monitor(&[0.9, 1.0, 1.1], &[0.0, 1.0, 2.0], &[0.0; 3], Some(0.0)).unwrap();
        assert_eq!(r.violations, vec![0, 1]);
    }

    #[test]
    fn trivial_band_path_is_the_cone_point() {
        let m = ModelManifold::torus(4, 1.0);
        let op = OperatorModel::geometric(&m, Default::default());
        let q = op.curvature().unwrap();
        let cfg = PathConfig {
            sigmas: vec![],
            s_samples: vec![],
            t_steps: 4,
            test_map: TestMapConfig { amplitude: 1.0, lambda_bar: 10.0, delta: 0.2 },
        };
        let path = initial_path(&op, &q, &cfg).unwrap();
        assert_eq!(path.nodes.len(), 1);
        let e = minmax_value_estimate(&op, &q, &path, 1.0, &RefineConfig::default()).unwrap();
        assert_eq!(e.estimate, 0.0);
    }
}
