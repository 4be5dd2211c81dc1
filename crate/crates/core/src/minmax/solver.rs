//! Volume-preserving gradient flow with a Newton polish for
//! P u + 2ρQ = 2ρk_P e^{4u}/∫e^{4u}, and ρ-continuation.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{energy_rho, euler_residual, normalize_volume, v_component};
use crate::geometry::{ModelManifold, ScalarField};
use crate::paneitz::{CurvatureData, OperatorModel};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub rho0: f64,
    pub rho_grid: Vec<f64>,
    /// initial flow step, in units of the H² preconditioner
    pub flow_step: f64,
    /// switch from flow to Newton once the residual sup-norm drops below this
    pub newton_switch: f64,
    /// residual sup-norm for convergence
    pub newton_tol: f64,
    pub max_flow_iter: usize,
    pub max_newton_iter: usize,
    /// exponent of the Hölder proxy
    pub holder_alpha: f64,
    /// guard radius around ρk_P ∈ 8π²ℤ, relative to 8π²
    pub forbidden_radius: f64,
    /// sup|u − ū| beyond which a run is declared unbounded
    pub blowup: f64,
    /// number of trailing iterates kept as fields in the report
    pub keep_tail: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            rho0: 0.05,
            rho_grid: vec![0.95, 0.975, 1.0, 1.025, 1.05],
            flow_step: 1.0,
            newton_switch: 1e-2,
            newton_tol: 1e-8,
            max_flow_iter: 500,
            max_newton_iter: 30,
            holder_alpha: 0.5,
            forbidden_radius: 0.02,
            blowup: 50.0,
            keep_tail: 0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.rho0 <= 0.1) {
            return Err(Error::InvalidSpec(format!("ρ₀ = {} must lie in (0, 0.1]", self.rho0)));
        }
        if self.rho_grid.is_empty() {
            return Err(Error::InvalidSpec("empty ρ grid".into()));
        }
        for &r in &self.rho_grid {
            if (r - 1.0).abs() > self.rho0 + 1e-12 {
                return Err(Error::InvalidSpec(format!("ρ = {r} outside [1 − ρ₀, 1 + ρ₀]")));
            }
        }
        if !(self.holder_alpha > 0.0 && self.holder_alpha < 1.0) {
            return Err(Error::InvalidSpec("Hölder exponent must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Start,
    Flow,
    Newton,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Iterate {
    pub kind: StepKind,
    pub energy: f64,
    /// sup-norm of the Euler–Lagrange residual
    pub residual: f64,
    /// |∫e^{4u} − 1|
    pub mass_defect: f64,
    /// ‖û‖, the V-component
    pub v_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    PsUnbounded,
    MaxIter,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub rho: f64,
    pub status: SolveStatus,
    pub history: Vec<Iterate>,
    /// Hölder proxy at the start, at every Newton iterate and at the end
    pub holder: Vec<f64>,
    /// final node values
    pub u: Vec<f64>,
    /// node values of the last `keep_tail` iterates, oldest first
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tail: Vec<Vec<f64>>,
}

impl SolveReport {
    pub fn final_field(&self, m: &Arc<ModelManifold>) -> Result<ScalarField> {
        ScalarField::from_values(m, self.u.clone())
    }

    pub fn tail_fields(&self, m: &Arc<ModelManifold>) -> Result<Vec<ScalarField>> {
        self.tail.iter().map(|v| ScalarField::from_values(m, v.clone())).collect()
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::INFINITY, |h| h.residual)
    }

    /// Flow steps never raise the energy by more than `tol`.
    pub fn descent_holds(&self, tol: f64) -> bool {
        self.history.windows(2).all(|w| w[1].kind != StepKind::Flow || w[1].energy <= w[0].energy + tol)
    }

    pub fn normalization_holds(&self, tol: f64) -> bool {
        self.history.iter().all(|h| h.mass_defect <= tol)
    }
}

/// sup|u| plus the largest quotient |u(p) − u(q)|/d^α over nearby node pairs.
pub fn holder_proxy(u: &ScalarField, alpha: f64) -> f64 {
    let m = u.manifold();
    let n = m.node_count();
    let stride = (n / 1500).max(1);
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let reach = 4.0 * (m.volume() / idx.len() as f64).powf(0.25);
    let v = u.values();
    let mut q: f64 = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let d = m.dist(&m.nodes()[i], &m.nodes()[j]);
            if d > 0.0 && d < reach {
                q = q.max((v[i] - v[j]).abs() / d.powf(alpha));
            }
        }
    }
    u.sup_norm() + q
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// H² preconditioner multipliers per basis mode; zero on constants.
fn preconditioner(op: &OperatorModel) -> Vec<f64> {
    let m = op.manifold();
    (0..m.basis_len())
        .map(|i| {
            if m.basis_mode(i).is_constant() {
                return 0.0;
            }
            let mu = -m.laplace_eigenvalue(i);
            let l = op.symbol().map_or(mu * mu, |s| s[i].abs());
            1.0 / (l + 1.0)
        })
        .collect()
}

fn apply_multiplier(f: &ScalarField, mult: &[f64]) -> Result<ScalarField> {
    let c = f.coefficients().iter().zip(mult).map(|(a, b)| a * b).collect();
    ScalarField::from_coefficients(f.manifold(), c)
}

struct Probe {
    energy: f64,
    residual: ScalarField,
}

fn probe(op: &OperatorModel, q: &CurvatureData, u: &ScalarField, rho: f64) -> Result<Probe> {
    Ok(Probe { energy: energy_rho(op, q, u, rho)?.total, residual: euler_residual(op, q, u, rho)? })
}

fn record(op: &OperatorModel, u: &ScalarField, p: &Probe, kind: StepKind) -> Result<Iterate> {
    let v = v_component(op, u)?;
    Ok(Iterate {
        kind,
        energy: p.energy,
        residual: sup(p.residual.values()),
        mass_defect: (u.log_exp_integral().exp() - 1.0).abs(),
        v_norm: v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    })
}

fn unbounded(u: &ScalarField, cfg: &SolveConfig) -> bool {
    let mean = u.mean();
    !u.values().iter().all(|v| v.is_finite()) || u.values().iter().any(|v| (v - mean).abs() > cfg.blowup)
}

/// Restarted GMRES with right preconditioning. Returns x and the relative residual.
pub(crate) fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_cycles: usize,
) -> (Vec<f64>, f64) {
    let n = b.len();
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
    let bn = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bn == 0.0 {
        return (x, 0.0);
    }
    let mut rel = 1.0;
    for _ in 0..max_cycles {
        let ax = apply(&precond(&x));
        let r: Vec<f64> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
        let beta = dot(&r, &r).sqrt();
        rel = beta / bn;
        if rel <= tol {
            break;
        }
        let mut basis = vec![r.iter().map(|v| v / beta).collect::<Vec<_>>()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k = 0;
        while k < restart {
            let mut w = apply(&precond(&basis[k]));
            for (i, v) in basis.iter().enumerate() {
                h[i][k] = dot(&w, v);
                for (a, b) in w.iter_mut().zip(v) {
                    *a -= h[i][k] * b;
                }
            }
            h[k + 1][k] = dot(&w, &w).sqrt();
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            let next = dot(&w, &w).sqrt();
            k += 1;
            rel = g[k].abs() / bn;
            if rel <= tol || next < 1e-300 || next.is_nan() {
                break;
            }
            basis.push(w.iter().map(|v| v / next).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (a, b) in x.iter_mut().zip(&basis[i]) {
                *a += yi * b;
            }
        }
        if rel <= tol {
            break;
        }
    }
    (precond(&x), rel)
}

/// One Newton correction: J δ = −R in the zero-mean coefficient space, with
/// J v = P v − 8ρk_P (f v − f ∫f v) and f = e^{4u}/∫e^{4u}.
fn newton_direction(op: &OperatorModel, q: &CurvatureData, u: &ScalarField, r: &ScalarField, rho: f64, mult: &[f64], tol: f64) -> Result<ScalarField> {
    let m = u.manifold().clone();
    let log = u.log_exp_integral();
    let f: Vec<f64> = u.values().iter().map(|v| (4.0 * v - log).exp()).collect();
    let c = 8.0 * rho * q.k_p;
    let constant: Vec<bool> = (0..m.basis_len()).map(|i| m.basis_mode(i).is_constant()).collect();
    let sym: Option<Vec<f64>> = op.symbol().map(|s| s.to_vec());
    let apply = |x: &[f64]| -> Vec<f64> {
        let v = ScalarField::from_coefficients(&m, x.to_vec()).expect("basis length");
        let pv = match &sym {
            Some(s) => m.synthesize(&x.iter().zip(s).map(|(a, b)| a * b).collect::<Vec<_>>()),
            None => op.apply(&v).expect("same manifold").into_values(),
        };
        let fv: f64 = m.weights().iter().zip(&f).zip(v.values()).map(|((w, a), b)| w * a * b).sum();
        let vals: Vec<f64> = (0..pv.len()).map(|k| pv[k] - c * (f[k] * v.values()[k] - f[k] * fv)).collect();
        let mut out = m.analyze(&vals);
        for (o, &is_c) in out.iter_mut().zip(&constant) {
            if is_c {
                *o = 0.0;
            }
        }
        out
    };
    let precond = |x: &[f64]| -> Vec<f64> { x.iter().zip(mult).map(|(a, b)| a * b).collect() };
    let mut b: Vec<f64> = r.coefficients().iter().map(|v| -v).collect();
    for (o, &is_c) in b.iter_mut().zip(&constant) {
        if is_c {
            *o = 0.0;
        }
    }
    let (x, _) = gmres(apply, precond, &b, tol, 60, 20);
    ScalarField::from_coefficients(&m, x)
}

/// Gradient flow on II_ρ, normalized after every step, then Newton polish.
pub fn flow_solve(op: &OperatorModel, q: &CurvatureData, u0: &ScalarField, rho: f64, cfg: &SolveConfig) -> Result<SolveReport> {
    if !Arc::ptr_eq(op.manifold(), u0.manifold()) {
        return Err(Error::ManifoldMismatch);
    }
    let mult = preconditioner(op);
    let mut u = normalize_volume(u0);
    let mut p = probe(op, q, &u, rho)?;
    let mut history = vec![record(op, &u, &p, StepKind::Start)?];
    let mut holder = vec![holder_proxy(&u, cfg.holder_alpha)];
    let mut tau = cfg.flow_step;
    let mut status = SolveStatus::MaxIter;
    let mut tail: std::collections::VecDeque<Vec<f64>> = std::collections::VecDeque::new();
    let keep = |tail: &mut std::collections::VecDeque<Vec<f64>>, u: &ScalarField| {
        if cfg.keep_tail > 0 {
            if tail.len() == cfg.keep_tail {
                tail.pop_front();
            }
            tail.push_back(u.values().to_vec());
        }
    };
    keep(&mut tail, &u);
    let finish = |u: ScalarField, status, history, mut holder: Vec<f64>, tail: std::collections::VecDeque<Vec<f64>>| {
        holder.push(holder_proxy(&u, cfg.holder_alpha));
        Ok(SolveReport { rho, status, history, holder, u: u.into_values(), tail: tail.into() })
    };

    for _ in 0..cfg.max_flow_iter {
        let res = sup(p.residual.values());
        if res <= cfg.newton_switch {
            break;
        }
        let dir = apply_multiplier(&p.residual, &mult)?;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = normalize_volume(&u.axpy(-tau, &dir)?);
            if trial.values().iter().all(|v| v.is_finite()) {
                if let Ok(tp) = probe(op, q, &trial, rho) {
                    if tp.energy <= p.energy {
                        u = trial;
                        p = tp;
                        accepted = true;
                        break;
                    }
                }
            }
            tau *= 0.5;
        }
        if !accepted {
            // stagnation: no descent step is left at this resolution
            break;
        }
        history.push(record(op, &u, &p, StepKind::Flow)?);
        keep(&mut tail, &u);
        if unbounded(&u, cfg) || p.energy < -1e8 {
            return finish(u, SolveStatus::PsUnbounded, history, holder, tail);
        }
        tau = (tau * 1.5).min(4.0 * cfg.flow_step);
    }

    for _ in 0..cfg.max_newton_iter {
        let res = sup(p.residual.values());
        if res <= cfg.newton_tol {
            status = SolveStatus::Converged;
            break;
        }
        let d = newton_direction(op, q, &u, &p.residual, rho, &mult, (1e-2 * res).clamp(1e-13, 1e-4))?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let trial = normalize_volume(&u.axpy(step, &d)?);
            if trial.values().iter().all(|v| v.is_finite()) {
                let tp = probe(op, q, &trial, rho)?;
                if sup(tp.residual.values()) < res {
                    u = trial;
                    p = tp;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        history.push(record(op, &u, &p, StepKind::Newton)?);
        keep(&mut tail, &u);
        holder.push(holder_proxy(&u, cfg.holder_alpha));
        if unbounded(&u, cfg) {
            return finish(u, SolveStatus::PsUnbounded, history, holder, tail);
        }
    }
    if sup(p.residual.values()) <= cfg.newton_tol && history.last().map_or(false, |h| h.mass_defect <= 1e-10) {
        status = SolveStatus::Converged;
    }
    finish(u, status, history, holder, tail)
}

/// Rejects ρ with ρk_P within the guard radius of 8π²ℤ₊.
pub fn check_forbidden(k_p: f64, grid: &[f64], radius: f64) -> Result<()> {
    let unit = 8.0 * PI * PI;
    for &rho in grid {
        let v = rho * k_p;
        let j = (v / unit).round();
        if j >= 1.0 && (v - j * unit).abs() <= radius * unit {
            return Err(Error::Forbidden { rho, value: v, multiple: j as u32 });
        }
    }
    Ok(())
}

/// Solves along the ρ grid, warm-starting each point from the previous one.
pub fn continuation(op: &OperatorModel, q: &CurvatureData, u0: &ScalarField, cfg: &SolveConfig) -> Result<Vec<SolveReport>> {
    cfg.validate()?;
    check_forbidden(q.k_p, &cfg.rho_grid, cfg.forbidden_radius)?;
    let mut out = Vec::with_capacity(cfg.rho_grid.len());
    let mut u = u0.clone();
    for &rho in &cfg.rho_grid {
        let rep = flow_solve(op, q, &u, rho, cfg)?;
        if rep.status == SolveStatus::Converged {
            u = rep.final_field(op.manifold())?;
        }
        out.push(rep);
    }
    Ok(out)
}

/// max ‖u_ρ − u_ρ'‖_{L²}/|ρ − ρ'| over adjacent converged grid points.
pub fn warm_start_constant(m: &Arc<ModelManifold>, reports: &[SolveReport]) -> Result<Option<f64>> {
    let mut c: Option<f64> = None;
    for w in reports.windows(2) {
        if w[0].status != SolveStatus::Converged || w[1].status != SolveStatus::Converged {
            continue;
        }
        let a = w[0].final_field(m)?;
        let b = w[1].final_field(m)?;
        let d = a.axpy(-1.0, &b)?.l2_norm() / (w[1].rho - w[0].rho).abs();
        c = Some(c.map_or(d, |x: f64| x.max(d)));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmres_solves_a_small_system() {
        let a = [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let apply = |x: &[f64]| (0..3).map(|i| (0..3).map(|j| a[i][j] * x[j]).sum()).collect::<Vec<f64>>();
        let (x, rel) = gmres(apply, |x: &[f64]| x.to_vec(), &[1.0, 2.0, 3.0], 1e-12, 3, 5);
        assert!(rel < 1e-12);
        let r = apply(&x);
        for (ri, bi) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((ri - bi).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_torus_without_curvature_is_solved_by_constants() {
        let m = ModelManifold::torus(4, 1.0);
        let op = OperatorModel::geometric(&m, Default::default());
        let q = op.curvature().unwrap();
        let rep = flow_solve(&op, &q, &ScalarField::zeros(&m), 1.0, &SolveConfig::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert_eq!(rep.history.len(), 1);
    }

    #[test]
    fn sphere_rejects_the_forbidden_value() {
        let m = ModelManifold::sphere(4, 1.0);
        let op = OperatorModel::geometric(&m, Default::default());
        let q = op.curvature().unwrap();
        let err = continuation(&op, &q, &ScalarField::zeros(&m), &SolveConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Forbidden { multiple: 1, .. }));
    }

    #[test]
    fn round_sphere_returns_to_constants() {
        let m = ModelManifold::sphere(6, 1.0);
        let spec = crate::paneitz::OperatorSpec { q_scale: Some(0.75), ..Default::default() };
        let op = OperatorModel::from_spec(&m, &spec).unwrap();
        let q = op.curvature().unwrap();
        let u0 = ScalarField::from_fn(&m, |p| match p {
            crate::geometry::PointOnM::Sphere(x) => 1e-3 * (x[0] * x[1] + 0.5 * x[2] - x[3] * x[3]),
            _ => 0.0,
        });
        // constants are a saddle here, so skip the flow and let Newton pull back
        let cfg = SolveConfig { newton_switch: 1.0, ..Default::default() };
        let rep = flow_solve(&op, &q, &u0, 1.0, &cfg).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged, "{:?}", rep.history.last());
        assert!(rep.final_residual() <= 1e-8);
        assert!(rep.normalization_holds(1e-10));
    }
}
