//! The deformation T^t_j of a neighborhood of M_j(ε) onto M_j, and T̂^t_j which
//! continues it to the projection P_j.

use serde::{Deserialize, Serialize};

use super::strata::{stratum_fit, stratum_margin};
use super::{bary_distance, Barycenter, MetricConfig};
use crate::error::{Error, Result};
use crate::geometry::{ModelManifold, PointOnM};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HomotopyConfig {
    pub eps: f64,
    pub eps_hat: f64,
    pub eta: f64,
}

impl HomotopyConfig {
    /// ε̂ = ε²/100 and η = √ε̂.
    pub fn for_eps(eps: f64) -> Self {
        let eps_hat = eps * eps / 100.0;
        HomotopyConfig { eps, eps_hat, eta: eps_hat.sqrt() }
    }
}

/// Smooth cutoff: 1 on [0, a], 0 on [b, ∞), quintic smoothstep in between.
pub(crate) fn cutoff(d: f64, a: f64, b: f64) -> f64 {
    if d <= a {
        return 1.0;
    }
    if d >= b {
        return 0.0;
    }
    let x = (b - d) / (b - a);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

pub(crate) fn geodesic(m: &ModelManifold, a: &PointOnM, b: &PointOnM, t: f64) -> PointOnM {
    let v = m.log_map(a, b);
    m.exp_map(a, &v.map(|x| t * x))
}

/// σ together with its anchor P_j(σ) = Σ s_l δ_{y_l} and the cluster data of the appendix.
#[derive(Clone, Debug)]
pub struct Homotopy<'a> {
    m: &'a ModelManifold,
    sigma: Barycenter,
    anchor: Barycenter,
    eta: f64,
    /// for each atom of σ: the anchor atom whose η/4-ball contains it
    owner: Vec<Option<usize>>,
    rho: Vec<f64>,
    dist: Vec<f64>,
    masses: Vec<f64>,
    centers: Vec<PointOnM>,
}

impl<'a> Homotopy<'a> {
    /// Checks that σ lies within ε̂ of an anchor in M_j(ε/2).
    pub fn new(m: &'a ModelManifold, sigma: &Barycenter, j: usize, cfg: &HomotopyConfig, metric: &MetricConfig) -> Result<Self> {
        let fit = stratum_fit(m, sigma, j, metric)?;
        if fit.distance >= cfg.eps_hat {
            return Err(Error::Precondition(format!("σ is {:.3e} from M_{j}, beyond ε̂ = {:.3e}", fit.distance, cfg.eps_hat)));
        }
        if j >= 2 && fit.sigma.len() == j {
            let margin = stratum_margin(m, &fit.sigma, j - 1, metric)?;
            if margin <= cfg.eps / 2.0 {
                return Err(Error::Precondition(format!("anchor margin {margin:.3e} ≤ ε/2")));
            }
        } else if j >= 2 && fit.sigma.len() < j && sigma.len() > fit.sigma.len() {
            return Err(Error::Precondition("anchor lies in a lower stratum".into()));
        }
        Ok(Self::with_anchor(m, sigma, fit.sigma, cfg.eta))
    }

    /// No precondition checks; used inside the Ψ̂ cascade.
    pub(crate) fn with_anchor(m: &'a ModelManifold, sigma: &Barycenter, anchor: Barycenter, eta: f64) -> Self {
        let n = sigma.len();
        let mut owner = vec![None; n];
        let mut rho = vec![0.0; n];
        let mut dist = vec![f64::INFINITY; n];
        for (i, x) in sigma.atoms.iter().enumerate() {
            for (l, y) in anchor.atoms.iter().enumerate() {
                let d = m.dist(x, y);
                if d < eta / 4.0 && d < dist[i] {
                    owner[i] = Some(l);
                    dist[i] = d;
                    rho[i] = cutoff(d, eta / 16.0, eta / 8.0);
                }
            }
        }
        let mut masses = vec![0.0; anchor.len()];
        let mut centers = anchor.atoms.clone();
        for (l, c) in centers.iter_mut().enumerate() {
            let (pts, w): (Vec<PointOnM>, Vec<f64>) = (0..n)
                .filter(|&i| owner[i] == Some(l) && dist[i] < eta / 8.0)
                .map(|i| (sigma.atoms[i], rho[i] * sigma.weights[i]))
                .filter(|(_, w)| *w > 0.0)
                .unzip();
            masses[l] = w.iter().sum();
            if masses[l] > 0.0 {
                *c = m.center_unchecked(&pts, &w);
            }
        }
        Homotopy { m, sigma: sigma.clone(), anchor, eta, owner, rho, dist, masses, centers }
    }

    pub fn anchor(&self) -> &Barycenter {
        &self.anchor
    }

    /// T^t_j(σ).
    pub fn at(&self, t: f64) -> Barycenter {
        let t = t.clamp(0.0, 1.0);
        let m = self.m;
        let n = self.sigma.len();
        let mut atoms = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut core_mass = 0.0;
        let mut core_now = 0.0;
        for i in 0..n {
            let (x, ti) = (self.sigma.atoms[i], self.sigma.weights[i]);
            match self.owner[i] {
                None => {
                    atoms.push(x);
                    weights.push((1.0 - t) * ti);
                }
                Some(l) if self.dist[i] >= self.eta / 8.0 => {
                    let z = 8.0 / self.eta * self.dist[i] - 1.0;
                    let target = geodesic(m, &self.centers[l], &x, z);
                    atoms.push(geodesic(m, &x, &target, t));
                    weights.push((1.0 - t) * ti);
                }
                Some(l) => {
                    let w = ((1.0 - t) + t * self.rho[i]) * ti;
                    atoms.push(geodesic(m, &x, &self.centers[l], t));
                    weights.push(w);
                    core_mass += ti;
                    core_now += w;
                }
            }
        }
        let norm = (1.0 - t) * (1.0 - core_mass) + core_now;
        if norm <= 0.0 {
            // empty clusters: nothing survives at t = 1, fall back to the anchor
            return self.anchor.clone();
        }
        for w in &mut weights {
            *w /= norm;
        }
        Barycenter::canonical(m, atoms, weights)
    }

    /// T̂^t_j(σ): T^{2t} on [0, ½], then chart-linear from T¹(σ) to P_j(σ).
    pub fn hat(&self, t: f64) -> Barycenter {
        if t <= 0.5 {
            return self.at(2.0 * t);
        }
        if t >= 1.0 {
            return self.anchor.clone();
        }
        let s = 2.0 * t - 1.0;
        let total: f64 = self.masses.iter().sum();
        let m = self.m;
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for l in 0..self.anchor.len() {
            let start = if total > 0.0 { self.masses[l] / total } else { 0.0 };
            atoms.push(geodesic(m, &self.centers[l], &self.anchor.atoms[l], s));
            weights.push((1.0 - s) * start + s * self.anchor.weights[l]);
        }
        Barycenter::canonical(m, atoms, weights)
    }
}

pub fn homotopy_t(m: &ModelManifold, sigma: &Barycenter, j: usize, t: f64, cfg: &HomotopyConfig, metric: &MetricConfig) -> Result<Barycenter> {
    Ok(Homotopy::new(m, sigma, j, cfg, metric)?.at(t))
}

pub fn hat_homotopy(m: &ModelManifold, sigma: &Barycenter, j: usize, t: f64, cfg: &HomotopyConfig, metric: &MetricConfig) -> Result<Barycenter> {
    Ok(Homotopy::new(m, sigma, j, cfg, metric)?.hat(t))
}

/// Largest bary_distance between consecutive samples of t ↦ T̂^t over a uniform grid.
pub fn path_jump(h: &Homotopy<'_>, steps: usize, metric: &MetricConfig) -> Result<f64> {
    let mut prev = h.hat(0.0);
    let mut worst: f64 = 0.0;
    for s in 1..=steps {
        let cur = h.hat(s as f64 / steps as f64);
        worst = worst.max(bary_distance(h.m, &prev, &cur, metric)?);
        prev = cur;
    }
    Ok(worst)
}
