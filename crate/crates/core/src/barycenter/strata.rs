//! Distances to the strata M_j, the bounds of their open parts and the projections P_j.
//!
//! Under the max(sup, Lip) convention the distance between probability measures is
//! the transport cost for min(d, 2). For a support X, the best weights are the Voronoi
//! masses, so dist(μ, M_j) is the least truncated j-median cost Σ w min(d(y, X), 2).

use serde::{Deserialize, Serialize};

use super::{bary_distance, Barycenter, MetricConfig};
use crate::error::{Error, Result};
use crate::geometry::{BasisMode, ModelManifold, PointOnM};
use crate::measure::WeightedCloud;

/// Truncation of the transport cost.
const CAP: f64 = 2.0;

/// Σ wᵢ min(d(yᵢ, X), 2).
pub fn truncated_cost(m: &ModelManifold, pts: &[PointOnM], w: &[f64], support: &[PointOnM]) -> f64 {
    pts.iter()
        .zip(w)
        .map(|(p, wi)| wi * support.iter().map(|x| m.dist(p, x)).fold(CAP, f64::min))
        .sum()
}

/// Weiszfeld iteration for argmin_y Σ wᵢ min(d(y, pᵢ), 2), from `start`.
pub(crate) fn median(m: &ModelManifold, pts: &[PointOnM], w: &[f64], start: PointOnM) -> PointOnM {
    let mut y = start;
    for _ in 0..100 {
        let mut pull = [0.0; 5];
        let mut den = 0.0;
        let mut here = 0.0;
        for (p, &wi) in pts.iter().zip(w) {
            if wi == 0.0 {
                continue;
            }
            let d = m.dist(&y, p);
            if d >= CAP {
                continue;
            }
            if d < 1e-13 {
                here += wi;
                continue;
            }
            let v = m.log_map(&y, p);
            for a in 0..5 {
                pull[a] += wi * v[a] / d;
            }
            den += wi / d;
        }
        let r = pull.iter().map(|v| v * v).sum::<f64>().sqrt();
        // a data point is optimal once its own weight outweighs the pull of the rest
        if den == 0.0 || r <= here {
            break;
        }
        let step = pull.map(|v| v / den * (1.0 - here / r).max(0.0));
        y = m.exp_map(&y, &step);
        if step.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-13 {
            break;
        }
    }
    y
}

/// Best single point for a group of atoms: Weiszfeld started from every member.
fn group_median(m: &ModelManifold, pts: &[PointOnM], w: &[f64]) -> (PointOnM, f64) {
    let mut best = (pts[0], f64::INFINITY);
    for &s in pts {
        let y = median(m, pts, w, s);
        let c = truncated_cost(m, pts, w, &[y]);
        if c < best.1 {
            best = (y, c);
        }
    }
    best
}

/// All labelings of n items into at most j groups, as restricted growth strings.
fn partitions(n: usize, j: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, j: usize, used: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for g in 0..(used + 1).min(j) {
            cur.push(g);
            rec(i + 1, n, j, used.max(g + 1), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, j, 0, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StratumFit {
    pub sigma: Barycenter,
    pub distance: f64,
}

fn from_groups(m: &ModelManifold, s: &Barycenter, labels: &[usize], groups: usize) -> Barycenter {
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for g in 0..groups {
        let idx: Vec<usize> = (0..s.len()).filter(|&i| labels[i] == g).collect();
        if idx.is_empty() {
            continue;
        }
        let pts: Vec<PointOnM> = idx.iter().map(|&i| s.atoms[i]).collect();
        let w: Vec<f64> = idx.iter().map(|&i| s.weights[i]).collect();
        atoms.push(group_median(m, &pts, &w).0);
        weights.push(w.iter().sum());
    }
    Barycenter::canonical(m, atoms, weights)
}

/// Closest element of M_j to an atomic σ: exhaustive over partitions for ≤ 5 atoms,
/// agglomerative merging followed by Lloyd descent above.
pub fn stratum_fit(m: &ModelManifold, s: &Barycenter, j: usize, cfg: &MetricConfig) -> Result<StratumFit> {
    if j == 0 {
        return Err(Error::Precondition("strata start at M_1".into()));
    }
    if s.len() <= j {
        return Ok(StratumFit { sigma: s.clone(), distance: 0.0 });
    }
    if s.len() <= 5 {
        let mut best: Option<StratumFit> = None;
        for labels in partitions(s.len(), j) {
            let cand = from_groups(m, s, &labels, j);
            let d = bary_distance(m, s, &cand, cfg)?;
            if best.as_ref().map_or(true, |b| d < b.distance) {
                best = Some(StratumFit { sigma: cand, distance: d });
            }
        }
        return Ok(best.expect("at least one partition"));
    }
    // merge the pair whose fusion costs least until j groups remain
    let mut labels: Vec<usize> = (0..s.len()).collect();
    let mut groups = s.len();
    while groups > j {
        let mut best = (0, 1, f64::INFINITY);
        let live: Vec<usize> = {
            let mut v = labels.clone();
            v.sort_unstable();
            v.dedup();
            v
        };
        for (a, &ga) in live.iter().enumerate() {
            for &gb in &live[a + 1..] {
                let idx: Vec<usize> = (0..s.len()).filter(|&i| labels[i] == ga || labels[i] == gb).collect();
                let pts: Vec<PointOnM> = idx.iter().map(|&i| s.atoms[i]).collect();
                let w: Vec<f64> = idx.iter().map(|&i| s.weights[i]).collect();
                let c = group_median(m, &pts, &w).1;
                if c < best.2 {
                    best = (ga, gb, c);
                }
            }
        }
        for l in &mut labels {
            if *l == best.1 {
                *l = best.0;
            }
        }
        groups -= 1;
    }
    let mut relabel = labels.clone();
    relabel.sort_unstable();
    relabel.dedup();
    let labels: Vec<usize> = labels.iter().map(|l| relabel.binary_search(l).unwrap()).collect();
    let start = from_groups(m, s, &labels, j);
    let refined = lloyd(m, &s.atoms, &s.weights, start.atoms.clone());
    let d0 = bary_distance(m, s, &start, cfg)?;
    let d1 = bary_distance(m, s, &refined, cfg)?;
    Ok(if d1 < d0 { StratumFit { sigma: refined, distance: d1 } } else { StratumFit { sigma: start, distance: d0 } })
}

/// d_j(σ) = dist(σ, M_j).
pub fn stratum_margin(m: &ModelManifold, s: &Barycenter, j: usize, cfg: &MetricConfig) -> Result<f64> {
    Ok(stratum_fit(m, s, j, cfg)?.distance)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StratumVerdict {
    /// d_{j−1}(σ) > ε, so the bounds are claimed
    pub applicable: bool,
    pub margin: f64,
    pub min_weight: f64,
    pub min_separation: f64,
    /// the claimed bounds hold (vacuously true when not applicable)
    pub holds: bool,
}

/// For σ with j atoms and d_{j−1}(σ) > ε: every weight and every atom distance is at least ε/2.
pub fn check_stratum_bounds(m: &ModelManifold, s: &Barycenter, eps: f64, cfg: &MetricConfig) -> Result<StratumVerdict> {
    let j = s.len();
    let min_weight = s.min_weight();
    let min_separation = s.min_separation(m);
    if j == 1 {
        return Ok(StratumVerdict { applicable: false, margin: f64::INFINITY, min_weight, min_separation, holds: true });
    }
    let margin = stratum_margin(m, s, j - 1, cfg)?;
    let applicable = margin > eps;
    let holds = !applicable || (min_weight >= eps / 2.0 && min_separation >= eps / 2.0);
    Ok(StratumVerdict { applicable, margin, min_weight, min_separation, holds })
}

/// Alternates Voronoi assignment and truncated medians from the given atoms.
fn lloyd(m: &ModelManifold, pts: &[PointOnM], w: &[f64], mut atoms: Vec<PointOnM>) -> Barycenter {
    let mut cost = truncated_cost(m, pts, w, &atoms);
    let mut owner = vec![0usize; pts.len()];
    for _ in 0..30 {
        for (i, p) in pts.iter().enumerate() {
            owner[i] = nearest(m, p, &atoms);
        }
        let mut next = atoms.clone();
        for (a, slot) in next.iter_mut().enumerate() {
            let (cp, cw): (Vec<PointOnM>, Vec<f64>) =
                pts.iter().zip(w).enumerate().filter(|(i, _)| owner[*i] == a).map(|(_, (p, w))| (*p, *w)).unzip();
            if !cp.is_empty() {
                *slot = median(m, &cp, &cw, *slot);
            }
        }
        let c = truncated_cost(m, pts, w, &next);
        if c < cost - 1e-15 {
            atoms = next;
            cost = c;
        } else {
            break;
        }
    }
    let mut weights = vec![0.0; atoms.len()];
    for (p, wi) in pts.iter().zip(w) {
        weights[nearest(m, p, &atoms)] += wi;
    }
    let total: f64 = weights.iter().sum();
    Barycenter::canonical(m, atoms, weights.iter().map(|v| v / total).collect())
}

fn nearest(m: &ModelManifold, p: &PointOnM, atoms: &[PointOnM]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (a, x) in atoms.iter().enumerate() {
        let d = m.dist(p, x);
        if d < best.1 {
            best = (a, d);
        }
    }
    best.0
}

/// Fit of a normalized density by an element of M_j; `distance` is the transport cost
/// of the fitted σ, which is exact for its Voronoi weights.
pub fn density_fit(m: &ModelManifold, f: &WeightedCloud, j: usize) -> Result<StratumFit> {
    if j == 0 {
        return Err(Error::Precondition("strata start at M_1".into()));
    }
    let total = f.total();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Unnormalized { mass: total });
    }
    let pts = &f.points;
    let w = &f.weights;
    // greedy j-median seeding over the heaviest samples
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|a, b| w[*b].partial_cmp(&w[*a]).unwrap_or(std::cmp::Ordering::Equal));
    order.truncate(300);
    let mut reach = vec![CAP; pts.len()];
    let mut seeds: Vec<PointOnM> = Vec::new();
    for _ in 0..j {
        let mut best = (None, 0.0);
        for &c in &order {
            let x = pts[c];
            let gain: f64 = pts.iter().zip(w).zip(&reach).map(|((p, wi), r)| wi * (r - m.dist(p, &x).min(CAP)).max(0.0)).sum();
            if best.0.is_none() || gain > best.1 {
                best = (Some(x), gain);
            }
        }
        let x = best.0.expect("non-empty cloud");
        for (r, p) in reach.iter_mut().zip(pts) {
            *r = r.min(m.dist(p, &x));
        }
        seeds.push(x);
    }
    let sigma = lloyd(m, pts, w, seeds);
    let distance = truncated_cost(m, pts, w, &sigma.atoms);
    Ok(StratumFit { sigma, distance })
}

/// max over the spectral dictionary of |∫g dμ − σ(g)|, with each mode scaled into the
/// C¹ ball by the addition-theorem bounds sup|e| ≤ √(dim/V) and |∇e| ≤ √μ·√(dim/V).
pub fn dictionary_lower_bound(m: &ModelManifold, f: &WeightedCloud, s: &Barycenter, cfg: &MetricConfig) -> f64 {
    let mut best: f64 = 0.0;
    let vol = m.volume();
    let degree_count = |d: u64| (0..m.basis_len()).filter(|&i| m.mode_degree(i) == d).count();
    for i in 0..m.basis_len() {
        let deg = m.mode_degree(i);
        if deg == 0 || deg > cfg.dictionary_degree {
            continue;
        }
        let sup = match m.basis_mode(i) {
            BasisMode::Fourier(_) => (2.0 / vol).sqrt(),
            BasisMode::Harmonic(_) => (degree_count(deg) as f64 / vol).sqrt(),
        };
        let lip = (-m.laplace_eigenvalue(i)).sqrt() * sup;
        let scale = 1.0 / sup.max(lip);
        let mu_f = f.integrate(|p| m.eval_mode(i, p));
        let mu_s: f64 = s.atoms.iter().zip(&s.weights).map(|(p, w)| w * m.eval_mode(i, p)).sum();
        best = best.max(scale * (mu_f - mu_s).abs());
    }
    best
}

pub enum Projectable<'a> {
    Atomic(&'a Barycenter),
    Density(&'a WeightedCloud),
}

/// P_j: fit by an element of M_j and require it to sit in M_j(ε/2).
pub fn project_pj(m: &ModelManifold, input: Projectable<'_>, j: usize, eps: f64, threshold: f64, cfg: &MetricConfig) -> Result<Barycenter> {
    let fit = match input {
        Projectable::Atomic(s) => stratum_fit(m, s, j, cfg)?,
        Projectable::Density(f) => density_fit(m, f, j)?,
    };
    if fit.distance > threshold {
        return Err(Error::Precondition(format!("distance {:.3e} to M_{j} exceeds {threshold:.3e}", fit.distance)));
    }
    if j >= 2 {
        let margin = if fit.sigma.len() < j { 0.0 } else { stratum_margin(m, &fit.sigma, j - 1, cfg)? };
        if margin <= eps / 2.0 {
            return Err(Error::Precondition(format!("projection has margin {margin:.3e} ≤ ε/2")));
        }
    }
    Ok(fit.sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts_are_stirling_sums() {
        assert_eq!(partitions(4, 4).len(), 15);
        assert_eq!(partitions(5, 2).len(), 16);
        assert_eq!(partitions(3, 1).len(), 1);
    }

    #[test]
    fn two_point_margin() {
        let m = ModelManifold::torus(4, 1.0);
        let s = Barycenter::new(&m, vec![PointOnM::Torus([0.0; 4]), PointOnM::Torus([1.0, 0.0, 0.0, 0.0])], vec![0.5, 0.5]).unwrap();
        let d = stratum_margin(&m, &s, 1, &MetricConfig::default()).unwrap();
        assert!((d - 0.5).abs() < 1e-9, "{d}");
    }

    #[test]
    fn median_prefers_heavy_atom() {
        let m = ModelManifold::sphere(4, 1.0);
        let a = PointOnM::north();
        let b = PointOnM::sphere_from_angles(0.5, 0.5, 0.5, 0.0);
        let y = median(&m, &[a, b], &[0.7, 0.3], b);
        assert!(m.dist(&y, &a) < 1e-9);
    }
}
