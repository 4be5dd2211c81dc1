//! Constructive covering procedure: either ≤ ℓ points absorb all but ε of the mass,
//! or ℓ+1 well separated r̄-balls each carry mass ≥ ε̄.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::bubbles::local::{ball_volume, union_rule};
use crate::geometry::{Kind, ModelManifold, PointOnM};
use crate::measure::WeightedCloud;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationStatus {
    Concentrated,
    Separated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationVerdict {
    pub status: ConcentrationStatus,
    pub points: Vec<PointOnM>,
    pub r_bar: f64,
    pub eps_bar: f64,
    /// number h of balls in the cover
    pub cover_size: u64,
    /// mass of each returned r̄-ball
    pub ball_masses: Vec<f64>,
    /// mass outside ∪B_r(pᵢ); only meaningful on the concentrated branch
    pub outside_mass: f64,
}

/// The cover {B_r̄(x̃)} of M by balls centred on a lattice net.
///
/// Torus: the cubic lattice of spacing L/n with n = ⌈L/r̄⌉, whose covering radius is the spacing.
/// Sphere: points of aℤ⁵ in the shell ||z|−1| ≤ a√5/2 projected radially; the nearest lattice
/// point to a unit vector lies in that shell at angle ≤ asin(a√5/2), so a = 2 sin(r̄/R)/√5 covers.
#[derive(Clone, Debug)]
pub struct CoveringNet {
    kind: Kind,
    radius: f64,
    r_bar: f64,
    spacing: f64,
    per_axis: i64,
    size: u64,
}

type Key = [i32; 5];

impl CoveringNet {
    pub fn new(m: &ModelManifold, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Precondition("covering radius must be positive".into()));
        }
        let r_bar = r / 8.0;
        let radius = m.radius();
        match m.kind() {
            Kind::Torus => {
                let l = 2.0 * PI * radius;
                let n = (l / r_bar).ceil().max(1.0) as i64;
                Ok(CoveringNet { kind: Kind::Torus, radius, r_bar, spacing: l / n as f64, per_axis: n, size: (n as u64).pow(4) })
            }
            Kind::Sphere => {
                let theta = r_bar / radius;
                if theta >= 0.5 * PI {
                    return Err(Error::Precondition(format!("r = {r} too large for the sphere")));
                }
                let a = 2.0 * theta.sin() / 5f64.sqrt();
                let mut net = CoveringNet { kind: Kind::Sphere, radius, r_bar, spacing: a, per_axis: 0, size: 0 };
                net.size = net.count_shell();
                Ok(net)
            }
        }
    }

    pub fn r_bar(&self) -> f64 {
        self.r_bar
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    fn shell(&self) -> (f64, f64) {
        let rho0 = 0.5 * self.spacing * 5f64.sqrt();
        ((1.0 - rho0).max(0.0), 1.0 + rho0)
    }

    fn count_shell(&self) -> u64 {
        let a = self.spacing;
        let (lo, hi) = self.shell();
        let b = (hi / a).floor() as i32;
        let mut count = 0u64;
        for i0 in -b..=b {
            for i1 in -b..=b {
                for i2 in -b..=b {
                    for i3 in -b..=b {
                        let s4 = a * a * (i0 * i0 + i1 * i1 + i2 * i2 + i3 * i3) as f64;
                        if s4 > hi * hi {
                            continue;
                        }
                        count += count_between((lo * lo - s4) / (a * a), (hi * hi - s4) / (a * a));
                    }
                }
            }
        }
        count
    }

    fn center(&self, k: &Key) -> PointOnM {
        match self.kind {
            Kind::Torus => PointOnM::Torus([0, 1, 2, 3].map(|a| k[a] as f64 * self.spacing)),
            Kind::Sphere => {
                let z = k.map(|v| v as f64 * self.spacing);
                let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                PointOnM::Sphere(z.map(|v| v / n))
            }
        }
    }

    /// Calls `f` on every net point whose closed r̄-ball contains p.
    fn for_each_containing(&self, m: &ModelManifold, p: &PointOnM, mut f: impl FnMut(Key)) {
        match *p {
            PointOnM::Torus(x) => {
                let s = self.spacing;
                let n = self.per_axis;
                let reach = (self.r_bar / s).ceil() as i64 + 1;
                let base = x.map(|v| (v / s).floor() as i64);
                let range = -reach..=reach;
                for d0 in range.clone() {
                    for d1 in range.clone() {
                        for d2 in range.clone() {
                            for d3 in range.clone() {
                                let idx = [base[0] + d0, base[1] + d1, base[2] + d2, base[3] + d3];
                                let k = [
                                    idx[0].rem_euclid(n) as i32,
                                    idx[1].rem_euclid(n) as i32,
                                    idx[2].rem_euclid(n) as i32,
                                    idx[3].rem_euclid(n) as i32,
                                    0,
                                ];
                                if m.dist(p, &self.center(&k)) <= self.r_bar {
                                    f(k);
                                }
                            }
                        }
                    }
                }
            }
            PointOnM::Sphere(y) => {
                let a = self.spacing;
                let (lo, hi) = self.shell();
                let theta = self.r_bar / self.radius;
                let reach = (hi - 1.0) + 2.0 * (0.5 * theta).sin();
                let lo_i = y.map(|v| ((v - reach) / a).floor() as i32);
                let hi_i = y.map(|v| ((v + reach) / a).ceil() as i32);
                for i0 in lo_i[0]..=hi_i[0] {
                    for i1 in lo_i[1]..=hi_i[1] {
                        for i2 in lo_i[2]..=hi_i[2] {
                            for i3 in lo_i[3]..=hi_i[3] {
                                let z4 = [i0, i1, i2, i3].map(|v| v as f64 * a);
                                let d4: f64 = (0..4).map(|t| (z4[t] - y[t]).powi(2)).sum();
                                if d4 > reach * reach {
                                    continue;
                                }
                                let w = (reach * reach - d4).sqrt();
                                let j_lo = (((y[4] - w) / a).ceil() as i32).max(lo_i[4]);
                                let j_hi = (((y[4] + w) / a).floor() as i32).min(hi_i[4]);
                                let s4: f64 = z4.iter().map(|v| v * v).sum();
                                for j in j_lo..=j_hi {
                                    let nz = (s4 + (j as f64 * a).powi(2)).sqrt();
                                    if nz < lo || nz > hi {
                                        continue;
                                    }
                                    let k = [i0, i1, i2, i3, j];
                                    if m.dist(p, &self.center(&k)) <= self.r_bar {
                                        f(k);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Nearest net point to p.
    fn nearest(&self, p: &PointOnM) -> Key {
        match *p {
            PointOnM::Torus(x) => {
                let n = self.per_axis;
                let k = x.map(|v| ((v / self.spacing).round() as i64).rem_euclid(n) as i32);
                [k[0], k[1], k[2], k[3], 0]
            }
            PointOnM::Sphere(y) => y.map(|v| (v / self.spacing).round() as i32),
        }
    }

    /// Visits every net point until `f` returns false.
    fn walk(&self, mut f: impl FnMut(Key) -> bool) {
        match self.kind {
            Kind::Torus => {
                let n = self.per_axis as i32;
                for i0 in 0..n {
                    for i1 in 0..n {
                        for i2 in 0..n {
                            for i3 in 0..n {
                                if !f([i0, i1, i2, i3, 0]) {
                                    return;
                                }
                            }
                        }
                    }
                }
            }
            Kind::Sphere => {
                let a = self.spacing;
                let (lo, hi) = self.shell();
                let b = (hi / a).floor() as i32;
                for i0 in -b..=b {
                    for i1 in -b..=b {
                        for i2 in -b..=b {
                            for i3 in -b..=b {
                                let s4 = a * a * (i0 * i0 + i1 * i1 + i2 * i2 + i3 * i3) as f64;
                                for j in -b..=b {
                                    let nz = (s4 + (j as f64 * a).powi(2)).sqrt();
                                    if nz >= lo && nz <= hi && !f([i0, i1, i2, i3, j]) {
                                        return;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Atom mass of every r̄-ball that contains an atom.
    fn atom_masses(&self, m: &ModelManifold, f: &WeightedCloud) -> HashMap<Key, f64> {
        let mut acc: HashMap<Key, f64> = HashMap::new();
        for (p, w) in f.atoms() {
            if w == 0.0 {
                continue;
            }
            let p = m.canonicalize(p);
            self.for_each_containing(m, &p, |k| *acc.entry(k).or_insert(0.0) += w);
        }
        acc
    }
}

/// ∫_{∪B_radius(cᵢ)} f, by polar quadrature on the smooth part and direct summation on atoms.
pub fn union_mass(m: &ModelManifold, f: &WeightedCloud, centers: &[PointOnM], radius: f64) -> f64 {
    if centers.is_empty() {
        return 0.0;
    }
    let inside = |p: &PointOnM| centers.iter().any(|c| m.dist(p, c) < radius);
    match &f.smooth {
        Some(s) => {
            let rule = union_rule(m, centers, radius);
            let smooth: f64 = rule.points.iter().zip(&rule.weights).map(|(p, w)| w * s.density_at(p)).sum();
            smooth + f.atoms().filter(|(p, _)| inside(p)).map(|(_, w)| w).sum::<f64>()
        }
        None => f.integrate(|p| if inside(p) { 1.0 } else { 0.0 }),
    }
}

/// Number of integers j with lo ≤ j² ≤ hi.
fn count_between(lo: f64, hi: f64) -> u64 {
    if hi < 0.0 {
        return 0;
    }
    let top = hi.sqrt().floor() as i64;
    let bottom = if lo <= 0.0 { 0 } else { lo.sqrt().ceil() as i64 };
    if bottom > top {
        return 0;
    }
    let nonneg = (top - bottom + 1) as u64;
    // ±j pairs, with 0 counted once
    if bottom == 0 {
        2 * nonneg - 1
    } else {
        2 * nonneg
    }
}

pub fn concentration_detect(m: &ModelManifold, f: &WeightedCloud, l: usize, eps: f64, r: f64) -> Result<ConcentrationVerdict> {
    detect_with(&CoveringNet::new(m, r)?, m, f, l, eps, r)
}

/// Same as [`concentration_detect`] with a prebuilt cover, for repeated calls at fixed (M, r).
pub fn detect_with(net: &CoveringNet, m: &ModelManifold, f: &WeightedCloud, l: usize, eps: f64, r: f64) -> Result<ConcentrationVerdict> {
    let total = f.total();
    if (total - 1.0).abs() > 1e-8 || f.weights.iter().any(|w| *w < 0.0) {
        return Err(Error::Unnormalized { mass: total });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("ε = {eps} outside (0, 1)")));
    }
    let r_bar = net.r_bar;
    let eps_bar = eps / (2.0 * net.size as f64);
    let vol = ball_volume(m, r_bar);
    let mut masses = net.atom_masses(m, f);
    // the smooth part enters by the midpoint rule, density(x̃)·|B_r̄|
    let smooth_mass = |k: &Key| f.smooth.as_ref().map_or(0.0, |s| s.density_at(&net.center(k)) * vol);
    let smooth_can_be_heavy = f.smooth.as_ref().is_some_and(|s| {
        let peak = (0..s.node_count()).map(|i| f.weights[i] / m.weights()[i]).fold(0.0, f64::max);
        2.0 * peak * vol >= eps_bar
    });
    if smooth_can_be_heavy {
        for p in &f.points[..f.smooth.as_ref().map_or(0, |s| s.node_count())] {
            masses.entry(net.nearest(&m.canonicalize(p))).or_insert(0.0);
        }
    }
    for (k, w) in masses.iter_mut() {
        *w += smooth_mass(k);
    }
    let mut heavy: Vec<(Key, f64)> = masses.iter().filter(|(_, w)| **w >= eps_bar).map(|(k, w)| (*k, *w)).collect();
    heavy.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));

    let mut chosen: Vec<(PointOnM, f64)> = Vec::new();
    let consider = |k: &Key, w: f64, chosen: &mut Vec<(PointOnM, f64)>| {
        let c = net.center(k);
        if chosen.iter().all(|(q, _)| m.dist(q, &c) > 4.0 * r_bar) {
            chosen.push((c, w));
        }
        chosen.len() < l + 1
    };
    for (k, w) in &heavy {
        if !consider(k, *w, &mut chosen) {
            break;
        }
    }
    if chosen.len() < l + 1 && smooth_can_be_heavy {
        // the remaining balls carry smooth mass only; the enumeration order is immaterial
        net.walk(|k| {
            if masses.contains_key(&k) {
                return true;
            }
            let w = smooth_mass(&k);
            w < eps_bar || consider(&k, w, &mut chosen)
        });
    }
    let (points, ball_masses): (Vec<_>, Vec<_>) = chosen.into_iter().unzip();
    let status = if points.len() == l + 1 { ConcentrationStatus::Separated } else { ConcentrationStatus::Concentrated };
    let outside_mass = (total - union_mass(m, f, &points, r)).max(0.0);
    Ok(ConcentrationVerdict { status, points, r_bar, eps_bar, cover_size: net.size, ball_masses, outside_mass })
}

/// Re-audits a verdict against the density by direct summation.
pub fn audit_verdict(m: &ModelManifold, f: &WeightedCloud, v: &ConcentrationVerdict, l: usize, eps: f64, r: f64) -> bool {
    match v.status {
        ConcentrationStatus::Concentrated => {
            let out = f.total() - union_mass(m, f, &v.points, r);
            v.points.len() <= l && out <= eps
        }
        ConcentrationStatus::Separated => {
            let disjoint = (0..v.points.len())
                .all(|i| (i + 1..v.points.len()).all(|j| m.dist(&v.points[i], &v.points[j]) > 4.0 * v.r_bar));
            let heavy = v.points.iter().all(|q| union_mass(m, f, std::slice::from_ref(q), v.r_bar) >= v.eps_bar);
            v.points.len() == l + 1 && disjoint && heavy
        }
    }
}
