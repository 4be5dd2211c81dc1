//! Geodesic polar quadrature on small balls, graded toward the center.

use std::f64::consts::PI;

use crate::geometry::{Kind, ModelManifold, PointOnM};
use crate::quadrature::{gauss_gegenbauer, gauss_legendre_on};

pub(crate) struct LocalRule {
    pub points: Vec<PointOnM>,
    pub weights: Vec<f64>,
}

/// Radial breakpoints: geometric from `core` up to δ, then quarters of [δ, 2δ].
pub(crate) fn radial_breaks(core: f64, delta: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut r = core.min(0.5 * delta);
    while r < delta {
        b.push(r);
        r *= 2.0;
    }
    for i in 0..=4 {
        b.push(delta * (1.0 + 0.25 * i as f64));
    }
    b
}

/// Unit directions of ℝ⁴ with weights summing to |S³| = 2π².
pub(crate) fn sphere3_rule(n: usize) -> Vec<([f64; 4], f64)> {
    let (tc, wc) = gauss_gegenbauer(n, 1.0);
    let (tt, wt) = gauss_gegenbauer(n, 0.5);
    let np = 2 * n;
    let mut out = Vec::with_capacity(n * n * np);
    for (c, w1) in tc.iter().zip(&wc) {
        let sc = (1.0 - c * c).sqrt();
        for (t, w2) in tt.iter().zip(&wt) {
            let st = (1.0 - t * t).sqrt();
            for k in 0..np {
                let phi = 2.0 * PI * (k as f64 + 0.5) / np as f64;
                let d = [*c, sc * t, sc * st * phi.cos(), sc * st * phi.sin()];
                out.push((d, w1 * w2 * 2.0 * PI / np as f64));
            }
        }
    }
    out
}

/// Polar rule on B_{2δ}(center); `core` is the innermost radial scale.
pub(crate) fn polar_rule(m: &ModelManifold, center: &PointOnM, core: f64, delta: f64, radial_order: usize, angular: usize) -> LocalRule {
    let frame = m.tangent_frame(center);
    let dirs = sphere3_rule(angular);
    let breaks = radial_breaks(core, delta);
    let a = m.radius();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for win in breaks.windows(2) {
        let (rs, wr) = gauss_legendre_on(radial_order, win[0], win[1]);
        for (r, w) in rs.iter().zip(&wr) {
            let jac = match m.kind() {
                Kind::Torus => r.powi(3),
                Kind::Sphere => (a * (r / a).sin()).powi(3),
            };
            for (d, wd) in &dirs {
                let mut v = [0.0; 5];
                for (k, e) in frame.iter().enumerate() {
                    for c in 0..5 {
                        v[c] += r * d[k] * e[c];
                    }
                }
                points.push(m.exp_map(center, &v));
                weights.push(w * wd * jac);
            }
        }
    }
    LocalRule { points, weights }
}

/// Polar rules on ∪B_radius(cᵢ), each point kept only in the ball of its nearest center.
pub(crate) fn union_rule(m: &ModelManifold, centers: &[PointOnM], radius: f64) -> LocalRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (i, c) in centers.iter().enumerate() {
        let rule = polar_rule(m, c, radius / 16.0, 0.5 * radius, 8, 4);
        for (p, w) in rule.points.into_iter().zip(rule.weights) {
            let mine = m.dist(&p, c);
            let owner = centers.iter().enumerate().all(|(j, y)| {
                j == i || {
                    let dj = m.dist(&p, y);
                    dj > mine || (dj == mine && j > i)
                }
            });
            if owner {
                points.push(p);
                weights.push(w);
            }
        }
    }
    LocalRule { points, weights }
}

/// Volume of a geodesic ball of radius r in the base metric.
pub(crate) fn ball_volume(m: &ModelManifold, r: f64) -> f64 {
    match m.kind() {
        Kind::Torus => PI * PI / 2.0 * r.powi(4),
        Kind::Sphere => {
            let a = m.radius();
            let c = (r / a).min(PI).cos();
            2.0 * PI * PI * a.powi(4) * (2.0 / 3.0 - c + c.powi(3) / 3.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        let t = ModelManifold::torus(4, 1.0);
        let rule = polar_rule(&t, &PointOnM::Torus([1.0, 2.0, 3.0, 4.0]), 1e-3, 0.2, 8, 2);
        let v: f64 = rule.weights.iter().sum();
        let want = PI * PI / 2.0 * 0.4f64.powi(4);
        assert!((v / want - 1.0).abs() < 1e-12);
        let s = ModelManifold::sphere(4, 1.0);
        let rule = polar_rule(&s, &PointOnM::north(), 1e-3, 0.2, 8, 2);
        let v: f64 = rule.weights.iter().sum();
        // 2π² ∫_0^{0.4} sin³ r dr
        let c = 0.4f64.cos();
        let want = 2.0 * PI * PI * (2.0 / 3.0 - c + c.powi(3) / 3.0);
        assert!((v / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn points_sit_at_their_radius() {
        let s = ModelManifold::sphere(4, 2.0);
        let c = PointOnM::sphere_from_angles(1.0, 0.5, 0.5, 1.0);
        let rule = polar_rule(&s, &c, 1e-2, 0.3, 2, 2);
        let maxd = rule.points.iter().map(|p| s.dist(p, &c)).fold(0.0, f64::max);
        assert!(maxd <= 0.6 + 1e-12);
    }
}
