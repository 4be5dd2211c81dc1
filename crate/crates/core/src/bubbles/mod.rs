//! The bubbles φ_{λ,σ}, the profile φ_s on the negative eigenspace and the test map Φ.
//!
//! A bubble equals its far value c outside ∪B_{2δ}(xᵢ), so every integral splits
//! into c times a closed-form integral plus localized corrections on the balls,
//! evaluated with geodesic polar rules graded down to the scale 1/λ. Node grids
//! cannot resolve e^{4φ} at the scales used here (λ in the hundreds).

mod estimates;
pub(crate) mod local;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use estimates::{eigen_pairing_decay, energy_slope, estimate_suite, EstimateConfig, EstimateReport, SlopeFit};

use crate::barycenter::Barycenter;
use crate::error::{Error, Result};
use crate::geometry::{Kind, ModelManifold, PointOnM, ScalarField, Tangent};
use crate::measure::WeightedCloud;
use crate::paneitz::{CurvatureData, OperatorModel, SpectrumDecomposition};
use local::polar_rule;

/// Quintic profile on [0, 1]: q(0)=0, q'(0)=1, q(1)=1, q'(1)=q''(1)=q''(0)=0.
fn quintic(s: f64) -> (f64, f64, f64) {
    let q = s + 4.0 * s.powi(3) - 7.0 * s.powi(4) + 3.0 * s.powi(5);
    let dq = 1.0 + 12.0 * s * s - 28.0 * s.powi(3) + 15.0 * s.powi(4);
    let ddq = 24.0 * s - 84.0 * s * s + 60.0 * s.powi(3);
    (q, dq, ddq)
}

/// χ_δ: identity on [0, δ], 2δ beyond 2δ, quintic (C²) in between.
pub fn chi_delta(t: f64, delta: f64) -> f64 {
    chi_jet(t, delta).0
}

/// (χ, χ', χ'').
pub fn chi_jet(t: f64, delta: f64) -> (f64, f64, f64) {
    if t <= delta {
        (t, 1.0, 0.0)
    } else if t >= 2.0 * delta {
        (2.0 * delta, 0.0, 0.0)
    } else {
        let (q, dq, ddq) = quintic((t - delta) / delta);
        (delta + delta * q, dq, ddq / delta)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BubbleConfig {
    pub sigma: Barycenter,
    pub lambda: f64,
    pub delta: f64,
}

/// Value, squared gradient and Laplacian of a bubble at one point.
#[derive(Clone, Copy, Debug)]
pub struct BubbleJet {
    pub value: f64,
    pub grad_sq: f64,
    pub laplacian: f64,
}

impl BubbleConfig {
    pub fn new(sigma: Barycenter, lambda: f64, delta: f64) -> Self {
        BubbleConfig { sigma, lambda, delta }
    }

    pub fn validate(&self, m: &ModelManifold) -> Result<()> {
        if m.is_conformal() {
            return Err(Error::Unsupported("bubbles on a rescaled model".into()));
        }
        if !(self.lambda > 0.0 && self.delta > 0.0) {
            return Err(Error::Precondition("λ and δ must be positive".into()));
        }
        if 2.0 * self.delta >= m.injectivity_radius() {
            return Err(Error::Precondition(format!("2δ = {} exceeds the injectivity radius", 2.0 * self.delta)));
        }
        for p in &self.sigma.atoms {
            let ok = matches!((m.kind(), p), (Kind::Torus, PointOnM::Torus(_)) | (Kind::Sphere, PointOnM::Sphere(_)));
            if !ok {
                return Err(Error::ManifoldMismatch);
            }
        }
        Ok(())
    }

    /// log(2λ/(1 + 4λ²δ²)), the value outside ∪B_{2δ}(xᵢ).
    pub fn far_value(&self) -> f64 {
        let l = self.lambda;
        (2.0 * l / (1.0 + 4.0 * l * l * self.delta * self.delta)).ln()
    }

    /// (1 + λ²χ²)^{−4}
    fn profile(&self, chi: f64) -> f64 {
        (1.0 + self.lambda * self.lambda * chi * chi).powi(-4)
    }

    pub fn value(&self, m: &ModelManifold, p: &PointOnM) -> f64 {
        let g: f64 = self
            .sigma
            .atoms
            .iter()
            .zip(&self.sigma.weights)
            .map(|(x, t)| t * self.profile(chi_delta(m.dist(p, x), self.delta)))
            .sum();
        (2.0 * self.lambda).ln() + 0.25 * g.ln()
    }

    pub fn jet(&self, m: &ModelManifold, p: &PointOnM) -> BubbleJet {
        let l2 = self.lambda * self.lambda;
        let a = m.radius();
        let mut g = 0.0;
        let mut grad: Tangent = [0.0; 5];
        let mut lap = 0.0;
        for (x, &t) in self.sigma.atoms.iter().zip(&self.sigma.weights) {
            let d = m.dist(p, x);
            let (s, ds, dds) = chi_jet(d, self.delta);
            let f = self.profile(s);
            g += t * f;
            if ds == 0.0 {
                continue;
            }
            let den = 1.0 + l2 * s * s;
            let h = -8.0 * l2 * s / den;
            let dh = -8.0 * l2 * (1.0 - l2 * s * s) / (den * den);
            let f1 = f * h;
            let f2 = f * (h * h + dh);
            lap += t * (f2 * ds * ds + f1 * dds);
            // F'(χ)χ'Δd, written through d·Δd to stay finite at the center
            let d_lap_d = match m.kind() {
                Kind::Torus => 3.0,
                Kind::Sphere => {
                    let r = d / a;
                    if r < 1e-8 {
                        3.0
                    } else {
                        3.0 * r / r.tan()
                    }
                }
            };
            let f1_over_d = if d <= self.delta { f * (-8.0 * l2) / den } else { f1 / d };
            lap += t * f1_over_d * ds * d_lap_d;
            if d > 0.0 {
                let v = m.log_map(p, x);
                for c in 0..5 {
                    grad[c] -= t * f1 * ds * v[c] / d;
                }
            }
        }
        let gsq: f64 = grad.iter().map(|v| v * v).sum();
        BubbleJet {
            value: (2.0 * self.lambda).ln() + 0.25 * g.ln(),
            grad_sq: gsq / (16.0 * g * g),
            laplacian: lap / (4.0 * g) - gsq / (4.0 * g * g),
        }
    }

    /// Local samples on ∪B_{2δ}(xᵢ), each point kept only in the ball of its nearest atom.
    pub(crate) fn samples(&self, m: &ModelManifold) -> BubbleSamples {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let core = 0.25 / self.lambda;
        for (i, x) in self.sigma.atoms.iter().enumerate() {
            let rule = polar_rule(m, x, core, self.delta, 8, 3);
            for (p, w) in rule.points.into_iter().zip(rule.weights) {
                let mine = m.dist(&p, x);
                let owner = self.sigma.atoms.iter().enumerate().all(|(j, y)| {
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
        let jets = points.iter().map(|p| self.jet(m, p)).collect();
        BubbleSamples { cfg: self.clone(), far: self.far_value(), points, weights, jets }
    }
}

/// Node samples of φ_{λ,σ} (no band projection: the far value is kept exactly).
pub fn bubble(m: &Arc<ModelManifold>, cfg: &BubbleConfig) -> Result<ScalarField> {
    cfg.validate(m)?;
    Ok(ScalarField::from_fn(m, |p| cfg.value(m, p)))
}

pub(crate) struct BubbleSamples {
    pub cfg: BubbleConfig,
    pub far: f64,
    pub points: Vec<PointOnM>,
    pub weights: Vec<f64>,
    pub jets: Vec<BubbleJet>,
}

impl BubbleSamples {
    /// ∫(φ − c) g dV over the balls.
    fn excess(&self, g: impl Fn(usize, &PointOnM) -> f64) -> f64 {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| self.weights[i] * (self.jets[i].value - self.far) * g(i, p))
            .sum()
    }
}

/// u = Σ c_m e_m + a·φ_{λ,σ} + b, with the smooth part in basis modes.
#[derive(Clone)]
pub struct TestField {
    manifold: Arc<ModelManifold>,
    smooth: Vec<(usize, f64)>,
    bubble: Option<(f64, Arc<BubbleSamples>)>,
    offset: f64,
}

impl std::fmt::Debug for TestField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestField")
            .field("smooth", &self.smooth)
            .field("bubble", &self.bubble.as_ref().map(|(a, s)| (*a, s.cfg.lambda, s.cfg.sigma.len())))
            .field("offset", &self.offset)
            .finish()
    }
}

impl TestField {
    pub fn new(m: &Arc<ModelManifold>, smooth: Vec<(usize, f64)>, bubble: Option<(f64, &BubbleConfig)>, offset: f64) -> Result<Self> {
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (i, c) in smooth {
            if i >= m.basis_len() {
                return Err(Error::Precondition(format!("mode {i} out of range")));
            }
            match merged.iter_mut().find(|(j, _)| *j == i) {
                Some(e) => e.1 += c,
                None => merged.push((i, c)),
            }
        }
        let bubble = match bubble {
            Some((a, cfg)) => {
                cfg.validate(m)?;
                Some((a, Arc::new(cfg.samples(m))))
            }
            None => None,
        };
        Ok(TestField { manifold: m.clone(), smooth: merged, bubble, offset })
    }

    /// Single bubble a·φ_{λ,σ}.
    pub fn bubble(m: &Arc<ModelManifold>, cfg: &BubbleConfig) -> Result<Self> {
        Self::new(m, Vec::new(), Some((1.0, cfg)), 0.0)
    }

    pub fn manifold(&self) -> &Arc<ModelManifold> {
        &self.manifold
    }

    pub fn smooth_part(&self) -> &[(usize, f64)] {
        &self.smooth
    }

    pub fn bubble_config(&self) -> Option<(f64, &BubbleConfig)> {
        self.bubble.as_ref().map(|(a, s)| (*a, &s.cfg))
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.offset += c;
        out
    }

    /// t·u: smooth part, bubble amplitude and offset all scaled.
    pub fn scaled(&self, t: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.smooth {
            e.1 *= t;
        }
        if let Some((a, _)) = &mut out.bubble {
            *a *= t;
        }
        out.offset *= t;
        out
    }

    /// Same field with the smooth coefficients replaced.
    pub fn with_smooth(&self, smooth: Vec<(usize, f64)>) -> Self {
        let mut out = self.clone();
        out.smooth = smooth;
        out
    }

    /// Adds c·e_i to the smooth part.
    pub fn plus_mode(&self, i: usize, c: f64) -> Self {
        let mut out = self.clone();
        match out.smooth.iter_mut().find(|(j, _)| *j == i) {
            Some(e) => e.1 += c,
            None => out.smooth.push((i, c)),
        }
        out
    }

    fn smooth_at(&self, p: &PointOnM) -> f64 {
        self.smooth.iter().map(|&(i, c)| c * self.manifold.eval_mode(i, p)).sum()
    }

    pub fn smooth_field(&self) -> ScalarField {
        let mut c = vec![0.0; self.manifold.basis_len()];
        for &(i, v) in &self.smooth {
            c[i] += v;
        }
        ScalarField::from_coefficients(&self.manifold, c).expect("basis length")
    }

    /// Node samples of the whole field.
    pub fn to_grid(&self) -> ScalarField {
        let s = self.smooth_field();
        match &self.bubble {
            None => s.shift(self.offset),
            Some((a, b)) => {
                let m = &self.manifold;
                let vals = s
                    .values()
                    .iter()
                    .zip(m.nodes())
                    .map(|(v, p)| v + a * b.cfg.value(m, p) + self.offset)
                    .collect();
                ScalarField::from_values(m, vals).unwrap()
            }
        }
    }

    fn mode_integral(&self, i: usize) -> f64 {
        if self.manifold.basis_mode(i).is_constant() {
            self.manifold.volume().sqrt()
        } else {
            0.0
        }
    }

    /// ∫ e_i φ dV of the bubble part (without the amplitude).
    fn bubble_mode_integral(&self, b: &BubbleSamples, i: usize) -> f64 {
        b.far * self.mode_integral(i) + b.excess(|_, p| self.manifold.eval_mode(i, p))
    }

    /// ⟨Pu, u⟩.
    pub fn quadratic(&self, op: &OperatorModel) -> Result<f64> {
        if !Arc::ptr_eq(op.manifold(), &self.manifold) {
            return Err(Error::ManifoldMismatch);
        }
        let sym = op.symbol().ok_or_else(|| Error::Unsupported("test fields on rescaled models".into()))?;
        let mut q: f64 = self.smooth.iter().map(|&(i, c)| sym[i] * c * c).sum();
        if let Some((a, b)) = &self.bubble {
            let gc = op.gradient_coefficient();
            let mut bb: f64 = b
                .jets
                .iter()
                .zip(&b.weights)
                .map(|(j, w)| w * (j.laplacian * j.laplacian + gc * j.grad_sq))
                .sum();
            for &(i, dl) in op.symbol_deltas() {
                let e = self.bubble_mode_integral(b, i);
                bb += dl * e * e;
            }
            let cross: f64 = self
                .smooth
                .iter()
                .map(|&(i, c)| sym[i] * c * self.bubble_mode_integral(b, i))
                .sum();
            q += 2.0 * a * cross + a * a * bb;
        }
        Ok(q)
    }

    /// ∫ Q u dV.
    pub fn q_integral(&self, q: &CurvatureData) -> Result<f64> {
        if !Arc::ptr_eq(q.q.manifold(), &self.manifold) {
            return Err(Error::ManifoldMismatch);
        }
        let qc = q.q.coefficients();
        let mut s: f64 = self.smooth.iter().map(|&(i, c)| c * qc[i]).sum();
        if let Some((a, b)) = &self.bubble {
            let loc = b.excess(|_, p| q.q_at(p));
            s += a * (b.far * q.k_p + loc);
        }
        Ok(s + self.offset * q.k_p)
    }

    /// log ∫ e^{4u} dV.
    pub fn log_exp_integral(&self) -> f64 {
        let s = self.smooth_field();
        let base = s.log_exp_integral();
        match &self.bubble {
            None => base + 4.0 * self.offset,
            Some((a, b)) => {
                let ac = 4.0 * a * b.far;
                // ∫e^{4S}(e^{4aφ} − e^{4ac}) on the balls, factored by e^{4ac}
                let loc: f64 = b
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| b.weights[i] * (4.0 * self.smooth_at(p)).exp() * ((4.0 * a * (b.jets[i].value - b.far)).exp() - 1.0))
                    .sum();
                ac + (base.exp() + loc).ln() + 4.0 * self.offset
            }
        }
    }

    /// ∫ u e_i dV.
    pub fn mode_projection(&self, i: usize) -> f64 {
        let mut s: f64 = self.smooth.iter().filter(|(j, _)| *j == i).map(|(_, c)| c).sum();
        if let Some((a, b)) = &self.bubble {
            s += a * self.bubble_mode_integral(b, i);
        }
        s + self.offset * self.mode_integral(i)
    }

    pub fn integral(&self) -> f64 {
        let vol = self.manifold.volume();
        let mut s: f64 = self
            .smooth
            .iter()
            .map(|&(i, c)| c * self.mode_integral(i))
            .sum();
        if let Some((a, b)) = &self.bubble {
            s += a * (b.far * vol + b.excess(|_, _| 1.0));
        }
        s + self.offset * vol
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.manifold.volume()
    }

    /// Normalized e^{4u}dV as nodes (bubble at its far value) plus ball corrections.
    pub fn density(&self) -> WeightedCloud {
        let m = &self.manifold;
        let bub = self.bubble.as_ref().map(|(a, b)| (*a, b));
        // the common factor e^{4ac + 4b} is dropped; normalization restores the scale
        let mut cloud = WeightedCloud::from_exponent(m, self.smooth.clone());
        if let Some((a, b)) = bub {
            let extra = WeightedCloud::new(
                b.points.clone(),
                b
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| b.weights[i] * (4.0 * self.smooth_at(p)).exp() * ((4.0 * a * (b.jets[i].value - b.far)).exp() - 1.0))
                    .collect(),
            );
            cloud.append(extra);
        }
        cloud.normalized()
    }
}

/// φ_s = S̄ Σ sᵢ v̂ᵢ as basis coefficients.
pub fn phi_s_coefficients(spec: &SpectrumDecomposition, s: &[f64], amplitude: f64) -> Result<Vec<(usize, f64)>> {
    if spec.k_bar == 0 {
        return Err(Error::Precondition("negative eigenspace is empty".into()));
    }
    if s.len() != spec.k_bar {
        return Err(Error::Precondition(format!("s has {} entries, k̄ = {}", s.len(), spec.k_bar)));
    }
    Ok(spec.negative_modes().iter().zip(s).map(|(&i, &si)| (i, amplitude * si)).collect())
}

pub fn phi_s(op: &OperatorModel, s: &[f64], amplitude: f64) -> Result<ScalarField> {
    let spec = op.full_spectrum()?;
    let coeffs = phi_s_coefficients(&spec, s, amplitude)?;
    let mut c = vec![0.0; op.manifold().basis_len()];
    for (i, v) in coeffs {
        c[i] = v;
    }
    ScalarField::from_coefficients(op.manifold(), c)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestMapConfig {
    pub amplitude: f64,
    pub lambda_bar: f64,
    pub delta: f64,
}

/// Φ_{S̄,λ̄}(σ, s). `sigma = None` is the k_P < 8π² regime, where Φ = φ_s.
pub fn big_phi(op: &OperatorModel, cfg: &TestMapConfig, sigma: Option<&Barycenter>, s: &[f64]) -> Result<TestField> {
    let m = op.manifold();
    let spec = op.full_spectrum()?;
    let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("|s| = {norm} exceeds 1")));
    }
    if cfg.lambda_bar < 1.0 {
        return Err(Error::Precondition("λ̄ must be at least 1".into()));
    }
    let smooth = if spec.k_bar == 0 { Vec::new() } else { phi_s_coefficients(&spec, s, cfg.amplitude)? };
    let sigma = match sigma {
        Some(sg) => sg,
        None => return TestField::new(m, smooth, None, 0.0),
    };
    let (lambda, a, b) = if norm <= 0.25 {
        (cfg.lambda_bar, 1.0, 0.0)
    } else if norm <= 0.5 {
        (2.0 * cfg.lambda_bar - 1.0 + 4.0 * (1.0 - cfg.lambda_bar) * norm, 1.0, 0.0)
    } else {
        (1.0, 2.0 - 2.0 * norm, 2.0 * norm - 1.0)
    };
    let bc = BubbleConfig::new(sigma.clone(), lambda, cfg.delta);
    TestField::new(m, smooth, Some((a, &bc)), b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn chi_is_c2_and_monotone() {
        let d = 0.1;
        assert_eq!(chi_delta(0.0, d), 0.0);
        assert_eq!(chi_delta(3.0 * d, d), 2.0 * d);
        let mut prev = 0.0;
        for i in 0..=3000 {
            let t = i as f64 * 1e-4;
            let (c, dc, _) = chi_jet(t, d);
            assert!(c >= prev - 1e-15 && dc >= 0.0);
            prev = c;
        }
        for &t in &[d, 2.0 * d] {
            let a = chi_jet(t - 1e-9, d);
            let b = chi_jet(t + 1e-9, d);
            assert!((a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-7 && (a.2 - b.2).abs() < 1e-5);
        }
    }

    #[test]
    fn jet_matches_finite_differences_on_torus() {
        let m = ModelManifold::torus(4, 1.0);
        let x = PointOnM::Torus([1.0, 1.0, 1.0, 1.0]);
        let cfg = BubbleConfig::new(Barycenter::dirac(x), 20.0, 0.2);
        for &r in &[0.03, 0.15, 0.27] {
            let p = [1.0 + r, 1.0 + 0.3 * r, 1.0, 1.0 - 0.2 * r];
            let h = 1e-4;
            let mut lap = 0.0;
            let mut g2 = 0.0;
            let f0 = cfg.value(&m, &PointOnM::Torus(p));
            for a in 0..4 {
                let mut pp = p;
                let mut pm = p;
                pp[a] += h;
                pm[a] -= h;
                let fp = cfg.value(&m, &PointOnM::Torus(pp));
                let fm = cfg.value(&m, &PointOnM::Torus(pm));
                lap += (fp - 2.0 * f0 + fm) / (h * h);
                g2 += ((fp - fm) / (2.0 * h)).powi(2);
            }
            let j = cfg.jet(&m, &PointOnM::Torus(p));
            assert!((j.value - f0).abs() < 1e-14);
            assert!((j.laplacian - lap).abs() < 1e-3 * (1.0 + lap.abs()), "{} vs {}", j.laplacian, lap);
            assert!((j.grad_sq - g2).abs() < 1e-5 * (1.0 + g2));
        }
    }

    #[test]
    fn far_value_and_center_value() {
        let m = ModelManifold::sphere(4, 1.0);
        let x = PointOnM::north();
        let cfg = BubbleConfig::new(Barycenter::dirac(x), 200.0, 0.1);
        assert!((cfg.value(&m, &x) - (400.0f64).ln()).abs() < 1e-12);
        let far = x.antipode().unwrap();
        assert!((cfg.value(&m, &far) - cfg.far_value()).abs() < 1e-10);
    }

    #[test]
    fn single_bubble_mass() {
        let m = ModelManifold::sphere(4, 1.0);
        let cfg = BubbleConfig::new(Barycenter::dirac(PointOnM::north()), 200.0, 0.2);
        let f = TestField::bubble(&m, &cfg).unwrap();
        let mass = f.log_exp_integral().exp();
        let want = 8.0 * PI * PI / 3.0;
        assert!((mass / want - 1.0).abs() < 0.05, "mass {mass}");
    }
}
