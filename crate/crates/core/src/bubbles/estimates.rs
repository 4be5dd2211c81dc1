//! Measured growth rates of the bubble energy pieces along λ-grids.

use serde::{Deserialize, Serialize};

use super::{phi_s_coefficients, BubbleConfig, TestField};
use crate::barycenter::Barycenter;
use crate::error::{Error, Result};
use crate::paneitz::{CurvatureData, OperatorModel};

/// Least-squares line y ≈ slope·log λ + intercept.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// root mean square of the fit residuals
    pub rms: f64,
}

impl SlopeFit {
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || n != y.len() {
            return Err(Error::DegenerateFit(format!("{n} points")));
        }
        let nf = n as f64;
        let mx = x.iter().sum::<f64>() / nf;
        let my = y.iter().sum::<f64>() / nf;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        if sxx <= 0.0 {
            return Err(Error::DegenerateFit("abscissae coincide".into()));
        }
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let rms = (x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum::<f64>() / nf).sqrt();
        Ok(SlopeFit { slope, intercept, rms })
    }

    pub fn log_fit(lambdas: &[f64], y: &[f64]) -> Result<Self> {
        let x: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
        Self::fit(&x, y)
    }
}

fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.len() < 4 {
        return Err(Error::DegenerateFit(format!("λ-grid has {} points, need 4", lambdas.len())));
    }
    if lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Precondition("λ must be positive".into()));
    }
    Ok(())
}

/// Slope of ⟨Pφ_{λ,σ}, φ_{λ,σ}⟩ against log λ.
pub fn energy_slope(op: &OperatorModel, sigma: &Barycenter, delta: f64, lambdas: &[f64]) -> Result<SlopeFit> {
    check_grid(lambdas)?;
    let m = op.manifold();
    if sigma.min_weight() < 0.1 {
        return Err(Error::Precondition("atom weights must be at least 0.1".into()));
    }
    if sigma.len() > 1 && sigma.min_separation(m) < 10.0 * delta {
        return Err(Error::Precondition("atoms closer than 10δ".into()));
    }
    let y = lambdas
        .iter()
        .map(|&l| TestField::bubble(m, &BubbleConfig::new(sigma.clone(), l, delta))?.quadratic(op))
        .collect::<Result<Vec<_>>>()?;
    SlopeFit::log_fit(lambdas, &y)
}

/// max over the negative modes of |∫ v̂ᵢ φ_{λ,σ} dV|.
pub fn eigen_pairing_decay(op: &OperatorModel, sigma: &Barycenter, lambda: f64, delta: f64) -> Result<f64> {
    let spec = op.full_spectrum()?;
    if spec.k_bar == 0 {
        return Ok(0.0);
    }
    let f = TestField::bubble(op.manifold(), &BubbleConfig::new(sigma.clone(), lambda, delta))?;
    Ok(spec.negative_modes().iter().map(|&i| f.mode_projection(i).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub sigma: Barycenter,
    /// point of the unit ball in ℝ^k̄; empty when k̄ = 0
    pub s: Vec<f64>,
    pub amplitude: f64,
    pub delta: f64,
    pub lambdas: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    pub lambdas: Vec<f64>,
    /// ∫Q(φ_s + φ_{λ,σ})
    pub q_terms: Vec<f64>,
    /// log∫e^{4(φ_s + φ_{λ,σ})}
    pub log_masses: Vec<f64>,
    /// ⟨P(φ_s + φ_{λ,σ}), φ_s + φ_{λ,σ}⟩
    pub quadratics: Vec<f64>,
    pub q_slope: SlopeFit,
    pub log_mass_drift: f64,
    pub p_slope: SlopeFit,
    /// −|λ_k̄||s|²S̄², the negative-space contribution in the upper bound
    pub spectral_offset: f64,
}

pub fn estimate_suite(op: &OperatorModel, q: &CurvatureData, cfg: &EstimateConfig) -> Result<EstimateReport> {
    check_grid(&cfg.lambdas)?;
    let m = op.manifold();
    let spec = op.full_spectrum()?;
    let smooth = if spec.k_bar == 0 || cfg.s.is_empty() { Vec::new() } else { phi_s_coefficients(&spec, &cfg.s, cfg.amplitude)? };
    let mut q_terms = Vec::new();
    let mut log_masses = Vec::new();
    let mut quadratics = Vec::new();
    for &l in &cfg.lambdas {
        let bc = BubbleConfig::new(cfg.sigma.clone(), l, cfg.delta);
        let f = TestField::new(m, smooth.clone(), Some((1.0, &bc)), 0.0)?;
        q_terms.push(f.q_integral(q)?);
        log_masses.push(f.log_exp_integral());
        quadratics.push(f.quadratic(op)?);
    }
    let s2: f64 = cfg.s.iter().map(|v| v * v).sum();
    let top = spec.negative_values().last().map_or(0.0, |v| v.abs());
    let (lo, hi) = log_masses.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok(EstimateReport {
        q_slope: SlopeFit::log_fit(&cfg.lambdas, &q_terms)?,
        p_slope: SlopeFit::log_fit(&cfg.lambdas, &quadratics)?,
        log_mass_drift: hi - lo,
        spectral_offset: -top * s2 * cfg.amplitude * cfg.amplitude,
        lambdas: cfg.lambdas.clone(),
        q_terms,
        log_masses,
        quadratics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = SlopeFit::fit(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14 && f.rms < 1e-14);
        assert!(SlopeFit::fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
