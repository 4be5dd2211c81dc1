use std::sync::{Arc, OnceLock};

use super::{ModelManifold, PointOnM};
use crate::error::{Error, Result};

/// Node values on a model manifold; spectral coefficients are computed on demand.
#[derive(Clone)]
pub struct ScalarField {
    manifold: Arc<ModelManifold>,
    values: Vec<f64>,
    coeffs: OnceLock<Vec<f64>>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField").field("nodes", &self.values.len()).finish()
    }
}

impl ScalarField {
    pub fn from_values(m: &Arc<ModelManifold>, values: Vec<f64>) -> Result<Self> {
        if values.len() != m.node_count() {
            return Err(Error::Precondition(format!(
                "{} values for {} nodes",
                values.len(),
                m.node_count()
            )));
        }
        Ok(ScalarField { manifold: m.clone(), values, coeffs: OnceLock::new() })
    }

    pub fn from_coefficients(m: &Arc<ModelManifold>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != m.basis_len() {
            return Err(Error::Precondition(format!("{} coefficients for basis of {}", coeffs.len(), m.basis_len())));
        }
        let values = m.synthesize(&coeffs);
        let cell = OnceLock::new();
        let _ = cell.set(coeffs);
        Ok(ScalarField { manifold: m.clone(), values, coeffs: cell })
    }

    pub fn from_fn(m: &Arc<ModelManifold>, f: impl Fn(&PointOnM) -> f64) -> Self {
        let values = m.nodes().iter().map(f).collect();
        ScalarField { manifold: m.clone(), values, coeffs: OnceLock::new() }
    }

    pub fn constant(m: &Arc<ModelManifold>, c: f64) -> Self {
        ScalarField { manifold: m.clone(), values: vec![c; m.node_count()], coeffs: OnceLock::new() }
    }

    pub fn zeros(m: &Arc<ModelManifold>) -> Self {
        Self::constant(m, 0.0)
    }

    /// Basis mode i (unit L² norm for the base metric).
    pub fn mode(m: &Arc<ModelManifold>, i: usize) -> Self {
        let mut c = vec![0.0; m.basis_len()];
        c[i] = 1.0;
        Self::from_coefficients(m, c).expect("basis length")
    }

    pub fn manifold(&self) -> &Arc<ModelManifold> {
        &self.manifold
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn coefficients(&self) -> &[f64] {
        self.coeffs.get_or_init(|| self.manifold.analyze(&self.values))
    }

    /// Projection onto the represented band: synthesize ∘ analyze.
    pub fn band_limited(&self) -> ScalarField {
        Self::from_coefficients(&self.manifold, self.coefficients().to_vec()).expect("same basis")
    }

    pub fn same_manifold(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.manifold, &other.manifold) {
            Ok(())
        } else {
            Err(Error::ManifoldMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            manifold: self.manifold.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            coeffs: OnceLock::new(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.same_manifold(other)?;
        Ok(ScalarField {
            manifold: self.manifold.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            coeffs: OnceLock::new(),
        })
    }

    /// self + a·other
    pub fn axpy(&self, a: f64, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |x, y| x + a * y)
    }

    pub fn scale(&self, a: f64) -> ScalarField {
        self.map(|v| a * v)
    }

    pub fn shift(&self, c: f64) -> ScalarField {
        self.map(|v| v + c)
    }

    pub fn integral(&self) -> f64 {
        self.manifold.integrate_values(&self.values)
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.manifold.volume()
    }

    /// ∫ u v dV of the current metric.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.same_manifold(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.manifold.weights())
            .map(|((a, b), w)| a * b * w)
            .sum())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).unwrap().sqrt()
    }

    /// log ∫ e^{4u} dV by max-shift.
    pub fn log_exp_integral(&self) -> f64 {
        let mx = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self
            .values
            .iter()
            .zip(self.manifold.weights())
            .map(|(v, w)| w * (4.0 * (v - mx)).exp())
            .sum();
        4.0 * mx + s.ln()
    }

    pub fn laplacian(&self) -> Result<ScalarField> {
        let v = self.manifold.laplacian_values(&self.values)?;
        ScalarField::from_values(&self.manifold, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrals_of_constants() {
        let s = ModelManifold::sphere(12, 1.0);
        let one = ScalarField::constant(&s, 1.0);
        let v = s.integrate(&one).unwrap();
        assert!((v - 8.0 * std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-12);
        let x5 = ScalarField::from_fn(&s, |p| match p {
            PointOnM::Sphere(x) => x[4],
            _ => unreachable!(),
        });
        assert!(s.integrate(&x5).unwrap().abs() < 1e-12);
        let t = ModelManifold::torus(4, 1.0);
        assert!(t.integrate(&one).is_err());
    }

    #[test]
    fn log_exp_integral_of_large_constant() {
        let t = ModelManifold::torus(4, 1.0);
        let u = ScalarField::constant(&t, 300.0);
        let want = 1200.0 + t.volume().ln();
        assert!((u.log_exp_integral() - want).abs() < 1e-10);
    }
}
