//! Problems with a known solution: Q := Q̄e^{4w*} − ½P w*, so that w* solves
//! P u + 2Q = 2k_P e^{4u}/∫e^{4u} with k_P = Q̄∫e^{4w*}.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Kind, PointOnM, ScalarField};
use crate::paneitz::{CurvatureData, OperatorModel};

#[derive(Clone, Debug)]
pub struct Manufactured {
    pub q: Arc<CurvatureData>,
    pub q_bar: f64,
    pub w_star: ScalarField,
}

impl Manufactured {
    pub fn k_p(&self) -> f64 {
        self.q.k_p
    }

    /// sup|u − w*| after both are volume normalized.
    pub fn error(&self, u: &ScalarField) -> Result<f64> {
        let a = u.shift(-0.25 * u.log_exp_integral());
        let b = self.w_star.shift(-0.25 * self.w_star.log_exp_integral());
        Ok(a.axpy(-1.0, &b)?.sup_norm())
    }
}

/// Discrete inversion: P w* is taken at the nodes, so w* solves the collocated problem exactly.
pub fn manufacture(op: &OperatorModel, w_star: &ScalarField, k_p: f64) -> Result<Manufactured> {
    let pw = op.apply(w_star)?;
    build(op, w_star.clone(), pw.values(), k_p)
}

/// w*(x) = A·exp(β cos(x₁/R)) on a flat torus, with P w* = ∂⁴w*/∂x₁⁴ evaluated in closed form.
/// The profile is not band-limited, so the recovered error measures the discretization.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExpCosProfile {
    pub amplitude: f64,
    pub beta: f64,
}

impl ExpCosProfile {
    pub fn value(&self, s: f64) -> f64 {
        self.amplitude * (self.beta * s.cos()).exp()
    }

    /// d⁴/ds⁴ of the profile.
    pub fn fourth(&self, s: f64) -> f64 {
        let b = self.beta;
        let (sn, c) = s.sin_cos();
        let s2 = sn * sn;
        self.value(s) * (b.powi(4) * s2 * s2 - 6.0 * b.powi(3) * s2 * c - 7.0 * b * b * s2 + 3.0 * b * b + b * c)
    }
}

pub fn manufacture_profile(op: &OperatorModel, profile: &ExpCosProfile, k_p: f64) -> Result<Manufactured> {
    let m = op.manifold();
    if m.kind() != Kind::Torus || m.is_conformal() || op.is_synthetic() || m.einstein_constant().unwrap_or(0.0) != 0.0 {
        return Err(Error::Unsupported("closed-form manufacturing needs the flat torus operator".into()));
    }
    let r = m.radius();
    let first = |p: &PointOnM| match p {
        PointOnM::Torus(x) => x[0] / r,
        _ => unreachable!(),
    };
    let w = ScalarField::from_fn(m, |p| profile.value(first(p)));
    let pw: Vec<f64> = m.nodes().iter().map(|p| profile.fourth(first(p)) / r.powi(4)).collect();
    build(op, w, &pw, k_p)
}

fn build(op: &OperatorModel, w: ScalarField, pw: &[f64], k_p: f64) -> Result<Manufactured> {
    let m = op.manifold();
    let mass = w.log_exp_integral().exp();
    let q_bar = k_p / mass;
    let vals = w.values().iter().zip(pw).map(|(wi, p)| q_bar * (4.0 * wi).exp() - 0.5 * p).collect();
    let q = ScalarField::from_values(m, vals)?;
    Ok(Manufactured { q: Arc::new(CurvatureData::from_field(q, 0.0)), q_bar, w_star: w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::euler_residual;
    use crate::geometry::ModelManifold;
    use std::f64::consts::PI;

    #[test]
    fn zero_profile_gives_uniform_q() {
        let m = ModelManifold::torus(4, 1.0);
        let op = OperatorModel::geometric(&m, Default::default());
        let p = manufacture(&op, &ScalarField::zeros(&m), 4.0 * PI * PI).unwrap();
        let vol = (2.0 * PI).powi(4);
        assert!((p.q_bar - 4.0 * PI * PI / vol).abs() < 1e-15);
        assert!((p.k_p() - 4.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn manufactured_field_has_zero_residual() {
        let m = ModelManifold::torus(8, 1.0);
        let op = OperatorModel::geometric(&m, Default::default());
        let w = ScalarField::from_fn(&m, |p| match p {
            PointOnM::Torus(x) => 0.2 * x[0].cos(),
            _ => 0.0,
        });
        let p = manufacture(&op, &w, 4.0 * PI * PI).unwrap();
        let r = euler_residual(&op, &p.q, &w, 1.0).unwrap();
        assert!(r.sup_norm() <= 1e-10, "{}", r.sup_norm());
    }

    #[test]
    fn fourth_derivative_matches_differences() {
        let pr = ExpCosProfile { amplitude: 0.3, beta: 0.7 };
        let h = 4e-3;
        for s in [0.1, 1.3, 2.9] {
            let fd = (pr.value(s + 2.0 * h) - 4.0 * pr.value(s + h) + 6.0 * pr.value(s) - 4.0 * pr.value(s - h) + pr.value(s - 2.0 * h)) / h.powi(4);
            assert!((fd - pr.fourth(s)).abs() < 1e-4 * (1.0 + fd.abs()) * 10.0, "{fd} {}", pr.fourth(s));
        }
    }
}
