use std::f64::consts::PI;

use qcurv_core::functional::adams_gap;
use qcurv_core::geometry::{Kind, ManifoldSpec, ModelManifold, ScalarField};
use qcurv_core::paneitz::{gauss_bonnet_audit, q_curvature, OperatorModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::report::{qty, write_json, Quantity, DIMLESS, VOLUME};
use crate::Failure;

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Params {
    conformal_trials: usize,
    /// sup-norm budget of each random conformal factor
    factor_amplitude: f64,
    /// highest basis degree in the random factors and Adams samples
    factor_degree: u64,
    adams_samples: usize,
    kp_tolerance: f64,
    /// fault injection: multiplies the quadrature weights seen by the volume audit
    quadrature_scale: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { conformal_trials: 10, factor_amplitude: 0.1, factor_degree: 2, adams_samples: 8, kp_tolerance: 1e-6, quadrature_scale: 1.0 }
    }
}

#[derive(Serialize)]
struct Record {
    name: &'static str,
    pass: bool,
    measured: Quantity,
    tolerance: Quantity,
}

#[derive(Serialize)]
struct Audit {
    seed: u64,
    records: Vec<Record>,
    pass: bool,
}

fn random_field(m: &std::sync::Arc<ModelManifold>, rng: &mut ChaCha8Rng, degree: u64, amplitude: f64) -> Result<ScalarField, Failure> {
    let modes: Vec<usize> = (0..m.basis_len()).filter(|&i| (1..=degree).contains(&m.mode_degree(i))).collect();
    let mut c = vec![0.0; m.basis_len()];
    for &i in &modes {
        c[i] = rng.gen_range(-1.0..1.0);
    }
    let u = ScalarField::from_coefficients(m, c)?;
    let s = u.sup_norm();
    Ok(if s > 0.0 { u.scale(amplitude / s) } else { u })
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let p: Params = cfg.params()?;
    let (m, op) = cfg.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::new();
    let r = m.radius();

    let exact_volume = match (m.is_conformal(), m.kind()) {
        (false, Kind::Torus) => Some((2.0 * PI * r).powi(4)),
        (false, Kind::Sphere) => Some(8.0 * PI * PI * r.powi(4) / 3.0),
        (true, _) => None,
    };
    if let Some(v) = exact_volume {
        let measured: f64 = m.weights().iter().map(|w| w * p.quadrature_scale).sum();
        let defect = (measured / v - 1.0).abs();
        records.push(Record {
            name: "volume",
            pass: defect <= 1e-10,
            measured: qty(measured, VOLUME, "quadrature_volume"),
            tolerance: qty(1e-10, DIMLESS, "relative_volume_defect"),
        });
    }

    let gb = gauss_bonnet_audit(&m)?;
    let gb_tol = if m.kind() == Kind::Torus && !m.is_conformal() { 1e-10 } else { 1e-6 };
    records.push(Record {
        name: "gauss_bonnet",
        pass: gb.defect <= gb_tol,
        measured: qty(gb.defect, DIMLESS, "gauss_bonnet_defect"),
        tolerance: qty(gb_tol, DIMLESS, "gauss_bonnet_defect"),
    });

    // k_P against its value on the base metric
    let mut worst: f64 = 0.0;
    if m.is_conformal() {
        let base_spec = ManifoldSpec { kind: cfg.manifold.base.clone().unwrap_or_default(), conformal_factor: None, base: None, ..cfg.manifold.clone() };
        let base = ModelManifold::build(&base_spec)?;
        worst = (q_curvature(&m)?.k_p - q_curvature(&base)?.k_p).abs();
    } else {
        let k0 = q_curvature(&m)?.k_p;
        for _ in 0..p.conformal_trials {
            let w = random_field(&m, &mut rng, p.factor_degree, p.factor_amplitude)?;
            let mw = m.conformal_rescale(&w)?;
            worst = worst.max((q_curvature(&mw)?.k_p - k0).abs());
        }
    }
    records.push(Record {
        name: "kp_invariance",
        pass: worst <= p.kp_tolerance,
        measured: qty(worst, DIMLESS, "total_q_curvature_drift"),
        tolerance: qty(p.kp_tolerance, DIMLESS, "total_q_curvature_drift"),
    });

    let gop: &OperatorModel = &op;
    let mut gap_max = f64::NEG_INFINITY;
    for _ in 0..p.adams_samples {
        let u = random_field(&m, &mut rng, p.factor_degree.max(1), 1.0)?;
        gap_max = gap_max.max(adams_gap(gop, &u)?);
    }
    if p.adams_samples > 0 {
        records.push(Record {
            name: "adams_gap_finite",
            pass: gap_max.is_finite(),
            measured: qty(gap_max, DIMLESS, "adams_gap_max"),
            tolerance: qty(f64::MAX, DIMLESS, "adams_gap_max"),
        });
    }

    let pass = records.iter().all(|r| r.pass);
    let failing: Vec<&str> = records.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    write_json(&cfg.out, "audit.json", &Audit { seed: cfg.seed, records, pass })?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Run(format!("audit failed: {}", failing.join(", "))))
    }
}
