use std::f64::consts::PI;

use qcurv_core::bubbles::{estimate_suite, EstimateConfig};
use serde::Serialize;

use crate::config::RunConfig;
use crate::report::{qty, write_csv, write_json, Quantity, DIMLESS};
use crate::Failure;

#[derive(Serialize)]
struct Row {
    lambda: f64,
    quadratic: f64,
    q_term: f64,
    log_mass: f64,
}

#[derive(Serialize)]
struct Slopes {
    k: usize,
    energy_slope: Quantity,
    energy_slope_ratio: Quantity,
    energy_band: [f64; 2],
    energy_in_band: bool,
    q_slope: Quantity,
    q_slope_relative_error: Quantity,
    log_mass_drift: Quantity,
    spectral_offset: Quantity,
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let mut p: EstimateConfig = cfg.required_params()?;
    let (m, op) = cfg.build()?;
    let q = op.curvature()?;
    p.sigma = qcurv_core::barycenter::Barycenter::new(&m, p.sigma.atoms.clone(), p.sigma.weights.clone()).map_err(|e| Failure::Config(e.to_string()))?;
    let rep = estimate_suite(&op, &q, &p)?;
    let rows = (0..rep.lambdas.len()).map(|i| Row {
        lambda: rep.lambdas[i],
        quadratic: rep.quadratics[i],
        q_term: rep.q_terms[i],
        log_mass: rep.log_masses[i],
    });
    write_csv(&cfg.out, "bubble.csv", rows)?;
    let k = p.sigma.len();
    let target = 32.0 * k as f64 * PI * PI;
    let ratio = rep.p_slope.slope / target;
    let q_err = if q.k_p != 0.0 { (rep.q_slope.slope + q.k_p).abs() / q.k_p.abs() } else { rep.q_slope.slope.abs() };
    let slopes = Slopes {
        k,
        energy_slope: qty(rep.p_slope.slope, DIMLESS, "quadratic_per_log_lambda"),
        energy_slope_ratio: qty(ratio, DIMLESS, "quadratic_slope_over_32k_pi2"),
        energy_band: [0.8, 1.1],
        energy_in_band: (0.8..=1.1).contains(&ratio),
        q_slope: qty(rep.q_slope.slope, DIMLESS, "q_term_per_log_lambda"),
        q_slope_relative_error: qty(q_err, DIMLESS, "q_slope_vs_minus_kp"),
        log_mass_drift: qty(rep.log_mass_drift, DIMLESS, "log_mass_drift"),
        spectral_offset: qty(rep.spectral_offset, DIMLESS, "negative_space_offset"),
    };
    write_json(&cfg.out, "bubble.json", &slopes)
}
