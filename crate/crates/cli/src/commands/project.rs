use qcurv_core::barycenter::{bary_distance, psi_hat, Barycenter, CascadeConfig, PsiTrace};
use qcurv_core::bubbles::{BubbleConfig, TestField};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::report::{qty, write_json, Quantity, LENGTH};
use crate::Failure;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    /// atoms of the bubble field to project
    sigma: Barycenter,
    lambda: f64,
    delta: f64,
    /// target stratum M_k
    k: usize,
    #[serde(default)]
    cascade: CascadeConfig,
}

#[derive(Serialize)]
struct Projection {
    input: Barycenter,
    result: Barycenter,
    distance: Quantity,
    trace: PsiTrace,
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let p: Params = cfg.required_params()?;
    let (m, op) = cfg.build()?;
    let q = op.curvature()?;
    if p.k == 0 {
        return Err(Failure::Config("k must be at least 1".into()));
    }
    let sigma = Barycenter::new(&m, p.sigma.atoms, p.sigma.weights).map_err(|e| Failure::Config(e.to_string()))?;
    let bc = BubbleConfig::new(sigma.clone(), p.lambda, p.delta);
    bc.validate(&m).map_err(|e| Failure::Config(e.to_string()))?;
    let u = TestField::bubble(&m, &bc)?;
    let (result, trace) = psi_hat(&op, &q, &u, p.k, &p.cascade)?;
    let d = bary_distance(&m, &result, &sigma, &p.cascade.metric)?;
    write_json(&cfg.out, "project.json", &Projection { input: sigma, result, distance: qty(d, LENGTH, "dual_c1_distance"), trace })
}
