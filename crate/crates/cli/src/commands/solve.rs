use qcurv_core::geometry::ScalarField;
use qcurv_core::minmax::{continuation, manufacture_profile, monotonicity_monitor, ExpCosProfile, SolveConfig, SolveStatus};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::report::{qty, write_csv, write_json, Quantity, DIMLESS};
use crate::Failure;

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum Problem {
    /// Q from the operator configuration
    Curvature,
    /// known solution w* = A·exp(β cos x₁) on the flat torus
    Manufactured { amplitude: f64, beta: f64, k_p: f64 },
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Params {
    problem: Problem,
    solver: SolveConfig,
}

impl Default for Params {
    fn default() -> Self {
        Params { problem: Problem::Curvature, solver: SolveConfig::default() }
    }
}

#[derive(Serialize)]
struct Row {
    rho: f64,
    step: usize,
    kind: &'static str,
    energy: f64,
    residual: f64,
    mass_defect: f64,
    v_norm: f64,
}

#[derive(Serialize)]
struct RunSummary {
    rho: f64,
    status: SolveStatus,
    iterations: usize,
    energy: Quantity,
    residual: Quantity,
    descent: bool,
    normalization: bool,
    recovery_error: Option<Quantity>,
}

#[derive(Serialize)]
struct Summary {
    k_p: Quantity,
    runs: Vec<RunSummary>,
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let p: Params = cfg.params()?;
    p.solver.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let (m, op) = cfg.build()?;
    let (q, exact) = match p.problem {
        Problem::Curvature => (op.curvature()?, None),
        Problem::Manufactured { amplitude, beta, k_p } => {
            let mf = manufacture_profile(&op, &ExpCosProfile { amplitude, beta }, k_p).map_err(|e| Failure::Config(e.to_string()))?;
            (mf.q.clone(), Some(mf))
        }
    };
    let reports = continuation(&op, &q, &ScalarField::zeros(&m), &p.solver)?;

    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for r in &reports {
        for (step, it) in r.history.iter().enumerate() {
            let kind = match it.kind {
                qcurv_core::minmax::StepKind::Start => "start",
                qcurv_core::minmax::StepKind::Flow => "flow",
                qcurv_core::minmax::StepKind::Newton => "newton",
            };
            rows.push(Row { rho: r.rho, step, kind, energy: it.energy, residual: it.residual, mass_defect: it.mass_defect, v_norm: it.v_norm });
        }
        let last = r.history.last().expect("history starts with the initial iterate");
        let recovery_error = match &exact {
            Some(mf) if r.rho == 1.0 => Some(qty(mf.error(&r.final_field(&m)?)?, DIMLESS, "sup_error_vs_exact")),
            _ => None,
        };
        runs.push(RunSummary {
            rho: r.rho,
            status: r.status,
            iterations: r.history.len() - 1,
            energy: qty(last.energy, DIMLESS, "energy_rho"),
            residual: qty(last.residual, DIMLESS, "euler_residual_sup"),
            descent: r.descent_holds(0.0),
            normalization: r.normalization_holds(1e-10),
            recovery_error,
        });
    }
    write_csv(&cfg.out, "history.csv", rows)?;
    write_json(&cfg.out, "solve.json", &Summary { k_p: qty(q.k_p, DIMLESS, "total_q_curvature"), runs })?;

    // monotonicity of ρ ↦ II_ρ(u_ρ)/ρ over the converged points; noise from the last step
    let done: Vec<_> = reports.iter().filter(|r| r.status == SolveStatus::Converged).collect();
    let rhos: Vec<f64> = done.iter().map(|r| r.rho).collect();
    let est: Vec<f64> = done.iter().map(|r| r.history.last().unwrap().energy).collect();
    let noise: Vec<f64> = done
        .iter()
        .map(|r| match r.history.as_slice() {
            [.., a, b] => (a.energy - b.energy).abs(),
            _ => 0.0,
        })
        .collect();
    match monotonicity_monitor(&rhos, &est, &noise, None) {
        Ok(rep) => write_json(&cfg.out, "monotonicity.json", &rep),
        Err(e) => write_json(&cfg.out, "monotonicity.json", &serde_json::json!({ "unavailable": e.to_string() })),
    }
}
