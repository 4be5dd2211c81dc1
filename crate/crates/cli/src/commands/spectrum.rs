use qcurv_core::paneitz::{kp_band, KpBand};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::report::{qty, write_csv, write_json, Quantity, DIMLESS, INV_L4};
use crate::Failure;

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Params {
    /// number of lowest eigenvalues written; all basis modes when absent
    count: Option<usize>,
}

#[derive(Serialize)]
struct Row {
    index: usize,
    mode: usize,
    degree: u64,
    eigenvalue: f64,
}

#[derive(Serialize)]
struct Band {
    kind: &'static str,
    index: u32,
}

#[derive(Serialize)]
struct Summary {
    k_bar: usize,
    k_p: Quantity,
    k_p_over_8pi2: Quantity,
    band: Band,
    eigen_residual: Quantity,
    negative_eigenvalues: Vec<Quantity>,
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let p: Params = cfg.params()?;
    let (m, op) = cfg.build()?;
    let spec = match p.count {
        Some(n) => op.spectrum(n)?,
        None => op.full_spectrum()?,
    };
    let full = op.full_spectrum()?;
    let q = op.curvature()?;
    let rows = spec.eigenvalues.iter().zip(&spec.modes).enumerate().map(|(index, (&eigenvalue, &mode))| Row {
        index,
        mode,
        degree: m.mode_degree(mode),
        eigenvalue,
    });
    write_csv(&cfg.out, "spectrum.csv", rows)?;
    let band = match kp_band(q.k_p, 1e-6) {
        KpBand::Band(k) => Band { kind: "band", index: k },
        KpBand::BoundaryForbidden(k) => Band { kind: "boundary_forbidden", index: k },
    };
    let summary = Summary {
        k_bar: full.k_bar,
        k_p: qty(q.k_p, DIMLESS, "total_q_curvature"),
        k_p_over_8pi2: qty(q.k_p / (8.0 * std::f64::consts::PI.powi(2)), DIMLESS, "total_q_curvature_in_8pi2_units"),
        band,
        eigen_residual: qty(spec.residual, DIMLESS, "relative_eigen_residual"),
        negative_eigenvalues: full.negative_values().iter().map(|&v| qty(v, INV_L4, "negative_paneitz_eigenvalue")).collect(),
    };
    write_json(&cfg.out, "summary.json", &summary)
}
