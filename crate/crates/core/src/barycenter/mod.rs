//! Formal barycenters Σ tᵢδ_{xᵢ}, their dual-C¹ distance, strata and the maps into them.

mod homotopy;
mod psi;
mod strata;

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use serde::{Deserialize, Serialize};

pub use homotopy::{hat_homotopy, homotopy_t, path_jump, Homotopy, HomotopyConfig};
pub use psi::{akk_distance, psi, psi_hat, psi_hat_density, s_vector, AkkPoint, CascadeConfig, PsiTrace};
pub use strata::{
    check_stratum_bounds, density_fit, dictionary_lower_bound, project_pj, stratum_fit, stratum_margin, truncated_cost, Projectable, StratumFit,
    StratumVerdict,
};

use crate::error::{Error, Result};
use crate::geometry::{Kind, ModelManifold, PointOnM};

/// Atoms closer than this are merged.
pub const MERGE_DISTANCE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Barycenter {
    pub atoms: Vec<PointOnM>,
    pub weights: Vec<f64>,
}

impl Barycenter {
    /// Canonical form: zero weights dropped, coincident atoms merged, weights summing to 1.
    pub fn new(m: &ModelManifold, atoms: Vec<PointOnM>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::Precondition("atoms and weights must match and be non-empty".into()));
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::Precondition("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("weights sum to {total}")));
        }
        Ok(Self::canonical(m, atoms, weights))
    }

    pub fn dirac(p: PointOnM) -> Self {
        Barycenter { atoms: vec![p], weights: vec![1.0] }
    }

    /// σ̄: the Dirac mass at the canonical base point (origin of the torus, north pole of S⁴).
    pub fn collapsed(m: &ModelManifold) -> Self {
        let p = match m.kind() {
            Kind::Torus => PointOnM::Torus([0.0; 4]),
            Kind::Sphere => PointOnM::north(),
        };
        Self::dirac(p)
    }

    pub(crate) fn canonical(m: &ModelManifold, atoms: Vec<PointOnM>, weights: Vec<f64>) -> Self {
        let mut out_a: Vec<PointOnM> = Vec::new();
        let mut out_w: Vec<f64> = Vec::new();
        for (a, w) in atoms.into_iter().zip(weights) {
            if w <= 0.0 {
                continue;
            }
            let a = m.canonicalize(&a);
            match out_a.iter().position(|b| m.dist(b, &a) < MERGE_DISTANCE) {
                Some(i) => out_w[i] += w,
                None => {
                    out_a.push(a);
                    out_w.push(w);
                }
            }
        }
        let s: f64 = out_w.iter().sum();
        for w in &mut out_w {
            *w /= s;
        }
        exact_unit_sum(&mut out_w);
        Barycenter { atoms: out_a, weights: out_w }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn min_separation(&self, m: &ModelManifold) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                d = d.min(m.dist(&self.atoms[i], &self.atoms[j]));
            }
        }
        d
    }
}

/// Makes the left-to-right float sum exactly 1: a few defect corrections on
/// the largest weight, then the last positive weight absorbs the prefix remainder
/// (1 - p is exact for p >= 1/2, and otherwise p + fl(1 - p) rounds to 1).
pub(crate) fn exact_unit_sum(w: &mut [f64]) {
    let Some(big) = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])) else { return };
    for _ in 0..4 {
        let s: f64 = w.iter().sum();
        if s == 1.0 {
            return;
        }
        w[big] += 1.0 - s;
    }
    // trailing zeros add exactly, so the last positive weight is the final addend
    let Some(last) = w.iter().rposition(|&v| v > 0.0) else { return };
    let prefix: f64 = w[..last].iter().sum();
    w[last] = 1.0 - prefix;
}

/// How the C¹ ball is read: max(sup|f|, Lip f) ≤ 1, or sup|f| + Lip f ≤ 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormConvention {
    #[default]
    Max,
    Sum,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub convention: NormConvention,
    /// highest basis degree in the spectral dictionary
    pub dictionary_degree: u64,
    /// relative tolerance reported with LP values
    pub lp_tolerance: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { convention: NormConvention::Max, dictionary_degree: 2, lp_tolerance: 1e-9 }
    }
}

/// Dual-C¹ distance between two barycenters, by a linear program over test-function
/// values on the union support. Lipschitz data on a finite set extends to M with the
/// same bounds (McShane extension, then clamping), so the value is exact.
pub fn bary_distance(m: &ModelManifold, a: &Barycenter, b: &Barycenter, cfg: &MetricConfig) -> Result<f64> {
    let mut pts: Vec<PointOnM> = Vec::new();
    let mut c: Vec<f64> = Vec::new();
    for (sign, s) in [(1.0, a), (-1.0, b)] {
        for (p, w) in s.atoms.iter().zip(&s.weights) {
            match pts.iter().position(|q| m.dist(q, p) < MERGE_DISTANCE) {
                Some(i) => c[i] += sign * w,
                None => {
                    pts.push(*p);
                    c.push(sign * w);
                }
            }
        }
    }
    if c.iter().all(|v| v.abs() < 1e-15) {
        return Ok(0.0);
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let (bound, sum_vars) = match cfg.convention {
        NormConvention::Max => (1.0, None),
        NormConvention::Sum => {
            let s = lp.add_var(0.0, (0.0, 1.0));
            let l = lp.add_var(0.0, (0.0, 1.0));
            lp.add_constraint(&[(s, 1.0), (l, 1.0)][..], ComparisonOp::Le, 1.0);
            (1.0, Some((s, l)))
        }
    };
    let f: Vec<Variable> = c.iter().map(|&ci| lp.add_var(ci, (-bound, bound))).collect();
    for i in 0..pts.len() {
        if let Some((s, _)) = sum_vars {
            lp.add_constraint(&[(f[i], 1.0), (s, -1.0)][..], ComparisonOp::Le, 0.0);
            lp.add_constraint(&[(f[i], -1.0), (s, -1.0)][..], ComparisonOp::Le, 0.0);
        }
        for j in i + 1..pts.len() {
            let d = m.dist(&pts[i], &pts[j]);
            match sum_vars {
                None => {
                    if d < 2.0 * bound {
                        lp.add_constraint(&[(f[i], 1.0), (f[j], -1.0)][..], ComparisonOp::Le, d);
                        lp.add_constraint(&[(f[i], -1.0), (f[j], 1.0)][..], ComparisonOp::Le, d);
                    }
                }
                Some((_, l)) => {
                    lp.add_constraint(&[(f[i], 1.0), (f[j], -1.0), (l, -d)][..], ComparisonOp::Le, 0.0);
                    lp.add_constraint(&[(f[i], -1.0), (f[j], 1.0), (l, -d)][..], ComparisonOp::Le, 0.0);
                }
            }
        }
    }
    let sol = lp.solve().map_err(|e| Error::Lp(e.to_string()))?;
    Ok(sol.objective().max(0.0))
}
