//! Finite weighted point clouds standing in for densities e^{4u}dV.
//!
//! A cloud may carry a smooth part exp(4g + shift) with g given by basis
//! coefficients. Its node samples are the leading entries of the cloud, and it
//! can be evaluated anywhere, which lets ball masses below the node spacing be
//! resolved.

use std::sync::Arc;

use crate::geometry::{ModelManifold, PointOnM, ScalarField};

#[derive(Clone, Debug)]
pub struct SmoothPart {
    manifold: Arc<ModelManifold>,
    exponent: Vec<(usize, f64)>,
    shift: f64,
    nodes: usize,
}

impl SmoothPart {
    pub fn manifold(&self) -> &Arc<ModelManifold> {
        &self.manifold
    }

    /// Number of leading cloud entries that sample this part.
    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn is_constant(&self) -> bool {
        self.exponent.iter().all(|&(i, _)| self.manifold.basis_mode(i).is_constant())
    }

    pub fn density_at(&self, p: &PointOnM) -> f64 {
        let g: f64 = self.exponent.iter().map(|&(i, c)| c * self.manifold.eval_mode(i, p)).sum();
        (4.0 * g + self.shift).exp()
    }
}

#[derive(Clone, Debug, Default)]
pub struct WeightedCloud {
    pub points: Vec<PointOnM>,
    pub weights: Vec<f64>,
    pub smooth: Option<SmoothPart>,
}

impl WeightedCloud {
    pub fn new(points: Vec<PointOnM>, weights: Vec<f64>) -> Self {
        WeightedCloud { points, weights, smooth: None }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn normalized(mut self) -> Self {
        let t = self.total();
        for w in &mut self.weights {
            *w /= t;
        }
        if let Some(s) = &mut self.smooth {
            s.shift -= t.ln();
        }
        self
    }

    pub fn integrate(&self, f: impl Fn(&PointOnM) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// Entries not covered by the smooth part.
    pub fn atoms(&self) -> impl Iterator<Item = (&PointOnM, f64)> {
        let skip = self.smooth.as_ref().map_or(0, |s| s.nodes);
        self.points.iter().zip(self.weights.iter().copied()).skip(skip)
    }

    /// Normalized e^{4u}dV sampled at the nodes.
    pub fn from_field(u: &ScalarField) -> Self {
        let m = u.manifold();
        let mx = u.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights = u
            .values()
            .iter()
            .zip(m.weights())
            .map(|(v, w)| w * (4.0 * (v - mx)).exp())
            .collect();
        let smooth = (!m.is_conformal()).then(|| SmoothPart {
            manifold: m.clone(),
            exponent: u.coefficients().iter().copied().enumerate().filter(|(_, c)| *c != 0.0).collect(),
            shift: -4.0 * mx,
            nodes: m.node_count(),
        });
        WeightedCloud { points: m.nodes().to_vec(), weights, smooth }.normalized()
    }

    /// Node samples of e^{4g}dV for a sparse g, as the smooth part of a cloud.
    pub(crate) fn from_exponent(m: &Arc<ModelManifold>, exponent: Vec<(usize, f64)>) -> Self {
        let mut c = vec![0.0; m.basis_len()];
        for &(i, v) in &exponent {
            c[i] += v;
        }
        let g = m.synthesize(&c);
        let weights = g.iter().zip(m.weights()).map(|(v, w)| w * (4.0 * v).exp()).collect();
        let smooth = (!m.is_conformal()).then(|| SmoothPart { manifold: m.clone(), exponent, shift: 0.0, nodes: m.node_count() });
        WeightedCloud { points: m.nodes().to_vec(), weights, smooth }
    }

    /// A nonnegative node density f, used as f·dV.
    pub fn from_density(f: &ScalarField) -> Self {
        let m = f.manifold();
        let weights = f.values().iter().zip(m.weights()).map(|(v, w)| v * w).collect();
        WeightedCloud::new(m.nodes().to_vec(), weights)
    }

    /// Appends atoms; the smooth part, if any, is kept.
    pub fn append(&mut self, other: WeightedCloud) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }
}
