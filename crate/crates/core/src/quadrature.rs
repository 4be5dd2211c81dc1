//! One-dimensional Gauss rules used by the sphere grid and the local
//! polar rules around bubble centers.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::gamma;

/// Nodes and weights of the n-point Gauss rule for the weight (1 − t²)^(α − ½) on [−1, 1].
///
/// Golub–Welsch on the Jacobi matrix of the monic Gegenbauer recurrence.
pub fn gauss_gegenbauer(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > 0.0);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = (kf * (kf + 2.0 * alpha - 1.0) / (4.0 * (kf + alpha) * (kf + alpha - 1.0))).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let mu0 = gegenbauer_weight_mass(alpha);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // symmetrize: the rule is exactly symmetric, the eigensolver only nearly so
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let j = n - 1 - i;
        nodes[i] = 0.5 * (pairs[i].0 - pairs[j].0);
        weights[i] = 0.5 * (pairs[i].1 + pairs[j].1);
    }
    // refine nodes by Newton on the Gegenbauer polynomial, weights from the derivative
    for i in 0..n {
        let mut t = nodes[i];
        for _ in 0..3 {
            let (p, dp) = gegenbauer_with_derivative(n, alpha, t);
            if dp == 0.0 {
                break;
            }
            t -= p / dp;
        }
        nodes[i] = t;
    }
    for i in 0..n {
        let j = n - 1 - i;
        if i < j {
            let t = 0.5 * (nodes[i] - nodes[j]);
            nodes[i] = t;
            nodes[j] = -t;
        } else if i == j {
            nodes[i] = 0.0;
        }
    }
    (nodes, weights)
}

/// ∫_{−1}^{1} (1 − t²)^(α − ½) dt.
pub fn gegenbauer_weight_mass(alpha: f64) -> f64 {
    let a = alpha + 0.5;
    (std::f64::consts::PI).sqrt() * gamma(a) / gamma(a + 0.5)
}

/// Values C_0^α(t) … C_n^α(t) of the Gegenbauer polynomials.
pub fn gegenbauer_all(n: usize, alpha: f64, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(2.0 * alpha * t);
    for k in 2..=n {
        let kf = k as f64;
        let c = (2.0 * t * (kf + alpha - 1.0) * out[k - 1] - (kf + 2.0 * alpha - 2.0) * out[k - 2]) / kf;
        out.push(c);
    }
}

fn gegenbauer_with_derivative(n: usize, alpha: f64, t: f64) -> (f64, f64) {
    let mut v = Vec::with_capacity(n + 1);
    gegenbauer_all(n, alpha, t, &mut v);
    // d/dt C_n^α = 2α C_{n−1}^{α+1}
    let mut w = Vec::with_capacity(n);
    gegenbauer_all(n - 1, alpha + 1.0, t, &mut w);
    (v[n], 2.0 * alpha * w[n - 1])
}

/// n-point Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_gegenbauer(n, 0.5);
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    (x.iter().map(|t| m + h * t).collect(), w.iter().map(|v| v * h).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weight_masses() {
        assert!((gegenbauer_weight_mass(0.5) - 2.0).abs() < 1e-13);
        assert!((gegenbauer_weight_mass(1.0) - PI / 2.0).abs() < 1e-13);
        assert!((gegenbauer_weight_mass(1.5) - 4.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre_on(6, 0.0, 2.0);
        // ∫_0^2 t^11 = 2^12/12
        let s: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(11)).sum();
        assert!((s - 4096.0 / 12.0).abs() < 1e-10);
    }

    #[test]
    fn gegenbauer_rule_exactness() {
        for &alpha in &[0.5, 1.0, 1.5, 4.5] {
            let n = 9;
            let (x, w) = gauss_gegenbauer(n, alpha);
            let s: f64 = w.iter().sum();
            assert!((s - gegenbauer_weight_mass(alpha)).abs() < 1e-13);
            // orthogonality of C_3 and C_5 under the weight
            let mut v = Vec::new();
            let o: f64 = x
                .iter()
                .zip(&w)
                .map(|(&t, &wi)| {
                    gegenbauer_all(5, alpha, t, &mut v);
                    wi * v[3] * v[5]
                })
                .sum();
            assert!(o.abs() < 1e-12, "alpha {alpha}: {o}");
        }
    }

    #[test]
    fn nodes_are_roots() {
        let (x, _) = gauss_gegenbauer(12, 1.5);
        for t in x {
            let (p, _) = gegenbauer_with_derivative(12, 1.5, t);
            assert!(p.abs() < 1e-9);
        }
    }
}
