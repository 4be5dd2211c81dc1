use std::f64::consts::PI;

use qcurv_core::geometry::{ModelManifold, PointOnM, ScalarField};
use qcurv_core::paneitz::{gauss_bonnet_audit, q_curvature, OperatorModel, SignConvention};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_factor(m: &std::sync::Arc<ModelManifold>, rng: &mut ChaCha8Rng, amp: f64) -> ScalarField {
    let mut c = vec![0.0; m.basis_len()];
    for (i, ci) in c.iter_mut().enumerate().skip(1) {
        if m.mode_degree(i) <= 2 {
            *ci = amp * rng.gen_range(-1.0..1.0);
        }
    }
    ScalarField::from_coefficients(m, c).unwrap()
}

#[test]
fn conformal_torus_keeps_total_q() {
    let m = ModelManifold::torus(16, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let w = random_factor(&m, &mut rng, 0.01);
        let mt = m.conformal_rescale(&w).unwrap();
        let c = q_curvature(&mt).unwrap();
        assert!(c.k_p.abs() < 1e-6, "k_P = {}", c.k_p);
        assert!(gauss_bonnet_audit(&mt).unwrap().defect < 1e-6);
    }
}

#[test]
fn conformal_covariance_on_torus() {
    let m = ModelManifold::torus(16, 1.0);
    let w = ScalarField::from_fn(&m, |p| match p {
        PointOnM::Torus(x) => 0.1 * x[0].cos(),
        _ => unreachable!(),
    });
    let mt = m.conformal_rescale(&w).unwrap();
    let p0 = OperatorModel::geometric(&m, SignConvention::Covariant);
    let p1 = OperatorModel::geometric(&mt, SignConvention::Covariant);
    let u0 = ScalarField::from_fn(&m, |p| match p {
        PointOnM::Torus(x) => (x[0] + x[1]).sin() + 0.3 * (2.0 * x[2]).cos(),
        _ => unreachable!(),
    });
    let u1 = ScalarField::from_values(&mt, u0.values().to_vec()).unwrap();
    let a = p1.apply(&u1).unwrap();
    let b = p0.apply(&u0).unwrap();
    let mut err: f64 = 0.0;
    for i in 0..m.node_count() {
        err = err.max((a.values()[i] - (-4.0 * w.values()[i]).exp() * b.values()[i]).abs());
    }
    assert!(err < 1e-5, "covariance defect {err}");
    let _ = PI;
}
