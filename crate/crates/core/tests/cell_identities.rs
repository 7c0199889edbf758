use freqbc_core::boundary_layer::{cell_integrals, eval_x_eta, CellPoint};
use std::f64::consts::PI;

#[test]
fn strip_identities_at_reference_etas() {
    for eta in [0.2f64, 0.5, 1.0, 1.4] {
        let c = cell_integrals(eta, 1e-11).unwrap();
        let ls = eta.sin().ln();
        println!(
            "eta {eta}: flux err {:e}, trace err {:e}, grad err {:e} (est {:e})",
            c.flux - (PI - 2.0 * eta),
            c.trace + 2.0 * eta * ls,
            c.grad_norm.powi(2) - PI * ls.abs(),
            c.grad_error
        );
        assert!((c.flux - (PI - 2.0 * eta)).abs() < 1e-8);
        assert!((c.trace + 2.0 * eta * ls).abs() < 1e-8);
        assert!((c.grad_norm.powi(2) - PI * ls.abs()).abs() < 1e-6);
        assert!((c.grad_norm.powi(2) / ls.abs() - PI).abs() < 1e-5);
    }
}

#[test]
fn flux_limits_are_monotone() {
    let mut prev = PI;
    for eta in [1e-3f64, 0.1, 0.5, 1.0, 1.5, 1.5707] {
        let f = cell_integrals(eta, 1e-10).unwrap().flux;
        assert!(f < prev && f > 0.0);
        prev = f;
    }
    assert!(prev < 1e-3);
}

#[test]
fn dirichlet_values_exact() {
    for eta in [0.2f64, 0.5, 1.0, 1.4] {
        for i in 1..50 {
            let xi1 = -eta + 2.0 * eta * i as f64 / 50.0;
            let v = eval_x_eta(CellPoint::new(xi1 + 3.0 * PI, 0.0), eta).unwrap();
            assert!((v - eta.sin().ln()).abs() <= 1e-12);
        }
    }
}
