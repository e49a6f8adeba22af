mod common;

use heightcount::densities::tau_archimedean;
use heightcount::lattice::rational::to_f64;
use heightcount::toric::{anticanonical_pl, resolve_fan_2d, Fan};

#[test]
fn cubic_archimedean_density_by_quadrature() {
    let fan = resolve_fan_2d(&Fan::cubic_xyz_u3().unwrap()).unwrap();
    let phi = anticanonical_pl(&fan).unwrap();
    let exact = to_f64(&tau_archimedean(&fan, &phi).unwrap());
    let (mc, se) = common::monte_carlo_tau_inf(&phi, 10_000_000, 0.25, 11);
    assert!((mc - exact).abs() / exact < 0.01, "mc {mc} ± {se} vs {exact}");
}

#[test]
fn small_models_by_quadrature() {
    for fan in [
        Fan::projective_space(1).unwrap(),
        Fan::projective_space(2).unwrap(),
        Fan::hirzebruch(1).unwrap(),
    ] {
        let phi = anticanonical_pl(&fan).unwrap();
        let exact = to_f64(&tau_archimedean(&fan, &phi).unwrap());
        let (mc, se) = common::monte_carlo_tau_inf(&phi, 1_000_000, 0.25, 3);
        assert!((mc - exact).abs() < 5.0 * se + 1e-9, "{mc} ± {se} vs {exact}");
    }
}
