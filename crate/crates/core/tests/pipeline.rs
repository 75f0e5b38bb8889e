use std::f64::consts::PI;

use cornerq::conformal::TransformSpec;
use cornerq::verify::{verify_field, CheckTolerances};
use cornerq::{
    build_solution, gauss_bonnet, residual_report, BoundaryData, Config, Error, GbConfig, Point4, ResidualConfig,
    Solution,
};

fn solution(psi: &str, phi_n: &str) -> Solution {
    build_solution(&BoundaryData::from_expressions(psi, phi_n).unwrap(), 512).unwrap()
}

#[test]
fn built_solution_satisfies_its_data() {
    let s = solution("pi/4*cos(phi)+0.3*cos(2*phi)^2", "-pi/4+0.6/(1+r^2)");
    let c = s.checks.as_ref().unwrap();
    assert!(c.mu_m_residual < 1e-8, "{c:?}");
    assert!(c.mu_n_residual < 1e-8, "{c:?}");
    assert!(c.sigma_value.abs() < 1e-10);
    let w = s.field().unwrap();
    let r = residual_report(&w, &ResidualConfig::default()).unwrap();
    assert!(r.pass, "{:?}", r.conditions);
}

#[test]
fn constraint_violations_are_reported() {
    let data = BoundaryData::from_expressions("pi/4*cos(phi)", "-pi/4+r").unwrap();
    match build_solution(&data, 64) {
        // −φ_N′(1) − φ_N(1) = −1 − (1 − π/4)
        Err(Error::Constraint { measured, .. }) => assert!((measured - (PI / 4.0 - 2.0)).abs() < 1e-8),
        other => panic!("expected a constraint error, got {other:?}"),
    }
}

#[test]
fn json_round_trip_preserves_the_field() {
    let s = solution("pi/4*cos(phi)+1", "-pi/4+0.6/(1+r^2)").with_transform(TransformSpec::Lambda);
    let back = Solution::from_json(&s.to_json().unwrap()).unwrap();
    assert_eq!(back, s);
    let (a, b) = (s.field().unwrap(), back.field().unwrap());
    for p in [Point4::zonal(0.3, 0.4), Point4::from_spherical(0.8, 1.2, 0.5, 2.0)] {
        assert_eq!(a.value(&p), b.value(&p));
    }
}

#[test]
fn inverted_solution_passes_every_check() {
    let s = solution("pi/4*cos(phi)", "-pi/4").with_transform(TransformSpec::Lambda);
    let r = verify_field(&s.field().unwrap(), &ResidualConfig::default(), &GbConfig::default(), &CheckTolerances::default())
        .unwrap();
    assert!(r.pass, "{:?} {:?}", r.residuals.conditions, r.gauss_bonnet);
    assert!(r.corner_applicable);
}

#[test]
fn zero_stub_fails_on_the_round_face() {
    let w = Solution::zero().field().unwrap();
    let r = residual_report(&w, &ResidualConfig::default()).unwrap();
    assert!(!r.pass);
    assert!((r.condition("P3M").unwrap().sup - 2.0).abs() < 1e-12);
    // the flat metric has corner term 2π², not 4π²
    let g = gauss_bonnet(&w, &GbConfig::default()).unwrap();
    assert!((g.corner - 2.0 * PI * PI).abs() < 1e-10);
    assert!((g.total - 4.0 * PI * PI).abs() < 1e-10);
}

#[test]
fn residual_csv_is_deterministic() {
    let w = solution("pi/4*cos(phi)", "-pi/4").field().unwrap();
    let a = residual_report(&w, &ResidualConfig::default()).unwrap().to_csv();
    let b = residual_report(&w, &ResidualConfig::default()).unwrap().to_csv();
    assert_eq!(a, b);
    assert!(a.starts_with("region,rho,phi,alpha,theta,condition,residual\n"));
}

#[test]
fn config_controls_the_residual_grid() {
    let c = Config::from_json(r#"{"residual": {"m_count": 3, "n_count": 4, "x_count": [2, 2]}}"#).unwrap();
    let w = solution("pi/4*cos(phi)", "-pi/4").field().unwrap();
    let r = residual_report(&w, &c.residual).unwrap();
    assert_eq!(r.condition("P3M").unwrap().nodes, 3);
    assert_eq!(r.condition("P3N").unwrap().nodes, 4);
    assert_eq!(r.condition("P4").unwrap().nodes, 4);
}
