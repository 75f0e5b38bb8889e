use std::f64::consts::PI;

use cornerq::conformal::{act, ConfElement};
use cornerq::construct::{solve_fullball, Parity, ZonalData};
use cornerq::verify::{linearized_gauss_bonnet, GbConfig};
use cornerq::{Field, Monomial, Point4, Tail, ZonalSeries};
use proptest::prelude::*;

fn monomial() -> impl Strategy<Value = Monomial> {
    (0u32..10, 0u32..3, -1.0f64..1.0).prop_map(|(k, m, c)| Monomial { k, n: k + 2 * m, c })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_operator_integrals_balance(monos in proptest::collection::vec(monomial(), 1..8)) {
        let s = ZonalSeries::new(monos, Tail::Finite).unwrap();
        let d = linearized_gauss_bonnet(&Field::series(s), &GbConfig::default()).unwrap();
        prop_assert!(d.abs() < 1e-9, "defect {}", d);
    }

    #[test]
    fn solver_matches_data(odd in any::<bool>(), coeffs in proptest::collection::vec(-1.0f64..1.0, 1..10), phi in 0.0f64..PI) {
        let d = ZonalData { parity: if odd { Parity::Odd } else { Parity::Even }, coeffs };
        let u = solve_fullball(&d);
        prop_assert_eq!(u.value(1.0, phi), 0.0);
        prop_assert!((u.mu_m(phi) - d.eval(phi)).abs() < 1e-12);
        prop_assert!(u.laplacian().laplacian().is_zero());
    }

    #[test]
    fn acting_with_a_boost_and_its_inverse_is_trivial(
        axis in 0usize..3, s in -1.5f64..1.5, rho in 0.0f64..0.95, phi in 0.0f64..1.5, theta in 0.0f64..6.0,
    ) {
        let base = Field::series(
            ZonalSeries::new(vec![Monomial { k: 1, n: 3, c: 0.4 }, Monomial { k: 2, n: 2, c: -0.2 }], Tail::Finite).unwrap(),
        );
        let e = ConfElement::boost(axis, s).unwrap();
        let back = act(&e.inverse(), &act(&e, &base));
        let p = Point4::from_spherical(rho, phi, 0.7, theta);
        prop_assert!((back.value(&p) - base.value(&p)).abs() < 1e-11);
    }
}
