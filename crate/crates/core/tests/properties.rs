mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use hbcert::deformation::{
    build_lower_bound, certify_adequate, m_bound_cota, m_bound_search, m_oracle_quadrature, periodic_solution_kernel, psi,
};
use hbcert::rationalize::{convergents_are_valid, expand};
use hbcert::trigpoly::ratio_to_f64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mul_commutes(f in common::trig_poly(4), g in common::trig_poly(4)) {
        prop_assert_eq!(&f * &g, &g * &f);
    }

    #[test]
    fn mul_degree_adds(f in common::trig_poly(4), g in common::trig_poly(4)) {
        let p = &f * &g;
        if !f.is_zero() && !g.is_zero() {
            prop_assert!(p.degree() <= f.degree() + g.degree());
        }
    }

    #[test]
    fn derivative_has_zero_mean(f in common::trig_poly(5)) {
        prop_assert!(f.differentiate().mean() == num_rational::BigRational::from_integer(0.into()));
    }

    #[test]
    fn l2_norm_below_sup_bound(f in common::trig_poly(5)) {
        let l2 = ratio_to_f64(&f.l2_norm_sq()).sqrt();
        prop_assert!(l2 <= f.sup_norm_bound() * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn range_bounds_enclose_samples(f in common::trig_poly(5), ts in prop::collection::vec(0.0..2.0 * PI, 200)) {
        let (lo, hi) = f.range_bounds(64);
        let ff = f.to_f64();
        for t in ts {
            let v = ff.eval(t);
            prop_assert!(lo <= v && v <= hi, "{} outside [{}, {}]", v, lo, hi);
        }
    }

    #[test]
    fn secular_endpoint(f in common::trig_poly(4)) {
        let a = f.antiderivative();
        prop_assert!((a.eval(2.0 * PI) - a.at_two_pi()).abs() <= 1e-9 * (1.0 + a.at_two_pi().abs()));
        prop_assert!(a.eval(0.0).abs() <= 1e-12);
    }

    #[test]
    fn convergents_alternate_around_value(x in -5.0f64..5.0) {
        prop_assert!(convergents_are_valid(&expand(x, 30)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn kernel_respects_cota_bound(a in common::secular(), b in common::forcing()) {
        let x = periodic_solution_kernel(&a, &b, 2048).unwrap();
        let m = m_bound_search(&a).unwrap().m_bound;
        prop_assert!(x.sup_norm() <= m * b.l2_norm_sq().sqrt() + 1e-6);
        prop_assert!((x.x[0] - x.x[2048]).abs() <= 1e-8);
    }

    #[test]
    fn cota_dominates_oracle(a in common::secular()) {
        let cota = m_bound_search(&a).unwrap().m_bound;
        let oracle = m_oracle_quadrature(&a, 16384).unwrap().m_bound;
        prop_assert!(cota >= oracle, "cota {} < oracle {}", cota, oracle);
    }

    #[test]
    fn psi_positive_on_adequate_bounds(a in common::secular(), t in 0.0..2.0 * PI) {
        let mut l = build_lower_bound(&a, 64, 1.0 / 64.0).unwrap();
        prop_assume!(certify_adequate(&mut l, &a));
        let lambda = (-a.at_two_pi()).exp();
        prop_assert!(psi(&l, lambda, l.piece_of(t), t) > 0.0);
    }

    #[test]
    fn refinement_does_not_worsen_m(a in common::secular()) {
        let mut coarse = build_lower_bound(&a, 16, 1.0 / 32.0).unwrap();
        let mut fine = build_lower_bound(&a, 32, 1.0 / 64.0).unwrap();
        prop_assume!(certify_adequate(&mut coarse, &a) && certify_adequate(&mut fine, &a));
        let m_coarse = m_bound_cota(&a, &mut coarse).unwrap().m_bound;
        let m_fine = m_bound_cota(&a, &mut fine).unwrap().m_bound;
        prop_assert!(m_fine <= m_coarse + 1e-9 * m_coarse.max(1.0), "{} > {}", m_fine, m_coarse);
    }
}
