//! Cross-module invariants under randomized inputs.

use hsk_core::cohomology::{self, ring_eval};
use hsk_core::elliptic::EllipticFunction;
use hsk_core::flat::{self, FlatModelOperator, PlaneField};
use hsk_core::higgs::HiggsField;
use hsk_core::hitchin;
use hsk_core::lattice::Lattice;
use hsk_core::linalg::CMat;
use hsk_core::C64;
use proptest::prelude::*;

fn tau_strategy() -> impl Strategy<Value = C64> {
    (-0.5f64..0.5, 0.8f64..2.0).prop_map(|(re, im)| C64::new(re, im))
}

fn point_strategy() -> impl Strategy<Value = C64> {
    (0.05f64..0.45, 0.05f64..0.45).prop_map(|(a, b)| C64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weierstrass_differential_equation(tau in tau_strategy(), a in 0.1f64..0.9, b in 0.1f64..0.9) {
        let lat = Lattice::new(tau).unwrap();
        let u = a + b * tau;
        let p = lat.wp(u).unwrap();
        let dp = lat.wp_prime(u).unwrap();
        let lhs = dp * dp;
        let rhs = 4.0 * p * p * p - lat.g2 * p - lat.g3;
        prop_assert!((lhs - rhs).norm() < 1e-8 * (1.0 + lhs.norm()));
    }

    #[test]
    fn weierstrass_periodic_and_even(tau in tau_strategy(), a in 0.1f64..0.9, b in 0.1f64..0.9) {
        let lat = Lattice::new(tau).unwrap();
        let u = a + b * tau;
        let p = lat.wp(u).unwrap();
        for v in [u + 1.0, u + tau, -u, -u + 2.0 * tau - 1.0] {
            prop_assert!((lat.wp(v).unwrap() - p).norm() < 1e-9 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn zeta_difference_zero_count(tau in tau_strategy(), a in point_strategy(), b in point_strategy()) {
        let lat = Lattice::new(tau).unwrap();
        let (a, b) = (a * tau, -b);
        prop_assume!(lat.torus_distance(a, b) > 0.1);
        let f = EllipticFunction::zeta_difference(lat, a, b, C64::new(0.3, -0.2)).unwrap();
        // two simple poles, so two zeros
        prop_assert_eq!(f.zero_count(None).unwrap(), 2);
    }

    #[test]
    fn random_field_is_even_and_reproducible(seed in 0u64..1000, k in 1usize..4, xi0 in point_strategy()) {
        let lat = Lattice::new(C64::new(0.1, 1.2)).unwrap();
        let a = HiggsField::random(k, lat, xi0, C64::new(0.8, 0.1), seed).unwrap();
        let b = HiggsField::random(k, lat, xi0, C64::new(0.8, 0.1), seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.check_even(12, 1e-8).unwrap());
    }

    #[test]
    fn ring_sum_distributes(k in 1i64..10, l in -5i64..5) {
        let lhs = cohomology::ch_v(k).add(&cohomology::ch_v(l));
        let rhs = ring_eval(&format!("{} - 4 that", k + l)).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(cohomology::degree_of_v(k), cohomology::degree_of_v(l));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn flat_solve_is_linear(a in -1.0f64..1.0, b in -1.0f64..1.0, x in 0.5f64..3.0, y in 0.5f64..3.0) {
        let op = FlatModelOperator::with_grid([x, y], 1, 8.0, 48).unwrap();
        let n0 = op.spectrum[0].1;
        let n1 = op.spectrum[1].1;
        let r1 = PlaneField::bump(&op, [0.5, -0.3], 1.0, &[(n0, C64::new(1.0, 0.0))]);
        let r2 = PlaneField::bump(&op, [-0.7, 0.2], 1.2, &[(n0, C64::new(0.0, 1.0)), (n1, C64::new(0.5, 0.0))]);
        let (ca, cb) = (C64::new(a, 0.0), C64::new(0.0, b));
        let lhs = flat::solve_flat(&op, &r1.lin_comb(ca, &r2, cb)).unwrap();
        let rhs = flat::solve_flat(&op, &r1).unwrap().lin_comb(ca, &flat::solve_flat(&op, &r2).unwrap(), cb);
        let diff = lhs.lin_comb(C64::new(1.0, 0.0), &rhs, C64::new(-1.0, 0.0));
        prop_assert!(diff.norm2() <= 1e-12 * (1.0 + rhs.norm2()));
    }

    #[test]
    fn hitchin_residual_gauge_invariant(theta in 0.0f64..6.0, phase in 0.0f64..6.0) {
        let z = C64::new(0.0, 0.0);
        let diag = |a: C64, b: C64| CMat { n: 2, data: vec![a, z, z, b] };
        let cfg = hitchin::biquard_model(&diag(C64::new(0.3, 0.2), C64::new(-0.1, 0.5)), &diag(C64::new(1.0, -0.5), C64::new(-0.7, 0.2)), 0.1, 0.5, 96).unwrap();
        let (c, s) = (theta.cos(), theta.sin());
        let e = C64::from_polar(1.0, phase);
        let u = CMat { n: 2, data: vec![C64::new(c, 0.0), -s * e, s * e.conj(), C64::new(c, 0.0)] };
        let r0 = hitchin::residual(&cfg).unwrap();
        let r1 = hitchin::residual(&cfg.conjugate(&u)).unwrap();
        prop_assert!(r1.passes(1e-9));
        prop_assert!((r1.scale - r0.scale).abs() < 1e-9 * r0.scale);
    }
}
