use proptest::prelude::*;

use zeta_audit::abel::{abel_zeta, phi, psi, QuadSpec};
use zeta_audit::audit::Verdict;
use zeta_audit::expansion::{audit_eq3, audit_eq4, ExpansionParams};
use zeta_audit::oracle::zeta_ref;
use zeta_audit::{Horizon, StripPoint};

fn light() -> QuadSpec {
    QuadSpec { n_segments: 20_000, ..QuadSpec::default() }
}

fn expansion_params() -> impl Strategy<Value = ExpansionParams> {
    (0.05f64..0.7, 0.02f64..0.12, 0.02f64..0.15, 0.5f64..8.0)
        .prop_map(|(x, g, h, tau)| ExpansionParams::new(x, Some(x + g), x + g + h, tau, None).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn psi_decreases_in_x_for_positive_tau(a in 0.01f64..0.99, b in 0.01f64..0.99, tau in 0.01f64..50.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(psi(lo, tau).unwrap() >= psi(hi, tau).unwrap());
    }

    #[test]
    fn phi_is_odd_in_tau(x in 0.05f64..0.95, tau in 0.1f64..30.0, t in prop_oneof![Just(f64::INFINITY), 0.0f64..8.0]) {
        let spec = light();
        let h = Horizon::from(t);
        let up = phi(StripPoint::new(x, tau).unwrap(), h, &spec).unwrap();
        let down = phi(StripPoint::new(x, -tau).unwrap(), h, &spec).unwrap();
        prop_assert!((up.value + down.value).abs() <= 1e-14 + 1e-12 * up.value.abs());
    }

    #[test]
    fn abel_value_is_conjugate_symmetric(x in 0.05f64..0.95, tau in 0.1f64..30.0) {
        let spec = light();
        let up = abel_zeta(StripPoint::new(x, tau).unwrap(), &spec).unwrap();
        let down = abel_zeta(StripPoint::new(x, -tau).unwrap(), &spec).unwrap();
        prop_assert!((up.value - down.value.conj()).norm() < 1e-13);
    }

    #[test]
    fn abel_matches_oracle_off_grid(x in 0.05f64..0.95, tau in 0.1f64..40.0) {
        let p = StripPoint::new(x, tau).unwrap();
        let a = abel_zeta(p, &QuadSpec::default()).unwrap();
        let o = zeta_ref(p.s(), 1e-10).unwrap();
        prop_assert!((a.value - o.value).norm() < 2e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn integration_by_parts_holds_for_random_parameters(p in expansion_params(), t in 0.0f64..4.0) {
        let recs = audit_eq3(&p, &[t], 1e-6, &light()).unwrap();
        prop_assert_eq!(recs[0].verdict, Verdict::Pass, "{:?}", recs[0]);
    }

    #[test]
    fn series_expansion_holds_for_random_parameters(p in expansion_params(), t in 0.1f64..3.0, n in 1usize..6) {
        let recs = audit_eq4(&p, t, &[n], 1e-6, &light()).unwrap();
        for r in &recs {
            prop_assert_eq!(r.verdict, Verdict::Pass, "{:?}", r);
        }
    }
}
