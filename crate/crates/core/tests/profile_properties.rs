use cohesive_core::law::{make_prototype_p, make_prototype_q};
use cohesive_core::profile::{self, Classification, OdeParams, TIE_TOL};
use cohesive_core::MaterialLaw;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x0de0),
        failure_persistence: None,
        ..Config::default()
    }
}

fn arb_law() -> impl Strategy<Value = MaterialLaw> {
    prop_oneof![
        (0.1..=2.0_f64).prop_map(|q| make_prototype_q(1.0, q).unwrap()),
        (-0.9..1.9_f64).prop_map(|p| make_prototype_p(1.0, p).unwrap()),
    ]
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn classification_matches_stress_sign(law in arb_law(), alpha in 0.01..0.49_f64, m in 0.01..0.99_f64) {
        let delta = law.stress(m) - 2.0 * alpha;
        let expected = if delta.abs() < TIE_TOL {
            Classification::Heteroclinic
        } else if delta < 0.0 {
            Classification::ReachesOne
        } else {
            Classification::Periodic
        };
        prop_assert_eq!(profile::classify(&OdeParams { law, alpha, m }), expected);
    }

    #[test]
    fn first_integral_is_conserved(law in arb_law(), alpha in 0.02..0.48_f64, m in 0.02..0.98_f64) {
        let tol = 1e-10;
        let p = OdeParams { law, alpha, m };
        let sol = profile::solve_ivp(&p, 20.0, tol).unwrap();
        let scale = sol.first_integral_scale();
        let r = sol.first_integral_residual();
        prop_assert!(r <= f64::max(1e-8, 10.0 * tol) * scale, "drift {r} (scale {scale})");
    }

    #[test]
    fn z_alpha_is_increasing_and_supercritical(law in arb_law(), a1 in 0.02..0.47_f64, da in 0.001..0.02_f64) {
        let a2 = a1 + da;
        let z1 = profile::z_alpha(&law, a1).unwrap();
        let z2 = profile::z_alpha(&law, a2).unwrap();
        prop_assert!(z2 > z1);
        prop_assert!(law.stress(z1) > 2.0 * a1);
        prop_assert!(law.stress(z2) > 2.0 * a2);
    }

    #[test]
    fn time_of_flight_respects_lower_bound(alpha in 0.05..0.45_f64, mr in 0.05..0.95_f64, er in 0.05..0.999_f64) {
        let law = make_prototype_q(1.0, 1.0).unwrap();
        // ReachesOne needs m < 2 alpha for q = 1.
        let m = mr * 2.0 * alpha;
        let p = OdeParams { law: law.clone(), alpha, m };
        let z = profile::z_alpha(&law, alpha).unwrap();
        let lo = m.max(z);
        let eta = lo + er * (1.0 - lo);
        let t = profile::time_of_flight(&p, eta).unwrap();
        prop_assert!(t >= profile::time_lower_bound(&p, eta).unwrap());
    }
}

#[test]
fn time_of_flight_obeys_inverse_sqrt_bound() {
    // C is fitted at eta = 0.9 and must bound t_eta sqrt(1 - eta) closer to 1.
    let law = make_prototype_q(1.0, 1.0).unwrap();
    for (alpha, m) in [(0.2, 0.1), (0.3, 0.5), (0.45, 0.02)] {
        let p = OdeParams { law: law.clone(), alpha, m };
        let scaled = |eta: f64| profile::time_of_flight(&p, eta).unwrap() * (1.0 - eta).sqrt();
        let c = scaled(0.9);
        for k in 2..=10 {
            let eta = 1.0 - 10f64.powi(-k);
            assert!(scaled(eta) <= c, "alpha = {alpha}, m = {m}, eta = {eta}");
        }
    }
}
