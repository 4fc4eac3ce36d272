use cohesive_core::law::{make_prototype_p, make_prototype_q, validate_assumptions};
use cohesive_core::{MaterialLaw, RegularizedLaw};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x1a57),
        failure_persistence: None,
        ..Config::default()
    }
}

fn arb_law() -> impl Strategy<Value = MaterialLaw> {
    prop_oneof![
        (0.2..5.0_f64, 0.1..=2.0_f64).prop_map(|(s, q)| make_prototype_q(s, q).unwrap()),
        (0.2..5.0_f64, -0.95..1.95_f64).prop_map(|(s, r)| make_prototype_p(s, r * s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn junction_is_c1(law in arb_law(), log_eps in -8.0..-1.0_f64) {
        let reg = RegularizedLaw::new(&law, 10f64.powf(log_eps));
        prop_assume!(reg.is_ok());
        let reg = reg.unwrap();
        let (dv, dd) = reg.junction_mismatch();
        prop_assert!(dv <= 1e-12, "value mismatch {dv}");
        prop_assert!(dd <= 1e-12, "slope mismatch {dd}");
    }

    #[test]
    fn regularized_law_is_monotone(law in arb_law(), log_eps in -6.0..-1.0_f64) {
        let reg = RegularizedLaw::new(&law, 10f64.powf(log_eps));
        prop_assume!(reg.is_ok());
        let reg = reg.unwrap();
        let mut prev = reg.eval(0.0);
        for k in 1..=10_000 {
            let v = reg.eval(k as f64 / 10_000.0);
            prop_assert!(v >= prev, "decrease at s = {}", k as f64 / 10_000.0);
            prev = v;
        }
        prop_assert_eq!(reg.eval(1.0), 1.0);
    }

    #[test]
    fn stress_stays_below_sigma_c(law in arb_law()) {
        let sig = law.sigma_c();
        for k in 0..10_000 {
            let s = k as f64 / 10_000.0;
            prop_assert!(law.stress(s) <= sig * (1.0 + 1e-14), "stress {} at {s}", law.stress(s));
        }
    }
}

#[test]
fn validator_accepts_prototypes() {
    for q in [0.25, 0.5, 1.0, 1.5, 2.0] {
        let r = validate_assumptions(&make_prototype_q(1.0, q).unwrap(), 2000);
        assert!(r.failed().is_empty(), "q = {q}: {:?}", r.failed());
    }
    for p in [-0.9, -0.3, 0.0, 0.5, 1.5, 1.9] {
        let r = validate_assumptions(&make_prototype_p(1.0, p).unwrap(), 2000);
        assert!(r.failed().is_empty(), "p = {p}: {:?}", r.failed());
    }
}

#[test]
fn validator_rejects_only_f6_above_q2() {
    for q in [2.5, 3.0, 3.5] {
        let r = validate_assumptions(&make_prototype_q(1.0, q).unwrap(), 2000);
        assert_eq!(r.failed(), vec!["f6"], "q = {q}");
    }
}
