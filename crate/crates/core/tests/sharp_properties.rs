use std::sync::OnceLock;

use cohesive_core::law::{make_prototype_p, make_prototype_q};
use cohesive_core::sharp::{elastic_state, energy_phi, enumerate_critical_points, phi, CriticalKind};
use cohesive_core::CohesiveLaw;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x05a2),
        failure_persistence: None,
        ..Config::default()
    }
}

fn laws() -> &'static [CohesiveLaw] {
    static LAWS: OnceLock<Vec<CohesiveLaw>> = OnceLock::new();
    LAWS.get_or_init(|| {
        vec![
            CohesiveLaw::new(&make_prototype_q(1.0, 1.0).unwrap()).unwrap(),
            CohesiveLaw::new(&make_prototype_q(1.0, 2.0).unwrap()).unwrap(),
            CohesiveLaw::new(&make_prototype_p(1.0, 0.5).unwrap()).unwrap(),
        ]
    })
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn prefractured_points_are_critical(i in 0..3usize, a in 0.05..4.0_f64, length in 0.5..3.0_f64, k_max in 1..4usize) {
        let coh = &laws()[i];
        let sig_c = coh.law().sigma_c();
        for p in enumerate_critical_points(coh, a, length, k_max).unwrap() {
            prop_assert!(p.sigma <= sig_c);
            prop_assert!(p.u.balance_residual().abs() <= 1e-8);
            if p.kind == CriticalKind::PreFractured {
                let s0 = p.s0.unwrap();
                prop_assert!((coh.g_prime(s0).unwrap() - p.sigma).abs() <= 1e-8);
                prop_assert!((0.5 * p.sigma * length + p.k as f64 * s0 - a).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn enumeration_is_stable_under_tiny_perturbations(i in 0..3usize, a in 0.05..4.0_f64, k_max in 1..4usize) {
        let coh = &laws()[i];
        let count = |a: f64| enumerate_critical_points(coh, a, 1.0, k_max).unwrap().len();
        prop_assert_eq!(count(a), count(a * (1.0 + 1e-13)));
    }

    #[test]
    fn elastic_energy_is_phi(i in 0..3usize, a in 0.01..5.0_f64, length in 0.2..4.0_f64) {
        let coh = &laws()[i];
        let e = elastic_state(coh, a, length);
        prop_assert_eq!(energy_phi(coh, &e.u).unwrap(), phi(coh.law().sigma_c(), a / length) * length);
        prop_assert_eq!(e.energy, phi(coh.law().sigma_c(), a / length) * length);
    }
}

#[test]
fn phi_is_quadratic_then_linear() {
    for xi in [0.0, 0.1, 0.25, 0.5] {
        assert_eq!(phi(1.0, xi), xi * xi);
    }
    for xi in [0.75, 1.0, 2.0] {
        assert_eq!(phi(1.0, xi), xi - 0.25);
    }
}

#[test]
fn generic_scalar_matches_f64() {
    let c32 = CohesiveLaw32::new(&make_prototype_q(1.0_f32, 1.0).unwrap()).unwrap();
    let pts = enumerate_critical_points(&c32, 0.836_256_7_f32, 1.0, 1).unwrap();
    let pre: Vec<_> = pts.iter().filter(|p| p.kind == CriticalKind::PreFractured).collect();
    assert!(pre.iter().any(|p| (p.sigma - 0.6).abs() < 1e-3), "{:?}", pre.iter().map(|p| p.sigma).collect::<Vec<_>>());
}

type CohesiveLaw32 = cohesive_core::cohesive::CohesiveLaw<f32>;
