use cohesive_core::critical::{elastic_pair, CriticalError, SamplingSpec};
use cohesive_core::law::{make_prototype_p, make_prototype_q};
use cohesive_core::{MaterialLaw, RegularizedLaw, ShootingProblem};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x0c71),
        failure_persistence: None,
        ..Config::default()
    }
}

fn arb_law() -> impl Strategy<Value = MaterialLaw> {
    prop_oneof![
        (0.5..=2.0_f64).prop_map(|q| make_prototype_q(1.0, q).unwrap()),
        (0.0..1.5_f64).prop_map(|p| make_prototype_p(1.0, p).unwrap()),
    ]
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn built_pairs_satisfy_invariants(
        law in arb_law(),
        log_eps in -4.0..-2.0_f64,
        c in 0.05..0.45_f64,
        length in 0.5..2.0_f64,
    ) {
        let eps = 10f64.powf(log_eps);
        let reg = RegularizedLaw::new(&law, eps).unwrap();
        // Pairs exist only once eps is small enough for the given c.
        let problem = ShootingProblem::new(reg, c, length);
        prop_assume!(!matches!(problem, Err(CriticalError::BadParameters(_))));
        let problem = problem.unwrap();
        let shot = problem.shoot(1e-10);
        prop_assume!(!matches!(shot, Err(CriticalError::NoRoot { .. })));
        let root = shot.unwrap().root();
        let pair = problem.build_pair(root.lambda, &SamplingSpec::default()).unwrap();
        let r = pair.residuals;
        prop_assert!(r.min_v > 0.0 && r.max_v <= 1.0, "v range [{}, {}]", r.min_v, r.max_v);
        prop_assert!(pair.samples.windows(2).all(|w| w[1].u >= w[0].u), "u not monotone");
        prop_assert!(r.energy_identity <= 1e-8, "energy identity {}", r.energy_identity);
        prop_assert!(pair.d_eps < 0.0);
        prop_assert!(r.first_integral <= 1e-6, "first integral {}", r.first_integral);
        prop_assert!(r.weak_euler_lagrange <= 1e-5, "weak EL {}", r.weak_euler_lagrange);
        prop_assert!(r.sampling <= 1e-9, "sampled half-width mismatch {}", r.sampling);
        prop_assert!(pair.symmetry_defect() <= 1e-12);
        prop_assert!((pair.samples.last().unwrap().x - length).abs() <= 1e-9 * length);
        prop_assert!(pair.energy >= c * pair.a_eps * (1.0 - 1e-10));
    }
}

#[test]
fn d_eps_approaches_minus_c_squared() {
    let law = make_prototype_q(1.0, 1.0).unwrap();
    let c = 0.3;
    let excess: Vec<f64> = [1e-2, 1e-3]
        .iter()
        .map(|&eps| {
            let reg = RegularizedLaw::new(&law, eps).unwrap();
            let problem = ShootingProblem::new(reg, c, 1.0).unwrap();
            let root = problem.shoot(1e-10).unwrap().root();
            let pair = problem.build_pair(root.lambda, &SamplingSpec::default()).unwrap();
            assert!(pair.d_eps < 0.0 && pair.d_eps > -c * c - 1e-12);
            // ln |d + c^2| = ln(gamma) - ln(eps).
            root.lambda - eps.ln()
        })
        .collect();
    assert!(excess[1] < excess[0] - 10.0, "{excess:?}");
}

#[test]
fn elastic_pair_is_trivial() {
    let law = make_prototype_q(1.0, 1.0).unwrap();
    let reg = RegularizedLaw::new(&law, 1e-3).unwrap();
    let pair = elastic_pair(0.7, 2.0, &reg).unwrap();
    assert!(pair.samples.iter().all(|s| s.v == 1.0));
    assert_eq!(pair.energy, 0.35 * 0.35 * 2.0);
    assert_eq!(pair.d_eps, -0.35 * 0.35);
}
