use cohesive_core::experiments::{
    figure_data, fractured_sweep, prefractured_limits, prefractured_sweep, FigureKind, FigureParams, Regime,
    SweepConfig, SweepResult,
};
use cohesive_core::law::{make_prototype_q, LawSpec};
use cohesive_core::CohesiveLaw;

fn q1() -> LawSpec {
    LawSpec::PrototypeQ { sigma_c: 1.0, q: 1.0 }
}

fn short_sweep() -> SweepConfig {
    let mut cfg = SweepConfig::new(q1(), Regime::Prefractured { c0: 0.3 });
    cfg.eps_list = vec![1e-2, 3e-3, 1e-3];
    cfg
}

#[test]
fn sweep_csv_is_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_sweep();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    prefractured_sweep(&cfg).unwrap().write_csv(&a).unwrap();
    prefractured_sweep(&cfg).unwrap().write_csv(&b).unwrap();
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("eps,m_eps,a_eps,d_eps,energy,jump,crit_residual,energy_gap"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn rows_are_ordered_by_eps() {
    let r: SweepResult = prefractured_sweep(&short_sweep()).unwrap();
    let eps: Vec<f64> = r.rows.iter().map(|row| row.eps).collect();
    assert_eq!(eps, vec![1e-2, 3e-3, 1e-3]);
    assert!(r.rows.iter().all(|row| row.ok()));
}

#[test]
fn jump_closes_at_eps_1e3() {
    let r = prefractured_sweep(&short_sweep()).unwrap();
    let c = r.check("jump closure eps=1e-3").unwrap();
    assert!(c.passed, "{c:?}");
    // s(m*) with (1 - m*) f(m*) = 0.6 is s(0.6) for q = 1.
    let coh = CohesiveLaw::new(&make_prototype_q(1.0, 1.0).unwrap()).unwrap();
    let lim = prefractured_limits(&coh, 0.3, 1.0).unwrap();
    assert!((lim.m - 0.6).abs() < 1e-14);
    let r6 = (1.0 - 0.36_f64).sqrt();
    let s6 = 2.0 * (r6 / 0.6).atan() - 1.2 * ((1.0 + r6) / 0.6).ln();
    assert!((lim.jump - s6).abs() < 1e-12);
}

#[test]
fn summary_json_has_trend_verdicts() {
    let r = prefractured_sweep(&short_sweep()).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    let trends = v["trends"].as_array().unwrap();
    assert!(!trends.is_empty());
    assert!(trends.iter().all(|t| t["passed"].is_boolean()));
}

#[test]
fn fractured_sweep_runs_with_custom_exponent() {
    let mut cfg = SweepConfig::new(q1(), Regime::Fractured { c_exponent: 0.4 });
    cfg.eps_list = vec![1e-2, 1e-3];
    let r = fractured_sweep(&cfg).unwrap();
    assert!(r.rows.iter().all(|row| row.ok()));
    assert_eq!(r.limits.a, std::f64::consts::PI);
    let c: Vec<f64> = r.rows.iter().map(|row| row.c).collect();
    assert_eq!(c, vec![1e-2_f64.powf(0.4), 1e-3_f64.powf(0.4)]);
}

#[test]
fn figure_data_writes_every_kind() {
    let dir = tempfile::tempdir().unwrap();
    let law = make_prototype_q(1.0, 1.0).unwrap();
    let params = FigureParams {
        eps_pair: 1e-2,
        ..FigureParams::default()
    };
    for kind in FigureKind::ALL {
        let files = figure_data(kind, &law, &params, dir.path()).unwrap();
        assert!(!files.is_empty());
        for f in files {
            let text = std::fs::read_to_string(&f).unwrap();
            assert!(text.lines().count() > 1, "{} is empty", f.display());
        }
    }
    let portrait = std::fs::read_to_string(dir.path().join("ode_portrait.csv")).unwrap();
    for case in ["below", "at", "above"] {
        assert!(portrait.lines().any(|l| l.starts_with(case)), "missing {case}");
    }
    let g = std::fs::read_to_string(dir.path().join("law_g_of_s.csv")).unwrap();
    let last_at_frac = g
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .any(|r| r[0] == std::f64::consts::PI && r[1] == 1.0);
    assert!(last_at_frac, "g(s_frac) = 1 row missing");
}
