//! Subcommand implementations.

use std::io::Write;
use std::path::Path;

use cohesive_core::cohesive::{extrapolated_s_frac, CohesiveError};
use cohesive_core::critical::{CriticalError, SamplingSpec};
use cohesive_core::experiments::{
    elastic_check, figure_data, fractured_sweep, prefractured_sweep, ExperimentError, FigureKind, Regime,
    SweepConfig, SweepResult,
};
use cohesive_core::io::{num, write_csv, write_json, write_records};
use cohesive_core::law::{validate_assumptions, Family, LawError, LawSpec, RegularizeError};
use cohesive_core::profile::{self, OdeParams, ProfileError};
use cohesive_core::sharp::{enumerate_critical_points, nucleation_classifier, CriticalKind, SharpError};
use cohesive_core::{CohesiveLaw, MaterialLaw, RegularizedLaw, ShootingProblem};
use serde_json::json;

use crate::config::{CliConfig, Command, RegimeName};
use crate::plot::{script, Panel};
use crate::{Args, CliError};

fn law_err(e: LawError) -> CliError {
    CliError::Invalid(e.to_string())
}

fn regularize_err(e: RegularizeError) -> CliError {
    CliError::Invalid(e.to_string())
}

fn profile_err(e: ProfileError) -> CliError {
    match e {
        ProfileError::AlphaOutOfRange(..)
        | ProfileError::MOutOfRange(_)
        | ProfileError::EndpointArgument(_)
        | ProfileError::NotPeriodic
        | ProfileError::Unreachable { .. } => CliError::Invalid(e.to_string()),
        _ => CliError::Numerical(e.to_string()),
    }
}

fn cohesive_err(e: CohesiveError) -> CliError {
    match e {
        CohesiveError::MOutOfRange(_) | CohesiveError::NonPositiveS(_) => CliError::Invalid(e.to_string()),
        _ => CliError::Numerical(e.to_string()),
    }
}

fn critical_err(e: CriticalError) -> CliError {
    match e {
        CriticalError::BadParameters(_) | CriticalError::MOutOfRange { .. } => CliError::Invalid(e.to_string()),
        _ => CliError::Numerical(e.to_string()),
    }
}

fn sharp_err(e: SharpError) -> CliError {
    match e {
        SharpError::Cohesive(c) => cohesive_err(c),
        _ => CliError::Invalid(e.to_string()),
    }
}

fn experiment_err(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::Config(_) | ExperimentError::Law(_) | ExperimentError::Regularize(_) => {
            CliError::Invalid(e.to_string())
        }
        ExperimentError::Cohesive(c) => cohesive_err(c),
        ExperimentError::Critical(c) => critical_err(c),
        ExperimentError::Sharp(s) => sharp_err(s),
        ExperimentError::Profile(p) => profile_err(p),
        ExperimentError::Io(io) => CliError::Io(io.to_string()),
    }
}

fn required(value: Option<f64>, flag: &str, key: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Invalid(format!("missing parameter: pass {flag} or set `{key}` in the config")))
}

fn resolve_law(base: Option<LawSpec>, args: &Args) -> Result<LawSpec, CliError> {
    #[derive(PartialEq)]
    enum Fam {
        Q,
        P,
    }
    let family = match args.law.as_deref() {
        Some("q" | "prototype_q") => Fam::Q,
        Some("p" | "prototype_p") => Fam::P,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown law family `{other}` (expected q, prototype_q, p or prototype_p)"
            )))
        }
        None => match (args.q, args.p, base) {
            (Some(_), Some(_), _) => return Err(CliError::Usage("--q and --p select different families".into())),
            (Some(_), None, _) => Fam::Q,
            (None, Some(_), _) => Fam::P,
            (None, None, Some(LawSpec::PrototypeP { .. })) => Fam::P,
            _ => Fam::Q,
        },
    };
    if family == Fam::Q && args.p.is_some() {
        return Err(CliError::Usage("--p does not apply to the q family".into()));
    }
    if family == Fam::P && args.q.is_some() {
        return Err(CliError::Usage("--q does not apply to the p family".into()));
    }
    let base_sigma = match base {
        Some(LawSpec::PrototypeQ { sigma_c, .. } | LawSpec::PrototypeP { sigma_c, .. }) => sigma_c,
        None => 1.0,
    };
    let sigma_c = args.sigma_c.unwrap_or(base_sigma);
    Ok(match family {
        Fam::Q => {
            let q = match base {
                Some(LawSpec::PrototypeQ { q, .. }) => q,
                _ => 1.0,
            };
            LawSpec::PrototypeQ {
                sigma_c,
                q: args.q.unwrap_or(q),
            }
        }
        Fam::P => {
            let p = match base {
                Some(LawSpec::PrototypeP { p, .. }) => p,
                _ => 0.0,
            };
            LawSpec::PrototypeP {
                sigma_c,
                p: args.p.unwrap_or(p),
            }
        }
    })
}

/// Copies command-line values over the config.
pub fn apply_flags(cfg: &mut CliConfig, args: &Args, command: Command) -> Result<(), CliError> {
    cfg.law = Some(resolve_law(cfg.law, args)?);
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    match args.eps.as_slice() {
        [] => {}
        [e] => {
            cfg.critical.eps = Some(*e);
            cfg.figures.eps_pair = *e;
            cfg.sweep.eps_list = vec![*e];
        }
        list => {
            if command != Command::Sweep {
                return Err(CliError::Usage(format!("`{}` takes a single --eps", command.name())));
            }
            cfg.sweep.eps_list = list.to_vec();
        }
    }
    if let Some(c) = args.c {
        cfg.critical.c = Some(c);
        cfg.sweep.c0 = c;
        cfg.figures.c = c;
    }
    if let Some(alpha) = args.alpha {
        cfg.ode.alpha = Some(alpha);
        cfg.figures.alpha = alpha;
    }
    if let Some(m) = args.m {
        cfg.ode.m = Some(m);
    }
    if let Some(a) = args.a {
        cfg.sharp.a = Some(a);
        cfg.sweep.a = Some(a);
    }
    if let Some(l) = args.length {
        cfg.critical.length = l;
        cfg.sweep.length = l;
        cfg.sharp.length = l;
        cfg.figures.length = l;
    }
    if let Some(k) = args.kmax {
        cfg.sharp.kmax = k;
    }
    if let Some(r) = args.regime {
        cfg.sweep.regime = Some(r);
    }
    if let Some(t) = args.tol {
        cfg.ode.tol = t;
        cfg.critical.tol = t;
        cfg.sweep.tolerances.shoot = t;
    }
    if let Some(x) = args.c_exponent {
        cfg.sweep.c_exponent = x;
    }
    Ok(())
}

/// Runs `command`; `Ok(false)` means the run completed but a validation check failed.
pub fn dispatch(command: Command, cfg: &CliConfig, dir: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let spec = cfg.law.expect("law resolved by apply_flags");
    let law: MaterialLaw = spec.build().map_err(law_err)?;
    match command {
        Command::Validate => validate(&law, cfg, dir, out),
        Command::Law => law_table(&law, cfg, dir, out),
        Command::Ode => ode(&law, cfg, dir, out),
        Command::Critical => critical(&law, cfg, dir, out),
        Command::Sweep => sweep(spec, cfg, dir, out),
        Command::Sharp => sharp(&law, cfg, dir, out),
        Command::Figures => figures(&law, cfg, dir, out),
    }
}

fn write_script(dir: &Path, command: &str, panels: &[Panel]) -> Result<(), CliError> {
    let stem = format!("plot_{command}");
    std::fs::write(dir.join(format!("{stem}.py")), script(&stem, panels))?;
    Ok(())
}

fn law_label(law: &MaterialLaw) -> String {
    match law.family() {
        Family::PrototypeQ(q) => format!("prototype_q(sigma_c = {}, q = {q})", law.sigma_c()),
        Family::PrototypeP(p) => format!("prototype_p(sigma_c = {}, p = {p})", law.sigma_c()),
        Family::Custom => "custom".into(),
    }
}

fn validate(law: &MaterialLaw, cfg: &CliConfig, dir: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let report = validate_assumptions(law, cfg.validate.grid_size);
    write_json(&dir.join("validation.json"), &report)?;
    writeln!(out, "law {}", law_label(law))?;
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {}: {}", c.name, c.detail)?;
    }
    for l in &report.limits {
        let tag = if l.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {}: estimate {} (expected {})", l.name, num(l.estimate), num(l.expected))?;
    }
    for w in &report.warnings {
        writeln!(out, "warning: {w}")?;
    }
    Ok(report.all_passed())
}

fn law_table(law: &MaterialLaw, cfg: &CliConfig, dir: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let coh = CohesiveLaw::new(law).map_err(cohesive_err)?;
    let n = cfg.table.points.max(2);
    let mut rows = Vec::with_capacity(n);
    for k in 1..n {
        let t = k as f64 / n as f64;
        let m = 0.5 - 0.5 * (std::f64::consts::PI * t).cos();
        let s = coh.s_of_m(m).map_err(cohesive_err)?;
        let g = coh.g_of_m(m).map_err(cohesive_err)?;
        rows.push(vec![m, s, g, law.stress(m), law.sigma_c() * s - g]);
    }
    write_csv(&dir.join("law_table.csv"), &["m", "s", "g", "g_prime", "deficit"], &rows)?;

    let q_hint = match law.family() {
        Family::PrototypeQ(q) => Some(q),
        _ => None,
    };
    let fit = coh.asymptotic_exponent(q_hint).map_err(cohesive_err)?;
    let s_frac = coh.s_frac();
    let extrapolated = if s_frac.is_finite() {
        extrapolated_s_frac(law).map_err(cohesive_err)?
    } else {
        f64::INFINITY
    };
    let mut summary = vec![
        ("sigma_c", law.sigma_c()),
        ("s_frac", s_frac),
        ("s_frac_extrapolated", extrapolated),
        ("p_fit", fit.p),
        ("ell_tilde", fit.ell_tilde),
    ];
    if let Some(p) = fit.expected_p {
        summary.push(("p_expected", p));
    }
    write_records(
        &dir.join("law_summary.csv"),
        &["quantity", "value"],
        summary.iter().map(|(k, v)| vec![k.to_string(), num(*v)]),
    )?;
    write_json(&dir.join("law_summary.json"), &json!({ "law": law.spec(), "fit": fit, "s_frac": s_frac }))?;
    writeln!(out, "law {}", law_label(law))?;
    for (k, v) in &summary {
        writeln!(out, "{k} = {}", num(*v))?;
    }
    write_script(
        dir,
        "law",
        &[
            Panel::new("cohesive law", "law_table.csv", "s", &["g", "g_prime"]),
            Panel::new("amplitude of the optimal profile", "law_table.csv", "m", &["s"]),
            Panel::new("deficit sigma_c s - g", "law_table.csv", "s", &["deficit"]).log_log(),
        ],
    )?;
    Ok(true)
}

fn ode(law: &MaterialLaw, cfg: &CliConfig, dir: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let alpha = required(cfg.ode.alpha, "--alpha", "ode.alpha")?;
    let m = required(cfg.ode.m, "--m", "ode.m")?;
    let params = OdeParams { law: law.clone(), alpha, m };
    let sol = profile::solve_ivp(&params, cfg.ode.t_max, cfg.ode.tol).map_err(profile_err)?;
    let rows: Vec<Vec<f64>> = sol.symmetric_samples().iter().map(|s| vec![s.t, s.y, s.yp]).collect();
    write_csv(&dir.join("ode_trajectory.csv"), &["t", "y", "yp"], &rows)?;
    let m_alpha = profile::m_alpha(law, alpha).map_err(profile_err)?;
    let residual = sol.first_integral_residual();
    let scale = sol.first_integral_scale();
    let lm = sol.landmarks;
    write_json(
        &dir.join("ode_summary.json"),
        &json!({
            "alpha": alpha,
            "m": m,
            "classification": sol.classification,
            "m_alpha": m_alpha,
            "z_alpha": sol.z_alpha,
            "t_z_alpha": lm.t0,
            "t_hit_one": lm.t1,
            "half_period": lm.t2,
            "max_amplitude": lm.max_amplitude,
            "first_integral_residual": residual,
            "first_integral_scale": scale,
        }),
    )?;
    let fig = cohesive_core::experiments::FigureParams {
        alpha,
        ..cfg.figures
    };
    figure_data(FigureKind::OdePortrait, law, &fig, dir).map_err(experiment_err)?;
    writeln!(out, "classification: {:?}", sol.classification)?;
    writeln!(out, "m_alpha = {}", num(m_alpha))?;
    if let Some(z) = sol.z_alpha {
        writeln!(out, "z_alpha = {}", num(z))?;
    }
    if let Some(t) = lm.t1 {
        writeln!(out, "hits 1 at t = {}", num(t))?;
    }
    writeln!(out, "first-integral residual = {residual:.3e} (scale {scale:.3e})")?;
    write_script(
        dir,
        "ode",
        &[
            Panel::new("trajectory", "ode_trajectory.csv", "t", &["y"]),
            Panel::new("phase portrait", "ode_portrait.csv", "y", &["yp"]).grouped("case"),
        ],
    )?;
    let bound = f64::max(1e-8, 10.0 * cfg.ode.tol) * scale;
    if !(residual <= bound) {
        return Err(CliError::Numerical(format!(
            "first-integral residual {residual:.3e} exceeds {bound:.3e}"
        )));
    }
    Ok(true)
}

/// Acceptance bounds on the residuals of a built pair.
const PAIR_BOUNDS: [(&str, f64); 3] = [
    ("first_integral", 1e-6),
    ("weak_euler_lagrange", 1e-5),
    ("energy_identity", 1e-8),
];

fn critical(law: &MaterialLaw, cfg: &CliConfig, dir: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let eps = required(cfg.critical.eps, "--eps", "critical.eps")?;
    let c = required(cfg.critical.c, "--c", "critical.c")?;
    let length = cfg.critical.length;
    let reg = RegularizedLaw::new(law, eps).map_err(regularize_err)?;
    let diag_path = dir.join("critical_diagnostics.json");
    let mut diag = json!({ "eps": eps, "c": c, "L": length, "law": law.spec() });
    let problem = match ShootingProblem::new(reg.clone(), c, length) {
        Ok(p) => p,
        Err(e) => {
            diag["error"] = json!(e.to_string());
            write_json(&diag_path, &diag)?;
            return Err(critical_err(e));
        }
    };
    diag["m_hat"] = json!(problem.m_hat());
    diag["i_eps"] = json!(problem.i_eps());
    diag["z_c"] = json!(problem.z_c());
    let report = match problem.shoot(cfg.critical.tol) {
        Ok(r) => r,
        Err(e) => {
            diag["error"] = json!(e.to_string());
            write_json(&diag_path, &diag)?;
            return Err(critical_err(e));
        }
    };
    let scan: Vec<Vec<f64>> = report.scan.iter().map(|&(l, r)| vec![l, r]).collect();
    write_csv(&dir.join("critical_scan.csv"), &["lambda", "half_width_residual"], &scan)?;
    diag["roots"] = json!(report.roots);
    diag["canonical"] = json!(report.canonical);
    let root = report.root();
    let pair = match problem.build_pair(root.lambda, &SamplingSpec::default()) {
        Ok(p) => p,
        Err(e) => {
            diag["error"] = json!(e.to_string());
            write_json(&diag_path, &diag)?;
            return Err(critical_err(e));
        }
    };
    let disc = pair.discrepancy(&reg);
    let rows: Vec<Vec<f64>> = pair
        .samples
        .iter()
        .zip(&disc)
        .map(|(s, &(_, d))| vec![s.x, s.u, s.v, s.gap, d])
        .collect();
    write_csv(&dir.join("critical_pair.csv"), &["x", "u", "v", "gap", "discrepancy"], &rows)?;

    let r = pair.residuals;
    let values = [r.first_integral, r.weak_euler_lagrange, r.energy_identity];
    let mut failures = Vec::new();
    for ((name, bound), value) in PAIR_BOUNDS.iter().zip(values) {
        if !(value <= *bound) {
            failures.push(format!("{name} = {value:.3e} > {bound:.0e}"));
        }
    }
    if !(r.min_v > 0.0 && r.max_v <= 1.0) {
        failures.push(format!("v range [{}, {}] leaves (0, 1]", r.min_v, r.max_v));
    }
    diag["pair"] = json!({
        "lambda": pair.lambda,
        "m_eps": pair.m,
        "a_eps": pair.a_eps,
        "d_eps": pair.d_eps,
        "energy": pair.energy,
        "half_width": pair.half_width,
        "jump": pair.a_eps - c * length,
        "symmetry_defect": pair.symmetry_defect(),
    });
    diag["residuals"] = json!(r);
    diag["failures"] = json!(failures);
    write_json(&diag_path, &diag)?;

    writeln!(out, "roots found: {} (canonical lambda = {})", report.roots.len(), num(root.lambda))?;
    writeln!(out, "m_eps = {}", num(pair.m))?;
    writeln!(out, "a_eps = {}", num(pair.a_eps))?;
    writeln!(out, "d_eps = {}", num(pair.d_eps))?;
    writeln!(out, "energy = {}", num(pair.energy))?;
    writeln!(
        out,
        "residuals: first integral {:.2e}, weak Euler-Lagrange {:.2e}, energy identity {:.2e}",
        r.first_integral, r.weak_euler_lagrange, r.energy_identity
    )?;
    write_script(
        dir,
        "critical",
        &[
            Panel::new("critical pair", "critical_pair.csv", "x", &["u", "v"]),
            Panel::new("discrepancy c^2/f_eps^2 + d_eps", "critical_pair.csv", "x", &["discrepancy"]),
            Panel::new("shooting scan", "critical_scan.csv", "lambda", &["half_width_residual"]),
        ],
    )?;
    if failures.is_empty() {
        Ok(true)
    } else {
        Err(CliError::Numerical(format!("pair residuals out of bounds: {}", failures.join("; "))))
    }
}

fn sweep(spec: LawSpec, cfg: &CliConfig, dir: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let block = &cfg.sweep;
    let name = block
        .regime
        .ok_or_else(|| CliError::Invalid("missing parameter: pass --regime or set `sweep.regime`".into()))?;
    let regime = match name {
        RegimeName::Prefractured => Regime::Prefractured { c0: block.c0 },
        RegimeName::Fractured => Regime::Fractured {
            c_exponent: block.c_exponent,
        },
        RegimeName::Elastic => Regime::Elastic {
            a: required(block.a, "--a", "sweep.a")?,
        },
    };
    let sc = SweepConfig {
        law: spec,
        regime,
        eps_list: block.eps_list.clone(),
        length: block.length,
        tolerances: block.tolerances,
    };
    match name {
        RegimeName::Elastic => {
            let reports = elastic_check(&sc).map_err(experiment_err)?;
            let rows: Vec<Vec<f64>> = reports
                .iter()
                .map(|r| vec![r.eps, r.energy_eps, r.energy_sharp, r.gap])
                .collect();
            write_csv(&dir.join("sweep_elastic.csv"), &["eps", "energy", "energy_sharp", "gap"], &rows)?;
            write_json(&dir.join("sweep_elastic.json"), &reports)?;
            for r in &reports {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{tag} eps = {:e}: gap = {}", r.eps, num(r.gap))?;
            }
            write_script(
                dir,
                "sweep_elastic",
                &[Panel::new("elastic energy gap", "sweep_elastic.csv", "eps", &["energy", "energy_sharp"])],
            )?;
            Ok(reports.iter().all(|r| r.passed))
        }
        _ => {
            let result: SweepResult = match name {
                RegimeName::Prefractured => prefractured_sweep(&sc),
                _ => fractured_sweep(&sc),
            }
            .map_err(experiment_err)?;
            let stem = match name {
                RegimeName::Prefractured => "sweep_prefractured",
                _ => "sweep_fractured",
            };
            result.write_csv(&dir.join(format!("{stem}.csv")))?;
            write_json(&dir.join(format!("{stem}.json")), &result)?;
            for row in &result.rows {
                match &row.error {
                    Some(e) => writeln!(out, "eps = {:e}: failed ({e})", row.eps)?,
                    None => writeln!(
                        out,
                        "eps = {:e}: m = {:.10}, a = {:.10}, energy = {:.10}",
                        row.eps, row.m_eps, row.a_eps, row.energy
                    )?,
                }
            }
            for t in &result.trends {
                let tag = if t.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{tag} trend {}: shrinks by {:.3e} (need {})", t.name, t.log_ratio.exp(), t.required_factor)?;
            }
            for c in result.checks.iter().filter(|c| !c.passed) {
                writeln!(out, "FAIL check {}: {:.3e} > {:.1e}", c.name, c.value, c.bound)?;
            }
            let csv = format!("{stem}.csv");
            write_script(
                dir,
                stem,
                &[
                    Panel::new("criticality residual", &csv, "eps", &["crit_residual", "energy_gap"]).log_log(),
                    Panel::new("limits", &csv, "eps", &["a_eps", "energy", "m_eps"]),
                ],
            )?;
            Ok(result.all_passed)
        }
    }
}

fn kind_name(kind: CriticalKind) -> &'static str {
    match kind {
        CriticalKind::Elastic => "elastic",
        CriticalKind::PreFractured => "prefractured",
        CriticalKind::Fractured => "fractured",
    }
}

fn sharp(law: &MaterialLaw, cfg: &CliConfig, dir: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let a = required(cfg.sharp.a, "--a", "sharp.a")?;
    let length = cfg.sharp.length;
    let coh = CohesiveLaw::new(law).map_err(cohesive_err)?;
    let points = enumerate_critical_points(&coh, a, length, cfg.sharp.kmax).map_err(sharp_err)?;
    let nucleation = nucleation_classifier(&coh, length).map_err(sharp_err)?;
    let opt = |x: Option<f64>| x.map_or_else(String::new, num);
    write_records(
        &dir.join("sharp_points.csv"),
        &["kind", "k", "sigma", "s0", "m", "energy"],
        points.iter().map(|p| {
            vec![
                kind_name(p.kind).to_string(),
                p.k.to_string(),
                num(p.sigma),
                opt(p.s0),
                opt(p.m),
                num(p.energy),
            ]
        }),
    )?;
    let mut profiles = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for (x, u) in p.u.polyline() {
            profiles.push(vec![format!("{}_{}_{i}", kind_name(p.kind), p.k), num(x), num(u)]);
        }
    }
    write_records(&dir.join("sharp_profiles.csv"), &["state", "x", "u"], profiles)?;
    write_json(
        &dir.join("sharp_points.json"),
        &json!({ "a": a, "L": length, "k_max": cfg.sharp.kmax, "points": points, "nucleation": nucleation }),
    )?;
    for p in &points {
        write!(out, "{} k = {} sigma = {} energy = {}", kind_name(p.kind), p.k, num(p.sigma), num(p.energy))?;
        if let Some(s0) = p.s0 {
            write!(out, " s0 = {}", num(s0))?;
        }
        writeln!(out)?;
    }
    writeln!(out, "nucleation: {}", nucleation.message)?;
    write_script(
        dir,
        "sharp",
        &[Panel::new("sharp critical points", "sharp_profiles.csv", "x", &["u"]).grouped("state")],
    )?;
    Ok(true)
}

fn figures(law: &MaterialLaw, cfg: &CliConfig, dir: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    for kind in FigureKind::ALL {
        for f in figure_data(kind, law, &cfg.figures, dir).map_err(experiment_err)? {
            writeln!(out, "wrote {}", f.display())?;
        }
    }
    write_script(
        dir,
        "figures",
        &[
            Panel::new("regularized law", "f_eps_plot.csv", "s", &["f_eps", "sqrt_eps_f_capped"]),
            Panel::new("phase portrait", "ode_portrait.csv", "y", &["yp"]).grouped("case"),
            Panel::new("s(m) and g(s(m))", "law_s_g_of_m.csv", "m", &["s", "g"]),
            Panel::new("cohesive law", "law_g_of_s.csv", "s", &["g", "g_prime"]),
            Panel::new("critical pair", "critical_profiles.csv", "x", &["u", "v"]),
            Panel::new("sharp states", "sharp_states.csv", "x", &["u"]).grouped("panel"),
        ],
    )?;
    Ok(true)
}
