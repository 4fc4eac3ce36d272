//! Epsilon sweeps for the three limit regimes and figure data.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cohesive::CohesiveError;
use crate::critical::{elastic_pair, CriticalError, PairResiduals, SamplingSpec, ShootingProblem};
use crate::io::{self, num};
use crate::law::{LawError, LawSpec, RegularizeError};
use crate::numerics::brent;
use crate::profile::{self, Classification, OdeParams, ProfileError};
use crate::sharp::{self, CriticalKind, SharpError};
use crate::{CohesiveLaw, MaterialLaw, RegularizedLaw};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Regularize(#[from] RegularizeError),
    #[error(transparent)]
    Cohesive(#[from] CohesiveError),
    #[error(transparent)]
    Critical(#[from] CriticalError),
    #[error(transparent)]
    Sharp(#[from] SharpError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Regime {
    Prefractured { c0: f64 },
    /// `c_eps = eps^exponent`.
    Fractured {
        #[serde(default = "default_c_exponent")]
        c_exponent: f64,
    },
    Elastic { a: f64 },
}

pub fn default_c_exponent() -> f64 {
    0.25
}

pub fn default_ladder() -> Vec<f64> {
    vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
}

fn default_length() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepTolerances {
    /// Shooting tolerance relative to `L`.
    pub shoot: f64,
    /// Required ratio between coarsest and finest residuals.
    pub trend_factor: f64,
    pub first_integral: f64,
    pub weak_euler_lagrange: f64,
    /// Bound on `|g'(jump) - 2c|` at the finest `eps`.
    pub criticality: f64,
    /// Bound on `|2 c_eps / f(m_eps) - 1|` at the finest `eps`.
    pub fractured_ratio: f64,
}

impl Default for SweepTolerances {
    fn default() -> Self {
        Self {
            shoot: 1e-10,
            trend_factor: 2.0,
            first_integral: 1e-6,
            weak_euler_lagrange: 1e-5,
            criticality: 1e-2,
            fractured_ratio: 5e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub law: LawSpec,
    pub regime: Regime,
    #[serde(default = "default_ladder")]
    pub eps_list: Vec<f64>,
    #[serde(rename = "L", default = "default_length")]
    pub length: f64,
    #[serde(default)]
    pub tolerances: SweepTolerances,
}

impl SweepConfig {
    pub fn new(law: LawSpec, regime: Regime) -> Self {
        Self {
            law,
            regime,
            eps_list: default_ladder(),
            length: 1.0,
            tolerances: SweepTolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<MaterialLaw> {
        let law: MaterialLaw = self.law.build()?;
        if self.eps_list.is_empty() {
            return Err(ExperimentError::Config("eps_list is empty".into()));
        }
        if self.eps_list.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(ExperimentError::Config("eps_list entries must lie in (0, 1)".into()));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ExperimentError::Config("eps_list must be strictly decreasing".into()));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(ExperimentError::Config(format!("L = {} must be positive", self.length)));
        }
        match self.regime {
            Regime::Prefractured { c0 } if !(c0 > 0.0 && c0 < 0.5 * law.sigma_c()) => Err(ExperimentError::Config(
                format!("c0 = {c0} must lie in (0, sigma_c/2 = {})", 0.5 * law.sigma_c()),
            )),
            Regime::Fractured { c_exponent } if !(c_exponent > 0.0 && c_exponent < 0.5) => Err(
                ExperimentError::Config(format!("c_exponent = {c_exponent} must lie in (0, 1/2)")),
            ),
            Regime::Elastic { a } if !(a > 0.0) => Err(ExperimentError::Config(format!("a = {a} must be positive"))),
            _ => Ok(law),
        }
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub c: f64,
    pub m_eps: f64,
    pub a_eps: f64,
    pub d_eps: f64,
    pub energy: f64,
    /// `a_eps - c L`.
    pub jump: f64,
    /// `|g'(jump) - 2c|`.
    pub crit_residual: f64,
    /// `|energy - limit energy|`.
    pub energy_gap: f64,
    /// `ln |d_eps + c^2|`, finite even when the excess underflows.
    pub ln_d_excess: f64,
    /// `2c / f(m_eps)`.
    pub two_c_over_f: f64,
    /// Mirror mismatch of the sampled pair.
    pub symmetry: f64,
    pub residuals: PairResiduals,
    pub error: Option<String>,
}

impl ConvergenceRow {
    fn failed(eps: f64, c: f64, err: String) -> Self {
        Self {
            eps,
            c,
            m_eps: f64::NAN,
            a_eps: f64::NAN,
            d_eps: f64::NAN,
            energy: f64::NAN,
            jump: f64::NAN,
            crit_residual: f64::NAN,
            energy_gap: f64::NAN,
            ln_d_excess: f64::NAN,
            two_c_over_f: f64::NAN,
            symmetry: f64::NAN,
            residuals: PairResiduals::default(),
            error: Some(err),
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Coarsest-versus-finest comparison of a residual that should vanish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendCheck {
    pub name: String,
    pub coarsest: f64,
    pub finest: f64,
    /// `ln(coarsest/finest)`, computed from logarithms when available.
    pub log_ratio: f64,
    pub required_factor: f64,
    pub passed: bool,
}

impl TrendCheck {
    fn from_logs(name: &str, ln_coarse: f64, ln_fine: f64, factor: f64) -> Self {
        let log_ratio = ln_coarse - ln_fine;
        Self {
            name: name.into(),
            coarsest: ln_coarse.exp(),
            finest: ln_fine.exp(),
            log_ratio,
            required_factor: factor,
            passed: log_ratio >= factor.ln(),
        }
    }

    fn from_values(name: &str, coarse: f64, fine: f64, factor: f64) -> Self {
        let mut t = Self::from_logs(name, coarse.abs().ln(), fine.abs().ln(), factor);
        t.coarsest = coarse.abs();
        t.finest = fine.abs();
        if coarse == 0.0 && fine == 0.0 {
            t.log_ratio = 0.0;
            t.passed = false;
        }
        t
    }
}

/// A bound checked on a single value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl BoundCheck {
    fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value.abs() <= bound,
        }
    }
}

/// Limits predicted by the sharp model for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepLimits {
    pub a: f64,
    pub jump: f64,
    pub energy: f64,
    /// Minimum of the limit profile (`m*` with `(1-m*) f(m*) = 2 c0`, or 0).
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub limits: SweepLimits,
    pub rows: Vec<ConvergenceRow>,
    pub trends: Vec<TrendCheck>,
    pub checks: Vec<BoundCheck>,
    pub all_passed: bool,
}

impl SweepResult {
    pub fn trend(&self, name: &str) -> Option<&TrendCheck> {
        self.trends.iter().find(|t| t.name == name)
    }
    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
    pub fn row(&self, eps: f64) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.eps == eps)
    }

    pub const CSV_HEADER: [&'static str; 11] = [
        "eps",
        "m_eps",
        "a_eps",
        "d_eps",
        "energy",
        "jump",
        "crit_residual",
        "energy_gap",
        "c",
        "ln_d_excess",
        "two_c_over_f",
    ];

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.eps,
                    r.m_eps,
                    r.a_eps,
                    r.d_eps,
                    r.energy,
                    r.jump,
                    r.crit_residual,
                    r.energy_gap,
                    r.c,
                    r.ln_d_excess,
                    r.two_c_over_f,
                ]
            })
            .collect();
        io::write_csv(path, &Self::CSV_HEADER, &rows)
    }
}

fn sweep_row(
    law: &MaterialLaw,
    coh: &CohesiveLaw,
    eps: f64,
    c: f64,
    length: f64,
    limits: &SweepLimits,
    tol: f64,
) -> ConvergenceRow {
    let run = || -> Result<ConvergenceRow> {
        let reg = RegularizedLaw::new(law, eps)?;
        let problem = ShootingProblem::new(reg, c, length)?;
        let root = problem.shoot(tol)?.root();
        let pair = problem.build_pair(root.lambda, &SamplingSpec::default())?;
        let jump = pair.a_eps - c * length;
        let crit = (coh.g_prime(jump.max(0.0))? - 2.0 * c).abs();
        Ok(ConvergenceRow {
            eps,
            c,
            m_eps: pair.m,
            a_eps: pair.a_eps,
            d_eps: pair.d_eps,
            energy: pair.energy,
            jump,
            crit_residual: crit,
            energy_gap: (pair.energy - limits.energy).abs(),
            ln_d_excess: root.lambda - eps.ln(),
            two_c_over_f: 2.0 * c / law.eval(pair.m),
            symmetry: pair.symmetry_defect(),
            residuals: pair.residuals,
            error: None,
        })
    };
    run().unwrap_or_else(|e| ConvergenceRow::failed(eps, c, e.to_string()))
}

fn pair_checks(rows: &[ConvergenceRow], tol: &SweepTolerances, checks: &mut Vec<BoundCheck>) {
    for r in rows {
        if !r.ok() {
            checks.push(BoundCheck {
                name: format!("row eps={:e} built", r.eps),
                value: f64::NAN,
                bound: 0.0,
                passed: false,
            });
            continue;
        }
        let e = r.eps;
        checks.push(BoundCheck::new(
            format!("first integral eps={e:e}"),
            r.residuals.first_integral,
            tol.first_integral,
        ));
        checks.push(BoundCheck::new(
            format!("weak euler-lagrange eps={e:e}"),
            r.residuals.weak_euler_lagrange,
            tol.weak_euler_lagrange,
        ));
        checks.push(BoundCheck {
            name: format!("0 < v <= 1 eps={e:e}"),
            value: r.residuals.min_v,
            bound: 1.0,
            passed: r.residuals.min_v > 0.0 && r.residuals.max_v <= 1.0,
        });
        checks.push(BoundCheck::new(format!("mirror symmetry eps={e:e}"), r.symmetry, 1e-12));
    }
}

fn trend_endpoints(rows: &[ConvergenceRow]) -> Option<(&ConvergenceRow, &ConvergenceRow)> {
    let ok: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.ok()).collect();
    match (ok.first(), ok.last()) {
        (Some(a), Some(b)) if ok.len() >= 2 => Some((a, b)),
        _ => None,
    }
}

/// Limit of the pre-fractured construction with `c = c0`.
pub fn prefractured_limits(coh: &CohesiveLaw, c0: f64, length: f64) -> Result<SweepLimits> {
    let law = coh.law();
    let m = brent(|m| law.stress(m) - 2.0 * c0, 0.0, 1.0, 1e-16).map_err(|e| {
        ExperimentError::Config(format!("no m with (1-m) f(m) = 2 c0: {e}"))
    })?;
    let s = coh.s_of_m(m)?;
    let g = coh.g_of_m(m)?;
    Ok(SweepLimits {
        a: c0 * length + s,
        jump: s,
        energy: c0 * c0 * length + g,
        m,
    })
}

/// Shoots and builds a pair with `c = c0` for each `eps`, then checks that
/// `a_eps`, the jump, the criticality residual, `d_eps + c0^2` and the energy
/// gap shrink towards the sharp pre-fractured state.
pub fn prefractured_sweep(config: &SweepConfig) -> Result<SweepResult> {
    let law = config.validate()?;
    let Regime::Prefractured { c0 } = config.regime else {
        return Err(ExperimentError::Config("prefractured_sweep needs a prefractured regime".into()));
    };
    let coh = CohesiveLaw::new(&law)?;
    let limits = prefractured_limits(&coh, c0, config.length)?;
    let tol = config.tolerances;
    let rows: Vec<ConvergenceRow> = config
        .eps_list
        .par_iter()
        .map(|&eps| sweep_row(&law, &coh, eps, c0, config.length, &limits, tol.shoot))
        .collect();

    let mut trends = Vec::new();
    let mut checks = Vec::new();
    let f = tol.trend_factor;
    if let Some((coarse, fine)) = trend_endpoints(&rows) {
        trends.push(TrendCheck::from_values(
            "a_eps error",
            coarse.a_eps - limits.a,
            fine.a_eps - limits.a,
            f,
        ));
        trends.push(TrendCheck::from_values(
            "jump error",
            coarse.jump - limits.jump,
            fine.jump - limits.jump,
            f,
        ));
        trends.push(TrendCheck::from_values("criticality residual", coarse.crit_residual, fine.crit_residual, f));
        trends.push(TrendCheck::from_logs("d_eps + c0^2", coarse.ln_d_excess, fine.ln_d_excess, f));
        trends.push(TrendCheck::from_values("energy gap", coarse.energy_gap, fine.energy_gap, f));
        checks.push(BoundCheck::new("finest criticality residual", fine.crit_residual, tol.criticality));
    }
    for (eps, bound) in [(1e-3, 5e-2), (1e-4, 1e-2)] {
        if let Some(r) = rows.iter().find(|r| r.eps == eps && r.ok()) {
            checks.push(BoundCheck::new(
                format!("jump closure eps={eps:e}"),
                r.jump - limits.jump,
                bound,
            ));
        }
    }
    pair_checks(&rows, &tol, &mut checks);
    Ok(finish(config, limits, rows, trends, checks))
}

/// Sweep with `c_eps = eps^exponent`: `a_eps -> s_frac`, energy `-> 1`, `m_eps -> 0`.
pub fn fractured_sweep(config: &SweepConfig) -> Result<SweepResult> {
    let law = config.validate()?;
    let Regime::Fractured { c_exponent } = config.regime else {
        return Err(ExperimentError::Config("fractured_sweep needs a fractured regime".into()));
    };
    if !(law.slope_at_zero() > 0.0) {
        return Err(ExperimentError::Config(
            "the fractured regime needs f'(0) > 0: with f'(0) = 0 the threshold s_frac is infinite".into(),
        ));
    }
    let coh = CohesiveLaw::new(&law)?;
    let limits = SweepLimits {
        a: coh.s_frac(),
        jump: coh.s_frac(),
        energy: 1.0,
        m: 0.0,
    };
    let tol = config.tolerances;
    let rows: Vec<ConvergenceRow> = config
        .eps_list
        .par_iter()
        .map(|&eps| {
            let c = eps.powf(c_exponent);
            sweep_row(&law, &coh, eps, c, config.length, &limits, tol.shoot)
        })
        .collect();

    let mut trends = Vec::new();
    let mut checks = Vec::new();
    let f = tol.trend_factor;
    if let Some((coarse, fine)) = trend_endpoints(&rows) {
        trends.push(TrendCheck::from_values(
            "a_eps error",
            coarse.a_eps - limits.a,
            fine.a_eps - limits.a,
            f,
        ));
        trends.push(TrendCheck::from_values("energy gap", coarse.energy_gap, fine.energy_gap, f));
        trends.push(TrendCheck::from_values("m_eps", coarse.m_eps, fine.m_eps, f));
        checks.push(BoundCheck::new(
            "finest 2c/f(m) - 1",
            fine.two_c_over_f - 1.0,
            tol.fractured_ratio,
        ));
    }
    pair_checks(&rows, &tol, &mut checks);
    Ok(finish(config, limits, rows, trends, checks))
}

fn finish(
    config: &SweepConfig,
    limits: SweepLimits,
    rows: Vec<ConvergenceRow>,
    trends: Vec<TrendCheck>,
    checks: Vec<BoundCheck>,
) -> SweepResult {
    let all_passed = rows.iter().all(|r| r.ok())
        && !trends.is_empty()
        && trends.iter().all(|t| t.passed)
        && checks.iter().all(|c| c.passed);
    SweepResult {
        config: config.clone(),
        limits,
        rows,
        trends,
        checks,
        all_passed,
    }
}

/// Energy comparison between the trivial pair and the sharp elastic state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElasticReport {
    pub a: f64,
    pub length: f64,
    pub sigma_c: f64,
    pub eps: f64,
    /// `(a/L)^2 L`, independent of `eps`.
    pub energy_eps: f64,
    /// `phi(a/L) L`.
    pub energy_sharp: f64,
    pub gap: f64,
    /// Whether `a/L <= sigma_c/2`, where the energies must coincide.
    pub equality_expected: bool,
    pub passed: bool,
}

pub fn elastic_check(config: &SweepConfig) -> Result<Vec<ElasticReport>> {
    let law = config.validate()?;
    let Regime::Elastic { a } = config.regime else {
        return Err(ExperimentError::Config("elastic_check needs an elastic regime".into()));
    };
    let sig = law.sigma_c();
    let l = config.length;
    config
        .eps_list
        .iter()
        .map(|&eps| {
            let reg = RegularizedLaw::new(&law, eps)?;
            let pair = elastic_pair(a, l, &reg)?;
            let slope = a / l;
            let energy_sharp = sharp::phi(sig, slope) * l;
            let gap = pair.energy - energy_sharp;
            let equality_expected = slope <= 0.5 * sig;
            let excess = slope * slope * l - (sig * slope - 0.25 * sig * sig) * l;
            let passed = if equality_expected { gap == 0.0 } else { gap > 0.0 && gap == excess };
            Ok(ElasticReport {
                a,
                length: l,
                sigma_c: sig,
                eps,
                energy_eps: pair.energy,
                energy_sharp,
                gap,
                equality_expected,
                passed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    FEpsPlot,
    OdePortrait,
    LawCurves,
    CriticalProfiles,
}

impl FigureKind {
    pub const ALL: [FigureKind; 4] = [
        FigureKind::FEpsPlot,
        FigureKind::OdePortrait,
        FigureKind::LawCurves,
        FigureKind::CriticalProfiles,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FigureParams {
    /// `eps` for the plot of `f_eps`.
    pub eps_plot: f64,
    /// `alpha` of the phase portrait.
    pub alpha: f64,
    /// `eps` and `c` of the exported critical pair.
    pub eps_pair: f64,
    pub c: f64,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Default for FigureParams {
    fn default() -> Self {
        Self {
            eps_plot: 1e-2,
            alpha: 0.2,
            eps_pair: 1e-3,
            c: 0.3,
            length: 1.0,
        }
    }
}

/// Writes the CSV series of one figure into `out_dir` and returns the files written.
pub fn figure_data(kind: FigureKind, law: &MaterialLaw, params: &FigureParams, out_dir: &Path) -> Result<Vec<PathBuf>> {
    match kind {
        FigureKind::FEpsPlot => f_eps_plot(law, params, out_dir),
        FigureKind::OdePortrait => ode_portrait(law, params, out_dir),
        FigureKind::LawCurves => law_curves(law, out_dir),
        FigureKind::CriticalProfiles => critical_profiles(law, params, out_dir),
    }
}

fn f_eps_plot(law: &MaterialLaw, params: &FigureParams, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let reg = RegularizedLaw::new(law, params.eps_plot)?;
    let s_eps = reg.s_eps();
    let mut grid: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
    grid.extend((0..=200).map(|k| s_eps + (1.0 - s_eps) * k as f64 / 200.0));
    grid.push(s_eps);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&s| {
            let raw = if s < 1.0 { reg.sqrt_eps() * law.eval(s) } else { f64::INFINITY };
            vec![s, reg.eval(s), reg.eval_d1(s), raw.min(2.0), if s <= s_eps { 0.0 } else { 1.0 }]
        })
        .collect();
    let path = out_dir.join("f_eps_plot.csv");
    io::write_csv(&path, &["s", "f_eps", "f_eps_d1", "sqrt_eps_f_capped", "junction"], &rows)?;
    Ok(vec![path])
}

fn ode_portrait(law: &MaterialLaw, params: &FigureParams, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let alpha = params.alpha;
    let m_a = profile::m_alpha(law, alpha)?;
    let z_a = profile::z_alpha(law, alpha)?;
    let cases = [
        ("below", 0.5 * m_a),
        ("at", m_a),
        ("above", m_a + 0.5 * (z_a.min(1.0) - m_a)),
    ];
    let mut records = Vec::new();
    for (name, m) in cases {
        let p = OdeParams {
            law: law.clone(),
            alpha,
            m,
        };
        let sol = profile::solve_ivp(&p, 40.0, 1e-10)?;
        let tag = match sol.classification {
            Classification::ReachesOne => "reaches_one",
            Classification::Heteroclinic => "heteroclinic",
            Classification::Periodic => "periodic",
            Classification::SupercriticalReachesOne => "supercritical",
        };
        for s in sol.symmetric_samples() {
            records.push(vec![name.to_string(), tag.to_string(), num(m), num(s.t), num(s.y), num(s.yp)]);
        }
    }
    let path = out_dir.join("ode_portrait.csv");
    io::write_records(&path, &["case", "classification", "m", "t", "y", "yp"], records)?;
    let lines = out_dir.join("ode_stationary.csv");
    io::write_records(
        &lines,
        &["line", "y"],
        [vec!["one".to_string(), num(1.0)], vec!["z_alpha".to_string(), num(z_a)]],
    )?;
    Ok(vec![path, lines])
}

fn law_curves(law: &MaterialLaw, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let coh = CohesiveLaw::new(law)?;
    let n = 200;
    let ms: Vec<f64> = (1..n)
        .map(|k| {
            // Clustered at both ends, where s(m) and g change fastest.
            let t = k as f64 / n as f64;
            0.5 - 0.5 * (std::f64::consts::PI * t).cos()
        })
        .collect();
    let rows: Vec<Vec<f64>> = ms
        .par_iter()
        .map(|&m| -> Result<Vec<f64>> { Ok(vec![m, coh.s_of_m(m)?, coh.g_of_m(m)?]) })
        .collect::<Result<_>>()?;
    let sm = out_dir.join("law_s_g_of_m.csv");
    io::write_csv(&sm, &["m", "s", "g"], &rows)?;

    let s_end = if coh.s_frac().is_finite() {
        coh.s_frac()
    } else {
        coh.s_of_m(1e-3)?
    };
    let mut g_rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| -> Result<Vec<f64>> {
            let s = s_end * k as f64 / n as f64;
            Ok(vec![s, coh.g(s)?, coh.g_prime(s)?])
        })
        .collect::<Result<_>>()?;
    g_rows.push(vec![s_end, coh.g(s_end)?, coh.g_prime(s_end)?]);
    if coh.s_frac().is_finite() {
        g_rows.push(vec![1.25 * s_end, 1.0, 0.0]);
    }
    let gs = out_dir.join("law_g_of_s.csv");
    io::write_csv(&gs, &["s", "g", "g_prime"], &g_rows)?;
    Ok(vec![sm, gs])
}

fn critical_profiles(law: &MaterialLaw, params: &FigureParams, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let l = params.length;
    let reg = RegularizedLaw::new(law, params.eps_pair)?;
    let problem = ShootingProblem::new(reg, params.c, l)?;
    let root = problem.shoot(1e-10)?.root();
    let pair = problem.build_pair(root.lambda, &SamplingSpec::default())?;
    let rows: Vec<Vec<f64>> = pair.samples.iter().map(|s| vec![s.x, s.u, s.v, s.gap]).collect();
    let pair_path = out_dir.join("critical_profiles.csv");
    io::write_csv(&pair_path, &["x", "u", "v", "gap"], &rows)?;

    // The three sharp panels: elastic, pre-fractured and fractured.
    let coh = CohesiveLaw::new(law)?;
    let sig = law.sigma_c();
    let c0 = 0.3 * sig;
    let pre = prefractured_limits(&coh, c0, l)?;
    let mut panels = vec![
        ("elastic", CriticalKind::Elastic, 0.4 * sig * l, 0.8 * sig),
        ("prefractured", CriticalKind::PreFractured, pre.a, 2.0 * c0),
    ];
    if coh.s_frac().is_finite() {
        panels.push(("fractured", CriticalKind::Fractured, coh.s_frac() + 0.25 * l, 0.0));
    }
    let mut records = Vec::new();
    for (panel, kind, a, sigma) in panels {
        let pts = sharp::enumerate_critical_points(&coh, a, l, 1)?;
        let closest = pts
            .iter()
            .filter(|p| p.kind == kind)
            .min_by(|x, y| (x.sigma - sigma).abs().total_cmp(&(y.sigma - sigma).abs()));
        if let Some(p) = closest {
            for (x, u) in p.u.polyline() {
                records.push(vec![panel.to_string(), num(a), num(x), num(u)]);
            }
        }
    }
    let sharp_path = out_dir.join("sharp_states.csv");
    io::write_records(&sharp_path, &["panel", "a", "x", "u"], records)?;
    Ok(vec![pair_path, sharp_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q1() -> LawSpec {
        LawSpec::PrototypeQ { sigma_c: 1.0, q: 1.0 }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SweepConfig::new(q1(), Regime::Prefractured { c0: 0.3 });
        assert!(cfg.validate().is_ok());
        cfg.eps_list = vec![1e-3, 1e-2];
        assert!(cfg.validate().is_err());
        let cfg = SweepConfig::new(q1(), Regime::Prefractured { c0: 0.6 });
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_parses_and_rejects_unknown_keys() {
        let cfg: SweepConfig = serde_json::from_str(
            r#"{"law":{"family":"prototype_q","sigma_c":1.0,"q":1.0},"regime":{"kind":"fractured"},"L":2.0}"#,
        )
        .unwrap();
        assert_eq!(cfg.regime, Regime::Fractured { c_exponent: 0.25 });
        assert_eq!(cfg.eps_list, default_ladder());
        assert_eq!(cfg.length, 2.0);
        let bad = serde_json::from_str::<SweepConfig>(
            r#"{"law":{"family":"prototype_q","sigma_c":1.0,"q":1.0},"regime":{"kind":"fractured"},"Lx":2.0}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn elastic_gap_matches_phi() {
        let mut cfg = SweepConfig::new(q1(), Regime::Elastic { a: 0.4 });
        cfg.eps_list = vec![1e-2, 1e-3];
        for r in elastic_check(&cfg).unwrap() {
            assert_eq!(r.gap, 0.0);
            assert!(r.passed);
        }
        cfg.regime = Regime::Elastic { a: 1.0 };
        for r in elastic_check(&cfg).unwrap() {
            assert_eq!(r.energy_eps, 1.0);
            assert_eq!(r.energy_sharp, 0.75);
            assert_eq!(r.gap, 0.25);
            assert!(r.passed);
        }
    }

    #[test]
    fn fractured_rejects_flat_laws() {
        let cfg = SweepConfig::new(
            LawSpec::PrototypeP { sigma_c: 1.0, p: 0.0 },
            Regime::Fractured { c_exponent: 0.25 },
        );
        assert!(matches!(fractured_sweep(&cfg), Err(ExperimentError::Config(_))));
    }
}
