//! Grid-based checks of the structural assumptions (f1)–(f6).

use serde::Serialize;

use super::MaterialLaw;
use crate::real::Real;

const TOL: f64 = 1e-9;

/// Outcome of one assumption.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity (sign convention per check).
    pub worst_value: f64,
    /// Grid location of the worst value.
    pub worst_at: f64,
    pub detail: String,
}

/// Endpoint limit estimated by extrapolation on a geometric grid.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LimitCheck {
    pub name: String,
    pub passed: bool,
    pub estimate: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ValidationReport {
    pub grid_size: usize,
    pub checks: Vec<AssumptionCheck>,
    pub limits: Vec<LimitCheck>,
    /// Fitted exponent `k` in `[(1-s) f(s)]' ~ (1-s)^k` near 1.
    pub growth_exponent: f64,
    /// Log-log slope of `f'/f` near 0 (negative when the ratio diverges).
    pub ratio_slope_at_zero: f64,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.limits.iter().all(|l| l.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Names of the failed assumptions, in order.
    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

fn worst_of(values: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    values.fold((f64::NEG_INFINITY, f64::NAN), |acc, (x, v)| {
        if v > acc.0 || v.is_nan() {
            (v, x)
        } else {
            acc
        }
    })
}

/// Aitken extrapolation of the last three terms of a sequence.
fn aitken(seq: &[f64]) -> f64 {
    let n = seq.len();
    let (a, b, c) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let denom = c - 2.0 * b + a;
    if denom.abs() < 1e-300 || !denom.is_finite() {
        return c;
    }
    let acc = c - (c - b) * (c - b) / denom;
    if acc.is_finite() {
        acc
    } else {
        c
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Checks (f1)–(f6) on a uniform grid of `grid_size` interior points and the
/// endpoint limits `(1-s)f -> sigma_c`, `(1-s)^2 f' -> sigma_c`, `f'/f -> inf`.
///
/// The report is advisory: finite grids cannot prove limits or strict
/// inequalities.
pub fn validate_assumptions<T: Real>(law: &MaterialLaw<T>, grid_size: usize) -> ValidationReport {
    let n = grid_size.max(100);
    let sig = law.sigma_c().to_f64_lossy();
    let grid: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
    let at = |s: f64| T::lit(s);
    let f = |s: f64| law.eval(at(s)).to_f64_lossy();
    let fd1 = |s: f64| law.eval_d1(at(s)).to_f64_lossy();
    let fd2 = |s: f64| law.eval_d2(at(s)).to_f64_lossy();
    let mut checks = Vec::new();

    // (f1): f(0) = 0 and f > 0 inside.
    let f0 = f(0.0);
    let (worst, worst_at) = worst_of(grid.iter().map(|&s| (s, -f(s))));
    checks.push(AssumptionCheck {
        name: "f1".into(),
        passed: f0.abs() <= TOL && worst < 0.0,
        worst_value: worst.max(f0.abs()),
        worst_at: if f0.abs() > TOL { 0.0 } else { worst_at },
        detail: format!("f(0) = {f0:e}; min f on grid = {:e}", -worst),
    });

    // (f2): limit of (1-s) f(s) at 1, from a geometric sequence w = 2^-j.
    let ws: Vec<f64> = (1..=30).map(|j| 0.5_f64.powi(j)).collect();
    let p_seq: Vec<f64> = ws.iter().map(|&w| law.stress(at(1.0 - w)).to_f64_lossy()).collect();
    let p_lim = aitken(&p_seq);
    let f2_err = (p_lim - sig).abs();
    checks.push(AssumptionCheck {
        name: "f2".into(),
        passed: f2_err <= 1e-6 * sig,
        worst_value: f2_err,
        worst_at: 1.0,
        detail: format!("extrapolated lim (1-s)f(s) = {p_lim}"),
    });

    // (f3): [(1-s) f]' > 0 and (1-s) f <= sigma_c.
    let (worst, worst_at) = worst_of(grid.iter().map(|&s| (s, -law.stress_d1(at(s)).to_f64_lossy())));
    let (over, over_at) = worst_of(grid.iter().map(|&s| (s, law.stress(at(s)).to_f64_lossy() - sig)));
    let f3_ok = worst < 0.0 && over <= TOL;
    checks.push(AssumptionCheck {
        name: "f3".into(),
        passed: f3_ok,
        worst_value: worst,
        worst_at: if over > TOL { over_at } else { worst_at },
        detail: format!(
            "min [(1-s)f]' on grid = {:e}; max (1-s)f - sigma_c = {over:e}",
            -worst
        ),
    });

    // (f4): d/ds [(1-s) f'/f] < 0, analytic.
    let r_prime = |s: f64| {
        let (fv, d1, d2) = (f(s), fd1(s), fd2(s));
        ((1.0 - s) * d2 - d1) / fv - (1.0 - s) * d1 * d1 / (fv * fv)
    };
    let (worst, worst_at) = worst_of(grid.iter().map(|&s| (s, r_prime(s))));
    checks.push(AssumptionCheck {
        name: "f4".into(),
        passed: worst < TOL,
        worst_value: worst,
        worst_at,
        detail: format!("max d/ds[(1-s)f'/f] on grid = {worst:e}"),
    });

    // (f5): [(1-s) f]' ~ (1-s)^k near 1, divergence after division by (1-s)^3 iff k < 3.
    let tail: Vec<f64> = (4..=24).map(|j| 0.5_f64.powi(j)).collect();
    let lx: Vec<f64> = tail.iter().map(|w| w.ln()).collect();
    let ly: Vec<f64> = tail
        .iter()
        .map(|&w| law.stress_d1(at(1.0 - w)).to_f64_lossy().max(1e-300).ln())
        .collect();
    let k = slope(&lx, &ly);
    let ratio_last = law.stress_d1(at(1.0 - tail[tail.len() - 1])).to_f64_lossy()
        / tail[tail.len() - 1].powi(3);
    let ratio_first = law.stress_d1(at(1.0 - tail[0])).to_f64_lossy() / tail[0].powi(3);
    checks.push(AssumptionCheck {
        name: "f5".into(),
        passed: k < 3.0 && ratio_last > ratio_first,
        worst_value: k,
        worst_at: 1.0,
        detail: format!("growth exponent k = {k:.6}; [(1-s)f]'/(1-s)^3 from {ratio_first:e} to {ratio_last:e}"),
    });

    // (f6): convexity of G(s) = sqrt(s) f(1 - sqrt(s)) via second differences.
    let g = |s: f64| {
        let r = s.sqrt();
        r * f(1.0 - r)
    };
    let h = 1.0 / (n + 1) as f64;
    let (worst, worst_at) = worst_of(
        grid.windows(3)
            .map(|w| (w[1], -(g(w[0]) - 2.0 * g(w[1]) + g(w[2])))),
    );
    checks.push(AssumptionCheck {
        name: "f6".into(),
        passed: worst <= TOL,
        worst_value: -worst,
        worst_at,
        detail: format!("min second difference = {:e} (h = {h:e})", -worst),
    });

    // Limits at the endpoints.
    let mut limits = Vec::new();
    limits.push(LimitCheck {
        name: "(1-s)f(s) -> sigma_c".into(),
        passed: f2_err <= 1e-6 * sig,
        estimate: p_lim,
        expected: sig,
    });
    let d_seq: Vec<f64> = ws
        .iter()
        .map(|&w| w * w * law.eval_d1(at(1.0 - w)).to_f64_lossy())
        .collect();
    let d_lim = aitken(&d_seq);
    limits.push(LimitCheck {
        name: "(1-s)^2 f'(s) -> sigma_c".into(),
        passed: (d_lim - sig).abs() <= 1e-6 * sig,
        estimate: d_lim,
        expected: sig,
    });
    let small: Vec<f64> = (10..=30).map(|j| 0.5_f64.powi(j)).collect();
    let sx: Vec<f64> = small.iter().map(|s| s.ln()).collect();
    let sy: Vec<f64> = small.iter().map(|&s| (fd1(s) / f(s)).ln()).collect();
    let ratio_slope = slope(&sx, &sy);
    limits.push(LimitCheck {
        name: "f'(s)/f(s) -> +inf at 0".into(),
        passed: ratio_slope < -0.5,
        estimate: fd1(small[small.len() - 1]) / f(small[small.len() - 1]),
        expected: f64::INFINITY,
    });

    let mut warnings = Vec::new();
    if let Some(w) = law.warning() {
        warnings.push(w.to_string());
    }
    ValidationReport {
        grid_size: n,
        checks,
        limits,
        growth_exponent: k,
        ratio_slope_at_zero: ratio_slope,
        warnings,
    }
}
