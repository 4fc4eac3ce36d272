//! Phase-field critical points `(u_eps, v_eps)` of the regularized energy on a
//! bar `[0, L]`, built by shooting on the depth of a single symmetric well.
//!
//! The well is parametrized by `lambda = ln gamma`, where
//! `gamma = eps^2 H(1; m)` is the slack of the first integral at `v = 1`.
//! For fixed `c` the half-width grows like `eps |lambda|`, so the shooting
//! root sits at `lambda ~ -L/(2 eps)`, far below the range where `m` itself
//! can be told apart from `m_hat` in double precision. All quantities near
//! `v = 1` are therefore evaluated from `lambda` in log space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::{MaterialLaw, RegularizedLaw};
use crate::numerics::{self, brent, golden_section_min, Direction, EventSpec, OdeOptions, QuadError, QuadOptions};
use crate::real::Real;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CriticalError {
    #[error("invalid problem: {0}")]
    BadParameters(String),
    #[error("the infimum of the outer first integral is interior (value {value} at v = {at}, endpoint value {endpoint})")]
    InteriorInfimum { at: f64, value: f64, endpoint: f64 },
    #[error("could not bracket {what}: {msg}")]
    Bracket { what: &'static str, msg: String },
    #[error("m = {m} is outside (0, m_hat = {m_hat}): the half-width diverges")]
    MOutOfRange { m: f64, m_hat: f64 },
    #[error("v = {v} is below the well minimum m = {m}")]
    BelowMinimum { v: f64, m: f64 },
    #[error("quadrature failed in {what}: {msg}")]
    Quadrature { what: &'static str, msg: String },
    #[error("no shooting root: half-width residual has no sign change on [{lambda_lo}, {lambda_hi}] (eps = {eps} is likely above the admissible threshold)")]
    NoRoot { eps: f64, lambda_lo: f64, lambda_hi: f64 },
    #[error("ode oracle failed: {0}")]
    Ode(String),
}

type Result<T> = std::result::Result<T, CriticalError>;

fn quad(what: &'static str, f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    match numerics::integrate(f, a, b, opts) {
        Ok(e) => Ok(e.value),
        Err(QuadError::NotConverged { value, error }) if error <= 1e-9 * value.abs() + 1e-15 => Ok(value),
        Err(e) => Err(CriticalError::Quadrature {
            what,
            msg: e.to_string(),
        }),
    }
}

/// `(1-v)^2/4 - c^2/f(v)^2` for the untruncated law.
fn q_base(law: &MaterialLaw, c: f64, v: f64) -> f64 {
    let f = law.eval(v);
    0.25 * (1.0 - v) * (1.0 - v) - c * c / (f * f)
}

/// A shooting problem: law, regularization, the constant `c = f_eps^2 u'`, and the bar length.
#[derive(Debug, Clone)]
pub struct ShootingProblem {
    reg: RegularizedLaw,
    c: f64,
    length: f64,
    i_eps: f64,
    m_hat: f64,
    z_c: f64,
}

/// `eps^2 H` at `v` together with the pieces used by the integrands.
#[derive(Debug, Clone, Copy)]
struct TailEval {
    w: f64,
    psi: f64,
    dpsi: f64,
    /// `w^2/4 + gamma`.
    a: f64,
    /// `eps c^2 (1/psi^2 - 1)`.
    e: f64,
}

impl ShootingProblem {
    pub fn new(reg: RegularizedLaw, c: f64, length: f64) -> Result<Self> {
        let sig = reg.base().sigma_c();
        if !(c > 0.0 && c < 0.5 * sig) {
            return Err(CriticalError::BadParameters(format!(
                "c = {c} must lie in (0, sigma_c/2 = {})",
                0.5 * sig
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(CriticalError::BadParameters(format!("L = {length} must be positive")));
        }
        let law = reg.base();
        let z_c = brent(|z| law.stress(z) - 2.0 * c, 0.0, 1.0, 1e-16).map_err(|e| CriticalError::Bracket {
            what: "z_c",
            msg: e.to_string(),
        })?;
        if z_c >= reg.s_eps() {
            return Err(CriticalError::BadParameters(format!(
                "z_c = {z_c} is not below the truncation point s_eps = {}",
                reg.s_eps()
            )));
        }
        let mut p = Self {
            reg,
            c,
            length,
            i_eps: f64::NAN,
            m_hat: f64::NAN,
            z_c,
        };
        p.i_eps = p.compute_i_eps()?;
        p.m_hat = p.compute_m_hat()?;
        Ok(p)
    }

    pub fn reg(&self) -> &RegularizedLaw {
        &self.reg
    }
    pub fn law(&self) -> &MaterialLaw {
        self.reg.base()
    }
    pub fn eps(&self) -> f64 {
        self.reg.eps()
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    /// `inf` over `(s_eps, 1)` of `(1-s)^2/4 - eps c^2/f_eps(s)^2`.
    pub fn i_eps(&self) -> f64 {
        self.i_eps
    }
    /// Root of `(1-m)^2/4 - c^2/f(m)^2 = i_eps` below `z_c`.
    pub fn m_hat(&self) -> f64 {
        self.m_hat
    }
    /// Root of `(1-z) f(z) = 2c`.
    pub fn z_c(&self) -> f64 {
        self.z_c
    }

    fn outer_q(&self, w: f64) -> f64 {
        let psi = self.reg.tail(w).psi;
        0.25 * w * w - self.eps() * self.c * self.c / (psi * psi)
    }

    fn compute_i_eps(&self) -> Result<f64> {
        let w_s = self.reg.w_eps();
        let endpoint = -self.eps() * self.c * self.c;
        let n = 400;
        let (mut best_w, mut best) = (0.0, endpoint);
        for k in 1..=n {
            let w = w_s * k as f64 / n as f64;
            let q = self.outer_q(w);
            if q < best {
                best = q;
                best_w = w;
            }
        }
        if best_w > 0.0 {
            let h = w_s / n as f64;
            let (w, q) = golden_section_min(|w| self.outer_q(w), (best_w - h).max(0.0), (best_w + h).min(w_s), 1e-14);
            if q < endpoint * (1.0 + 1e-12) {
                return Err(CriticalError::InteriorInfimum {
                    at: 1.0 - w,
                    value: q,
                    endpoint,
                });
            }
        }
        Ok(endpoint)
    }

    fn compute_m_hat(&self) -> Result<f64> {
        let law = self.law();
        let g = |m: f64| q_base(law, self.c, m) - self.i_eps;
        let mut lo = 0.5 * self.z_c;
        while g(lo) >= 0.0 {
            lo *= 1e-2;
            if lo < 1e-300 {
                return Err(CriticalError::Bracket {
                    what: "m_hat",
                    msg: "no sign change towards m = 0".into(),
                });
            }
        }
        brent(g, lo, self.z_c, 1e-16 * self.z_c).map_err(|e| CriticalError::Bracket {
            what: "m_hat",
            msg: e.to_string(),
        })
    }

    /// `gamma = i_eps - Q(m)`, positive exactly for `m < m_hat`.
    pub fn gamma_of_m(&self, m: f64) -> f64 {
        self.i_eps - q_base(self.law(), self.c, m)
    }

    /// Inverse of [`Self::gamma_of_m`] through `lambda = ln gamma`.
    pub fn m_of_lambda(&self, lambda: f64) -> Result<f64> {
        let gamma = lambda.exp();
        let target = self.i_eps - gamma;
        let law = self.law();
        let g = |m: f64| q_base(law, self.c, m) - target;
        if g(self.m_hat) <= 0.0 {
            return Ok(self.m_hat);
        }
        let mut lo = 0.5 * self.m_hat;
        while g(lo) >= 0.0 {
            lo *= 1e-2;
            if lo < 1e-300 {
                return Err(CriticalError::Bracket {
                    what: "m(lambda)",
                    msg: format!("lambda = {lambda}"),
                });
            }
        }
        brent(g, lo, self.m_hat, 1e-17 * self.m_hat).map_err(|e| CriticalError::Bracket {
            what: "m(lambda)",
            msg: e.to_string(),
        })
    }

    /// `H(v; m) = [Q_eps(v) - Q(m)]/eps^2`, where `Q_eps` uses `f_eps`.
    pub fn h(&self, m: f64, v: f64) -> Result<f64> {
        if v < m {
            return Err(CriticalError::BelowMinimum { v, m });
        }
        let e2 = self.eps() * self.eps();
        if v <= self.reg.s_eps() {
            Ok(inner_d(self.law(), self.c, m, v - m) / e2)
        } else {
            Ok((self.outer_q(1.0 - v) - q_base(self.law(), self.c, m)) / e2)
        }
    }

    fn well(&self, lambda: f64) -> Result<Well<'_>> {
        let m = self.m_of_lambda(lambda)?;
        Ok(Well {
            p: self,
            lambda,
            gamma: lambda.exp(),
            m,
            delta: self.reg.s_eps() - m,
            w_s: self.reg.w_eps(),
        })
    }

    /// Half-width `x_2(m) - L/2 = int_m^1 dv/sqrt(H)`.
    pub fn half_width(&self, m: f64) -> Result<f64> {
        let gamma = self.gamma_of_m(m);
        if !(m > 0.0 && m < self.m_hat && gamma > 0.0) {
            return Err(CriticalError::MOutOfRange { m, m_hat: self.m_hat });
        }
        self.half_width_lambda(gamma.ln())
    }

    pub fn half_width_lambda(&self, lambda: f64) -> Result<f64> {
        let well = self.well(lambda)?;
        Ok(self.eps() * (well.inner_time()? + well.tail_time()?))
    }

    /// Bracketing range for the shooting scan.
    fn lambda_range(&self) -> (f64, f64) {
        let lo = -self.length / self.eps() - 100.0;
        let hi = self.gamma_of_m(self.m_hat * 1e-12).ln();
        (lo, hi)
    }

    /// Finds every sign change of `half_width - L/2` on a 64-point scan in
    /// `lambda` and refines each with Brent. The canonical root is the one
    /// with the smallest `m`.
    pub fn shoot(&self, tol: f64) -> Result<ShootReport> {
        let (lo, hi) = self.lambda_range();
        let half = 0.5 * self.length;
        let residual = |lambda: f64| self.half_width_lambda(lambda).map(|h| h - half);
        let n = 64;
        let mut scan = Vec::with_capacity(n);
        for k in 0..n {
            let lambda = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            scan.push((lambda, residual(lambda)?));
        }
        let mut roots = Vec::new();
        for pair in scan.windows(2) {
            let ((l0, r0), (l1, r1)) = (pair[0], pair[1]);
            if r0.signum() == r1.signum() && r1 != 0.0 {
                continue;
            }
            let mut failure = None;
            let lambda = brent(
                |l| match residual(l) {
                    Ok(r) => r,
                    Err(e) => {
                        failure = Some(e);
                        f64::NAN
                    }
                },
                l0,
                l1,
                tol * self.length / self.eps(),
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let lambda = lambda.map_err(|e| CriticalError::Bracket {
                what: "shooting root",
                msg: e.to_string(),
            })?;
            let m = self.m_of_lambda(lambda)?;
            let r = residual(lambda)?;
            roots.push(ShootRoot {
                lambda,
                m,
                residual: r / self.length,
            });
        }
        if roots.is_empty() {
            return Err(CriticalError::NoRoot {
                eps: self.eps(),
                lambda_lo: lo,
                lambda_hi: hi,
            });
        }
        let canonical = roots
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.lambda.partial_cmp(&b.1.lambda).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        Ok(ShootReport { roots, canonical, scan })
    }

    /// Samples the pair for the well at `lambda` and evaluates its invariants.
    pub fn build_pair(&self, lambda: f64, grid: &SamplingSpec) -> Result<CriticalPointPair> {
        let well = self.well(lambda)?;
        let eps = self.eps();
        let c = self.c;
        let t_in = well.inner_time()?;
        let t_tail = well.tail_time()?;
        let a_in = well.inner_inv_f2()?;
        let k_tail = well.tail_excess()?;
        let e_in = well.inner_energy()?;
        let q_tail = well.tail_quadratic()?;
        let a_eps = 2.0 * c * (a_in + eps * (t_tail + k_tail));
        let energy = 2.0 * (e_in + eps * c * c * (t_tail + k_tail) + q_tail);
        // i_eps - gamma equals Q(m) but keeps the exponentially small gamma.
        let d_eps = (self.i_eps - well.gamma) / eps;
        let half_width = eps * (t_in + t_tail);

        let (raw, segments) = well.sample_right_half(grid);
        let residuals = well.residuals(&raw, &segments, grid, a_eps, d_eps, half_width);

        let l = self.length;
        let mut right: Vec<PairSample> = Vec::with_capacity(raw.len());
        for s in &raw {
            if right.last().map_or(false, |p: &PairSample| p.x == s.x) {
                continue;
            }
            right.push(PairSample {
                x: s.x,
                u: 0.5 * a_eps + s.u,
                v: s.v,
                gap: s.gap,
            });
        }
        let mut samples = Vec::with_capacity(2 * right.len());
        for s in right.iter().rev() {
            samples.push(PairSample {
                x: l - s.x,
                u: a_eps - s.u,
                ..*s
            });
        }
        samples.extend(right.iter().skip(1).copied());
        // The ends sit within the shooting tolerance of 0 and L.
        if let Some(first) = samples.first_mut() {
            first.x = 0.0;
            first.u = 0.0;
        }
        if let Some(last) = samples.last_mut() {
            last.x = l;
            last.u = a_eps;
        }
        Ok(CriticalPointPair {
            kind: PairKind::Well,
            eps,
            c,
            length: l,
            lambda: Some(lambda),
            m: well.m,
            a_eps,
            d_eps,
            energy,
            half_width,
            samples,
            residuals,
        })
    }

    /// Hitting time of `v = 1` for `v_tt = eps c^2 f_eps'/f_eps^3 + (v-1)/4`,
    /// `v(0) = m`, `v_t(0) = 0`, in the rescaled variable `t = (x - L/2)/eps`.
    pub fn ivp_half_time(&self, m: f64, tol: f64) -> Result<f64> {
        let eps = self.eps();
        let c2 = self.c * self.c;
        let reg = &self.reg;
        let rhs = |_t: f64, y: &[f64; 2]| {
            let v = y[0].min(1.0);
            let f = reg.eval(v);
            [y[1], eps * c2 * reg.eval_d1(v) / (f * f * f) + 0.25 * (y[0] - 1.0)]
        };
        let events = [EventSpec::new(|_t, y: &[f64; 2]| y[0] - 1.0, Direction::Rising, true)];
        let opts = OdeOptions {
            rtol: tol,
            atol: tol * 1e-3,
            ..OdeOptions::default()
        };
        let out = numerics::ode::integrate(rhs, 0.0, [m, 0.0], 1e6, &opts, &events, |_| {})
            .map_err(|e| CriticalError::Ode(format!("{e:?}")))?;
        match out.events.first() {
            Some(hit) => Ok(hit.t),
            None => Err(CriticalError::Ode("v never reached 1".into())),
        }
    }

    /// Half-width in rescaled time from the quadrature, for comparison with [`Self::ivp_half_time`].
    pub fn quadrature_half_time(&self, m: f64) -> Result<f64> {
        Ok(self.half_width(m)? / self.eps())
    }
}

/// `Q(m + delta) - Q(m)` written without cancellation for small `delta`.
fn inner_d(law: &MaterialLaw, c: f64, m: f64, delta: f64) -> f64 {
    let p_m = law.stress(m);
    let dp = law.stress_increment(m, delta);
    let p_v = p_m + dp;
    let v = m + delta;
    let inv_fm = (1.0 - m) / p_m;
    let inv_fv = (1.0 - v) / p_v;
    let n = (1.0 - m) * dp + delta * p_m;
    0.25 * delta * (2.0 * m + delta - 2.0) + c * c * n * (inv_fm + inv_fv) / (p_m * p_v)
}

/// Sampling density of the right half of the well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingSpec {
    /// Intervals in `theta` on `v = m + (v_mid - m) theta^2`, `v_mid = (m + s_eps)/2`.
    pub inner: usize,
    /// Intervals in `ln(1 - v)` from `v_mid` to `s_eps`.
    pub layer: usize,
    /// Intervals in `beta/(1 - v)` across the junction, where `f_eps` departs from 1.
    pub junction: usize,
    /// Intervals on the next 20 units of `tau`.
    pub far: usize,
    pub bulk: usize,
    /// Intervals in `tau` on `[0, 8]` next to the boundary.
    pub near: usize,
    /// Seed for the random test functions of the weak residual.
    pub seed: u64,
    pub test_functions: usize,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            inner: 400,
            layer: 400,
            junction: 400,
            far: 300,
            bulk: 400,
            near: 100,
            seed: 7,
            test_functions: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairSample {
    pub x: f64,
    pub u: f64,
    pub v: f64,
    /// `1 - v`, kept separately since `v` rounds to 1 near the ends.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Elastic,
    Well,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PairResiduals {
    /// `max |first integral - d_eps| / |d_eps|` over the samples.
    pub first_integral: f64,
    /// Max over test functions of the normalized weak Euler-Lagrange residual.
    pub weak_euler_lagrange: f64,
    /// `|int f_eps^2 u'^2 - c a_eps| / (c a_eps)`.
    pub energy_identity: f64,
    /// `(half-width - L/2)/L`.
    pub shooting: f64,
    /// Relative mismatch between the sampled and quadrature half-widths.
    pub sampling: f64,
    pub min_v: f64,
    pub max_v: f64,
    /// Largest `u` decrease between consecutive samples (0 when monotone).
    pub u_monotonicity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointPair {
    pub kind: PairKind,
    pub eps: f64,
    pub c: f64,
    pub length: f64,
    pub lambda: Option<f64>,
    pub m: f64,
    pub a_eps: f64,
    pub d_eps: f64,
    pub energy: f64,
    pub half_width: f64,
    pub samples: Vec<PairSample>,
    pub residuals: PairResiduals,
}

impl CriticalPointPair {
    /// `xi(x) = c^2/f_eps(v)^2 + d_eps` at each sample.
    pub fn discrepancy(&self, reg: &RegularizedLaw) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|s| {
                let f = reg.eval(s.v);
                (s.x, self.c * self.c / (f * f) + self.d_eps)
            })
            .collect()
    }

    /// Largest mirror mismatch over paired samples `i` and `n-1-i`: `v` must
    /// agree, `x` must sum to `L` and `u` to `a_eps` (relative to `L` and `a_eps`).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.samples.len();
        (0..n / 2)
            .map(|i| {
                let (p, q) = (&self.samples[i], &self.samples[n - 1 - i]);
                let dv = (p.v - q.v).abs();
                let dx = (p.x + q.x - self.length).abs() / self.length;
                let du = (p.u + q.u - self.a_eps).abs() / self.a_eps;
                dv.max(dx).max(du)
            })
            .fold(0.0, f64::max)
    }
}

/// The trivial pair `u = (a/L) x`, `v = 1`.
pub fn elastic_pair(a: f64, length: f64, reg: &RegularizedLaw) -> Result<CriticalPointPair> {
    if !(a > 0.0 && length > 0.0) {
        return Err(CriticalError::BadParameters(format!("a = {a}, L = {length} must be positive")));
    }
    let slope = a / length;
    let f1 = reg.eval(1.0);
    let n = 64;
    let samples = (0..=n)
        .map(|k| {
            let x = length * k as f64 / n as f64;
            PairSample {
                x,
                u: slope * x,
                v: 1.0,
                gap: 0.0,
            }
        })
        .collect();
    // With v = 1 the weak residual reduces to f_eps(1) f_eps'(1) slope^2, which is 0.
    let el = (f1 * reg.eval_d1(1.0) * slope * slope).abs();
    Ok(CriticalPointPair {
        kind: PairKind::Elastic,
        eps: reg.eps(),
        c: f1 * f1 * slope,
        length,
        lambda: None,
        m: 1.0,
        a_eps: a,
        d_eps: -slope * slope,
        energy: slope * slope * length,
        half_width: f64::INFINITY,
        samples,
        residuals: PairResiduals {
            weak_euler_lagrange: el,
            min_v: 1.0,
            max_v: 1.0,
            ..PairResiduals::default()
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootRoot {
    pub lambda: f64,
    pub m: f64,
    /// `(half-width - L/2)/L` at the refined root.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootReport {
    pub roots: Vec<ShootRoot>,
    pub canonical: usize,
    /// `(lambda, half-width - L/2)` on the bracketing scan.
    pub scan: Vec<(f64, f64)>,
}

impl ShootReport {
    pub fn root(&self) -> ShootRoot {
        self.roots[self.canonical]
    }
}

struct Well<'a> {
    p: &'a ShootingProblem,
    lambda: f64,
    gamma: f64,
    m: f64,
    delta: f64,
    w_s: f64,
}

/// One sample of the right half with the parameter derivatives needed by the residuals.
struct RawSample {
    x: f64,
    /// `x` measured from the start of its segment, accumulated separately to keep the low digits.
    x_local: f64,
    u: f64,
    v: f64,
    gap: f64,
    /// `dv/dp` and `dx/dp` along the sampling parameter, oriented with increasing `x`.
    v_p: f64,
    x_p: f64,
    /// `c^2 f_eps'(v)/f_eps(v)^3`.
    force: f64,
    /// `c^2/f_eps(v)^2`.
    elastic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Param {
    Theta,
    LogGap,
    Zeta,
    Tau,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: usize,
    len: usize,
    h: f64,
}

impl Well<'_> {
    fn law(&self) -> &MaterialLaw {
        self.p.law()
    }

    fn d_at(&self, theta: f64) -> f64 {
        inner_d(self.law(), self.p.c, self.m, self.delta * theta * theta)
    }

    fn tail_eval(&self, w: f64) -> TailEval {
        let t = self.p.reg.tail(w);
        let eps = self.p.eps();
        let c2 = self.p.c * self.p.c;
        TailEval {
            w,
            psi: t.psi,
            dpsi: t.dpsi,
            a: 0.25 * w * w + self.gamma,
            e: eps * c2 * t.gap * (1.0 + t.psi) / (t.psi * t.psi),
        }
    }

    fn inner_time(&self) -> Result<f64> {
        quad("inner half-width", |t| 2.0 * self.delta * t / self.d_at(t).sqrt(), 0.0, 1.0)
    }

    fn inner_inv_f2(&self) -> Result<f64> {
        quad(
            "inner elongation",
            |t| {
                let v = self.m + self.delta * t * t;
                let f = self.law().eval(v);
                2.0 * self.delta * t / (f * f * self.d_at(t).sqrt())
            },
            0.0,
            1.0,
        )
    }

    fn inner_energy(&self) -> Result<f64> {
        let c2 = self.p.c * self.p.c;
        quad(
            "inner energy",
            |t| {
                let v = self.m + self.delta * t * t;
                let f = self.law().eval(v);
                let d = self.d_at(t);
                2.0 * self.delta * t * (c2 / (f * f) + 0.25 * (1.0 - v) * (1.0 - v) + d) / d.sqrt()
            },
            0.0,
            1.0,
        )
    }

    /// `tau_s = asinh(w_s/(2 sqrt(gamma)))`.
    fn tau_s(&self) -> f64 {
        f64::asinh_from_ln((0.5 * self.w_s).ln() - 0.5 * self.lambda)
    }

    /// `int_0^{w_s} dw/sqrt(B)` with `B = A - E`.
    fn tail_time(&self) -> Result<f64> {
        let corr = quad(
            "tail half-width",
            |w| {
                let t = self.tail_eval(w);
                let (sa, sb) = (t.a.sqrt(), (t.a - t.e).sqrt());
                t.e / (sa * sb * (sa + sb))
            },
            0.0,
            self.w_s,
        )?;
        Ok(2.0 * self.tau_s() + corr)
    }

    /// `int_0^{w_s} (1/psi^2 - 1)/sqrt(B) dw`.
    fn tail_excess(&self) -> Result<f64> {
        let eps = self.p.eps();
        let c2 = self.p.c * self.p.c;
        quad(
            "tail elongation",
            |w| {
                let t = self.tail_eval(w);
                t.e / (eps * c2 * (t.a - t.e).sqrt())
            },
            0.0,
            self.w_s,
        )
    }

    /// `int_0^{w_s} (w^2/4 + B)/sqrt(B) dw`.
    fn tail_quadratic(&self) -> Result<f64> {
        quad(
            "tail energy",
            |w| {
                let t = self.tail_eval(w);
                let b = t.a - t.e;
                (0.25 * w * w + b) / b.sqrt()
            },
            0.0,
            self.w_s,
        )
    }

    /// `w(tau) = 2 sqrt(gamma) sinh(tau)` and `ln cosh(tau) + lambda/2 = ln sqrt(A)`.
    fn w_of_tau(&self, tau: f64) -> (f64, f64) {
        if tau <= 0.0 {
            return (0.0, 0.5 * self.lambda);
        }
        let e2 = (-2.0 * tau).exp();
        let w = (0.5 * self.lambda + tau + (-e2).ln_1p()).exp();
        let ln_sqrt_a = 0.5 * self.lambda + tau + e2.ln_1p() - std::f64::consts::LN_2;
        (w.min(self.w_s), ln_sqrt_a)
    }

    fn v_mid(&self) -> f64 {
        self.m + 0.5 * self.delta
    }

    /// Width in `beta/w` of the junction segment.
    const JUNCTION_SPAN: f64 = 50.0;

    fn zeta_s(&self) -> f64 {
        self.p.reg.beta() / self.w_s
    }

    /// Inner sample at `v = m + delta` with `dv/dp = v_p`.
    fn inner_sample(&self, delta: f64, v_p: f64) -> RawSample {
        let eps = self.p.eps();
        let c2 = self.p.c * self.p.c;
        let law = self.law();
        let v = self.m + delta;
        let f = law.eval(v);
        let x_p = if delta == 0.0 {
            0.0
        } else {
            eps * v_p / inner_d(law, self.p.c, self.m, delta).sqrt()
        };
        RawSample {
            x: 0.0,
            x_local: 0.0,
            u: 0.0,
            v,
            gap: (1.0 - self.m) - delta,
            v_p,
            x_p,
            force: c2 * law.eval_d1(v) / (eps * f * f * f),
            elastic: c2 / (eps * f * f),
        }
    }

    fn tail_sample(&self, t: TailEval, v_p: f64, x_p: f64) -> RawSample {
        let c2 = self.p.c * self.p.c;
        RawSample {
            x: 0.0,
            x_local: 0.0,
            u: 0.0,
            v: 1.0 - t.w,
            gap: t.w,
            v_p,
            x_p,
            force: c2 * t.dpsi / (t.psi * t.psi * t.psi),
            elastic: c2 / (t.psi * t.psi),
        }
    }

    /// Sample at parameter `p` of the given kind, oriented so that `x` increases with the node index.
    fn point(&self, kind: Param, p: f64) -> RawSample {
        let eps = self.p.eps();
        match kind {
            Param::Theta => {
                let span = self.v_mid() - self.m;
                let mut s = self.inner_sample(span * p * p, 2.0 * span * p);
                if p == 0.0 {
                    // D ~ D'(m) delta near the minimum.
                    let law = self.law();
                    let f = law.eval(self.m);
                    let c2 = self.p.c * self.p.c;
                    let d1 = -0.5 * (1.0 - self.m) + 2.0 * c2 * law.eval_d1(self.m) / (f * f * f);
                    s.x_p = 2.0 * eps * span.sqrt() / d1.sqrt();
                }
                s
            }
            Param::LogGap => {
                let w = (1.0 - self.v_mid()) * (-p).exp();
                self.inner_sample((1.0 - self.m) - w, w)
            }
            Param::Zeta => {
                let w = self.p.reg.beta() / p;
                let t = self.tail_eval(w);
                let b = t.a - t.e;
                let v_p = w * w / self.p.reg.beta();
                self.tail_sample(t, v_p, eps * v_p / b.sqrt())
            }
            Param::Tau => {
                let (w, ln_sqrt_a) = self.w_of_tau(p);
                let t = self.tail_eval(w);
                let ratio = if t.e > 0.0 {
                    (t.e.ln() - 2.0 * ln_sqrt_a).exp()
                } else {
                    0.0
                };
                let x_tau = 2.0 * eps / (1.0 - ratio).sqrt();
                self.tail_sample(t, 2.0 * ln_sqrt_a.exp(), x_tau)
            }
        }
    }

    /// Right half from the centre outwards, one contiguous block of nodes per
    /// segment (segment end points are repeated so every block is uniform in
    /// its own parameter).
    fn sample_right_half(&self, grid: &SamplingSpec) -> (Vec<RawSample>, Vec<Segment>) {
        let zeta_s = self.zeta_s();
        let zeta_j = zeta_s + Self::JUNCTION_SPAN;
        let w_j = self.p.reg.beta() / zeta_j;
        let tau_j = f64::asinh_from_ln((0.5 * w_j).ln() - 0.5 * self.lambda);
        let far_lo = (tau_j - 20.0).max(0.0);
        let near_hi = 8.0_f64.min(far_lo);
        let mut layout = vec![
            (Param::Theta, 0.0, 1.0, grid.inner),
            (Param::LogGap, 0.0, ((1.0 - self.v_mid()) / self.w_s).ln(), grid.layer),
            (Param::Zeta, zeta_s, zeta_j, grid.junction),
            (Param::Tau, tau_j, far_lo, grid.far),
        ];
        if far_lo > near_hi {
            layout.push((Param::Tau, far_lo, near_hi, grid.bulk));
        }
        if near_hi > 0.0 {
            layout.push((Param::Tau, near_hi, 0.0, grid.near));
        }
        let (gl_x, gl_w) = numerics::gauss_legendre::<f64>(8);
        let c = self.p.c;
        let mut raw: Vec<RawSample> = Vec::new();
        let mut segments = Vec::new();
        let (mut x, mut u) = (0.5 * self.p.length, 0.0);
        for (kind, a, b, n) in layout {
            let n = n.max(4) & !1;
            let h = (b - a) / n as f64;
            segments.push(Segment {
                start: raw.len(),
                len: n + 1,
                h: h.abs(),
            });
            let (x_start, mut x_local) = (x, 0.0);
            for k in 0..=n {
                let p = a + h * k as f64;
                if k > 0 {
                    // Gauss-Legendre on [p - h, p]; |h| absorbs the orientation.
                    let (mut dx, mut du) = (0.0, 0.0);
                    for (&node, &wt) in gl_x.iter().zip(&gl_w) {
                        let q = self.point(kind, p - 0.5 * h + 0.5 * h * node);
                        dx += wt * q.x_p;
                        du += wt * q.x_p * q.elastic / c;
                    }
                    x_local += 0.5 * h.abs() * dx;
                    u += 0.5 * h.abs() * du;
                }
                x = x_start + x_local;
                let mut s = self.point(kind, p);
                s.x = x;
                s.x_local = x_local;
                s.u = u;
                raw.push(s);
            }
        }
        (raw, segments)
    }

    fn residuals(
        &self,
        raw: &[RawSample],
        segments: &[Segment],
        grid: &SamplingSpec,
        a_eps: f64,
        d_eps: f64,
        half_width: f64,
    ) -> PairResiduals {
        let eps = self.p.eps();
        let c = self.p.c;
        let l = self.p.length;

        // First integral, with dx/dp from finite differences of the sampled x.
        let mut fi = 0.0_f64;
        for seg in segments {
            let block = &raw[seg.start..seg.start + seg.len];
            let xs: Vec<f64> = block.iter().map(|s| s.x_local).collect();
            for (s, dx) in block.iter().zip(fd_derivative(&xs, seg.h)) {
                let slope = s.v_p / dx;
                let val = s.gap * s.gap / (4.0 * eps) - s.elastic - eps * slope * slope;
                let r = ((val - d_eps) / d_eps).abs();
                fi = fi.max(r);
            }
        }

        // Weak form against random sine series vanishing at both ends.
        let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
        let mut weak = 0.0_f64;
        let k_max = 6;
        for _ in 0..grid.test_functions.max(1) {
            let coef: Vec<f64> = (1..=k_max).map(|k| rng.gen_range(-1.0..1.0) / k as f64).collect();
            let wave = |j: usize| (j + 1) as f64 * std::f64::consts::PI / l;
            let phi = |x: f64| coef.iter().enumerate().map(|(j, a)| a * (wave(j) * x).sin()).sum::<f64>();
            let dphi = |x: f64| {
                coef.iter()
                    .enumerate()
                    .map(|(j, a)| a * wave(j) * (wave(j) * x).cos())
                    .sum::<f64>()
            };
            let mut terms = [0.0_f64; 3];
            let mut scale = [0.0_f64; 3];
            for seg in segments {
                let block = &raw[seg.start..seg.start + seg.len];
                for side in [1.0, -1.0] {
                    let at = |s: &RawSample| if side > 0.0 { s.x } else { l - s.x };
                    let cols: [Vec<f64>; 3] = [
                        block.iter().map(|s| side * eps * s.v_p * dphi(at(s))).collect(),
                        block.iter().map(|s| s.force * phi(at(s)) * s.x_p).collect(),
                        block.iter().map(|s| -s.gap / (4.0 * eps) * phi(at(s)) * s.x_p).collect(),
                    ];
                    for (j, col) in cols.iter().enumerate() {
                        terms[j] += simpson(col, seg.h);
                        let abs: Vec<f64> = col.iter().map(|v| v.abs()).collect();
                        scale[j] += simpson(&abs, seg.h);
                    }
                }
            }
            let total: f64 = terms.iter().sum();
            let norm: f64 = scale.iter().sum();
            weak = weak.max(total.abs() / norm);
        }

        // Energy identity: int c^2/f_eps^2 dx = c a_eps.
        let mut elastic = 0.0;
        for seg in segments {
            let vals: Vec<f64> = raw[seg.start..seg.start + seg.len]
                .iter()
                .map(|s| s.elastic * s.x_p)
                .collect();
            elastic += 2.0 * simpson(&vals, seg.h);
        }

        let sampled_half = raw.last().map(|s| s.x - 0.5 * l).unwrap_or(0.0);
        let mono = raw.windows(2).map(|w| w[0].u - w[1].u).fold(0.0, f64::max);
        PairResiduals {
            first_integral: fi,
            weak_euler_lagrange: weak,
            energy_identity: ((elastic - c * a_eps) / (c * a_eps)).abs(),
            shooting: (half_width - 0.5 * l) / l,
            sampling: ((sampled_half - half_width) / half_width).abs(),
            min_v: raw.iter().map(|s| s.v).fold(f64::INFINITY, f64::min),
            max_v: raw.iter().map(|s| s.v).fold(f64::NEG_INFINITY, f64::max),
            u_monotonicity: mono,
        }
    }
}

/// First-derivative weights at `x0` for the given nodes (Fornberg's recursion).
fn fornberg_d1(x0: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    // c[j][k]: weight of node j for derivative order k (k = 0, 1).
    let mut c = vec![[0.0_f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Eighth-order finite-difference derivative on a uniform grid.
fn fd_derivative(x: &[f64], h: f64) -> Vec<f64> {
    const WIDTH: usize = 9;
    let n = x.len();
    assert!(n >= WIDTH, "need at least {WIDTH} nodes");
    let nodes: Vec<f64> = (0..WIDTH).map(|k| k as f64).collect();
    let stencils: Vec<Vec<f64>> = (0..WIDTH).map(|k| fornberg_d1(k as f64, &nodes)).collect();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(WIDTH / 2).min(n - WIDTH);
            let w = &stencils[i - start];
            w.iter().zip(&x[start..start + WIDTH]).map(|(a, b)| a * b).sum::<f64>() / h
        })
        .collect()
}

/// Composite Simpson rule on an odd number of uniformly spaced values.
fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    debug_assert!(n % 2 == 1 && n >= 3);
    let mut acc = y[0] + y[n - 1];
    for (i, v) in y.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::make_prototype_q;

    fn problem(eps: f64, c: f64) -> ShootingProblem {
        let law = make_prototype_q(1.0, 1.0).unwrap();
        ShootingProblem::new(RegularizedLaw::new(&law, eps).unwrap(), c, 1.0).unwrap()
    }

    #[test]
    fn h_vanishes_at_the_minimum_and_matches_endpoint_formula() {
        let p = problem(1e-3, 0.3);
        let m = 0.5;
        assert_eq!(p.h(m, m).unwrap(), 0.0);
        let f = m / (1.0 - m);
        let expected = (-1e-3 * 0.09 - (0.25 * 0.25 - 0.09 / (f * f))) / 1e-6;
        assert!((p.h(m, 1.0).unwrap() - expected).abs() < 1e-9 * expected.abs());
        assert!(matches!(p.h(m, 0.4), Err(CriticalError::BelowMinimum { .. })));
    }

    #[test]
    fn i_eps_and_m_hat_bounds() {
        for eps in [1e-2, 1e-3, 1e-4] {
            let p = problem(eps, 0.3);
            let f_se = p.reg().eval(p.reg().s_eps());
            assert!(p.i_eps() <= -eps * 0.09);
            assert!(p.i_eps() >= -eps * 0.09 / (f_se * f_se));
            let mh = p.m_hat();
            assert!(p.law().stress(mh) < 0.6);
        }
        let p = problem(1e-6, 0.3);
        assert!((p.m_hat() - 0.6).abs() < 1e-5);
    }

    #[test]
    fn half_width_grows_towards_m_hat() {
        let p = problem(1e-3, 0.3);
        let mut prev = 0.0;
        for lambda in [5.0, 0.0, -5.0, -20.0, -100.0] {
            let hw = p.half_width_lambda(lambda).unwrap();
            assert!(hw > prev);
            prev = hw;
        }
        assert!(matches!(p.half_width(p.m_hat()), Err(CriticalError::MOutOfRange { .. })));
        let small = p.half_width(1e-3).unwrap();
        assert!(small < 0.5);
    }

    #[test]
    fn ivp_oracle_matches_quadrature() {
        let p = problem(1e-3, 0.3);
        for lambda in [-3.0, -10.0] {
            let m = p.m_of_lambda(lambda).unwrap();
            let tq = p.quadrature_half_time(m).unwrap();
            let ti = p.ivp_half_time(m, 1e-13).unwrap();
            assert!(((tq - ti) / tq).abs() < 1e-8, "lambda {lambda}: {tq} vs {ti}");
        }
    }

    #[test]
    fn built_pair_invariants() {
        let p = problem(1e-3, 0.3);
        let rep = p.shoot(1e-10).unwrap();
        let root = rep.root();
        assert!(root.residual.abs() <= 1e-10);
        assert!(root.m < p.m_hat() + 1e-15 && root.m > 0.0);
        assert!(p.law().stress(root.m) <= 0.6);
        let pair = p.build_pair(root.lambda, &SamplingSpec::default()).unwrap();
        let r = pair.residuals;
        assert!(r.min_v > 0.0 && r.max_v <= 1.0);
        assert_eq!(pair.symmetry_defect(), 0.0);
        assert_eq!(r.u_monotonicity, 0.0);
        assert!(pair.d_eps < 0.0);
        assert!(r.first_integral < 1e-6, "{r:?}");
        assert!(r.weak_euler_lagrange < 1e-5, "{r:?}");
        assert!(r.energy_identity < 1e-8, "{r:?}");
        assert!(pair.samples.windows(2).all(|w| w[0].x < w[1].x));
        let mid = pair.samples.iter().min_by(|a, b| a.v.partial_cmp(&b.v).unwrap()).unwrap();
        assert!((mid.x - 0.5).abs() < 1e-12);

        let xi = pair.discrepancy(p.reg());
        let top = (1.0 - pair.m).powi(2) / (4.0 * pair.eps);
        let max = xi.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        assert!((max - top).abs() < 1e-9 * top);
        assert!(xi[0].1 <= 0.0);
    }

    #[test]
    fn elastic_pair_is_trivially_critical() {
        let law = make_prototype_q(1.0, 1.0).unwrap();
        let reg = RegularizedLaw::new(&law, 1e-3).unwrap();
        let pair = elastic_pair(0.4, 1.0, &reg).unwrap();
        assert!((pair.energy - 0.16).abs() < 1e-15);
        assert_eq!(pair.a_eps, 0.4);
        assert_eq!(pair.residuals.weak_euler_lagrange, 0.0);
    }

    #[test]
    fn fd_derivative_is_exact_on_polynomials() {
        let h = 0.1;
        let xs: Vec<f64> = (0..20).map(|i| (i as f64 * h).powi(7)).collect();
        for (i, d) in fd_derivative(&xs, h).iter().enumerate() {
            let t = i as f64 * h;
            assert!((d - 7.0 * t.powi(6)).abs() < 1e-9 * (1.0 + t.powi(6)));
        }
        let ys = [1.0, 3.0, 5.0];
        assert!((simpson(&ys, 0.5) - 3.0).abs() < 1e-15);
    }
}
