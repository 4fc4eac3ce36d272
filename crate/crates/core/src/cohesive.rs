//! The cohesive surface density `g` and its calculus, from the optimal-profile
//! quadrature formulas.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::law::MaterialLaw;
use crate::numerics::{brent, integrate, Estimate, QuadError, QuadOptions};
use crate::real::Real;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CohesiveError {
    #[error("m = {0} must lie in (0, 1)")]
    MOutOfRange(f64),
    #[error("s = {0} must be positive")]
    NonPositiveS(f64),
    #[error("quadrature did not converge at m = {m}: {msg}")]
    Quadrature { m: f64, msg: String },
    #[error("inversion of s(m) failed at s = {s}: {msg}")]
    Inversion { s: f64, msg: String },
    #[error("negative deficit sigma_c s - g(s) = {deficit} at s = {s}")]
    NegativeDeficit { s: f64, deficit: f64 },
}

/// Which functional of the profile to integrate.
#[derive(Clone, Copy)]
enum Kind {
    S,
    G,
    Deficit,
}

fn quad_opts<T: Real>() -> QuadOptions<T> {
    let rel = if T::epsilon() > T::lit(1e-10) {
        T::lit(1e-5)
    } else {
        T::lit(1e-12)
    };
    QuadOptions {
        abs_tol: T::min_positive_value(),
        rel_tol: rel,
        max_intervals: 4000,
    }
}

/// Integrates one of the three densities over `t in (m, 1)`.
///
/// All three share the kernel `1/sqrt(P(t)^2 - P(m)^2)`, written through the
/// deficit `d = sigma_c - P` as `(d_m - d_t)(2 sigma_c - d_m - d_t)`.
fn profile_integral<T: Real>(law: &MaterialLaw<T>, m: T, kind: Kind) -> Result<T, CohesiveError> {
    if !(m > T::zero() && m < T::one()) {
        return Err(CohesiveError::MOutOfRange(m.to_f64_lossy()));
    }
    let sig = law.sigma_c();
    let two = T::lit(2.0);
    let d_m = law.deficit(m);
    let p_m = law.stress(m);
    // `delta = t - m` is passed separately to keep P(t) - P(m) accurate near t = m.
    let density = |t: T, delta: T| -> T {
        let d_t = law.deficit(t);
        let p_t = law.stress(t);
        let w = T::one() - t;
        let radicand = law.stress_increment(m, delta) * (p_t + p_m);
        let k = T::one() / radicand.sqrt();
        match kind {
            Kind::S => two * p_m * w / p_t * k,
            Kind::G => two * w * p_t * k,
            Kind::Deficit => two * w * (sig * (two * d_t - d_m) - d_t * d_t) / p_t * k,
        }
    };
    let opts = quad_opts::<T>();
    let c = T::lit(0.5) * (T::one() + m);
    let b = c.min(T::lit(3.0) * m);
    let err = |e: QuadError<T>| CohesiveError::Quadrature {
        m: m.to_f64_lossy(),
        msg: e.to_string(),
    };
    // Rounding noise can stall the adaptive refinement just above the target;
    // such results are kept when the estimate is still tight.
    let integrate = |g: &dyn Fn(T) -> T, a: T, b: T| match integrate(g, a, b, opts) {
        Ok(est) => Ok(est),
        Err(QuadError::NotConverged { value, error }) if error <= T::lit(1e-8) * value.abs() => {
            Ok(Estimate {
                value,
                error,
                evaluations: 0,
            })
        }
        Err(e) => Err(e),
    };
    // Square-root zero at t = m removed by t = m + (b - m) u^2.
    let left = integrate(
        &|u: T| {
            let delta = (b - m) * u * u;
            two * (b - m) * u * density(m + delta, delta)
        },
        T::zero(),
        T::one(),
    )
    .map_err(err)?;
    let mid = if b < c {
        integrate(&|t| density(t, t - m), b, c).map_err(err)?.value
    } else {
        T::zero()
    };
    let right = integrate(&|t| density(t, t - m), c, T::one()).map_err(err)?;
    Ok(left.value + mid + right.value)
}

/// Jump amplitude `s(m)` of the optimal profile with minimum `m`.
pub fn s_of_m<T: Real>(law: &MaterialLaw<T>, m: T) -> Result<T, CohesiveError> {
    profile_integral(law, m, Kind::S)
}

/// Surface energy `g(s(m))`.
pub fn g_of_m<T: Real>(law: &MaterialLaw<T>, m: T) -> Result<T, CohesiveError> {
    profile_integral(law, m, Kind::G)
}

/// `sigma_c s(m) - g(s(m))`, integrated directly so that small values keep relative accuracy.
pub fn deficit_of_m<T: Real>(law: &MaterialLaw<T>, m: T) -> Result<T, CohesiveError> {
    profile_integral(law, m, Kind::Deficit)
}

/// `pi / f'(0)`, infinite when `f'(0) = 0`.
pub fn s_frac<T: Real>(law: &MaterialLaw<T>) -> T {
    let d0 = law.slope_at_zero();
    if d0 > T::zero() {
        T::PI() / d0
    } else {
        T::infinity()
    }
}

/// Limit of `s(m)` as `m -> 0`, from a least-squares fit of `S + a m ln m + b m`
/// on `m = 2^-12 .. 2^-24`.
pub fn extrapolated_s_frac<T: Real>(law: &MaterialLaw<T>) -> Result<T, CohesiveError> {
    let ms: Vec<T> = (12..=24).map(|k| T::lit(0.5_f64.powi(k))).collect();
    let ss: Vec<T> = ms
        .iter()
        .map(|&m| s_of_m(law, m))
        .collect::<Result<_, _>>()?;
    // Normal equations for three unknowns.
    let mut ata = [[T::zero(); 3]; 3];
    let mut atb = [T::zero(); 3];
    for (&m, &s) in ms.iter().zip(&ss) {
        let row = [T::one(), m * m.ln(), m];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] = ata[i][j] + row[i] * row[j];
            }
            atb[i] = atb[i] + row[i] * s;
        }
    }
    Ok(solve3(ata, atb)[0])
}

fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> [T; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for i in (0..3).rev() {
        let mut acc = b[i];
        for k in i + 1..3 {
            acc = acc - a[i][k] * x[k];
        }
        x[i] = acc / a[i][i];
    }
    x
}

/// Fitted small-amplitude expansion `g(s) = sigma_c s - ell s^p`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AsymptoticFit {
    pub p: f64,
    pub ell_tilde: f64,
    /// `(4 + q)/(4 - q)` when a hint was given.
    pub expected_p: Option<f64>,
    pub within_tolerance: Option<bool>,
    pub s_window: (f64, f64),
    pub points: usize,
}

/// Tabulated cohesive law with cached inversion data.
#[derive(Debug, Clone, Serialize)]
pub struct CohesiveTable<T> {
    pub m: Vec<T>,
    pub s: Vec<T>,
    pub g: Vec<T>,
    pub gprime: Vec<T>,
}

/// Cohesive law of a material law: `g`, `g'`, `s(m)`, its inverse `m(s)` and `s_frac`.
#[derive(Debug)]
pub struct CohesiveLaw<T> {
    law: MaterialLaw<T>,
    s_frac: T,
    table: CohesiveTable<T>,
    scan: OnceLock<Vec<(T, T)>>,
}

const TABLE_SIZE: usize = 64;
const SCAN_SIZE: usize = 512;

fn cheb_grid<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|i| {
            let th = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            T::lit(0.5 * (1.0 - th.cos()))
        })
        .collect()
}

impl<T: Real> CohesiveLaw<T> {
    pub fn new(law: &MaterialLaw<T>) -> Result<Self, CohesiveError> {
        let m = cheb_grid::<T>(TABLE_SIZE);
        let rows: Vec<(T, T)> = m
            .par_iter()
            .map(|&mi| Ok((s_of_m(law, mi)?, g_of_m(law, mi)?)))
            .collect::<Result<_, CohesiveError>>()?;
        let gprime = m.iter().map(|&mi| law.stress(mi)).collect();
        let table = CohesiveTable {
            s: rows.iter().map(|r| r.0).collect(),
            g: rows.iter().map(|r| r.1).collect(),
            m,
            gprime,
        };
        Ok(Self {
            law: law.clone(),
            s_frac: s_frac(law),
            table,
            scan: OnceLock::new(),
        })
    }

    pub fn law(&self) -> &MaterialLaw<T> {
        &self.law
    }

    pub fn s_frac(&self) -> T {
        self.s_frac
    }

    pub fn table(&self) -> &CohesiveTable<T> {
        &self.table
    }

    pub fn s_of_m(&self, m: T) -> Result<T, CohesiveError> {
        s_of_m(&self.law, m)
    }

    pub fn g_of_m(&self, m: T) -> Result<T, CohesiveError> {
        g_of_m(&self.law, m)
    }

    pub fn deficit_of_m(&self, m: T) -> Result<T, CohesiveError> {
        deficit_of_m(&self.law, m)
    }

    /// `(m, s(m))` on a 512-point grid, computed on first use.
    pub fn scan_grid(&self) -> Result<&[(T, T)], CohesiveError> {
        if let Some(v) = self.scan.get() {
            return Ok(v);
        }
        let ms = cheb_grid::<T>(SCAN_SIZE);
        let rows: Vec<(T, T)> = ms
            .par_iter()
            .map(|&m| Ok((m, s_of_m(&self.law, m)?)))
            .collect::<Result<_, CohesiveError>>()?;
        Ok(self.scan.get_or_init(|| rows))
    }

    /// Minimum value `m_s` of the optimal profile for amplitude `s`; 0 for `s >= s_frac`.
    pub fn m_of_s(&self, s: T) -> Result<T, CohesiveError> {
        if !(s > T::zero()) {
            return Err(CohesiveError::NonPositiveS(s.to_f64_lossy()));
        }
        if s >= self.s_frac {
            return Ok(T::zero());
        }
        let inv_err = |msg: String| CohesiveError::Inversion {
            s: s.to_f64_lossy(),
            msg,
        };
        let tm = &self.table.m;
        let ts = &self.table.s;
        let n = tm.len();
        // s decreases along the table.
        let (lo, hi) = if s > ts[0] {
            let mut lo = tm[0];
            let mut guard = 0;
            while self.s_of_m(lo)? < s {
                lo = lo * T::lit(0.125);
                guard += 1;
                if guard > 100 || lo < T::min_positive_value().sqrt() {
                    return Ok(lo.max(T::min_positive_value()));
                }
            }
            (lo, tm[0])
        } else if s < ts[n - 1] {
            let mut w = T::one() - tm[n - 1];
            let mut guard = 0;
            while self.s_of_m(T::one() - w)? > s {
                w = w * T::lit(0.125);
                guard += 1;
                if guard > 100 || w < T::epsilon() {
                    return Ok(T::one() - w);
                }
            }
            (tm[n - 1], T::one() - w)
        } else {
            let i = (0..n - 1)
                .find(|&i| ts[i] >= s && s >= ts[i + 1])
                .ok_or_else(|| inv_err("table is not monotone".into()))?;
            (tm[i], tm[i + 1])
        };
        let tol = T::epsilon() * T::lit(8.0) * lo.max(T::lit(1e-300));
        brent(
            |m| self.s_of_m(m).map(|v| v - s).unwrap_or(T::nan()),
            lo,
            hi,
            tol.max(T::epsilon() * T::lit(4.0)),
        )
        .map_err(|e| inv_err(e.to_string()))
    }

    /// `g(s)`: 0 at 0, saturating at 1 beyond `s_frac`.
    pub fn g(&self, s: T) -> Result<T, CohesiveError> {
        if s < T::zero() {
            return Err(CohesiveError::NonPositiveS(s.to_f64_lossy()));
        }
        if s == T::zero() {
            return Ok(T::zero());
        }
        if s >= self.s_frac {
            return Ok(T::one());
        }
        let m = self.m_of_s(s)?;
        if m <= T::zero() {
            return Ok(T::one());
        }
        self.g_of_m(m)
    }

    /// `g'(s) = (1 - m_s) f(m_s)`.
    pub fn g_prime(&self, s: T) -> Result<T, CohesiveError> {
        if s < T::zero() {
            return Err(CohesiveError::NonPositiveS(s.to_f64_lossy()));
        }
        if s == T::zero() {
            return Ok(self.law.sigma_c());
        }
        if s >= self.s_frac {
            return Ok(T::zero());
        }
        Ok(self.law.stress(self.m_of_s(s)?))
    }

    /// Fit of `log(sigma_c s - g(s))` against `log s` on `s in [1e-4, 1e-2]`.
    ///
    /// Points are parametrized by `m`, so no inversion error enters the fit.
    pub fn asymptotic_exponent(&self, q_hint: Option<f64>) -> Result<AsymptoticFit, CohesiveError> {
        let (s_lo, s_hi) = (1e-4, 1e-2);
        let points = 25;
        let m_a = self.m_of_s(T::lit(s_hi))?;
        let m_b = self.m_of_s(T::lit(s_lo))?;
        let (w_a, w_b) = ((T::one() - m_a).to_f64_lossy(), (T::one() - m_b).to_f64_lossy());
        let mut xs = Vec::with_capacity(points);
        let mut ys = Vec::with_capacity(points);
        for i in 0..points {
            let frac = i as f64 / (points - 1) as f64;
            let w = (w_a.ln() + frac * (w_b.ln() - w_a.ln())).exp();
            let m = T::lit(1.0 - w);
            let s = self.s_of_m(m)?.to_f64_lossy();
            let d = self.deficit_of_m(m)?.to_f64_lossy();
            if !(d > 0.0) {
                return Err(CohesiveError::NegativeDeficit { s, deficit: d });
            }
            xs.push(s.ln());
            ys.push(d.ln());
        }
        let n = points as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let p = sxy / sxx;
        let ell = (my - p * mx).exp();
        let expected_p = q_hint.map(|q| (4.0 + q) / (4.0 - q));
        let within_tolerance = expected_p.map(|e| (p - e).abs() <= 0.05 * e);
        Ok(AsymptoticFit {
            p,
            ell_tilde: ell,
            expected_p,
            within_tolerance,
            s_window: (s_lo, s_hi),
            points,
        })
    }
}
