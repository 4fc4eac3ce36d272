//! The sharp cohesive model: energy `Phi`, elastic density `phi` and the SBV
//! critical points of a bar under prescribed elongation.

use serde::Serialize;
use thiserror::Error;

use crate::cohesive::{CohesiveError, CohesiveLaw};
use crate::numerics::brent;
use crate::real::Real;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SharpError {
    #[error("jump amplitude {0} is negative: the energy is infinite")]
    Infeasible(f64),
    #[error("bar length and elongation must be positive (L = {length}, a = {a})")]
    BadGeometry { length: f64, a: f64 },
    #[error("k_max must be at least 1")]
    BadKMax,
    #[error(transparent)]
    Cohesive(#[from] CohesiveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump<T> {
    pub x: T,
    pub amplitude: T,
}

/// Piecewise-affine displacement with constant slope and finitely many jumps
/// (boundary jumps at 0 and `L` included as ordinary jumps).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbvFunction<T> {
    pub length: T,
    pub slope: T,
    pub jumps: Vec<Jump<T>>,
    pub elongation: T,
}

impl<T: Real> SbvFunction<T> {
    /// `slope L + sum of amplitudes - a`.
    pub fn balance_residual(&self) -> T {
        let total = self
            .jumps
            .iter()
            .fold(self.slope * self.length, |acc, j| acc + j.amplitude);
        total - self.elongation
    }

    /// `u(x)`, right-continuous at interior jumps.
    pub fn eval(&self, x: T) -> T {
        self.jumps
            .iter()
            .filter(|j| j.x <= x)
            .fold(self.slope * x, |acc, j| acc + j.amplitude)
    }

    /// Points `(x, u)` tracing the graph with vertical segments at jumps.
    pub fn polyline(&self) -> Vec<(T, T)> {
        let mut xs: Vec<T> = self.jumps.iter().map(|j| j.x).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut pts = vec![(T::zero(), T::zero())];
        let mut level = T::zero();
        for x in xs {
            let before = self.slope * x + level;
            pts.push((x, before));
            let amp = self
                .jumps
                .iter()
                .filter(|j| j.x == x)
                .fold(T::zero(), |a, j| a + j.amplitude);
            level = level + amp;
            pts.push((x, before + amp));
        }
        if pts.last().map(|p| p.0) != Some(self.length) {
            pts.push((self.length, self.slope * self.length + level));
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Elastic,
    PreFractured,
    Fractured,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpCriticalPoint<T> {
    pub kind: CriticalKind,
    pub sigma: T,
    pub k: usize,
    /// Common jump amplitude.
    pub s0: Option<T>,
    /// Minimum of the optimal profile for pre-fractured states.
    pub m: Option<T>,
    pub energy: T,
    pub u: SbvFunction<T>,
}

/// Elastic energy density: `xi^2` up to `sigma_c/2`, then linear growth with slope `sigma_c`.
pub fn phi<T: Real>(sigma_c: T, xi: T) -> T {
    let a = xi.abs();
    if a <= T::lit(0.5) * sigma_c {
        a * a
    } else {
        sigma_c * a - T::lit(0.25) * sigma_c * sigma_c
    }
}

/// `int_0^L phi(u') + sum g([u])`.
pub fn energy_phi<T: Real>(coh: &CohesiveLaw<T>, u: &SbvFunction<T>) -> Result<T, SharpError> {
    let mut e = phi(coh.law().sigma_c(), u.slope) * u.length;
    for j in &u.jumps {
        if j.amplitude < T::zero() {
            return Err(SharpError::Infeasible(j.amplitude.to_f64_lossy()));
        }
        e = e + coh.g(j.amplitude)?;
    }
    Ok(e)
}

fn equal_jumps<T: Real>(length: T, k: usize, amplitude: T) -> Vec<Jump<T>> {
    let kf = T::lit(k as f64);
    (1..=k)
        .map(|j| Jump {
            x: (T::lit(j as f64) - T::lit(0.5)) * length / kf,
            amplitude,
        })
        .collect()
}

/// The purely elastic state `u = (a/L) x`.
pub fn elastic_state<T: Real>(coh: &CohesiveLaw<T>, a: T, length: T) -> SharpCriticalPoint<T> {
    let sig_c = coh.law().sigma_c();
    let slope = a / length;
    SharpCriticalPoint {
        kind: CriticalKind::Elastic,
        sigma: (T::lit(2.0) * slope).min(sig_c),
        k: 0,
        s0: None,
        m: None,
        energy: phi(sig_c, slope) * length,
        u: SbvFunction {
            length,
            slope,
            jumps: Vec::new(),
            elongation: a,
        },
    }
}

/// Pre-fractured roots of `rho_k(m) = (1-m) f(m) L/2 + k s(m) - a` for one `k`.
fn prefractured_roots<T: Real>(
    coh: &CohesiveLaw<T>,
    a: T,
    length: T,
    k: usize,
) -> Result<Vec<T>, SharpError> {
    let law = coh.law();
    let kf = T::lit(k as f64);
    let half_l = T::lit(0.5) * length;
    let rho_of = |m: T, s: T| law.stress(m) * half_l + kf * s - a;
    let mut nodes: Vec<(T, T)> = Vec::with_capacity(514);
    if coh.s_frac().is_finite() {
        nodes.push((T::zero(), kf * coh.s_frac() - a));
    }
    for &(m, s) in coh.scan_grid()? {
        nodes.push((m, rho_of(m, s)));
    }
    nodes.push((T::one(), law.sigma_c() * half_l - a));
    let rho = |m: T| {
        if m >= T::one() {
            return law.sigma_c() * half_l - a;
        }
        if m <= T::zero() {
            return kf * coh.s_frac() - a;
        }
        match coh.s_of_m(m) {
            Ok(s) => rho_of(m, s),
            Err(_) => T::nan(),
        }
    };
    let mut roots = Vec::new();
    for pair in nodes.windows(2) {
        let ((m0, r0), (m1, r1)) = (pair[0], pair[1]);
        if r0 == T::zero() && m0 > T::zero() && m0 < T::one() {
            roots.push(m0);
            continue;
        }
        if r0.signum() == r1.signum() || r1 == T::zero() {
            continue;
        }
        let root = brent(rho, m0, m1, T::epsilon() * T::lit(4.0))
            .map_err(|e| CohesiveError::Inversion {
                s: a.to_f64_lossy(),
                msg: e.to_string(),
            })?;
        if root > T::zero() && root < T::one() {
            roots.push(root);
        }
    }
    Ok(roots)
}

/// All critical points with at most `k_max` interior jumps: the elastic state,
/// every pre-fractured root, and one equal-jump fractured representative per
/// admissible `k`.
pub fn enumerate_critical_points<T: Real>(
    coh: &CohesiveLaw<T>,
    a: T,
    length: T,
    k_max: usize,
) -> Result<Vec<SharpCriticalPoint<T>>, SharpError> {
    if !(a > T::zero() && length > T::zero()) {
        return Err(SharpError::BadGeometry {
            length: length.to_f64_lossy(),
            a: a.to_f64_lossy(),
        });
    }
    if k_max == 0 {
        return Err(SharpError::BadKMax);
    }
    let law = coh.law();
    let mut out = vec![elastic_state(coh, a, length)];
    for k in 1..=k_max {
        for m in prefractured_roots(coh, a, length, k)? {
            let sigma = law.stress(m);
            let s0 = coh.s_of_m(m)?;
            let g0 = coh.g_of_m(m)?;
            let slope = T::lit(0.5) * sigma;
            out.push(SharpCriticalPoint {
                kind: CriticalKind::PreFractured,
                sigma,
                k,
                s0: Some(s0),
                m: Some(m),
                energy: slope * slope * length + T::lit(k as f64) * g0,
                u: SbvFunction {
                    length,
                    slope,
                    jumps: equal_jumps(length, k, s0),
                    elongation: a,
                },
            });
        }
    }
    let sf = coh.s_frac();
    if sf.is_finite() {
        for k in 1..=k_max {
            let amp = a / T::lit(k as f64);
            if amp >= sf * (T::one() - T::lit(1e-12)) {
                out.push(SharpCriticalPoint {
                    kind: CriticalKind::Fractured,
                    sigma: T::zero(),
                    k,
                    s0: Some(amp),
                    m: Some(T::zero()),
                    energy: T::lit(k as f64),
                    u: SbvFunction {
                        length,
                        slope: T::zero(),
                        jumps: equal_jumps(length, k, amp),
                        elongation: a,
                    },
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NucleationVerdict {
    /// A vanishing-jump branch exists (`p > 2`).
    Exists,
    /// The jump nucleates with positive amplitude (`p < 2`).
    Fails,
    /// `p = 2`: a vanishing branch exists only for `L < critical_length`.
    SizeDependent { critical_length: f64, exists_at_length: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSample {
    pub delta: f64,
    pub a: f64,
    /// Smallest pre-fractured amplitude with one jump, if any.
    pub s0: Option<f64>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NucleationReport {
    pub p: f64,
    pub ell_tilde: f64,
    pub verdict: NucleationVerdict,
    pub message: String,
    pub branch: Vec<BranchSample>,
}

/// Band around `p = 2` treated as the critical case.
pub const CRITICAL_P_BAND: f64 = 0.1;

/// Whether a one-jump branch with vanishing amplitude leaves the elastic
/// branch at `a = sigma_c L/2`, decided from the fitted exponent `p` and
/// illustrated by tracing the branch for `a = sigma_c L/2 (1 + delta)`.
pub fn nucleation_classifier<T: Real>(
    coh: &CohesiveLaw<T>,
    length: T,
) -> Result<NucleationReport, SharpError> {
    let fit = coh.asymptotic_exponent(None)?;
    let l = length.to_f64_lossy();
    let (verdict, message) = if (fit.p - 2.0).abs() <= CRITICAL_P_BAND {
        let critical_length = 1.0 / fit.ell_tilde;
        let exists = l < critical_length;
        (
            NucleationVerdict::SizeDependent {
                critical_length,
                exists_at_length: exists,
            },
            format!(
                "size effect (p = 2): vanishing jumps exist only for L < {critical_length:.6}; fails for sufficiently large L"
            ),
        )
    } else if fit.p > 2.0 {
        (
            NucleationVerdict::Exists,
            format!("exists (p = {:.4} > 2): jump opens continuously from zero", fit.p),
        )
    } else {
        (
            NucleationVerdict::Fails,
            format!("fails (p = {:.4} < 2): jump nucleates with positive amplitude", fit.p),
        )
    };
    let sig_c = coh.law().sigma_c();
    let mut branch = Vec::new();
    for delta in [1e-1, 3e-2, 1e-2, 3e-3, 1e-3] {
        let a = T::lit(0.5) * sig_c * length * T::lit(1.0 + delta);
        let roots = prefractured_roots(coh, a, length, 1)?;
        let mut best: Option<(T, T)> = None;
        for m in roots {
            let s0 = coh.s_of_m(m)?;
            if best.map_or(true, |(b, _)| s0 < b) {
                best = Some((s0, coh.law().stress(m)));
            }
        }
        branch.push(BranchSample {
            delta,
            a: a.to_f64_lossy(),
            s0: best.map(|b| b.0.to_f64_lossy()),
            sigma: best.map(|b| b.1.to_f64_lossy()),
        });
    }
    Ok(NucleationReport {
        p: fit.p,
        ell_tilde: fit.ell_tilde,
        verdict,
        message,
        branch,
    })
}
