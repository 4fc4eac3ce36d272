//! The Cauchy problem `y'' = h(y)`, `y(0) = m`, `y'(0) = 0` for a stress `alpha`.

use serde::Serialize;
use thiserror::Error;

use crate::law::MaterialLaw;
use crate::numerics::ode::{self, Direction, EventSpec, OdeOptions};
use crate::numerics::{bisect, brent, integrate, QuadOptions};
use crate::real::Real;

/// Band on `(1-m) f(m) - 2 alpha` treated as the heteroclinic tie.
pub const TIE_TOL: f64 = 1e-10;
/// Default time horizon.
pub const DEFAULT_T_MAX: f64 = 1e3;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProfileError {
    #[error("alpha = {0} must lie in (0, sigma_c/2) = (0, {1})")]
    AlphaOutOfRange(f64, f64),
    #[error("initial datum m = {0} must lie in (0, 1)")]
    MOutOfRange(f64),
    #[error("point {0} lies outside (0, 1)")]
    EndpointArgument(f64),
    #[error("the solution is not periodic for these parameters")]
    NotPeriodic,
    #[error("target {eta} is not reachable (reachable range [{lo}, {hi}])")]
    Unreachable { eta: f64, lo: f64, hi: f64 },
    #[error("time of flight to {eta} diverges (exceeds cap {cap})")]
    Divergent { eta: f64, cap: f64 },
    #[error("root finding failed: {0}")]
    Root(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("integration failed: {0}")]
    Integration(String),
}

/// Parameters of the Cauchy problem.
#[derive(Debug, Clone)]
pub struct OdeParams<T> {
    pub law: MaterialLaw<T>,
    pub alpha: T,
    pub m: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    ReachesOne,
    Heteroclinic,
    Periodic,
    SupercriticalReachesOne,
}

/// Characteristic times and values of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Landmarks<T> {
    /// Time at which `y = z_alpha`.
    pub t0: Option<T>,
    /// Hitting time of 1.
    pub t1: Option<T>,
    /// Half period.
    pub t2: Option<T>,
    /// Maximum amplitude of a periodic orbit.
    pub max_amplitude: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample<T> {
    pub t: T,
    pub y: T,
    pub yp: T,
}

#[derive(Debug, Clone)]
pub struct ProfileSolution<T> {
    pub params: OdeParams<T>,
    pub classification: Classification,
    pub samples: Vec<ProfileSample<T>>,
    pub landmarks: Landmarks<T>,
    pub z_alpha: Option<T>,
    /// Companion variable `alpha_s` with `alpha_s' = alpha / f(y)^2`, for optimal profiles.
    pub alpha_s: Option<Vec<T>>,
}

impl<T: Real> ProfileSolution<T> {
    /// Samples on `[-t_end, t_end]` using the symmetry `y(-t) = y(t)`.
    pub fn symmetric_samples(&self) -> Vec<ProfileSample<T>> {
        let mut out: Vec<ProfileSample<T>> = self
            .samples
            .iter()
            .skip(1)
            .rev()
            .map(|s| ProfileSample {
                t: -s.t,
                y: s.y,
                yp: -s.yp,
            })
            .collect();
        out.extend(self.samples.iter().copied());
        out
    }

    /// Largest `|(y')^2 - Psi(y)|` along the samples (NaN if any term is NaN).
    pub fn first_integral_residual(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, s| {
            let r = (s.yp * s.yp - psi_first_integral(&self.params, s.y)).abs();
            if r.is_nan() || r > acc {
                r
            } else {
                acc
            }
        })
    }

    /// `max(1, max (y')^2)`, the scale against which the residual is measured.
    pub fn first_integral_scale(&self) -> T {
        self.samples.iter().fold(T::one(), |acc, s| acc.max(s.yp * s.yp))
    }
}

fn check_alpha<T: Real>(law: &MaterialLaw<T>, alpha: T) -> Result<(), ProfileError> {
    let half = T::lit(0.5) * law.sigma_c();
    if alpha > T::zero() && alpha < half {
        Ok(())
    } else {
        Err(ProfileError::AlphaOutOfRange(alpha.to_f64_lossy(), half.to_f64_lossy()))
    }
}

fn check_m<T: Real>(m: T) -> Result<(), ProfileError> {
    if m > T::zero() && m < T::one() {
        Ok(())
    } else {
        Err(ProfileError::MOutOfRange(m.to_f64_lossy()))
    }
}

/// `f'(s) / ((1-s) f(s)^3)` on the open unit interval.
pub fn fbar<T: Real>(law: &MaterialLaw<T>, s: T) -> Result<T, ProfileError> {
    if !(s > T::zero() && s < T::one()) {
        return Err(ProfileError::EndpointArgument(s.to_f64_lossy()));
    }
    Ok(law.fbar(s))
}

/// Right-hand side `h(y)`, extended past 1 by its linearization.
pub fn h<T: Real>(law: &MaterialLaw<T>, alpha: T, y: T) -> T {
    let four_a2 = T::lit(4.0) * alpha * alpha;
    let quarter = T::lit(0.25);
    if y >= T::one() {
        let r = T::lit(2.0) * alpha / law.sigma_c();
        return quarter * (T::one() - y) * (r * r - T::one());
    }
    let y = y.max(T::min_positive_value().sqrt());
    quarter * (T::one() - y) * (four_a2 * law.fbar(y) - T::one())
}

/// `Phi(x) = (1-x)^2 - (2 alpha)^2 / f(x)^2`, in a factorized form that vanishes exactly at 1.
///
/// Past 1 it continues as `(1-x)^2 (1 - (2 alpha/sigma_c)^2)`, matching the extension of `h`.
pub fn phi_energy<T: Real>(law: &MaterialLaw<T>, alpha: T, x: T) -> T {
    let w = T::one() - x;
    if x >= T::one() {
        let r = T::lit(2.0) * alpha / law.sigma_c();
        return w * w * (T::one() - r * r);
    }
    let p = law.stress(x);
    let two_a = T::lit(2.0) * alpha;
    w * w * (p - two_a) * (p + two_a) / (p * p)
}

/// Unique root of `fbar(z) = 1/(2 alpha)^2`.
pub fn z_alpha<T: Real>(law: &MaterialLaw<T>, alpha: T) -> Result<T, ProfileError> {
    check_alpha(law, alpha)?;
    let target = -(T::lit(2.0) * (T::lit(2.0) * alpha).ln());
    let g = |z: T| law.fbar(z).ln() - target;
    let lo = T::lit(1e-12);
    let mut hi = T::lit(0.5);
    while g(hi) > T::zero() {
        hi = T::lit(0.5) * (hi + T::one());
        if T::one() - hi < T::lit(1e-15) {
            break;
        }
    }
    let z = bisect(g, lo, hi, T::lit(1e-14)).map_err(|e| ProfileError::Root(e.to_string()))?;
    let p = law.stress(z);
    if !(p > T::lit(2.0) * alpha) {
        return Err(ProfileError::Root(format!(
            "(1-z)f(z) = {p} does not exceed 2 alpha at z = {z}"
        )));
    }
    Ok(z)
}

/// Unique `m_alpha` with `(1-m) f(m) = 2 alpha`.
pub fn m_alpha<T: Real>(law: &MaterialLaw<T>, alpha: T) -> Result<T, ProfileError> {
    check_alpha(law, alpha)?;
    let target = T::lit(2.0) * alpha;
    let lo = T::min_positive_value().sqrt();
    let hi = T::one() - T::epsilon();
    brent(|m| law.stress(m) - target, lo, hi, T::epsilon())
        .map_err(|e| ProfileError::Root(e.to_string()))
}

/// Trichotomy from the sign of `(1-m) f(m) - 2 alpha`.
pub fn classify<T: Real>(params: &OdeParams<T>) -> Classification {
    if params.alpha >= T::lit(0.5) * params.law.sigma_c() {
        return Classification::SupercriticalReachesOne;
    }
    let delta = params.law.stress(params.m) - T::lit(2.0) * params.alpha;
    if delta.abs() < T::lit(TIE_TOL) {
        Classification::Heteroclinic
    } else if delta < T::zero() {
        Classification::ReachesOne
    } else {
        Classification::Periodic
    }
}

/// `Psi(y) = (Phi(y) - Phi(m)) / 4`, equal to `(y')^2` along the solution.
pub fn psi_first_integral<T: Real>(params: &OdeParams<T>, y: T) -> T {
    let a = params.alpha;
    T::lit(0.25) * (phi_energy(&params.law, a, y) - phi_energy(&params.law, a, params.m))
}

/// Maximum of a periodic orbit started below `z_alpha`; `m` itself when `m > z_alpha`.
pub fn max_amplitude<T: Real>(params: &OdeParams<T>) -> Result<T, ProfileError> {
    check_m(params.m)?;
    if classify(params) != Classification::Periodic {
        return Err(ProfileError::NotPeriodic);
    }
    let z = z_alpha(&params.law, params.alpha)?;
    if params.m >= z {
        return Ok(params.m);
    }
    let target = phi_energy(&params.law, params.alpha, params.m);
    let g = |x: T| phi_energy(&params.law, params.alpha, x) - target;
    bisect(g, z, T::one(), T::epsilon()).map_err(|e| ProfileError::Root(e.to_string()))
}

fn quad_opts<T: Real>() -> QuadOptions<T> {
    let tol = if T::epsilon() > T::lit(1e-10) {
        T::lit(1e-5)
    } else {
        T::lit(1e-12)
    };
    QuadOptions {
        abs_tol: tol,
        rel_tol: tol,
        max_intervals: 4000,
    }
}

/// First time the solution reaches `eta`, as `int_m^eta ds / sqrt(Psi(s))`.
///
/// Square-root zeros at `m` (and at `eta` when `eta` is the turning point `M`)
/// are removed by quadratic substitutions.
pub fn time_of_flight<T: Real>(params: &OdeParams<T>, eta: T) -> Result<T, ProfileError> {
    time_of_flight_capped(params, eta, T::lit(DEFAULT_T_MAX))
}

pub fn time_of_flight_capped<T: Real>(params: &OdeParams<T>, eta: T, cap: T) -> Result<T, ProfileError> {
    check_m(params.m)?;
    let m = params.m;
    let class = classify(params);
    let (hi, turning) = match class {
        Classification::Periodic => {
            let big_m = max_amplitude(params)?;
            if big_m == m {
                return Err(ProfileError::Unreachable {
                    eta: eta.to_f64_lossy(),
                    lo: m.to_f64_lossy(),
                    hi: m.to_f64_lossy(),
                });
            }
            (big_m, (eta - big_m).abs() <= T::lit(1e-12))
        }
        _ => (T::one(), false),
    };
    if !(eta >= m && eta <= hi) {
        return Err(ProfileError::Unreachable {
            eta: eta.to_f64_lossy(),
            lo: m.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    if eta == m {
        return Ok(T::zero());
    }
    if class == Classification::Heteroclinic && eta >= T::one() {
        return Err(ProfileError::Divergent {
            eta: eta.to_f64_lossy(),
            cap: cap.to_f64_lossy(),
        });
    }
    let eta = if turning { hi } else { eta };
    let psi = |s: T| psi_first_integral(params, s);
    let c = T::lit(0.5) * (m + eta);
    let opts = quad_opts::<T>();
    let two = T::lit(2.0);
    let left = integrate(
        |u: T| {
            let s = m + (c - m) * u * u;
            two * (c - m) * u / psi(s).sqrt()
        },
        T::zero(),
        T::one(),
        opts,
    )
    .map_err(|e| ProfileError::Quadrature(e.to_string()))?;
    let right = if turning {
        integrate(
            |u: T| {
                let s = eta - (eta - c) * u * u;
                two * (eta - c) * u / psi(s).sqrt()
            },
            T::zero(),
            T::one(),
            opts,
        )
    } else {
        integrate(|s: T| T::one() / psi(s).sqrt(), c, eta, opts)
    }
    .map_err(|e| ProfileError::Quadrature(e.to_string()))?;
    let t = left.value + right.value;
    if t > cap {
        return Err(ProfileError::Divergent {
            eta: eta.to_f64_lossy(),
            cap: cap.to_f64_lossy(),
        });
    }
    Ok(t)
}

/// Lower bound `log((1 - z_alpha + C)/(1 - eta + C))` on the time to reach `eta > z_alpha`.
pub fn time_lower_bound<T: Real>(params: &OdeParams<T>, eta: T) -> Result<T, ProfileError> {
    let z = z_alpha(&params.law, params.alpha)?;
    let r = T::lit(2.0) * params.alpha / params.law.stress(params.m);
    let c = (T::one() - r * r).abs().sqrt();
    Ok(((T::one() - z + c) / (T::one() - eta + c)).ln())
}

const HETERO_GAP: f64 = 1e-7;

/// Ratio between the step-control tolerance and the requested `tol`.
const STEP_TOL_RATIO: f64 = 1e-3;

/// Integrates the Cauchy problem up to `t_max` (or until `y` reaches 1).
///
/// `tol` bounds the first-integral drift `|(y')^2 - Psi(y)|` by `max(1e-8, 10 tol)`
/// times `first_integral_scale`;
/// the step controller runs at `tol * STEP_TOL_RATIO`, floored at `100 eps_mach`.
pub fn solve_ivp<T: Real>(params: &OdeParams<T>, t_max: T, tol: T) -> Result<ProfileSolution<T>, ProfileError> {
    check_m(params.m)?;
    if !(params.alpha > T::zero()) {
        return Err(ProfileError::AlphaOutOfRange(
            params.alpha.to_f64_lossy(),
            (T::lit(0.5) * params.law.sigma_c()).to_f64_lossy(),
        ));
    }
    let class = classify(params);
    let z = match class {
        Classification::SupercriticalReachesOne => None,
        // `z_alpha` may lie closer to 1 than f64 resolves; the run then has no `t0`.
        _ => z_alpha(&params.law, params.alpha).ok(),
    };
    let law = &params.law;
    let alpha = params.alpha;
    let zv = z.unwrap_or(T::lit(2.0));
    let mut events: Vec<EventSpec<'_, T, 2>> = vec![
        EventSpec::new(move |_t, y: &[T; 2]| y[0] - zv, Direction::Either, false),
        EventSpec::new(|_t, y: &[T; 2]| y[0] - T::one(), Direction::Rising, true),
        EventSpec::new(|_t, y: &[T; 2]| y[1], Direction::Either, false),
    ];
    if class == Classification::Heteroclinic {
        // The orbit is unstable; stop once it is numerically at 1 or turns back.
        events.push(EventSpec::new(
            |_t, y: &[T; 2]| T::one() - y[0] - T::lit(HETERO_GAP),
            Direction::Falling,
            true,
        ));
        events.push(EventSpec::new(|_t, y: &[T; 2]| y[1], Direction::Falling, true));
    }
    let opts = OdeOptions::with_tol((tol * T::lit(STEP_TOL_RATIO)).max(T::lit(100.0) * T::epsilon()));
    let out = ode::integrate(
        |_t, y: &[T; 2]| [y[1], h(law, alpha, y[0])],
        T::zero(),
        [params.m, T::zero()],
        t_max,
        &opts,
        &events,
        |_| {},
    )
    .map_err(|e| ProfileError::Integration(e.to_string()))?;
    let mut lm = Landmarks::default();
    for ev in &out.events {
        match ev.index {
            0 if lm.t0.is_none() => lm.t0 = Some(ev.t),
            1 => lm.t1 = Some(ev.t),
            2 if lm.t2.is_none() => lm.t2 = Some(ev.t),
            _ => {}
        }
    }
    if class == Classification::Periodic {
        lm.max_amplitude = Some(max_amplitude(params)?);
    }
    let samples = out
        .samples
        .iter()
        .map(|(t, y)| ProfileSample {
            t: *t,
            y: y[0],
            yp: y[1],
        })
        .collect();
    Ok(ProfileSolution {
        params: params.clone(),
        classification: class,
        samples,
        landmarks: lm,
        z_alpha: z,
        alpha_s: None,
    })
}

/// Optimal profile for the minimum value `m`: the heteroclinic orbit with
/// `alpha = (1-m) f(m) / 2`, together with `alpha_s`.
pub fn optimal_profile<T: Real>(law: &MaterialLaw<T>, m: T, half_width: T) -> Result<ProfileSolution<T>, ProfileError> {
    check_m(m)?;
    let alpha = T::lit(0.5) * law.stress(m);
    let params = OdeParams {
        law: law.clone(),
        alpha,
        m,
    };
    let z = z_alpha(law, alpha)?;
    let events: Vec<EventSpec<'_, T, 3>> = vec![
        EventSpec::new(move |_t, y: &[T; 3]| y[0] - z, Direction::Rising, false),
        EventSpec::new(
            |_t, y: &[T; 3]| T::one() - y[0] - T::lit(HETERO_GAP),
            Direction::Falling,
            true,
        ),
        EventSpec::new(|_t, y: &[T; 3]| y[1], Direction::Falling, true),
    ];
    let tol = if T::epsilon() > T::lit(1e-10) {
        T::lit(1e-6)
    } else {
        T::lit(1e-13)
    };
    let out = ode::integrate(
        |_t, y: &[T; 3]| {
            let f = law.eval(y[0].min(T::one() - T::epsilon()));
            [y[1], h(law, alpha, y[0]), alpha / (f * f)]
        },
        T::zero(),
        [m, T::zero(), T::zero()],
        half_width,
        &OdeOptions::with_tol(tol),
        &events,
        |_| {},
    )
    .map_err(|e| ProfileError::Integration(e.to_string()))?;
    let mut lm = Landmarks::default();
    if let Some(ev) = out.events.iter().find(|e| e.index == 0) {
        lm.t0 = Some(ev.t);
    }
    let samples = out
        .samples
        .iter()
        .map(|(t, y)| ProfileSample {
            t: *t,
            y: y[0],
            yp: y[1],
        })
        .collect();
    let alpha_s = out.samples.iter().map(|(_, y)| y[2]).collect();
    Ok(ProfileSolution {
        params,
        classification: Classification::Heteroclinic,
        samples,
        landmarks: lm,
        z_alpha: Some(z),
        alpha_s: Some(alpha_s),
    })
}

/// Residual of `f^2(beta) (alpha_s')^2 + (beta')^2 - (1-beta)^2/4` along an optimal profile.
pub fn optimal_profile_residual<T: Real>(sol: &ProfileSolution<T>) -> T {
    let law = &sol.params.law;
    let alpha = sol.params.alpha;
    sol.samples.iter().fold(T::zero(), |acc, s| {
        let f = law.eval(s.y);
        let ap = alpha / (f * f);
        let w = T::one() - s.y;
        let r = f * f * ap * ap + s.yp * s.yp - T::lit(0.25) * w * w;
        acc.max(r.abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::make_prototype_q;

    fn q1() -> MaterialLaw<f64> {
        make_prototype_q(1.0, 1.0).unwrap()
    }

    fn params(alpha: f64, m: f64) -> OdeParams<f64> {
        OdeParams { law: q1(), alpha, m }
    }

    #[test]
    fn fbar_closed_form() {
        assert!((fbar(&q1(), 0.5).unwrap() - 8.0).abs() < 1e-12);
        assert!((fbar(&q1(), 1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-6);
        assert!(fbar(&q1(), 0.0).is_err());
        assert!(fbar(&q1(), 1.0).is_err());
    }

    #[test]
    fn z_alpha_closed_form() {
        for alpha in [0.05, 0.2, 0.4, 0.49] {
            let z = z_alpha(&q1(), alpha).unwrap();
            assert!((z - (2.0 * alpha).powf(2.0 / 3.0)).abs() < 1e-12, "alpha {alpha}");
        }
        assert!(z_alpha(&q1(), 0.5).is_err());
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&params(0.2, 0.3)), Classification::ReachesOne);
        assert_eq!(classify(&params(0.2, 0.4)), Classification::Heteroclinic);
        assert_eq!(classify(&params(0.2, 0.5)), Classification::Periodic);
        assert_eq!(classify(&params(0.6, 0.5)), Classification::SupercriticalReachesOne);
    }

    #[test]
    fn psi_closed_form() {
        let p = params(0.2, 0.3);
        let direct = |y: f64| {
            let a = (1.0 - y).powi(2) / 4.0 * (1.0 - (0.4 / y).powi(2));
            let b = 0.49 / 4.0 * (1.0 - (0.4_f64 / 0.3).powi(2));
            a - b
        };
        assert_eq!(psi_first_integral(&p, 0.3), 0.0);
        assert!((psi_first_integral(&p, 0.35) - direct(0.35)).abs() < 1e-15);
        assert!((psi_first_integral(&p, 0.35) - 0.062_943_594_104_308_4).abs() < 1e-12);
    }

    #[test]
    fn max_amplitude_solves_energy_balance() {
        let p = params(0.2, 0.45);
        let big_m = max_amplitude(&p).unwrap();
        let lhs = (1.0 - big_m).powi(2) - 0.16 * (1.0 - big_m).powi(2) / (big_m * big_m);
        let rhs = 0.3025 - 0.16 * (0.55_f64 / 0.45).powi(2);
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(big_m > z_alpha(&q1(), 0.2).unwrap() && big_m < 1.0);
        assert!(max_amplitude(&params(0.2, 0.3)).is_err());
    }

    #[test]
    fn time_of_flight_matches_ivp_hitting_time() {
        let p = params(0.2, 0.3);
        let t_eta = time_of_flight(&p, 0.9).unwrap();
        let ev = [EventSpec::new(|_t, y: &[f64; 2]| y[0] - 0.9, Direction::Rising, true)];
        let out = ode::integrate(
            |_t, y: &[f64; 2]| [y[1], h(&p.law, p.alpha, y[0])],
            0.0,
            [0.3, 0.0],
            100.0,
            &OdeOptions::with_tol(1e-12),
            &ev,
            |_| {},
        )
        .unwrap();
        assert!((out.t - t_eta).abs() < 1e-8 * t_eta, "{} vs {}", out.t, t_eta);
    }

    #[test]
    fn periodic_orbit_repeats() {
        let p = params(0.2, 0.45);
        let sol = solve_ivp(&p, 60.0, 1e-11).unwrap();
        let t2 = sol.landmarks.t2.unwrap();
        let half = time_of_flight(&p, sol.landmarks.max_amplitude.unwrap()).unwrap();
        assert!((t2 - half).abs() < 1e-7 * t2);
        assert!(sol.first_integral_residual() < 1e-9);
    }

    #[test]
    fn heteroclinic_stops_below_one() {
        let p = params(0.2, 0.4);
        let sol = solve_ivp(&p, 1e3, 1e-12).unwrap();
        assert!(sol.samples.iter().all(|s| s.y < 1.0));
        assert!(sol.samples.windows(2).all(|w| w[1].y > w[0].y));
        assert!(sol.samples.last().unwrap().y > 0.999);
    }

    #[test]
    fn optimal_profile_satisfies_equipartition() {
        let sol = optimal_profile(&q1(), 0.6, 200.0).unwrap();
        assert!(optimal_profile_residual(&sol) < 1e-8);
        let total = 2.0 * sol.alpha_s.as_ref().unwrap().last().unwrap();
        let closed = 2.0 * (0.8_f64 / 0.6).atan() - 1.2 * 3.0_f64.ln();
        assert!((total - closed).abs() < 1e-6, "{total} vs {closed}");
    }
}
