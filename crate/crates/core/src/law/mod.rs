//! Dissipation functions `f`, their validation and the ε-truncated densities.

mod regularized;
mod validate;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::Real;

pub use regularized::{RegularizeError, RegularizedLaw, TailPoint};
pub use validate::{validate_assumptions, AssumptionCheck, LimitCheck, ValidationReport};

type Closure<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Parametric family of a law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    PrototypeQ(T),
    PrototypeP(T),
    Custom,
}

#[derive(Clone)]
struct CustomFns<T> {
    f: Closure<T>,
    d1: Closure<T>,
    d2: Closure<T>,
}

/// A dissipation function `f : [0,1) -> [0, inf)` with its first two derivatives.
#[derive(Clone)]
pub struct MaterialLaw<T> {
    sigma_c: T,
    family: Family<T>,
    custom: Option<CustomFns<T>>,
    warning: Option<String>,
}

impl<T: fmt::Debug> fmt::Debug for MaterialLaw<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MaterialLaw")
            .field("sigma_c", &self.sigma_c)
            .field("family", &self.family)
            .field("warning", &self.warning)
            .finish()
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LawError {
    #[error("sigma_c must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("exponent q must lie in (0, 4), got {0}")]
    BadQ(f64),
    #[error("parameter p must lie in (-sigma_c, 2 sigma_c) = ({lo}, {hi}), got {p}")]
    BadP { p: f64, lo: f64, hi: f64 },
}

/// `f_q(s) = sigma_c (1 - (1-s)^q) / (1-s)`.
pub fn make_prototype_q<T: Real>(sigma_c: T, q: T) -> Result<MaterialLaw<T>, LawError> {
    check_sigma(sigma_c)?;
    if !(q > T::zero() && q < T::lit(4.0)) {
        return Err(LawError::BadQ(q.to_f64_lossy()));
    }
    let warning = (q > T::lit(2.0)).then(|| {
        format!(
            "q = {q} exceeds 2: the map s -> sqrt(s) f(1 - sqrt(s)) is not convex"
        )
    });
    Ok(MaterialLaw {
        sigma_c,
        family: Family::PrototypeQ(q),
        custom: None,
        warning,
    })
}

/// `f^p(s) = (sigma_c + p(1-s)) s^2 / (1-s)`.
pub fn make_prototype_p<T: Real>(sigma_c: T, p: T) -> Result<MaterialLaw<T>, LawError> {
    check_sigma(sigma_c)?;
    let lo = -sigma_c;
    let hi = T::lit(2.0) * sigma_c;
    if !(p > lo && p < hi) {
        return Err(LawError::BadP {
            p: p.to_f64_lossy(),
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    Ok(MaterialLaw {
        sigma_c,
        family: Family::PrototypeP(p),
        custom: None,
        warning: None,
    })
}

fn check_sigma<T: Real>(sigma_c: T) -> Result<(), LawError> {
    if sigma_c > T::zero() && sigma_c.is_finite() {
        Ok(())
    } else {
        Err(LawError::BadSigma(sigma_c.to_f64_lossy()))
    }
}

/// `1 - (1-s)^q` without cancellation for small `s`.
#[inline]
fn one_minus_pow<T: Real>(s: T, q: T) -> T {
    -(q * (-s).ln_1p()).exp_m1()
}

impl<T: Real> MaterialLaw<T> {
    /// Law given by user closures for `f`, `f'` and `f''`.
    pub fn custom(
        sigma_c: T,
        f: impl Fn(T) -> T + Send + Sync + 'static,
        d1: impl Fn(T) -> T + Send + Sync + 'static,
        d2: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self, LawError> {
        check_sigma(sigma_c)?;
        Ok(Self {
            sigma_c,
            family: Family::Custom,
            custom: Some(CustomFns {
                f: Arc::new(f),
                d1: Arc::new(d1),
                d2: Arc::new(d2),
            }),
            warning: None,
        })
    }

    pub fn sigma_c(&self) -> T {
        self.sigma_c
    }

    pub fn family(&self) -> Family<T> {
        self.family
    }

    /// Construction-time warning, set for `q` in `(2, 4)`.
    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// `f(s)`.
    pub fn eval(&self, s: T) -> T {
        let sig = self.sigma_c;
        match self.family {
            Family::PrototypeQ(q) => sig * one_minus_pow(s, q) / (T::one() - s),
            Family::PrototypeP(p) => (sig + p * (T::one() - s)) * s * s / (T::one() - s),
            Family::Custom => (self.custom_fns().f)(s),
        }
    }

    /// `f'(s)`.
    pub fn eval_d1(&self, s: T) -> T {
        let sig = self.sigma_c;
        let w = T::one() - s;
        match self.family {
            Family::PrototypeQ(q) => {
                sig * (q * w.powf(q - T::lit(2.0)) + one_minus_pow(s, q) / (w * w))
            }
            Family::PrototypeP(p) => {
                sig * s * (T::lit(2.0) - s) / (w * w) + T::lit(2.0) * p * s
            }
            Family::Custom => (self.custom_fns().d1)(s),
        }
    }

    /// `f''(s)`.
    pub fn eval_d2(&self, s: T) -> T {
        let sig = self.sigma_c;
        let w = T::one() - s;
        let two = T::lit(2.0);
        match self.family {
            Family::PrototypeQ(q) => {
                sig * (q * (T::lit(3.0) - q) * w.powf(q - T::lit(3.0))
                    + two * one_minus_pow(s, q) / (w * w * w))
            }
            Family::PrototypeP(p) => two * sig / (w * w * w) + two * p,
            Family::Custom => (self.custom_fns().d2)(s),
        }
    }

    /// The stress-like quantity `P(s) = (1-s) f(s)`.
    pub fn stress(&self, s: T) -> T {
        let sig = self.sigma_c;
        match self.family {
            Family::PrototypeQ(q) => sig * one_minus_pow(s, q),
            Family::PrototypeP(p) => (sig + p * (T::one() - s)) * s * s,
            Family::Custom => (T::one() - s) * self.eval(s),
        }
    }

    /// `P'(s)`.
    pub fn stress_d1(&self, s: T) -> T {
        let sig = self.sigma_c;
        let w = T::one() - s;
        match self.family {
            Family::PrototypeQ(q) => sig * q * w.powf(q - T::one()),
            Family::PrototypeP(p) => {
                T::lit(2.0) * s * (sig + p) - T::lit(3.0) * p * s * s
            }
            Family::Custom => w * self.eval_d1(s) - self.eval(s),
        }
    }

    /// `sigma_c - P(s)`, accurate when `s` is close to 1.
    pub fn deficit(&self, s: T) -> T {
        let sig = self.sigma_c;
        let w = T::one() - s;
        match self.family {
            Family::PrototypeQ(q) => sig * w.powf(q),
            Family::PrototypeP(p) => w * (sig * (T::one() + s) - p * s * s),
            Family::Custom => sig - self.stress(s),
        }
    }

    /// `P(m + delta) - P(m)` without cancellation for small `delta`.
    pub fn stress_increment(&self, m: T, delta: T) -> T {
        let sig = self.sigma_c;
        match self.family {
            Family::PrototypeQ(q) => {
                let w = T::one() - m;
                -sig * w.powf(q) * (q * (-delta / w).ln_1p()).exp_m1()
            }
            Family::PrototypeP(p) => {
                let (two, three) = (T::lit(2.0), T::lit(3.0));
                (sig + p) * delta * (two * m + delta)
                    - p * delta * (three * m * m + three * m * delta + delta * delta)
            }
            Family::Custom => self.stress(m + delta) - self.stress(m),
        }
    }

    /// `f'(0)`.
    pub fn slope_at_zero(&self) -> T {
        match self.family {
            Family::PrototypeQ(q) => q * self.sigma_c,
            Family::PrototypeP(_) => T::zero(),
            Family::Custom => self.eval_d1(T::zero()),
        }
    }

    /// `f'(s) / ((1-s) f(s)^3)`.
    pub fn fbar(&self, s: T) -> T {
        let f = self.eval(s);
        self.eval_d1(s) / (self.stress(s) * f * f)
    }

    fn custom_fns(&self) -> &CustomFns<T> {
        self.custom.as_ref().expect("custom law carries closures")
    }

    /// Serializable description, `None` for custom laws.
    pub fn spec(&self) -> Option<LawSpec> {
        let sigma_c = self.sigma_c.to_f64_lossy();
        match self.family {
            Family::PrototypeQ(q) => Some(LawSpec::PrototypeQ {
                sigma_c,
                q: q.to_f64_lossy(),
            }),
            Family::PrototypeP(p) => Some(LawSpec::PrototypeP {
                sigma_c,
                p: p.to_f64_lossy(),
            }),
            Family::Custom => None,
        }
    }
}

/// JSON form of a prototype law, e.g. `{"family":"prototype_q","sigma_c":1.0,"q":1.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    PrototypeQ { sigma_c: f64, q: f64 },
    PrototypeP { sigma_c: f64, p: f64 },
}

impl LawSpec {
    pub fn build<T: Real>(&self) -> Result<MaterialLaw<T>, LawError> {
        match *self {
            LawSpec::PrototypeQ { sigma_c, q } => make_prototype_q(T::lit(sigma_c), T::lit(q)),
            LawSpec::PrototypeP { sigma_c, p } => make_prototype_p(T::lit(sigma_c), T::lit(p)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prototype_q1_values() {
        let law = make_prototype_q(1.0_f64, 1.0).unwrap();
        assert_eq!(law.eval(0.0), 0.0);
        assert!((law.eval(0.5) - 1.0).abs() < 1e-15);
        assert!((law.stress(0.9) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn prototype_p0_values() {
        let law = make_prototype_p(1.0_f64, 0.0).unwrap();
        assert_eq!(law.eval(0.0), 0.0);
        assert!((law.eval(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(law.eval_d1(0.0), 0.0);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(make_prototype_q(1.0_f64, 0.0).is_err());
        assert!(make_prototype_q(1.0_f64, 4.0).is_err());
        assert!(make_prototype_q(-1.0_f64, 1.0).is_err());
        assert!(make_prototype_p(1.0_f64, -1.0).is_err());
        assert!(make_prototype_p(1.0_f64, 2.0).is_err());
        assert!(make_prototype_q(1.0_f64, 3.0).unwrap().warning().is_some());
        assert!(make_prototype_q(1.0_f64, 2.0).unwrap().warning().is_none());
    }

    fn check_derivatives(law: &MaterialLaw<f64>) {
        let h = 1e-6;
        for i in 1..40 {
            let s = i as f64 / 41.0;
            let fd1 = (law.eval(s + h) - law.eval(s - h)) / (2.0 * h);
            let fd2 = (law.eval_d1(s + h) - law.eval_d1(s - h)) / (2.0 * h);
            let pd1 = (law.stress(s + h) - law.stress(s - h)) / (2.0 * h);
            let scale = law.eval_d1(s).abs().max(1.0);
            assert!((fd1 - law.eval_d1(s)).abs() < 1e-6 * scale, "f' at {s}");
            let scale2 = law.eval_d2(s).abs().max(1.0);
            assert!((fd2 - law.eval_d2(s)).abs() < 1e-5 * scale2, "f'' at {s}");
            assert!((pd1 - law.stress_d1(s)).abs() < 1e-7, "P' at {s}");
            let d = law.sigma_c() - law.stress(s);
            assert!((d - law.deficit(s)).abs() < 1e-13, "deficit at {s}");
            let inc = law.stress(s + 1e-3) - law.stress(s);
            assert!((inc - law.stress_increment(s, 1e-3)).abs() < 1e-13, "increment at {s}");
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for q in [0.5, 1.0, 1.5, 2.0, 3.0] {
            check_derivatives(&make_prototype_q(1.3, q).unwrap());
        }
        for p in [-0.5, 0.0, 1.0, 1.9] {
            check_derivatives(&make_prototype_p(1.0, p).unwrap());
        }
    }

    #[test]
    fn custom_law_derives_stress_quantities() {
        let law = MaterialLaw::custom(
            1.0_f64,
            |s| s / (1.0 - s),
            |s| 1.0 / ((1.0 - s) * (1.0 - s)),
            |s| 2.0 / (1.0 - s).powi(3),
        )
        .unwrap();
        let q1 = make_prototype_q(1.0, 1.0).unwrap();
        for s in [0.1, 0.4, 0.8] {
            assert!((law.stress(s) - q1.stress(s)).abs() < 1e-14);
            assert!((law.stress_d1(s) - q1.stress_d1(s)).abs() < 1e-12);
            assert!((law.fbar(s) - q1.fbar(s)).abs() < 1e-9 * q1.fbar(s));
        }
        assert!((law.slope_at_zero() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fbar_reduces_to_inverse_cube_for_q1() {
        let law = make_prototype_q(1.0_f64, 1.0).unwrap();
        assert!((law.fbar(0.5) - 8.0).abs() < 1e-12);
        assert!((law.fbar(0.1) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn law_spec_round_trips_through_json() {
        let spec: LawSpec =
            serde_json::from_str(r#"{"family":"prototype_q","sigma_c":1.0,"q":1.0}"#).unwrap();
        assert_eq!(spec, LawSpec::PrototypeQ { sigma_c: 1.0, q: 1.0 });
        let law = spec.build::<f64>().unwrap();
        assert_eq!(law.spec(), Some(spec));
        assert!(serde_json::from_str::<LawSpec>(r#"{"family":"prototype_q","sigma_c":1.0,"q":1.0,"x":2}"#).is_err());
    }

    #[test]
    fn single_precision_evaluation() {
        let law = make_prototype_q(1.0_f32, 1.0).unwrap();
        assert!((law.eval(0.5) - 1.0).abs() < 1e-6);
    }
}
