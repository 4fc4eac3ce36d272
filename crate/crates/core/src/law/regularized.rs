//! The truncated density `f_eps` with the exponential junction near 1.

use serde::Serialize;
use thiserror::Error;

use super::MaterialLaw;
use crate::numerics::brent;
use crate::real::Real;

#[derive(Debug, Clone, Error, PartialEq, Serialize)]
pub enum RegularizeError {
    #[error("eps must lie in (0, 1), got {0}")]
    BadEps(f64),
    #[error("truncation equation sqrt(eps) f(s) = 1 - sqrt(eps) has no root in (0,1) for eps = {0}")]
    NoTruncationPoint(f64),
    #[error("junction is not admissible for eps = {eps}: beta = {beta} < 3 (1 - s_eps) = {bound}")]
    JunctionNotMonotone { eps: f64, beta: f64, bound: f64 },
}

/// Junction values at a point given by its distance `w = 1 - s` from 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint<T> {
    /// `1 - psi(s)`.
    pub gap: T,
    pub psi: T,
    pub dpsi: T,
}

/// `f_eps = sqrt(eps) f` on `[0, s_eps]` glued to `psi(s) = 1 - alpha exp(-beta/(1-s))`.
#[derive(Debug, Clone)]
pub struct RegularizedLaw<T> {
    base: MaterialLaw<T>,
    eps: T,
    sqrt_eps: T,
    s_eps: T,
    w_eps: T,
    ln_alpha: T,
    beta: T,
}

impl<T: Real> RegularizedLaw<T> {
    /// Builds `f_eps` with the truncation point fixed by `sqrt(eps) f(s_eps) = 1 - sqrt(eps)`.
    pub fn new(base: &MaterialLaw<T>, eps: T) -> Result<Self, RegularizeError> {
        if !(eps > T::zero() && eps < T::one()) {
            return Err(RegularizeError::BadEps(eps.to_f64_lossy()));
        }
        let r = eps.sqrt();
        let target = T::one() - r;
        let sig = base.sigma_c();
        let w_eps = match base.family() {
            // sigma (1 - w)/w = target/r in closed form.
            super::Family::PrototypeQ(q) if q == T::one() => r * sig / (target + r * sig),
            _ => {
                // Work in w = 1 - s so the root near s = 1 keeps relative accuracy.
                let g = |w: T| r * base.eval(T::one() - w) - target;
                let mut hi = T::lit(0.5);
                while g(hi) > T::zero() || !g(hi).is_finite() {
                    hi = hi + (T::one() - hi) * T::lit(0.5);
                    if T::one() - hi < T::epsilon() {
                        return Err(RegularizeError::NoTruncationPoint(eps.to_f64_lossy()));
                    }
                }
                let mut lo = hi;
                while g(lo) <= T::zero() {
                    lo = lo * T::lit(0.5);
                    if lo < T::min_positive_value().sqrt() {
                        return Err(RegularizeError::NoTruncationPoint(eps.to_f64_lossy()));
                    }
                }
                brent(g, lo, hi, T::epsilon() * lo)
                    .map_err(|_| RegularizeError::NoTruncationPoint(eps.to_f64_lossy()))?
            }
        };
        let s_eps = T::one() - w_eps;
        let fs = r * base.eval(s_eps);
        let gap = T::one() - fs;
        if !(gap > T::zero() && s_eps > T::zero()) {
            return Err(RegularizeError::NoTruncationPoint(eps.to_f64_lossy()));
        }
        let beta = r * base.eval_d1(s_eps) * w_eps * w_eps / gap;
        let bound = T::lit(3.0) * w_eps;
        if beta < bound {
            return Err(RegularizeError::JunctionNotMonotone {
                eps: eps.to_f64_lossy(),
                beta: beta.to_f64_lossy(),
                bound: bound.to_f64_lossy(),
            });
        }
        // alpha itself overflows for small eps; only its logarithm is stored.
        let ln_alpha = gap.ln() + beta / w_eps;
        Ok(Self {
            base: base.clone(),
            eps,
            sqrt_eps: r,
            s_eps,
            w_eps,
            ln_alpha,
            beta,
        })
    }

    pub fn base(&self) -> &MaterialLaw<T> {
        &self.base
    }
    pub fn eps(&self) -> T {
        self.eps
    }
    pub fn sqrt_eps(&self) -> T {
        self.sqrt_eps
    }
    pub fn s_eps(&self) -> T {
        self.s_eps
    }
    /// `1 - s_eps`.
    pub fn w_eps(&self) -> T {
        self.w_eps
    }
    pub fn ln_alpha(&self) -> T {
        self.ln_alpha
    }
    pub fn beta(&self) -> T {
        self.beta
    }

    /// Junction quantities at `w = 1 - s`, valid for `0 <= w <= w_eps`.
    pub fn tail(&self, w: T) -> TailPoint<T> {
        if w <= T::zero() {
            return TailPoint {
                gap: T::zero(),
                psi: T::one(),
                dpsi: T::zero(),
            };
        }
        let gap = (self.ln_alpha - self.beta / w).exp();
        if gap == T::zero() {
            return TailPoint {
                gap,
                psi: T::one(),
                dpsi: T::zero(),
            };
        }
        TailPoint {
            gap,
            psi: T::one() - gap,
            dpsi: self.beta * gap / (w * w),
        }
    }

    /// `f_eps(s)`, extended linearly below 0 and by 1 above 1.
    pub fn eval(&self, s: T) -> T {
        if s < T::zero() {
            self.sqrt_eps * self.base.slope_at_zero() * s
        } else if s <= self.s_eps {
            self.sqrt_eps * self.base.eval(s)
        } else if s < T::one() {
            self.tail(T::one() - s).psi
        } else {
            T::one()
        }
    }

    /// `f_eps'(s)`.
    pub fn eval_d1(&self, s: T) -> T {
        if s < T::zero() {
            self.sqrt_eps * self.base.slope_at_zero()
        } else if s <= self.s_eps {
            self.sqrt_eps * self.base.eval_d1(s)
        } else if s < T::one() {
            self.tail(T::one() - s).dpsi
        } else {
            T::zero()
        }
    }

    /// Value and derivative jumps at `s_eps`, relative to the value and slope there.
    pub fn junction_mismatch(&self) -> (T, T) {
        let left = self.sqrt_eps * self.base.eval(self.s_eps);
        let left_d = self.sqrt_eps * self.base.eval_d1(self.s_eps);
        let right = self.tail(self.w_eps);
        (
            ((left - right.psi) / left).abs(),
            ((left_d - right.dpsi) / left_d).abs(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::{make_prototype_p, make_prototype_q};

    #[test]
    fn q1_truncation_point_is_closed_form() {
        let law = make_prototype_q(1.0_f64, 1.0).unwrap();
        let reg = RegularizedLaw::new(&law, 0.01).unwrap();
        assert!((reg.s_eps() - 0.9).abs() < 1e-15);
        assert!((reg.eval(reg.s_eps()) - 0.9).abs() < 1e-14);
        assert_eq!(reg.eval(1.0), 1.0);
    }

    #[test]
    fn junction_is_c1_for_several_laws() {
        let laws = [
            make_prototype_q(1.0_f64, 1.0).unwrap(),
            make_prototype_q(2.0, 0.5).unwrap(),
            make_prototype_q(1.0, 2.0).unwrap(),
            make_prototype_p(1.0, 0.5).unwrap(),
        ];
        for law in &laws {
            for eps in [1e-2, 1e-3, 1e-5, 1e-8] {
                let reg = RegularizedLaw::new(law, eps).unwrap();
                let (dv, dd) = reg.junction_mismatch();
                assert!(dv < 1e-12 && dd < 1e-12, "{law:?} eps={eps}: {dv} {dd}");
            }
        }
    }

    #[test]
    fn truncation_width_scales_with_sqrt_eps() {
        let law = make_prototype_q(1.0_f64, 1.0).unwrap();
        for eps in [1e-6, 1e-8, 1e-10] {
            let reg = RegularizedLaw::new(&law, eps).unwrap();
            assert!((reg.w_eps() / eps.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn extension_outside_unit_interval() {
        let law = make_prototype_q(1.0_f64, 1.0).unwrap();
        let reg = RegularizedLaw::new(&law, 1e-2).unwrap();
        assert!((reg.eval(-0.5) + 0.05).abs() < 1e-15);
        assert!((reg.eval_d1(-0.5) - 0.1).abs() < 1e-15);
        assert_eq!(reg.eval(1.5), 1.0);
        assert_eq!(reg.eval_d1(1.5), 0.0);
        assert_eq!(reg.eval_d1(1.0), 0.0);
    }

    #[test]
    fn rejects_bad_eps() {
        let law = make_prototype_q(1.0_f64, 1.0).unwrap();
        assert!(RegularizedLaw::new(&law, 0.0).is_err());
        assert!(RegularizedLaw::new(&law, 1.0).is_err());
    }

    #[test]
    fn single_precision_regularization() {
        let law = make_prototype_q(1.0_f32, 1.0).unwrap();
        let reg = RegularizedLaw::new(&law, 1e-2).unwrap();
        assert!((reg.s_eps() - 0.9).abs() < 1e-6);
    }
}
