//! Bracketing root finders and golden-section minimization.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RootError<T: Real> {
    #[error("no sign change on [{a}, {b}] (f(a) = {fa}, f(b) = {fb})")]
    NoBracket { a: T, b: T, fa: T, fb: T },
    #[error("function value is not finite at x = {x}")]
    NonFinite { x: T },
    #[error("no convergence after {iterations} iterations (last bracket width {width})")]
    MaxIterations { iterations: usize, width: T },
}

/// Bisection on a sign-changing bracket until the width drops below `tol`.
pub fn bisect<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    mut a: T,
    mut b: T,
    tol: T,
) -> Result<T, RootError<T>> {
    let mut fa = f(a);
    let fb = f(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite { x: a });
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite { x: b });
    }
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { a, b, fa, fb });
    }
    for _ in 0..400 {
        let mid = T::lit(0.5) * (a + b);
        if (b - a).abs() <= tol || mid == a || mid == b {
            return Ok(mid);
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(RootError::NonFinite { x: mid });
        }
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(T::lit(0.5) * (a + b))
}

/// Brent's method (inverse quadratic interpolation safeguarded by bisection).
pub fn brent<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    tol: T,
) -> Result<T, RootError<T>> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite { x: a });
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite { x: b });
    }
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { a, b, fa, fb });
    }
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let half = T::lit(0.5);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let max_iter = 300;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + half * tol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = three * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol1 {
            b + d
        } else {
            b + tol1 * xm.signum()
        };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite { x: b });
        }
    }
    Err(RootError::MaxIterations {
        iterations: max_iter,
        width: (c - b).abs(),
    })
}

/// Golden-section search for a minimum of a unimodal function on `[a, b]`.
///
/// Returns `(x_min, f(x_min))`.
pub fn golden_section_min<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
