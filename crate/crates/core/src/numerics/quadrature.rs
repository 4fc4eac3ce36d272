//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature and Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::real::Real;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208814707513,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-13),
            rel_tol: T::lit(1e-12),
            max_intervals: 2000,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadError<T: Real> {
    #[error("quadrature did not converge: value {value}, estimated error {error}")]
    NotConverged { value: T, error: T },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: T },
}

struct Piece<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Piece<T> {}
impl<T: Real> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Result<(T, T), QuadError<T>> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { x: center });
    }
    let mut rk = fc * T::lit(WGK[10]);
    let mut rg = T::zero();
    for j in 0..10 {
        let dx = radius * T::lit(XGK[j]);
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { x: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { x: x2 });
        }
        rk = rk + T::lit(WGK[j]) * (f1 + f2);
        if j % 2 == 1 {
            rg = rg + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let value = rk * radius;
    let err = ((rk - rg) * radius).abs();
    Ok((value, err))
}

/// Integrates `f` over `[a, b]` by globally adaptive bisection of the worst interval.
///
/// The integrand is never evaluated at the endpoints.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    opts: QuadOptions<T>,
) -> Result<Estimate<T>, QuadError<T>> {
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    let (value, error) = kronrod(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 21;
    let floor = T::epsilon() * T::lit(50.0);
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(QuadError::NotConverged {
                value: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if (worst.b - worst.a).abs() <= floor * (worst.a.abs() + worst.b.abs()) {
            // The interval cannot be split further; accept what we have.
            heap.push(worst);
            if total_err <= T::lit(1e3) * tol {
                break;
            }
            return Err(QuadError::NotConverged {
                value: total,
                error: total_err,
            });
        }
        let (v1, e1) = kronrod(&mut f, worst.a, mid)?;
        let (v2, e2) = kronrod(&mut f, mid, worst.b)?;
        evaluations += 42;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Resum to limit drift from the running updates.
    let mut value = T::zero();
    let mut error = T::zero();
    for p in heap.iter() {
        value = value + p.value;
        error = error + p.error;
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[n - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[n - 1 - i] = T::lit(w);
    }
    (nodes, weights)
}
