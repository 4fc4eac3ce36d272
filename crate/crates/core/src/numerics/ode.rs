//! Dormand–Prince 5(4) integrator with dense output and event location.

use thiserror::Error;

use crate::numerics::roots::brent;
use crate::real::Real;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: Option<T>,
    pub h_max: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-10),
            h_init: None,
            h_max: None,
            max_steps: 1_000_000,
        }
    }
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

/// Crossing direction required for an event to fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

/// A scalar event function `g(t, y)`; the event fires where `g` changes sign.
pub struct EventSpec<'a, T, const N: usize> {
    pub g: Box<dyn Fn(T, &[T; N]) -> T + 'a>,
    pub direction: Direction,
    pub terminal: bool,
}

impl<'a, T, const N: usize> EventSpec<'a, T, N> {
    pub fn new(g: impl Fn(T, &[T; N]) -> T + 'a, direction: Direction, terminal: bool) -> Self {
        Self {
            g: Box::new(g),
            direction,
            terminal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit<T, const N: usize> {
    pub index: usize,
    pub t: T,
    pub y: [T; N],
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone)]
pub struct Step<T, const N: usize> {
    pub t0: T,
    pub t1: T,
    pub y0: [T; N],
    pub y1: [T; N],
    r: [[T; N]; 5],
}

impl<T: Real, const N: usize> Step<T, N> {
    /// Dense-output value at `t` in `[t0, t1]`.
    pub fn eval(&self, t: T) -> [T; N] {
        let h = self.t1 - self.t0;
        let th = if h == T::zero() {
            T::zero()
        } else {
            (t - self.t0) / h
        };
        let th1 = T::one() - th;
        let mut out = [T::zero(); N];
        for i in 0..N {
            let r = &self.r;
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        out
    }
}

/// Result of an integration run.
#[derive(Debug, Clone)]
pub struct OdeOutcome<T, const N: usize> {
    pub t: T,
    pub y: [T; N],
    /// Accepted step endpoints including the initial point.
    pub samples: Vec<(T, [T; N])>,
    pub events: Vec<EventHit<T, N>>,
    /// Index of the terminal event that stopped the run.
    pub stopped_by: Option<usize>,
    pub steps: usize,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OdeError<T: Real> {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: T },
    #[error("maximum number of steps exceeded at t = {t}")]
    MaxSteps { t: T },
    #[error("right-hand side is not finite at t = {t}")]
    NonFinite { t: T },
}

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, k: &[[T; N]; 7], row: &[f64; 6], stages: usize) -> [T; N] {
    let mut out = *y;
    for (j, coef) in row.iter().enumerate().take(stages) {
        if *coef == 0.0 {
            continue;
        }
        let c = h * T::lit(*coef);
        for i in 0..N {
            out[i] = out[i] + c * k[j][i];
        }
    }
    out
}

fn finite<T: Real, const N: usize>(v: &[T; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (forward in time).
///
/// `observer` sees every accepted step. Events are located on the dense output
/// with Brent's method.
pub fn integrate<T, F, const N: usize>(
    mut rhs: F,
    t0: T,
    y0: [T; N],
    t_end: T,
    opts: &OdeOptions<T>,
    events: &[EventSpec<'_, T, N>],
    mut observer: impl FnMut(&Step<T, N>),
) -> Result<OdeOutcome<T, N>, OdeError<T>>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    let span = t_end - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k = [[T::zero(); N]; 7];
    k[0] = rhs(t, &y);
    if !finite(&k[0]) {
        return Err(OdeError::NonFinite { t });
    }
    let h_max = opts.h_max.unwrap_or(span.abs());
    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            let scale: T = y
                .iter()
                .fold(T::zero(), |m, v| m.max(v.abs()))
                .max(T::lit(1e-3));
            let slope: T = k[0].iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let guess = if slope > T::zero() {
                T::lit(0.01) * scale / slope
            } else {
                T::lit(1e-3) * span.abs()
            };
            guess.min(h_max).min(span.abs()).max(T::lit(1e-12) * span.abs())
        }
    };
    let mut g_prev: Vec<T> = events.iter().map(|e| (e.g)(t, &y)).collect();
    let mut out = OdeOutcome {
        t,
        y,
        samples: vec![(t, y)],
        events: Vec::new(),
        stopped_by: None,
        steps: 0,
    };
    let safety = T::lit(0.9);
    let min_fac = T::lit(0.2);
    let max_fac = T::lit(10.0);
    let fifth = T::lit(0.2);
    let mut rejected_last = false;
    while t < t_end {
        if out.steps >= opts.max_steps {
            return Err(OdeError::MaxSteps { t });
        }
        if t + h > t_end {
            h = t_end - t;
        }
        if h <= T::epsilon() * t.abs().max(T::one()) * T::lit(4.0) {
            return Err(OdeError::StepUnderflow { t });
        }
        for s in 1..7 {
            let ys = axpy(&y, h, &k, &A[s], s);
            k[s] = rhs(t + T::lit(C[s]) * h, &ys);
        }
        let y_new = axpy(&y, h, &k, &A[6], 6);
        let mut err_sq = T::zero();
        for i in 0..N {
            let mut e = T::zero();
            for (s, coef) in E.iter().enumerate() {
                e = e + T::lit(*coef) * k[s][i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = h * e / sc;
            err_sq = err_sq + r * r;
        }
        let err = (err_sq / T::lit(N as f64)).sqrt();
        if !err.is_finite() || !finite(&y_new) {
            h = h * T::lit(0.25);
            rejected_last = true;
            continue;
        }
        if err > T::one() {
            let fac = (safety * err.powf(-fifth)).max(min_fac);
            h = h * fac;
            rejected_last = true;
            continue;
        }
        // Accepted: build the continuous extension.
        let mut r = [[T::zero(); N]; 5];
        for i in 0..N {
            let dy = y_new[i] - y[i];
            let bspl = h * k[0][i] - dy;
            r[0][i] = y[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h * k[6][i] - bspl;
            let mut acc = T::zero();
            for (s, coef) in D.iter().enumerate() {
                acc = acc + T::lit(*coef) * k[s][i];
            }
            r[4][i] = h * acc;
        }
        let step = Step {
            t0: t,
            t1: t + h,
            y0: y,
            y1: y_new,
            r,
        };
        out.steps += 1;
        observer(&step);

        let mut first_terminal: Option<EventHit<T, N>> = None;
        for (idx, ev) in events.iter().enumerate() {
            let g1 = (ev.g)(step.t1, &step.y1);
            let g0 = g_prev[idx];
            g_prev[idx] = g1;
            let crossed = g0 != T::zero() && (g1 == T::zero() || g0.signum() != g1.signum());
            if !crossed {
                continue;
            }
            let rising = g1 > g0;
            let wanted = match ev.direction {
                Direction::Either => true,
                Direction::Rising => rising,
                Direction::Falling => !rising,
            };
            if !wanted {
                continue;
            }
            let te = if g1 == T::zero() {
                step.t1
            } else {
                let tol = T::epsilon() * T::lit(4.0) * step.t1.abs().max(T::one());
                brent(|s| (ev.g)(s, &step.eval(s)), step.t0, step.t1, tol).unwrap_or(step.t1)
            };
            let hit = EventHit {
                index: idx,
                t: te,
                y: step.eval(te),
            };
            if ev.terminal {
                match &first_terminal {
                    Some(prev) if prev.t <= te => {}
                    _ => first_terminal = Some(hit),
                }
            } else {
                out.events.push(hit);
            }
        }
        if let Some(hit) = first_terminal {
            // Drop non-terminal events past the stopping point.
            out.events.retain(|e| e.t <= hit.t);
            out.events.push(hit);
            out.t = hit.t;
            out.y = hit.y;
            out.stopped_by = Some(hit.index);
            out.samples.push((hit.t, hit.y));
            return Ok(out);
        }

        t = step.t1;
        y = y_new;
        k[0] = k[6];
        out.samples.push((t, y));
        let fac = if err == T::zero() {
            max_fac
        } else {
            (safety * err.powf(-fifth)).min(max_fac).max(min_fac)
        };
        let fac = if rejected_last { fac.min(T::one()) } else { fac };
        rejected_last = false;
        h = (h * fac).min(h_max);
    }
    out.t = t;
    out.y = y;
    Ok(out)
}
