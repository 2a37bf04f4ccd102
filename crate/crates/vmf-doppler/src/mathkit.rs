//! Special functions and numerical integration used by the analytic core.
//!
//! Everything here is self-contained: the scaled Bessel function and the
//! log-sinh are evaluated from their defining series, and the integrator
//! is an adaptive Simpson rule with interval bisection. All functions are
//! pure and safe to call from any number of threads.

use crate::{Error, Real, Result};

/// Power series below this magnitude, asymptotic expansion above.
const I0_SERIES_CUTOFF: f64 = 15.0;

/// Direct `ln(sinh x)` below this, overflow-free identity above.
const LOG_SINH_CUTOFF: f64 = 0.5;

/// Scaled modified Bessel function of the first kind, order zero:
/// `I0(x) * exp(-|x|)`.
///
/// Even in `x` and confined to `(0, 1]`, so it never overflows; callers
/// that need `ln I0(x)` use `|x| + ln bessel_i0e(x)`.
pub fn bessel_i0e<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_i0e: argument must be finite, got {x:?}"
        )));
    }
    Ok(i0e(x))
}

/// `bessel_i0e` without the domain check, for callers that guarantee a
/// finite argument.
#[inline]
pub(crate) fn i0e<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax < T::from_f64(I0_SERIES_CUTOFF).unwrap() {
        i0_series(ax) * (-ax).exp()
    } else {
        i0e_asymptotic(ax)
    }
}

/// `I0(x)` by its ascending series `sum_k (x/2)^{2k} / (k!)^2`.
/// Every term is positive, so there is no cancellation.
fn i0_series<T: Real>(ax: T) -> T {
    let q = ax * ax / T::from_f64(4.0).unwrap();
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..200usize {
        let kf = T::from_usize(k).unwrap();
        term = term * q / (kf * kf);
        sum = sum + term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    sum
}

/// `I0(x) e^{-x}` for large `x` by the asymptotic expansion
/// `(2 pi x)^{-1/2} sum_k a_k / x^k` with `a_0 = 1` and
/// `a_{k+1} = a_k (2k+1)^2 / (8 (k+1))`.
///
/// The series is divergent; summation stops at the smallest term. At the
/// series/asymptotic cutoff the truncation floor is ~1.4e-14 relative,
/// well inside the 1e-12 accuracy target.
fn i0e_asymptotic<T: Real>(ax: T) -> T {
    let eight = T::from_f64(8.0).unwrap();
    let mut term = T::one();
    let mut sum = T::one();
    for k in 0..40usize {
        let kf = T::from_usize(k).unwrap();
        let odd = T::from_usize(2 * k + 1).unwrap();
        let next = term * odd * odd / (eight * (kf + T::one()) * ax);
        if k >= 5 && next >= term {
            break;
        }
        term = next;
        sum = sum + term;
        if k >= 5 && term <= sum * T::epsilon() {
            break;
        }
    }
    sum / (T::TAU() * ax).sqrt()
}

/// `ln(sinh x)` for `x > 0`, without overflow for large `x`.
///
/// Above the cutoff this uses `x + ln(1 - e^{-2x}) - ln 2`; below it the
/// direct evaluation is accurate and `sinh` cannot overflow.
pub fn log_sinh<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::Domain(format!(
            "log_sinh: argument must be positive and finite, got {x:?}"
        )));
    }
    Ok(log_sinh_unchecked(x))
}

#[inline]
pub(crate) fn log_sinh_unchecked<T: Real>(x: T) -> T {
    if x > T::from_f64(LOG_SINH_CUTOFF).unwrap() {
        let decay = (-(x + x)).exp();
        x + (-decay).ln_1p() - T::LN_2()
    } else {
        x.sinh().ln()
    }
}

/// Accuracy controls for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T = f64> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> QuadratureSpec<T> {
    pub fn new(abs_tol: T, rel_tol: T, max_subdivisions: usize) -> Result<Self> {
        let tols_ok = abs_tol.is_finite()
            && abs_tol > T::zero()
            && rel_tol.is_finite()
            && rel_tol > T::zero();
        if !tols_ok || max_subdivisions < 1 {
            return Err(Error::Domain(
                "QuadratureSpec: tolerances must be positive and at least one subdivision allowed"
                    .into(),
            ));
        }
        Ok(QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }
}

impl<T: Real> Default for QuadratureSpec<T> {
    /// abs_tol 1e-10, rel_tol 1e-10, one million subdivisions.
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: T::from_f64(1e-10).unwrap(),
            rel_tol: T::from_f64(1e-10).unwrap(),
            max_subdivisions: 1_000_000,
        }
    }
}

/// Panels must bisect at least this many levels before they may be
/// accepted. Guards against narrow interior peaks (the integrands here
/// concentrate in regions of width ~1/sqrt(kappa)) that the first few
/// Simpson samples would miss entirely.
const MIN_DEPTH: u32 = 8;

#[derive(Clone, Copy)]
struct Panel<T> {
    a: T,
    m: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    estimate: T,
    tol: T,
    err_hint: T,
    depth: u32,
}

#[inline]
fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    let four = T::from_f64(4.0).unwrap();
    let six = T::from_f64(6.0).unwrap();
    (b - a) / six * (fa + four * fm + fb)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// Bisects intervals until the Richardson error estimate of each panel
/// meets its share of `max(abs_tol, rel_tol * |whole|)`. Smooth, bounded
/// integrands converge quickly; if the subdivision budget runs out the
/// best estimate is returned inside [`Error::Accuracy`].
pub fn integrate<T: Real, F>(f: F, a: T, b: T, spec: &QuadratureSpec<T>) -> Result<T>
where
    F: Fn(T) -> T,
{
    if !a.is_finite() || !b.is_finite() || a > b {
        return Err(Error::Domain(format!(
            "integrate: bounds must be finite with a <= b, got {a:?}..{b:?}"
        )));
    }
    if a == b {
        return Ok(T::zero());
    }
    let half = T::from_f64(0.5).unwrap();
    let fifteen = T::from_f64(15.0).unwrap();

    let m = (a + b) * half;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    let tol = spec.abs_tol.max(spec.rel_tol * whole.abs());

    let mut stack = vec![Panel {
        a,
        m,
        b,
        fa,
        fm,
        fb,
        estimate: whole,
        tol,
        err_hint: tol,
        depth: 0,
    }];
    let mut total = T::zero();
    let mut err_total = T::zero();
    let mut splits = 0usize;

    while let Some(p) = stack.pop() {
        let lm = (p.a + p.m) * half;
        let rm = (p.m + p.b) * half;
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(p.a, p.m, p.fa, flm, p.fm);
        let right = simpson(p.m, p.b, p.fm, frm, p.fb);
        let refined = left + right;
        let err = (refined - p.estimate) / fifteen;
        // bisection bottoms out once midpoints collide with endpoints
        let degenerate = !(p.a < lm && lm < p.m && p.m < rm && rm < p.b);
        if (p.depth >= MIN_DEPTH && err.abs() <= p.tol) || degenerate {
            total = total + refined + err;
            err_total = err_total + err.abs();
        } else {
            splits += 1;
            if splits > spec.max_subdivisions {
                let mut estimate = total + refined + err;
                let mut bound = err_total + err.abs();
                for q in &stack {
                    estimate = estimate + q.estimate;
                    bound = bound + q.err_hint;
                }
                return Err(Error::Accuracy {
                    estimate: estimate.to_f64().unwrap_or(f64::NAN),
                    error_bound: bound.to_f64().unwrap_or(f64::NAN),
                });
            }
            let child_tol = p.tol * half;
            let hint = err.abs() * half;
            stack.push(Panel {
                a: p.a,
                m: lm,
                b: p.m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                estimate: left,
                tol: child_tol,
                err_hint: hint,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                a: p.m,
                m: rm,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                estimate: right,
                tol: child_tol,
                err_hint: hint,
                depth: p.depth + 1,
            });
        }
    }
    Ok(total)
}
