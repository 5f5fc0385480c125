//! Adaptive Gauss–Legendre quadrature and small 1-D solvers.
//!
//! Each panel is integrated with a fixed-order Gauss–Legendre rule and
//! compared with the sum over its two halves; panels whose difference
//! exceeds their share of the tolerance are split further.

use std::cell::Cell;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 12;
const MAX_DEPTH: u32 = 48;
const MAX_PANELS: usize = 50_000;

/// Result of a quadrature together with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Fixed-order Gauss–Legendre on `[a, b]`.
#[inline]
pub fn gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..ORDER {
        s += w[i] * f(c + h * x[i]);
    }
    s * h
}

struct Acc {
    value: f64,
    error: f64,
    failed: bool,
    panels: usize,
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32, acc: &mut Acc) {
    let m = 0.5 * (a + b);
    let left = gl(f, a, m);
    let right = gl(f, m, b);
    let err = (whole - (left + right)).abs();
    acc.panels += 1;
    // below the rounding level of the panel sums there is nothing left to gain
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    let tiny = b - a <= 1e-13 * (1.0 + a.abs());
    if err <= tol.max(floor) || depth >= MAX_DEPTH || tiny || acc.panels >= MAX_PANELS {
        if err > tol.max(floor) {
            acc.failed = true;
        }
        acc.value += left + right;
        acc.error += err;
        return;
    }
    adapt(f, a, m, left, 0.5 * tol, depth + 1, acc);
    adapt(f, m, b, right, 0.5 * tol, depth + 1, acc);
}

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quad> {
    integrate_breaks(f, &[a, b], tol)
}

/// Adaptive integral over consecutive intervals of the sorted list `breaks`.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<Quad> {
    let total = breaks.last().copied().unwrap_or(0.0) - breaks.first().copied().unwrap_or(0.0);
    let mut acc = Acc { value: 0.0, error: 0.0, failed: false, panels: 0 };
    if total <= 0.0 {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let share = tol * (b - a) / total;
        let whole = gl(&f, a, b);
        adapt(&f, a, b, whole, share, 0, &mut acc);
    }
    if acc.failed && acc.error > tol {
        return Err(Error::Quadrature { achieved: acc.error, target: tol });
    }
    if !acc.value.is_finite() {
        return Err(Error::Quadrature { achieved: f64::INFINITY, target: tol });
    }
    Ok(Quad { value: acc.value, error: acc.error })
}

/// Sorted breakpoints covering `[0, 2π]`: `extra` angles (reduced) plus `base` uniform nodes.
pub fn periodic_breaks(extra: &[f64], base: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..=base).map(|k| TAU * k as f64 / base as f64).collect();
    v.extend(extra.iter().map(|&t| crate::geom::reduce(t)));
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    v
}

/// Integral over a full period, split at the given angles.
pub fn integrate_periodic<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], tol: f64) -> Result<Quad> {
    integrate_breaks(f, &periodic_breaks(breakpoints, 8), tol)
}

/// Integral over `[a, ∞)` of a function with a decaying tail.
///
/// Panels of doubling width are added until the integrand at the panel end
/// and the last panel's contribution are both negligible.
pub fn integrate_tail<F: Fn(f64) -> f64>(f: F, a: f64, width: f64, tol: f64) -> Result<Quad> {
    let mut lo = a;
    let mut w = width;
    let mut out = Quad { value: 0.0, error: 0.0 };
    for _ in 0..200 {
        let q = integrate(&f, lo, lo + w, tol * 0.25)?;
        out.value += q.value;
        out.error += q.error;
        lo += w;
        if f(lo).abs() < 1e-14 && q.value.abs() < tol * 0.25 {
            return Ok(out);
        }
        w *= 2.0;
    }
    Err(Error::Quadrature { achieved: f64::INFINITY, target: tol })
}

/// Integral over the real line of a function decaying in both directions.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, center: f64, width: f64, tol: f64) -> Result<Quad> {
    let r = integrate_tail(&f, center, width, 0.5 * tol)?;
    let l = integrate_tail(|t| f(2.0 * center - t), center, width, 0.5 * tol)?;
    Ok(Quad { value: r.value + l.value, error: r.error + l.error })
}

/// Nested 2-D integral `∫_{x0}^{x1} ∫_{y0(x)}^{y1(x)} f(x, y) dy dx`.
pub fn integrate_2d<F, L, U>(f: F, x0: f64, x1: f64, y0: L, y1: U, tol: f64) -> Result<Quad>
where
    F: Fn(f64, f64) -> f64,
    L: Fn(f64) -> f64,
    U: Fn(f64) -> f64,
{
    let worst = Cell::new(0.0f64);
    let inner_tol = tol / (x1 - x0).abs().max(1.0) * 0.1;
    let outer = integrate(
        |x| match integrate(|y| f(x, y), y0(x), y1(x), inner_tol) {
            Ok(q) => {
                worst.set(worst.get().max(q.error));
                q.value
            }
            Err(_) => {
                worst.set(f64::INFINITY);
                f64::NAN
            }
        },
        x0,
        x1,
        tol * 0.5,
    )?;
    let error = outer.error + worst.get() * (x1 - x0).abs();
    if !error.is_finite() {
        return Err(Error::Quadrature { achieved: error, target: tol });
    }
    Ok(Quad { value: outer.value, error })
}

/// Root of `f` on `[a, b]` by bisection, given `f(a)` and `f(b)` of opposite sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fx >= fc.max(fd) {
        (x, fx)
    } else if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximum of `f` over `[a, b]`: coarse grid then golden refinement around the best node.
pub fn grid_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize, tol: f64) -> (f64, f64) {
    let step = (b - a) / n as f64;
    let mut best = (a, f(a));
    for k in 1..=n {
        let t = a + step * k as f64;
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let refined = golden_max(&f, best.0 - step, best.0 + step, tol);
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}
