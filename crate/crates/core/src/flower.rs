//! Voronoi flowers and support-function geometry.
//!
//! The flower `F_x(K)` is the union of the disks with diameter `[x, s]`,
//! `s ∈ K`; its radial function about `x` is `max(p_x(K, ·), 0)`.

use std::f64::consts::{PI, TAU};

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::geom::{self, dot, norm, sub, unit, Angle, Point};
use crate::quad::{self, grid_max};

/// Default absolute tolerance for angular integrals.
pub const TOL: f64 = 1e-10;

/// Anything with a support function: bodies, cells, raw convex vertex lists.
pub trait SupportFn {
    /// `sup_{y} <y - x, u_θ>`.
    fn support_at(&self, x: Point, theta: f64) -> f64;
    /// Angles where the support function has a kink.
    fn kinks(&self) -> Vec<f64>;
}

impl SupportFn for ConvexBody {
    fn support_at(&self, x: Point, theta: f64) -> f64 {
        self.support(x, theta)
    }
    fn kinks(&self) -> Vec<f64> {
        self.breakpoints()
    }
}

/// Counterclockwise vertices of a convex polygon.
impl SupportFn for [Point] {
    fn support_at(&self, x: Point, theta: f64) -> f64 {
        let u = unit(theta);
        self.iter().map(|v| dot(*v, u)).fold(f64::NEG_INFINITY, f64::max) - dot(x, u)
    }
    fn kinks(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .filter_map(|i| {
                let e = sub(self[(i + 1) % n], self[i]);
                (norm(e) > 0.0).then(|| geom::polar_angle([e[1], -e[0]]))
            })
            .collect()
    }
}

impl SupportFn for Vec<Point> {
    fn support_at(&self, x: Point, theta: f64) -> f64 {
        self.as_slice().support_at(x, theta)
    }
    fn kinks(&self) -> Vec<f64> {
        self.as_slice().kinks()
    }
}

/// `p_x(K, θ)`.
pub fn support_function(body: &ConvexBody, x: Point, theta: Angle) -> f64 {
    body.support(x, theta.value())
}

/// Boundary point with outer normal `u_θ` and its curvature radius `h + h''`.
pub fn boundary_point(body: &ConvexBody, theta: Angle) -> Result<(Point, f64)> {
    let t = theta.value();
    let (h, h1, h2) = body.triple(t)?;
    let (s, c) = t.sin_cos();
    let o = body.reference_origin();
    Ok(([o[0] + h * c - h1 * s, o[1] + h * s + h1 * c], h + h2))
}

/// Whether `x` lies in `scale · F_o(K)`.
pub fn flower_membership<S: SupportFn + ?Sized>(body: &S, x: Point, scale: f64) -> bool {
    let r = norm(x);
    if r == 0.0 {
        return true;
    }
    r <= scale * body.support_at([0.0, 0.0], geom::polar_angle(x))
}

/// `A(F_x(K)) = ½∫ p_x² dθ` for `x` inside `K`.
pub fn flower_area<S: SupportFn + ?Sized>(body: &S, x: Point) -> Result<f64> {
    let kinks = body.kinks();
    let inside = (0..64).all(|k| body.support_at(x, TAU * k as f64 / 64.0) > 0.0)
        && kinks.iter().all(|&t| body.support_at(x, t) > 0.0);
    if !inside {
        return Err(Error::Domain("x is not interior to K; use flower_area_general".into()));
    }
    let q = quad::integrate_periodic(
        |t| {
            let p = body.support_at(x, t);
            0.5 * p * p
        },
        &kinks,
        TOL,
    )?;
    Ok(q.value)
}

/// Arc of directions `{θ : p_x(K, θ) < 0}` as `(start, end)` with `end - start < π`.
pub fn separating_window<S: SupportFn + ?Sized>(body: &S, x: Point) -> Option<(f64, f64)> {
    let g = |t: f64| -body.support_at(x, t);
    let mut best = grid_max(g, 0.0, TAU, 1024, 1e-13);
    let mut candidates = body.kinks();
    if x != [0.0, 0.0] {
        candidates.push(geom::polar_angle(x));
    }
    for t in candidates {
        let v = g(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    if best.1 <= 0.0 {
        return None;
    }
    let c = best.0;
    let a = quad::bisect(g, c - PI, c, 1e-15);
    let b = quad::bisect(g, c, c + PI, 1e-15);
    Some((a, b))
}

fn breaks_in(kinks: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut v = vec![a, b];
    for &k in kinks {
        let mut t = k;
        while t < a {
            t += TAU;
        }
        while t - TAU > a {
            t -= TAU;
        }
        if t > a && t < b {
            v.push(t);
        }
    }
    v.sort_by(|p, q| p.total_cmp(q));
    v
}

/// `R(x) = ½∫_{p_x ≤ 0} p_x² dθ`; zero for `x` in `K`.
pub fn flower_rest<S: SupportFn + ?Sized>(body: &S, x: Point) -> Result<f64> {
    let Some((a, b)) = separating_window(body, x) else {
        return Ok(0.0);
    };
    let q = quad::integrate_breaks(
        |t| {
            let p = body.support_at(x, t).min(0.0);
            0.5 * p * p
        },
        &breaks_in(&body.kinks(), a, b),
        TOL,
    )?;
    Ok(q.value)
}

/// `A(F_x(K)) = ½∫ max(p_x, 0)² dθ` for any `x`.
pub fn flower_area_general<S: SupportFn + ?Sized>(body: &S, x: Point) -> Result<f64> {
    let total = quad::integrate_periodic(
        |t| {
            let p = body.support_at(x, t);
            0.5 * p * p
        },
        &body.kinks(),
        TOL,
    )?;
    Ok(total.value - flower_rest(body, x)?)
}

/// `st(K) = (1/π)∫ p_o u_θ dθ`.
pub fn steiner_point<S: SupportFn + ?Sized>(body: &S) -> Result<Point> {
    let kinks = body.kinks();
    let sx = quad::integrate_periodic(|t| body.support_at([0.0, 0.0], t) * t.cos(), &kinks, 1e-12)?;
    let sy = quad::integrate_periodic(|t| body.support_at([0.0, 0.0], t) * t.sin(), &kinks, 1e-12)?;
    Ok([sx.value / PI, sy.value / PI])
}

/// `max_θ |p_o(a, θ) - p_o(b, θ)|` over a grid refined until it stabilises.
pub fn hausdorff_support<A: SupportFn + ?Sized, B: SupportFn + ?Sized>(a: &A, b: &B) -> f64 {
    let f = |t: f64| (a.support_at([0.0, 0.0], t) - b.support_at([0.0, 0.0], t)).abs();
    let mut kinks = a.kinks();
    kinks.extend(b.kinks());
    let mut n = 256;
    let mut prev = f64::NEG_INFINITY;
    loop {
        let mut best = kinks.iter().fold(0.0f64, |m, &t| m.max(f(t)));
        let mut arg = 0.0;
        for k in 0..n {
            let t = TAU * k as f64 / n as f64;
            let v = f(t);
            if v > best {
                best = v;
                arg = t;
            }
        }
        let step = TAU / n as f64;
        let refined = quad::golden_max(f, arg - step, arg + step, 1e-12).1;
        best = best.max(refined);
        if (best - prev).abs() < 1e-6 || n >= 1 << 16 {
            return best;
        }
        prev = best;
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    #[test]
    fn flower_area_examples() {
        let sq = ConvexBody::unit_square();
        assert!((flower_area(&sq, [0.0, 0.0]).unwrap() - (PI + 2.0)).abs() < 1e-9);
        let d = ConvexBody::disk([0.5, 0.0], 1.0).unwrap();
        assert!((flower_area(&d, [0.0, 0.0]).unwrap() - 1.125 * PI).abs() < 1e-10);
        let c = ConvexBody::disk([0.2, 0.1], 1.7).unwrap();
        assert!((flower_area(&c, [0.2, 0.1]).unwrap() - PI * 1.7 * 1.7).abs() < 1e-12);
        assert!(flower_area(&sq, [2.0, 0.0]).is_err());
    }

    #[test]
    fn membership_examples() {
        let d = ConvexBody::unit_disk();
        assert!(flower_membership(&d, [0.9, 0.0], 1.0));
        assert!(flower_membership(&d, [1.5, 0.0], 2.0));
        assert!(!flower_membership(&d, [2.1, 0.0], 2.0));
        assert!(!flower_membership(&ConvexBody::unit_square(), [1.2, 1.2], 1.0));
    }

    #[test]
    fn boundary_point_examples() {
        let (p, r) = boundary_point(&ConvexBody::disk([0.0, 0.0], 3.0).unwrap(), Angle::new(0.0)).unwrap();
        assert!((p[0] - 3.0).abs() < 1e-15 && p[1].abs() < 1e-15 && (r - 3.0).abs() < 1e-15);
        let (p, r) = boundary_point(&ConvexBody::disk([0.5, 0.0], 1.0).unwrap(), Angle::new(FRAC_PI_2)).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15 && (r - 1.0).abs() < 1e-15);
        assert!(boundary_point(&ConvexBody::unit_square(), Angle::new(0.0)).is_err());
    }

    #[test]
    fn rest_of_far_point() {
        let d = ConvexBody::unit_disk();
        let expect = quad::integrate(
            |t: f64| {
                let p = 3.0 * t.cos() + 1.0;
                if p < 0.0 {
                    0.5 * p * p
                } else {
                    0.0
                }
            },
            0.0,
            TAU,
            1e-13,
        )
        .unwrap()
        .value;
        let r = flower_rest(&d, [3.0, 0.0]).unwrap();
        // p_x = 1 - 3cosθ; the negative part is the mirror of the oracle's
        assert!((r - expect).abs() < 1e-10, "{r} vs {expect}");
        let a = flower_area_general(&d, [3.0, 0.0]).unwrap();
        assert!((a - (PI + PI / 2.0 * 9.0 - r)).abs() < 1e-9);
        assert_eq!(flower_rest(&d, [0.3, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn steiner_and_hausdorff() {
        let d = ConvexBody::disk([0.3, -0.2], 2.0).unwrap();
        let s = steiner_point(&d).unwrap();
        assert!((s[0] - 0.3).abs() < 1e-12 && (s[1] + 0.2).abs() < 1e-12);
        let a = ConvexBody::unit_disk();
        let b = ConvexBody::disk([0.0, 0.0], 1.25).unwrap();
        assert!((hausdorff_support(&a, &b) - 0.25).abs() < 1e-12);
        assert!((hausdorff_support(&ConvexBody::unit_square(), &a) - (SQRT_2 - 1.0)).abs() < 1e-9);
        assert_eq!(hausdorff_support(&a, &a), 0.0);
    }
}
