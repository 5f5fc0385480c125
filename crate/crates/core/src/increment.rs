//! Area gained by the Voronoi flower when one exterior point joins the body.

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::flower::{self, SupportFn};
use crate::geom::{add, dot, scale, unit, Angle, Point};
use crate::quad;

/// `2^{5/2} / 3`.
pub const SMOOTH_INCREMENT_FACTOR: f64 = 1.885_618_083_164_126_7;

/// `A(F_o(K ∪ {x})) - A(F_o(K))`, computed as
/// `½∫ [max(p_o(K,θ), <x,u_θ>)² - p_o(K,θ)²] dθ` over the window where `x` wins.
pub fn increment_area_exact<S: SupportFn + ?Sized>(body: &S, x: Point) -> Result<f64> {
    let Some((a, b)) = flower::separating_window(body, x) else {
        return Ok(0.0);
    };
    let mut breaks = vec![a, b];
    for k in body.kinks() {
        let t = a + (k - a).rem_euclid(std::f64::consts::TAU);
        if t < b {
            breaks.push(t);
        }
    }
    breaks.sort_by(|p, q| p.total_cmp(q));
    let f = |t: f64| {
        let p = body.support_at([0.0, 0.0], t);
        let v = dot(x, unit(t)).max(p);
        0.5 * (v * v - p * p)
    };
    let rough: f64 = breaks.windows(2).map(|w| quad::gl(&f, w[0], w[1])).sum();
    let q = quad::integrate_breaks(f, &breaks, (1e-11 * rough.abs()).clamp(1e-300, 1e-10))?;
    Ok(q.value.max(0.0))
}

/// The point `s + h n_s` at height `h` above the boundary point with normal `u_θ`.
pub fn smooth_query_point(body: &ConvexBody, theta: Angle, h: f64) -> Result<Point> {
    let (s, _) = flower::boundary_point(body, theta)?;
    Ok(add(s, scale(theta.unit(), h)))
}

/// Leading-order increment `h^{3/2} 2^{5/2} 3^{-1} r_s^{-1/2} <s, n_s>`.
pub fn increment_area_smooth_asymptotic(body: &ConvexBody, theta: Angle, h: f64) -> Result<f64> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::Domain(format!("height must be positive, got {h}")));
    }
    let (_, r) = flower::boundary_point(body, theta)?;
    let sn = body.p_o(theta.value());
    Ok(h.powf(1.5) * SMOOTH_INCREMENT_FACTOR * sn / r.sqrt())
}

/// Local frame at polygon vertex `a_i`: unit edge direction towards `a_{i+1}` and outer normal.
pub fn vertex_frame(body: &ConvexBody, i: usize) -> Result<(Point, Point, Point)> {
    let p = body.as_polygon().ok_or(Error::UnsupportedKind("smooth"))?;
    let n = p.len();
    if i >= n {
        return Err(Error::Domain(format!("vertex index {i} out of range (n_K = {n})")));
    }
    let a = p.vertices()[i];
    let b = p.vertices()[(i + 1) % n];
    let l = p.edge_length(i);
    let t = [(b[0] - a[0]) / l, (b[1] - a[1]) / l];
    Ok((a, t, [t[1], -t[0]]))
}

/// `s_{a_i,ρ,α} = a_i + ρ (cos α t_i + sin α n_i)`; `α > 0` is outside edge `i`.
pub fn polygon_query_point(body: &ConvexBody, i: usize, rho: f64, alpha: f64) -> Result<Point> {
    let (a, t, n) = vertex_frame(body, i)?;
    let (s, c) = alpha.sin_cos();
    Ok([a[0] + rho * (c * t[0] + s * n[0]), a[1] + rho * (c * t[1] + s * n[1])])
}

/// Leading-order increment `α² (‖o_i‖/2) ρL/(L - ρ)` in the strip over edge `i`.
pub fn increment_area_polygon_asymptotic(body: &ConvexBody, i: usize, rho: f64, alpha: f64) -> Result<f64> {
    let p = body.as_polygon().ok_or(Error::UnsupportedKind("smooth"))?;
    vertex_frame(body, i)?;
    let l = p.edge_length(i);
    let along = rho * alpha.cos();
    if !(rho > 0.0 && along > 0.0 && along < l && alpha >= 0.0) {
        return Err(Error::Domain(format!(
            "point (ρ={rho}, α={alpha}) is outside the strip over edge {i}; use increment_area_exact"
        )));
    }
    let d = p.edge_height(i, [0.0, 0.0]);
    Ok(alpha * alpha * 0.5 * d * rho * l / (l - rho))
}
