//! Starlike domains given by a polar radius function `d(θ)` about `o`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::body::{BodySpec, ConvexBody, PeriodicSpline};
use crate::error::{Error, Result};
use crate::geom::{self, dot, norm, unit, Point};
use crate::quad;

#[derive(Clone, Debug)]
enum Radial {
    /// Disk with the given center and radius (center strictly inside).
    Disk { center: Point, radius: f64 },
    /// `a0 + Σ a_k cos kθ + b_k sin kθ`.
    Fourier { a0: f64, cos: Vec<f64>, sin: Vec<f64> },
    /// Convex polygon around `o`.
    Polygon { vertices: Vec<Point> },
    /// `scale · F_o(K)`.
    Flower { body: Arc<ConvexBody>, scale: f64 },
    /// Periodic spline through samples.
    Grid(Arc<PeriodicSpline>),
}

/// A domain `{r u_θ : 0 ≤ r ≤ d(θ)}` with piecewise smooth `d > 0`.
#[derive(Clone, Debug)]
pub struct StarlikeDomain {
    radial: Radial,
    breakpoints: Vec<f64>,
}

impl StarlikeDomain {
    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if !(radius > norm(center)) {
            return Err(Error::Validation("disk domain must contain o in its interior".into()));
        }
        Self::build(Radial::Disk { center, radius }, Vec::new())
    }

    pub fn fourier(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::build(Radial::Fourier { a0, cos, sin }, Vec::new())
    }

    /// Polygonal domain; `o` must be strictly inside and vertices counterclockwise.
    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        ConvexBody::polygon(vertices.clone())?;
        let breaks = vertices.iter().map(|v| geom::polar_angle(*v)).collect();
        Self::build(Radial::Polygon { vertices }, breaks)
    }

    /// `scale · F_o(K)`: the region a conditioned nucleus set must avoid is `flower(K, 2)`.
    pub fn flower(body: ConvexBody, scale: f64) -> Result<Self> {
        if body.min_support() <= 0.0 {
            return Err(Error::Validation("o must be interior to K".into()));
        }
        let breaks = body.breakpoints();
        Self::build(Radial::Flower { body: Arc::new(body), scale }, breaks)
    }

    pub fn grid(samples: Vec<f64>) -> Result<Self> {
        Self::build(Radial::Grid(Arc::new(PeriodicSpline::new(samples)?)), Vec::new())
    }

    fn build(radial: Radial, mut breakpoints: Vec<f64>) -> Result<Self> {
        breakpoints.iter_mut().for_each(|t| *t = geom::reduce(*t));
        breakpoints.sort_by(|a, b| a.total_cmp(b));
        breakpoints.dedup();
        let d = StarlikeDomain { radial, breakpoints };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        let eps = 1e-5;
        for k in 0..2048 {
            let t = TAU * (k as f64 + 0.5) / 2048.0;
            let (d, d1, _) = self.eval(t);
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Validation(format!("radius must be positive: d({t:.4}) = {d}")));
            }
            let near_break = self.breakpoints.iter().any(|b| {
                let g = (t - b).rem_euclid(TAU);
                g < 2.0 * eps || g > TAU - 2.0 * eps
            });
            if !near_break {
                let fd = (self.eval(t + eps).0 - self.eval(t - eps).0) / (2.0 * eps);
                if (fd - d1).abs() > 1e-6 * (1.0 + d.abs()) {
                    return Err(Error::Validation(format!("d' inconsistent with d at θ={t:.4}")));
                }
            }
        }
        Ok(())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// The body `K` when the domain is a scaled flower.
    pub fn flower_body(&self) -> Option<(&ConvexBody, f64)> {
        match &self.radial {
            Radial::Flower { body, scale } => Some((body, *scale)),
            _ => None,
        }
    }

    /// `(d, d', d'')` at `θ`; one-sided (from the right) at breakpoints.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let t = theta;
        match &self.radial {
            Radial::Disk { center, radius } => {
                let (s, c) = t.sin_cos();
                let a = center[0] * c + center[1] * s;
                let b = -center[0] * s + center[1] * c;
                let q = (radius * radius - b * b).sqrt();
                let d = a + q;
                let d1 = b + a * b / q;
                let d2 = -a + (b * b - a * a) / q - a * a * b * b / (q * q * q);
                (d, d1, d2)
            }
            Radial::Fourier { a0, cos, sin } => {
                let (mut v, mut d1, mut d2) = (*a0, 0.0, 0.0);
                for k in 1..=cos.len().max(sin.len()) {
                    let a = cos.get(k - 1).copied().unwrap_or(0.0);
                    let b = sin.get(k - 1).copied().unwrap_or(0.0);
                    let kf = k as f64;
                    let (s, c) = (kf * t).sin_cos();
                    v += a * c + b * s;
                    d1 += kf * (-a * s + b * c);
                    d2 -= kf * kf * (a * c + b * s);
                }
                (v, d1, d2)
            }
            Radial::Polygon { vertices } => {
                let n = vertices.len();
                let tr = geom::reduce(t);
                let mut edge = n - 1;
                for i in 0..n {
                    let a = geom::polar_angle(vertices[i]);
                    let b = geom::polar_angle(vertices[(i + 1) % n]);
                    let inside = if a <= b { tr >= a && tr < b } else { tr >= a || tr < b };
                    if inside {
                        edge = i;
                        break;
                    }
                }
                let p = vertices[edge];
                let q = vertices[(edge + 1) % n];
                let e = geom::sub(q, p);
                let nrm = [e[1] / norm(e), -e[0] / norm(e)];
                let h = dot(p, nrm);
                let phi = geom::polar_angle(nrm);
                let x = t - phi;
                let d = h / x.cos();
                (d, d * x.tan(), d * (2.0 * x.tan().powi(2) + 1.0))
            }
            Radial::Flower { body, scale } => match body.as_polygon() {
                Some(poly) => {
                    let a = poly.vertices()[poly.support_index(t)];
                    let u = unit(t);
                    let v = [-u[1], u[0]];
                    let p = dot(a, u);
                    (scale * p, scale * dot(a, v), -scale * p)
                }
                None => {
                    let (h, h1, h2) = body.triple(t).expect("smooth body");
                    let o = body.reference_origin();
                    let u = unit(t);
                    let v = [-u[1], u[0]];
                    let l = dot(o, u);
                    (scale * (h + l), scale * (h1 + dot(o, v)), scale * (h2 - l))
                }
            },
            Radial::Grid(s) => s.eval(t),
        }
    }

    #[inline]
    pub fn d(&self, theta: f64) -> f64 {
        match &self.radial {
            Radial::Flower { body, scale } => scale * body.p_o(theta),
            _ => self.eval(theta).0,
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        let r = norm(x);
        r == 0.0 || r <= self.d(geom::polar_angle(x))
    }

    /// Area `½∫ d² dθ`.
    pub fn area(&self) -> f64 {
        quad::integrate_periodic(|t| 0.5 * self.d(t).powi(2), &self.breakpoints, 1e-11)
            .map(|q| q.value)
            .unwrap_or(f64::NAN)
    }

    /// Upper bound of `d`.
    pub fn max_radius(&self) -> f64 {
        let mut m = self.breakpoints.iter().map(|&t| self.d(t)).fold(0.0, f64::max);
        m = m.max(quad::grid_max(|t| self.d(t), 0.0, TAU, 2048, 1e-12).1);
        match &self.radial {
            Radial::Polygon { vertices } => vertices.iter().map(|v| norm(*v)).fold(m, f64::max),
            Radial::Flower { body, scale } => m.max(scale * body.max_support()),
            _ => m * (1.0 + 1e-9),
        }
    }

    /// Smallest `s` with `2 F_o({v}) ⊆ s · D`, i.e. `sup_θ 2<v,u_θ>/d(θ)`.
    pub fn covering_scale(&self, v: Point) -> f64 {
        if norm(v) == 0.0 {
            return 0.0;
        }
        if let Radial::Flower { body, scale } = &self.radial {
            return 2.0 * body.gauge(v) / scale;
        }
        let f = |t: f64| 2.0 * dot(v, unit(t)) / self.d(t);
        let tv = geom::polar_angle(v);
        let mut best = quad::grid_max(f, tv - FRAC_PI_2, tv + FRAC_PI_2, 64, 1e-12).1;
        for &b in &self.breakpoints {
            best = best.max(f(b));
        }
        best.max(0.0)
    }

    /// Boundary as a closed polyline with `n` samples.
    pub fn outline(&self, n: usize) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                geom::scale(unit(t), self.d(t))
            })
            .collect()
    }
}

/// JSON description of a starlike domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "d", rename_all = "lowercase")]
pub enum DomainSpec {
    /// `coeffs = [a0, a1, b1, a2, b2, ...]`.
    Fourier { coeffs: Vec<f64> },
    Grid { samples: Vec<f64> },
    Disk {
        #[serde(default)]
        center: Point,
        radius: f64,
    },
    Polygon { vertices: Vec<Point> },
    Flower {
        body: BodySpec,
        #[serde(default = "two")]
        scale: f64,
    },
}

fn two() -> f64 {
    2.0
}

impl DomainSpec {
    pub fn build(&self) -> Result<StarlikeDomain> {
        match self {
            DomainSpec::Fourier { coeffs } => {
                let a0 = *coeffs.first().ok_or_else(|| Error::Validation("empty fourier coefficients".into()))?;
                let rest = &coeffs[1..];
                let cos = rest.iter().step_by(2).copied().collect();
                let sin = rest.iter().skip(1).step_by(2).copied().collect();
                StarlikeDomain::fourier(a0, cos, sin)
            }
            DomainSpec::Grid { samples } => StarlikeDomain::grid(samples.clone()),
            DomainSpec::Disk { center, radius } => StarlikeDomain::disk(*center, *radius),
            DomainSpec::Polygon { vertices } => StarlikeDomain::polygon(vertices.clone()),
            DomainSpec::Flower { body, scale } => StarlikeDomain::flower(body.build()?, *scale),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(d: &StarlikeDomain, t: f64) {
        let e = 1e-4;
        let (v, v1, v2) = d.eval(t);
        let (p, m) = (d.eval(t + e).0, d.eval(t - e).0);
        assert!(((p - m) / (2.0 * e) - v1).abs() < 1e-6, "d' at {t}");
        assert!(((p - 2.0 * v + m) / (e * e) - v2).abs() < 1e-4, "d'' at {t}");
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let doms = [
            StarlikeDomain::disk([0.3, -0.1], 1.0).unwrap(),
            StarlikeDomain::fourier(1.0, vec![0.0, 0.4], vec![0.1]).unwrap(),
            StarlikeDomain::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap(),
            StarlikeDomain::flower(ConvexBody::ellipse([0.1, 0.0], 1.5, 1.0, 0.2).unwrap(), 2.0).unwrap(),
        ];
        for d in &doms {
            for k in 0..50 {
                fd_check(d, 0.1 + 0.1237 * k as f64);
            }
        }
    }

    #[test]
    fn disk_radius_and_area() {
        let d = StarlikeDomain::disk([0.3, 0.0], 1.0).unwrap();
        assert!((d.d(0.0) - 1.3).abs() < 1e-15);
        assert!((d.d(std::f64::consts::PI) - 0.7).abs() < 1e-15);
        assert!((d.area() - std::f64::consts::PI).abs() < 1e-10);
        assert!(StarlikeDomain::disk([1.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn covering_scale_matches_gauge() {
        let k = ConvexBody::unit_square();
        let f = StarlikeDomain::flower(k.clone(), 2.0).unwrap();
        let g = StarlikeDomain::polygon(vec![[-2.0, -2.0], [2.0, -2.0], [2.0, 2.0], [-2.0, 2.0]]).unwrap();
        let v = [1.3, 0.4];
        assert!((f.covering_scale(v) - 1.3).abs() < 1e-12);
        // for the disk 2F_o(v) ⊆ sD iff 2<v,u> <= s d(θ) everywhere
        let disk = StarlikeDomain::disk([0.0, 0.0], 2.0).unwrap();
        assert!((disk.covering_scale(v) - norm(v)).abs() < 1e-9);
        assert!(g.covering_scale(v) > 0.0);
    }

    #[test]
    fn parses_json() {
        let d: DomainSpec = serde_json::from_str(r#"{"d":"fourier","coeffs":[1.0, 0.0, 0.0, 0.4]}"#).unwrap();
        let d = d.build().unwrap();
        assert!((d.d(0.0) - 1.4).abs() < 1e-15);
    }
}
