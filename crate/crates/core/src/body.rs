//! Planar convex bodies given by a support-function triple or a polygon.
//!
//! All support values are measured from the coordinate origin `o` unless a
//! point is passed explicitly; `h`, `h1`, `h2` are taken about the body's
//! reference origin.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, cross, dot, norm, sub, unit, Point};
use crate::quad::{self, grid_max};

/// Grid used to validate smooth bodies.
pub const VALIDATION_GRID: usize = 4096;

/// Periodic cubic spline through samples on a uniform grid over `[0, 2π)`.
#[derive(Clone, Debug)]
pub struct PeriodicSpline {
    y: Vec<f64>,
    m: Vec<f64>,
    step: f64,
}

impl PeriodicSpline {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if n < 4 {
            return Err(Error::Validation("spline needs at least 4 samples".into()));
        }
        let step = TAU / n as f64;
        let rhs: Vec<f64> = (0..n)
            .map(|k| 6.0 * (y[(k + n - 1) % n] - 2.0 * y[k] + y[(k + 1) % n]) / (step * step))
            .collect();
        // the cyclic system M[k-1] + 4M[k] + M[k+1] = rhs is strictly diagonally dominant
        let mut m = vec![0.0; n];
        for _ in 0..200 {
            let mut delta = 0.0f64;
            for k in 0..n {
                let v = (rhs[k] - m[(k + n - 1) % n] - m[(k + 1) % n]) / 4.0;
                delta = delta.max((v - m[k]).abs());
                m[k] = v;
            }
            if delta <= 1e-15 * (1.0 + m.iter().fold(0.0f64, |a, b| a.max(b.abs()))) {
                break;
            }
        }
        Ok(PeriodicSpline { y, m, step })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Value and first two derivatives at `theta`.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let n = self.y.len();
        let t = geom::reduce(theta) / self.step;
        let k = (t.floor() as usize).min(n - 1);
        let j = (k + 1) % n;
        let h = self.step;
        let b = (t - k as f64) * h;
        let a = h - b;
        let (mk, mj) = (self.m[k], self.m[j]);
        let (yk, yj) = (self.y[k], self.y[j]);
        let v = mk * a.powi(3) / (6.0 * h)
            + mj * b.powi(3) / (6.0 * h)
            + (yk / h - mk * h / 6.0) * a
            + (yj / h - mj * h / 6.0) * b;
        let d1 = -mk * a * a / (2.0 * h) + mj * b * b / (2.0 * h) - (yk / h - mk * h / 6.0)
            + (yj / h - mj * h / 6.0);
        let d2 = (mk * a + mj * b) / h;
        (v, d1, d2)
    }
}

/// Support function as a trigonometric polynomial `a0 + Σ a_k cos kθ + b_k sin kθ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fourier {
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl Fourier {
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (mut v, mut d1, mut d2) = (self.a0, 0.0, 0.0);
        let n = self.cos.len().max(self.sin.len());
        for k in 1..=n {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let kf = k as f64;
            let (s, c) = (kf * t).sin_cos();
            v += a * c + b * s;
            d1 += kf * (-a * s + b * c);
            d2 -= kf * kf * (a * c + b * s);
        }
        (v, d1, d2)
    }
}

/// Smooth support-function models. Every model is expressed about the coordinate origin.
#[derive(Clone)]
pub enum SmoothModel {
    Disk { center: Point, radius: f64 },
    Ellipse { center: Point, a: f64, b: f64, rotation: f64 },
    Fourier(Fourier),
    Grid(Arc<PeriodicSpline>),
}

impl std::fmt::Debug for SmoothModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SmoothModel::Disk { center, radius } => write!(f, "Disk({center:?}, {radius})"),
            SmoothModel::Ellipse { center, a, b, rotation } => {
                write!(f, "Ellipse({center:?}, {a}, {b}, {rotation})")
            }
            SmoothModel::Fourier(c) => write!(f, "Fourier({c:?})"),
            SmoothModel::Grid(s) => write!(f, "Grid({} samples)", s.len()),
        }
    }
}

impl SmoothModel {
    /// `(h, h', h'')` about the coordinate origin.
    fn triple(&self, t: f64) -> (f64, f64, f64) {
        match self {
            SmoothModel::Disk { center, radius } => {
                let (s, c) = t.sin_cos();
                let l = center[0] * c + center[1] * s;
                let dl = -center[0] * s + center[1] * c;
                (radius + l, dl, -l)
            }
            SmoothModel::Ellipse { center, a, b, rotation } => {
                let (s, c) = t.sin_cos();
                let l = center[0] * c + center[1] * s;
                let dl = -center[0] * s + center[1] * c;
                let u = t - rotation;
                let (su, cu) = u.sin_cos();
                let hh = (a * a * cu * cu + b * b * su * su).sqrt();
                let d = b * b - a * a;
                let h1 = d * su * cu / hh;
                let h2 = (d * (2.0 * u).cos() - h1 * h1) / hh;
                (hh + l, h1 + dl, h2 - l)
            }
            SmoothModel::Fourier(f) => f.eval(t),
            SmoothModel::Grid(s) => s.eval(t),
        }
    }
}

/// A convex polygon with counterclockwise vertices.
#[derive(Clone, Debug)]
pub struct Polygon {
    vertices: Vec<Point>,
    /// Outer normal angle of edge `i` (from vertex `i` to vertex `i+1`).
    normals: Vec<f64>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Validation(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::Validation("non-finite polygon vertex".into()));
        }
        for i in 0..n {
            let e0 = sub(vertices[(i + 1) % n], vertices[i]);
            let e1 = sub(vertices[(i + 2) % n], vertices[(i + 1) % n]);
            if cross(e0, e1) <= 0.0 {
                return Err(Error::Validation(format!(
                    "polygon is not strictly convex and counterclockwise at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        let normals = (0..n)
            .map(|i| {
                let e = sub(vertices[(i + 1) % n], vertices[i]);
                geom::polar_angle([e[1], -e[0]])
            })
            .collect();
        Ok(Polygon { vertices, normals })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Outer normal angles of the edges.
    pub fn normal_angles(&self) -> &[f64] {
        &self.normals
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let n = self.len();
        norm(sub(self.vertices[(i + 1) % n], self.vertices[i]))
    }

    /// Distance from `x` to the line through edge `i` (the support value in its normal direction).
    pub fn edge_height(&self, i: usize, x: Point) -> f64 {
        dot(sub(self.vertices[i], x), unit(self.normals[i]))
    }

    /// Index of the vertex maximizing `<a - x, u_θ>`, lowest index on ties.
    pub fn support_index(&self, theta: f64) -> usize {
        let u = unit(theta);
        let mut best = 0;
        let mut bv = dot(self.vertices[0], u);
        for (i, v) in self.vertices.iter().enumerate().skip(1) {
            let d = dot(*v, u);
            if d > bv {
                bv = d;
                best = i;
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Smooth(SmoothModel),
    Polygon(Polygon),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Smooth,
    Polygon,
}

/// An immutable planar convex body.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    shape: Shape,
    origin: Point,
}

impl ConvexBody {
    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::Validation(format!("disk radius must be positive, got {radius}")));
        }
        Self::smooth(SmoothModel::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        Self::disk([0.0, 0.0], 1.0).expect("unit disk is valid")
    }

    pub fn ellipse(center: Point, a: f64, b: f64, rotation: f64) -> Result<Self> {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::Validation("ellipse semi-axes must be positive".into()));
        }
        Self::smooth(SmoothModel::Ellipse { center, a, b, rotation })
    }

    pub fn fourier(coeffs: Fourier) -> Result<Self> {
        Self::smooth(SmoothModel::Fourier(coeffs))
    }

    /// Smooth body from support samples on a uniform grid of at least 512 angles.
    pub fn custom_grid(h: Vec<f64>) -> Result<Self> {
        if h.len() < 512 {
            return Err(Error::Validation(format!("custom grid needs >= 512 samples, got {}", h.len())));
        }
        Self::smooth(SmoothModel::Grid(Arc::new(PeriodicSpline::new(h)?)))
    }

    pub fn smooth(model: SmoothModel) -> Result<Self> {
        let body = ConvexBody { shape: Shape::Smooth(model), origin: [0.0, 0.0] };
        body.validate()?;
        Ok(body)
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        let body = ConvexBody { shape: Shape::Polygon(Polygon::new(vertices)?), origin: [0.0, 0.0] };
        body.validate()?;
        Ok(body)
    }

    /// The square `[-a, a]²`.
    pub fn square(a: f64) -> Result<Self> {
        Self::polygon(vec![[-a, -a], [a, -a], [a, a], [-a, a]])
    }

    pub fn unit_square() -> Self {
        Self::square(1.0).expect("square is valid")
    }

    /// Regular `n`-gon with circumradius `r`, first vertex at angle `phase`.
    pub fn regular_polygon(n: usize, r: f64, phase: f64) -> Result<Self> {
        Self::polygon((0..n).map(|k| geom::scale(unit(phase + TAU * k as f64 / n as f64), r)).collect())
    }

    /// Same body with a different reference origin; rejected unless strictly interior.
    pub fn with_origin(mut self, origin: Point) -> Result<Self> {
        self.origin = origin;
        self.validate()?;
        Ok(self)
    }

    pub fn reference_origin(&self) -> Point {
        self.origin
    }

    pub fn kind(&self) -> BodyKind {
        match self.shape {
            Shape::Smooth(_) => BodyKind::Smooth,
            Shape::Polygon(_) => BodyKind::Polygon,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.kind() == BodyKind::Smooth
    }

    pub fn as_polygon(&self) -> Option<&Polygon> {
        match &self.shape {
            Shape::Polygon(p) => Some(p),
            Shape::Smooth(_) => None,
        }
    }

    pub fn smooth_model(&self) -> Option<&SmoothModel> {
        match &self.shape {
            Shape::Smooth(m) => Some(m),
            Shape::Polygon(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match &self.shape {
            Shape::Polygon(p) => {
                for i in 0..p.len() {
                    if p.edge_height(i, self.origin) <= 0.0 {
                        return Err(Error::Validation(
                            "reference origin is not strictly inside the polygon".into(),
                        ));
                    }
                }
            }
            Shape::Smooth(m) => {
                let eps = 1e-5;
                for k in 0..VALIDATION_GRID {
                    let t = TAU * k as f64 / VALIDATION_GRID as f64;
                    let (h, h1, h2) = self.shifted(m.triple(t), t);
                    if !(h.is_finite() && h1.is_finite() && h2.is_finite()) {
                        return Err(Error::Validation(format!("non-finite support at θ={t}")));
                    }
                    if h <= 0.0 {
                        return Err(Error::Validation(format!(
                            "reference origin not interior: h({t:.6}) = {h:.3e}"
                        )));
                    }
                    if h + h2 <= 0.0 {
                        return Err(Error::Validation(format!(
                            "curvature radius h + h'' = {:.3e} <= 0 at θ={t:.6}",
                            h + h2
                        )));
                    }
                    let fd = (self.shifted(m.triple(t + eps), t + eps).0
                        - self.shifted(m.triple(t - eps), t - eps).0)
                        / (2.0 * eps);
                    if (fd - h1).abs() > 1e-6 * (1.0 + h.abs()) {
                        return Err(Error::Validation(format!(
                            "h' inconsistent with h at θ={t:.6}: {h1} vs {fd}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn shifted(&self, (h, h1, h2): (f64, f64, f64), t: f64) -> (f64, f64, f64) {
        let [ox, oy] = self.origin;
        if ox == 0.0 && oy == 0.0 {
            return (h, h1, h2);
        }
        let (s, c) = t.sin_cos();
        let l = ox * c + oy * s;
        let dl = -ox * s + oy * c;
        (h - l, h1 - dl, h2 + l)
    }

    /// `(h, h', h'')` about the reference origin (smooth bodies only).
    pub fn triple(&self, theta: f64) -> Result<(f64, f64, f64)> {
        match &self.shape {
            Shape::Smooth(m) => Ok(self.shifted(m.triple(theta), theta)),
            Shape::Polygon(_) => Err(Error::UnsupportedKind("polygon")),
        }
    }

    /// Support value `sup_{y∈K} <y - x, u_θ>`.
    #[inline]
    pub fn support(&self, x: Point, theta: f64) -> f64 {
        let u = unit(theta);
        match &self.shape {
            Shape::Smooth(m) => m.triple(theta).0 - dot(x, u),
            Shape::Polygon(p) => {
                let mut best = f64::NEG_INFINITY;
                for v in &p.vertices {
                    let d = dot(*v, u);
                    if d > best {
                        best = d;
                    }
                }
                best - dot(x, u)
            }
        }
    }

    /// Support about the coordinate origin.
    #[inline]
    pub fn p_o(&self, theta: f64) -> f64 {
        self.support([0.0, 0.0], theta)
    }

    /// Angles where the support function is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Polygon(p) => p.normals.clone(),
            Shape::Smooth(_) => Vec::new(),
        }
    }

    /// Upper bound for `p_o` over all angles.
    pub fn max_support(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(p) => p.vertices.iter().map(|v| norm(*v)).fold(0.0, f64::max),
            Shape::Smooth(_) => grid_max(|t| self.p_o(t), 0.0, TAU, 1024, 1e-10).1,
        }
    }

    /// Lower bound for `p_o` over all angles (the inradius about `o`).
    pub fn min_support(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(p) => (0..p.len()).map(|i| p.edge_height(i, [0.0, 0.0])).fold(f64::INFINITY, f64::min),
            Shape::Smooth(_) => -grid_max(|t| -self.p_o(t), 0.0, TAU, 1024, 1e-10).1,
        }
    }

    /// Minkowski gauge `inf{t > 0 : x ∈ tK}` about `o`.
    pub fn gauge(&self, x: Point) -> f64 {
        match &self.shape {
            Shape::Polygon(p) => (0..p.len())
                .map(|i| dot(x, unit(p.normals[i])) / p.edge_height(i, [0.0, 0.0]))
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0),
            Shape::Smooth(_) => {
                if x == [0.0, 0.0] {
                    return 0.0;
                }
                let f = |t: f64| dot(x, unit(t)) / self.p_o(t);
                let tx = geom::polar_angle(x);
                let (_, coarse) = grid_max(f, tx - std::f64::consts::PI, tx + std::f64::consts::PI, 256, 1e-12);
                coarse.max(0.0)
            }
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        self.gauge(x) <= 1.0
    }

    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(p) => geom::polygon_area(&p.vertices),
            Shape::Smooth(m) => {
                quad::integrate_periodic(
                    |t| {
                        let (h, h1, _) = m.triple(t);
                        0.5 * (h * h - h1 * h1)
                    },
                    &[],
                    1e-11,
                )
                .map(|q| q.value)
                .unwrap_or(f64::NAN)
            }
        }
    }

    pub fn perimeter(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(p) => geom::polygon_perimeter(&p.vertices),
            Shape::Smooth(m) => quad::integrate_periodic(|t| m.triple(t).0, &[], 1e-11)
                .map(|q| q.value)
                .unwrap_or(f64::NAN),
        }
    }

    /// Boundary as a closed polyline (polygon vertices, or `n` support points).
    pub fn outline(&self, n: usize) -> Vec<Point> {
        match &self.shape {
            Shape::Polygon(p) => p.vertices.clone(),
            Shape::Smooth(m) => (0..n)
                .map(|k| {
                    let t = TAU * k as f64 / n as f64;
                    let (h, h1, _) = m.triple(t);
                    let (s, c) = t.sin_cos();
                    [h * c - h1 * s, h * s + h1 * c]
                })
                .collect(),
        }
    }

    /// Translate the body by `v` (reference origin moves with it).
    pub fn translated(&self, v: Point) -> Result<Self> {
        let shape = match &self.shape {
            Shape::Polygon(p) => Shape::Polygon(Polygon::new(p.vertices.iter().map(|a| geom::add(*a, v)).collect())?),
            Shape::Smooth(SmoothModel::Disk { center, radius }) => {
                Shape::Smooth(SmoothModel::Disk { center: geom::add(*center, v), radius: *radius })
            }
            Shape::Smooth(SmoothModel::Ellipse { center, a, b, rotation }) => Shape::Smooth(SmoothModel::Ellipse {
                center: geom::add(*center, v),
                a: *a,
                b: *b,
                rotation: *rotation,
            }),
            Shape::Smooth(SmoothModel::Fourier(f)) => {
                let mut f = f.clone();
                f.cos.resize(f.cos.len().max(1), 0.0);
                f.sin.resize(f.sin.len().max(1), 0.0);
                f.cos[0] += v[0];
                f.sin[0] += v[1];
                Shape::Smooth(SmoothModel::Fourier(f))
            }
            Shape::Smooth(SmoothModel::Grid(s)) => {
                let n = s.len();
                let h = (0..n)
                    .map(|k| {
                        let t = TAU * k as f64 / n as f64;
                        s.eval(t).0 + dot(v, unit(t))
                    })
                    .collect();
                Shape::Smooth(SmoothModel::Grid(Arc::new(PeriodicSpline::new(h)?)))
            }
        };
        let body = ConvexBody { shape, origin: geom::add(self.origin, v) };
        body.validate()?;
        Ok(body)
    }
}

/// JSON description of a body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BodySpec {
    Polygon {
        vertices: Vec<Point>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        origin: Option<Point>,
    },
    Smooth {
        model: String,
        #[serde(default)]
        params: serde_json::Value,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        origin: Option<Point>,
    },
}

#[derive(Deserialize)]
struct DiskParams {
    radius: f64,
    #[serde(default)]
    center: Point,
}

#[derive(Deserialize)]
struct EllipseParams {
    a: f64,
    b: f64,
    #[serde(default)]
    center: Point,
    #[serde(default)]
    rotation: f64,
}

#[derive(Deserialize)]
struct GridParams {
    h: Vec<f64>,
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        let (body, origin) = match self {
            BodySpec::Polygon { vertices, origin } => (ConvexBody::polygon(vertices.clone())?, *origin),
            BodySpec::Smooth { model, params, origin } => {
                let p = params.clone();
                let body = match model.as_str() {
                    "disk" => {
                        let d: DiskParams = serde_json::from_value(p)?;
                        ConvexBody::disk(d.center, d.radius)?
                    }
                    "ellipse" => {
                        let e: EllipseParams = serde_json::from_value(p)?;
                        ConvexBody::ellipse(e.center, e.a, e.b, e.rotation)?
                    }
                    "custom-grid" => {
                        let g: GridParams = serde_json::from_value(p)?;
                        ConvexBody::custom_grid(g.h)?
                    }
                    "fourier" => ConvexBody::fourier(serde_json::from_value(p)?)?,
                    other => return Err(Error::Validation(format!("unknown smooth model '{other}'"))),
                };
                (body, *origin)
            }
        };
        match origin {
            Some(o) => body.with_origin(o),
            None => Ok(body),
        }
    }

    pub fn from_json(s: &str) -> Result<ConvexBody> {
        let spec: BodySpec = serde_json::from_str(s)?;
        spec.build()
    }
}
