//! Zero cells as half-plane intersections, and their measurements.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::domain::StarlikeDomain;
use crate::error::{Error, Result};
use crate::flower::{self, SupportFn};
use crate::geom::{self, cross, dist, dot, norm, sub, unit, Angle, Point};
use crate::sampler::{LineSample, PointSample, Truncation};

const SIDE_EPS: f64 = 1e-12;
const MERGE_EPS: f64 = 1e-10;
const MAX_EXTENSIONS: u32 = 24;

/// What supports an edge of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Generator {
    /// Bisector of `[o, x]`.
    Point { x: Point },
    /// The line `<y, u_θ> = r`.
    Line { r: f64, theta: f64 },
    /// Edge of the initial bounding square.
    Bound,
}

impl Generator {
    /// Half-plane `<y, n> <= c` of the generator.
    fn half_plane(&self) -> Option<(Point, f64)> {
        match *self {
            Generator::Point { x } => Some((x, 0.5 * dot(x, x))),
            Generator::Line { r, theta } => Some((unit(theta), r)),
            Generator::Bound => None,
        }
    }
}

/// A convex polygon containing `o`; `generators[i]` supports the edge from vertex `i` to `i+1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCell {
    pub vertices: Vec<Point>,
    pub generators: Vec<Generator>,
    /// True iff no edge comes from the bounding square.
    pub closed: bool,
}

impl SupportFn for ZeroCell {
    fn support_at(&self, x: Point, theta: f64) -> f64 {
        self.vertices.support_at(x, theta)
    }
    fn kinks(&self) -> Vec<f64> {
        self.vertices.kinks()
    }
}

impl ZeroCell {
    /// The square `[-half, half]²` with all edges marked as bounds.
    pub fn bounding_square(half: f64) -> Self {
        ZeroCell {
            vertices: vec![[-half, -half], [half, -half], [half, half], [-half, half]],
            generators: vec![Generator::Bound; 4],
            closed: false,
        }
    }

    pub fn area(&self) -> f64 {
        geom::polygon_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        geom::polygon_perimeter(&self.vertices)
    }

    pub fn max_vertex_norm(&self) -> f64 {
        self.vertices.iter().map(|v| norm(*v)).fold(0.0, f64::max)
    }

    /// Whether the half-plane `<y, n> <= c` removes part of the cell.
    pub fn is_cut_by(&self, n: Point, c: f64) -> bool {
        let tol = SIDE_EPS * (1.0 + c.abs());
        self.vertices.iter().any(|v| dot(*v, n) - c > tol)
    }

    /// Intersect with `<y, n> <= c`, labelling the new edge with `g`. Returns whether it cut.
    pub fn clip(&mut self, n: Point, c: f64, g: Generator) -> bool {
        if !self.is_cut_by(n, c) {
            return false;
        }
        let tol = SIDE_EPS * (1.0 + c.abs());
        let k = self.vertices.len();
        let mut verts = Vec::with_capacity(k + 1);
        let mut gens = Vec::with_capacity(k + 1);
        for i in 0..k {
            let s = self.vertices[i];
            let e = self.vertices[(i + 1) % k];
            let ds = dot(s, n) - c;
            let de = dot(e, n) - c;
            let s_in = ds <= tol;
            let e_in = de <= tol;
            let cross_at = |ds: f64, de: f64| {
                let t = ds / (ds - de);
                [s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])]
            };
            match (s_in, e_in) {
                (true, true) => {
                    verts.push(s);
                    gens.push(self.generators[i]);
                }
                (true, false) => {
                    verts.push(s);
                    gens.push(self.generators[i]);
                    verts.push(if ds >= 0.0 { s } else { cross_at(ds, de) });
                    gens.push(g);
                }
                (false, true) => {
                    verts.push(if de >= 0.0 { e } else { cross_at(ds, de) });
                    gens.push(self.generators[i]);
                }
                (false, false) => {}
            }
        }
        // drop zero-length edges; the later vertex keeps its outgoing edge
        let mut i = 0;
        while verts.len() > 3 && i < verts.len() {
            let j = (i + 1) % verts.len();
            if dist(verts[i], verts[j]) < MERGE_EPS {
                verts.remove(i);
                gens.remove(i);
            } else {
                i += 1;
            }
        }
        self.vertices = verts;
        self.generators = gens;
        self.closed = !self.generators.contains(&Generator::Bound);
        true
    }

    /// Intersection of the bounding square with the bisector half-planes of `points`.
    ///
    /// Points are processed by increasing norm and skipped once they are too far to cut.
    pub fn from_points(points: &[Point], half: f64) -> Self {
        let mut pts: Vec<Point> = points.iter().copied().filter(|p| norm(*p) > 0.0).collect();
        pts.sort_by(|a, b| norm(*a).total_cmp(&norm(*b)));
        let mut cell = ZeroCell::bounding_square(half);
        let mut reach = cell.max_vertex_norm();
        for x in pts {
            if 0.5 * norm(x) >= reach {
                break;
            }
            if cell.clip(x, 0.5 * dot(x, x), Generator::Point { x }) {
                reach = cell.max_vertex_norm();
            }
        }
        cell
    }

    /// Intersection of the bounding square with `<y, u_θ> <= r` for each line `[r, θ]`.
    pub fn from_lines(lines: &[[f64; 2]], half: f64) -> Self {
        let mut ls: Vec<[f64; 2]> = lines.to_vec();
        ls.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut cell = ZeroCell::bounding_square(half);
        let mut reach = cell.max_vertex_norm();
        for [r, t] in ls {
            if r >= reach {
                break;
            }
            if cell.clip(unit(t), r, Generator::Line { r, theta: t }) {
                reach = cell.max_vertex_norm();
            }
        }
        cell
    }

    /// Whether every edge lies on its generator's line (to `tol`).
    pub fn edges_match_generators(&self, tol: f64) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| match self.generators[i].half_plane() {
            None => true,
            Some((nv, c)) => {
                let s = norm(nv);
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                ((dot(a, nv) - c) / s).abs() < tol && ((dot(b, nv) - c) / s).abs() < tol
            }
        })
    }

    /// Whether the vertices form a counterclockwise convex polygon around `o`.
    pub fn is_convex_ccw(&self) -> bool {
        let n = self.vertices.len();
        n >= 3
            && (0..n).all(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let c = self.vertices[(i + 2) % n];
                cross(sub(b, a), sub(c, b)) > -1e-12 && cross(a, b) > 0.0
            })
    }
}

fn needed_scale_points(cell: &ZeroCell, excl: Option<&StarlikeDomain>) -> f64 {
    match excl {
        Some(d) => cell.vertices.iter().map(|v| d.covering_scale(*v)).fold(0.0, f64::max),
        None => f64::INFINITY,
    }
}

/// Zero cell of the Voronoi tessellation of `{o} ∪ sample` at the sample's full intensity.
pub fn voronoi_zero_cell(sample: &mut PointSample) -> Result<ZeroCell> {
    let lambda = sample.lambda;
    voronoi_zero_cell_at(sample, lambda)
}

/// Zero cell using the points of `sample` that survive thinning to `lambda`.
///
/// The sample is extended until no point beyond the truncation can cut the
/// cell: `2·max|v| <= R` for disk truncation, `2F_o(cell) ⊆ s·D` for shells.
pub fn voronoi_zero_cell_at(sample: &mut PointSample, lambda: f64) -> Result<ZeroCell> {
    for _ in 0..=MAX_EXTENSIONS {
        let half = 2.0 * sample.truncation_radius();
        let cell = ZeroCell::from_points(&sample.thinned_points(lambda), half);
        let next = match sample.truncation {
            Truncation::Disk { radius } => {
                let need = 2.0 * cell.max_vertex_norm();
                if cell.closed && need <= radius {
                    return Ok(cell);
                }
                let target = if cell.closed { (need * 1.01).max(radius * 2.0) } else { radius * 2.0 };
                Truncation::Disk { radius: target }
            }
            Truncation::Shell { scale } => {
                let need = if cell.closed {
                    needed_scale_points(&cell, sample.exclusion.as_deref())
                } else {
                    f64::INFINITY
                };
                if need <= scale {
                    return Ok(cell);
                }
                let grown = 1.0 + 2.0 * (scale - 1.0).max(0.01);
                Truncation::Shell { scale: if need.is_finite() { grown.max(need * 1.02) } else { grown } }
            }
        };
        if sample.lambda == 0.0 || sample.exclusion.is_none() && !cell.closed && sample.extensions >= 1 {
            return Err(Error::UnboundedCell { extensions: sample.extensions, reached: sample.truncation_radius() });
        }
        sample.extend_to(next)?;
    }
    Err(Error::UnboundedCell { extensions: sample.extensions, reached: sample.truncation_radius() })
}

/// Zero cell of the line tessellation (the Crofton cell).
pub fn crofton_zero_cell(sample: &mut LineSample) -> Result<ZeroCell> {
    let lambda = sample.lambda;
    crofton_zero_cell_at(sample, lambda)
}

/// Crofton cell from the lines surviving thinning to `lambda`, extending as needed.
pub fn crofton_zero_cell_at(sample: &mut LineSample, lambda: f64) -> Result<ZeroCell> {
    for _ in 0..=MAX_EXTENSIONS {
        let half = 2.0 * sample.truncation_radius();
        let cell = ZeroCell::from_lines(&sample.thinned_lines(lambda), half);
        let next = match sample.truncation {
            Truncation::Disk { radius } => {
                let need = cell.max_vertex_norm();
                if cell.closed && need <= radius {
                    return Ok(cell);
                }
                let target = if cell.closed { (need * 1.01).max(radius * 2.0) } else { radius * 2.0 };
                Truncation::Disk { radius: target }
            }
            Truncation::Shell { scale } => {
                let need = match (&sample.body, cell.closed) {
                    (Some(k), true) => cell.vertices.iter().map(|v| k.gauge(*v)).fold(0.0, f64::max),
                    _ => f64::INFINITY,
                };
                if need <= scale {
                    return Ok(cell);
                }
                let grown = 1.0 + 2.0 * (scale - 1.0).max(0.01);
                Truncation::Shell { scale: if need.is_finite() { grown.max(need * 1.02) } else { grown } }
            }
        };
        if sample.lambda == 0.0 {
            return Err(Error::UnboundedCell { extensions: sample.extensions, reached: sample.truncation_radius() });
        }
        sample.extend_to(next)?;
    }
    Err(Error::UnboundedCell { extensions: sample.extensions, reached: sample.truncation_radius() })
}

/// Measurements of a cell relative to `K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub area: f64,
    pub perimeter: f64,
    pub n_vertices: usize,
    pub defect_area: f64,
    pub defect_perimeter: f64,
    pub hausdorff: f64,
    /// `A(F_o(cell)) - A(F_o(K))`.
    pub flower_defect: f64,
}

/// Distance from `v` to `K`.
pub fn distance_to_body(body: &ConvexBody, v: Point) -> f64 {
    match body.as_polygon() {
        Some(p) => {
            if body.contains(v) {
                return 0.0;
            }
            let vs = p.vertices();
            let n = vs.len();
            (0..n)
                .map(|i| {
                    let a = vs[i];
                    let b = vs[(i + 1) % n];
                    let e = sub(b, a);
                    let t = (dot(sub(v, a), e) / dot(e, e)).clamp(0.0, 1.0);
                    dist(v, [a[0] + t * e[0], a[1] + t * e[1]])
                })
                .fold(f64::INFINITY, f64::min)
        }
        None => {
            let f = |t: f64| dot(v, unit(t)) - body.p_o(t);
            crate::quad::grid_max(f, 0.0, TAU, 128, 1e-13).1.max(0.0)
        }
    }
}

/// Whether the cell contains `K` (support dominance on a 1024-angle grid plus kinks).
pub fn contains_body(cell: &ZeroCell, body: &ConvexBody, tol: f64) -> bool {
    if let Some(p) = body.as_polygon() {
        let n = cell.vertices.len();
        return p.vertices().iter().all(|a| {
            (0..n).all(|i| cross(sub(cell.vertices[(i + 1) % n], cell.vertices[i]), sub(*a, cell.vertices[i])) >= -tol)
        });
    }
    let mut angles: Vec<f64> = (0..1024).map(|k| TAU * k as f64 / 1024.0).collect();
    angles.extend(cell.kinks());
    angles.iter().all(|&t| cell.support_at([0.0, 0.0], t) >= body.p_o(t) - tol)
}

/// Area, perimeter, vertex count and defects of a closed cell.
pub fn cell_metrics(cell: &ZeroCell, body: &ConvexBody) -> Result<CellMetrics> {
    if !cell.closed {
        return Err(Error::Domain("cell is not closed".into()));
    }
    let area = cell.area();
    let perimeter = cell.perimeter();
    let hausdorff = if contains_body(cell, body, 1e-12) {
        cell.vertices.iter().map(|v| distance_to_body(body, *v)).fold(0.0, f64::max)
    } else {
        flower::hausdorff_support(cell, body)
    };
    let flower_defect = flower::flower_area(cell, [0.0, 0.0])? - flower::flower_area(body, [0.0, 0.0])?;
    Ok(CellMetrics {
        area,
        perimeter,
        n_vertices: cell.vertices.len(),
        defect_area: area - body.area(),
        defect_perimeter: perimeter - body.perimeter(),
        hausdorff,
        flower_defect,
    })
}

/// Support point of the cell in direction `u_θ`, in the frame `(t_s, n_s)` at `s(θ)`.
pub fn support_point(cell: &ZeroCell, body: &ConvexBody, theta: Angle) -> Result<(f64, f64)> {
    if !cell.closed {
        return Err(Error::Domain("cell is not closed".into()));
    }
    let (s, _) = flower::boundary_point(body, theta)?;
    let u = theta.unit();
    let mut best = 0;
    let mut bv = dot(cell.vertices[0], u);
    for (i, v) in cell.vertices.iter().enumerate().skip(1) {
        let d = dot(*v, u);
        if d > bv {
            bv = d;
            best = i;
        }
    }
    let m = sub(cell.vertices[best], s);
    Ok((dot(m, theta.normal()), dot(m, u)))
}

/// Local frame for vertex clouds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frame {
    /// `(t_s, n_s)` at the boundary point with normal `u_θ` of a smooth body.
    Smooth(Angle),
    /// Polar `(ρ, α)` at polygon vertex `i`, `α` measured from the edge towards `a_{i+1}`.
    Vertex(usize),
}

/// Cell vertices in a local frame.
pub fn vertex_cloud(cell: &ZeroCell, body: &ConvexBody, frame: Frame) -> Result<Vec<(f64, f64)>> {
    match frame {
        Frame::Smooth(theta) => {
            let (s, _) = flower::boundary_point(body, theta)?;
            let (u, t) = (theta.unit(), theta.normal());
            Ok(cell.vertices.iter().map(|v| (dot(sub(*v, s), t), dot(sub(*v, s), u))).collect())
        }
        Frame::Vertex(i) => {
            let (a, t, n) = crate::increment::vertex_frame(body, i)?;
            Ok(cell
                .vertices
                .iter()
                .map(|v| {
                    let w = sub(*v, a);
                    (norm(w), dot(w, n).atan2(dot(w, t)))
                })
                .collect())
        }
    }
}
