//! Maximal Voronoi flowers of starlike domains and the limit shape of the conditioned cell.
//!
//! A domain `D = {r u_θ : r ≤ d(θ)}` is inverted to the curve `u_θ / d(θ)`.
//! `D` is a Voronoi flower iff that curve bounds a convex set, which for a
//! polar curve reads `d + d'' ≥ 0` (with convex kinks at breakpoints). The
//! maximal flower inside `D` is the image of the convex hull of the inverted
//! curve: hull points give contact arcs and hull edges give circles through `o`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::cell::{distance_to_body, voronoi_zero_cell_at};
use crate::domain::StarlikeDomain;
use crate::error::{Error, Result};
use crate::geom::{self, cross, dot, norm, sub, unit, Point};
use crate::laws::{gamma_two_thirds, Functional};
use crate::quad;
use crate::sampler::sample_points_shell;
use crate::stats::{EstimatorReport, Welford};

const HULL_SAMPLES: usize = 8192;

/// Inversion with pole `o`: `x / ‖x‖²`.
pub fn invert(x: Point) -> Result<Point> {
    let n2 = dot(x, x);
    if n2 == 0.0 {
        return Err(Error::Domain("cannot invert the pole".into()));
    }
    Ok([x[0] / n2, x[1] / n2])
}

fn inverted(domain: &StarlikeDomain, t: f64) -> Point {
    geom::scale(unit(t), 1.0 / domain.d(t))
}

fn curvature_ok<F: Fn(f64) -> (f64, f64, f64)>(eval: F, breakpoints: &[f64]) -> bool {
    let n = 4096;
    let smooth = (0..n).all(|k| {
        let t = TAU * (k as f64 + 0.37) / n as f64;
        if breakpoints.iter().any(|b| (t - b).rem_euclid(TAU).min((b - t).rem_euclid(TAU)) < 1e-6) {
            return true;
        }
        let (d, _, d2) = eval(t);
        d + d2 >= -1e-7 * d
    });
    let e = 1e-7;
    smooth
        && breakpoints.iter().all(|&b| {
            let (d, left, _) = eval(b - e);
            let (_, right, _) = eval(b + e);
            right - left >= -1e-5 * d
        })
}

/// Whether `D` is (a dilate of) a Voronoi flower: its inverted boundary bounds a convex set.
pub fn is_voronoi_flower(domain: &StarlikeDomain) -> bool {
    curvature_ok(|t| domain.eval(t), domain.breakpoints())
}

/// A piece of the maximal flower boundary lying on a circle through `o`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillerArc {
    pub center: Point,
    pub radius: f64,
    /// Polar angles `[start, end]` with `start ∈ [0, 2π)` and `end > start`.
    pub angles: [f64; 2],
}

impl FillerArc {
    fn contains(&self, t: f64) -> bool {
        let g = (t - self.angles[0]).rem_euclid(TAU);
        g <= self.angles[1] - self.angles[0]
    }

    /// `(d̃, d̃', d̃'')` with `d̃(θ) = 2<c, u_θ>`.
    pub fn radial(&self, t: f64) -> (f64, f64, f64) {
        let u = unit(t);
        let v = [-u[1], u[0]];
        let d = 2.0 * dot(self.center, u);
        (d, 2.0 * dot(self.center, v), -d)
    }
}

/// Contact and filler arcs of the maximal Voronoi flower in a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowerDecomposition {
    /// `[start, end]`, same convention as filler angles.
    pub contact_arcs: Vec<[f64; 2]>,
    pub filler_arcs: Vec<FillerArc>,
    pub is_flower_already: bool,
}

impl FlowerDecomposition {
    fn filler_at(&self, t: f64) -> Option<&FillerArc> {
        self.filler_arcs.iter().find(|f| f.contains(t))
    }

    /// Radial function of the maximal flower and its derivatives.
    pub fn radial(&self, domain: &StarlikeDomain, t: f64) -> (f64, f64, f64) {
        match self.filler_at(t) {
            Some(f) => f.radial(t),
            None => domain.eval(t),
        }
    }

    /// Whether the maximal flower is itself a Voronoi flower (it always should be).
    pub fn passes_flower_test(&self, domain: &StarlikeDomain) -> bool {
        let mut breaks: Vec<f64> = domain.breakpoints().to_vec();
        for f in &self.filler_arcs {
            breaks.push(f.angles[0]);
            breaks.push(geom::reduce(f.angles[1]));
        }
        curvature_ok(|t| self.radial(domain, t), &breaks)
    }

    pub fn outline(&self, domain: &StarlikeDomain, n: usize) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                geom::scale(unit(t), self.radial(domain, t).0)
            })
            .collect()
    }
}

/// Monotone-chain hull, returning indices in counterclockwise order.
fn hull_indices(pts: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(pts[a][1].total_cmp(&pts[b][1])));
    let mut h: Vec<usize> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 { Box::new(idx.iter()) } else { Box::new(idx.iter().rev()) };
        for &i in iter {
            while h.len() >= start + 2 {
                let a = pts[h[h.len() - 2]];
                let b = pts[h[h.len() - 1]];
                if cross(sub(b, a), sub(pts[i], a)) <= 0.0 {
                    h.pop();
                } else {
                    break;
                }
            }
            h.push(i);
        }
        h.pop();
    }
    // rotate so indices increase cyclically from the smallest
    let k = h.iter().enumerate().min_by_key(|(_, &v)| v).map(|(k, _)| k).unwrap_or(0);
    h.rotate_left(k);
    h
}

/// Support of the inverted curve in direction `φ`, restricted to angles `[a, b]`.
fn local_support(domain: &StarlikeDomain, phi: f64, a: f64, b: f64) -> (f64, f64) {
    let u = unit(phi);
    let f = |t: f64| dot(inverted(domain, t), u);
    let mut best = quad::golden_max(f, a, b, 1e-14);
    for &bp in domain.breakpoints() {
        for shift in [-TAU, 0.0, TAU] {
            let t = bp + shift;
            if t > a && t < b && f(t) > best.1 {
                best = (t, f(t));
            }
        }
    }
    best
}

/// The maximal Voronoi flower contained in `domain`.
pub fn maximal_flower(domain: &StarlikeDomain) -> Result<FlowerDecomposition> {
    if is_voronoi_flower(domain) {
        return Ok(FlowerDecomposition { contact_arcs: vec![[0.0, TAU]], filler_arcs: Vec::new(), is_flower_already: true });
    }
    let mut thetas: Vec<f64> = (0..HULL_SAMPLES).map(|k| TAU * k as f64 / HULL_SAMPLES as f64).collect();
    thetas.extend_from_slice(domain.breakpoints());
    thetas.sort_by(|a, b| a.total_cmp(b));
    thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let m = thetas.len();
    let pts: Vec<Point> = thetas.iter().map(|&t| inverted(domain, t)).collect();
    let hull = hull_indices(&pts);
    let step = TAU / HULL_SAMPLES as f64;
    let scale = pts.iter().map(|p| norm(*p)).fold(0.0, f64::max);

    let mut fillers = Vec::new();
    for k in 0..hull.len() {
        let i = hull[k];
        let j = hull[(k + 1) % hull.len()];
        let gap = (j + m - i) % m;
        if gap < 2 {
            continue;
        }
        let (pi, pj) = (pts[i], pts[j]);
        let chord = sub(pj, pi);
        let len = norm(chord);
        let depth = (1..gap).map(|g| cross(chord, sub(pts[(i + g) % m], pi)) / len).fold(0.0, f64::max);
        if depth < 1e-10 * scale {
            continue;
        }
        let ta = thetas[i];
        let mut tb = thetas[j];
        if tb <= ta {
            tb += TAU;
        }
        let w = 4.0 * step;
        let phi0 = chord[1].atan2(chord[0]) - FRAC_PI_2;
        // M_b - M_a increases as φ turns counterclockwise
        let diff = |phi: f64| local_support(domain, phi, tb - w, tb + w).1 - local_support(domain, phi, ta - w, ta + w).1;
        let mut width = 0.01;
        let (mut lo, mut hi) = (phi0 - width, phi0 + width);
        while !(diff(lo) <= 0.0 && diff(hi) >= 0.0) {
            width *= 2.0;
            if width > 1.0 {
                return Err(Error::Domain("could not bracket a bitangent of the inverted boundary".into()));
            }
            lo = phi0 - width;
            hi = phi0 + width;
        }
        let phi = quad::bisect(diff, lo, hi, 1e-14);
        let (a, c) = local_support(domain, phi, ta - w, ta + w);
        let (b, _) = local_support(domain, phi, tb - w, tb + w);
        let n = unit(phi);
        let start = geom::reduce(a);
        let end = start + (b - a);
        fillers.push(FillerArc { center: geom::scale(n, 0.5 / c), radius: 0.5 / c, angles: [start, end] });
    }
    if fillers.is_empty() {
        // curvature test failed only within tolerance of the hull
        return Ok(FlowerDecomposition { contact_arcs: vec![[0.0, TAU]], filler_arcs: Vec::new(), is_flower_already: false });
    }
    fillers.sort_by(|x, y| x.angles[0].total_cmp(&y.angles[0]));
    let mut contact = Vec::new();
    for k in 0..fillers.len() {
        let end = fillers[k].angles[1];
        let mut next = fillers[(k + 1) % fillers.len()].angles[0];
        while next < end {
            next += TAU;
        }
        if next - end > 1e-12 {
            let s = geom::reduce(end);
            contact.push([s, s + (next - end)]);
        }
    }
    Ok(FlowerDecomposition { contact_arcs: contact, filler_arcs: fillers, is_flower_already: false })
}

/// Which arc of the decomposition a limit-curve sample comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "arc", content = "index", rename_all = "lowercase")]
pub enum ArcRef {
    Contact(usize),
    Filler(usize),
}

/// Dense counterclockwise polyline of the limit curve with per-sample provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCurve {
    pub points: Vec<Point>,
    pub provenance: Vec<ArcRef>,
    /// Polar angle of the flower boundary each sample comes from.
    pub angles: Vec<f64>,
}

/// `½ (d cos θ - d' sin θ, d sin θ + d' cos θ)` along contact arcs; each filler contributes its center.
pub fn antiorthotomic(domain: &StarlikeDomain) -> Result<LimitCurve> {
    antiorthotomic_with(domain, &maximal_flower(domain)?, 4096)
}

pub fn antiorthotomic_with(domain: &StarlikeDomain, dec: &FlowerDecomposition, n: usize) -> Result<LimitCurve> {
    let mut items: Vec<(f64, Point, ArcRef)> = Vec::new();
    for (k, arc) in dec.contact_arcs.iter().enumerate() {
        let len = arc[1] - arc[0];
        let m = ((n as f64 * len / TAU).ceil() as usize).max(2);
        for j in 0..=m {
            let t = arc[0] + len * j as f64 / m as f64;
            let (d, d1, _) = domain.eval(geom::reduce(t));
            let u = unit(t);
            let p = [0.5 * (d * u[0] - d1 * u[1]), 0.5 * (d * u[1] + d1 * u[0])];
            items.push((t, p, ArcRef::Contact(k)));
        }
    }
    for (k, f) in dec.filler_arcs.iter().enumerate() {
        items.push((0.5 * (f.angles[0] + f.angles[1]), f.center, ArcRef::Filler(k)));
    }
    items.iter_mut().for_each(|it| it.0 = geom::reduce(it.0));
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = LimitCurve { points: Vec::new(), provenance: Vec::new(), angles: Vec::new() };
    for (t, p, r) in items {
        if out.points.last().is_some_and(|q| geom::dist(*q, p) < 1e-13) {
            continue;
        }
        out.points.push(p);
        out.provenance.push(r);
        out.angles.push(t);
    }
    if out.points.len() < 3 {
        return Err(Error::Domain("limit curve is degenerate".into()));
    }
    Ok(out)
}

/// The convex body bounded by the limit curve, as a dense polygon.
pub fn limit_body(domain: &StarlikeDomain) -> Result<ConvexBody> {
    let curve = antiorthotomic(domain)?;
    let mut v = curve.points;
    // drop samples that are not strictly convex after rounding
    loop {
        let n = v.len();
        let scale = v.iter().map(|p| norm(*p)).fold(0.0, f64::max);
        let bad = (0..n).find(|&i| {
            let a = v[(i + n - 1) % n];
            let b = v[i];
            let c = v[(i + 1) % n];
            cross(sub(b, a), sub(c, b)) <= 1e-14 * scale * scale
        });
        match bad {
            Some(i) if n > 3 => {
                v.remove(i);
            }
            _ => break,
        }
    }
    ConvexBody::polygon(v)
}

/// Limit constant of `functional` for the cell conditioned to avoid `domain`.
///
/// Integrates over the contact arcs only; filler arcs map to corners of the limit body.
pub fn domain_limit_constants(domain: &StarlikeDomain, functional: Functional) -> Result<f64> {
    let dec = maximal_flower(domain)?;
    domain_limit_constants_with(domain, &dec, functional)
}

pub fn domain_limit_constants_with(domain: &StarlikeDomain, dec: &FlowerDecomposition, functional: Functional) -> Result<f64> {
    let g = gamma_two_thirds();
    let (pre, f): (f64, fn(f64, f64) -> f64) = match functional {
        Functional::DefectArea => (2f64.powf(-8.0 / 3.0) * 3f64.powf(-1.0 / 3.0) * g, |d, s| s.powf(4.0 / 3.0) * d.powf(-2.0 / 3.0)),
        Functional::DefectPerimeter => (2f64.powf(1.0 / 3.0) * 3f64.powf(-4.0 / 3.0) * g, |d, s| s.cbrt() * d.powf(-2.0 / 3.0)),
        Functional::Vertices => (2f64.powf(4.0 / 3.0) * 3f64.powf(-4.0 / 3.0) * g, |d, s| s.cbrt() * d.cbrt()),
    };
    let mut total = 0.0;
    for arc in &dec.contact_arcs {
        let mut breaks = vec![arc[0], arc[1]];
        for &b in domain.breakpoints() {
            for shift in [0.0, TAU] {
                if b + shift > arc[0] && b + shift < arc[1] {
                    breaks.push(b + shift);
                }
            }
        }
        let nodes = 8;
        for k in 1..nodes {
            breaks.push(arc[0] + (arc[1] - arc[0]) * k as f64 / nodes as f64);
        }
        breaks.sort_by(|a, b| a.total_cmp(b));
        let q = quad::integrate_breaks(
            |t| {
                let (d, _, d2) = domain.eval(geom::reduce(t));
                f(d, (d + d2).max(0.0))
            },
            &breaks,
            1e-11,
        )?;
        total += q.value;
    }
    Ok(pre * total)
}

/// Mean Hausdorff distance between the zero cell conditioned to avoid `domain` and the limit body,
/// at each intensity in `lambdas`, all thinned from one sample per replicate.
pub fn limit_shape_hausdorff(domain: &StarlikeDomain, lambdas: &[f64], replicates: u64, seed: u64) -> Result<Vec<EstimatorReport>> {
    let top = lambdas.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) || replicates == 0 {
        return Err(Error::Validation("need a positive intensity and at least one replicate".into()));
    }
    let k = limit_body(domain)?;
    let excl = Arc::new(domain.clone());
    let rows: Vec<Result<Vec<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut s = sample_points_shell(top, excl.clone(), 1.0 + 3.0 / top.sqrt(), seed, r)?;
            lambdas
                .iter()
                .map(|&l| {
                    let c = voronoi_zero_cell_at(&mut s, l)?;
                    Ok(c.vertices.iter().map(|v| distance_to_body(&k, *v)).fold(0.0, f64::max))
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let w: Welford = rows.iter().map(|row| row[j]).collect();
            EstimatorReport::from_welford("hausdorff", l, &w, seed)
        })
        .collect())
}

/// Mean Hausdorff distance to the limit body at one intensity.
pub fn limit_shape_check(domain: &StarlikeDomain, lambda: f64, replicates: u64, seed: u64) -> Result<EstimatorReport> {
    Ok(limit_shape_hausdorff(domain, &[lambda], replicates, seed)?.remove(0))
}

/// Distance from `x` to the boundary of `domain` (dense search plus refinement).
pub fn distance_to_boundary(domain: &StarlikeDomain, x: Point) -> f64 {
    let f = |t: f64| -geom::dist(x, geom::scale(unit(t), domain.d(t)));
    let mut best = -quad::grid_max(f, 0.0, TAU, 2048, 1e-14).1;
    for &b in domain.breakpoints() {
        best = best.min(-f(b));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{theorem_constant, LawSpec, Model};
    use crate::BodyKind;

    #[test]
    fn inversion() {
        assert_eq!(invert([2.0, 0.0]).unwrap(), [0.5, 0.0]);
        assert!(invert([0.0, 0.0]).is_err());
        let p = invert(unit(0.7)).unwrap();
        assert!(geom::dist(p, unit(0.7)) < 1e-15);
    }

    #[test]
    fn flower_recognition() {
        assert!(is_voronoi_flower(&StarlikeDomain::disk([0.0, 0.0], 3.0).unwrap()));
        assert!(is_voronoi_flower(&StarlikeDomain::disk([0.3, 0.0], 1.0).unwrap()));
        let sq = StarlikeDomain::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
        assert!(!is_voronoi_flower(&sq));
        let fl = StarlikeDomain::flower(ConvexBody::unit_square(), 2.0).unwrap();
        assert!(is_voronoi_flower(&fl));
    }

    #[test]
    fn disk_decomposition_and_curve() {
        let d = StarlikeDomain::disk([0.0, 0.0], 2.0).unwrap();
        let dec = maximal_flower(&d).unwrap();
        assert!(dec.is_flower_already && dec.filler_arcs.is_empty());
        let c = antiorthotomic(&d).unwrap();
        assert!(c.points.iter().all(|p| (norm(*p) - 1.0).abs() < 1e-12));
        let k = ConvexBody::unit_disk();
        for f in [Functional::DefectArea, Functional::DefectPerimeter, Functional::Vertices] {
            let a = domain_limit_constants(&d, f).unwrap();
            let b = theorem_constant(LawSpec { model: Model::Voronoi, body_class: BodyKind::Smooth, functional: f }, &k).unwrap().0;
            assert!((a - b).abs() < 1e-8, "{f:?} {a} {b}");
        }
    }

    #[test]
    fn ellipse_flower_constants_match() {
        let k = ConvexBody::ellipse([0.15, -0.1], 1.4, 0.9, 0.3).unwrap();
        let d = StarlikeDomain::flower(k.clone(), 2.0).unwrap();
        for f in [Functional::DefectArea, Functional::DefectPerimeter, Functional::Vertices] {
            let a = domain_limit_constants(&d, f).unwrap();
            let b = theorem_constant(LawSpec { model: Model::Voronoi, body_class: BodyKind::Smooth, functional: f }, &k).unwrap().0;
            assert!((a - b).abs() < 1e-8, "{f:?} {a} {b}");
        }
        let c = antiorthotomic(&d).unwrap();
        for (p, t) in c.points.iter().zip(&c.angles).step_by(97) {
            let (s, _) = crate::flower::boundary_point(&k, geom::Angle::new(*t)).unwrap();
            assert!(geom::dist(*p, s) < 1e-8);
        }
    }

    #[test]
    fn off_center_disk_gives_ellipse() {
        let d = StarlikeDomain::disk([0.3, 0.0], 1.0).unwrap();
        let c = antiorthotomic(&d).unwrap();
        for p in &c.points {
            assert!((norm(*p) + geom::dist(*p, [0.3, 0.0]) - 1.0).abs() < 1e-8);
        }
        for p in c.points.iter().step_by(211) {
            assert!((norm(*p) - distance_to_boundary(&d, *p)).abs() < 1e-6);
        }
    }

    #[test]
    fn two_lobed_domain_has_fillers() {
        let d = StarlikeDomain::fourier(1.0, vec![0.0, 0.4], vec![]).unwrap();
        assert!(!is_voronoi_flower(&d));
        let dec = maximal_flower(&d).unwrap();
        assert!(!dec.filler_arcs.is_empty());
        for f in &dec.filler_arcs {
            assert!((norm(f.center) - f.radius).abs() < 1e-8);
            for t in [f.angles[0], f.angles[1]] {
                let (a, a1, _) = f.radial(t);
                let (b, b1, _) = d.eval(geom::reduce(t));
                assert!((a - b).abs() < 1e-8 && (a1 - b1).abs() < 1e-6, "{a} {b} {a1} {b1}");
            }
        }
        for k in 0..2048 {
            let t = TAU * k as f64 / 2048.0;
            assert!(dec.radial(&d, t).0 <= d.d(t) + 1e-9);
        }
        assert!((0..2048).any(|k| {
            let t = TAU * k as f64 / 2048.0;
            1.001 * dec.radial(&d, t).0 > d.d(t)
        }));
        assert!(dec.passes_flower_test(&d));
        let body = limit_body(&d).unwrap();
        assert!(body.area() > 0.0);
        let c = antiorthotomic_with(&d, &dec, 2048).unwrap();
        for (p, r) in c.points.iter().zip(&c.provenance).step_by(53) {
            if let ArcRef::Contact(_) = r {
                assert!((norm(*p) - distance_to_boundary(&d, *p)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn square_domain_decomposes() {
        let sq = StarlikeDomain::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
        let dec = maximal_flower(&sq).unwrap();
        assert_eq!(dec.filler_arcs.len(), 4);
        assert!(dec.passes_flower_test(&sq));
        assert!(domain_limit_constants(&sq, Functional::DefectArea).unwrap() > 0.0);
    }
}
