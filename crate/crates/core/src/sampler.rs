//! Seeded samplers for the conditioned point and line processes and the nucleus.
//!
//! Two truncations are supported. `Disk` draws a homogeneous process in a disk
//! and discards points in the excluded region; `Shell` draws directly in the
//! star-shaped shell `{ρ(θ) < r ≤ s ρ(θ)}` around the excluded region. Both are
//! extended in place with fresh substreams, so a sample at a larger truncation
//! always contains the smaller one as a prefix.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::domain::StarlikeDomain;
use crate::error::{Error, Result};
use crate::flower::{self, steiner_point};
use crate::geom::{norm, unit, Point};
use crate::rng::{stream_id, stream_rng, Lane};

/// How far the sample reaches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Truncation {
    /// Everything within `radius` of `o`.
    Disk { radius: f64 },
    /// Everything within `scale` times the exclusion radius in each direction.
    Shell { scale: f64 },
}

fn poisson<R: Rng>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 || !mean.is_finite() {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as usize
}

/// A realisation of the Poisson process of intensity `lambda` outside an excluded region.
#[derive(Clone, Debug)]
pub struct PointSample {
    pub points: Vec<Point>,
    /// Independent uniform marks, used to thin the sample to lower intensities.
    pub marks: Vec<f64>,
    pub lambda: f64,
    pub truncation: Truncation,
    pub seed: u64,
    pub replicate: u64,
    pub exclusion: Option<Arc<StarlikeDomain>>,
    pub extensions: u32,
    exclusion_area: f64,
    exclusion_max: f64,
}

impl PointSample {
    /// A fixed point set (no exclusion); extensions add nothing when `lambda == 0`.
    pub fn from_points(points: Vec<Point>, radius: f64) -> Self {
        let marks = vec![0.0; points.len()];
        PointSample {
            points,
            marks,
            lambda: 0.0,
            truncation: Truncation::Disk { radius },
            seed: 0,
            replicate: 0,
            exclusion: None,
            extensions: 0,
            exclusion_area: 0.0,
            exclusion_max: 0.0,
        }
    }

    /// Radius of the disk around `o` guaranteed to be fully sampled.
    pub fn truncation_radius(&self) -> f64 {
        match self.truncation {
            Truncation::Disk { radius } => radius,
            Truncation::Shell { scale } => scale * self.exclusion_max,
        }
    }

    /// Whether `x` lies in the excluded region.
    pub fn excluded(&self, x: Point) -> bool {
        self.exclusion.as_ref().is_some_and(|d| d.contains(x))
    }

    /// Points surviving thinning to intensity `lambda` (all points when `lambda >= self.lambda`).
    pub fn thinned_points(&self, lambda: f64) -> Vec<Point> {
        if lambda >= self.lambda {
            return self.points.clone();
        }
        let keep = lambda / self.lambda;
        self.points.iter().zip(&self.marks).filter(|(_, m)| **m < keep).map(|(p, _)| *p).collect()
    }

    /// Independent copy thinned to `lambda`; marks are rescaled so thinning composes.
    pub fn thinned(&self, lambda: f64) -> PointSample {
        let mut s = self.clone();
        if lambda < self.lambda {
            let keep = lambda / self.lambda;
            let (p, m): (Vec<Point>, Vec<f64>) = self
                .points
                .iter()
                .zip(&self.marks)
                .filter(|(_, m)| **m < keep)
                .map(|(p, m)| (*p, *m / keep))
                .unzip();
            s.points = p;
            s.marks = m;
            s.lambda = lambda;
        }
        s
    }

    fn rng(&self, lane: Lane, index: u32) -> ChaCha8Rng {
        stream_rng(self.seed, stream_id(self.replicate, lane, index))
    }

    fn push_disk_region<R: Rng>(&mut self, rng: &mut R, r0: f64, r1: f64) {
        let n = poisson(rng, self.lambda * PI * (r1 * r1 - r0 * r0));
        for _ in 0..n {
            let u: f64 = rng.random();
            let t: f64 = rng.random::<f64>() * TAU;
            let m: f64 = rng.random();
            let r = (r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt();
            let x = [r * t.cos(), r * t.sin()];
            if !self.excluded(x) {
                self.points.push(x);
                self.marks.push(m);
            }
        }
    }

    fn push_shell_region<R: Rng>(&mut self, rng: &mut R, s0: f64, s1: f64) {
        let Some(dom) = self.exclusion.clone() else {
            return;
        };
        let n = poisson(rng, self.lambda * (s1 * s1 - s0 * s0) * self.exclusion_area);
        let m2 = self.exclusion_max * self.exclusion_max;
        for _ in 0..n {
            let (t, d) = loop {
                let t: f64 = rng.random::<f64>() * TAU;
                let d = dom.d(t);
                if rng.random::<f64>() * m2 < d * d {
                    break (t, d);
                }
            };
            let u: f64 = rng.random();
            let m: f64 = rng.random();
            let r = d * (s0 * s0 + u * (s1 * s1 - s0 * s0)).sqrt();
            self.points.push([r * t.cos(), r * t.sin()]);
            self.marks.push(m);
        }
    }

    /// Grow the truncation, appending points in the new region only.
    pub fn extend_to(&mut self, target: Truncation) -> Result<()> {
        match (self.truncation, target) {
            (Truncation::Disk { radius: r0 }, Truncation::Disk { radius: r1 }) => {
                if r1 < r0 {
                    return Err(Error::Domain(format!("cannot shrink truncation radius {r0} to {r1}")));
                }
                if r1 == r0 {
                    return Ok(());
                }
                self.extensions += 1;
                let mut rng = self.rng(Lane::PointExtension, self.extensions);
                self.push_disk_region(&mut rng, r0, r1);
                self.truncation = target;
            }
            (Truncation::Shell { scale: s0 }, Truncation::Shell { scale: s1 }) => {
                if s1 < s0 {
                    return Err(Error::Domain(format!("cannot shrink shell scale {s0} to {s1}")));
                }
                if s1 == s0 {
                    return Ok(());
                }
                self.extensions += 1;
                let mut rng = self.rng(Lane::PointExtension, self.extensions);
                self.push_shell_region(&mut rng, s0, s1);
                self.truncation = target;
            }
            _ => return Err(Error::Domain("truncation mode cannot change".into())),
        }
        Ok(())
    }
}

/// Poisson points of intensity `lambda` in the disk of radius `radius`, outside `exclusion`.
pub fn sample_points_disk(
    lambda: f64,
    exclusion: Arc<StarlikeDomain>,
    radius: f64,
    seed: u64,
    replicate: u64,
) -> Result<PointSample> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Validation(format!("intensity must be non-negative, got {lambda}")));
    }
    let max = exclusion.max_radius();
    if radius <= max {
        return Err(Error::Domain(format!(
            "truncation radius {radius} does not enclose the excluded region (max radius {max})"
        )));
    }
    let mut s = PointSample {
        points: Vec::new(),
        marks: Vec::new(),
        lambda,
        truncation: Truncation::Disk { radius },
        seed,
        replicate,
        exclusion: Some(exclusion),
        extensions: 0,
        exclusion_area: 0.0,
        exclusion_max: max,
    };
    let mut rng = s.rng(Lane::Points, 0);
    s.push_disk_region(&mut rng, 0.0, radius);
    Ok(s)
}

/// Poisson points of intensity `lambda` in `{d(θ) < r ≤ scale·d(θ)}`.
pub fn sample_points_shell(
    lambda: f64,
    exclusion: Arc<StarlikeDomain>,
    scale: f64,
    seed: u64,
    replicate: u64,
) -> Result<PointSample> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Validation(format!("intensity must be non-negative, got {lambda}")));
    }
    if scale < 1.0 {
        return Err(Error::Domain(format!("shell scale must be >= 1, got {scale}")));
    }
    let mut s = PointSample {
        points: Vec::new(),
        marks: Vec::new(),
        lambda,
        truncation: Truncation::Shell { scale },
        seed,
        replicate,
        exclusion_area: exclusion.area(),
        exclusion_max: exclusion.max_radius(),
        exclusion: Some(exclusion),
        extensions: 0,
    };
    let mut rng = s.rng(Lane::Points, 0);
    s.push_shell_region(&mut rng, 1.0, scale);
    Ok(s)
}

/// The conditioned process: intensity `lambda` in the disk of radius `radius`, outside `2F_o(K)`.
pub fn sample_conditioned_points(lambda: f64, body: &ConvexBody, radius: f64, seed: u64) -> Result<PointSample> {
    let excl = Arc::new(StarlikeDomain::flower(body.clone(), 2.0)?);
    sample_points_disk(lambda, excl, radius, seed, 0)
}

/// Extend a disk-truncated sample to `new_radius`.
pub fn extend_sample(s: &PointSample, new_radius: f64) -> Result<PointSample> {
    let mut out = s.clone();
    out.extend_to(Truncation::Disk { radius: new_radius })?;
    Ok(out)
}

/// Lines `{y : <y, u_θ> = r}` of a Poisson line process avoiding `K`, stored as `[r, θ]`.
#[derive(Clone, Debug)]
pub struct LineSample {
    pub lines: Vec<[f64; 2]>,
    pub marks: Vec<f64>,
    pub lambda: f64,
    pub truncation: Truncation,
    pub seed: u64,
    pub replicate: u64,
    pub body: Option<Arc<ConvexBody>>,
    pub extensions: u32,
    perimeter: f64,
    max_support: f64,
}

impl LineSample {
    pub fn from_lines(lines: Vec<[f64; 2]>, radius: f64) -> Self {
        let marks = vec![0.0; lines.len()];
        LineSample {
            lines,
            marks,
            lambda: 0.0,
            truncation: Truncation::Disk { radius },
            seed: 0,
            replicate: 0,
            body: None,
            extensions: 0,
            perimeter: 0.0,
            max_support: 0.0,
        }
    }

    pub fn truncation_radius(&self) -> f64 {
        match self.truncation {
            Truncation::Disk { radius } => radius,
            Truncation::Shell { scale } => scale * self.max_support,
        }
    }

    pub fn thinned_lines(&self, lambda: f64) -> Vec<[f64; 2]> {
        if lambda >= self.lambda {
            return self.lines.clone();
        }
        let keep = lambda / self.lambda;
        self.lines.iter().zip(&self.marks).filter(|(_, m)| **m < keep).map(|(l, _)| *l).collect()
    }

    fn rng(&self, lane: Lane, index: u32) -> ChaCha8Rng {
        stream_rng(self.seed, stream_id(self.replicate, lane, index))
    }

    fn p(&self, t: f64) -> f64 {
        self.body.as_ref().map_or(0.0, |b| b.p_o(t))
    }

    fn push_disk_region<R: Rng>(&mut self, rng: &mut R, r0: f64, r1: f64) {
        let n = poisson(rng, self.lambda * TAU * (r1 - r0));
        for _ in 0..n {
            let r = r0 + rng.random::<f64>() * (r1 - r0);
            let t = rng.random::<f64>() * TAU;
            let m: f64 = rng.random();
            if r > self.p(t) {
                self.lines.push([r, t]);
                self.marks.push(m);
            }
        }
    }

    fn push_shell_region<R: Rng>(&mut self, rng: &mut R, s0: f64, s1: f64) {
        let n = poisson(rng, self.lambda * (s1 - s0) * self.perimeter);
        for _ in 0..n {
            let (t, p) = loop {
                let t = rng.random::<f64>() * TAU;
                let p = self.p(t);
                if rng.random::<f64>() * self.max_support < p {
                    break (t, p);
                }
            };
            let u: f64 = rng.random();
            let m: f64 = rng.random();
            self.lines.push([p * (s0 + u * (s1 - s0)), t]);
            self.marks.push(m);
        }
    }

    /// Grow the truncation, appending lines in the new region only.
    pub fn extend_to(&mut self, target: Truncation) -> Result<()> {
        match (self.truncation, target) {
            (Truncation::Disk { radius: r0 }, Truncation::Disk { radius: r1 }) => {
                if r1 < r0 {
                    return Err(Error::Domain("cannot shrink truncation".into()));
                }
                if r1 > r0 {
                    self.extensions += 1;
                    let mut rng = self.rng(Lane::LineExtension, self.extensions);
                    self.push_disk_region(&mut rng, r0, r1);
                    self.truncation = target;
                }
            }
            (Truncation::Shell { scale: s0 }, Truncation::Shell { scale: s1 }) => {
                if s1 < s0 {
                    return Err(Error::Domain("cannot shrink truncation".into()));
                }
                if s1 > s0 {
                    self.extensions += 1;
                    let mut rng = self.rng(Lane::LineExtension, self.extensions);
                    self.push_shell_region(&mut rng, s0, s1);
                    self.truncation = target;
                }
            }
            _ => return Err(Error::Domain("truncation mode cannot change".into())),
        }
        Ok(())
    }
}

fn line_sample(lambda: f64, body: &ConvexBody, truncation: Truncation, seed: u64, replicate: u64) -> Result<LineSample> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Validation(format!("intensity must be non-negative, got {lambda}")));
    }
    if body.min_support() <= 0.0 {
        return Err(Error::Validation("o must be interior to K".into()));
    }
    let max_support = body.max_support();
    let mut s = LineSample {
        lines: Vec::new(),
        marks: Vec::new(),
        lambda,
        truncation,
        seed,
        replicate,
        body: Some(Arc::new(body.clone())),
        extensions: 0,
        perimeter: body.perimeter(),
        max_support,
    };
    let mut rng = s.rng(Lane::Lines, 0);
    match truncation {
        Truncation::Disk { radius } => {
            if radius <= max_support {
                return Err(Error::Domain(format!(
                    "truncation radius {radius} does not exceed max support {max_support}"
                )));
            }
            s.push_disk_region(&mut rng, 0.0, radius);
        }
        Truncation::Shell { scale } => {
            if scale < 1.0 {
                return Err(Error::Domain(format!("shell scale must be >= 1, got {scale}")));
            }
            s.push_shell_region(&mut rng, 1.0, scale);
        }
    }
    Ok(s)
}

/// Poisson lines (measure `λ dr dθ`) within `radius` of `o` that miss `K`.
pub fn sample_conditioned_lines(lambda: f64, body: &ConvexBody, radius: f64, seed: u64) -> Result<LineSample> {
    line_sample(lambda, body, Truncation::Disk { radius }, seed, 0)
}

/// Poisson lines with `p_o(K,θ) < r ≤ scale·p_o(K,θ)`.
pub fn sample_lines_shell(lambda: f64, body: &ConvexBody, scale: f64, seed: u64, replicate: u64) -> Result<LineSample> {
    line_sample(lambda, body, Truncation::Shell { scale }, seed, replicate)
}

/// Poisson lines within `radius` that miss `K`, on a given replicate stream.
pub fn sample_lines_disk(lambda: f64, body: &ConvexBody, radius: f64, seed: u64, replicate: u64) -> Result<LineSample> {
    line_sample(lambda, body, Truncation::Disk { radius }, seed, replicate)
}

/// Log acceptance ratio of the nucleus rejection sampler, `-πλ‖x‖² + 4λR(x)`.
pub fn nucleus_log_ratio(body: &ConvexBody, lambda: f64, x: Point) -> Result<f64> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    Ok(-PI * lambda * r2 + 4.0 * lambda * flower::flower_rest(body, x)?)
}

/// Same ratio from flower areas directly: `-4λA(F_x) + 4λA(F_o) + πλ‖x‖²`.
pub fn nucleus_log_ratio_direct(body: &ConvexBody, lambda: f64, x: Point) -> Result<f64> {
    let a0 = flower::flower_area(body, [0.0, 0.0])?;
    let ax = flower::flower_area_general(body, x)?;
    let r2 = x[0] * x[0] + x[1] * x[1];
    Ok(-4.0 * lambda * (ax - a0) + PI * lambda * r2)
}

/// Draws of the conditional nucleus together with sampler diagnostics.
#[derive(Clone, Debug)]
pub struct NucleusDraws {
    pub points: Vec<Point>,
    pub proposals: usize,
    /// Largest log acceptance ratio seen over all proposals (must be `<= 0`).
    pub max_log_ratio: f64,
}

/// `n` draws from the density proportional to `exp(-4λ A(F_x(K)))`.
///
/// Proposals are centred Gaussians with per-coordinate variance `1/(2πλ)`.
pub fn sample_nucleus(lambda: f64, body: &ConvexBody, n: usize, seed: u64) -> Result<NucleusDraws> {
    if !(lambda > 0.0) {
        return Err(Error::Validation(format!("intensity must be positive, got {lambda}")));
    }
    let st = steiner_point(body)?;
    if norm(st) > 1e-8 {
        return Err(Error::Domain(format!("Steiner point {st:?} is not at o; translate the body first")));
    }
    let inradius = body.min_support();
    let normal = Normal::new(0.0, (1.0 / (2.0 * PI * lambda)).sqrt()).expect("finite variance");
    let mut rng = stream_rng(seed, stream_id(0, Lane::Nucleus, 0));
    let mut out = NucleusDraws { points: Vec::with_capacity(n), proposals: 0, max_log_ratio: f64::NEG_INFINITY };
    while out.points.len() < n {
        let x = [normal.sample(&mut rng), normal.sample(&mut rng)];
        let u: f64 = rng.random();
        out.proposals += 1;
        let lr = if norm(x) < inradius {
            -PI * lambda * (x[0] * x[0] + x[1] * x[1])
        } else {
            nucleus_log_ratio(body, lambda, x)?
        };
        out.max_log_ratio = out.max_log_ratio.max(lr);
        if u.ln() < lr {
            out.points.push(x);
        }
    }
    Ok(out)
}

/// Unit vector helper re-exported for line endpoints.
pub fn line_point(r: f64, theta: f64) -> Point {
    let u = unit(theta);
    [r * u[0], r * u[1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_outside_exclusion() {
        let k = ConvexBody::unit_disk();
        let a = sample_conditioned_points(5.0, &k, 5.0, 11).unwrap();
        let b = sample_conditioned_points(5.0, &k, 5.0, 11).unwrap();
        assert_eq!(a.points, b.points);
        assert!(!a.points.is_empty());
        for p in &a.points {
            assert!(!flower::flower_membership(&k, *p, 2.0));
            assert!(norm(*p) <= 5.0);
        }
        assert!(sample_conditioned_points(5.0, &k, 1.5, 1).is_err());
    }

    #[test]
    fn extension_nests_and_equal_radius_is_identity() {
        let k = ConvexBody::unit_square();
        let a = sample_conditioned_points(3.0, &k, 4.0, 5).unwrap();
        let same = extend_sample(&a, 4.0).unwrap();
        assert_eq!(same.points, a.points);
        let b = extend_sample(&a, 8.0).unwrap();
        assert_eq!(&b.points[..a.points.len()], &a.points[..]);
        assert!(b.points[a.points.len()..].iter().all(|p| norm(*p) > 4.0));
        assert!(extend_sample(&b, 2.0).is_err());
    }

    #[test]
    fn shell_points_lie_in_shell() {
        let k = ConvexBody::ellipse([0.1, 0.0], 1.2, 0.8, 0.3).unwrap();
        let ex = Arc::new(StarlikeDomain::flower(k.clone(), 2.0).unwrap());
        let mut s = sample_points_shell(50.0, ex.clone(), 1.3, 3, 2).unwrap();
        let n0 = s.points.len();
        s.extend_to(Truncation::Shell { scale: 1.6 }).unwrap();
        for (i, p) in s.points.iter().enumerate() {
            let g = norm(*p) / ex.d(crate::geom::polar_angle(*p));
            let (lo, hi) = if i < n0 { (1.0, 1.3) } else { (1.3, 1.6) };
            assert!(g > lo - 1e-12 && g <= hi + 1e-12, "{g}");
        }
    }

    #[test]
    fn lines_avoid_body() {
        let k = ConvexBody::unit_square();
        let s = sample_conditioned_lines(4.0, &k, 6.0, 9).unwrap();
        assert!(s.lines.iter().all(|l| l[0] > k.p_o(l[1]) && l[0] <= 6.0));
        let tiny = sample_conditioned_lines(0.0, &k, 6.0, 9).unwrap();
        assert!(tiny.lines.is_empty());
    }

    #[test]
    fn nucleus_ratio_never_exceeds_one() {
        let k = ConvexBody::unit_square();
        let d = sample_nucleus(3.0, &k, 200, 4).unwrap();
        assert!(d.max_log_ratio <= 0.0);
        assert_eq!(nucleus_log_ratio(&k, 10.0, [0.0, 0.0]).unwrap(), 0.0);
        for x in [[0.3, 0.1], [2.0, -0.4], [-3.0, 3.0]] {
            let a = nucleus_log_ratio(&k, 2.0, x).unwrap();
            let b = nucleus_log_ratio_direct(&k, 2.0, x).unwrap();
            assert!(a <= 0.0 && (a - b).abs() < 1e-7, "{a} {b}");
        }
        let off = ConvexBody::disk([0.3, 0.0], 1.0).unwrap();
        assert!(sample_nucleus(10.0, &off, 5, 1).is_err());
    }
}
