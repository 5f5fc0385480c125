//! Planar points and angles.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane.
pub type Point = [f64; 2];

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// `u_θ = (cos θ, sin θ)`.
#[inline]
pub fn unit(theta: f64) -> Point {
    let (s, c) = theta.sin_cos();
    [c, s]
}

/// Polar angle of `x` in `[0, 2π)`.
#[inline]
pub fn polar_angle(x: Point) -> f64 {
    reduce(x[1].atan2(x[0]))
}

/// Reduce an angle to `[0, 2π)`.
#[inline]
pub fn reduce(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// An angle reduced to `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub fn new(theta: f64) -> Self {
        Angle(reduce(theta))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The unit vector `u_θ`.
    #[inline]
    pub fn unit(self) -> Point {
        unit(self.0)
    }

    /// The unit vector `v_θ = u_{θ+π/2}`.
    #[inline]
    pub fn normal(self) -> Point {
        let [c, s] = unit(self.0);
        [-s, c]
    }
}

impl From<f64> for Angle {
    fn from(t: f64) -> Self {
        Angle::new(t)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// Shoelace area of a polygon (positive for counterclockwise order).
pub fn polygon_area(v: &[Point]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        s += cross(v[i], v[(i + 1) % n]);
    }
    0.5 * s
}

pub fn polygon_perimeter(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| dist(v[i], v[(i + 1) % n])).sum()
}
