//! Limit constants, rates and limiting densities.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::body::{BodyKind, ConvexBody};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::quad;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Voronoi,
    Crofton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    DefectArea,
    DefectPerimeter,
    Vertices,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LawSpec {
    pub model: Model,
    pub body_class: BodyKind,
    pub functional: Functional,
}

/// Growth or decay rate `φ(λ)` such that `E[functional] ~ constant · φ(λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rate {
    /// `λ^{-2/3}`
    PowMinusTwoThirds,
    /// `λ^{-1/2}`
    PowMinusHalf,
    /// `λ^{1/3}`
    PowOneThird,
    /// `λ^{-1} log λ`
    LogOverLambda,
    /// `log λ`
    Log,
}

impl Rate {
    pub fn at(self, lambda: f64) -> f64 {
        match self {
            Rate::PowMinusTwoThirds => lambda.powf(-2.0 / 3.0),
            Rate::PowMinusHalf => lambda.powf(-0.5),
            Rate::PowOneThird => lambda.cbrt(),
            Rate::LogOverLambda => lambda.ln() / lambda,
            Rate::Log => lambda.ln(),
        }
    }

    /// `value / φ(λ)`.
    pub fn rescale(self, value: f64, lambda: f64) -> f64 {
        value / self.at(lambda)
    }

    pub fn label(self) -> &'static str {
        match self {
            Rate::PowMinusTwoThirds => "lambda^-2/3",
            Rate::PowMinusHalf => "lambda^-1/2",
            Rate::PowOneThird => "lambda^1/3",
            Rate::LogOverLambda => "lambda^-1 log lambda",
            Rate::Log => "log lambda",
        }
    }
}

/// `Γ(2/3)`.
pub fn gamma_two_thirds() -> f64 {
    static G: OnceLock<f64> = OnceLock::new();
    *G.get_or_init(|| gamma(2.0 / 3.0))
}

const CONST_TOL: f64 = 1e-11;

fn smooth_integral(body: &ConvexBody, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
    body.triple(0.0)?;
    let g = |t: f64| {
        let (h0, _, h2) = body.triple(t).expect("smooth body");
        let r = h0 + h2;
        f(r, body.p_o(t))
    };
    Ok(quad::integrate_periodic(g, &[], CONST_TOL)?.value)
}

/// Distances `‖o_i‖` from `o` to the edge lines and edge lengths `‖a_{i+1} - a_i‖`.
pub fn polygon_edge_data(body: &ConvexBody) -> Result<Vec<(f64, f64)>> {
    let p = body.as_polygon().ok_or(Error::UnsupportedKind("smooth"))?;
    Ok((0..p.len()).map(|i| (p.edge_height(i, [0.0, 0.0]), p.edge_length(i))).collect())
}

/// Limit constant and rate for the given law and body.
///
/// Smooth integrals are taken in the normal angle with `ds = r dθ`.
pub fn theorem_constant(spec: LawSpec, body: &ConvexBody) -> Result<(f64, Rate)> {
    if spec.body_class != body.kind() {
        return Err(Error::Validation(format!(
            "law expects a {:?} body, got {:?}",
            spec.body_class,
            body.kind()
        )));
    }
    let g = gamma_two_thirds();
    let c3 = 3f64.cbrt();
    use Functional::*;
    use Model::*;
    Ok(match (spec.model, spec.body_class) {
        (Voronoi, BodyKind::Smooth) => match spec.functional {
            DefectArea => (
                0.25 / c3 * g * smooth_integral(body, |r, h| r.powf(4.0 / 3.0) * h.powf(-2.0 / 3.0))?,
                Rate::PowMinusTwoThirds,
            ),
            DefectPerimeter => (
                g / (c3 * c3 * c3 * c3) * smooth_integral(body, |r, h| r.cbrt() * h.powf(-2.0 / 3.0))?,
                Rate::PowMinusTwoThirds,
            ),
            Vertices => {
                (4.0 * g / (c3 * c3 * c3 * c3) * smooth_integral(body, |r, h| r.cbrt() * h.cbrt())?, Rate::PowOneThird)
            }
        },
        (Crofton, BodyKind::Smooth) => {
            let k = 2f64.powf(4.0 / 3.0) * g / (c3 * c3 * c3 * c3);
            match spec.functional {
                DefectArea => (
                    2f64.powf(-2.0 / 3.0) / c3 * g * smooth_integral(body, |r, _| r.powf(4.0 / 3.0))?,
                    Rate::PowMinusTwoThirds,
                ),
                DefectPerimeter => (k * smooth_integral(body, |r, _| r.cbrt())?, Rate::PowMinusTwoThirds),
                Vertices => (k * smooth_integral(body, |r, _| r.cbrt())?, Rate::PowOneThird),
            }
        }
        (model, BodyKind::Polygon) => {
            let edges = polygon_edge_data(body)?;
            let n = edges.len() as f64;
            match (model, spec.functional) {
                (Voronoi, DefectArea) => (
                    2f64.powf(-4.5) * PI.powf(1.5) * edges.iter().map(|(d, l)| l.powf(1.5) / d.sqrt()).sum::<f64>(),
                    Rate::PowMinusHalf,
                ),
                (Voronoi, DefectPerimeter) => {
                    (edges.iter().map(|(d, _)| 1.0 / d).sum::<f64>() / 6.0, Rate::LogOverLambda)
                }
                (Crofton, DefectArea) => (
                    2f64.powf(-3.5) * PI.powf(1.5) * edges.iter().map(|(_, l)| l.powf(1.5)).sum::<f64>(),
                    Rate::PowMinusHalf,
                ),
                (Crofton, DefectPerimeter) => (2.0 * n / 3.0, Rate::LogOverLambda),
                (_, Vertices) => (2.0 * n / 3.0, Rate::Log),
            }
        }
    })
}

/// Curvature data `(r_s, <s, n_s>)` at normal angle `θ`.
pub fn smooth_local(body: &ConvexBody, theta: f64) -> Result<(f64, f64)> {
    let (h0, _, h2) = body.triple(theta)?;
    Ok((h0 + h2, body.p_o(theta)))
}

fn parabola_height(r: f64, x: f64, y: f64) -> f64 {
    x * x / (2.0 * r) + y
}

fn smooth_decay(r: f64, h: f64) -> f64 {
    2f64.powf(4.5) / 3.0 / r.sqrt() * h
}

/// Limit density of the rescaled support point `(λ^{1/3}X, λ^{2/3}Y)`.
pub fn density_f_s(body: &ConvexBody, theta: f64, x: f64, y: f64) -> Result<f64> {
    let (r, h) = smooth_local(body, theta)?;
    Ok(f_s_local(r, h, x, y))
}

/// `f_s` from the local data `r_s`, `<s, n_s>`.
pub fn f_s_local(r: f64, h: f64, x: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let z = parabola_height(r, x, y);
    2f64.powf(5.5) * h * h * r.powf(-1.5) * (-smooth_decay(r, h) * z.powf(1.5)).exp() * z.sqrt() * y
}

/// Height `z` beyond which `exp(-c z^{3/2})` is below `e^{-45}`.
fn smooth_cutoff(r: f64, h: f64) -> f64 {
    (45.0 / smooth_decay(r, h)).powf(2.0 / 3.0)
}

/// Marginal density of `λ^{2/3}Y` under `f_s`.
pub fn f_s_y_marginal(r: f64, h: f64, y: f64) -> Result<f64> {
    let zmax = smooth_cutoff(r, h);
    if y <= 0.0 || y >= zmax {
        return Ok(0.0);
    }
    let xmax = (2.0 * r * (zmax - y)).sqrt();
    Ok(2.0 * quad::integrate(|x| f_s_local(r, h, x, y), 0.0, xmax, 1e-13)?.value)
}

/// Tabulated distribution function of the `Y` marginal of `f_s`.
#[derive(Clone, Debug)]
pub struct MarginalCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl MarginalCdf {
    pub fn smooth_y(r: f64, h: f64) -> Result<Self> {
        let zmax = smooth_cutoff(r, h);
        let n = 2000;
        let grid: Vec<f64> = (0..=n).map(|k| zmax * k as f64 / n as f64).collect();
        let mut cdf = vec![0.0; n + 1];
        for k in 1..=n {
            let piece = quad::integrate(|y| f_s_y_marginal(r, h, y).unwrap_or(f64::NAN), grid[k - 1], grid[k], 1e-13)?;
            cdf[k] = cdf[k - 1] + piece.value;
        }
        Ok(MarginalCdf { grid, cdf })
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y <= self.grid[0] {
            return 0.0;
        }
        let last = self.grid.len() - 1;
        if y >= self.grid[last] {
            return self.cdf[last];
        }
        let step = self.grid[1] - self.grid[0];
        let k = ((y / step) as usize).min(last - 1);
        let t = (y - self.grid[k]) / step;
        self.cdf[k] + t * (self.cdf[k + 1] - self.cdf[k])
    }

    pub fn total(&self) -> f64 {
        self.cdf[self.cdf.len() - 1]
    }
}

/// Limit intensity of the rescaled vertex process near `s(θ)`.
pub fn intensity_sigma_s(body: &ConvexBody, theta: f64, x: f64, y: f64) -> Result<f64> {
    let (r, h) = smooth_local(body, theta)?;
    Ok(sigma_s_local(r, h, x, y))
}

pub fn sigma_s_local(r: f64, h: f64, x: f64, y: f64) -> f64 {
    let z = parabola_height(r, x, y);
    if z <= 0.0 {
        return 0.0;
    }
    2f64.powf(7.5) / 3.0 * (-smooth_decay(r, h) * z.powf(1.5)).exp() * h * h * r.powf(-1.5) * z.powf(1.5)
}

/// `∫ σ_s(x, y) dy` at fixed `x`: vertices per unit tangential length (independent of `x`).
pub fn intensity_sigma_s_marginal(r: f64, h: f64, x: f64) -> Result<f64> {
    let y0 = -x * x / (2.0 * r);
    let zmax = smooth_cutoff(r, h);
    Ok(quad::integrate(|y| sigma_s_local(r, h, x, y), y0, y0 + zmax, 1e-13)?.value)
}

/// `2² 3^{-4/3} Γ(2/3) r^{-2/3} h^{1/3}`, the vertex integrand per unit arclength.
pub fn vertex_integrand(r: f64, h: f64) -> f64 {
    4.0 * 3f64.powf(-4.0 / 3.0) * gamma_two_thirds() * r.powf(-2.0 / 3.0) * h.cbrt()
}

/// Which polygon density to evaluate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolygonDensity {
    /// Support point near `a_i` at angular scale `λ^{-γ}`, `γ < 1/2`.
    F,
    /// Support point at angle `τ λ^{-1/2}`.
    G { tau: f64 },
    /// Vertex intensity near `a_i`.
    Sigma,
}

/// `f_i`, `g_i(τ)` or `σ_i` at `(ρ, α)` for vertex `i`.
///
/// `g_i` is normalised: it carries the factor `α` that makes it integrate to one.
pub fn density_polygon(which: PolygonDensity, body: &ConvexBody, i: usize, rho: f64, alpha: f64) -> Result<f64> {
    let p = body.as_polygon().ok_or(Error::UnsupportedKind("smooth"))?;
    if i >= p.len() {
        return Err(Error::Domain(format!("vertex index {i} out of range")));
    }
    let d = p.edge_height(i, [0.0, 0.0]);
    let l = p.edge_length(i);
    Ok(polygon_density_local(which, d, l, rho, alpha))
}

pub fn polygon_density_local(which: PolygonDensity, d: f64, l: f64, rho: f64, alpha: f64) -> f64 {
    match which {
        PolygonDensity::F => {
            if rho <= 0.0 || alpha <= 1.0 {
                return 0.0;
            }
            8.0 * d * d * (-2.0 * d * rho * alpha * alpha).exp() * alpha * (alpha - 1.0) * rho
        }
        PolygonDensity::G { tau } => {
            if rho <= 0.0 || rho >= l || alpha <= tau {
                return 0.0;
            }
            let q = rho * l / (l - rho);
            8.0 * d * d * q * alpha * (alpha - tau) * (rho * alpha / (l - rho) + tau) * (-2.0 * d * q * alpha * alpha).exp()
        }
        PolygonDensity::Sigma => {
            if rho <= 0.0 || alpha <= 0.0 {
                return 0.0;
            }
            8.0 / 3.0 * d * d * rho * alpha.powi(3) * (-2.0 * d * rho * alpha * alpha).exp()
        }
    }
}

/// `ρ`-marginal of `g_i(τ)`.
pub fn g_rho_marginal(d: f64, l: f64, tau: f64, rho: f64) -> Result<f64> {
    if rho <= 0.0 || rho >= l {
        return Ok(0.0);
    }
    let q = rho * l / (l - rho);
    let width = 7.0 / (2.0 * d * q).sqrt();
    let f = |a: f64| polygon_density_local(PolygonDensity::G { tau }, d, l, rho, a);
    Ok(quad::integrate(f, tau, tau + width, 1e-14)?.value)
}

/// Total mass of `g_i(τ)`, integrated in `s = sqrt(ρ/L)` (the marginal blows up like `ρ^{-1/2}` when `τ > 0`).
pub fn g_total(d: f64, l: f64, tau: f64) -> Result<f64> {
    let f = |s: f64| g_rho_marginal(d, l, tau, l * s * s).unwrap_or(f64::NAN) * 2.0 * l * s;
    Ok(quad::integrate(f, 0.0, 1.0, 1e-10)?.value)
}

/// Total mass of `f_i`, integrated in `t = 1/α`.
pub fn f_total(d: f64) -> Result<f64> {
    let inner = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let a = 1.0 / t;
        let rmax = 45.0 / (2.0 * d * a * a);
        quad::integrate(|r| polygon_density_local(PolygonDensity::F, d, 1.0, r, a), 0.0, rmax, 1e-14)
            .map(|q| q.value / (t * t))
            .unwrap_or(f64::NAN)
    };
    Ok(quad::integrate(inner, 0.0, 1.0, 1e-10)?.value)
}

/// Total mass of `f_s`.
pub fn f_s_total(r: f64, h: f64) -> Result<f64> {
    let zmax = smooth_cutoff(r, h);
    Ok(quad::integrate(|y| f_s_y_marginal(r, h, y).unwrap_or(f64::NAN), 0.0, zmax, 1e-10)?.value)
}

/// Limit density `2 exp(-2π‖x‖²)` of the rescaled nucleus `√λ Z`.
pub fn steiner_limit_density(x: Point) -> f64 {
    2.0 * (-2.0 * PI * (x[0] * x[0] + x[1] * x[1])).exp()
}

/// Per-coordinate variance of the limiting nucleus law.
pub const STEINER_VARIANCE: f64 = 1.0 / (4.0 * PI);

/// All constants applicable to `body`, for tables.
pub fn constants_table(body: &ConvexBody) -> Result<Vec<(LawSpec, f64, Rate)>> {
    let mut out = Vec::new();
    for model in [Model::Voronoi, Model::Crofton] {
        for functional in [Functional::DefectArea, Functional::DefectPerimeter, Functional::Vertices] {
            let spec = LawSpec { model, body_class: body.kind(), functional };
            let (c, rate) = theorem_constant(spec, body)?;
            out.push((spec, c, rate));
        }
    }
    Ok(out)
}

/// Unit-disk Voronoi area constant `2^{-2} 3^{-1/3} Γ(2/3) 2π`.
pub fn disk_area_constant() -> f64 {
    0.25 * 3f64.powf(-1.0 / 3.0) * gamma_two_thirds() * TAU
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(model: Model, class: BodyKind, functional: Functional) -> LawSpec {
        LawSpec { model, body_class: class, functional }
    }

    #[test]
    fn gamma_pinned() {
        assert!((gamma_two_thirds() - 1.354117939).abs() < 1e-9);
    }

    #[test]
    fn disk_constants() {
        let k = ConvexBody::unit_disk();
        let (a, rate) = theorem_constant(spec(Model::Voronoi, BodyKind::Smooth, Functional::DefectArea), &k).unwrap();
        assert_eq!(rate, Rate::PowMinusTwoThirds);
        assert!((a - 1.4748096).abs() < 1e-6, "{a}");
        assert!((a - disk_area_constant()).abs() < 1e-10);
        let (p, _) = theorem_constant(spec(Model::Voronoi, BodyKind::Smooth, Functional::DefectPerimeter), &k).unwrap();
        assert!((p - 1.9664127754).abs() < 1e-9, "{p}");
        let (n, rate) = theorem_constant(spec(Model::Voronoi, BodyKind::Smooth, Functional::Vertices), &k).unwrap();
        assert_eq!(rate, Rate::PowOneThird);
        assert!((n - 4.0 * p).abs() < 1e-9);
        assert!((n - 7.8656511017).abs() < 1e-9);
        let (cv, _) = theorem_constant(spec(Model::Crofton, BodyKind::Smooth, Functional::Vertices), &k).unwrap();
        assert!((cv - 4.9550496971).abs() < 1e-9, "{cv}");
        assert!(theorem_constant(spec(Model::Voronoi, BodyKind::Polygon, Functional::Vertices), &k).is_err());
    }

    #[test]
    fn square_constants() {
        let k = ConvexBody::unit_square();
        let (a, rate) = theorem_constant(spec(Model::Voronoi, BodyKind::Polygon, Functional::DefectArea), &k).unwrap();
        assert_eq!(rate, Rate::PowMinusHalf);
        assert!((a - 0.5 * PI.powf(1.5)).abs() < 1e-12);
        assert!((a - 2.7841639984).abs() < 1e-9);
        let (v, rate) = theorem_constant(spec(Model::Voronoi, BodyKind::Polygon, Functional::Vertices), &k).unwrap();
        assert_eq!((v, rate), (8.0 / 3.0, Rate::Log));
        let (ca, _) = theorem_constant(spec(Model::Crofton, BodyKind::Polygon, Functional::DefectArea), &k).unwrap();
        assert!((ca - PI.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn smooth_densities_normalise() {
        for (r, h) in [(1.0, 1.0), (2.0, 0.7), (0.5, 1.3)] {
            assert!((f_s_total(r, h).unwrap() - 1.0).abs() < 1e-6);
            for x in [0.0, 0.4, -1.1] {
                let m = intensity_sigma_s_marginal(r, h, x).unwrap();
                assert!((m - vertex_integrand(r, h)).abs() < 1e-6, "{m}");
            }
        }
        let k = ConvexBody::unit_disk();
        assert_eq!(density_f_s(&k, 0.3, 0.2, -0.1).unwrap(), 0.0);
        assert_eq!(intensity_sigma_s(&k, 0.3, 0.0, 0.0).unwrap(), 0.0);
        let y: f64 = 0.37;
        let closed = 2f64.powf(5.5) * (-(2f64.powf(4.5) / 3.0) * y.powf(1.5)).exp() * y.powf(1.5);
        assert!((density_f_s(&k, 1.0, 0.0, y).unwrap() - closed).abs() < 1e-12);
        assert!((vertex_integrand(1.0, 1.0) - 1.2518572535).abs() < 1e-9);
        let scaled = intensity_sigma_s_marginal(4.0, 1.0, 0.0).unwrap() / intensity_sigma_s_marginal(1.0, 1.0, 0.0).unwrap();
        assert!((scaled - 4f64.powf(-2.0 / 3.0)).abs() < 1e-8);
    }

    #[test]
    fn polygon_densities_normalise() {
        assert!((f_total(1.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((f_total(0.6).unwrap() - 1.0).abs() < 1e-6);
        for tau in [0.0, 0.5] {
            let t = g_total(1.0, 2.0, tau).unwrap();
            assert!((t - 1.0).abs() < 1e-6, "tau {tau}: {t}");
        }
        for rho in [0.1, 0.7, 1.3, 1.9] {
            assert!((g_rho_marginal(1.0, 2.0, 0.0, rho).unwrap() - 0.5).abs() < 1e-6);
        }
        let k = ConvexBody::unit_square();
        assert_eq!(density_polygon(PolygonDensity::F, &k, 0, 1.0, 0.9).unwrap(), 0.0);
        assert_eq!(density_polygon(PolygonDensity::Sigma, &k, 0, 1.0, -0.1).unwrap(), 0.0);
    }

    #[test]
    fn constants_are_consistent() {
        let k = ConvexBody::ellipse([0.1, -0.05], 1.3, 0.8, 0.4).unwrap();
        let (v, _) = theorem_constant(spec(Model::Voronoi, BodyKind::Smooth, Functional::Vertices), &k).unwrap();
        let via_sigma = quad::integrate_periodic(
            |t| {
                let (r, h) = smooth_local(&k, t).unwrap();
                intensity_sigma_s_marginal(r, h, 0.0).unwrap() * r
            },
            &[],
            1e-10,
        )
        .unwrap()
        .value;
        assert!((v - via_sigma).abs() < 1e-6 * v);
        let (p, _) = theorem_constant(spec(Model::Voronoi, BodyKind::Smooth, Functional::DefectPerimeter), &k).unwrap();
        // mean support defect per direction, integrated over θ
        let via_support = quad::integrate_periodic(
            |t| {
                let (r, h) = smooth_local(&k, t).unwrap();
                3f64.powf(-4.0 / 3.0) * gamma_two_thirds() * r.cbrt() * h.powf(-2.0 / 3.0)
            },
            &[],
            1e-10,
        )
        .unwrap()
        .value;
        assert!((p - via_support).abs() < 1e-9);
        assert!((v - 4.0 * p).abs() > 1e-3);
    }

    #[test]
    fn steiner_density() {
        assert_eq!(steiner_limit_density([0.0, 0.0]), 2.0);
        let total = quad::integrate(|r| steiner_limit_density([r, 0.0]) * TAU * r, 0.0, 4.0, 1e-13).unwrap().value;
        assert!((total - 1.0).abs() < 1e-9);
        let var = quad::integrate(|r| steiner_limit_density([r, 0.0]) * TAU * r * r * r / 2.0, 0.0, 4.0, 1e-13)
            .unwrap()
            .value;
        assert!((var - STEINER_VARIANCE).abs() < 1e-9);
    }

    #[test]
    fn marginal_cdf_reaches_one() {
        let c = MarginalCdf::smooth_y(1.0, 1.0).unwrap();
        assert!((c.total() - 1.0).abs() < 1e-6);
        assert!(c.eval(0.0) == 0.0 && c.eval(0.5) > 0.0 && c.eval(0.5) < 1.0);
    }
}
