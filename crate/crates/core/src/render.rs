//! SVG rendering of bodies, flowers, cells and nuclei.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::Point;

/// What to draw; every part is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    #[serde(default)]
    pub body: Option<Vec<Point>>,
    #[serde(default)]
    pub domain: Option<Vec<Point>>,
    #[serde(default)]
    pub flower: Option<Vec<Point>>,
    #[serde(default)]
    pub cell: Option<Vec<Point>>,
    #[serde(default)]
    pub gamma: Option<Vec<Point>>,
    #[serde(default)]
    pub points: Vec<Point>,
}

const SIZE: f64 = 800.0;

fn polygon(out: &mut String, pts: &[Point], map: &impl Fn(Point) -> (f64, f64), style: &str, closed: bool) {
    let tag = if closed { "polygon" } else { "polyline" };
    let _ = write!(out, "<{tag} points=\"");
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = map(*p);
        let _ = write!(out, "{}{x:.3},{y:.3}", if i == 0 { "" } else { " " });
    }
    let _ = writeln!(out, "\" {style}/>");
}

/// SVG 1.1 text for `scene`, with the data bounding box fitted to an 800×800 canvas.
pub fn to_svg(scene: &Scene) -> String {
    let parts = [&scene.domain, &scene.flower, &scene.body, &scene.cell, &scene.gamma];
    // nuclei only extend the view when nothing else is drawn
    let framing: Vec<Point> = {
        let shapes: Vec<Point> = parts.iter().filter_map(|p| p.as_ref()).flatten().copied().collect();
        if shapes.is_empty() { scene.points.clone() } else { shapes }
    };
    let mut out = String::new();
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    if framing.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &framing {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12) * 1.1;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let k = SIZE / span;
    let map = |p: Point| (SIZE / 2.0 + (p[0] - cx) * k, SIZE / 2.0 - (p[1] - cy) * k);
    let _ = writeln!(out, "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>");
    if let Some(d) = &scene.domain {
        polygon(&mut out, d, &map, "fill=\"#eef3fb\" stroke=\"#6b8fc7\" stroke-width=\"1\"", true);
    }
    if let Some(f) = &scene.flower {
        polygon(&mut out, f, &map, "fill=\"#fdf1dc\" stroke=\"#d9952b\" stroke-width=\"1\"", true);
    }
    if let Some(c) = &scene.cell {
        polygon(&mut out, c, &map, "fill=\"none\" stroke=\"#222222\" stroke-width=\"1.5\"", true);
    }
    if let Some(b) = &scene.body {
        polygon(&mut out, b, &map, "fill=\"#cfe8cf\" stroke=\"#2f7d32\" stroke-width=\"1\"", true);
    }
    if let Some(g) = &scene.gamma {
        polygon(&mut out, g, &map, "fill=\"none\" stroke=\"#b22222\" stroke-width=\"1\"", true);
    }
    let (lo, hi) = (-0.05 * SIZE, 1.05 * SIZE);
    for p in &scene.points {
        let (x, y) = map(*p);
        if x >= lo && x <= hi && y >= lo && y <= hi {
            let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.5\" fill=\"#444\"/>");
        }
    }
    let (ox, oy) = map([0.0, 0.0]);
    let _ = writeln!(out, "<circle cx=\"{ox:.2}\" cy=\"{oy:.2}\" r=\"2.5\" fill=\"#c00\"/>");
    out.push_str("</svg>\n");
    out
}

pub fn render_svg(scene: &Scene, path: &Path) -> Result<()> {
    std::fs::write(path, to_svg(scene))?;
    Ok(())
}
