use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use flowercell::cell::{cell_metrics, contains_body, voronoi_zero_cell, voronoi_zero_cell_at, ZeroCell};
use flowercell::export;
use flowercell::flower::{flower_area, steiner_point};
use flowercell::geom::{dist, dot, norm};
use flowercell::increment::increment_area_exact;
use flowercell::sampler::sample_conditioned_points;
use flowercell::shape::invert;
use flowercell::stats::{ks_test, EstimatorReport, Welford};
use flowercell::ConvexBody;

fn point(r: f64) -> impl Strategy<Value = [f64; 2]> {
    (-r..r, -r..r).prop_map(|(x, y)| [x, y])
}

/// Zonogon from edge directions in `[0, π)` and lengths, centred at `c`.
fn zonogon(gens: &[(f64, f64)], c: [f64; 2]) -> ConvexBody {
    let mut g = gens.to_vec();
    g.sort_by(|a, b| a.0.total_cmp(&b.0));
    let steps: Vec<[f64; 2]> = g
        .iter()
        .map(|&(a, l)| [l * a.cos(), l * a.sin()])
        .chain(g.iter().map(|&(a, l)| [-l * a.cos(), -l * a.sin()]))
        .collect();
    let half = steps[..g.len()].iter().fold([0.0, 0.0], |s, v| [s[0] + 0.5 * v[0], s[1] + 0.5 * v[1]]);
    let mut v = [c[0] - half[0], c[1] - half[1]];
    let mut out = Vec::new();
    for s in steps {
        out.push(v);
        v = [v[0] + s[0], v[1] + s[1]];
    }
    ConvexBody::polygon(out).unwrap()
}

fn zonogon_gens() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (2usize..6).prop_flat_map(|m| {
        prop::collection::vec((0.3..0.7f64, 0.6..1.5f64), m).prop_map(move |v| {
            v.into_iter().enumerate().map(|(k, (f, l))| (PI * (k as f64 + f) / m as f64, l)).collect()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inversion_is_an_involution(x in point(10.0)) {
        prop_assume!(norm(x) > 1e-6);
        let y = invert(invert(x).unwrap()).unwrap();
        prop_assert!(dist(x, y) <= 1e-12 * (1.0 + norm(x)));
        prop_assert!((norm(invert(x).unwrap()) * norm(x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn welford_matches_two_pass(xs in prop::collection::vec(-1e3..1e3f64, 2..200)) {
        let w: Welford = xs.iter().copied().collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prop_assert!((w.mean() - mean).abs() <= 1e-9 * (1.0 + mean.abs()));
        prop_assert!((w.variance() - var).abs() <= 1e-8 * (1.0 + var));
        prop_assert!(w.variance() >= 0.0);
    }

    #[test]
    fn ci95_is_mean_plus_minus_196_se(xs in prop::collection::vec(-5.0..5.0f64, 2..100), seed in any::<u64>()) {
        let w: Welford = xs.iter().copied().collect();
        let r = EstimatorReport::from_welford("x", 1.0, &w, seed);
        prop_assert!(r.variance >= 0.0);
        prop_assert!((r.ci95[0] - (r.mean - 1.96 * r.std_error)).abs() < 1e-12);
        prop_assert!((r.ci95[1] - (r.mean + 1.96 * r.std_error)).abs() < 1e-12);
        let back = export::from_json(&export::to_json(std::slice::from_ref(&r)).unwrap()).unwrap();
        prop_assert_eq!(back, vec![r]);
    }

    #[test]
    fn ks_p_value_is_a_probability(xs in prop::collection::vec(0.0..1.0f64, 5..100)) {
        let (d, p) = ks_test(&xs, |x| x.clamp(0.0, 1.0));
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn steiner_point_of_symmetric_polygon_is_its_centre(gens in zonogon_gens(), c in point(0.2)) {
        let st = steiner_point(&zonogon(&gens, c)).unwrap();
        prop_assert!(dist(st, c) < 1e-9, "{:?} vs {:?}", st, c);
    }

    #[test]
    fn steiner_point_minimises_flower_area(gens in zonogon_gens(), x in point(0.15)) {
        let k = zonogon(&gens, [0.05, -0.05]);
        let st = steiner_point(&k).unwrap();
        prop_assert!(flower_area(&k, st).unwrap() <= flower_area(&k, x).unwrap() + 1e-10);
    }

    #[test]
    fn disk_flower_area_is_quadratic_in_the_pole(r in 0.2..3.0f64, t in 0.0..TAU, s in 0.0..0.95f64) {
        let x = [r * s * t.cos(), r * s * t.sin()];
        let a = flower_area(&ConvexBody::disk([0.0, 0.0], r).unwrap(), x).unwrap();
        prop_assert!((a - PI * (r * r + 0.5 * dot(x, x))).abs() < 1e-9 * r * r);
    }

    #[test]
    fn increment_grows_with_height(t in 0.0..TAU, h in 0.01..0.5f64) {
        let k = ConvexBody::regular_polygon(5, 1.0, 0.2).unwrap();
        let a = increment_area_exact(&k, [(1.0 + h) * t.cos(), (1.0 + h) * t.sin()]).unwrap();
        let b = increment_area_exact(&k, [(1.0 + 2.0 * h) * t.cos(), (1.0 + 2.0 * h) * t.sin()]).unwrap();
        prop_assert!(a >= 0.0 && b >= a);
    }

    #[test]
    fn voronoi_cell_is_sound(pts in prop::collection::vec(point(3.0), 3..40)) {
        let cell = ZeroCell::from_points(&pts, 10.0);
        prop_assert!(cell.is_convex_ccw());
        prop_assert!(cell.edges_match_generators(1e-9));
        for v in &cell.vertices {
            for x in &pts {
                prop_assert!(norm(*v) <= dist(*v, *x) + 1e-9);
            }
        }
        let fewer = ZeroCell::from_points(&pts[..pts.len() / 2], 10.0);
        prop_assert!(cell.area() <= fewer.area() + 1e-12);
        for v in &cell.vertices {
            let inside = fewer.vertices.iter().zip(fewer.vertices.iter().cycle().skip(1)).all(|(a, b)| {
                (b[0] - a[0]) * (v[1] - a[1]) - (b[1] - a[1]) * (v[0] - a[0]) >= -1e-9
            });
            prop_assert!(inside);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conditioned_cells_contain_the_body(seed in any::<u64>(), t in 0.0..TAU) {
        let k = ConvexBody::ellipse([0.1 * t.cos(), 0.1 * t.sin()], 1.0, 0.6, t).unwrap();
        let mut s = sample_conditioned_points(400.0, &k, 3.0, seed).unwrap();
        let cell = voronoi_zero_cell(&mut s).unwrap();
        prop_assert!(contains_body(&cell, &k, 1e-9));
        let m = cell_metrics(&cell, &k).unwrap();
        prop_assert!(m.defect_area >= 0.0 && m.defect_perimeter >= 0.0);
    }

    #[test]
    fn thinning_grows_the_cell(seed in any::<u64>()) {
        let k = ConvexBody::unit_square();
        let mut s = sample_conditioned_points(800.0, &k, 3.5, seed).unwrap();
        let big = voronoi_zero_cell_at(&mut s, 100.0).unwrap();
        let small = voronoi_zero_cell_at(&mut s, 800.0).unwrap();
        prop_assert!(contains_body(&small, &k, 1e-9));
        prop_assert!(small.area() <= big.area() + 1e-12);
        let sparse = s.thinned_points(100.0);
        let dense = s.thinned_points(800.0);
        prop_assert!(sparse.iter().all(|p| dense.contains(p)));
    }
}

#[test]
fn square_flower_has_the_closed_form_area() {
    let a = flower_area(&ConvexBody::unit_square(), [0.0, 0.0]).unwrap();
    assert!((a - (PI + 2.0)).abs() < 1e-9);
}
