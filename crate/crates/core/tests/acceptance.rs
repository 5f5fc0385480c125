//! Acceptance suite: one test and one printed PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture --test-threads=1`
//! to see the lines in order.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flowercell::domain::StarlikeDomain;
use flowercell::experiment::{run_experiment, run_experiment_in, Check, ExperimentConfig, ExperimentOutcome};
use flowercell::flower::{flower_area, steiner_point};
use flowercell::geom::{dist, norm, Angle};
use flowercell::increment::{
    increment_area_exact, increment_area_polygon_asymptotic, increment_area_smooth_asymptotic, polygon_query_point,
    smooth_query_point,
};
use flowercell::laws::{self, LawSpec, Model};
use flowercell::quad;
use flowercell::sampler::sample_lines_disk;
use flowercell::shape::{antiorthotomic, distance_to_boundary};
use flowercell::{export, BodyKind, ConvexBody};

const DISK: &str = r#"{"kind":"smooth","model":"disk","params":{"radius":1.0}}"#;
const SQUARE: &str = r#"{"kind":"polygon","vertices":[[-1,-1],[1,-1],[1,1],[-1,1]]}"#;

fn line(criterion: u32, passed: bool, detail: impl AsRef<str>) -> bool {
    println!("criterion {criterion:>2}: {} | {}", if passed { "PASS" } else { "FAIL" }, detail.as_ref());
    passed
}

fn config(body: &str, model: &str, lambdas: &[f64], reps: u64, seed: u64, checks: &[&str]) -> ExperimentConfig {
    let checks: Vec<String> = checks.iter().map(|c| format!("\"{c}\"")).collect();
    ExperimentConfig::from_json(&format!(
        r#"{{"body":{body},"model":"{model}","lambdas":{lambdas:?},"replicates":{reps},"seed":{seed},"checks":[{}]}}"#,
        checks.join(",")
    ))
    .unwrap()
}

fn checks_of(out: &ExperimentOutcome, check: Check) -> Vec<String> {
    out.checks
        .iter()
        .filter(|c| c.check == check)
        .map(|c| {
            let l = c.lambda.map(|l| format!("@{l}")).unwrap_or_default();
            format!("{}{l}={:.4}{}", c.name, c.statistic, if c.passed { "" } else { "(!)" })
        })
        .collect()
}

fn all_pass(out: &ExperimentOutcome, check: Check) -> bool {
    let mut any = false;
    for c in out.checks.iter().filter(|c| c.check == check) {
        any = true;
        if !c.passed {
            return false;
        }
    }
    any
}

/// Centrally symmetric polygon built as a zonogon around `center`.
fn zonogon(rng: &mut ChaCha8Rng, center: [f64; 2]) -> ConvexBody {
    let m = rng.random_range(2..7);
    let mut gens: Vec<(f64, f64)> = (0..m).map(|k| (PI * (k as f64 + rng.random::<f64>() * 0.8) / m as f64, rng.random_range(0.5..1.5))).collect();
    gens.sort_by(|a, b| a.0.total_cmp(&b.0));
    let steps: Vec<[f64; 2]> = gens
        .iter()
        .map(|&(a, l)| [l * a.cos(), l * a.sin()])
        .chain(gens.iter().map(|&(a, l)| [-l * a.cos(), -l * a.sin()]))
        .collect();
    let half: [f64; 2] = gens.iter().fold([0.0, 0.0], |s, &(a, l)| [s[0] + 0.5 * l * a.cos(), s[1] + 0.5 * l * a.sin()]);
    let mut v = [center[0] - half[0], center[1] - half[1]];
    let mut verts = Vec::with_capacity(steps.len());
    for s in steps {
        verts.push(v);
        v = [v[0] + s[0], v[1] + s[1]];
    }
    ConvexBody::polygon(verts).unwrap()
}

#[test]
fn criterion_01_deterministic_geometry() {
    let t = Instant::now();
    let sq = flower_area(&ConvexBody::unit_square(), [0.0, 0.0]).unwrap();
    let mut worst_disk: f64 = 0.0;
    for r in [0.25, 1.0, 3.0] {
        let a = flower_area(&ConvexBody::disk([0.0, 0.0], r).unwrap(), [0.0, 0.0]).unwrap();
        worst_disk = worst_disk.max((a - PI * r * r).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_st: f64 = 0.0;
    for _ in 0..50 {
        let c = [rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)];
        let st = steiner_point(&zonogon(&mut rng, c)).unwrap();
        worst_st = worst_st.max(dist(st, c));
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = (sq - (PI + 2.0)).abs() < 1e-9 && worst_disk < 1e-12 && worst_st < 1e-9;
    let ok = line(
        1,
        ok,
        format!("square flower err {:.1e}, disk err {worst_disk:.1e}, Steiner err {worst_st:.1e}, {secs:.2}s", (sq - PI - 2.0).abs()),
    );
    assert!(ok);
}

#[test]
fn criterion_02_increment_convergence() {
    let t = Instant::now();
    let disk = ConvexBody::unit_disk();
    let th = Angle::new(0.7);
    let mut ok = true;
    let mut parts = Vec::new();
    for (h, tol) in [(1e-2, 0.1), (1e-3, 0.03), (1e-4, 0.01)] {
        let exact = increment_area_exact(&disk, smooth_query_point(&disk, th, h).unwrap()).unwrap();
        let ratio = exact / increment_area_smooth_asymptotic(&disk, th, h).unwrap();
        ok &= (ratio - 1.0).abs() <= tol;
        parts.push(format!("h={h:e}: {ratio:.5}"));
    }
    let sq = ConvexBody::unit_square();
    for (alpha, tol) in [(1e-2, 0.05), (1e-3, 0.01)] {
        let x = polygon_query_point(&sq, 0, 1.0, alpha).unwrap();
        let ratio = increment_area_exact(&sq, x).unwrap() / increment_area_polygon_asymptotic(&sq, 0, 1.0, alpha).unwrap();
        ok &= (ratio - 1.0).abs() <= tol;
        parts.push(format!("alpha={alpha:e}: {ratio:.5}"));
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = line(2, ok && secs < 5.0, format!("{}, {secs:.2}s", parts.join(", ")));
    assert!(ok);
}

#[test]
fn criterion_03_voronoi_efron_identity() {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, body) in [("disk", DISK), ("square", SQUARE)] {
        let out = run_experiment(&config(body, "voronoi", &[50.0, 200.0], 5000, 303, &["efron"])).unwrap();
        ok &= all_pass(&out, Check::Efron);
        parts.push(format!("{name}: {}", checks_of(&out, Check::Efron).join(" ")));
    }
    let ok = line(3, ok, format!("|z| <= 3; {}", parts.join("; ")));
    assert!(ok);
}

fn disk_run() -> &'static ExperimentOutcome {
    static RUN: std::sync::OnceLock<ExperimentOutcome> = std::sync::OnceLock::new();
    RUN.get_or_init(|| {
        let mut cfg = config(DISK, "voronoi", &[1e3, 1e4], 3000, 404, &["theorem-constant", "density-ks"]);
        cfg.tolerances.theorem_rel = vec![0.15, 0.08];
        run_experiment(&cfg).unwrap()
    })
}

#[test]
fn criterion_04_smooth_voronoi_constants() {
    let out = disk_run();
    let mut ok = all_pass(out, Check::TheoremConstant);
    let e3 = out.report("defect_area", 1e3).unwrap().relative_error().unwrap();
    let e4 = out.report("defect_area", 1e4).unwrap().relative_error().unwrap();
    let shrinking = e4 < e3;
    ok &= shrinking;
    let ok = line(
        4,
        ok,
        format!(
            "rel err <= 15%/8%: {}; area gap {:.4} -> {:.4} ({})",
            checks_of(out, Check::TheoremConstant).join(" "),
            e3,
            e4,
            if shrinking { "shrinking" } else { "not shrinking" }
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_05_square_voronoi() {
    let out = run_experiment(&config(SQUARE, "voronoi", &[1e3, 1e4, 1e5], 1000, 505, &["vertex-slope"])).unwrap();
    let slope_ok = all_pass(&out, Check::VertexSlope);
    let area = out.report("defect_area", 1e4).unwrap();
    let area_err = area.relative_error().unwrap();
    let ok = line(
        5,
        slope_ok && area_err <= 0.10,
        format!(
            "{}; sqrt(lambda) area at 1e4 = {:.4} vs {:.4} (rel {:.4})",
            checks_of(&out, Check::VertexSlope).join(" "),
            area.mean,
            area.theory.unwrap(),
            area_err
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_06_densities() {
    let mut worst: f64 = 0.0;
    for (r, h) in [(1.0, 1.0), (2.0, 0.5), (0.3, 1.7)] {
        worst = worst.max((laws::f_s_total(r, h).unwrap() - 1.0).abs());
        for x in [0.0, 0.8] {
            let m = laws::intensity_sigma_s_marginal(r, h, x).unwrap();
            worst = worst.max((m - laws::vertex_integrand(r, h)).abs());
        }
    }
    for d in [0.5, 1.0, 2.0] {
        worst = worst.max((laws::f_total(d).unwrap() - 1.0).abs());
        for tau in [0.0, 0.5] {
            worst = worst.max((laws::g_total(d, 2.0, tau).unwrap() - 1.0).abs());
        }
    }
    let disk = ConvexBody::unit_disk();
    let via_sigma = quad::integrate_periodic(
        |t| {
            let (r, h) = laws::smooth_local(&disk, t).unwrap();
            laws::intensity_sigma_s_marginal(r, h, 0.0).unwrap() * r
        },
        &[],
        1e-9,
    )
    .unwrap()
    .value;
    let spec = LawSpec { model: Model::Voronoi, body_class: BodyKind::Smooth, functional: laws::Functional::Vertices };
    let (c, _) = laws::theorem_constant(spec, &disk).unwrap();
    worst = worst.max((via_sigma - c).abs());
    let out = disk_run();
    let ks = out.checks.iter().find(|c| c.check == Check::DensityKs && c.lambda == Some(1e4)).unwrap();
    let ok = line(
        6,
        worst < 1e-6 && ks.passed,
        format!("worst integral err {worst:.1e}; KS p at 1e4 = {:.4} (> {})", ks.statistic, ks.threshold),
    );
    assert!(ok);
}

#[test]
fn criterion_07_steiner_gaussian() {
    let out = run_experiment(&config(DISK, "steiner", &[1e4], 2000, 707, &["steiner-gaussian"])).unwrap();
    let ok = line(7, all_pass(&out, Check::SteinerGaussian), checks_of(&out, Check::SteinerGaussian).join(" "));
    let bound = out.checks.iter().find(|c| c.name == "acceptance_ratio_bound").unwrap();
    assert!(bound.statistic <= 0.0, "acceptance ratio exceeded one: log ratio {}", bound.statistic);
    assert!(ok);
}

#[test]
fn criterion_08_limit_shape() {
    let domain = StarlikeDomain::disk([0.3, 0.0], 1.0).unwrap();
    let curve = antiorthotomic(&domain).unwrap();
    let mut equi: f64 = 0.0;
    let mut ellipse: f64 = 0.0;
    for &x in &curve.points {
        equi = equi.max((norm(x) - distance_to_boundary(&domain, x)).abs());
        ellipse = ellipse.max((norm(x) + dist(x, [0.3, 0.0]) - 1.0).abs());
    }
    let cfg = ExperimentConfig::from_json(
        r#"{"domain":{"d":"disk","center":[0.3,0.0],"radius":1.0},"model":"shape","lambdas":[1000.0,10000.0],
            "replicates":40,"seed":808,"coupled":true,"checks":["limit-shape"]}"#,
    )
    .unwrap();
    let out = run_experiment(&cfg).unwrap();
    let hd: Vec<String> = out.reports.iter().map(|r| format!("{:.4}@{}", r.mean, r.lambda)).collect();
    let ok = line(
        8,
        equi < 1e-6 && ellipse < 1e-6 && all_pass(&out, Check::LimitShape),
        format!("equidistance err {equi:.1e}, focal-sum err {ellipse:.1e}, mean d_H {}", hd.join(" ")),
    );
    assert!(ok);
}

#[test]
fn criterion_09_crofton() {
    let k = ConvexBody::disk([0.0, 0.0], 0.05).unwrap();
    let mut w = flowercell::stats::Welford::new();
    for rep in 0..4000 {
        w.push(sample_lines_disk(5.0, &k, 10.0, 909, rep).unwrap().lines.len() as f64);
    }
    let expected = 5.0 * 2.0 * PI * (10.0 - 0.05);
    let z_count = (w.mean() - expected).abs() / w.std_error();
    let efron = run_experiment(&config(DISK, "crofton", &[200.0], 5000, 910, &["efron"])).unwrap();
    let mut cfg = config(DISK, "crofton", &[1e4], 1000, 911, &["theorem-constant"]);
    cfg.tolerances.theorem_rel = vec![0.10];
    let vertices = run_experiment(&cfg).unwrap();
    let v = vertices.checks.iter().find(|c| c.name == "vertices").unwrap();
    let ok = line(
        9,
        z_count <= 3.0 && all_pass(&efron, Check::Efron) && v.passed,
        format!(
            "line count {:.2} vs {expected:.2} (z {z_count:.2}); {}; vertex rel err at 1e4 {:.4}",
            w.mean(),
            checks_of(&efron, Check::Efron).join(" "),
            v.statistic
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_10_determinism() {
    let configs = [
        config(DISK, "voronoi", &[100.0, 1000.0], 60, 1010, &["efron", "theorem-constant", "density-ks"]),
        config(SQUARE, "voronoi", &[100.0, 1000.0], 60, 1011, &["vertex-slope"]),
        config(DISK, "crofton", &[100.0], 60, 1012, &["efron"]),
        config(DISK, "steiner", &[1e3], 200, 1013, &["steiner-gaussian"]),
        ExperimentConfig::from_json(
            r#"{"domain":{"d":"disk","center":[0.3,0.0],"radius":1.0},"model":"shape","lambdas":[100.0,1000.0],
                "replicates":6,"seed":1014,"coupled":true}"#,
        )
        .unwrap(),
    ];
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let csv = |pool: &rayon::ThreadPool| -> String {
        configs.iter().map(|c| export::to_csv(&run_experiment_in(c, pool).unwrap().reports)).collect()
    };
    let a = csv(&parallel);
    let b = csv(&parallel);
    let c = csv(&serial);
    let ok = line(
        10,
        a == b && a == c,
        format!("{} CSV bytes; repeat identical: {}; serial == parallel: {}", a.len(), a == b, a == c),
    );
    assert!(ok);
}
