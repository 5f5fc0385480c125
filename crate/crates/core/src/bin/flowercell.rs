use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use flowercell::body::BodySpec;
use flowercell::domain::{DomainSpec, StarlikeDomain};
use flowercell::experiment::{run_experiment, simulate_cell, ExperimentConfig, ExperimentModel};
use flowercell::laws::{constants_table, Functional};
use flowercell::render::{render_svg, Scene};
use flowercell::shape::{self, antiorthotomic_with, domain_limit_constants_with, is_voronoi_flower, maximal_flower};
use flowercell::{cell, export, ConvexBody, Error, Result};

#[derive(Parser)]
#[command(name = "flowercell", version, about = "Conditioned zero cells, Voronoi flowers and their limit laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// JSON config: an experiment, or a bare body or domain where that suffices.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one cell and print it with its metrics.
    Simulate(Common),
    /// Run a Monte Carlo experiment and its checks.
    Estimate(Common),
    /// Tabulate the limit constants of a body.
    Constants(Common),
    /// Decompose a domain into its maximal flower and limit curve.
    Shape(Common),
    /// Draw one simulated cell as SVG.
    Render(Common),
}

enum Failure {
    Usage(Error),
    Statistical,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn experiment(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = serde_json::from_value(read_json(&c.config)?)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(l) = c.lambda {
        cfg.lambdas = vec![l];
    }
    if let Some(r) = c.reps {
        cfg.replicates = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn body_of(c: &Common) -> Result<ConvexBody> {
    let v = read_json(&c.config)?;
    match v.get("body") {
        Some(b) => serde_json::from_value::<BodySpec>(b.clone())?.build(),
        None => serde_json::from_value::<BodySpec>(v)?.build(),
    }
}

fn domain_of(c: &Common) -> Result<StarlikeDomain> {
    let v = read_json(&c.config)?;
    match v.get("domain") {
        Some(d) => serde_json::from_value::<DomainSpec>(d.clone())?.build(),
        None => serde_json::from_value::<DomainSpec>(v)?.build(),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn is_json(p: Option<&Path>) -> bool {
    p.is_some_and(|p| p.extension().is_some_and(|e| e == "json"))
}

fn simulate(c: &Common) -> Result<()> {
    let cfg = experiment(c)?;
    let lambda = cfg.lambdas[0];
    let (cell, body) = simulate_cell(&cfg, lambda, 0)?;
    let metrics = match &body {
        Some(b) => Some(cell::cell_metrics(&cell, b)?),
        None => None,
    };
    let v = json!({ "lambda": lambda, "seed": cfg.seed, "cell": cell, "metrics": metrics });
    emit(&(serde_json::to_string_pretty(&v)? + "\n"), c.out.as_deref())
}

fn estimate(c: &Common) -> std::result::Result<(), Failure> {
    let cfg = experiment(c)?;
    let outcome = run_experiment(&cfg)?;
    if let Some(p) = &cfg.outputs.csv {
        std::fs::write(p, export::to_csv(&outcome.reports)).map_err(Error::from)?;
    }
    if let Some(p) = &cfg.outputs.json {
        std::fs::write(p, export::to_json(&outcome.reports)?).map_err(Error::from)?;
    }
    let text = if is_json(c.out.as_deref()) { export::to_json(&outcome.reports)? } else { export::to_csv(&outcome.reports) };
    emit(&text, c.out.as_deref())?;
    for ch in &outcome.checks {
        eprintln!(
            "{} {:?} {} lambda={} statistic={} threshold={}",
            if ch.passed { "PASS" } else { "FAIL" },
            ch.check,
            ch.name,
            ch.lambda.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
            ch.statistic,
            ch.threshold
        );
    }
    if outcome.unbounded.iter().any(|u| *u > 0) {
        eprintln!("unbounded replicates per lambda: {:?}", outcome.unbounded);
    }
    if outcome.passed() { Ok(()) } else { Err(Failure::Statistical) }
}

fn constants(c: &Common) -> Result<()> {
    let body = body_of(c)?;
    let table = constants_table(&body)?;
    let text = if is_json(c.out.as_deref()) {
        let rows: Vec<Value> = table
            .iter()
            .map(|(s, v, r)| json!({"model": s.model, "body_class": s.body_class, "functional": s.functional, "constant": v, "rate": r}))
            .collect();
        serde_json::to_string_pretty(&rows)? + "\n"
    } else {
        let mut s = String::from("model,body_class,functional,constant,rate\n");
        for (spec, v, r) in &table {
            let name = |x: &dyn erased::Named| x.name();
            s += &format!(
                "{},{},{},{},{}\n",
                name(&spec.model),
                name(&spec.body_class),
                name(&spec.functional),
                v,
                r.label()
            );
        }
        s
    };
    emit(&text, c.out.as_deref())
}

mod erased {
    /// Serde name of a unit enum variant.
    pub trait Named {
        fn name(&self) -> String;
    }
    impl<T: serde::Serialize> Named for T {
        fn name(&self) -> String {
            serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
        }
    }
}

fn shape_cmd(c: &Common) -> Result<()> {
    let d = domain_of(c)?;
    let dec = maximal_flower(&d)?;
    let curve = antiorthotomic_with(&d, &dec, 1024)?;
    let mut consts = serde_json::Map::new();
    for (k, f) in [("defect_area", Functional::DefectArea), ("defect_perimeter", Functional::DefectPerimeter), ("vertices", Functional::Vertices)] {
        consts.insert(k.into(), json!(domain_limit_constants_with(&d, &dec, f)?));
    }
    let v = json!({
        "is_voronoi_flower": is_voronoi_flower(&d),
        "decomposition": dec,
        "limit_curve": curve.points,
        "constants": consts,
    });
    emit(&(serde_json::to_string_pretty(&v)? + "\n"), c.out.as_deref())?;
    if let Some(p) = &c.out {
        let mut scene = Scene {
            domain: Some(d.outline(1024)),
            flower: Some(dec.outline(&d, 1024)),
            gamma: Some(curve.points.clone()),
            ..Default::default()
        };
        if let Some(l) = c.lambda {
            let mut s = flowercell::sampler::sample_points_shell(l, std::sync::Arc::new(d.clone()), 1.5, c.seed.unwrap_or(0), 0)?;
            scene.cell = Some(cell::voronoi_zero_cell_at(&mut s, l)?.vertices);
            scene.points = s.points;
        }
        render_svg(&scene, &p.with_extension("svg"))?;
    }
    Ok(())
}

fn render(c: &Common) -> Result<()> {
    let out = c.out.as_deref().ok_or_else(|| Error::Validation("render needs --out".into()))?;
    let cfg = experiment(c)?;
    let lambda = cfg.lambdas[0];
    let (zc, body) = simulate_cell(&cfg, lambda, 0)?;
    let mut scene = Scene { cell: Some(zc.vertices.clone()), ..Default::default() };
    match (&body, cfg.model) {
        (Some(b), _) => {
            scene.body = Some(b.outline(512));
            scene.flower = Some(StarlikeDomain::flower(b.clone(), 1.0)?.outline(512));
        }
        (None, ExperimentModel::Shape) => {
            let d = cfg.build_domain()?;
            scene.domain = Some(d.outline(1024));
            scene.gamma = Some(shape::antiorthotomic(&d)?.points);
        }
        _ => {}
    }
    scene.points = zc
        .generators
        .iter()
        .filter_map(|g| match g {
            cell::Generator::Point { x } => Some(*x),
            _ => None,
        })
        .collect();
    render_svg(&scene, out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate(c) => simulate(c).map_err(Failure::from),
        Command::Estimate(c) => estimate(c),
        Command::Constants(c) => constants(c).map_err(Failure::from),
        Command::Shape(c) => shape_cmd(c).map_err(Failure::from),
        Command::Render(c) => render(c).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Statistical) => ExitCode::from(2),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
