//! Small Monte Carlo experiment, exported as CSV and drawn as SVG.

use flowercell::experiment::{run_experiment, simulate_cell, ExperimentConfig};
use flowercell::render::{render_svg, Scene};
use flowercell::{export, Result};

fn main() -> Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{"body":{"kind":"smooth","model":"disk","params":{"radius":1.0}},
            "model":"voronoi","lambdas":[100.0,400.0],"replicates":200,"seed":1,
            "checks":["efron","theorem-constant"]}"#,
    )?;
    let out = run_experiment(&cfg)?;
    print!("{}", export::to_csv(&out.reports));
    for c in &out.checks {
        println!("{:?} {}: {} ({:.4} vs {})", c.check, c.name, if c.passed { "pass" } else { "fail" }, c.statistic, c.threshold);
    }
    let (cell, body) = simulate_cell(&cfg, 400.0, 0)?;
    let scene = Scene { body: body.map(|b| b.outline(256)), cell: Some(cell.vertices), ..Default::default() };
    let path = std::env::temp_dir().join("flowercell_cell.svg");
    render_svg(&scene, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
