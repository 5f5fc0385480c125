//! Conditioned Poisson points and lines, and the coupling by thinning.

use flowercell::sampler::{sample_conditioned_lines, sample_conditioned_points, sample_nucleus};
use flowercell::{ConvexBody, Result};

fn main() -> Result<()> {
    let k = ConvexBody::unit_disk();
    let pts = sample_conditioned_points(500.0, &k, 2.5, 42)?;
    println!("points at lambda 500 within radius 2.5: {}", pts.points.len());
    for l in [50.0, 200.0, 500.0] {
        println!("  thinned to lambda {l}: {}", pts.thinned_points(l).len());
    }
    let lines = sample_conditioned_lines(20.0, &k, 4.0, 42)?;
    println!("lines at lambda 20 within radius 4 missing K: {}", lines.lines.len());
    let nuc = sample_nucleus(1e3, &k, 500, 42)?;
    println!(
        "nucleus draws: {} accepted of {} proposals, max log ratio {:.3e}",
        nuc.points.len(),
        nuc.proposals,
        nuc.max_log_ratio
    );
    Ok(())
}
