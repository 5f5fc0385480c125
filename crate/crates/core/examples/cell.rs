//! One conditioned Voronoi zero cell and one Crofton cell with their metrics.

use flowercell::cell::{cell_metrics, crofton_zero_cell, voronoi_zero_cell};
use flowercell::sampler::{sample_conditioned_lines, sample_conditioned_points};
use flowercell::{ConvexBody, Result};

fn main() -> Result<()> {
    let k = ConvexBody::regular_polygon(6, 1.0, 0.3)?;
    let lambda = 2000.0;
    let mut pts = sample_conditioned_points(lambda, &k, 3.0, 9)?;
    let c = voronoi_zero_cell(&mut pts)?;
    println!("voronoi: {:#?}", cell_metrics(&c, &k)?);
    let mut lines = sample_conditioned_lines(lambda / 10.0, &k, 3.0, 9)?;
    let c = crofton_zero_cell(&mut lines)?;
    println!("crofton: {:#?}", cell_metrics(&c, &k)?);
    Ok(())
}
