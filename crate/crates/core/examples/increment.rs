//! Exact flower increments against their leading-order asymptotics.

use flowercell::geom::Angle;
use flowercell::increment::{
    increment_area_exact, increment_area_polygon_asymptotic, increment_area_smooth_asymptotic, polygon_query_point,
    smooth_query_point,
};
use flowercell::{ConvexBody, Result};

fn main() -> Result<()> {
    let k = ConvexBody::ellipse([0.0, 0.0], 1.3, 0.8, 0.0)?;
    let th = Angle::new(0.9);
    println!("smooth body, normal angle 0.9");
    for h in [1e-1, 1e-2, 1e-3, 1e-4] {
        let exact = increment_area_exact(&k, smooth_query_point(&k, th, h)?)?;
        let asym = increment_area_smooth_asymptotic(&k, th, h)?;
        println!("  h = {h:.0e}: exact {exact:.6e}  asymptotic {asym:.6e}  ratio {:.5}", exact / asym);
    }
    let sq = ConvexBody::unit_square();
    println!("square, vertex 0, rho = 1");
    for alpha in [1e-1, 1e-2, 1e-3] {
        let exact = increment_area_exact(&sq, polygon_query_point(&sq, 0, 1.0, alpha)?)?;
        let asym = increment_area_polygon_asymptotic(&sq, 0, 1.0, alpha)?;
        println!("  alpha = {alpha:.0e}: ratio {:.5}", exact / asym);
    }
    Ok(())
}
