//! Maximal flower and limit curve of a domain that is not itself a flower.

use flowercell::domain::StarlikeDomain;
use flowercell::laws::Functional;
use flowercell::shape::{antiorthotomic_with, domain_limit_constants_with, is_voronoi_flower, maximal_flower};
use flowercell::Result;

fn main() -> Result<()> {
    let d = StarlikeDomain::fourier(1.0, vec![0.0, 0.45], vec![0.0, 0.0])?;
    println!("flower already: {}", is_voronoi_flower(&d));
    let dec = maximal_flower(&d)?;
    for f in &dec.filler_arcs {
        println!(
            "filler centre ({:.4}, {:.4}) radius {:.4} on [{:.4}, {:.4}]",
            f.center[0], f.center[1], f.radius, f.angles[0], f.angles[1]
        );
    }
    let curve = antiorthotomic_with(&d, &dec, 256)?;
    println!("limit curve: {} points", curve.points.len());
    for f in [Functional::DefectArea, Functional::DefectPerimeter, Functional::Vertices] {
        println!("{f:?}: {:.6}", domain_limit_constants_with(&d, &dec, f)?);
    }
    Ok(())
}
