//! Limit constants for a smooth body and a polygon.

use flowercell::laws::constants_table;
use flowercell::{ConvexBody, Result};

fn main() -> Result<()> {
    for (name, k) in [("unit disk", ConvexBody::unit_disk()), ("unit square", ConvexBody::unit_square())] {
        println!("{name}");
        for (spec, c, rate) in constants_table(&k)? {
            println!("  {:?} {:?}: {c:.8} at rate {}", spec.model, spec.functional, rate.label());
        }
    }
    Ok(())
}
